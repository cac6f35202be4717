"""CSV serialization of ensemble results.

Three files per experiment: paths.csv (per-tick series for every path),
aggregates.csv (cross-path mean/std/p05/p95 per tick), events.csv (clamps,
liquidations, partial fills, control reports). Numbers use 9 decimal places
and rows are ordered by (path, step), so identical results serialize to
byte-identical files.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .engine import SERIES_NAMES, EnsembleResult, PathResult
from .errors import SimulationError

PATHS_HEADER = [
    "path", "step", "price_stablecoin", "price_collateral", "demand_user",
    "demand_investor", "demand_staking", "supply_stablecoin",
    "supply_collateral", "collateral_level",
]

AGG_STATS = ("mean", "std", "p05", "p95")


def _fmt(value: float) -> str:
    return f"{value:.9f}"


def _open_writer(path: Path):
    handle = open(path, "w", encoding="utf-8", newline="")
    return handle, csv.writer(handle, lineterminator="\n")


def write_csv(result: EnsembleResult, out_dir: str | Path) -> list[Path]:
    """Write paths.csv, aggregates.csv, and events.csv into out_dir."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        written = [
            _write_paths(result, out / "paths.csv"),
            _write_aggregates(result, out / "aggregates.csv"),
            _write_events(result, out / "events.csv"),
        ]
    except OSError as err:
        raise SimulationError(f"cannot write CSV output to {out}: {err}") from err
    return written


def _write_paths(result: EnsembleResult, path: Path) -> Path:
    handle, writer = _open_writer(path)
    with handle:
        writer.writerow(PATHS_HEADER)
        for p in result.paths:
            n = p.series["price_stablecoin"].size
            columns = [p.series[name] for name in SERIES_NAMES]
            for step in range(n):
                writer.writerow(
                    [p.path_index, step]
                    + [_fmt(col[step]) for col in columns])
    return path


def _write_aggregates(result: EnsembleResult, path: Path) -> Path:
    handle, writer = _open_writer(path)
    with handle:
        header = ["step"]
        for name in SERIES_NAMES:
            header += [f"{name}_{stat}" for stat in AGG_STATS]
        writer.writerow(header)
        n = result.paths[0].series["price_stablecoin"].size if result.paths else 0
        for step in range(n):
            row: list[str] = [str(step)]
            for name in SERIES_NAMES:
                agg = result.aggregates[name]
                row += [_fmt(agg[stat][step]) for stat in AGG_STATS]
            writer.writerow(row)
    return path


def _write_events(result: EnsembleResult, path: Path) -> Path:
    handle, writer = _open_writer(path)
    with handle:
        writer.writerow(["path", "step", "kind", "detail"])
        for p in result.paths:
            for event in p.events:
                writer.writerow([p.path_index, event.step, event.kind,
                                 event.detail])
        for path_index, message in result.failures:
            writer.writerow([path_index, "", "path-aborted", message])
    return path


def read_paths_csv(path: str | Path) -> dict[int, dict[str, np.ndarray]]:
    """Parse paths.csv back into per-path series arrays (round-trip helper)."""
    series: dict[int, dict[str, list[float]]] = {}
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(handle)
        for row in reader:
            per_path = series.setdefault(int(row["path"]), {
                name: [] for name in SERIES_NAMES})
            for name in SERIES_NAMES:
                per_path[name].append(float(row[name]))
    return {
        index: {name: np.asarray(vals) for name, vals in cols.items()}
        for index, cols in series.items()
    }
