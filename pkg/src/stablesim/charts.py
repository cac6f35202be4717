"""Static SVG charts: demand and price evolution, quadrant grids, sweep panels.

All figures are rendered through matplotlib's SVG backend with a fixed hash
salt and no embedded date, so identical results produce byte-identical
files.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .engine import EnsembleResult
from .errors import SimulationError
from .model import Scenario

SCENARIO_COLORS = {
    Scenario.BASELINE: "tab:blue",
    Scenario.POSITIVE_SHOCK: "tab:green",
    Scenario.NEGATIVE_SHOCK: "tab:red",
}

_SVG_RC = {
    "svg.hashsalt": "stablesim",
    "figure.dpi": 100,
    "axes.grid": True,
    "grid.alpha": 0.3,
}


def _save(fig, path: Path) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(path, format="svg", metadata={"Date": None})
    except OSError as err:
        raise SimulationError(f"cannot write chart {path}: {err}") from err
    finally:
        plt.close(fig)
    return path


def _plot_series(ax, ensemble: EnsembleResult, series: str, color: str,
                 label: str) -> None:
    agg = ensemble.aggregates[series]
    steps = np.arange(agg["mean"].size)
    ax.plot(steps, agg["mean"], color=color, lw=1.2, label=label)
    ax.fill_between(steps, agg["p05"], agg["p95"], color=color, alpha=0.18,
                    lw=0)


def render_charts(results: dict[Scenario, EnsembleResult],
                  out_dir: str | Path) -> list[Path]:
    """Demand and price charts overlaying the given scenarios.

    Each chart shows the cross-path mean with a 5th-95th percentile band per
    scenario. Returns the written files; an empty result set writes nothing.
    """
    results = {s: e for s, e in results.items() if e.paths and e.n_steps > 0}
    if not results:
        print("no ensemble data; skipping charts")
        return []
    out = Path(out_dir)
    written = []
    with matplotlib.rc_context(_SVG_RC):
        for series, ylabel, fname in (
                ("demand_user", "user demand (USD)", "demand.svg"),
                ("price_stablecoin", "stablecoin price (USD)", "price.svg")):
            fig, ax = plt.subplots(figsize=(7, 4))
            for scenario in Scenario:
                if scenario in results:
                    _plot_series(ax, results[scenario], series,
                                 SCENARIO_COLORS[scenario], scenario.value)
            if series == "price_stablecoin":
                ax.axhline(1.0, color="gray", lw=0.6, ls="--")
            ax.set_xlabel("time step")
            ax.set_ylabel(ylabel)
            ax.legend(loc="best")
            fig.tight_layout()
            written.append(_save(fig, out / fname))
    return written


def render_compare_grid(results: dict[str, dict[Scenario, EnsembleResult]],
                        out_dir: str | Path) -> list[Path]:
    """One 2x2 panel per quadrant for demand and for price.

    `results` maps quadrant labels ("exogenous/central", ...) to their
    per-scenario ensembles.
    """
    if not results:
        print("no ensemble data; skipping charts")
        return []
    out = Path(out_dir)
    labels = sorted(results)
    written = []
    with matplotlib.rc_context(_SVG_RC):
        for series, ylabel, fname in (
                ("demand_user", "user demand (USD)", "compare_demand.svg"),
                ("price_stablecoin", "stablecoin price (USD)",
                 "compare_price.svg")):
            rows = 2 if len(labels) > 2 else 1
            cols = 2 if len(labels) > 1 else 1
            fig, axes = plt.subplots(rows, cols,
                                     figsize=(11, 4.5 * rows), squeeze=False)
            for i, label in enumerate(labels):
                ax = axes[i // cols][i % cols]
                for scenario in Scenario:
                    if scenario in results[label]:
                        _plot_series(ax, results[label][scenario], series,
                                     SCENARIO_COLORS[scenario], scenario.value)
                if series == "price_stablecoin":
                    ax.axhline(1.0, color="gray", lw=0.6, ls="--")
                ax.set_title(label)
                ax.set_xlabel("time step")
                ax.set_ylabel(ylabel)
                ax.legend(loc="best", fontsize=8)
            for j in range(len(labels), rows * cols):
                axes[j // cols][j % cols].axis("off")
            fig.tight_layout()
            written.append(_save(fig, out / fname))
    return written


def render_sensitivity_panels(factor_name: str,
                              results: dict[float, EnsembleResult],
                              out_dir: str | Path) -> list[Path]:
    """One panel per multiplier, for demand and for price."""
    results = {m: e for m, e in results.items() if e.paths and e.n_steps > 0}
    if not results:
        print("no ensemble data; skipping charts")
        return []
    out = Path(out_dir)
    multipliers = sorted(results)
    written = []
    with matplotlib.rc_context(_SVG_RC):
        for series, ylabel, stem in (
                ("demand_user", "user demand (USD)", "demand"),
                ("price_stablecoin", "stablecoin price (USD)", "price")):
            fig, axes = plt.subplots(1, len(multipliers),
                                     figsize=(3.2 * len(multipliers), 3.4),
                                     squeeze=False, sharey=True)
            for i, mult in enumerate(multipliers):
                ax = axes[0][i]
                ens = results[mult]
                color = SCENARIO_COLORS.get(ens.config.scenario, "tab:blue")
                _plot_series(ax, ens, series, color, ens.config.scenario.value)
                if series == "price_stablecoin":
                    ax.axhline(1.0, color="gray", lw=0.6, ls="--")
                ax.set_title(f"x{mult:g}")
                ax.set_xlabel("time step")
                if i == 0:
                    ax.set_ylabel(ylabel)
            fig.suptitle(f"sensitivity: {factor_name}")
            fig.tight_layout()
            written.append(
                _save(fig, out / f"sensitivity_{factor_name}_{stem}.svg"))
    return written
