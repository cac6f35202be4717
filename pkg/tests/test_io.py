"""I/O tests: config loading, CSV serialization, chart rendering, CLI."""

from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from conftest import quadrant_config
from stablesim.charts import render_charts, render_compare_grid, render_sensitivity_panels
from stablesim.cli import main
from stablesim.config import default_config_path, load_config, load_quadrant
from stablesim.engine import SERIES_NAMES, run_ensemble, run_sensitivity
from stablesim.errors import ConfigError
from stablesim.model import (
    CollateralManagement,
    CollateralSource,
    Scenario,
    SensitivityFactor,
)
from stablesim.output import read_paths_csv, write_csv


def small_config(name="usdt", **overrides):
    base = dict(n_paths=2, n_steps=30, shock_step=10)
    base.update(overrides)
    return replace(quadrant_config(name), **base)


@pytest.fixture(scope="module")
def small_ensemble():
    return run_ensemble(small_config())


# --- config -------------------------------------------------------------------

def test_shipped_default_endogenous_decentral_has_400_percent_ratio():
    spec = load_quadrant(CollateralSource.ENDOGENOUS,
                         CollateralManagement.DECENTRAL)
    assert spec.config.spec.collateral_ratio == 4.0


def test_shipped_defaults_per_quadrant_ratios():
    ratios = {
        (CollateralSource.EXOGENOUS, CollateralManagement.CENTRAL): 1.0,
        (CollateralSource.EXOGENOUS, CollateralManagement.DECENTRAL): 1.5,
        (CollateralSource.ENDOGENOUS, CollateralManagement.DECENTRAL): 4.0,
    }
    for (source, management), ratio in ratios.items():
        spec = load_quadrant(source, management)
        assert spec.config.spec.collateral_ratio == ratio


def test_minimal_config_fills_defaults(tmp_path):
    cfg = tmp_path / "mini.cfg"
    cfg.write_text("[coin]\nsource = exogenous\nmanagement = central\n")
    spec = load_config(cfg)
    assert spec.config.n_paths == 50
    assert spec.config.n_steps == 500
    assert spec.config.spec.demand.base_demand == 100.0


def test_config_overrides_defaults(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("[coin]\nsource = exogenous\nmanagement = central\n"
                   "[run]\nn_paths = 7\nseed = 99\n")
    spec = load_config(cfg)
    assert spec.config.n_paths == 7
    assert spec.config.seed == 99


def test_config_rejects_unknown_key(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("[coin]\nsource = exogenous\nmanagement = central\n"
                   "[run]\nn_pths = 7\n")
    with pytest.raises(ConfigError, match="n_pths"):
        load_config(cfg)


def test_config_rejects_unknown_section(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("[coin]\nsource = exogenous\nmanagement = central\n"
                   "[exchange]\nvenue = dex\n")
    with pytest.raises(ConfigError, match="exchange"):
        load_config(cfg)


def test_config_rejects_out_of_range_fees(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("[coin]\nsource = exogenous\nmanagement = central\n"
                   "[fees]\nfees = 1.5\n")
    with pytest.raises(ConfigError, match="fees must lie"):
        load_config(cfg)


def test_config_requires_quadrant(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("[run]\nn_paths = 3\n")
    with pytest.raises(ConfigError, match="source"):
        load_config(cfg)


def test_config_missing_file():
    with pytest.raises(ConfigError, match="not found"):
        load_config("/nonexistent/experiment.cfg")


def test_scenario_and_seed_overrides(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("[coin]\nsource = exogenous\nmanagement = central\n")
    spec = load_config(cfg, scenario=Scenario.NEGATIVE_SHOCK, seed=123)
    assert spec.config.scenario is Scenario.NEGATIVE_SHOCK
    assert spec.config.seed == 123


# --- CSV ------------------------------------------------------------------------

def test_paths_csv_row_count_and_header(tmp_path, small_ensemble):
    write_csv(small_ensemble, tmp_path)
    lines = (tmp_path / "paths.csv").read_text().splitlines()
    assert lines[0] == ("path,step,price_stablecoin,price_collateral,"
                        "demand_user,demand_investor,demand_staking,"
                        "supply_stablecoin,supply_collateral,collateral_level")
    assert len(lines) == 1 + 2 * 30


def test_csv_round_trip_at_serialized_precision(tmp_path, small_ensemble):
    write_csv(small_ensemble, tmp_path)
    parsed = read_paths_csv(tmp_path / "paths.csv")
    for path in small_ensemble.paths:
        for name in SERIES_NAMES:
            got = parsed[path.path_index][name]
            assert np.allclose(got, path.series[name], rtol=0, atol=5e-10)


def test_csv_reruns_are_byte_identical(tmp_path):
    config = small_config()
    write_csv(run_ensemble(config), tmp_path / "a")
    write_csv(run_ensemble(config), tmp_path / "b")
    for name in ("paths.csv", "aggregates.csv", "events.csv"):
        assert (tmp_path / "a" / name).read_bytes() \
            == (tmp_path / "b" / name).read_bytes()


def test_first_baseline_price_serializes_on_peg(tmp_path, small_ensemble):
    write_csv(small_ensemble, tmp_path)
    first = (tmp_path / "paths.csv").read_text().splitlines()[1]
    assert first.split(",")[2] == "1.000000000"


def test_events_csv_lists_liquidations(tmp_path):
    config = small_config("susd", n_paths=2, n_steps=150, shock_step=50,
                          scenario=Scenario.NEGATIVE_SHOCK)
    ensemble = run_ensemble(config)
    write_csv(ensemble, tmp_path)
    text = (tmp_path / "events.csv").read_text()
    assert "liquidation" in text


# --- charts -----------------------------------------------------------------------

def test_three_scenario_charts(tmp_path):
    results = {s: run_ensemble(small_config(scenario=s)) for s in Scenario}
    written = render_charts(results, tmp_path)
    assert sorted(p.name for p in written) == ["demand.svg", "price.svg"]
    for p in written:
        body = p.read_text()
        assert body.count("<svg") == 1


def test_chart_bytes_are_deterministic(tmp_path):
    results = {Scenario.BASELINE: run_ensemble(small_config())}
    a = render_charts(results, tmp_path / "a")
    b = render_charts(results, tmp_path / "b")
    for pa, pb in zip(a, b):
        assert pa.read_bytes() == pb.read_bytes()


def test_empty_results_write_no_charts(tmp_path, capsys):
    written = render_charts({}, tmp_path)
    assert written == []
    assert "no ensemble data" in capsys.readouterr().out


def test_sensitivity_panels_one_per_multiplier(tmp_path):
    config = small_config("terra", scenario=Scenario.NEGATIVE_SHOCK)
    results = run_sensitivity(config, SensitivityFactor.SHOCK_MAGNITUDE)
    written = render_sensitivity_panels("shock", results, tmp_path)
    assert len(written) == 2
    body = written[1].read_text()
    for mult in ("x0.5", "x0.75", "x1", "x1.25", "x1.5"):
        assert mult in body


def test_compare_grid_has_four_panels(tmp_path):
    grid = {}
    for name in ("usdt", "dai", "terra", "susd"):
        ens = run_ensemble(small_config(name))
        from stablesim.model import quadrant_label
        grid[quadrant_label(ens.config.spec)] = {Scenario.BASELINE: ens}
    written = render_compare_grid(grid, tmp_path)
    assert sorted(p.name for p in written) == ["compare_demand.svg",
                                               "compare_price.svg"]
    body = written[0].read_text()
    for label in grid:
        assert label in body


# --- CLI --------------------------------------------------------------------------

def write_small_cfg(tmp_path, name="usdt"):
    src = {"usdt": ("exogenous", "central"), "dai": ("exogenous", "decentral"),
           "terra": ("endogenous", "central"),
           "susd": ("endogenous", "decentral")}[name]
    cfg = tmp_path / "exp.cfg"
    cfg.write_text(f"[coin]\nsource = {src[0]}\nmanagement = {src[1]}\n"
                   "[run]\nn_paths = 2\nn_steps = 30\nshock_step = 10\n")
    return cfg


def test_cli_run_happy_path(tmp_path, capsys):
    cfg = write_small_cfg(tmp_path)
    code = main(["run", "--config", str(cfg), "--scenario", "baseline",
                 "--out", str(tmp_path / "out")])
    assert code == 0
    for name in ("paths.csv", "aggregates.csv", "events.csv", "demand.svg",
                 "price.svg"):
        assert (tmp_path / "out" / name).exists()


def test_cli_run_all_scenarios(tmp_path):
    cfg = write_small_cfg(tmp_path)
    code = main(["run", "--config", str(cfg), "--scenario", "all",
                 "--out", str(tmp_path / "out")])
    assert code == 0
    for scenario in ("baseline", "negative", "positive"):
        assert (tmp_path / "out" / scenario / "paths.csv").exists()
    assert (tmp_path / "out" / "price.svg").exists()


def test_cli_rejects_bad_config(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("[coin]\nsource = exogenous\nmanagement = central\n"
                   "[fees]\nfees = 1.5\n")
    code = main(["run", "--config", str(cfg)])
    assert code == 1
    assert "fees" in capsys.readouterr().err


def test_cli_unknown_subcommand_exits_one(capsys):
    assert main(["frobnicate"]) == 1


def test_cli_collateral_sweep_on_fiat_backed_exits_one(tmp_path, capsys):
    cfg = write_small_cfg(tmp_path, "usdt")
    code = main(["sweep", "--config", str(cfg), "--factor", "collateral",
                 "--out", str(tmp_path / "out")])
    assert code == 1
    assert "not analyzable" in capsys.readouterr().err


def test_cli_sweep_writes_multiplier_dirs(tmp_path):
    cfg = write_small_cfg(tmp_path, "terra")
    code = main(["sweep", "--config", str(cfg), "--factor", "volatility",
                 "--out", str(tmp_path / "out"), "--no-charts"])
    assert code == 0
    for mult in ("0.50", "0.75", "1.00", "1.25", "1.50"):
        assert (tmp_path / "out" / f"mult_{mult}" / "paths.csv").exists()


def test_cli_env_seed_override(tmp_path, monkeypatch):
    cfg = write_small_cfg(tmp_path)
    monkeypatch.setenv("STABLESIM_SEED", "777")
    assert main(["run", "--config", str(cfg), "--out",
                 str(tmp_path / "a"), "--no-charts"]) == 0
    monkeypatch.delenv("STABLESIM_SEED")
    assert main(["run", "--config", str(cfg), "--seed", "777", "--out",
                 str(tmp_path / "b"), "--no-charts"]) == 0
    assert (tmp_path / "a" / "paths.csv").read_bytes() \
        == (tmp_path / "b" / "paths.csv").read_bytes()


def test_cli_control_failure_exit_code(tmp_path, monkeypatch):
    from stablesim import cli as cli_module
    from stablesim.engine import EnsembleResult

    cfg = write_small_cfg(tmp_path)

    def fake_run_ensemble(config):
        return EnsembleResult(config=config, paths=[], aggregates={},
                              failures=[(0, "tick 3: supply-conservation: boom")])

    monkeypatch.setattr(cli_module, "run_ensemble", fake_run_ensemble)
    code = main(["run", "--config", str(cfg), "--out", str(tmp_path / "out"),
                 "--no-charts"])
    assert code == 2


def test_cli_compare_emits_grid(tmp_path):
    code = main(["compare", "--paths", "2", "--steps", "40",
                 "--out", str(tmp_path / "cmp")])
    assert code == 0
    for stem in ("exogenous-central", "exogenous-decentral",
                 "endogenous-central", "endogenous-decentral"):
        for scenario in ("baseline", "negative", "positive"):
            assert (tmp_path / "cmp" / stem / scenario / "paths.csv").exists()
    assert (tmp_path / "cmp" / "compare_demand.svg").exists()
    assert (tmp_path / "cmp" / "compare_price.svg").exists()


def test_cli_io_error_exit_code(tmp_path):
    cfg = write_small_cfg(tmp_path)
    blocker = tmp_path / "blocked"
    blocker.write_text("not a directory")
    code = main(["run", "--config", str(cfg), "--out",
                 str(blocker / "sub"), "--no-charts"])
    assert code == 3
