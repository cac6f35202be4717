"""Shared fixtures: quadrant configs and a session-wide ensemble cache."""

from __future__ import annotations

import pytest

from stablesim.config import load_quadrant
from stablesim.engine import run_ensemble
from stablesim.model import (
    CollateralManagement,
    CollateralSource,
    Scenario,
    SensitivitySetting,
)

QUADRANTS = {
    "usdt": (CollateralSource.EXOGENOUS, CollateralManagement.CENTRAL),
    "dai": (CollateralSource.EXOGENOUS, CollateralManagement.DECENTRAL),
    "terra": (CollateralSource.ENDOGENOUS, CollateralManagement.CENTRAL),
    "susd": (CollateralSource.ENDOGENOUS, CollateralManagement.DECENTRAL),
}

# Criterion outcomes reported by the acceptance module; printed in the
# terminal summary so every pass/fail line is always visible.
ACCEPTANCE_RESULTS: list[tuple[str, bool, str]] = []


def quadrant_config(name: str, scenario=Scenario.BASELINE, **overrides):
    """SimConfig for one shipped quadrant calibration."""
    source, management = QUADRANTS[name]
    config = load_quadrant(source, management, scenario=scenario).config
    if overrides:
        from dataclasses import replace
        config = replace(config, **overrides)
    return config


class EnsembleCache:
    """Runs each (quadrant, scenario, sensitivity) ensemble at most once."""

    def __init__(self):
        self._store = {}

    def get(self, name: str, scenario: Scenario,
            sensitivity: SensitivitySetting | None = None):
        key = (name, scenario, sensitivity)
        if key not in self._store:
            config = quadrant_config(name, scenario)
            if sensitivity is not None:
                config = config.with_sensitivity(sensitivity)
            self._store[key] = run_ensemble(config)
        return self._store[key]

    def all_cached(self):
        return list(self._store.values())


@pytest.fixture(scope="session")
def ensembles() -> EnsembleCache:
    return EnsembleCache()


def record_criterion(name: str, passed: bool, detail: str = "") -> None:
    ACCEPTANCE_RESULTS.append((name, passed, detail))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in ACCEPTANCE_RESULTS:
        status = "PASS" if passed else "FAIL"
        line = f"[{status}] {name}"
        if detail:
            line += f"  ({detail})"
        terminalreporter.write_line(line)
