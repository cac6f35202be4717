"""Deterministic agent-based Monte Carlo simulator for stablecoin designs."""

from .model import (
    CollateralManagement,
    CollateralSource,
    DemandParams,
    EndogenousCollateralParams,
    ExogenousCollateralParams,
    MarketState,
    Scenario,
    SensitivityFactor,
    SensitivitySetting,
    SimConfig,
    StablecoinSpec,
    StakingParams,
    Wallet,
    collateral_level,
    quadrant_label,
)
from .engine import (
    EnsembleResult,
    PathResult,
    run_ensemble,
    run_path,
    run_sensitivity,
)
from .errors import ConfigError, ControlFailure, NotAnalyzableError, SimulationError

__version__ = "0.1.0"

__all__ = [
    "CollateralManagement",
    "CollateralSource",
    "ConfigError",
    "ControlFailure",
    "DemandParams",
    "EndogenousCollateralParams",
    "EnsembleResult",
    "ExogenousCollateralParams",
    "MarketState",
    "NotAnalyzableError",
    "PathResult",
    "Scenario",
    "SensitivityFactor",
    "SensitivitySetting",
    "SimConfig",
    "SimulationError",
    "StablecoinSpec",
    "StakingParams",
    "Wallet",
    "collateral_level",
    "quadrant_label",
    "run_ensemble",
    "run_path",
    "run_sensitivity",
    "__version__",
]
