"""Experiment configuration: INI-style files mapped onto SimConfig.

The format is flat key-value pairs grouped into sections (see the shipped
calibration files under stablesim/calibrations/). A user config only needs
the [coin] source and management keys; every omitted key is filled from the
shipped default calibration of that quadrant. Unknown sections or keys are
rejected by name so typos cannot silently change an experiment.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import ConfigError
from .model import (
    CollateralManagement,
    CollateralSource,
    DemandParams,
    EndogenousCollateralParams,
    ExogenousCollateralParams,
    Scenario,
    SimConfig,
    StablecoinSpec,
    StakingParams,
    Wallet,
)

# section -> key -> (type, SimConfig attribute path); the schema is closed.
SCHEMA: dict[str, dict[str, type]] = {
    "run": {
        "n_paths": int, "n_steps": int, "seed": int, "shock_step": int,
        "n_users": int, "n_investors": int, "scenario": str,
    },
    "coin": {
        "source": str, "management": str,
        "collateral_ratio": float, "liquidation_ratio": float,
    },
    "demand": {
        "base_demand": float, "fee_sensitivity": float, "shock_size": float,
        "noise_scale": float, "critical_level": float,
    },
    "fees": {"fees": float},
    "investor": {"liquidity_margin": float},
    "exogenous": {"initial_price": float, "drift": float, "volatility": float},
    "endogenous": {
        "price_scale": float, "perpetual_rate": float, "opportunity_cost": float,
    },
    "staking": {"base_staking": float, "revenue_sensitivity": float},
    "wallets": {
        "user_fiat": float, "user_stablecoin": float, "user_collateral": float,
        "investor_fiat": float, "investor_stablecoin": float,
        "investor_collateral": float,
    },
    "output": {"charts": bool, "out_dir": str},
}

QUADRANT_FILES = {
    (CollateralSource.EXOGENOUS, CollateralManagement.CENTRAL):
        "exogenous-central.cfg",
    (CollateralSource.EXOGENOUS, CollateralManagement.DECENTRAL):
        "exogenous-decentral.cfg",
    (CollateralSource.ENDOGENOUS, CollateralManagement.CENTRAL):
        "endogenous-central.cfg",
    (CollateralSource.ENDOGENOUS, CollateralManagement.DECENTRAL):
        "endogenous-decentral.cfg",
}


@dataclass(frozen=True)
class ExperimentSpec:
    """A fully validated experiment: simulation config plus output options."""

    config: SimConfig
    charts: bool = True
    out_dir: str = "out"


def default_config_path(source: CollateralSource,
                        management: CollateralManagement) -> Path:
    """Filesystem path of the shipped calibration for one quadrant."""
    name = QUADRANT_FILES[(source, management)]
    return Path(str(resources.files("stablesim").joinpath("calibrations", name)))


def _read_ini(path: Path) -> dict[str, dict[str, str]]:
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path, "r", encoding="utf-8") as handle:
            parser.read_file(handle)
    except OSError as err:
        raise ConfigError(f"cannot read config file {path}: {err}") from err
    except configparser.Error as err:
        raise ConfigError(f"cannot parse config file {path}: {err}") from err
    return {section: dict(parser.items(section))
            for section in parser.sections()}


def _check_schema(data: dict[str, dict[str, str]], path: Path) -> None:
    for section, entries in data.items():
        if section not in SCHEMA:
            raise ConfigError(f"{path}: unknown section [{section}]")
        for key in entries:
            if key not in SCHEMA[section]:
                raise ConfigError(f"{path}: unknown key '{key}' in [{section}]")


def _coerce(section: str, key: str, raw: str, path: Path):
    kind = SCHEMA[section][key]
    try:
        if kind is bool:
            lowered = raw.strip().lower()
            if lowered in ("true", "yes", "on", "1"):
                return True
            if lowered in ("false", "no", "off", "0"):
                return False
            raise ValueError(raw)
        return kind(raw)
    except ValueError as err:
        raise ConfigError(
            f"{path}: key '{key}' in [{section}] is not a valid "
            f"{kind.__name__}: {raw!r}") from err


def _parse_enum(value: str, mapping: dict[str, object], what: str):
    try:
        return mapping[value.strip().lower()]
    except KeyError:
        raise ConfigError(
            f"{what} must be one of {sorted(mapping)}, got {value!r}") from None


def load_config(path: str | Path, scenario: Scenario | None = None,
                seed: int | None = None) -> ExperimentSpec:
    """Load, default-fill, and validate an experiment configuration.

    The quadrant ([coin] source and management) must be present in the file;
    all other keys default to the shipped calibration for that quadrant.
    Optional arguments override the file's scenario and seed.
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    user = _read_ini(path)
    _check_schema(user, path)

    coin = user.get("coin", {})
    if "source" not in coin or "management" not in coin:
        raise ConfigError(
            f"{path}: [coin] must set both 'source' and 'management'")
    source = _parse_enum(coin["source"],
                         {e.value: e for e in CollateralSource}, "source")
    management = _parse_enum(coin["management"],
                             {e.value: e for e in CollateralManagement},
                             "management")

    defaults_path = default_config_path(source, management)
    merged = _read_ini(defaults_path)
    _check_schema(merged, defaults_path)
    for section, entries in user.items():
        merged.setdefault(section, {}).update(entries)

    values: dict[str, dict[str, object]] = {}
    for section, entries in merged.items():
        values[section] = {key: _coerce(section, key, raw, path)
                           for key, raw in entries.items()}

    run = values.get("run", {})
    scenario_value = scenario if scenario is not None else _parse_enum(
        str(run.get("scenario", "baseline")),
        {e.value: e for e in Scenario}, "scenario")

    demand = values["demand"]
    spec = StablecoinSpec(
        source=source,
        management=management,
        demand=DemandParams(
            base_demand=demand["base_demand"],
            fee_sensitivity=demand["fee_sensitivity"],
            shock_size=demand["shock_size"],
            noise_scale=demand["noise_scale"],
            critical_level=demand["critical_level"],
        ),
        fees=values["fees"]["fees"],
        liquidity_margin=values["investor"]["liquidity_margin"],
        exo=ExogenousCollateralParams(
            initial_price=values["exogenous"]["initial_price"],
            drift=values["exogenous"]["drift"],
            volatility=values["exogenous"]["volatility"],
        ),
        endo=EndogenousCollateralParams(
            price_scale=values["endogenous"]["price_scale"],
            perpetual_rate=values["endogenous"]["perpetual_rate"],
            opportunity_cost=values["endogenous"]["opportunity_cost"],
        ),
        staking=StakingParams(
            base_staking=values["staking"]["base_staking"],
            revenue_sensitivity=values["staking"]["revenue_sensitivity"],
        ),
        collateral_ratio=values["coin"]["collateral_ratio"],
        liquidation_ratio=values["coin"]["liquidation_ratio"],
    )

    wallets = values["wallets"]
    config = SimConfig(
        spec=spec,
        n_paths=run.get("n_paths", 50),
        n_steps=run.get("n_steps", 500),
        seed=seed if seed is not None else run.get("seed", 42),
        scenario=scenario_value,
        shock_step=run.get("shock_step", 100),
        n_users=run.get("n_users", 5),
        n_investors=run.get("n_investors", 3),
        initial_user_wallet=Wallet(
            wallets["user_fiat"], wallets["user_stablecoin"],
            wallets["user_collateral"]),
        initial_investor_wallet=Wallet(
            wallets["investor_fiat"], wallets["investor_stablecoin"],
            wallets["investor_collateral"]),
    )
    config.validate()

    output = values.get("output", {})
    return ExperimentSpec(
        config=config,
        charts=bool(output.get("charts", True)),
        out_dir=str(output.get("out_dir", "out")),
    )


def load_quadrant(source: CollateralSource, management: CollateralManagement,
                  scenario: Scenario | None = None,
                  seed: int | None = None) -> ExperimentSpec:
    """Load a shipped default calibration directly."""
    return load_config(default_config_path(source, management),
                       scenario=scenario, seed=seed)
