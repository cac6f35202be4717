"""Core domain types: the 2x2 coin taxonomy, wallets, market state, run config.

A stablecoin design is classified along two dimensions: where the collateral
value comes from (exogenous assets such as fiat reserves, or an endogenous
token of the same ecosystem) and who manages it (a central issuer pooling
collateral, or individuals holding their own debt positions). Each quadrant
has a real-world archetype: USDT (exogenous/central), Dai (exogenous/
decentral), TerraUSD (endogenous/central), sUSD (endogenous/decentral).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum

from .errors import ConfigError

# Absolute tolerance for USD conservation comparisons.
CONSERVATION_TOL = 1e-9

# User demand is clamped to [0, DEMAND_BOUND_MULTIPLE * base_demand].
DEMAND_BOUND_MULTIPLE = 10.0


class CollateralSource(Enum):
    EXOGENOUS = "exogenous"
    ENDOGENOUS = "endogenous"


class CollateralManagement(Enum):
    CENTRAL = "central"
    DECENTRAL = "decentral"


class Scenario(Enum):
    BASELINE = "baseline"
    NEGATIVE_SHOCK = "negative"
    POSITIVE_SHOCK = "positive"

    @property
    def shock_sign(self) -> float:
        """Level-shift sign applied to user demand from the shock step on."""
        if self is Scenario.NEGATIVE_SHOCK:
            return -1.0
        if self is Scenario.POSITIVE_SHOCK:
            return 1.0
        return 0.0


class SensitivityFactor(Enum):
    SHOCK_MAGNITUDE = "shock"          # scales the demand-shock size
    DEMAND_VOLATILITY = "volatility"   # scales the demand-noise magnitude
    FEES = "fees"                      # scales the proportional transaction fee
    COLLATERAL_PRICE = "collateral"    # scales the collateral price level


SENSITIVITY_MULTIPLIERS = (0.5, 0.75, 1.0, 1.25, 1.5)


@dataclass(frozen=True)
class DemandParams:
    """User-demand curve parameters (all USD except critical_level)."""

    base_demand: float        # demand level with no fees, shock, or noise
    fee_sensitivity: float    # USD of demand lost per unit of fee
    shock_size: float         # persistent level shift applied by a shock
    noise_scale: float        # magnitude of the per-tick normal noise
    critical_level: float     # collateralization below this kills demand


@dataclass(frozen=True)
class ExogenousCollateralParams:
    """Geometric-Brownian-motion parameters for an external collateral asset."""

    initial_price: float
    drift: float              # expected log-return per tick
    volatility: float         # per sqrt-tick


@dataclass(frozen=True)
class EndogenousCollateralParams:
    """Fair-value parameters for a same-ecosystem collateral token.

    The token's value is modeled as the perpetuity value of the fee revenue
    routed to its holders, discounted by the return of an alternative
    investment.
    """

    price_scale: float        # calibration scale on the perpetuity value
    perpetual_rate: float     # rate capitalizing fee revenue into a perpetuity
    opportunity_cost: float   # competing return that discounts the fair value


@dataclass(frozen=True)
class StakingParams:
    """Staking appetite: base level plus sensitivity to fee revenue."""

    base_staking: float
    revenue_sensitivity: float


@dataclass(frozen=True)
class StablecoinSpec:
    """Full parameterization of one coin design (one quadrant)."""

    source: CollateralSource
    management: CollateralManagement
    demand: DemandParams
    fees: float                       # proportional transaction fee in [0, 1)
    liquidity_margin: float           # investors' USD buffer above user demand
    exo: ExogenousCollateralParams
    endo: EndogenousCollateralParams
    staking: StakingParams
    collateral_ratio: float           # required over-collateralization at issuance
    liquidation_ratio: float          # positions below this are liquidated

    @property
    def demand_upper_bound(self) -> float:
        return DEMAND_BOUND_MULTIPLE * self.demand.base_demand

    def validate(self) -> None:
        d = self.demand
        if not (0.0 < d.critical_level <= 1.0):
            raise ConfigError("critical_level must lie in (0, 1]")
        if not (0.0 <= self.fees < 1.0):
            raise ConfigError("fees must lie in [0,1)")
        if self.liquidity_margin < 0.0:
            raise ConfigError("liquidity_margin must be >= 0")
        if d.noise_scale < 0.0:
            raise ConfigError("noise_scale must be >= 0")
        if self.collateral_ratio < 1.0 or self.liquidation_ratio < 1.0:
            raise ConfigError("collateral_ratio and liquidation_ratio must be >= 1")
        if self.liquidation_ratio > self.collateral_ratio:
            raise ConfigError("liquidation_ratio must not exceed collateral_ratio")
        if self.exo.initial_price <= 0.0:
            raise ConfigError("initial collateral price must be > 0")
        if self.exo.volatility < 0.0:
            raise ConfigError("collateral volatility must be >= 0")
        for name, value in (
            ("price_scale", self.endo.price_scale),
            ("perpetual_rate", self.endo.perpetual_rate),
            ("opportunity_cost", self.endo.opportunity_cost),
        ):
            if value <= 0.0:
                raise ConfigError(f"{name} must be > 0")


@dataclass
class Wallet:
    """One agent's holdings: USD, stablecoin units, collateral units."""

    fiat: float = 0.0
    stablecoin: float = 0.0
    collateral: float = 0.0

    def copy(self) -> "Wallet":
        return Wallet(self.fiat, self.stablecoin, self.collateral)


@dataclass
class MarketState:
    """Per-tick snapshot of prices, supplies, demands, and collateralization."""

    t: int
    stablecoin_supply: float
    collateral_supply: float
    stablecoin_price: float
    collateral_price: float
    brownian_value: float
    user_demand: float
    investor_demand: float
    staking_demand: float
    collateral_level: float


@dataclass(frozen=True)
class SensitivitySetting:
    factor: SensitivityFactor
    multiplier: float

    def validate(self) -> None:
        if self.multiplier <= 0.0:
            raise ConfigError("sensitivity multiplier must be > 0")


@dataclass(frozen=True)
class SimConfig:
    """Everything needed to reproduce one Monte Carlo experiment bit-exactly."""

    spec: StablecoinSpec
    n_paths: int = 50
    n_steps: int = 500
    seed: int = 42
    scenario: Scenario = Scenario.BASELINE
    shock_step: int = 100
    n_users: int = 5
    n_investors: int = 3
    initial_user_wallet: Wallet = field(default_factory=Wallet)
    initial_investor_wallet: Wallet = field(default_factory=Wallet)
    sensitivity: SensitivitySetting | None = None

    def validate(self) -> None:
        self.spec.validate()
        if self.n_paths < 1:
            raise ConfigError("n_paths must be >= 1")
        if self.n_steps < 0:
            raise ConfigError("n_steps must be >= 0")
        if not (0 <= self.seed < 2**64):
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if self.n_steps > 0 and not (0 <= self.shock_step < self.n_steps):
            raise ConfigError("shock_step must lie in [0, n_steps)")
        if self.n_users < 1 or self.n_investors < 1:
            raise ConfigError("n_users and n_investors must be >= 1")
        u, v = self.initial_user_wallet, self.initial_investor_wallet
        if not (v.fiat > u.fiat and v.stablecoin >= u.stablecoin
                and v.collateral >= u.collateral):
            raise ConfigError(
                "investor initial balances must exceed user initial balances")
        if self.sensitivity is not None:
            self.sensitivity.validate()

    def with_scenario(self, scenario: Scenario) -> "SimConfig":
        return replace(self, scenario=scenario)

    def with_sensitivity(self, setting: SensitivitySetting | None) -> "SimConfig":
        return replace(self, sensitivity=setting)


def quadrant_label(spec: StablecoinSpec) -> str:
    """Label a coin design as '<source>/<management>', e.g. 'endogenous/central'."""
    return f"{spec.source.value}/{spec.management.value}"


def collateral_level(collateral_units: float, collateral_price: float,
                     stablecoin_supply: float) -> float:
    """Collateral value per circulating stablecoin.

    Raises ValueError when supply is zero; callers treat an empty supply as
    fully safe (level +inf), since there is nothing to under-collateralize.
    """
    if stablecoin_supply == 0.0:
        raise ValueError("undefined collateral level: zero stablecoin supply")
    return (collateral_units * collateral_price) / stablecoin_supply


def safe_collateral_level(collateral_units: float, collateral_price: float,
                          stablecoin_supply: float) -> float:
    """collateral_level with the zero-supply convention applied (+inf)."""
    if stablecoin_supply == 0.0:
        return math.inf
    return collateral_level(collateral_units, collateral_price, stablecoin_supply)
