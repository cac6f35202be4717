"""Demand curves: piecewise user demand, investor demand, staking demand."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import SimulationError


@dataclass(frozen=True)
class DemandInputs:
    """Inputs to one tick's user-demand evaluation.

    shock_sign is -1/0/+1 (direction of the persistent demand shock), noise
    is the already-drawn per-tick noise value, collateral_level may be +inf
    (empty supply convention).
    """

    base_demand: float
    fee_sensitivity: float
    shock_size: float
    shock_sign: float
    noise: float
    fees: float
    collateral_level: float
    critical_level: float
    upper_bound: float


@dataclass(frozen=True)
class DemandResult:
    value: float
    clamped_low: bool = False
    clamped_high: bool = False

    @property
    def clamped(self) -> bool:
        return self.clamped_low or self.clamped_high


def user_demand(inputs: DemandInputs) -> DemandResult:
    """Piecewise user demand.

    base = a - b*fees + d*s + noise. Fully collateralized markets (level >= 1)
    see the base; markets between the critical level and 1 see the base damped
    by the squared collateralization; below the critical level demand is zero.
    The result is clamped to [0, upper_bound], and clamps are reported so the
    sanity control can log them.
    """
    i = inputs
    if not (0.0 < i.critical_level <= 1.0):
        raise ValueError("critical_level must lie in (0, 1]")
    o = i.collateral_level
    if o < i.critical_level:
        return DemandResult(0.0)
    base = (i.base_demand - i.fee_sensitivity * i.fees
            + i.shock_size * i.shock_sign + i.noise)
    value = base if o >= 1.0 else base * o * o
    if value < 0.0:
        return DemandResult(0.0, clamped_low=True)
    if value > i.upper_bound:
        return DemandResult(i.upper_bound, clamped_high=True)
    return DemandResult(value)


def investor_demand(liquidity_margin: float, user_demand_value: float) -> float:
    """Investors hold the user demand plus a fixed liquidity margin."""
    return liquidity_margin + user_demand_value


def staking_demand(base_staking: float, revenue_sensitivity: float,
                   user_demand_value: float, fees: float,
                   opportunity_cost: float, *, decentral: bool = True) -> float:
    """Staking level that leaves investors indifferent to staking or not.

    Staking returns grow with fee revenue (user_demand * fees) relative to
    the opportunity cost; the result is floored at zero. Only coins with
    decentral collateral management have a staking mechanism.
    """
    if not decentral:
        raise SimulationError(
            "staking not applicable: central collateral management")
    if opportunity_cost <= 0.0:
        raise ValueError("opportunity_cost must be > 0")
    value = base_staking + revenue_sensitivity * (
        (user_demand_value * fees) / opportunity_cost)
    return max(0.0, value)


def demand_bounds(base_demand: float, liquidity_margin: float,
                  base_staking: float, revenue_sensitivity: float,
                  fees: float, opportunity_cost: float) -> dict[str, float]:
    """Upper bounds for the sanity control, one per demand series.

    The user bound is the configured clamp; the investor and staking bounds
    follow from evaluating their formulas at the user bound.
    """
    from .model import DEMAND_BOUND_MULTIPLE

    user_bound = DEMAND_BOUND_MULTIPLE * base_demand
    staking_bound = max(0.0, base_staking + revenue_sensitivity
                        * ((user_bound * fees) / opportunity_cost))
    return {
        "user": user_bound,
        "investor": liquidity_margin + user_bound,
        "staking": staking_bound,
    }


def is_finite(x: float) -> bool:
    return math.isfinite(x)
