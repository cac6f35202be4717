"""Price formulas: stablecoin clearing price and the two collateral models."""

from __future__ import annotations

import math


def stablecoin_price(total_demand: float, supply: float) -> float:
    """Clearing price: total USD demand divided by circulating supply."""
    if supply <= 0.0:
        raise ValueError("no circulating supply")
    return total_demand / supply


def exogenous_collateral_price(initial_price: float, drift: float,
                               volatility: float, t: float,
                               brownian_value: float) -> float:
    """Geometric Brownian motion evaluated at time t with Brownian value W_t.

    price = p0 * exp((drift - volatility^2 / 2) * t + volatility * W_t),
    always strictly positive.
    """
    if initial_price <= 0.0:
        raise ValueError("initial collateral price must be > 0")
    return initial_price * math.exp(
        (drift - 0.5 * volatility * volatility) * t + volatility * brownian_value)


def endogenous_collateral_price(price_scale: float, user_demand: float,
                                fees: float, perpetual_rate: float,
                                opportunity_cost: float,
                                collateral_supply: float) -> float:
    """Fair value of a same-ecosystem collateral token.

    Fee revenue (user_demand * fees) is capitalized into a perpetuity at
    perpetual_rate, spread over the circulating collateral supply, and
    discounted by the opportunity cost of capital:

        price_scale * (((user_demand * fees) / perpetual_rate)
                       / collateral_supply) / opportunity_cost

    The grouping is exactly as written; a unit test pins it.
    """
    if perpetual_rate <= 0.0 or opportunity_cost <= 0.0 or collateral_supply <= 0.0:
        raise ValueError("degenerate endogenous pricing parameters")
    return price_scale * (
        ((user_demand * fees) / perpetual_rate) / collateral_supply
    ) / opportunity_cost
