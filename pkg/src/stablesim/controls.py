"""The three control mechanisms run at the end of every tick.

1. Supply conservation: each asset's recorded supply equals the sum over
   wallets, pools, locked collateral, and buffers. A breach is a simulator
   bug, so it fails fast and aborts the path.
2. Sanity: prices are non-negative and finite, demands lie within their
   bounds. Clamps earlier in the tick are soft warnings; NaN or infinity is
   a hard failure.
3. Positions: every open position reconciles with the tick's issuance and
   resolution log, and open debt matches the decentral coin supply.

Checks are side-effect-free observers: running one twice in a row yields
the same report and leaves state untouched.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .model import CONSERVATION_TOL, Wallet
from .settlement import IssuerPool, PositionBook


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""
    warnings: list[str] = field(default_factory=list)


@dataclass
class ControlReport:
    tick: int
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.passed]


def check_supply_conservation(tick: int, users: list[Wallet],
                              investors: list[Wallet], pool: IssuerPool,
                              book: PositionBook | None,
                              buffer_collateral: float,
                              stablecoin_supply: float,
                              fiat_total: float, collateral_total: float,
                              pool_is_fiat: bool) -> CheckResult:
    """Recorded supplies must equal the wallet sums plus system holdings."""
    wallets = users + investors
    coin_sum = sum(w.stablecoin for w in wallets)
    if abs(coin_sum - stablecoin_supply) > CONSERVATION_TOL:
        return CheckResult(
            "supply-conservation", False,
            f"stablecoin: supply {stablecoin_supply!r} != wallet sum {coin_sum!r}")

    fiat_sum = sum(w.fiat for w in wallets) + pool.fee_account
    if pool_is_fiat:
        fiat_sum += pool.units
    if abs(fiat_sum - fiat_total) > CONSERVATION_TOL:
        return CheckResult(
            "supply-conservation", False,
            f"fiat: total {fiat_total!r} != accounted sum {fiat_sum!r}")

    col_sum = sum(w.collateral for w in wallets) + buffer_collateral
    if not pool_is_fiat:
        col_sum += pool.units
    if book is not None:
        col_sum += book.total_locked()
    if abs(col_sum - collateral_total) > CONSERVATION_TOL:
        return CheckResult(
            "supply-conservation", False,
            f"collateral: total {collateral_total!r} != accounted sum {col_sum!r}")

    return CheckResult("supply-conservation", True)


def check_sanity(tick: int, stablecoin_price: float, collateral_price: float,
                 user_demand: float, investor_demand: float,
                 staking_demand: float, bounds: dict[str, float],
                 clamp_events: list[str]) -> CheckResult:
    """Prices non-negative, demands within bounds, everything finite."""
    for name, value in (("stablecoin price", stablecoin_price),
                        ("collateral price", collateral_price),
                        ("user demand", user_demand),
                        ("investor demand", investor_demand),
                        ("staking demand", staking_demand)):
        if not math.isfinite(value):
            return CheckResult("sanity", False, f"{name} is not finite: {value!r}")
    if stablecoin_price < 0.0 or collateral_price < 0.0:
        return CheckResult("sanity", False, "negative price")
    tol = CONSERVATION_TOL
    for name, value, bound in (("user", user_demand, bounds["user"]),
                               ("investor", investor_demand, bounds["investor"]),
                               ("staking", staking_demand, bounds["staking"])):
        if value < -tol or value > bound + tol:
            return CheckResult(
                "sanity", False,
                f"{name} demand {value!r} outside [0, {bound!r}]")
    return CheckResult("sanity", True, warnings=list(clamp_events))


def check_positions(tick: int, book: PositionBook, stablecoin_supply: float,
                    debt_at_tick_start: float) -> CheckResult:
    """Open debt must match supply and reconcile with the tick's op log."""
    for pos in book.open_positions():
        if pos.debt <= 0.0 or pos.locked_collateral < 0.0:
            return CheckResult(
                "positions", False,
                f"position {pos.position_id} has invalid debt/collateral")
    open_debt = book.total_debt()
    expected = (debt_at_tick_start + book.opened_debt
                - book.resolved_debt - book.liquidated_debt)
    if abs(open_debt - expected) > CONSERVATION_TOL:
        return CheckResult(
            "positions", False,
            f"book debt {open_debt!r} does not reconcile with op log "
            f"(expected {expected!r})")
    if abs(open_debt - stablecoin_supply) > CONSERVATION_TOL:
        return CheckResult(
            "positions", False,
            f"open debt {open_debt!r} != stablecoin supply {stablecoin_supply!r}")
    return CheckResult("positions", True)
