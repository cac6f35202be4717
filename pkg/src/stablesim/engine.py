"""Per-tick simulation engine, path execution, ensembles, sensitivity sweeps.

Each tick runs a fixed ten-step sequence: (1) stablecoin price from the
previous tick's demand and the current supply, (2) collateral price (GBM for
exogenous collateral, fee-revenue fair value for endogenous; fixed at 1.0 for
exogenous/central where the collateral is fiat itself), followed by a
liquidation pass when the collateral price moved (decentral only), (3) user
demand, (4) investor demand, (5) staking demand (decentral only), (6)
issuer trades (central) or debt-position adjustments (decentral) sized by
the gap between investor holdings and demand, (7) user/investor trades
sized by the user-demand change, (8) staking adjustments (decentral only),
(9) recording, (10) the three control checks.

Demands are USD and map to coin targets at face value (one coin holds one
USD of demand); trades execute at the step-1 market price. Sensitivity
multipliers perturb the live parameters from tick 0 onward while the
genesis state is always derived from the unmultiplied configuration, so a
fee or collateral-price factor acts as a true shock instead of being
absorbed into the initial calibration.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import pricing
from .demand import DemandInputs, demand_bounds, investor_demand, staking_demand, user_demand
from .errors import ConfigError, ControlFailure, NotAnalyzableError
from .model import (
    CollateralManagement,
    CollateralSource,
    MarketState,
    Scenario,
    SensitivityFactor,
    SimConfig,
    StablecoinSpec,
    Wallet,
    safe_collateral_level,
)
from .controls import check_positions, check_sanity, check_supply_conservation
from .rng import RandomStream, brownian_increment, demand_noise
from .settlement import (
    IssuerPool,
    PositionBook,
    adjust_book,
    adjust_staking,
    central_issuer_trade,
    liquidate_positions,
    user_investor_trade,
)

SERIES_NAMES = (
    "price_stablecoin",
    "price_collateral",
    "demand_user",
    "demand_investor",
    "demand_staking",
    "supply_stablecoin",
    "supply_collateral",
    "collateral_level",
)


@dataclass(frozen=True)
class EffectiveParams:
    """Live parameters after applying the sensitivity multiplier, if any."""

    shock_size: float
    noise_scale: float
    fees: float
    exo_initial_price: float
    endo_price_scale: float


def effective_params(config: SimConfig) -> EffectiveParams:
    spec = config.spec
    d, m = spec.demand.shock_size, spec.demand.noise_scale
    fees = spec.fees
    p0, scale = spec.exo.initial_price, spec.endo.price_scale
    s = config.sensitivity
    if s is not None:
        if s.factor is SensitivityFactor.SHOCK_MAGNITUDE:
            d *= s.multiplier
        elif s.factor is SensitivityFactor.DEMAND_VOLATILITY:
            m *= s.multiplier
        elif s.factor is SensitivityFactor.FEES:
            fees *= s.multiplier
            if fees >= 1.0:
                raise ConfigError("fee multiplier pushes fees outside [0,1)")
        elif s.factor is SensitivityFactor.COLLATERAL_PRICE:
            if (spec.source is CollateralSource.EXOGENOUS
                    and spec.management is CollateralManagement.CENTRAL):
                raise NotAnalyzableError(
                    "not analyzable: fiat is both collateral and reference")
            if spec.source is CollateralSource.EXOGENOUS:
                p0 *= s.multiplier
            else:
                scale *= s.multiplier
    return EffectiveParams(d, m, fees, p0, scale)


@dataclass
class PathEvent:
    step: int
    kind: str
    detail: str


@dataclass
class PathState:
    """Mutable state of one path between ticks."""

    config: SimConfig
    params: EffectiveParams
    t: int
    users: list[Wallet]
    investors: list[Wallet]
    pool: IssuerPool
    book: PositionBook | None
    buffer_collateral: float
    supply: float
    brownian_value: float
    price_stablecoin: float
    price_collateral: float
    d_user: float
    d_investor: float
    d_staking: float
    fiat_total: float
    collateral_total: float
    dead: bool = False
    events: list[PathEvent] = field(default_factory=list)

    @property
    def spec(self) -> StablecoinSpec:
        return self.config.spec

    @property
    def decentral(self) -> bool:
        return self.spec.management is CollateralManagement.DECENTRAL

    @property
    def endogenous(self) -> bool:
        return self.spec.source is CollateralSource.ENDOGENOUS

    def circulating_collateral(self) -> float:
        """Collateral units free to trade (not pooled, locked, or seized)."""
        return (sum(w.collateral for w in self.investors)
                + sum(w.collateral for w in self.users))

    def backing_units(self) -> float:
        """Collateral units backing the coin: issuer pool or locked positions."""
        if self.decentral:
            return self.book.total_locked()
        return self.pool.units

    def recorded_collateral_supply(self) -> float:
        if self.endogenous:
            return self.circulating_collateral()
        if self.decentral:
            return self.collateral_total
        return self.pool.units  # fiat reserve of the exogenous/central issuer

    def snapshot(self) -> MarketState:
        return MarketState(
            t=self.t,
            stablecoin_supply=self.supply,
            collateral_supply=self.recorded_collateral_supply(),
            stablecoin_price=self.price_stablecoin,
            collateral_price=self.price_collateral,
            brownian_value=self.brownian_value,
            user_demand=self.d_user,
            investor_demand=self.d_investor,
            staking_demand=self.d_staking,
            collateral_level=safe_collateral_level(
                self.backing_units(), self.price_collateral, self.supply),
        )

    def log(self, kind: str, detail: str) -> None:
        self.events.append(PathEvent(self.t, kind, detail))


@dataclass
class PathResult:
    """Per-tick series for one path; all arrays have length n_steps.

    Recorded per tick: the step-1 trading price, the step-2 collateral
    price, the step-3/4/5 demands, and end-of-tick supplies and
    collateralization. supply_collateral is the circulating float for
    endogenous collateral, total units outstanding for exogenous/decentral,
    and the issuer's fiat reserve for exogenous/central.
    """

    path_index: int
    series: dict[str, np.ndarray]
    events: list[PathEvent]

    def __getitem__(self, name: str) -> np.ndarray:
        return self.series[name]


@dataclass
class EnsembleResult:
    """All paths of one experiment plus per-tick cross-path aggregates."""

    config: SimConfig
    paths: list[PathResult]
    aggregates: dict[str, dict[str, np.ndarray]]
    failures: list[tuple[int, str]]

    @property
    def n_steps(self) -> int:
        return self.config.n_steps


def _total_demand(state: PathState) -> float:
    """Aggregate demand for the clearing price.

    Investor demand includes the staking demand for decentral coins: coins
    minted against staked collateral sit in investor wallets, so the peg
    identity requires counting them on the demand side as well.
    """
    total = state.d_user + state.d_investor
    if state.decentral:
        total += state.d_staking
    return total


def init_state(config: SimConfig, params: EffectiveParams | None = None) -> PathState:
    """Build the genesis state at the noise-free equilibrium.

    Initial demands use the unmultiplied spec; supply equals total demand so
    the run starts exactly on peg. Investors fund the issuer pool (central)
    or the initial debt-position book (decentral) from their endowments.
    """
    config.validate()
    spec = config.spec
    if params is None:
        params = effective_params(config)
    base = spec.demand.base_demand - spec.demand.fee_sensitivity * spec.fees
    d_user0 = min(max(base, 0.0), spec.demand_upper_bound)
    d_inv0 = investor_demand(spec.liquidity_margin, d_user0)
    decentral = spec.management is CollateralManagement.DECENTRAL
    endogenous = spec.source is CollateralSource.ENDOGENOUS
    d_st0 = staking_demand(
        spec.staking.base_staking, spec.staking.revenue_sensitivity,
        d_user0, spec.fees, spec.endo.opportunity_cost) if decentral else 0.0
    supply0 = d_user0 + d_inv0 + d_st0 if decentral else d_user0 + d_inv0
    if supply0 <= 0.0:
        raise ConfigError("initial equilibrium supply is zero")

    users = [config.initial_user_wallet.copy() for _ in range(config.n_users)]
    investors = [config.initial_investor_wallet.copy()
                 for _ in range(config.n_investors)]
    for w in users:
        w.stablecoin += d_user0 / config.n_users
    for w in investors:
        w.stablecoin += (d_inv0 + d_st0) / config.n_investors

    pool = IssuerPool()
    book = PositionBook() if decentral else None
    endo_k = (spec.endo.price_scale * spec.fees
              / (spec.endo.perpetual_rate * spec.endo.opportunity_cost))

    def fund_backing() -> tuple[float, float]:
        """Draw the genesis backing from investor collateral, equally.

        Returns (backing units, collateral price at genesis). For endogenous
        collateral the two interact through the fair-value price
        (units = supply*ratio/price, price = k*d0/float), solved in closed
        form.
        """
        total_col = sum(w.collateral for w in investors)
        if endogenous:
            if endo_k <= 0.0 or d_user0 <= 0.0:
                raise ConfigError(
                    "endogenous price is zero at genesis; cannot fund backing")
            units = (supply0 * spec.collateral_ratio * total_col
                     / (endo_k * d_user0 + supply0 * spec.collateral_ratio))
            price0 = endo_k * d_user0 / (total_col - units)
        else:
            price0 = spec.exo.initial_price
            units = supply0 * spec.collateral_ratio / price0
        if units > total_col + 1e-9:
            raise ConfigError(
                "investor collateral endowment cannot fund the genesis backing")
        for w in investors:
            w.collateral -= units / config.n_investors
        return units, price0

    if decentral:
        locked_total, price_c0 = fund_backing()
        lock_per_debt = locked_total / supply0
        demand_debt = (d_user0 + d_inv0) / config.n_investors
        stake_debt = d_st0 / config.n_investors
        # Chunk the genesis book so a single liquidation cannot wipe out a
        # large share of the supply at once.
        chunk = supply0 / 50.0
        for owner in range(config.n_investors):
            for debt, kind in ((demand_debt, "demand"), (stake_debt, "staking")):
                if debt <= 0.0:
                    continue
                pieces = max(1, int(np.ceil(debt / chunk)))
                piece = debt / pieces
                for _ in range(pieces):
                    book._add(owner, piece * lock_per_debt, piece, kind, -1)
    else:
        if endogenous:
            pool.units, price_c0 = fund_backing()
        else:
            # Fiat-backed issuer: the pool is funded in fiat at par.
            price_c0 = 1.0
            pool.units = supply0 * spec.collateral_ratio
            need = pool.units / config.n_investors
            if any(w.fiat < need for w in investors):
                raise ConfigError(
                    "investor fiat endowment cannot fund the genesis reserve")
            for w in investors:
                w.fiat -= need

    fiat_total = (sum(w.fiat for w in users) + sum(w.fiat for w in investors)
                  + pool.fee_account)
    if not endogenous and not decentral:
        fiat_total += pool.units
    collateral_total = (sum(w.collateral for w in users)
                        + sum(w.collateral for w in investors))
    if endogenous and not decentral:
        collateral_total += pool.units
    if decentral:
        collateral_total += book.total_locked()

    return PathState(
        config=config, params=params, t=0,
        users=users, investors=investors, pool=pool, book=book,
        buffer_collateral=0.0, supply=supply0, brownian_value=0.0,
        price_stablecoin=1.0, price_collateral=price_c0,
        d_user=d_user0, d_investor=d_inv0, d_staking=d_st0,
        fiat_total=fiat_total, collateral_total=collateral_total,
    )


def tick(state: PathState, brownian_stream: RandomStream,
         noise_stream: RandomStream, record: dict[str, list[float]],
         trace: list[str] | None = None) -> None:
    """Advance one tick through the ten-step sequence, appending to record."""
    spec, p = state.spec, state.params
    t = state.t
    decentral, endogenous = state.decentral, state.endogenous

    if state.dead or state.supply <= 0.0:
        _record_dead(state, record)
        state.t += 1
        return

    # Step 1: stablecoin clearing price from latest demand and current supply.
    price_s = pricing.stablecoin_price(_total_demand(state), state.supply)
    if trace is not None:
        trace.append("1:stablecoin-price")

    # Step 2: collateral price by source; fiat collateral is pinned at par.
    if endogenous:
        circulating = state.circulating_collateral()
        if circulating <= 0.0:
            # Fully locked float: nothing circulates to reprice, so the
            # previous price carries over.
            price_c = state.price_collateral
            state.log("pricing", "no circulating collateral; price carried over")
        elif state.d_user <= 0.0:
            price_c = 0.0  # no fee revenue, the token's fair value is zero
        else:
            price_c = pricing.endogenous_collateral_price(
                p.endo_price_scale, state.d_user, p.fees,
                spec.endo.perpetual_rate, spec.endo.opportunity_cost,
                circulating)
    elif decentral:
        if t > 0:
            state.brownian_value += brownian_increment(brownian_stream, 1.0)
        price_c = pricing.exogenous_collateral_price(
            p.exo_initial_price, spec.exo.drift, spec.exo.volatility,
            float(t), state.brownian_value)
    else:
        price_c = 1.0
    if trace is not None:
        trace.append("2:collateral-price")

    # Liquidation pass: promptly close under-collateralized positions.
    if decentral and price_c != state.price_collateral:
        liq = liquidate_positions(state.book, price_c, spec.liquidation_ratio,
                                  state.investors)
        if liq.burned_debt > 0.0:
            state.supply -= liq.burned_debt
            state.buffer_collateral += liq.seized_collateral
            state.log("liquidation",
                      f"closed {len(liq.liquidated_ids)} positions, "
                      f"burned {liq.burned_debt:.6f}")
        if liq.blocked_debt > 0.0:
            state.log("liquidation-shortfall",
                      f"{liq.blocked_debt:.6f} under-collateralized debt "
                      "left open (investor coin shortage)")
        if trace is not None:
            trace.append("2b:liquidation")

    # Step 3: user demand from the current collateralization.
    o_t = safe_collateral_level(state.backing_units(), price_c, state.supply)
    shock_sign = (state.config.scenario.shock_sign
                  if t >= state.config.shock_step else 0.0)
    noise = demand_noise(noise_stream, p.noise_scale)
    d_res = user_demand(DemandInputs(
        base_demand=spec.demand.base_demand,
        fee_sensitivity=spec.demand.fee_sensitivity,
        shock_size=p.shock_size, shock_sign=shock_sign, noise=noise,
        fees=p.fees, collateral_level=o_t,
        critical_level=spec.demand.critical_level,
        upper_bound=spec.demand_upper_bound))
    d_user = d_res.value
    clamp_events: list[str] = []
    if d_res.clamped:
        side = "below 0" if d_res.clamped_low else "above bound"
        clamp_events.append(f"user demand clamped ({side})")
        state.log("clamp", clamp_events[-1])
    if trace is not None:
        trace.append("3:user-demand")

    # Step 4: investor demand.
    d_inv = investor_demand(spec.liquidity_margin, d_user)
    if trace is not None:
        trace.append("4:investor-demand")

    # Step 5: staking demand (decentral collateral management only).
    if decentral:
        d_stake = staking_demand(
            spec.staking.base_staking, spec.staking.revenue_sensitivity,
            d_user, p.fees, spec.endo.opportunity_cost)
        if trace is not None:
            trace.append("5:staking-demand")
    else:
        d_stake = 0.0

    if state.book is not None:
        state.book.begin_tick()
    debt_at_start = state.book.total_debt() if decentral else 0.0

    # Step 6: investors mint or burn toward their demand.
    if decentral:
        staked = state.book.debt_of_kind("staking")
        target = d_inv + staked
        held = sum(w.stablecoin for w in state.investors)
        fill = adjust_book(state.book, "demand", target - held,
                           state.investors, price_c, spec.collateral_ratio, t)
        state.supply += fill.filled
        if fill.partial:
            state.log("partial-fill", f"cdp adjust: {fill.note}")
        if trace is not None:
            trace.append("6:cdp-adjust")
    else:
        for w in state.investors:
            want = d_inv / state.config.n_investors - w.stablecoin
            fill = central_issuer_trade(want, w, state.pool, price_s,
                                        price_c, p.fees, endogenous)
            state.supply += fill.filled
            if fill.partial and fill.note:
                kind = ("blocked-redemption" if "blocked" in fill.note
                        else "partial-fill")
                state.log(kind, f"issuer trade: {fill.note}")
        if trace is not None:
            trace.append("6:issuer-trade")

    # Step 7: users trade with investors on the user-demand change.
    held_u = sum(w.stablecoin for w in state.users)
    fill = user_investor_trade(d_user - held_u, state.users, state.investors,
                               price_s, p.fees)
    if fill.partial and fill.note:
        state.log("partial-fill", f"user trade: {fill.note}")
    if trace is not None:
        trace.append("7:user-trade")

    # Step 8: staking adjustments (decentral only).
    if decentral:
        staked = state.book.debt_of_kind("staking")
        fill = adjust_staking(d_stake - staked, state.book, state.investors,
                              price_c, spec.collateral_ratio, t)
        state.supply += fill.filled
        if fill.partial and fill.note:
            state.log("partial-fill", f"staking adjust: {fill.note}")
        if trace is not None:
            trace.append("8:staking-adjust")

    # Step 9: record and roll the state forward.
    state.price_stablecoin = price_s
    state.price_collateral = price_c
    state.d_user, state.d_investor, state.d_staking = d_user, d_inv, d_stake
    record["price_stablecoin"].append(price_s)
    record["price_collateral"].append(price_c)
    record["demand_user"].append(d_user)
    record["demand_investor"].append(d_inv)
    record["demand_staking"].append(d_stake)
    record["supply_stablecoin"].append(state.supply)
    record["supply_collateral"].append(state.recorded_collateral_supply())
    record["collateral_level"].append(safe_collateral_level(
        state.backing_units(), price_c, state.supply))
    if trace is not None:
        trace.append("9:record")

    # Step 10: the three control mechanisms.
    bounds = demand_bounds(
        spec.demand.base_demand, spec.liquidity_margin,
        spec.staking.base_staking, spec.staking.revenue_sensitivity,
        p.fees, spec.endo.opportunity_cost)
    checks = [
        check_supply_conservation(
            t, state.users, state.investors, state.pool, state.book,
            state.buffer_collateral, state.supply, state.fiat_total,
            state.collateral_total,
            pool_is_fiat=not endogenous and not decentral),
        check_sanity(t, price_s, price_c, d_user, d_inv, d_stake, bounds,
                     clamp_events),
    ]
    if decentral:
        checks.append(check_positions(t, state.book, state.supply, debt_at_start))
    for check in checks:
        for warning in check.warnings:
            state.log("control-warning", f"{check.name}: {warning}")
        if not check.passed:
            state.log("control-failure", f"{check.name}: {check.detail}")
            raise ControlFailure(f"tick {t}: {check.name}: {check.detail}")
    if trace is not None:
        trace.append("10:controls")

    if state.supply <= 0.0:
        state.dead = True
    state.t += 1


def _record_dead(state: PathState, record: dict[str, list[float]]) -> None:
    """A fully collapsed path keeps recording zeros instead of aborting."""
    state.dead = True
    for name in ("price_stablecoin", "price_collateral", "demand_user",
                 "demand_investor", "demand_staking", "collateral_level"):
        record[name].append(0.0)
    record["supply_stablecoin"].append(max(state.supply, 0.0))
    record["supply_collateral"].append(state.recorded_collateral_supply())


def run_path(config: SimConfig, path_index: int) -> PathResult:
    """Run one path to completion; deterministic in (config, path_index)."""
    params = effective_params(config)
    state = init_state(config, params)
    b_stream = RandomStream(config.seed, path_index, "brownian")
    n_stream = RandomStream(config.seed, path_index, "demand-noise")
    record: dict[str, list[float]] = {name: [] for name in SERIES_NAMES}
    try:
        for _ in range(config.n_steps):
            tick(state, b_stream, n_stream, record)
    except ControlFailure as err:
        err.path_index = path_index
        raise
    series = {name: np.asarray(values, dtype=np.float64)
              for name, values in record.items()}
    return PathResult(path_index=path_index, series=series, events=state.events)


def compute_aggregates(paths: list[PathResult]) -> dict[str, dict[str, np.ndarray]]:
    """Cross-path mean, std, and 5th/95th percentiles, per tick and series."""
    aggregates: dict[str, dict[str, np.ndarray]] = {}
    if not paths:
        return aggregates
    for name in SERIES_NAMES:
        stacked = np.vstack([p.series[name] for p in paths]) \
            if paths[0].series[name].size else np.zeros((len(paths), 0))
        aggregates[name] = {
            "mean": stacked.mean(axis=0),
            "std": stacked.std(axis=0),
            "p05": np.percentile(stacked, 5, axis=0),
            "p95": np.percentile(stacked, 95, axis=0),
        }
    return aggregates


def run_ensemble(config: SimConfig) -> EnsembleResult:
    """Run all paths; aborted paths are collected, the rest complete."""
    config.validate()
    effective_params(config)  # surface sensitivity errors before any path runs
    paths: list[PathResult] = []
    failures: list[tuple[int, str]] = []
    for index in range(config.n_paths):
        try:
            paths.append(run_path(config, index))
        except ControlFailure as err:
            failures.append((index, str(err)))
    return EnsembleResult(config=config, paths=paths,
                          aggregates=compute_aggregates(paths),
                          failures=failures)


def run_sensitivity(config: SimConfig, factor: SensitivityFactor,
                    multipliers: tuple[float, ...] = (0.5, 0.75, 1.0, 1.25, 1.5),
                    ) -> dict[float, EnsembleResult]:
    """One ensemble per multiplier, all from the same master seed.

    The identity multiplier reproduces the plain ensemble bit-exactly, so
    paired comparisons across multipliers are free of sampling noise.
    """
    from .model import SensitivitySetting

    spec = config.spec
    if (factor is SensitivityFactor.COLLATERAL_PRICE
            and spec.source is CollateralSource.EXOGENOUS
            and spec.management is CollateralManagement.CENTRAL):
        raise NotAnalyzableError(
            "not analyzable: fiat is both collateral and reference")
    results: dict[float, EnsembleResult] = {}
    for multiplier in multipliers:
        cfg = config.with_sensitivity(SensitivitySetting(factor, multiplier))
        results[multiplier] = run_ensemble(cfg)
    return results
