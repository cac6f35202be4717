"""Trade and position mechanics for steps six through eight of a tick.

Central management: investors trade with the issuer, who pools the collateral
(fiat for exogenous coins, collateral units for endogenous ones) and retains
fees. Decentral management: investors mint and burn through individually
owned debt positions, over-collateralized at issuance and liquidated when
coverage drops below the liquidation ratio.

All operations follow a partial-fill discipline: when funds, inventory, or
the issuer pool cannot cover a trade, it is scaled down to the affordable
size and the shortfall is reported so the engine can log it. No wallet
balance ever goes negative.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .model import Wallet

# Fills smaller than this are treated as zero to avoid denormal dust.
FILL_EPS = 1e-12


@dataclass
class CollateralPosition:
    """One central-debt position: locked collateral backing issued coins."""

    position_id: int
    owner: int                 # investor index
    locked_collateral: float   # units
    debt: float                # stablecoin units issued
    open: bool = True
    kind: str = "demand"       # "demand" or "staking"
    opened_at: int = -1        # tick index; -1 for the genesis book

    def coverage(self, collateral_price: float) -> float:
        if self.debt == 0.0:
            return float("inf")
        return self.locked_collateral * collateral_price / self.debt


@dataclass
class PositionBook:
    """Ordered collection of positions; ids increase with opening order."""

    positions: list[CollateralPosition] = field(default_factory=list)
    next_id: int = 0
    # Per-tick issuance/resolution log, reconciled by the position control.
    opened_debt: float = 0.0
    resolved_debt: float = 0.0
    liquidated_debt: float = 0.0

    def begin_tick(self) -> None:
        self.opened_debt = 0.0
        self.resolved_debt = 0.0
        self.liquidated_debt = 0.0

    def open_positions(self) -> list[CollateralPosition]:
        return [p for p in self.positions if p.open]

    def total_debt(self) -> float:
        return sum(p.debt for p in self.positions if p.open)

    def total_locked(self) -> float:
        return sum(p.locked_collateral for p in self.positions if p.open)

    def debt_of_kind(self, kind: str) -> float:
        return sum(p.debt for p in self.positions if p.open and p.kind == kind)

    def find(self, position_id: int) -> CollateralPosition:
        for p in self.positions:
            if p.position_id == position_id:
                return p
        raise KeyError(f"no position with id {position_id}")

    def _add(self, owner: int, locked: float, debt: float, kind: str,
             tick: int) -> CollateralPosition:
        pos = CollateralPosition(self.next_id, owner, locked, debt,
                                 kind=kind, opened_at=tick)
        self.next_id += 1
        self.positions.append(pos)
        return pos

    def _drop_closed(self) -> None:
        self.positions = [p for p in self.positions if p.open]


@dataclass
class Fill:
    """Outcome of one settlement operation."""

    requested: float
    filled: float
    note: str = ""

    @property
    def partial(self) -> bool:
        return abs(self.filled) + FILL_EPS < abs(self.requested)


@dataclass
class IssuerPool:
    """Central issuer's pooled backing and accumulated fee revenue.

    For exogenous/central coins the pool holds fiat (units priced at 1.0);
    for endogenous/central coins it holds collateral units.
    """

    units: float = 0.0
    fee_account: float = 0.0


def central_issuer_trade(delta: float, wallet: Wallet, pool: IssuerPool,
                         stablecoin_price: float, collateral_price: float,
                         fees: float, endogenous: bool) -> Fill:
    """Mint (delta > 0) or redeem (delta < 0) against the central issuer.

    Minting: the investor hands the issuer backing worth delta * price
    (fiat for exogenous coins, collateral units for endogenous ones) plus a
    fiat fee of fees * delta * price retained by the issuer. Redeeming pays
    the investor the market value of the burned coins out of the pool, net
    of the same fee. Trades scale down to what the wallet (or, on
    redemption, the pool) can cover; a worthless market (price 0) or an
    empty pool blocks redemption entirely, which is how a centrally managed
    coin fails to honor redemptions.
    """
    if delta == 0.0:
        return Fill(0.0, 0.0)
    if stablecoin_price <= 0.0:
        return Fill(delta, 0.0, "market price is zero")

    if delta > 0.0:
        fill = delta
        if endogenous:
            if collateral_price <= 0.0:
                return Fill(delta, 0.0, "collateral is worthless")
            # Backing paid in collateral units, fee paid in fiat.
            afford_col = wallet.collateral * collateral_price / stablecoin_price
            fill = min(fill, afford_col)
            if fees > 0.0:
                fill = min(fill, wallet.fiat / (stablecoin_price * fees))
        else:
            fill = min(fill, wallet.fiat / (stablecoin_price * (1.0 + fees)))
        fill = max(0.0, fill)
        if fill <= FILL_EPS:
            return Fill(delta, 0.0, "insufficient funds")
        value = fill * stablecoin_price
        if endogenous:
            wallet.collateral -= value / collateral_price
            wallet.fiat -= value * fees
            pool.units += value / collateral_price
        else:
            wallet.fiat -= value * (1.0 + fees)
            pool.units += value
        pool.fee_account += value * fees
        wallet.stablecoin += fill
        note = "scaled to affordable size" if fill + FILL_EPS < delta else ""
        return Fill(delta, fill, note)

    want = -delta
    fill = min(want, wallet.stablecoin)
    if endogenous:
        if collateral_price <= 0.0 or pool.units <= 0.0:
            return Fill(delta, 0.0, "redemption blocked: pool is worthless")
        fill = min(fill, pool.units * collateral_price / stablecoin_price)
        if fees > 0.0:
            fill = min(fill, wallet.fiat / (stablecoin_price * fees))
    else:
        fill = min(fill, pool.units / stablecoin_price)
    fill = max(0.0, fill)
    if fill <= FILL_EPS:
        return Fill(delta, 0.0, "redemption blocked: pool exhausted"
                    if wallet.stablecoin > FILL_EPS else "no holdings to redeem")
    value = fill * stablecoin_price
    if endogenous:
        pool.units -= value / collateral_price
        wallet.collateral += value / collateral_price
        wallet.fiat -= value * fees
    else:
        pool.units -= value
        wallet.fiat += value * (1.0 - fees)
    pool.fee_account += value * fees
    wallet.stablecoin -= fill
    note = "scaled to pool/holdings" if fill + FILL_EPS < want else ""
    return Fill(delta, -fill, note)


def open_position(book: PositionBook, owner: int, stablecoin_amount: float,
                  collateral_price: float, collateral_ratio: float,
                  owner_wallet: Wallet, kind: str = "demand",
                  tick: int = -1) -> tuple[int | None, Fill]:
    """Open a debt position: lock collateral, mint coins to the owner.

    Locks stablecoin_amount * collateral_ratio / collateral_price units
    (face-value over-collateralization). Issuance scales down to the
    owner's collateral holdings.
    """
    if stablecoin_amount <= 0.0:
        raise ValueError("positions must have positive debt")
    if collateral_price <= 0.0:
        raise ValueError("cannot open a position against worthless collateral")
    afford = owner_wallet.collateral * collateral_price / collateral_ratio
    fill = min(stablecoin_amount, afford)
    if fill <= FILL_EPS:
        return None, Fill(stablecoin_amount, 0.0, "insufficient collateral")
    locked = fill * collateral_ratio / collateral_price
    owner_wallet.collateral -= locked
    owner_wallet.stablecoin += fill
    pos = book._add(owner, locked, fill, kind, tick)
    book.opened_debt += fill
    note = "scaled to affordable size" if fill + FILL_EPS < stablecoin_amount else ""
    return pos.position_id, Fill(stablecoin_amount, fill, note)


def resolve_position(book: PositionBook, position_id: int,
                     owner_wallet: Wallet) -> Fill:
    """Close a position in full: burn its debt, release its collateral.

    If the owner holds fewer coins than the debt, resolution is deferred
    (no state change) and can be retried on a later tick.
    """
    pos = book.find(position_id)
    if not pos.open:
        raise ValueError(f"position {position_id} already closed")
    if owner_wallet.stablecoin + FILL_EPS < pos.debt:
        return Fill(pos.debt, 0.0, "deferred: owner lacks stablecoins")
    burned = pos.debt
    owner_wallet.stablecoin -= burned
    owner_wallet.collateral += pos.locked_collateral
    pos.open = False
    book.resolved_debt += burned
    book._drop_closed()
    return Fill(burned, burned)


def _resolve_partial(book: PositionBook, pos: CollateralPosition,
                     amount: float, owner_wallet: Wallet) -> float:
    """Resolve up to `amount` of a position's debt, splitting it if needed."""
    burn = min(amount, pos.debt, owner_wallet.stablecoin)
    if burn <= FILL_EPS:
        return 0.0
    fraction = burn / pos.debt
    released = pos.locked_collateral * fraction
    owner_wallet.stablecoin -= burn
    owner_wallet.collateral += released
    if fraction >= 1.0 - 1e-15:
        released_rest = pos.locked_collateral - released
        owner_wallet.collateral += released_rest
        pos.open = False
    else:
        pos.locked_collateral -= released
        pos.debt -= burn
    book.resolved_debt += burn
    return burn


def adjust_book(book: PositionBook, kind: str, delta: float,
                investor_wallets: list[Wallet], collateral_price: float,
                collateral_ratio: float, tick: int) -> Fill:
    """Grow or shrink the debt of one kind ("demand" or "staking") by delta.

    Growth opens one position per investor (equal split, scaled to each
    wallet's collateral); reduction resolves positions of that kind oldest
    first, splitting the last one when the target falls inside it.
    """
    if delta == 0.0:
        return Fill(0.0, 0.0)
    n = len(investor_wallets)
    if delta > 0.0:
        if collateral_price <= 0.0:
            return Fill(delta, 0.0, "collateral has no price; minting suspended")
        minted = 0.0
        share = delta / n
        for owner, wallet in enumerate(investor_wallets):
            if share <= FILL_EPS:
                continue
            _, fill = open_position(book, owner, share, collateral_price,
                                    collateral_ratio, wallet, kind, tick)
            minted += fill.filled
        note = "scaled to affordable size" if minted + FILL_EPS < delta else ""
        return Fill(delta, minted, note)

    want = -delta
    burned = 0.0
    for pos in sorted(book.open_positions(), key=lambda p: p.position_id):
        if pos.kind != kind:
            continue
        if want - burned <= FILL_EPS:
            break
        burned += _resolve_partial(book, pos, want - burned,
                                   investor_wallets[pos.owner])
    book._drop_closed()
    note = "scaled to holdings" if burned + FILL_EPS < want else ""
    return Fill(delta, -burned, note)


def adjust_staking(delta_staking: float, book: PositionBook,
                   investor_wallets: list[Wallet], collateral_price: float,
                   collateral_ratio: float, tick: int) -> Fill:
    """Stake additional collateral (delta > 0) or unwind staked positions."""
    return adjust_book(book, "staking", delta_staking, investor_wallets,
                       collateral_price, collateral_ratio, tick)


def user_investor_trade(delta_user_demand: float, user_wallets: list[Wallet],
                        investor_wallets: list[Wallet], price: float,
                        fees: float) -> Fill:
    """Secondary-market trade between users and investors.

    Positive delta: users buy from investors; negative: users sell back.
    Users pay the proportional fee in both directions; fee revenue accrues
    to the investors on the other side of the trade. Supply is unchanged.
    """
    if delta_user_demand == 0.0:
        return Fill(0.0, 0.0)
    if price <= 0.0:
        return Fill(delta_user_demand, 0.0, "market price is zero")

    if delta_user_demand > 0.0:
        inventory = sum(w.stablecoin for w in investor_wallets)
        afford = sum(w.fiat for w in user_wallets) / (price * (1.0 + fees))
        fill = max(0.0, min(delta_user_demand, inventory, afford))
        if fill <= FILL_EPS:
            return Fill(delta_user_demand, 0.0, "no inventory or fiat")
        # Buyers split the purchase equally up to their fiat; sellers are
        # drawn pro rata by inventory.
        remaining = fill
        n = len(user_wallets)
        for idx, w in enumerate(user_wallets):
            share = min(remaining, fill / n if idx < n - 1 else remaining,
                        w.fiat / (price * (1.0 + fees)))
            share = max(0.0, share)
            w.stablecoin += share
            w.fiat -= share * price * (1.0 + fees)
            remaining -= share
        bought = fill - remaining
        _draw_pro_rata(investor_wallets, "stablecoin", bought)
        fee_total = bought * price * fees
        _credit_pro_rata(investor_wallets, "fiat", bought * price + fee_total)
        return Fill(delta_user_demand, bought,
                    "partial fill" if bought + FILL_EPS < delta_user_demand else "")

    want = -delta_user_demand
    held = sum(w.stablecoin for w in user_wallets)
    afford = sum(w.fiat for w in investor_wallets) / (price * (1.0 - fees)) \
        if fees < 1.0 else 0.0
    fill = max(0.0, min(want, held, afford))
    if fill <= FILL_EPS:
        return Fill(delta_user_demand, 0.0, "no holdings or investor fiat")
    _draw_pro_rata(user_wallets, "stablecoin", fill)
    proceeds = fill * price * (1.0 - fees)
    _credit_pro_rata(user_wallets, "fiat", proceeds)
    _draw_pro_rata(investor_wallets, "fiat", proceeds)
    _credit_pro_rata(investor_wallets, "stablecoin", fill)
    return Fill(delta_user_demand, -fill,
                "partial fill" if fill + FILL_EPS < want else "")


@dataclass
class LiquidationResult:
    liquidated_ids: list[int]
    burned_debt: float
    seized_collateral: float
    blocked_debt: float        # under-collateralized debt left open (coin shortage)


def liquidate_positions(book: PositionBook, collateral_price: float,
                        liquidation_ratio: float,
                        investor_wallets: list[Wallet]) -> LiquidationResult:
    """Close every open position whose coverage fell below the liquidation ratio.

    The position's debt is burned (owner's coins first, then other investors
    pro rata, standing in for liquidation keepers) and its collateral is
    forfeited to the system buffer; the caller books the seized units. If the
    investors collectively cannot cover the debt, the position is liquidated
    partially and the blocked remainder is reported.
    """
    result = LiquidationResult([], 0.0, 0.0, 0.0)
    for pos in sorted(book.open_positions(), key=lambda p: p.position_id):
        if pos.coverage(collateral_price) >= liquidation_ratio:
            continue
        owner_wallet = investor_wallets[pos.owner]
        burn_owner = min(pos.debt, owner_wallet.stablecoin)
        others = sum(w.stablecoin for i, w in enumerate(investor_wallets)
                     if i != pos.owner)
        burn_others = min(pos.debt - burn_owner, others)
        burn = burn_owner + burn_others
        if burn <= FILL_EPS:
            result.blocked_debt += pos.debt
            continue
        fraction = burn / pos.debt
        owner_wallet.stablecoin -= burn_owner
        if burn_others > FILL_EPS:
            _draw_pro_rata(
                [w for i, w in enumerate(investor_wallets) if i != pos.owner],
                "stablecoin", burn_others)
        seized = pos.locked_collateral * fraction
        if fraction >= 1.0 - 1e-15:
            seized = pos.locked_collateral
            pos.open = False
            result.liquidated_ids.append(pos.position_id)
        else:
            pos.locked_collateral -= seized
            pos.debt -= burn
            result.blocked_debt += pos.debt
        result.burned_debt += burn
        result.seized_collateral += seized
        book.liquidated_debt += burn
    book._drop_closed()
    return result


def _draw_pro_rata(wallets: list[Wallet], attr: str, amount: float) -> None:
    """Deduct `amount` of one asset across wallets, pro rata by holdings."""
    total = sum(getattr(w, attr) for w in wallets)
    if amount > total + FILL_EPS:
        raise ValueError(f"cannot draw {amount} of {attr}: only {total} held")
    if total <= 0.0:
        return
    remaining = amount
    for i, w in enumerate(wallets):
        held = getattr(w, attr)
        share = remaining if i == len(wallets) - 1 else amount * held / total
        share = min(share, held, remaining)
        setattr(w, attr, held - share)
        remaining -= share


def _credit_pro_rata(wallets: list[Wallet], attr: str, amount: float) -> None:
    """Credit `amount` of one asset across wallets in equal shares."""
    n = len(wallets)
    for w in wallets:
        setattr(w, attr, getattr(w, attr) + amount / n)
