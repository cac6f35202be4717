"""Control-mechanism tests: conservation, sanity, position reconciliation."""

import math

import pytest

from stablesim.controls import check_positions, check_sanity, check_supply_conservation
from stablesim.model import Wallet
from stablesim.settlement import IssuerPool, PositionBook, open_position

BOUNDS = {"user": 1000.0, "investor": 1001.5, "staking": 210.0}


def fresh_state():
    users = [Wallet(fiat=100.0, stablecoin=20.0) for _ in range(2)]
    investors = [Wallet(fiat=500.0, stablecoin=30.0, collateral=50.0)]
    pool = IssuerPool(units=70.0, fee_account=0.0)
    supply = 70.0
    fiat_total = sum(w.fiat for w in users + investors) + pool.units
    collateral_total = sum(w.collateral for w in users + investors)
    return users, investors, pool, supply, fiat_total, collateral_total


def test_conservation_passes_on_consistent_state():
    users, investors, pool, supply, fiat, col = fresh_state()
    result = check_supply_conservation(0, users, investors, pool, None, 0.0,
                                       supply, fiat, col, pool_is_fiat=True)
    assert result.passed


def test_conservation_detects_corrupted_wallet():
    users, investors, pool, supply, fiat, col = fresh_state()
    users[0].stablecoin += 1.0
    result = check_supply_conservation(0, users, investors, pool, None, 0.0,
                                       supply, fiat, col, pool_is_fiat=True)
    assert not result.passed
    assert "stablecoin" in result.detail


def test_conservation_detects_fiat_leak():
    users, investors, pool, supply, fiat, col = fresh_state()
    investors[0].fiat -= 5.0
    result = check_supply_conservation(0, users, investors, pool, None, 0.0,
                                       supply, fiat, col, pool_is_fiat=True)
    assert not result.passed
    assert "fiat" in result.detail


def test_conservation_counts_locked_collateral():
    users, investors, pool, supply, fiat, col = fresh_state()
    book = PositionBook()
    open_position(book, 0, 10.0, 1.0, 1.5, investors[0])
    supply += 10.0
    result = check_supply_conservation(0, users, investors, pool, book, 0.0,
                                       supply, fiat, col, pool_is_fiat=True)
    assert result.passed


def test_conservation_is_side_effect_free():
    users, investors, pool, supply, fiat, col = fresh_state()
    args = (0, users, investors, pool, None, 0.0, supply, fiat, col)
    first = check_supply_conservation(*args, pool_is_fiat=True)
    snapshot = [w.fiat for w in users + investors]
    second = check_supply_conservation(*args, pool_is_fiat=True)
    assert first.passed == second.passed
    assert [w.fiat for w in users + investors] == snapshot


def test_sanity_passes_baseline_values():
    result = check_sanity(0, 1.0, 1.0, 99.0, 100.5, 29.8, BOUNDS, [])
    assert result.passed
    assert result.warnings == []


def test_sanity_records_clamp_warnings_without_failing():
    result = check_sanity(0, 1.0, 1.0, 0.0, 1.5, 0.0, BOUNDS,
                          ["user demand clamped (below 0)"])
    assert result.passed
    assert result.warnings == ["user demand clamped (below 0)"]


def test_sanity_fails_on_nan_price():
    result = check_sanity(0, math.nan, 1.0, 99.0, 100.5, 0.0, BOUNDS, [])
    assert not result.passed
    assert "not finite" in result.detail


def test_sanity_fails_on_negative_price():
    result = check_sanity(0, -0.1, 1.0, 99.0, 100.5, 0.0, BOUNDS, [])
    assert not result.passed


def test_sanity_fails_on_demand_above_bound():
    result = check_sanity(0, 1.0, 1.0, 1500.0, 100.5, 0.0, BOUNDS, [])
    assert not result.passed
    assert "user demand" in result.detail


def test_positions_empty_book_passes():
    book = PositionBook()
    book.begin_tick()
    assert check_positions(0, book, 0.0, 0.0).passed


def test_positions_round_trip_reconciles():
    book = PositionBook()
    wallet = Wallet(stablecoin=0.0, collateral=1000.0)
    book.begin_tick()
    pid, _ = open_position(book, 0, 100.0, 1.0, 1.5, wallet)
    from stablesim.settlement import resolve_position
    resolve_position(book, pid, wallet)
    result = check_positions(0, book, 0.0, 0.0)
    assert result.passed
    assert book.total_debt() == 0.0


def test_positions_detect_out_of_band_mutation():
    book = PositionBook()
    wallet = Wallet(stablecoin=0.0, collateral=1000.0)
    book.begin_tick()
    pid, _ = open_position(book, 0, 100.0, 1.0, 1.5, wallet)
    book.find(pid).debt += 7.0  # corrupt
    result = check_positions(0, book, 107.0, 0.0)
    assert not result.passed
    assert "reconcile" in result.detail


def test_positions_detect_supply_mismatch():
    book = PositionBook()
    wallet = Wallet(stablecoin=0.0, collateral=1000.0)
    book.begin_tick()
    open_position(book, 0, 100.0, 1.0, 1.5, wallet)
    result = check_positions(0, book, 120.0, 0.0)
    assert not result.passed
    assert "supply" in result.detail
