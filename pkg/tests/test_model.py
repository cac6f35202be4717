"""Domain-type tests: quadrant labels, collateral level, config validation."""

import math
from dataclasses import replace
from itertools import product

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import quadrant_config
from stablesim.errors import ConfigError
from stablesim.model import (
    CollateralManagement,
    CollateralSource,
    Scenario,
    Wallet,
    collateral_level,
    quadrant_label,
    safe_collateral_level,
)


def spec_for(source, management):
    config = quadrant_config("usdt")
    return replace(config.spec, source=source, management=management)


def test_quadrant_labels_match_taxonomy():
    assert quadrant_label(spec_for(CollateralSource.EXOGENOUS,
                                   CollateralManagement.CENTRAL)) \
        == "exogenous/central"
    assert quadrant_label(spec_for(CollateralSource.ENDOGENOUS,
                                   CollateralManagement.CENTRAL)) \
        == "endogenous/central"
    assert quadrant_label(spec_for(CollateralSource.ENDOGENOUS,
                                   CollateralManagement.DECENTRAL)) \
        == "endogenous/decentral"
    assert quadrant_label(spec_for(CollateralSource.EXOGENOUS,
                                   CollateralManagement.DECENTRAL)) \
        == "exogenous/decentral"


def test_quadrant_label_is_a_bijection():
    labels = {quadrant_label(spec_for(s, m))
              for s, m in product(CollateralSource, CollateralManagement)}
    assert labels == {"exogenous/central", "exogenous/decentral",
                      "endogenous/central", "endogenous/decentral"}


@pytest.mark.parametrize("units,price,supply,expected", [
    (150.0, 1.0, 100.0, 1.5),
    (100.0, 1.0, 100.0, 1.0),
    (400.0, 0.5, 100.0, 2.0),
])
def test_collateral_level_examples(units, price, supply, expected):
    assert collateral_level(units, price, supply) == pytest.approx(expected)


def test_collateral_level_zero_supply_raises():
    with pytest.raises(ValueError, match="undefined collateral level"):
        collateral_level(100.0, 1.0, 0.0)


def test_safe_collateral_level_zero_supply_is_infinite():
    assert safe_collateral_level(100.0, 1.0, 0.0) == math.inf


@given(units=st.floats(0.0, 1e6), price=st.floats(0.0, 1e3),
       supply=st.floats(1e-3, 1e6), k=st.floats(1e-3, 1e3))
def test_collateral_level_homogeneous_degree_zero(units, price, supply, k):
    base = collateral_level(units, price, supply)
    scaled = collateral_level(units * k, price, supply * k)
    assert scaled == pytest.approx(base, rel=1e-9, abs=1e-12)


def test_scenario_shock_signs():
    assert Scenario.BASELINE.shock_sign == 0.0
    assert Scenario.NEGATIVE_SHOCK.shock_sign == -1.0
    assert Scenario.POSITIVE_SHOCK.shock_sign == 1.0


def test_spec_validation_rejects_bad_fees():
    config = quadrant_config("usdt")
    bad = replace(config.spec, fees=1.5)
    with pytest.raises(ConfigError, match="fees"):
        bad.validate()


def test_spec_validation_rejects_liquidation_above_collateral_ratio():
    config = quadrant_config("dai")
    bad = replace(config.spec, liquidation_ratio=2.0)
    with pytest.raises(ConfigError, match="liquidation_ratio"):
        bad.validate()


def test_spec_validation_rejects_bad_critical_level():
    config = quadrant_config("usdt")
    bad = replace(config.spec, demand=replace(config.spec.demand,
                                              critical_level=0.0))
    with pytest.raises(ConfigError, match="critical_level"):
        bad.validate()


def test_config_validation_requires_richer_investors():
    config = quadrant_config("usdt")
    bad = replace(config, initial_investor_wallet=Wallet(fiat=100.0))
    with pytest.raises(ConfigError, match="investor initial balances"):
        bad.validate()


def test_config_validation_rejects_bad_shock_step():
    config = quadrant_config("usdt")
    with pytest.raises(ConfigError, match="shock_step"):
        replace(config, shock_step=config.n_steps).validate()


def test_shipped_configs_validate():
    for name in ("usdt", "dai", "terra", "susd"):
        quadrant_config(name).validate()
