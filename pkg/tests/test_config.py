from fractions import Fraction

import pytest

from ssmst.configs.config import Config


def test_config_is_a_singleton():
    assert Config() is Config()


def test_defaults():
    config = Config()
    assert config.alpha == Fraction(73)
    assert config.budget_constant_c == 40
    assert config.fleet_jobs >= 1


def test_round_budget_for():
    config = Config()
    assert config.round_budget_for(4) == 40 * 64
    assert config.round_budget_for(1) == 40 * 8
    assert config.round_budget_for(1000) == config.round_budget


def test_set_alpha():
    config = Config()
    previous = config.alpha
    try:
        assert "3/2" in config.set_alpha("3/2")
        assert config.alpha == Fraction(3, 2)
        with pytest.raises(ValueError):
            config.set_alpha(0)
    finally:
        config.alpha = previous
