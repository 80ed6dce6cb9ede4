import pytest
from hypothesis import given, strategies as st

from sme import ConfigError, DEFAULTS, EnvConfig, validate_config


def test_default_values():
    cfg = EnvConfig()
    assert (cfg.n_state, cfg.n_action) == (8, 4)
    assert (cfg.reward_interval, cfg.min_reward) == (1, 0.0)
    assert (cfg.survival_difficulty, cfg.policy_complexity) == (0.0, 1)
    assert (cfg.horizon, cfg.master_seed) == (100, 1)


@pytest.mark.parametrize("field", ["n_state", "n_action", "reward_interval",
                                   "policy_complexity", "horizon"])
def test_positive_int_fields(field):
    with pytest.raises(ConfigError, match=f"{field} must be ≥ 1"):
        EnvConfig(**{field: 0})
    with pytest.raises(ConfigError, match=f"{field} must be an integer"):
        EnvConfig(**{field: 2.5})
    with pytest.raises(ConfigError, match=f"{field} must be an integer"):
        EnvConfig(**{field: True})


@pytest.mark.parametrize("field", ["min_reward", "survival_difficulty"])
@pytest.mark.parametrize("value", [-0.1, 1.0, 1.5])
def test_unit_fraction_fields(field, value):
    with pytest.raises(ConfigError, match=rf"{field} must lie in \[0,1\)"):
        EnvConfig(**{field: value})


def test_fraction_fields_coerced_to_float():
    cfg = EnvConfig(min_reward=0, survival_difficulty=0)
    assert isinstance(cfg.min_reward, float)
    assert isinstance(cfg.survival_difficulty, float)


def test_master_seed_range():
    EnvConfig(master_seed=0)
    EnvConfig(master_seed=2**64 - 1)
    with pytest.raises(ConfigError, match="64 unsigned bits"):
        EnvConfig(master_seed=2**64)
    with pytest.raises(ConfigError, match="64 unsigned bits"):
        EnvConfig(master_seed=-1)


def test_validate_config_fills_defaults():
    cfg = validate_config({"n_state": 3})
    assert cfg.n_state == 3
    assert cfg.n_action == DEFAULTS["n_action"]


def test_validate_config_rejects_unknown_field():
    with pytest.raises(ConfigError, match="unknown config field 'n_staet'"):
        validate_config({"n_staet": 3})


def test_validate_config_checks_format_version():
    with pytest.raises(ConfigError, match="format_version"):
        validate_config({"format_version": 99})


def test_json_round_trip():
    cfg = EnvConfig(n_state=5, horizon=7, master_seed=123)
    doc = cfg.to_json_dict()
    assert doc["format_version"] == 1
    assert validate_config(doc) == cfg


valid_configs = st.builds(
    EnvConfig,
    n_state=st.integers(1, 32),
    n_action=st.integers(1, 32),
    reward_interval=st.integers(1, 200),
    min_reward=st.floats(0.0, 0.99),
    survival_difficulty=st.floats(0.0, 0.99),
    policy_complexity=st.integers(1, 64),
    horizon=st.integers(1, 10_000),
    master_seed=st.integers(0, 2**64 - 1),
)


@given(valid_configs)
def test_any_valid_config_round_trips(cfg):
    assert validate_config(cfg.to_json_dict()) == cfg


def test_frozen():
    cfg = EnvConfig()
    with pytest.raises(AttributeError):
        cfg.n_state = 9
