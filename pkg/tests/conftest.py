import pytest
from hypothesis import settings

from sme import EnvConfig, create_environment

settings.register_profile("suite", derandomize=True, max_examples=50,
                          deadline=None)
settings.load_profile("suite")


@pytest.fixture
def default_cfg():
    return EnvConfig()


@pytest.fixture
def default_env(default_cfg):
    return create_environment(default_cfg)
