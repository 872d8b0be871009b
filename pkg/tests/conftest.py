"""Shared fixtures: small worlds keep the seeded-loop suites fast."""

import pytest

from gridrealm import SimConfig
from gridrealm.engine import Engine


@pytest.fixture
def small_config():
    return SimConfig(map_size=48, npc_count=8, max_agents=16)


@pytest.fixture
def engine(small_config):
    return Engine(small_config, seed=7)


def make_engine(seed: int, **overrides) -> Engine:
    defaults = dict(map_size=48, npc_count=8, max_agents=16)
    defaults.update(overrides)
    return Engine(SimConfig(**defaults), seed=seed)
