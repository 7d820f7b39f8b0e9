from __future__ import annotations

import random

import pytest

from robba_kit.padic import RingConfig


@pytest.fixture
def cfg():
    return RingConfig(5, 1, 1, 12)


@pytest.fixture
def cfg_ram():
    """Ramified coefficients: pi**2 = 3 over Z_3."""
    return RingConfig(3, 1, 2, 10)


@pytest.fixture
def rng():
    return random.Random(20240611)
