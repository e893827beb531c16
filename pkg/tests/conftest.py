"""Shared fixtures for pimring tests."""

import numpy as np
import pytest

from pimring.ring.ntt import build_base_twiddles
from pimring.ring.rns import build_base


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def base8():
    """Two 30-bit moduli supporting length-8 negacyclic NTTs."""
    return build_base(8, 54)


@pytest.fixture
def tables8(base8):
    return build_base_twiddles(base8, 8)


@pytest.fixture
def base64():
    return build_base(64, 54)


@pytest.fixture
def tables64(base64):
    return build_base_twiddles(base64, 64)
