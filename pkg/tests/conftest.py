"""Shared fixtures: seeded random channels, encoders and feedback generators."""

import sys
from pathlib import Path

import numpy as np
import pytest

# Add src to Python path
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from feedback_lab.channel.spec import ChannelSpec, awgn, validate_channel  # noqa: E402
from feedback_lab.coding.encoder import EncoderSpec  # noqa: E402

UNSTABLE_MODULI = (1.05, 1.12, 1.19, 1.25)


def random_channel(rng: np.random.Generator, m: int, radius: float = 0.5) -> ChannelSpec:
    """Channel of order m with every numerator and denominator root inside ``radius``."""
    if m == 0:
        return awgn()
    zeros = rng.uniform(-radius, radius, m)
    poles = rng.uniform(-radius, radius, m)
    f = np.poly(zeros)[1:]
    return validate_channel(f, np.poly(poles)[1:] - f)


def random_encoder(rng: np.random.Generator, n: int) -> EncoderSpec:
    """Encoder of dimension n + 1 with distinct unstable eigenvalue moduli and random signs."""
    k = n + 1
    moduli = rng.permutation(UNSTABLE_MODULI)[:k]
    signs = rng.choice([-1.0, 1.0], size=k)
    Q, _ = np.linalg.qr(rng.standard_normal((k, k)))
    A = Q @ np.diag(moduli * signs) @ Q.T
    C = rng.standard_normal(k)
    C /= np.linalg.norm(C)
    return EncoderSpec.from_matrices(A, C)


def random_systems(count: int, seed: int, max_m: int = 3, max_n: int = 3):
    rng = np.random.default_rng(seed)
    systems = []
    for _ in range(count):
        m = int(rng.integers(0, max_m + 1))
        n = int(rng.integers(0, max_n + 1))
        systems.append((random_channel(rng, m), random_encoder(rng, n)))
    return systems


@pytest.fixture
def rng():
    return np.random.default_rng(20240101)


@pytest.fixture
def arma1():
    return validate_channel([0.5], [0.3])


@pytest.fixture
def arma2():
    return validate_channel([0.2, 0.1], [0.1, 0.05])


@pytest.fixture
def scalar_encoder():
    return EncoderSpec.scalar(1.5, 1.0)


@pytest.fixture
def vector_encoder():
    return EncoderSpec.from_matrices([[1.2, 0.3], [0.0, 0.6]], [1.0, 0.0])


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long Monte Carlo and capacity search runs")
