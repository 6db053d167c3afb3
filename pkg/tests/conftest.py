import math
import os
from math import gcd
from unittest.mock import patch

import numpy as np
import pytest

from ewalk.config import settings
from ewalk.dynamics import figure1_initial_state
from ewalk.models import RationalField, SU2Coin, WaveFunction


def reduced_fields(max_den: int):
    """Every reduced n/m with 0 <= n < m <= max_den."""
    return [RationalField(n, m) for m in range(1, max_den + 1) for n in range(m) if gcd(n, m) == 1]


def random_state(rng: np.random.Generator, radius: int = 3) -> WaveFunction:
    """Normalized random state on cells -radius .. radius."""
    amps = rng.normal(size=(2 * radius + 1, 2)) + 1j * rng.normal(size=(2 * radius + 1, 2))
    return WaveFunction(-radius, amps / np.linalg.norm(amps))


@pytest.fixture
def hadamard():
    return SU2Coin.hadamard()


@pytest.fixture
def tilted_coin():
    # |a| = 0.6 with a nonzero phase
    return SU2Coin.from_polar(0.6, 0.7)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def figure1_state():
    return figure1_initial_state()


@pytest.fixture
def fast_settings():
    """Coarser momentum search for sweeps over many fields."""
    with patch.dict(
        os.environ,
        {"EWALK_THETA_GRID": "1024", "EWALK_REFINE_CANDIDATES": "4", "EWALK_REFINE_ROUNDS": "2"},
    ):
        settings.reload()
        yield settings
    settings.reload()


@pytest.fixture
def output_dir(tmp_path):
    """Point relative CLI outputs at a temporary folder."""
    with patch.dict(os.environ, {"EWALK_OUTPUT_DIR": str(tmp_path)}):
        settings.reload()
        yield tmp_path
    settings.reload()


@pytest.fixture
def inv_sqrt2():
    return 1.0 / math.sqrt(2.0)


@pytest.fixture
def cli(capsys):
    """Run the ewalk entry point; returns (exit code, stdout)."""
    from ewalk.main import main

    def run(*argv):
        code = main(list(argv))
        return code, capsys.readouterr().out

    return run
