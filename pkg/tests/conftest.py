"""Shared fixtures; puts src/ on the import path like command_list.sh does with PYTHONPATH."""
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

SRC = Path(__file__).resolve().parents[1] / 'src'
sys.path.insert(0, str(SRC))

from exact_core import BitMatrix  # noqa: E402
from net_core import GeneratorMatrixSet  # noqa: E402

MATRIX_DIR = Path(__file__).resolve().parents[1] / 'data' / 'matrices'


@pytest.fixture
def matrix_dir():
    return MATRIX_DIR


@pytest.fixture
def hammersley_matrices():
    """Identity and bit reversal, n = 6."""
    return GeneratorMatrixSet(2, 6, 1, (BitMatrix.identity(6), BitMatrix.reversal(6)))


@pytest.fixture
def rng_fractions():
    """Deterministic random rationals in [0, 1] with mixed denominators."""
    rng = np.random.default_rng(2024)

    def draw(count, max_denominator=97):
        values = []
        for _ in range(count):
            denominator = int(rng.integers(1, max_denominator + 1))
            values.append(Fraction(int(rng.integers(0, denominator + 1)), denominator))
        return values
    return draw
