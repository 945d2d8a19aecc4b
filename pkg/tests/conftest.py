import numpy as np
import pytest

from fraclat import Sequence


@pytest.fixture
def rng():
    return np.random.default_rng(20240612)


def random_sequence(rng, width=7, offset=None, scale=1.0):
    """Random finitely supported sequence with nonzero endpoints."""
    vals = rng.uniform(-scale, scale, size=width)
    vals[0] = vals[0] if vals[0] != 0.0 else scale
    vals[-1] = vals[-1] if vals[-1] != 0.0 else -scale
    if offset is None:
        offset = int(rng.integers(-5, 6))
    return Sequence(offset, vals)
