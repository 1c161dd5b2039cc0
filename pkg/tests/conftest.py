import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))


def random_spd(p, seed, cond_boost=0.5):
    """Well-conditioned random SPD matrix."""
    rng = np.random.Generator(np.random.Philox(seed))
    a = rng.standard_normal((p, 2 * p))
    return a @ a.T / (2 * p) + cond_boost * np.eye(p)


@pytest.fixture
def spd_factory():
    return random_spd
