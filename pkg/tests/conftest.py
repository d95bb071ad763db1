import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture(scope="session")
def small_problem():
    """generic-d2m1 with a small mode box, for fast operator-level tests."""
    from acylglue.gluer.experiments import problem_preset

    return problem_preset("generic-d2m1", mode_cutoff=2)
