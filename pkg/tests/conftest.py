import os
import sys

import matplotlib
import numpy as np
import pytest

# Ensure the top-level modules are importable
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

matplotlib.use("Agg")


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def three_points():
    """Unit masses at 0, 1/2 and i/2."""
    return np.array([0.0, 0.5, 0.5j])
