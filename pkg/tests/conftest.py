import numpy as np
import pytest

from landauer.benchmarks import resonant_level


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def benchmark_spec():
    return resonant_level()
