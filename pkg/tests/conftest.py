import os

# Must happen before numpy initializes its BLAS thread pool: threaded
# BLAS on these small kernels causes scheduler thrashing in CPU-capped
# environments (and single-threaded reductions are bit-deterministic).
for var in ("OPENBLAS_NUM_THREADS", "OMP_NUM_THREADS", "MKL_NUM_THREADS"):
    os.environ.setdefault(var, "1")

import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)


def cn(rng, *shape, var=1.0):
    """i.i.d. complex normal array, E|entry|^2 = var."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * np.sqrt(
        var / 2.0
    )
