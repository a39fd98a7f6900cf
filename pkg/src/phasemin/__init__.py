"""Alternating-minimization phase retrieval with complex Gaussian sensing.

Library layout:

* ``core`` - complex vector primitives, projections, Gram-Schmidt
* ``sensing`` - seeded problem instances (reduced subspace model)
* ``altmin`` - the normalized/raw iterations, error metric, solve loop
* ``dynamics`` - coefficient-trace instrumentation of the iterates
* ``expectations`` - Monte-Carlo gain functions f, g and certification
* ``quadrature`` - deterministic integration oracle for f, g
* ``probes`` - statistical/deterministic property probes
* ``harness``/``cli`` - seeded experiment orchestration (``phasemin`` CLI)
"""

import os as _os

# All kernels here work on small-to-medium dense blocks where BLAS
# fork-join costs more than it saves (badly so inside CPU-capped
# containers); parallelism belongs at the trial level (process pool).
# Respect an explicit user setting, otherwise keep BLAS single-threaded.
for _var in ("OPENBLAS_NUM_THREADS", "OMP_NUM_THREADS", "MKL_NUM_THREADS"):
    _os.environ.setdefault(_var, "1")

from ._backend import backend_name
from .altmin import (
    SolveConfig,
    SolveReport,
    StalledAtZeroError,
    dist_up_to_phase,
    solve,
    step_normalized,
    step_raw,
)
from .core import (
    DegenerateDirectionError,
    DimensionMismatchError,
    OrthonormalBasis,
    SingularInstanceError,
    gram_schmidt_append,
    odot,
    orthonormalize_columns,
    phase_vec,
    project,
)
from .dynamics import (
    CoefficientTrace,
    RecursionCheck,
    basis_depth,
    first_crossing,
    tail_coefficient_stats,
    verify_coefficient_recursion,
)
from .expectations import (
    CertificationReport,
    FgEstimate,
    certify_constants,
    estimate_f,
    estimate_g,
    fg_curve,
)
from .probes import ProbeResult, run_all_probes
from .sensing import (
    SensingInstance,
    make_instance,
    random_unit_iterate,
    sample_complex_gaussian,
    spawn_seed,
)

__version__ = "0.1.0"

__all__ = [
    "backend_name",
    "SolveConfig",
    "SolveReport",
    "StalledAtZeroError",
    "dist_up_to_phase",
    "solve",
    "step_normalized",
    "step_raw",
    "DegenerateDirectionError",
    "DimensionMismatchError",
    "OrthonormalBasis",
    "SingularInstanceError",
    "gram_schmidt_append",
    "odot",
    "orthonormalize_columns",
    "phase_vec",
    "project",
    "CoefficientTrace",
    "RecursionCheck",
    "basis_depth",
    "first_crossing",
    "tail_coefficient_stats",
    "verify_coefficient_recursion",
    "CertificationReport",
    "FgEstimate",
    "certify_constants",
    "estimate_f",
    "estimate_g",
    "fg_curve",
    "ProbeResult",
    "run_all_probes",
    "SensingInstance",
    "make_instance",
    "random_unit_iterate",
    "sample_complex_gaussian",
    "spawn_seed",
    "__version__",
]
