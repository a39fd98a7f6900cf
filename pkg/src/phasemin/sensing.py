"""Problem-instance generation under the complex Gaussian sensing model.

The canonical representation is the reduced form: an instance stores an
orthonormal basis Q of the random measurement subspace L, the unit ground
truth z in reduced coordinates, and the nonnegative measurement vector
``y = |Q z|``. The lifted truth is ``u0 = Q z`` with ``||u0|| = ||y|| = 1``.

Reproducibility: an instance is a pure function of ``(seed, n, m)`` (plus
z when given explicitly), so only the seed is serialized and the basis is
regenerated on load. Per-trial seeds are derived from a master seed with
``spawn_seed`` so grid experiments are order-independent and can be
distributed across workers without coordination.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .core import OrthonormalBasis, SingularInstanceError, orthonormalize_columns

__all__ = [
    "spawn_seed",
    "sample_complex_gaussian",
    "SensingInstance",
    "make_instance",
    "random_unit_iterate",
    "instance_to_json",
    "instance_from_json",
]


def spawn_seed(master_seed: int, *key: int) -> int:
    """Collapse a master seed plus an integer key path into one 64-bit seed.

    Distinct key paths give statistically independent streams; the mapping
    is stable across processes and numpy versions of the same major line.
    """
    ss = np.random.SeedSequence(master_seed, spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, np.uint64)[0])


def sample_complex_gaussian(
    rng: np.random.Generator, rows: int, cols: int, variance_per_entry: float = 1.0
) -> np.ndarray:
    """(rows, cols) i.i.d. complex normal entries.

    Real and imaginary parts are each N(0, variance_per_entry / 2), so
    E|entry|^2 = variance_per_entry.
    """
    if variance_per_entry <= 0:
        raise ValueError("variance_per_entry must be positive")
    scale = np.sqrt(variance_per_entry / 2.0)
    re = rng.standard_normal((rows, cols))
    im = rng.standard_normal((rows, cols))
    return scale * (re + 1j * im)


@dataclass(frozen=True)
class SensingInstance:
    """One phase-retrieval problem in reduced form.

    Attributes
    ----------
    n, m : signal dimension and measurement count (n < m).
    z : unit ground truth in C^n.
    basis : orthonormal columns Q (m x n) spanning the subspace L.
    y : nonnegative measurements ``|Q z|`` with ``||y|| = 1``.
    seed : the 64-bit seed that regenerates the instance.
    """

    n: int
    m: int
    z: np.ndarray = field(repr=False)
    basis: OrthonormalBasis = field(repr=False)
    y: np.ndarray = field(repr=False)
    seed: int

    def __post_init__(self):
        z = np.ascontiguousarray(self.z, dtype=np.complex128)
        y = np.ascontiguousarray(self.y, dtype=np.float64)
        z.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "y", y)

    @property
    def lifted_truth(self) -> np.ndarray:
        """u0 = Q z, the unit-norm solution ray representative in C^m."""
        return self.basis.columns @ self.z


def make_instance(
    seed: int, n: int, m: int, z: np.ndarray | None = None
) -> SensingInstance:
    """Draw an instance: random n-dim subspace of C^m, unit truth, moduli.

    The subspace basis is the orthonormalization of an m x n complex
    Gaussian draw; z is drawn uniformly on the unit sphere of C^n unless
    given. A rank-deficient Gaussian draw (probability ~0) is resampled
    once, then surfaced as ``SingularInstanceError``.
    """
    if not 1 <= n < m:
        raise ValueError(f"need 1 <= n < m, got n={n}, m={m}")
    rng = np.random.default_rng(np.random.SeedSequence(int(seed)))
    A = sample_complex_gaussian(rng, m, n)
    try:
        basis = orthonormalize_columns(A)
    except SingularInstanceError:
        A = sample_complex_gaussian(rng, m, n)
        basis = orthonormalize_columns(A)
    if z is None:
        g = sample_complex_gaussian(rng, n, 1)[:, 0]
        z = g / np.linalg.norm(g)
    else:
        z = np.asarray(z, dtype=np.complex128)
        if z.shape != (n,):
            raise ValueError(f"z must have shape ({n},), got {z.shape}")
        zn = np.linalg.norm(z)
        if not np.isclose(zn, 1.0, atol=1e-8):
            raise ValueError(f"z must be a unit vector, got ||z|| = {zn}")
        if abs(zn - 1.0) > 1e-12:
            z = z / zn
    y = np.abs(basis.columns @ z)
    return SensingInstance(n=n, m=m, z=z, basis=basis, y=y, seed=int(seed))


def random_unit_iterate(
    rng: np.random.Generator, inst: SensingInstance
) -> np.ndarray:
    """Uniform random unit vector on the instance subspace L.

    Gaussian in the reduced coordinates, normalized, then lifted through
    the basis, so membership in L holds to rounding.
    """
    g = sample_complex_gaussian(rng, inst.n, 1)[:, 0]
    g /= np.linalg.norm(g)
    return inst.basis.columns @ g


def instance_to_json(inst: SensingInstance) -> str:
    """JSON document for reproducibility audits (basis is regenerated)."""
    return json.dumps(
        {
            "n": inst.n,
            "m": inst.m,
            "seed": inst.seed,
            "z_re": inst.z.real.tolist(),
            "z_im": inst.z.imag.tolist(),
            "y": inst.y.tolist(),
        },
        sort_keys=True,
    )


def instance_from_json(doc: str) -> SensingInstance:
    """Rebuild an instance from its JSON document and verify the audit.

    The basis comes back from the stored seed; the stored y must match the
    regenerated ``|Q z|`` to rounding, otherwise the document is corrupt.
    """
    data = json.loads(doc)
    z = np.asarray(data["z_re"], dtype=float) + 1j * np.asarray(data["z_im"], dtype=float)
    inst = make_instance(data["seed"], data["n"], data["m"], z=z)
    y_stored = np.asarray(data["y"], dtype=float)
    if not np.allclose(y_stored, inst.y, atol=1e-9):
        raise ValueError("stored measurements disagree with the regenerated basis")
    return inst
