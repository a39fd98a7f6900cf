"""Dense complex vector/matrix primitives: phase and modulus operators,
subspace projections, and Gram-Schmidt orthonormalization.

All arrays are dense ``complex128``. Values are treated as immutable after
construction; every operation returns fresh arrays, so everything in this
module is safe to share across parallel workers.

Conventions
-----------
* ``phase(0) = 1``. The zero entry is a measure-zero event for the complex
  Gaussian models used elsewhere; a fixed convention keeps the operator
  total and deterministic.
* Inner products are conjugate-linear in the *first* argument,
  ``<a, b> = sum(conj(a_i) b_i)``, matching ``np.vdot``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "DimensionMismatchError",
    "DegenerateDirectionError",
    "SingularInstanceError",
    "OrthonormalBasis",
    "phase_vec",
    "odot",
    "project",
    "orthogonalize_against",
    "gram_schmidt_append",
    "orthonormalize_columns",
]

# Residual norms below this fraction of the input norm mean the new
# direction is numerically inside the current span: an order of magnitude
# above double-precision orthogonalization noise.
DEGENERACY_RTOL = 1e-10


class DimensionMismatchError(ValueError):
    """Operands have incompatible lengths/shapes."""


class DegenerateDirectionError(RuntimeError):
    """A vector to orthonormalize lies (numerically) in the current span."""


class SingularInstanceError(RuntimeError):
    """A matrix expected to have full column rank does not."""


def _as_complex_vector(v, name: str = "v") -> np.ndarray:
    v = np.asarray(v, dtype=np.complex128)
    if v.ndim != 1:
        raise DimensionMismatchError(f"{name} must be 1-d, got shape {v.shape}")
    return v


def phase_vec(v) -> np.ndarray:
    """Entrywise phase ``v_i / |v_i|``, with zeros mapped to ``1+0j``.

    Computed as ``exp(i * arctan2(im, re))``, which stays on the unit
    circle for inputs of any magnitude (direct complex division loses all
    angular precision for subnormal entries and can overflow internally).
    """
    v = _as_complex_vector(v)
    out = np.exp(1j * np.angle(v))
    out[v == 0.0] = 1.0 + 0.0j
    return out


def odot(w, y) -> np.ndarray:
    """Pointwise product of the phases of ``w`` with the moduli of ``y``.

    ``out_i = phase(w_i) * |y_i|``; the output moduli equal ``|y_i|``
    exactly (up to the sign convention at ``w_i = 0``).
    """
    w = _as_complex_vector(w, "w")
    y = np.asarray(y)
    if y.ndim != 1 or y.shape[0] != w.shape[0]:
        raise DimensionMismatchError(
            f"length mismatch: w has {w.shape[0]} entries, y has shape {y.shape}"
        )
    return phase_vec(w) * np.abs(y)


@dataclass(frozen=True)
class OrthonormalBasis:
    """An ordered set of orthonormal columns in C^m.

    ``columns`` is an ``(m, count)`` complex matrix, stored Fortran-ordered
    (column-major) so the projection kernels can hand it to BLAS directly.
    The array is frozen (non-writeable) after construction.
    """

    columns: np.ndarray = field(repr=False)

    def __post_init__(self):
        cols = np.asfortranarray(self.columns, dtype=np.complex128)
        if cols.ndim != 2:
            raise DimensionMismatchError("columns must be an (m, k) matrix")
        if cols.shape[1] > cols.shape[0]:
            raise DimensionMismatchError(
                f"cannot have {cols.shape[1]} orthonormal columns in C^{cols.shape[0]}"
            )
        cols.flags.writeable = False
        object.__setattr__(self, "columns", cols)

    @classmethod
    def empty(cls, m: int) -> "OrthonormalBasis":
        return cls(np.zeros((m, 0), dtype=np.complex128))

    @property
    def m(self) -> int:
        return self.columns.shape[0]

    @property
    def count(self) -> int:
        return self.columns.shape[1]

    def orthonormality_defect(self) -> float:
        """Max-norm deviation of the Gram matrix from the identity."""
        if self.count == 0:
            return 0.0
        gram = self.columns.conj().T @ self.columns
        return float(np.max(np.abs(gram - np.eye(self.count))))


def project(basis: OrthonormalBasis, v) -> np.ndarray:
    """Orthogonal projection of ``v`` onto the span of the basis columns."""
    v = _as_complex_vector(v)
    if v.shape[0] != basis.m:
        raise DimensionMismatchError(
            f"length mismatch: basis lives in C^{basis.m}, v has {v.shape[0]} entries"
        )
    if basis.count == 0:
        return np.zeros_like(v)
    cols = basis.columns
    return cols @ (cols.conj().T @ v)


def orthogonalize_against(columns: np.ndarray, v: np.ndarray) -> tuple[np.ndarray, float]:
    """Residual of ``v`` against orthonormal ``columns``, classical twice.

    One unconditional full re-orthogonalization pass: downstream the basis
    grows to O(log n) columns and single-pass drift would corrupt the
    recorded coefficient traces. Returns the unnormalized residual and its
    norm.

    Raises
    ------
    DegenerateDirectionError
        If the residual norm falls below ``DEGENERACY_RTOL * ||v||``,
        i.e. ``v`` is numerically in the span of the columns.
    """
    vnorm = float(np.linalg.norm(v))
    if columns.shape[1]:
        r = v - columns @ (columns.conj().T @ v)
        r -= columns @ (columns.conj().T @ r)
    else:
        r = v.copy()
    residual_norm = float(np.linalg.norm(r))
    if residual_norm < DEGENERACY_RTOL * vnorm or residual_norm == 0.0:
        raise DegenerateDirectionError(
            f"residual norm {residual_norm:.3e} below {DEGENERACY_RTOL:.0e} * ||v||"
        )
    return r, residual_norm


def gram_schmidt_append(
    basis: OrthonormalBasis, v
) -> tuple[OrthonormalBasis, float]:
    """Orthonormalize ``v`` against ``basis`` and append the result.

    Returns the extended basis and the pre-normalization residual norm.
    See ``orthogonalize_against`` for the algorithm and the degeneracy
    error contract.
    """
    v = _as_complex_vector(v)
    if v.shape[0] != basis.m:
        raise DimensionMismatchError(
            f"length mismatch: basis lives in C^{basis.m}, v has {v.shape[0]} entries"
        )
    if basis.count >= basis.m:
        raise DimensionMismatchError(f"basis of C^{basis.m} is already full")
    r, residual_norm = orthogonalize_against(basis.columns, v)
    new_col = r / residual_norm
    return OrthonormalBasis(np.column_stack([basis.columns, new_col])), residual_norm


def orthonormalize_columns(A) -> OrthonormalBasis:
    """Orthonormal basis of the column span of ``A`` (m x n, m >= n).

    Householder QR with the diagonal of R rotated to be real positive,
    which makes the result the unique Gram-factor basis: already-orthonormal
    input is reproduced unchanged, and the output matches classical
    Gram-Schmidt applied column by column.

    Raises
    ------
    SingularInstanceError
        If a diagonal entry of R falls below ``DEGENERACY_RTOL`` times the
        corresponding column norm (rank deficiency).
    """
    A = np.asarray(A, dtype=np.complex128)
    if A.ndim != 2:
        raise DimensionMismatchError("A must be an (m, n) matrix")
    m, n = A.shape
    if not 1 <= n <= m:
        raise DimensionMismatchError(f"need 1 <= n <= m, got shape {A.shape}")
    q, r = np.linalg.qr(A)
    diag = np.diagonal(r)
    col_norms = np.linalg.norm(A, axis=0)
    if np.any(np.abs(diag) < DEGENERACY_RTOL * np.maximum(col_norms, 1.0)):
        raise SingularInstanceError("columns are numerically rank deficient")
    # Rotate each column so the implicit R factor has positive diagonal.
    phases = diag / np.abs(diag)
    return OrthonormalBasis(q * phases[np.newaxis, :])
