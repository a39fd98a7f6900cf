"""The alternating-minimization iteration, error metrics, and solve loop.

Two forms of the iteration exist:

* ``step_normalized`` - the reduced, unit-normalized form used by all
  experiments: ``w' = P_L[w (*) y] / ||P_L[w (*) y]||`` on an instance that
  carries an orthonormal basis of L.
* ``step_raw`` - the textbook form on an explicit sensing matrix A with
  pseudoinverse solves. It exists solely so the equivalence of the two
  forms (and the invariance of the iteration under right-multiplication
  of A by an invertible matrix) can be tested directly.

Error metric: ``dist_up_to_phase``, the exact infimum over a global phase,
since measurements determine the signal only up to ``e^{i psi}``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ._backend import kernels
from .core import DimensionMismatchError, SingularInstanceError, odot
from .sensing import SensingInstance

__all__ = [
    "StalledAtZeroError",
    "SolveConfig",
    "SolveReport",
    "step_normalized",
    "step_raw",
    "dist_up_to_phase",
    "solve",
]

#: Stop reasons carried by SolveReport.
STOP_REASONS = ("converged", "max_iter", "stalled", "zero_projection")


class StalledAtZeroError(RuntimeError):
    """The projected iterate vanished (measure-zero event); surfaced, never
    silently perturbed."""


@dataclass(frozen=True)
class SolveConfig:
    """Stopping policy for ``solve``.

    ``tol`` is on the phase-invariant error (ground truth has unit norm).
    ``stall_window``: stop with reason "stalled" after this many
    consecutive iterations without error improvement (0 disables).
    """

    tol: float = 1e-7
    max_iter: int = 10_000
    stall_window: int = 500

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.stall_window < 0:
            raise ValueError("stall_window must be >= 0")


@dataclass(frozen=True)
class SolveReport:
    """Outcome of one solve: success flag, final phase-invariant error,
    iteration count, per-iteration correlation trace, and stop reason."""

    success: bool
    final_error: float
    iterations: int
    stop_reason: str
    correlation_trace: np.ndarray = field(repr=False)
    error_trace: np.ndarray = field(repr=False)

    def to_dict(self) -> dict:
        return {
            "success": bool(self.success),
            "final_error": float(self.final_error),
            "iterations": int(self.iterations),
            "stop_reason": self.stop_reason,
            "correlation_trace": [float(c) for c in self.correlation_trace],
            "error_trace": [float(e) for e in self.error_trace],
        }


def step_normalized(inst: SensingInstance, w: np.ndarray) -> np.ndarray:
    """One normalized step: ``P_L[w (*) y]`` rescaled to unit norm.

    The output lies in L with unit norm. Raises ``StalledAtZeroError`` if
    the projection norm falls below 1e-12.
    """
    w = np.ascontiguousarray(w, dtype=np.complex128)
    if w.shape != (inst.m,):
        raise DimensionMismatchError(f"w must have shape ({inst.m},)")
    w_next, _, nt = kernels.step(inst.basis.columns, inst.y, w)
    if w_next is None:
        raise StalledAtZeroError(f"projected iterate has norm {nt:.3e}")
    return w_next


def step_raw(A: np.ndarray, y: np.ndarray, x: np.ndarray) -> np.ndarray:
    """One raw step on an explicit sensing matrix: returns the new estimator.

    ``w+ = A (A^H A)^{-1} A^H [phase(A x) (*) y]`` and the returned value is
    the least-squares solution of ``A x+ = w+`` (so ``w+ = A @ x+``).
    """
    A = np.asarray(A, dtype=np.complex128)
    s = odot(A @ np.asarray(x, dtype=np.complex128), y)
    x_next, _, rank, _ = np.linalg.lstsq(A, s, rcond=None)
    if rank < A.shape[1]:
        raise SingularInstanceError("sensing matrix is numerically rank deficient")
    return x_next


def dist_up_to_phase(x: np.ndarray, z: np.ndarray) -> float:
    """Phase-invariant distance ``inf_psi ||e^{i psi} x - z||``.

    Equals the closed form ``sqrt(||x||^2 + ||z||^2 - 2 |<x, z>|)``, but is
    evaluated as the norm of the phase-aligned difference
    ``x * conj(<z, x>)/|<z, x>| - z``: the expanded form cancels
    catastrophically near zero (it cannot resolve distances below the
    square root of machine epsilon), the aligned difference is exact.
    """
    x = np.asarray(x, dtype=np.complex128)
    z = np.asarray(z, dtype=np.complex128)
    if x.shape != z.shape:
        raise DimensionMismatchError(f"shape mismatch: {x.shape} vs {z.shape}")
    ip = np.vdot(z, x)
    cor = abs(ip)
    if cor == 0.0:
        return float(np.sqrt(np.vdot(x, x).real + np.vdot(z, z).real))
    return float(np.linalg.norm(x * (np.conj(ip) / cor) - z))


_STOP_BY_CODE = {0: "converged", 1: "max_iter", 2: "stalled", 3: "zero_projection"}


def solve(
    inst: SensingInstance,
    w1: np.ndarray,
    cfg: SolveConfig | None = None,
    observer: Callable[[int, np.ndarray], None] | None = None,
) -> SolveReport:
    """Run the normalized iteration from ``w1`` until a stopping rule fires.

    Per iterate w^(k) (including w^(1) before any step) the correlation
    ``|<u0, w^(k)>|`` and the phase-invariant error of the reduced
    estimator ``x^(k) = Q^H w^(k)`` are recorded; convergence means error
    <= tol. ``observer(k, w)`` is invoked on every visited iterate, which
    forces the instrumented (step-at-a-time) path instead of the fused
    kernel loop; both paths implement the same recurrence.

    Raises ``StalledAtZeroError`` if the projected iterate vanishes.
    """
    cfg = cfg or SolveConfig()
    w1 = np.ascontiguousarray(w1, dtype=np.complex128)
    if w1.shape != (inst.m,):
        raise DimensionMismatchError(f"w1 must have shape ({inst.m},)")
    Q = inst.basis.columns
    if observer is None:
        _, cors, errs, k, code = kernels.solve_loop(
            Q, inst.y, inst.z, w1, cfg.tol, cfg.max_iter, cfg.stall_window
        )
    else:
        cors_l: list[float] = []
        errs_l: list[float] = []
        w = w1
        x = Q.conj().T @ w
        best = np.inf
        since = 0
        k = 0
        code = 1
        while k < cfg.max_iter:
            k += 1
            observer(k, w)
            ip = np.vdot(inst.z, x)
            cor = float(abs(ip))
            if cor == 0.0:
                err = float(np.sqrt(np.vdot(x, x).real + 1.0))
            else:
                err = float(np.linalg.norm(x * (np.conj(ip) / cor) - inst.z))
            cors_l.append(cor)
            errs_l.append(err)
            if err <= cfg.tol:
                code = 0
                break
            if err < best:
                best = err
                since = 0
            else:
                since += 1
                if cfg.stall_window and since >= cfg.stall_window:
                    code = 2
                    break
            if k == cfg.max_iter:
                break
            w_next, x_next, _ = kernels.step(Q, inst.y, w)
            if w_next is None:
                code = 3
                break
            w, x = w_next, x_next
        cors = np.asarray(cors_l)
        errs = np.asarray(errs_l)
    if code == 3:
        raise StalledAtZeroError("projected iterate vanished during solve")
    final_error = float(errs[k - 1])
    return SolveReport(
        success=final_error <= cfg.tol,
        final_error=final_error,
        iterations=int(k),
        stop_reason=_STOP_BY_CODE[code],
        correlation_trace=cors,
        error_trace=errs,
    )
