"""Pure-numpy solve kernels (fallback backend).

The compiled backend in ``_ext.pyx`` implements the same two entry points
with identical update ordering; ``_backend`` picks whichever is available.

The per-iteration recurrence exploits that the basis columns Q are
orthonormal: with ``t = Q^H (phase(w) * y)`` the next iterate is
``w' = Q (t/||t||)`` and its reduced coordinates are ``x' = t/||t||``
directly, so each iteration costs two m x n BLAS products.

Stop codes returned by ``solve_loop``:
    0 converged, 1 max_iter, 2 stalled, 3 zero-projection.
"""

from __future__ import annotations

import numpy as np

ZERO_PROJECTION_TOL = 1e-12


def step(Q: np.ndarray, y: np.ndarray, w: np.ndarray):
    """One normalized alternating-projection step.

    Returns ``(w_next, x_next, proj_norm)`` where ``proj_norm`` is
    ``||P_L[w (*) y]||``. If ``proj_norm < ZERO_PROJECTION_TOL`` the step is
    undefined and ``(None, None, proj_norm)`` is returned.
    """
    a = np.abs(w)
    s = np.where(a > 0.0, w / np.where(a == 0.0, 1.0, a), 1.0 + 0.0j) * y
    t = Q.conj().T @ s
    nt = float(np.linalg.norm(t))
    if nt < ZERO_PROJECTION_TOL:
        return None, None, nt
    x = t / nt
    return Q @ x, x, nt


def solve_loop(
    Q: np.ndarray,
    y: np.ndarray,
    z: np.ndarray,
    w1: np.ndarray,
    tol: float,
    max_iter: int,
    stall_window: int,
):
    """Iterate the normalized step from ``w1`` until convergence.

    Records, for each visited iterate w^(k), the correlation
    ``|<u0, w^(k)>| = |<z, x^(k)>|`` and the phase-invariant error,
    evaluated as the norm of the phase-aligned difference (exact near
    zero, unlike the expanded closed form).

    Returns ``(w, cors, errs, iterations, code)``.
    """
    w = np.array(w1, dtype=np.complex128)
    cors = np.empty(max_iter)
    errs = np.empty(max_iter)
    x = Q.conj().T @ w
    best = np.inf
    since_improvement = 0
    k = 0
    code = 1  # max_iter unless something else happens
    while k < max_iter:
        k += 1
        ip = np.vdot(z, x)
        cor = float(abs(ip))
        if cor == 0.0:
            err = float(np.sqrt(np.vdot(x, x).real + 1.0))
        else:
            err = float(np.linalg.norm(x * (np.conj(ip) / cor) - z))
        cors[k - 1] = cor
        errs[k - 1] = err
        if err <= tol:
            code = 0
            break
        if err < best:
            best = err
            since_improvement = 0
        else:
            since_improvement += 1
            if stall_window and since_improvement >= stall_window:
                code = 2
                break
        if k == max_iter:
            break
        w_next, x_next, nt = step(Q, y, w)
        if w_next is None:
            code = 3
            break
        w, x = w_next, x_next
    return w, cors[:k], errs[:k], k, code
