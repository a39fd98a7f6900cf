# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled solve kernels.

Mirrors ``_kernels_py`` exactly (same update ordering, same stop codes);
the hot per-iteration work is two BLAS zgemv calls plus fused elementwise
loops, which removes the Python dispatch overhead that dominates at the
small/medium problem sizes this package targets.
"""

import numpy as np

from libc.math cimport sqrt
from scipy.linalg.cython_blas cimport zgemv

ZERO_PROJECTION_TOL = 1e-12

cdef double _ZERO_TOL = 1e-12


cdef inline void _hermitian_gemv(const double complex* A, int m, int n, int lda,
                                 const double complex* x, double complex* out) noexcept nogil:
    # out = A^H x  (A is column-major m x n)
    cdef char trans = b'C'
    cdef double complex one = 1.0
    cdef double complex zero = 0.0
    cdef int inc = 1
    zgemv(&trans, &m, &n, &one, <double complex*> A, &lda,
          <double complex*> x, &inc, &zero, out, &inc)


cdef inline void _plain_gemv(const double complex* A, int m, int n, int lda,
                             const double complex* x, double complex* out) noexcept nogil:
    # out = A x
    cdef char trans = b'N'
    cdef double complex one = 1.0
    cdef double complex zero = 0.0
    cdef int inc = 1
    zgemv(&trans, &m, &n, &one, <double complex*> A, &lda,
          <double complex*> x, &inc, &zero, out, &inc)


cdef inline void _modulus_align(const double complex[::1] w, const double[::1] y,
                                double complex[::1] s, int m) noexcept nogil:
    # s_i = phase(w_i) * |y_i|, with phase(0) = 1
    cdef int i
    cdef double a, yi
    for i in range(m):
        a = abs(w[i])
        yi = y[i] if y[i] >= 0.0 else -y[i]
        if a > 0.0:
            s[i] = w[i] / a * yi
        else:
            s[i] = yi


cdef inline double _norm2sq(const double complex[::1] v, int n) noexcept nogil:
    cdef int i
    cdef double acc = 0.0
    for i in range(n):
        acc += v[i].real * v[i].real + v[i].imag * v[i].imag
    return acc


cdef inline double complex _vdot(const double complex[::1] a, const double complex[::1] b,
                                 int n) noexcept nogil:
    # sum conj(a_i) b_i
    cdef int i
    cdef double re = 0.0, im = 0.0
    for i in range(n):
        re += a[i].real * b[i].real + a[i].imag * b[i].imag
        im += a[i].real * b[i].imag - a[i].imag * b[i].real
    return re + 1j * im


cdef inline double _aligned_dist(const double complex[::1] x, const double complex[::1] z,
                                 double complex ip, double cor, int n) noexcept nogil:
    # || x * conj(ip)/cor - z ||, the phase-aligned difference; exact near
    # zero where the expanded closed form cancels catastrophically
    cdef int i
    cdef double complex ph, d
    cdef double acc = 0.0
    if cor == 0.0:
        return sqrt(_norm2sq(x, n) + 1.0)
    ph = ip.conjugate() / cor
    for i in range(n):
        d = x[i] * ph - z[i]
        acc += d.real * d.real + d.imag * d.imag
    return sqrt(acc)


def step(const double complex[::1, :] Q, const double[::1] y,
         const double complex[::1] w):
    """One normalized step; see ``_kernels_py.step`` for the contract."""
    cdef int m = Q.shape[0]
    cdef int n = Q.shape[1]
    s_arr = np.empty(m, dtype=np.complex128)
    t_arr = np.empty(n, dtype=np.complex128)
    cdef double complex[::1] s = s_arr
    cdef double complex[::1] t = t_arr
    cdef int j
    cdef double nt
    _modulus_align(w, y, s, m)
    _hermitian_gemv(&Q[0, 0], m, n, m, &s[0], &t[0])
    nt = sqrt(_norm2sq(t, n))
    if nt < _ZERO_TOL:
        return None, None, nt
    for j in range(n):
        t[j] = t[j] / nt
    w_arr = np.empty(m, dtype=np.complex128)
    cdef double complex[::1] wn = w_arr
    _plain_gemv(&Q[0, 0], m, n, m, &t[0], &wn[0])
    return w_arr, t_arr, nt


def solve_loop(const double complex[::1, :] Q, const double[::1] y,
               const double complex[::1] z, const double complex[::1] w1,
               double tol, int max_iter, int stall_window):
    """Iterate from ``w1``; see ``_kernels_py.solve_loop`` for the contract."""
    cdef int m = Q.shape[0]
    cdef int n = Q.shape[1]
    w_arr = np.empty(m, dtype=np.complex128)
    s_arr = np.empty(m, dtype=np.complex128)
    x_arr = np.empty(n, dtype=np.complex128)
    t_arr = np.empty(n, dtype=np.complex128)
    cors_arr = np.empty(max_iter)
    errs_arr = np.empty(max_iter)
    cdef double complex[::1] w = w_arr
    cdef double complex[::1] s = s_arr
    cdef double complex[::1] x = x_arr
    cdef double complex[::1] t = t_arr
    cdef double[::1] cors = cors_arr
    cdef double[::1] errs = errs_arr
    cdef int i, j, k = 0, code = 1, since_improvement = 0
    cdef double cor, err, nt, best = np.inf
    cdef double complex ip

    for i in range(m):
        w[i] = w1[i]
    _hermitian_gemv(&Q[0, 0], m, n, m, &w[0], &x[0])

    while k < max_iter:
        k += 1
        ip = _vdot(z, x, n)
        cor = abs(ip)
        err = _aligned_dist(x, z, ip, cor, n)
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
        _modulus_align(w, y, s, m)
        _hermitian_gemv(&Q[0, 0], m, n, m, &s[0], &t[0])
        nt = sqrt(_norm2sq(t, n))
        if nt < _ZERO_TOL:
            code = 3
            break
        for j in range(n):
            x[j] = t[j] / nt
        _plain_gemv(&Q[0, 0], m, n, m, &x[0], &w[0])

    return w_arr, cors_arr[:k], errs_arr[:k], k, code
