"""Raw pseudoinverse iteration vs the reduced normalized form, and
invariance of the iteration under right-multiplication of the sensing
matrix by an invertible matrix."""

import numpy as np

from phasemin.altmin import step_normalized, step_raw
from phasemin.core import orthonormalize_columns
from phasemin.sensing import SensingInstance, spawn_seed

from conftest import cn


def raw_model(seed, n, m):
    """Matched raw/reduced pair: Gaussian A with truth z_raw, plus the
    reduced instance on the orthonormalized basis with rescaled truth."""
    rng = np.random.default_rng(seed)
    A = cn(rng, m, n)
    z_raw = cn(rng, n)
    z_raw /= np.linalg.norm(z_raw)
    y_raw = np.abs(A @ z_raw)
    basis = orthonormalize_columns(A)
    z_red = basis.columns.conj().T @ (A @ z_raw)
    z_red /= np.linalg.norm(z_red)
    inst = SensingInstance(
        n=n, m=m, z=z_red, basis=basis, y=np.abs(basis.columns @ z_red), seed=seed
    )
    w1 = basis.columns @ (lambda g: g / np.linalg.norm(g))(cn(rng, n))
    return A, z_raw, y_raw, inst, w1


def well_conditioned_invertible(rng, n):
    """Random n x n matrix with singular values in [0.5, 2]."""
    u = orthonormalize_columns(cn(rng, n, n)).columns
    v = orthonormalize_columns(cn(rng, n, n)).columns
    s = rng.uniform(0.5, 2.0, n)
    return (u * s) @ v.conj().T


class TestRawNormalizedEquivalence:
    def test_single_step_direction(self):
        for t in range(5):
            A, _, y_raw, inst, w1 = raw_model(spawn_seed(71, t), 8, 64)
            x_raw = np.linalg.lstsq(A, w1, rcond=None)[0]
            w_raw = A @ step_raw(A, y_raw, x_raw)
            w_norm = step_normalized(inst, w1)
            assert np.linalg.norm(w_raw / np.linalg.norm(w_raw) - w_norm) <= 1e-8

    def test_full_trajectory(self):
        # 20 instances, 20 iterations; m <= 128
        for t in range(20):
            n, m = (8, 64) if t % 2 else (16, 128)
            A, _, y_raw, inst, w1 = raw_model(spawn_seed(73, t), n, m)
            x_raw = np.linalg.lstsq(A, w1, rcond=None)[0]
            w_norm = w1
            for _ in range(20):
                x_raw = step_raw(A, y_raw, x_raw)
                w_raw = A @ x_raw
                w_norm = step_normalized(inst, w_norm)
                assert (
                    np.linalg.norm(w_raw / np.linalg.norm(w_raw) - w_norm) <= 1e-6
                )


class TestRightFactorInvariance:
    def test_w_sequence_unchanged(self, rng):
        # A -> A D, z -> D^-1 z, x1 -> D^-1 x1 leaves w^(k) = A x^(k)
        # unchanged along the whole trajectory
        for t in range(20):
            n, m = 8, 64
            A, _, y_raw, _, w1 = raw_model(spawn_seed(79, t), n, m)
            D = well_conditioned_invertible(rng, n)
            AD = A @ D
            x = np.linalg.lstsq(A, w1, rcond=None)[0]
            x_tilde = np.linalg.solve(D, x)
            for _ in range(20):
                x = step_raw(A, y_raw, x)
                x_tilde = step_raw(AD, y_raw, x_tilde)
                w = A @ x
                w_tilde = AD @ x_tilde
                assert np.linalg.norm(w - w_tilde) <= 1e-8 * np.linalg.norm(w)
                assert np.linalg.norm(x - D @ x_tilde) <= 1e-8 * np.linalg.norm(x)
