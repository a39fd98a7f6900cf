"""Complex primitives: phases, the modulus-alignment product, projections,
and Gram-Schmidt."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phasemin.core import (
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

from conftest import cn


def basis_of(*cols):
    return OrthonormalBasis(np.column_stack([np.asarray(c, dtype=complex) for c in cols]))


E1 = np.array([1.0, 0.0, 0.0], dtype=complex)
E2 = np.array([0.0, 1.0, 0.0], dtype=complex)


class TestPhaseVec:
    def test_direct_division(self):
        out = phase_vec(np.array([3.0 + 4.0j]))
        assert out[0] == pytest.approx(0.6 + 0.8j, abs=1e-15)

    def test_zero_convention(self):
        assert phase_vec(np.array([0.0 + 0.0j]))[0] == 1.0 + 0.0j

    def test_negative_real_axis(self):
        assert phase_vec(np.array([-2.0 + 0.0j]))[0] == pytest.approx(-1.0 + 0.0j)

    @settings(max_examples=200, derandomize=True)
    @given(st.lists(st.complex_numbers(max_magnitude=1e8, allow_nan=False), min_size=1, max_size=16))
    def test_unit_circle_and_reconstruction(self, entries):
        v = np.array(entries, dtype=complex)
        ph = phase_vec(v)
        assert np.all(np.abs(np.abs(ph) - 1.0) <= 1e-14)
        nz = np.abs(v) > 0
        assert np.allclose(ph[nz] * np.abs(v[nz]), v[nz], rtol=1e-12, atol=0)


class TestOdot:
    def test_unit_phases_scaled(self):
        out = odot(np.array([1j, 1.0 + 0j]), np.array([2.0, 3.0]))
        assert np.allclose(out, [2j, 3.0], atol=1e-15)

    def test_zero_phase_convention(self):
        out = odot(np.array([0.0 + 0j, 1.0 + 0j]), np.array([5.0, 0.0]))
        assert np.allclose(out, [5.0, 0.0], atol=0)

    def test_hand_computed_phase(self):
        # phase(1+i) = e^{i pi/4}; scaled back by sqrt(2) it reproduces 1+i
        out = odot(np.array([1.0 + 1.0j, -1.0 + 0j]), np.array([np.sqrt(2.0), 1.0]))
        assert np.allclose(out, [1.0 + 1.0j, -1.0 + 0j], atol=1e-15)

    def test_length_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            odot(np.array([1j]), np.array([1.0, 2.0]))

    def test_modulus_preservation(self, rng):
        w = cn(rng, 256)
        y = rng.standard_normal(256)
        out = odot(w, y)
        assert np.allclose(np.abs(out), np.abs(y), rtol=1e-15, atol=0)


class TestProject:
    def test_coordinate_projection(self):
        out = project(basis_of(E1, E2), np.array([3.0, 4.0j, 5.0]))
        assert np.allclose(out, [3.0, 4.0j, 0.0], atol=1e-15)

    def test_vector_in_span_unchanged(self, rng):
        basis = orthonormalize_columns(cn(rng, 16, 4))
        v = basis.columns @ cn(rng, 4)
        assert np.linalg.norm(project(basis, v) - v) <= 1e-12 * np.linalg.norm(v)

    def test_idempotence_and_contraction(self, rng):
        for _ in range(1000):
            basis = orthonormalize_columns(cn(rng, 12, 3))
            v = cn(rng, 12)
            pv = project(basis, v)
            assert np.linalg.norm(project(basis, pv) - pv) <= 1e-10 * np.linalg.norm(v)
            assert np.linalg.norm(pv) <= np.linalg.norm(v) + 1e-12

    def test_empty_basis(self):
        out = project(OrthonormalBasis.empty(3), np.array([1.0, 2.0, 3.0], dtype=complex))
        assert np.all(out == 0)


class TestGramSchmidtAppend:
    def test_already_orthogonal(self):
        ext, rn = gram_schmidt_append(basis_of(E1), E2)
        assert rn == pytest.approx(1.0)
        assert np.allclose(ext.columns[:, 1], E2, atol=1e-15)

    def test_in_span_degenerates(self):
        with pytest.raises(DegenerateDirectionError):
            gram_schmidt_append(basis_of(E1), E1)

    def test_hand_gram_schmidt(self):
        v = np.array([1.0, 1.0, 0.0], dtype=complex) / np.sqrt(2.0)
        ext, rn = gram_schmidt_append(basis_of(E1), v)
        assert rn == pytest.approx(1.0 / np.sqrt(2.0), rel=1e-12)
        assert np.allclose(ext.columns[:, 1], E2, atol=1e-12)

    def test_repeated_appends_stay_orthonormal(self, rng):
        basis = OrthonormalBasis.empty(64)
        for _ in range(32):
            basis, _ = gram_schmidt_append(basis, cn(rng, 64))
        assert basis.orthonormality_defect() <= 1e-13

    def test_full_basis_rejected(self, rng):
        basis = orthonormalize_columns(cn(rng, 3, 3))
        with pytest.raises(DimensionMismatchError):
            gram_schmidt_append(basis, cn(rng, 3))


class TestOrthonormalizeColumns:
    def test_idempotence(self, rng):
        q0 = orthonormalize_columns(cn(rng, 16, 5))
        q1 = orthonormalize_columns(q0.columns)
        assert np.max(np.abs(q1.columns - q0.columns)) <= 1e-12

    def test_scaling_removed(self):
        q = orthonormalize_columns(2.0 * E1[:, np.newaxis])
        assert np.allclose(q.columns[:, 0], E1, atol=1e-15)

    def test_small_random_orthonormal(self, rng):
        q = orthonormalize_columns(cn(rng, 8, 3))
        gram = q.columns.conj().T @ q.columns
        assert np.max(np.abs(gram - np.eye(3))) <= 1e-12

    def test_large_random_orthonormal(self, rng):
        q = orthonormalize_columns(cn(rng, 512, 64))
        assert q.orthonormality_defect() <= 1e-10

    def test_rank_deficient(self, rng):
        a = cn(rng, 8, 2)
        bad = np.column_stack([a, a[:, 0]])
        with pytest.raises(SingularInstanceError):
            orthonormalize_columns(bad)

    def test_matches_gram_schmidt_chain(self, rng):
        # Both construct the unique positive-diagonal Gram-factor basis.
        a = cn(rng, 24, 6)
        q = orthonormalize_columns(a)
        chain = OrthonormalBasis.empty(24)
        for j in range(6):
            chain, _ = gram_schmidt_append(chain, a[:, j])
        assert np.max(np.abs(q.columns - chain.columns)) <= 1e-10


class TestOrthonormalBasis:
    def test_immutable(self, rng):
        basis = orthonormalize_columns(cn(rng, 6, 2))
        with pytest.raises(ValueError):
            basis.columns[0, 0] = 0.0

    def test_too_many_columns(self):
        with pytest.raises(DimensionMismatchError):
            OrthonormalBasis(np.eye(2, 3, dtype=complex))
