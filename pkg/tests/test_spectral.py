import numpy as np
import pytest

from leadfollow import (
    SymmetryError,
    eigenvalues_sym,
    is_positive_definite,
    schur_positive_definite,
    spectral_bounds,
)
from leadfollow.certificate import decay_witness_matrix
from leadfollow.gains import Gains
from leadfollow.topology import Topology
from reference import charpoly_eigenvalues, cofactor_determinant

H1 = np.array([[3, -1, -1, 0], [-1, 2, 0, -1], [-1, 0, 1, 0], [0, -1, 0, 1]], dtype=float)
H2 = np.array([[2, -1, 0, 0], [-1, 1, 0, 0], [0, 0, 2, -1], [0, 0, -1, 1]], dtype=float)
L1 = H1 - np.diag([1.0, 0, 0, 0])


def random_sym(rng, n, scale=1.0):
    a = rng.normal(size=(n, n)) * scale
    return (a + a.T) / 2.0


class TestEigenvalues:
    def test_identity(self):
        np.testing.assert_array_equal(eigenvalues_sym(np.eye(3)), np.ones(3))

    def test_two_by_two_exact(self):
        vals = eigenvalues_sym(np.array([[2.0, -1.0], [-1.0, 2.0]]))
        np.testing.assert_allclose(vals, [1.0, 3.0], atol=1e-14)

    def test_benchmark_coupling_matrix_vs_charpoly_oracle(self):
        oracle = charpoly_eigenvalues(H1)
        vals = eigenvalues_sym(H1)
        assert len(oracle) == 4
        np.testing.assert_allclose(vals, oracle, rtol=0, atol=1e-10)
        assert vals[0] > 0

    def test_double_eigenvalues_closed_form(self):
        # blocks [[2,-1],[-1,1]] twice: eigenvalues (3 +- sqrt(5))/2, each twice
        lo = (3 - np.sqrt(5)) / 2
        hi = (3 + np.sqrt(5)) / 2
        np.testing.assert_allclose(eigenvalues_sym(H2), [lo, lo, hi, hi], atol=1e-12)

    def test_eigenpair_residuals(self):
        rng = np.random.default_rng(21)
        for _ in range(30):
            n = int(rng.integers(2, 10))
            m = random_sym(rng, n, scale=rng.uniform(0.1, 100))
            vals, vecs = eigenvalues_sym(m, with_vectors=True)
            norm = np.linalg.norm(m)
            for j in range(n):
                res = np.linalg.norm(m @ vecs[:, j] - vals[j] * vecs[:, j])
                assert res <= 1e-10 * max(norm, 1e-30)

    def test_trace_identity_on_random_instances(self):
        rng = np.random.default_rng(22)
        for _ in range(200):
            n = int(rng.integers(2, 9))
            m = random_sym(rng, n, scale=rng.uniform(0.1, 50))
            vals = eigenvalues_sym(m)
            assert abs(vals.sum() - np.trace(m)) <= 1e-9 * max(np.linalg.norm(m), 1e-30)

    def test_determinant_identity_small_orders(self):
        rng = np.random.default_rng(23)
        for _ in range(200):
            n = int(rng.integers(2, 5))
            m = random_sym(rng, n)
            det = cofactor_determinant(m)
            prod = float(np.prod(eigenvalues_sym(m)))
            assert abs(prod - det) <= 1e-9 * max(abs(det), 1e-12)

    def test_invariant_under_agent_relabeling(self):
        rng = np.random.default_rng(24)
        for _ in range(20):
            n = int(rng.integers(2, 8))
            m = random_sym(rng, n)
            perm = np.eye(n)[rng.permutation(n)]
            before = eigenvalues_sym(m)
            after = eigenvalues_sym(perm @ m @ perm.T)
            np.testing.assert_allclose(
                after, before, rtol=0, atol=1e-10 * max(np.linalg.norm(m), 1.0)
            )

    def test_rejects_asymmetric_input(self):
        with pytest.raises(SymmetryError):
            eigenvalues_sym(np.array([[1.0, 2.0], [0.0, 1.0]]))

    def test_zero_matrix(self):
        np.testing.assert_array_equal(eigenvalues_sym(np.zeros((4, 4))), np.zeros(4))


class TestPositiveDefinite:
    def test_benchmark_coupling_matrices(self):
        assert is_positive_definite(H1, 1e-9)
        assert is_positive_definite(H2, 1e-9)

    def test_laplacian_alone_is_not(self):
        # the all-ones vector is in the null space
        assert not is_positive_definite(L1, 1e-9)

    def test_tolerance_is_absolute_on_min_eigenvalue(self):
        m = np.diag([1e-8, 1.0])
        assert is_positive_definite(m, 1e-9)
        assert not is_positive_definite(m, 1e-7)

    def test_negative_tolerance_rejected(self):
        with pytest.raises(ValueError):
            is_positive_definite(np.eye(2), -1.0)


def assemble(a, e, c):
    return np.block([[a, e], [e.T, c]])


class TestSchurCriterion:
    def test_hand_computed_positive_case(self):
        a, e, c = np.array([[2.0]]), np.array([[1.0]]), np.array([[1.0]])
        assert schur_positive_definite(a, e, c)  # complement 1 - 1/2 = 0.5
        assert is_positive_definite(assemble(a, e, c))

    def test_hand_computed_negative_case(self):
        a, e, c = np.array([[1.0]]), np.array([[2.0]]), np.array([[1.0]])
        assert not schur_positive_definite(a, e, c)  # complement 1 - 4 = -3

    def test_benchmark_witness_blocks(self):
        g = Gains(l=40.0, k=200.0)
        topo = Topology(
            n=4,
            weights=np.array(
                [[0, 1, 1, 0], [1, 0, 0, 1], [1, 0, 0, 0], [0, 1, 0, 0]], dtype=float
            ),
            leader_weights=np.array([1.0, 0, 0, 0]),
        )
        w = decay_witness_matrix(topo, g)
        n = 4
        a, e, c = w[:n, :n], w[:n, n:], w[n:, n:]
        assert schur_positive_definite(a, e, c)
        assert is_positive_definite(w)  # direct eigenvalues of the assembly

    def test_agrees_with_direct_test_on_random_instances(self):
        rng = np.random.default_rng(25)
        agree = 0
        for _ in range(200):
            na = int(rng.integers(1, 5))
            nc = int(rng.integers(1, 5))
            d = random_sym(rng, na + nc) + np.eye(na + nc) * rng.uniform(-1, 3)
            a, e, c = d[:na, :na], d[:na, na:], d[na:, na:]
            assert schur_positive_definite(a, e, c) == is_positive_definite(d)
            agree += 1
        assert agree == 200

    def test_singular_a_returns_false(self):
        a = np.zeros((2, 2))
        e = np.zeros((2, 2))
        c = np.eye(2)
        assert not schur_positive_definite(a, e, c)

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ValueError, match="conform"):
            schur_positive_definite(np.eye(2), np.ones((3, 2)), np.eye(2))


class TestSpectralBounds:
    def test_identity_family(self):
        assert spectral_bounds([np.eye(2)]) == (1.0, 1.0)

    def test_two_member_family(self):
        fam = [np.array([[2.0, -1.0], [-1.0, 2.0]]), np.diag([3.0, 1.0])]
        lo, hi = spectral_bounds(fam)
        np.testing.assert_allclose([lo, hi], [1.0, 3.0], atol=1e-12)

    def test_benchmark_family_against_oracle(self):
        lo, hi = spectral_bounds([H1, H2])
        oracle_h1 = charpoly_eigenvalues(H1)
        lo_expect = min(oracle_h1[0], (3 - np.sqrt(5)) / 2)
        hi_expect = max(oracle_h1[-1], (3 + np.sqrt(5)) / 2)
        np.testing.assert_allclose([lo, hi], [lo_expect, hi_expect], atol=1e-10)
        assert lo > 0

    def test_non_definite_member_reported_with_index(self):
        with pytest.raises(ValueError, match="member 1"):
            spectral_bounds([H1, L1])

    def test_empty_family_rejected(self):
        with pytest.raises(ValueError):
            spectral_bounds([])
