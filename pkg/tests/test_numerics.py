import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from anticanon.errors import RankDeficientBasis
from anticanon.numerics import (
    TolerancePolicy,
    cluster_values,
    eig,
    frobenius_norm,
    kernel_basis,
    kernel_gap,
    principal_sqrt,
    restrict,
)

from conftest import random_diagonalizable

TOL = TolerancePolicy()


def test_frobenius_examples():
    assert frobenius_norm(np.zeros((2, 2))) == 0
    assert frobenius_norm(np.eye(2)) == pytest.approx(math.sqrt(2), abs=0)
    assert frobenius_norm([[3, 4], [0, 0]]) == 5.0


def test_policy_validation():
    with pytest.raises(ValueError):
        TolerancePolicy(rel_zero=1e-6, eig_cluster=1e-8)
    with pytest.raises(ValueError):
        TolerancePolicy(scale=0.0)
    p = TolerancePolicy.from_rel_zero(1e-10)
    assert p.eig_cluster == pytest.approx(1e-8)
    assert TolerancePolicy().for_ops([np.zeros((2, 2))]).scale == 1.0


class TestEig:
    def test_identity(self):
        values, vectors, ok = eig(np.eye(3), TOL)
        assert ok
        assert np.allclose(values, 1)
        assert abs(np.linalg.det(vectors)) > 0.5

    def test_swap_matrix(self):
        # characteristic polynomial t^2 - 1
        res = eig([[0, 1], [1, 0]], TOL)
        assert res.ok
        assert sorted(res.values.real) == pytest.approx([-1, 1])

    def test_jordan_block_rejected(self):
        assert not eig([[0, 1], [0, 0]], TOL).ok

    def test_clusters_use_mean(self):
        m = np.diag([1.0, 1.0 + 1e-9, 2.0])
        res = eig(m, TOL)
        assert res.ok
        assert len(res.clusters) == 2
        rep, cols = res.clusters[0]
        assert len(cols) == 2 and rep == pytest.approx(1 + 5e-10, abs=1e-15)

    @settings(max_examples=60, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 12))
    def test_round_trip(self, seed, n):
        rng = np.random.default_rng(seed)
        m, _, _ = random_diagonalizable(rng, n, cond=float(rng.uniform(1, 100)))
        tol = TOL.for_ops([m])
        values, vectors, ok = eig(m, tol)
        assert ok
        assert np.allclose(np.linalg.norm(vectors, axis=0), 1)
        resid = frobenius_norm(m @ vectors - vectors * values[None, :])
        assert resid <= tol.rel_zero * tol.scale * n

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_scrambled_nilpotent_rejected(self, seed):
        rng = np.random.default_rng(seed)
        J = np.zeros((4, 4))
        J[0, 1] = 1.0
        J[2, 2] = 2.0
        from anticanon.oracle import random_conjugator

        S = random_conjugator(4, 50.0, rng)
        m = np.linalg.solve(S, J @ S)
        tol = TOL.for_ops([m])
        assert not eig(m, tol).ok
        assert kernel_gap(m, tol) == 1


class TestKernel:
    def test_identity_empty(self):
        assert kernel_basis(np.eye(3), TOL).shape == (3, 0)

    def test_zero_full(self):
        assert kernel_basis(np.zeros((3, 3)), TOL).shape == (3, 3)

    def test_diag(self):
        k = kernel_basis(np.diag([1.0, 0.0, 2.0]), TOL)
        assert k.shape == (3, 1)
        assert abs(abs(k[1, 0]) - 1) < 1e-15

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 10), r=st.integers(0, 9))
    def test_annihilated(self, seed, n, r):
        rng = np.random.default_rng(seed)
        r = min(r, n)
        m = rng.standard_normal((n, r)) @ rng.standard_normal((r, n))
        tol = TOL.for_ops([m])
        k = kernel_basis(m, tol)
        assert k.shape[1] == n - r
        assert frobenius_norm(m @ k) <= tol.rel_zero * tol.scale * n


class TestRestrict:
    def test_invariant_subspace(self):
        r, leak = restrict(np.diag([1.0, 2.0, 3.0]), np.eye(3)[:, :2], TOL)
        assert np.allclose(r, np.diag([1, 2]))
        assert leak < 1e-15

    def test_not_invariant(self):
        # M e1 = e2, so R = 0 and the defect is |e2| / (||M||_2 + 1) = 1/2
        r, leak = restrict([[0, 1], [1, 0]], [[1], [0]], TOL)
        assert np.allclose(r, 0)
        assert leak == pytest.approx(0.5)

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 8))
    def test_full_identity_is_exact(self, seed, n):
        m = np.random.default_rng(seed).standard_normal((n, n)).astype(complex)
        r, leak = restrict(m, np.eye(n), TOL)
        assert np.array_equal(r, m) and leak == 0.0

    def test_rank_deficient(self):
        with pytest.raises(RankDeficientBasis):
            restrict(np.eye(3), np.array([[1, 1], [0, 0], [0, 0]]), TOL)


def test_principal_sqrt():
    assert principal_sqrt(4) == 2
    assert principal_sqrt(-4) == 2j
    assert principal_sqrt(complex(-4, -0.0)) == 2j
    z = principal_sqrt(-1 + 3j)
    assert z * z == pytest.approx(-1 + 3j)
    assert -math.pi / 2 < np.angle(z) <= math.pi / 2


def test_cluster_single_linkage():
    # chain 0 - 0.6 - 1.2 links with radius 0.7 even though ends are 1.2 apart
    groups = cluster_values([0, 1.2, 5, 0.6], 0.7)
    assert groups == [[0, 1, 3], [2]]
