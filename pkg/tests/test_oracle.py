from collections import Counter

import numpy as np
import pytest

from anticanon.decomposition import decompose
from anticanon.errors import InvalidSpec
from anticanon.family import REAL, anticommutation_residual, is_anticommuting
from anticanon.oracle import (
    CLIFFORD,
    DEGENERATE,
    KERNEL,
    SINGLE,
    BlockSpec,
    ExpectedBlock,
    ScrambleSpec,
    Skeleton,
    block_matrices,
    build_family,
    build_worked_example,
    compare_reports,
    corpus,
    scramble,
)


def _range_indices(op):
    """1-based basis positions spanned by the range of a block-diagonal operator."""
    return {i + 1 for i in np.nonzero(np.abs(op).sum(axis=1) > 0)[0]}


class TestBuildFamily:
    def test_pauli_like_pair(self):
        fam, skel = build_family([BlockSpec(CLIFFORD, 2, (0, 1), {0: 1, 1: 1})], 2)
        A, B = fam
        assert np.array_equal(A @ A, np.eye(2)) and np.array_equal(B @ B, np.eye(2))
        assert np.array_equal(A @ B + B @ A, np.zeros((2, 2)))
        assert skel == Skeleton(2, 2, (ExpectedBlock(CLIFFORD, (0, 1), 2, (1, 1)),))

    def test_kernel_only(self):
        fam, skel = build_family([BlockSpec(KERNEL, 3)], 2)
        assert all(not op.any() for op in fam)
        assert skel.dims() == [3]

    def test_constants_realized(self):
        spec = BlockSpec(CLIFFORD, 8, (0, 2, 3), {0: 4, 2: -1, 3: 2 + 1j}, 5)
        mats = block_matrices(spec, 4)
        assert not mats[1].any()
        for a, c in spec.constants.items():
            assert np.allclose(mats[a] @ mats[a], c * np.eye(8), atol=1e-14)

    def test_real_mode_is_real(self):
        fam, _ = build_family([BlockSpec(CLIFFORD, 4, (0, 1, 2), {0: 1, 1: -1, 2: 4}, 0)], 3, REAL)
        assert fam.field_mode == REAL
        assert all(not np.imag(op).any() for op in fam)
        assert is_anticommuting(fam)

    def test_worked_example_ranges(self):
        fam, _ = build_worked_example()
        listed = {
            1: {5, 6, 8, 12, 16, 19},
            2: {3, 7, 9, 11, 13, 15, 17},
            3: {2, 4, 5, 6, 8, 10, 12, 14, 16, 19},
            4: {1, 3, 5, 7, 10, 11, 12, 13, 14, 15, 16, 17, 19, 20},
            5: {2, 4, 5, 6, 8, 10, 12, 14, 16, 19},
        }
        got = {a + 1: _range_indices(op) for a, op in enumerate(fam)}
        for a in (2, 3, 5):
            assert got[a] == listed[a]
        # the listed ranges put X10, X14 under A4 rather than A1; the
        # block structure forces them under A1 (see decisions ledger)
        assert got[1] == listed[1] | {10, 14}
        assert got[4] == listed[4] - {10, 14}


class TestScramble:
    def test_identity(self, pauli_pair):
        out = scramble(pauli_pair, ScrambleSpec(1.0, 0))
        perm = np.random.default_rng(0).permutation(2)
        P = np.eye(2)[:, perm]
        for a, b in zip(pauli_pair, out):
            assert np.array_equal(b, P.T @ a @ P)

    def test_preserves_anticommutation(self, worked_family):
        fam, _ = worked_family
        out = scramble(fam, ScrambleSpec(50.0, 3))
        tol = out.tolerance()
        rounding = np.finfo(float).eps * 50.0**2 * fam.n
        assert anticommutation_residual(out, tol).max() <= 10 * rounding

    def test_permutation_only_round_trip(self, worked_family):
        fam, skel = worked_family
        out = scramble(fam, ScrambleSpec(1.0, 9))
        ok, diff = compare_reports(skel, decompose(out))
        assert ok, diff

    def test_deterministic(self, worked_family):
        fam, _ = worked_family
        s = ScrambleSpec(30.0, 4, 1e-12)
        a, b = scramble(fam, s), scramble(fam, s)
        assert all(np.array_equal(x, y) for x, y in zip(a, b))
        c = scramble(fam, ScrambleSpec(30.0, 5, 1e-12))
        assert not np.array_equal(a[0], c[0])


class TestCompareReports:
    def test_match(self, worked_family):
        fam, skel = worked_family
        assert compare_reports(skel, decompose(fam)) == (True, "")

    def test_altered_dim_detected(self, worked_family):
        fam, skel = worked_family
        blocks = list(skel.blocks)
        b = blocks[-1]
        blocks[-1] = ExpectedBlock(b.kind, b.support, b.dim + 2, b.constants)
        ok, diff = compare_reports(Skeleton(skel.n, skel.N, tuple(blocks)), decompose(fam))
        assert not ok
        assert "missing" in diff and "unexpected" in diff

    def test_altered_constant_detected(self, pauli_pair):
        skel = Skeleton(2, 2, (ExpectedBlock(CLIFFORD, (0, 1), 2, (1, 4)),))
        ok, _ = compare_reports(skel, decompose(pauli_pair))
        assert not ok

    def test_shape_mismatch(self, pauli_pair):
        ok, diff = compare_reports(Skeleton(3, 2, ()), decompose(pauli_pair))
        assert not ok and "shape" in diff


def test_corpus_coverage():
    cases = corpus(200)
    assert len(cases) == 200
    tags = Counter(t for c in cases for t in c.tags)
    for t in ("N=1", "empty-kernel", "same-support-multi", "odd-single", "degenerate"):
        assert tags[t] >= 1, t
    assert sum(c.field_mode == REAL for c in cases) >= 20
    assert max(sum(s.dim for s in c.specs) for c in cases) <= 32
    assert max(c.N for c in cases) <= 5


def test_corpus_deterministic():
    a, b = corpus(20), corpus(20)
    assert a == b


class TestInvalidSpec:
    @pytest.mark.parametrize(
        "args",
        [
            ("Bogus", 2),
            (KERNEL, 0),
            (KERNEL, 2, (0,)),
            (SINGLE, 2, (0, 1), {0: 1, 1: 1}),
            (SINGLE, 2, (0,), {0: 0}),
            (SINGLE, 2, (0,), {}),
            (CLIFFORD, 2, (0,), {0: 1}),
            (CLIFFORD, 3, (0, 1), {0: 1, 1: 1}),
            (CLIFFORD, 2, (0, 1, 2, 3), {0: 1, 1: 1, 2: 1, 3: 1}),
            (DEGENERATE, 3, (0,)),
            (CLIFFORD, 2, (0, 0), {0: 1}),
        ],
    )
    def test_block_spec(self, args):
        with pytest.raises(InvalidSpec):
            BlockSpec(*args)

    def test_empty_list(self):
        with pytest.raises(InvalidSpec):
            build_family([], 2)

    def test_bad_placement(self):
        with pytest.raises(InvalidSpec):
            build_family([BlockSpec(KERNEL, 2)], 1, placement=[[0, 0]])

    def test_bad_scramble(self):
        with pytest.raises(InvalidSpec):
            ScrambleSpec(0.5)
        with pytest.raises(InvalidSpec):
            ScrambleSpec(2.0, 0, -1.0)
