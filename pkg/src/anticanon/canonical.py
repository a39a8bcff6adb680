"""Simultaneous canonical forms on the blocks of a decomposition.

Two entry points: the explicit two-operator construction with a general
diagonal ``D`` (``pair_canonical_form``), and the halving recursion for any
number of generators with scalar squares (``clifford_canonical_form``), which
is what :func:`apply_canonical` uses on Clifford blocks.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .decomposition import CLIFFORD, DEGENERATE, KERNEL, SINGLE, Block, DecompositionReport
from .errors import (
    DimensionObstruction,
    NonConstantSquare,
    NotAntiCommuting,
    NotDiagonalizable,
    OddDimension,
    SingularB,
)
from .family import OperatorFamily
from .numerics import (
    TolerancePolicy,
    anticommutator,
    as_matrix,
    eig,
    frobenius_norm,
    principal_sqrt,
    restrict,
)


@dataclass(frozen=True)
class PairCanonicalForm:
    local_basis: np.ndarray
    lam: complex
    D: tuple[complex, ...]
    canon_A: np.ndarray
    canon_B: np.ndarray
    canon_B2: np.ndarray
    residual: float


@dataclass(frozen=True)
class CliffordCanonicalForm:
    """``local_basis^-1 @ A_a @ local_basis ~= normalizers[i] * generators[i]``."""

    local_basis: np.ndarray
    generators: tuple[np.ndarray, ...]
    normalizers: tuple[complex, ...]
    recursion_trace: dict
    depth: int
    residual: float = 0.0


@dataclass(frozen=True)
class SingleOperatorForm:
    local_basis: np.ndarray
    eigenvalues: tuple[complex, ...]
    opposite_pairs: bool
    residual: float


Form = Union[CliffordCanonicalForm, PairCanonicalForm, SingleOperatorForm, None]


@dataclass(frozen=True)
class CanonicalEntry:
    block: Block
    form: Form
    note: str = ""
    support: tuple[int, ...] = field(default=())


def _pair_tol(mats: Sequence[np.ndarray], tol: TolerancePolicy | None) -> TolerancePolicy:
    return (tol or TolerancePolicy()).for_ops(mats)


def _eigenspace(h: np.ndarray, sign: int) -> np.ndarray:
    """Orthonormal basis of the ``sign``-eigenspace of an involution ``h``."""
    k = h.shape[0]
    proj = 0.5 * (np.eye(k) + sign * h)
    dim = int(round(np.trace(proj).real))
    if dim == 0:
        return np.zeros((k, 0), dtype=np.complex128)
    u, _, _ = np.linalg.svd(proj)
    return u[:, :dim]


def _block(a, b, c, d) -> np.ndarray:
    return np.block([[a, b], [c, d]])


def pair_canonical_form(A, B, tol: TolerancePolicy | None = None) -> PairCanonicalForm:
    """Basis ``[X | Y]`` with ``A -> diag(lam I, -lam I)`` and ``B -> [[0, D], [I, 0]]``.

    ``X`` spans the ``+lam`` eigenspace of ``A`` and diagonalizes the
    restriction of ``B^2`` there; ``Y = B X``.  ``lam`` is the principal
    square root of the constant value of ``A^2``.
    """
    A = as_matrix(A)
    B = as_matrix(B)
    if A.shape != B.shape:
        raise ValueError(f"shape mismatch {A.shape} vs {B.shape}")
    tol = _pair_tol([A, B], tol)
    k = A.shape[0]
    if frobenius_norm(anticommutator(A, B)) / (tol.scale**2 + 1) > tol.rel_zero:
        raise NotAntiCommuting("A and B do not anti-commute")
    if k % 2:
        raise OddDimension(f"block dimension {k} is odd")
    sq = tol.squared()
    A2 = A @ A
    lam2 = complex(np.trace(A2) / k)
    if frobenius_norm(A2 - lam2 * np.eye(k)) > sq.zero * k or abs(lam2) <= sq.zero:
        raise NonConstantSquare("A^2 is not a nonzero multiple of the identity")
    if np.linalg.svd(B, compute_uv=False)[-1] <= tol.zero:
        raise SingularB("B is singular on the block; split off Ker(B) first")

    lam = principal_sqrt(lam2)
    X0 = _eigenspace(A / lam, +1)
    m = X0.shape[1]
    if 2 * m != k:
        raise DimensionObstruction(f"+lam eigenspace has dim {m}, expected {k // 2}")
    R, _ = restrict(B @ B, X0, tol)
    res = eig(R, sq, warn=False)
    if not res.ok:
        raise NotDiagonalizable("B^2 is not diagonalizable on the +lam eigenspace")
    X = X0 @ res.vectors
    Y = B @ X
    L = np.hstack([X, Y])

    D = tuple(complex(v) for v in res.values)
    Dm = np.diag(np.array(D, dtype=np.complex128))
    I = np.eye(m, dtype=np.complex128)
    Z = np.zeros((m, m), dtype=np.complex128)
    canon_A = _block(lam * I, Z, Z, -lam * I)
    canon_B = _block(Z, Dm, I, Z)
    canon_B2 = _block(Dm, Z, Z, Dm)
    Linv = np.linalg.inv(L)
    residual = max(
        frobenius_norm(Linv @ A @ L - canon_A),
        frobenius_norm(Linv @ B @ L - canon_B),
        frobenius_norm(Linv @ (B @ B) @ L - canon_B2) / tol.scale,
    )
    return PairCanonicalForm(L, lam, D, canon_A, canon_B, canon_B2, residual)


def _halve(hs: list[np.ndarray], k: int, depth: int = 0):
    """Recursive canonical basis for involutions ``hs`` acting on C^k.

    Returns (basis, exact generators, trace dict, recursion depth).
    """
    m = len(hs)
    if m == 0:
        return np.eye(k, dtype=np.complex128), [], {"dim": k, "generators": 0}, depth
    if m == 1:
        Wp, Wm = _eigenspace(hs[0], +1), _eigenspace(hs[0], -1)
        p, q = Wp.shape[1], Wm.shape[1]
        if p + q != k:
            raise DimensionObstruction(f"eigenspaces of dims {p}+{q} do not fill {k}")
        G = np.diag(np.concatenate([np.ones(p), -np.ones(q)])).astype(np.complex128)
        trace = {"dim": k, "generators": 1, "plus": p, "minus": q}
        return np.hstack([Wp, Wm]), [G], trace, depth
    if k % 2:
        raise DimensionObstruction(f"{m} generators cannot act on odd dimension {k}")
    X = _eigenspace(hs[0], +1)
    d = X.shape[1]
    if 2 * d != k:
        raise DimensionObstruction(
            f"halving needs dim W+ = dim W- = {k // 2}, got dim W+ = {d}"
        )
    Y = hs[1] @ X
    # H_a X = Y E_a, so E_a = X^H H_2 H_a X and K_a = i E_a squares to +I
    ks = [1j * (X.conj().T @ hs[1] @ h @ X) for h in hs[2:]]
    Q, sub, child, sub_depth = _halve(ks, d, depth + 1)
    I = np.eye(d, dtype=np.complex128)
    Z = np.zeros((d, d), dtype=np.complex128)
    gens = [_block(I, Z, Z, -I), _block(Z, I, I, Z)]
    gens += [_block(Z, 1j * g, -1j * g, Z) for g in sub]
    trace = {"dim": k, "generators": m, "half": d, "child": child}
    return np.hstack([X @ Q, Y @ Q]), gens, trace, sub_depth


def clifford_canonical_form(
    block_ops: Sequence, constants: Sequence[complex], tol: TolerancePolicy | None = None
) -> CliffordCanonicalForm:
    """Canonical basis for generators with ``A_a^2 = c_a I`` that pairwise anti-commute.

    Each ``A_a`` is normalized to ``H_a = A_a / sqrt(c_a)``.  The first
    involution splits the space into its +1/-1 eigenspaces ``W+ (+) W-``,
    the second maps a basis ``X`` of ``W+`` to ``Y``; the remaining ones
    reduce to anti-commuting involutions ``i E_a`` on ``W+`` and the
    construction recurses at half the dimension.
    """
    ops = [as_matrix(a) for a in block_ops]
    if len(ops) != len(constants) or not ops:
        raise ValueError("need one constant per generator and at least one generator")
    k = ops[0].shape[0]
    tol = _pair_tol(ops, tol)
    norms = tuple(principal_sqrt(c) for c in constants)
    if any(s == 0 for s in norms):
        raise NonConstantSquare("generator constants must be nonzero")
    if len(ops) >= 2 and k % 2:
        raise DimensionObstruction(f"{len(ops)} generators cannot act on odd dimension {k}")
    hs = [a / s for a, s in zip(ops, norms)]
    unit = TolerancePolicy(tol.rel_zero, tol.eig_cluster, 1.0)
    for i, h in enumerate(hs):
        if frobenius_norm(h @ h - np.eye(k)) > unit.zero * k * max(1.0, tol.scale):
            raise NonConstantSquare(f"generator {i} does not square to its constant")
        for j in range(i + 1, len(hs)):
            if frobenius_norm(anticommutator(h, hs[j])) > unit.zero * k * max(1.0, tol.scale):
                raise NotAntiCommuting(f"generators {i} and {j} do not anti-commute")
    L, gens, trace, depth = _halve(hs, k)
    Linv = np.linalg.inv(L)
    residual = max(frobenius_norm(Linv @ a @ L - s * g) for a, s, g in zip(ops, norms, gens))
    return CliffordCanonicalForm(L, tuple(gens), norms, trace, depth, residual)


def generators_exact(gens: Sequence[np.ndarray]) -> bool:
    """Exact (bitwise) check of G_a G_b + G_b G_a = 0 and G_a^2 = +-I."""
    for i, g in enumerate(gens):
        sq = g @ g
        eye = np.eye(g.shape[0])
        if not (np.array_equal(sq, eye) or np.array_equal(sq, -eye)):
            return False
        for h in gens[i + 1 :]:
            if np.any(g @ h + h @ g != 0):
                return False
    return True


def _single_form(block: Block, tol: TolerancePolicy) -> SingleOperatorForm:
    (a,) = block.support
    R = block.restrictions[a]
    res = eig(R, tol, warn=False)
    if not res.ok:
        raise NotDiagonalizable("single-operator block restriction is not diagonalizable")
    vals = np.asarray(res.values)
    opposite = bool(
        np.any(np.abs(vals[:, None] + vals[None, :]) <= tol.cluster_radius)
    )
    residual = frobenius_norm(np.linalg.solve(res.vectors, R @ res.vectors) - np.diag(vals))
    return SingleOperatorForm(res.vectors, tuple(complex(v) for v in vals), opposite, residual)


def apply_canonical(rep: DecompositionReport, fam: OperatorFamily) -> list[CanonicalEntry]:
    """Canonical forms for every block of ``rep``; local bases in original coordinates.

    Kernel blocks need no form and degenerate blocks are skipped with a
    note.  ``form.residual`` is recomputed against ``fam`` as
    ``||pinv(L) A_a L - normalizer_a G_a||_F`` with ``L`` the
    original-coordinate basis.
    """
    tol = rep.tolerance
    out = []
    for block in rep.blocks:
        basis = rep.basis(block)
        if block.kind == KERNEL:
            out.append(CanonicalEntry(block, None, "common kernel: every operator vanishes"))
            continue
        if block.kind == DEGENERATE:
            out.append(
                CanonicalEntry(
                    block,
                    None,
                    "degenerate Clifford algebra: some operator is nonzero with vanishing square; "
                    "no canonical form constructed",
                )
            )
            continue
        if block.kind == SINGLE:
            local = _single_form(block, tol)
            L = basis @ local.local_basis
            (a,) = block.support
            R, _ = restrict(fam[a], L, tol)
            residual = frobenius_norm(R - np.diag(local.eigenvalues))
            note = "eigenvalue pairs mu, -mu present" if local.opposite_pairs else ""
            out.append(
                CanonicalEntry(
                    block,
                    SingleOperatorForm(L, local.eigenvalues, local.opposite_pairs, residual),
                    note,
                    block.support,
                )
            )
            continue
        assert block.kind == CLIFFORD
        assert all(block.constants[a] != 0 for a in block.support)
        ops = [block.restrictions[a] for a in block.support]
        consts = [block.constants[a] for a in block.support]
        local = clifford_canonical_form(ops, consts, tol)
        L = basis @ local.local_basis
        residual = 0.0
        for a, s, g in zip(block.support, local.normalizers, local.generators):
            R, _ = restrict(fam[a], L, tol)
            residual = max(residual, frobenius_norm(R - s * g))
        note = ""
        if block.signature is not None:
            p, q = block.signature
            note = f"real signature ({p},{q}); complex canonical basis only"
        out.append(
            CanonicalEntry(
                block,
                CliffordCanonicalForm(
                    L, local.generators, local.normalizers, local.recursion_trace, local.depth, residual
                ),
                note,
                block.support,
            )
        )
    return out


def canonical_residual(entries: Sequence[CanonicalEntry]) -> float:
    return max((e.form.residual for e in entries if e.form is not None), default=0.0)
