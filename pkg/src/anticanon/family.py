"""Operator families and checks of the structural hypotheses.

An anti-commuting family is validated pairwise; each member is classified
as diagonalizable, square-diagonalizable only (its square diagonalizes but
Ker(A) != Ker(A^2)), or unsupported.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidFamily
from .numerics import (
    TolerancePolicy,
    anticommutator,
    as_matrix,
    eig,
    frobenius_norm,
    kernel_basis,
    kernel_gap,
)

REAL = "real"
COMPLEX = "complex"


@dataclass(frozen=True, eq=False)
class OperatorFamily:
    """Ordered list of ``N`` square ``n x n`` matrices with unique labels."""

    ops: tuple[np.ndarray, ...]
    labels: tuple[str, ...] = ()
    field_mode: str = COMPLEX

    def __post_init__(self):
        if len(self.ops) == 0:
            raise InvalidFamily("a family needs at least one operator")
        try:
            ops = tuple(as_matrix(op) for op in self.ops)
        except ValueError as exc:
            raise InvalidFamily(str(exc)) from exc
        n = ops[0].shape[0]
        for a, op in enumerate(ops):
            if op.shape != (n, n):
                raise InvalidFamily(f"operator {a} has shape {op.shape}, expected {(n, n)}")
        labels = tuple(self.labels) or tuple(f"A{a + 1}" for a in range(len(ops)))
        if len(labels) != len(ops):
            raise InvalidFamily(f"{len(labels)} labels for {len(ops)} operators")
        if len(set(labels)) != len(labels):
            raise InvalidFamily(f"labels are not unique: {labels}")
        if self.field_mode not in (REAL, COMPLEX):
            raise InvalidFamily(f"unknown field mode {self.field_mode!r}")
        if self.field_mode == REAL and any(np.any(op.imag != 0) for op in ops):
            raise InvalidFamily("real-mode family has complex entries")
        for op in ops:
            op.setflags(write=False)
        object.__setattr__(self, "ops", ops)
        object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.ops[0].shape[0]

    @property
    def N(self) -> int:
        return len(self.ops)

    def __len__(self):
        return len(self.ops)

    def __iter__(self):
        return iter(self.ops)

    def __getitem__(self, a):
        return self.ops[a]

    def tolerance(self, base: TolerancePolicy | None = None) -> TolerancePolicy:
        """``base`` (default policy if omitted) rescaled to this family."""
        return (base or TolerancePolicy()).for_ops(self.ops)

    def map(self, fn, suffix: str = "") -> "OperatorFamily":
        return OperatorFamily(
            tuple(fn(op) for op in self.ops),
            tuple(lab + suffix for lab in self.labels),
            self.field_mode,
        )


def _policy(fam: OperatorFamily, tol: TolerancePolicy | None) -> TolerancePolicy:
    return tol if tol is not None else fam.tolerance()


def anticommutation_residual(fam: OperatorFamily, tol: TolerancePolicy | None = None) -> np.ndarray:
    """N x N matrix of ``||A_a A_b + A_b A_a|| / (scale^2 + 1)`` with zero diagonal."""
    tol = _policy(fam, tol)
    res = np.zeros((fam.N, fam.N))
    for a in range(fam.N):
        for b in range(a + 1, fam.N):
            r = frobenius_norm(anticommutator(fam[a], fam[b])) / (tol.scale**2 + 1)
            res[a, b] = res[b, a] = r
    return res


def is_anticommuting(fam: OperatorFamily, tol: TolerancePolicy | None = None) -> bool:
    tol = _policy(fam, tol)
    return bool(anticommutation_residual(fam, tol).max(initial=0.0) <= tol.rel_zero)


class Diagonalizability(enum.Enum):
    DIAGONALIZABLE = "Diagonalizable"
    SQUARE_DIAGONALIZABLE_ONLY = "SquareDiagonalizableOnly"
    UNSUPPORTED = "Unsupported"


@dataclass(frozen=True)
class OperatorClass:
    kind: Diagonalizability
    condition: float
    kernel_gap: int
    kernel_dim: int = field(default=0)

    @property
    def diagonalizable(self) -> bool:
        return self.kind is Diagonalizability.DIAGONALIZABLE


def classify_operator(a, tol: TolerancePolicy | None = None) -> OperatorClass:
    """Classify ``a`` by whether it, or only its square, is diagonalizable."""
    a = as_matrix(a)
    tol = tol if tol is not None else TolerancePolicy().for_ops([a])
    gap = kernel_gap(a, tol)
    kdim = kernel_basis(a, tol).shape[1]
    res = eig(a, tol, warn=False)
    if res.ok:
        return OperatorClass(Diagonalizability.DIAGONALIZABLE, res.condition, gap, kdim)
    sq = eig(a @ a, tol.squared(), warn=False)
    if sq.ok and gap > 0:
        return OperatorClass(Diagonalizability.SQUARE_DIAGONALIZABLE_ONLY, sq.condition, gap, kdim)
    return OperatorClass(Diagonalizability.UNSUPPORTED, res.condition, gap, kdim)


def classify_family(fam: OperatorFamily, tol: TolerancePolicy | None = None) -> list[OperatorClass]:
    tol = _policy(fam, tol)
    return [classify_operator(op, tol) for op in fam]


def check_squared_commutes(fam: OperatorFamily, tol: TolerancePolicy | None = None) -> float:
    """Largest scaled defect of [A_a^2, A_b^2] = 0 and [A_a, A_b^2] = 0 over a != b."""
    tol = _policy(fam, tol)
    sq = [op @ op for op in fam]
    worst = 0.0
    for a in range(fam.N):
        for b in range(fam.N):
            if a == b:
                continue
            r1 = frobenius_norm(sq[a] @ sq[b] - sq[b] @ sq[a]) / (tol.scale**4 + 1)
            r2 = frobenius_norm(fam[a] @ sq[b] - sq[b] @ fam[a]) / (tol.scale**3 + 1)
            worst = max(worst, r1, r2)
    return worst


def has_square_zero_member(fam: OperatorFamily, tol: TolerancePolicy | None = None) -> bool:
    tol = _policy(fam, tol)
    sq_tol = tol.squared()
    return any(frobenius_norm(op @ op) <= sq_tol.zero * fam.n for op in fam)


def check_linear_independence(fam: OperatorFamily, tol: TolerancePolicy | None = None) -> bool:
    """Rank test on the flattened operators (threshold ``rel_zero * scale * n``)."""
    tol = _policy(fam, tol)
    stacked = np.stack([op.reshape(-1) for op in fam])
    s = np.linalg.svd(stacked, compute_uv=False)
    return bool(np.sum(s > tol.zero * fam.n) == fam.N)


def common_kernel(fam: OperatorFamily, tol: TolerancePolicy | None = None) -> np.ndarray:
    """Orthonormal basis of the intersection of all kernels, via the stacked operator."""
    tol = _policy(fam, tol)
    stacked = np.vstack(fam.ops)
    return kernel_basis(stacked, tol, threshold=tol.zero * fam.n)

