"""Simultaneous diagonalization of commuting diagonalizable families."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import CommutationViolation, IllConditionedWarning, NotDiagonalizable
from .family import OperatorFamily
from .numerics import (
    ILL_CONDITIONED,
    TolerancePolicy,
    commutator,
    eig,
    frobenius_norm,
    orthonormalize,
    restrict,
)


@dataclass(frozen=True)
class SimDiagResult:
    """Common eigenbasis ``P`` (unit-norm columns) and per-operator eigenvalues.

    ``diag_values[a, j]`` is the eigenvalue of operator ``a`` on column ``j``.
    ``offdiag_residual`` is ``max_a ||P^-1 A_a P - diag(diag_values[a])||_F / scale``.
    ``cells`` lists the column ranges of the final refinement cells.
    """

    P: np.ndarray
    diag_values: np.ndarray
    offdiag_residual: float
    condition: float
    cells: tuple[tuple[int, ...], ...]

    def column_tuples(self) -> list[tuple[complex, ...]]:
        return [tuple(complex(v) for v in self.diag_values[:, j]) for j in range(self.P.shape[1])]


def commutation_residual(fam: OperatorFamily, tol: TolerancePolicy | None = None) -> float:
    """max over pairs of ``||A_a A_b - A_b A_a||_F / (scale^2 + 1)``."""
    tol = tol if tol is not None else fam.tolerance()
    worst = 0.0
    for a in range(fam.N):
        for b in range(a + 1, fam.N):
            worst = max(worst, frobenius_norm(commutator(fam[a], fam[b])) / (tol.scale**2 + 1))
    return worst


def simultaneous_diagonalize(fam: OperatorFamily, tol: TolerancePolicy | None = None) -> SimDiagResult:
    """Diagonalize a commuting family by eigenspace refinement.

    The space starts as a single cell.  Operators are processed in family
    order; each cell is replaced by the eigenspaces of the operator's
    restriction to it (single-linkage clustered eigenvalues).  Cell bases
    are kept orthonormal.

    Raises
    ------
    CommutationViolation
        If some pair fails to commute to ``rel_zero``.
    NotDiagonalizable
        If a restriction fails the eigenbasis test; ``leak`` carries the
        invariance defect of the offending cell.
    """
    tol = tol if tol is not None else fam.tolerance()
    cres = commutation_residual(fam, tol)
    if cres > tol.rel_zero:
        raise CommutationViolation(f"family does not commute (residual {cres:.3g})", cres)

    n, N = fam.n, fam.N
    # each cell: (orthonormal basis n x k, list of per-operator values so far)
    cells: list[tuple[np.ndarray, list[complex]]] = [(np.eye(n, dtype=np.complex128), [])]
    for a, op in enumerate(fam):
        refined = []
        for basis, vals in cells:
            r, leak = restrict(op, basis, tol)
            res = eig(r, tol, warn=False)
            if not res.ok:
                raise NotDiagonalizable(
                    f"restriction of {fam.labels[a]} to a {basis.shape[1]}-dim cell "
                    f"is not diagonalizable (leak {leak:.3g})",
                    leak,
                )
            for rep, cols in res.clusters:
                sub = orthonormalize(basis @ res.vectors[:, list(cols)])
                refined.append((sub, vals + [rep]))
        cells = refined

    P = np.hstack([b for b, _ in cells])
    diag_values = np.empty((N, n), dtype=np.complex128)
    ranges = []
    col = 0
    for basis, vals in cells:
        k = basis.shape[1]
        diag_values[:, col : col + k] = np.asarray(vals)[:, None]
        ranges.append(tuple(range(col, col + k)))
        col += k

    s = np.linalg.svd(P, compute_uv=False)
    condition = float(s[0] / s[-1])
    if condition > ILL_CONDITIONED:
        warnings.warn(
            f"common eigenbasis condition {condition:.3g} exceeds {ILL_CONDITIONED:g}",
            IllConditionedWarning,
            stacklevel=2,
        )
    worst = 0.0
    for a, op in enumerate(fam):
        d = np.linalg.solve(P, op @ P) - np.diag(diag_values[a])
        worst = max(worst, frobenius_norm(d))
    return SimDiagResult(P, diag_values, worst / tol.scale, condition, tuple(ranges))


def reconstruction_residual(fam: OperatorFamily, result: SimDiagResult) -> float:
    """``max_a ||A_a P - P diag(values_a)||_F`` (unscaled)."""
    P = result.P
    return max(
        frobenius_norm(op @ P - P * result.diag_values[a][None, :]) for a, op in enumerate(fam)
    )
