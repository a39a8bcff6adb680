"""Invariant direct-sum decomposition of an anti-commuting family.

The squares of an anti-commuting family commute, so they share an
eigenbasis.  Grouping those eigenvectors first by which squares are nonzero
(the support) and then by the tuple of square values splits the space into
summands on which the family is either zero, a single nonsingular operator,
or a Clifford representation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InconsistentSpectrum, NotAntiCommuting, UnsupportedOperator
from .family import (
    REAL,
    Diagonalizability,
    OperatorClass,
    OperatorFamily,
    anticommutation_residual,
    classify_family,
)
from .numerics import (
    TolerancePolicy,
    anticommutator,
    frobenius_norm,
    is_zero,
    restrict,
    round_key,
)
from .simdiag import SimDiagResult, simultaneous_diagonalize

KERNEL = "Kernel"
SINGLE = "SingleOperator"
CLIFFORD = "Clifford"
DEGENERATE = "Degenerate"

NO_REAL_STRUCTURE = "no real block structure claimed"


@dataclass(frozen=True)
class ConstantGroup:
    """Columns sharing one tuple of square values (second grouping level)."""

    constants: dict
    columns: tuple[int, ...]


@dataclass(frozen=True)
class Block:
    """One summand: basis columns of the global ``P`` plus the restricted family.

    ``support`` lists the (0-based) operators acting nontrivially on the block.
    ``constants`` maps each supported operator to the value of its square; a
    merged single-operator block whose subgroups carry different values has
    an empty ``constants`` and the values live in ``groups``.
    ``restrictions`` holds the matrix of every supported operator in the
    block's columns.
    """

    kind: str
    columns: tuple[int, ...]
    support: tuple[int, ...]
    constants: dict
    groups: tuple[ConstantGroup, ...]
    restrictions: dict
    invariance_leak: float
    signature: tuple[int, int] | None = None

    @property
    def dim(self) -> int:
        return len(self.columns)


@dataclass(frozen=True)
class DecompositionReport:
    n: int
    N: int
    labels: tuple[str, ...]
    field_mode: str
    P: np.ndarray
    blocks: tuple[Block, ...]
    support_groups: tuple[tuple[tuple[int, ...], tuple[int, ...]], ...]
    residuals: dict
    classes: tuple[str, ...]
    tolerance: TolerancePolicy
    notes: tuple[str, ...] = ()
    simdiag_condition: float = 1.0
    k_counts: dict = field(default_factory=dict)

    def dims(self) -> list[int]:
        return [b.dim for b in self.blocks]

    def basis(self, block: Block) -> np.ndarray:
        return self.P[:, list(block.columns)]


def square_family(fam: OperatorFamily) -> OperatorFamily:
    return fam.map(lambda op: op @ op, suffix="^2")


def _cluster_tuples(tuples: list[tuple[complex, ...]], radius: float) -> list[list[int]]:
    n = len(tuples)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    arr = np.asarray(tuples, dtype=np.complex128).reshape(n, -1)
    for i in range(n):
        for j in range(i + 1, n):
            if np.max(np.abs(arr[i] - arr[j]), initial=0.0) <= radius:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[max(ri, rj)] = min(ri, rj)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def _support_and_groups(sd: SimDiagResult, tol: TolerancePolicy):
    """Map support -> list of (constant tuple, column list)."""
    sq_tol = tol.squared()
    by_support: dict[tuple[int, ...], list[tuple[tuple[complex, ...], list[int]]]] = {}
    for cols in sd.cells:
        vals = sd.diag_values[:, cols[0]]
        support = tuple(int(a) for a in np.nonzero(np.abs(vals) > sq_tol.zero)[0])
        by_support.setdefault(support, []).append((tuple(complex(v) for v in vals), list(cols)))
    out = {}
    for support, cells in by_support.items():
        merged = []
        for idx in _cluster_tuples([t for t, _ in cells], sq_tol.cluster_radius):
            cols = sorted(c for i in idx for c in cells[i][1])
            weights = np.array([len(cells[i][1]) for i in idx], dtype=float)
            mean = np.average(np.array([cells[i][0] for i in idx]), axis=0, weights=weights)
            merged.append((tuple(complex(v) for v in mean), cols))
        out[support] = merged
    return out


def _constant_dict(values: tuple[complex, ...], support: tuple[int, ...]) -> dict:
    return {a: values[a] for a in support}


def decompose(fam: OperatorFamily, tol: TolerancePolicy | None = None) -> DecompositionReport:
    """Split ``fam`` into kernel, single-operator, Clifford and degenerate blocks.

    Raises
    ------
    NotAntiCommuting
        The family fails the pairwise anti-commutation test.
    UnsupportedOperator
        A member is neither diagonalizable nor square-diagonalizable.
    InconsistentSpectrum
        A diagonalizable member acts nontrivially where its square vanishes.
    """
    tol = fam.tolerance(tol)
    ac = anticommutation_residual(fam, tol)
    if ac.max(initial=0.0) > tol.rel_zero:
        raise NotAntiCommuting(
            f"family is not anti-commuting (max residual {ac.max():.3g})", float(ac.max())
        )
    classes: list[OperatorClass] = classify_family(fam, tol)
    for a, c in enumerate(classes):
        if c.kind is Diagonalizability.UNSUPPORTED:
            raise UnsupportedOperator(
                f"{fam.labels[a]} is neither diagonalizable nor square-diagonalizable"
            )

    sd = simultaneous_diagonalize(square_family(fam), tol.squared())
    grouped = _support_and_groups(sd, tol)

    # (sort key, kind, support-of-squares, groups)
    raw_blocks = []
    null_groups = grouped.pop((), [])
    if null_groups:
        cols = sorted(c for _, cs in null_groups for c in cs)
        values = tuple(complex(0) for _ in range(fam.N))
        raw_blocks.append(((), KERNEL, (), [(values, cols)]))
    for support in sorted(grouped, key=lambda s: (len(s), s)):
        groups = grouped[support]
        if len(support) == 1:
            raw_blocks.append((support, SINGLE, support, groups))
        else:
            for values, cols in groups:
                raw_blocks.append((support, CLIFFORD, support, [(values, cols)]))

    def sort_key(item):
        support, kind, _, groups = item
        values = groups[0][0]
        consts = tuple(round_key(values[a]) for a in support)
        return (len(support), support, consts, min(min(cs) for _, cs in groups))

    raw_blocks.sort(key=sort_key)

    # reorder P so each block occupies a contiguous column range
    order = [c for _, _, _, groups in raw_blocks for c in sorted(c for _, cs in groups for c in cs)]
    position = {old: new for new, old in enumerate(order)}
    P = sd.P[:, order]
    diag_values = sd.diag_values[:, order]

    real_ok = fam.field_mode == REAL and not np.any(np.abs(sd.diag_values.imag) > tol.squared().zero)
    notes = []
    if fam.field_mode == REAL and not real_ok:
        notes.append(NO_REAL_STRUCTURE)

    blocks = []
    max_leak = max_const = max_cliff = 0.0
    for sq_support, kind, _, groups in raw_blocks:
        cols = tuple(sorted(position[c] for _, cs in groups for c in cs))
        basis = P[:, list(cols)]
        restrictions = {}
        leak = 0.0
        acting = []
        for a, op in enumerate(fam):
            r, lk = restrict(op, basis, tol)
            leak = max(leak, lk)
            if not is_zero(r, tol):
                acting.append(a)
            restrictions[a] = r
            # constancy: in this basis A_a^2 must be the diagonal of square values
            target = np.diag(diag_values[a, list(cols)])
            max_const = max(max_const, frobenius_norm(r @ r - target) / tol.scale**2)
        max_leak = max(max_leak, leak)

        stray = [a for a in acting if a not in sq_support]
        if stray:
            bad = [a for a in stray if classes[a].kind is Diagonalizability.DIAGONALIZABLE]
            if bad:
                raise InconsistentSpectrum(
                    f"{fam.labels[bad[0]]} is diagonalizable but acts on a subspace "
                    f"where its square vanishes"
                )
            kind = DEGENERATE
        support = tuple(sorted(set(acting) | set(sq_support))) if kind == DEGENERATE else sq_support

        cgroups = tuple(
            ConstantGroup(_constant_dict(values, support), tuple(sorted(position[c] for c in cs)))
            for values, cs in groups
        )
        if kind == SINGLE and len(groups) > 1:
            constants = {}
        else:
            constants = _constant_dict(groups[0][0], support)

        if kind == CLIFFORD:
            for i, a in enumerate(support):
                for b in support[i + 1 :]:
                    d = frobenius_norm(anticommutator(restrictions[a], restrictions[b]))
                    max_cliff = max(max_cliff, d / tol.scale**2)

        signature = None
        if real_ok and kind == CLIFFORD:
            signature = (
                sum(1 for a in support if constants[a].real > 0),
                sum(1 for a in support if constants[a].real < 0),
            )
        blocks.append(
            Block(
                kind,
                cols,
                support,
                constants,
                cgroups,
                {a: restrictions[a] for a in support},
                leak,
                signature,
            )
        )

    support_groups: dict[tuple[int, ...], list[int]] = {}
    for i, b in enumerate(blocks):
        if b.kind in (CLIFFORD, SINGLE):
            support_groups.setdefault(b.support, []).append(i)
    k_counts = {}
    for support in support_groups:
        if len(support) >= 2:
            k_counts[len(support)] = k_counts.get(len(support), 0) + 1
    for i, k in k_counts.items():
        assert k <= math.comb(fam.N, i), f"{k} supports of size {i} exceed C({fam.N},{i})"
    assert sum(b.dim for b in blocks) == fam.n

    residuals = {
        "anticommutation": float(ac.max(initial=0.0)),
        "invariance": max_leak,
        "constancy": max_const,
        "clifford_anticommutation": max_cliff,
        "simdiag_offdiag": sd.offdiag_residual,
    }
    return DecompositionReport(
        n=fam.n,
        N=fam.N,
        labels=fam.labels,
        field_mode=fam.field_mode,
        P=P,
        blocks=tuple(blocks),
        support_groups=tuple((s, tuple(ix)) for s, ix in support_groups.items()),
        residuals=residuals,
        classes=tuple(c.kind.value for c in classes),
        tolerance=tol,
        notes=tuple(notes),
        simdiag_condition=sd.condition,
        k_counts=k_counts,
    )


def verify_block_invariance(rep: DecompositionReport, fam: OperatorFamily) -> float:
    """Max invariance leak ``||A_a B - B R|| / (||A_a|| + 1)`` over blocks and operators."""
    tol = rep.tolerance
    worst = 0.0
    for block in rep.blocks:
        basis = rep.basis(block)
        for op in fam:
            _, leak = restrict(op, basis, tol)
            worst = max(worst, leak)
    return worst


def block_partition_ok(rep: DecompositionReport) -> bool:
    cols = sorted(c for b in rep.blocks for c in b.columns)
    return cols == list(range(rep.n))
