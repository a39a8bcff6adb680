"""Test-data factory: families with known block structure, plus scrambling.

Clifford blocks are assembled from Kronecker products of 2x2 Pauli seeds
(Jordan-Wigner layout), a code path that shares nothing with the halving
recursion in :mod:`anticanon.canonical`.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InvalidSpec
from .family import COMPLEX, REAL, OperatorFamily
from .numerics import principal_sqrt

KERNEL = "Kernel"
SINGLE = "SingleOperator"
CLIFFORD = "Clifford"
DEGENERATE = "Degenerate"
KINDS = (KERNEL, SINGLE, CLIFFORD, DEGENERATE)

_I2 = np.eye(2, dtype=np.complex128)
_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
_J = np.array([[0, 1], [0, 0]], dtype=np.complex128)


@dataclass(frozen=True)
class BlockSpec:
    """One summand of a generated family.

    ``support`` holds 0-based operator indices; ``constants`` maps each of
    them to the value of the operator's square on the block (ignored for
    kernel blocks, zero for degenerate ones).
    """

    kind: str
    dim: int
    support: tuple[int, ...] = ()
    constants: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidSpec(f"unknown block kind {self.kind!r}")
        if not isinstance(self.dim, (int, np.integer)) or self.dim < 1:
            raise InvalidSpec(f"block dim must be a positive integer, got {self.dim!r}")
        support = tuple(sorted(int(a) for a in self.support))
        if len(set(support)) != len(support):
            raise InvalidSpec(f"repeated operator in support {support}")
        object.__setattr__(self, "support", support)
        consts = {int(a): complex(c) for a, c in dict(self.constants).items()}
        object.__setattr__(self, "constants", consts)

        if self.kind == KERNEL:
            if support:
                raise InvalidSpec("kernel blocks have empty support")
        elif self.kind == SINGLE:
            if len(support) != 1:
                raise InvalidSpec("single-operator blocks have exactly one operator")
        elif self.kind == CLIFFORD:
            if len(support) < 2:
                raise InvalidSpec("Clifford blocks need at least two operators")
            step = 2 ** (len(support) // 2)
            if self.dim % step:
                raise InvalidSpec(
                    f"{len(support)} generators need a block dimension divisible by {step}, got {self.dim}"
                )
        elif self.kind == DEGENERATE:
            if len(support) != 1 or self.dim % 2:
                raise InvalidSpec("degenerate blocks carry one nilpotent operator on an even dimension")
        if self.kind in (SINGLE, CLIFFORD):
            for a in support:
                if a not in consts:
                    raise InvalidSpec(f"missing constant for operator {a}")
                if consts[a] == 0:
                    raise InvalidSpec(f"constant for operator {a} must be nonzero")


@dataclass(frozen=True)
class ScrambleSpec:
    conj_cond_max: float = 50.0
    perm_seed: int = 0
    noise: float = 0.0
    conj_seed: int | None = None

    def __post_init__(self):
        if not self.conj_cond_max >= 1:
            raise InvalidSpec("conj_cond_max must be >= 1")
        if not self.noise >= 0:
            raise InvalidSpec("noise must be >= 0")


@dataclass(frozen=True)
class ExpectedBlock:
    kind: str
    support: tuple[int, ...]
    dim: int
    constants: tuple[complex, ...] = ()


@dataclass(frozen=True)
class Skeleton:
    """Expected decomposition: block inventory plus family shape."""

    n: int
    N: int
    blocks: tuple[ExpectedBlock, ...]

    def dims(self) -> list[int]:
        return [b.dim for b in self.blocks]


# --- generators --------------------------------------------------------------


@functools.lru_cache(maxsize=None)
def _jw_generators(m: int, odd_sign: int) -> tuple[np.ndarray, ...]:
    """``m`` anti-commuting involutions of size 2**(m//2) from Pauli strings."""
    k = m // 2
    out = []

    def kron_all(mats):
        r = np.ones((1, 1), dtype=np.complex128)
        for x in mats:
            r = np.kron(r, x)
        return r

    for j in range(k):
        left = [_Z] * j
        right = [_I2] * (k - j - 1)
        out.append(kron_all(left + [_X] + right))
        out.append(kron_all(left + [_Y] + right))
    if m % 2:
        out.append(odd_sign * kron_all([_Z] * k))
    for g in out:
        g.setflags(write=False)
    return tuple(out)


def _complex_block(spec: BlockSpec, dim: int, N: int, rng) -> list[np.ndarray]:
    ops = [np.zeros((dim, dim), dtype=np.complex128) for _ in range(N)]
    if spec.kind == KERNEL:
        return ops
    if spec.kind == DEGENERATE:
        (a,) = spec.support
        amp = 1.0 + rng.integers(0, 3)
        ops[a] = np.kron(np.eye(dim // 2), amp * _J)
        return ops
    if spec.kind == SINGLE:
        (a,) = spec.support
        signs = rng.choice([-1.0, 1.0], size=dim)
        ops[a] = principal_sqrt(spec.constants[a]) * np.diag(signs).astype(np.complex128)
        return ops
    m = len(spec.support)
    irrep = 2 ** (m // 2)
    copies = dim // irrep
    blocks = [[] for _ in range(m)]
    for _ in range(copies):
        sign = int(rng.choice([-1, 1])) if m % 2 else 1
        gens = _jw_generators(m, sign)
        for i in range(m):
            blocks[i].append(gens[i])
    for i, a in enumerate(spec.support):
        g = _direct_sum(blocks[i])
        ops[a] = principal_sqrt(spec.constants[a]) * g
    return ops


def _direct_sum(mats: Sequence[np.ndarray]) -> np.ndarray:
    n = sum(m.shape[0] for m in mats)
    out = np.zeros((n, n), dtype=np.complex128)
    i = 0
    for m in mats:
        k = m.shape[0]
        out[i : i + k, i : i + k] = m
        i += k
    return out


def _realify(m: np.ndarray) -> np.ndarray:
    return np.block([[m.real, -m.imag], [m.imag, m.real]])


def block_matrices(spec: BlockSpec, N: int, field_mode: str = COMPLEX) -> list[np.ndarray]:
    """The ``N`` restricted operators of one block (``dim x dim`` each)."""
    if any(a >= N or a < 0 for a in spec.support):
        raise InvalidSpec(f"support {spec.support} exceeds family size {N}")
    rng = np.random.default_rng(spec.seed)
    if field_mode == COMPLEX:
        return _complex_block(spec, spec.dim, N, rng)
    if any(c.imag != 0 for c in spec.constants.values()):
        raise InvalidSpec("real-mode blocks need real constants")
    trial = _complex_block(spec, spec.dim, N, np.random.default_rng(spec.seed))
    if all(not np.any(op.imag) for op in trial):
        return [op.real.astype(np.complex128) for op in trial]
    # realification doubles the dimension of a complex representation
    if spec.dim % 2 or (spec.kind == CLIFFORD and (spec.dim // 2) % 2 ** (len(spec.support) // 2)):
        raise InvalidSpec(f"no real realization of {spec.kind} block with dim {spec.dim}")
    half = _complex_block(spec, spec.dim // 2, N, rng)
    return [_realify(op).astype(np.complex128) for op in half]


def _constants_close(x: Sequence[complex], y: Sequence[complex], rtol: float = 1e-6) -> bool:
    return len(x) == len(y) and all(abs(p - q) <= rtol * (1 + abs(p) + abs(q)) for p, q in zip(x, y))


def expected_skeleton(specs: Sequence[BlockSpec], N: int) -> Skeleton:
    """Block inventory that :func:`anticanon.decomposition.decompose` must recover."""
    n = sum(s.dim for s in specs)
    null_dim = 0
    null_support: set[int] = set()
    degenerate = False
    singles: dict[int, int] = {}
    cliffords: list[list] = []  # [support, constants, dim]
    for s in specs:
        if s.kind in (KERNEL, DEGENERATE):
            null_dim += s.dim
            if s.kind == DEGENERATE:
                degenerate = True
                null_support.update(s.support)
        elif s.kind == SINGLE:
            singles[s.support[0]] = singles.get(s.support[0], 0) + s.dim
        else:
            consts = tuple(s.constants[a] for a in s.support)
            for entry in cliffords:
                if entry[0] == s.support and _constants_close(entry[1], consts):
                    entry[2] += s.dim
                    break
            else:
                cliffords.append([s.support, consts, s.dim])
    blocks = []
    if null_dim:
        if degenerate:
            blocks.append(ExpectedBlock(DEGENERATE, tuple(sorted(null_support)), null_dim))
        else:
            blocks.append(ExpectedBlock(KERNEL, (), null_dim))
    for a in sorted(singles):
        blocks.append(ExpectedBlock(SINGLE, (a,), singles[a]))
    for support, consts, dim in cliffords:
        blocks.append(ExpectedBlock(CLIFFORD, support, dim, consts))
    return Skeleton(n, N, tuple(blocks))


def build_family(
    specs: Sequence[BlockSpec],
    N: int,
    field_mode: str = COMPLEX,
    placement: Sequence[Sequence[int]] | None = None,
) -> tuple[OperatorFamily, Skeleton]:
    """Assemble a block-diagonal family and its expected decomposition.

    ``placement`` optionally gives, per spec, the (0-based) basis positions
    its block occupies; by default blocks are laid out consecutively.
    """
    if not specs:
        raise InvalidSpec("empty block spec list")
    if N < 1:
        raise InvalidSpec("family size must be positive")
    n = sum(s.dim for s in specs)
    ops = [np.zeros((n, n), dtype=np.complex128) for _ in range(N)]
    if placement is None:
        placement, start = [], 0
        for s in specs:
            placement.append(list(range(start, start + s.dim)))
            start += s.dim
    else:
        placement = [list(p) for p in placement]
        flat = sorted(i for p in placement for i in p)
        if len(placement) != len(specs) or flat != list(range(n)):
            raise InvalidSpec("placement must partition the basis positions")
        for s, p in zip(specs, placement):
            if len(p) != s.dim:
                raise InvalidSpec(f"placement of size {len(p)} for block of dim {s.dim}")
    for s, idx in zip(specs, placement):
        mats = block_matrices(s, N, field_mode)
        sel = np.ix_(idx, idx)
        for a in range(N):
            ops[a][sel] = mats[a]
    if field_mode == REAL:
        ops = [op.real for op in ops]
    labels = tuple(f"A{a + 1}" for a in range(N))
    return OperatorFamily(tuple(ops), labels, field_mode), expected_skeleton(specs, N)


# --- scrambling --------------------------------------------------------------


def random_conjugator(n: int, cond: float, rng, real: bool = False) -> np.ndarray:
    """Reflections * diag(s) * reflections, with singular values in [1, cond]."""

    def reflections(count):
        q = np.eye(n, dtype=np.complex128)
        for _ in range(count):
            v = rng.standard_normal(n)
            if not real:
                v = v + 1j * rng.standard_normal(n)
            v = v / np.linalg.norm(v)
            q = q - 2.0 * np.outer(q @ v, v.conj())
        return q

    s = np.exp(rng.uniform(0.0, math.log(cond), size=n))
    if n >= 2:
        s[0], s[-1] = 1.0, cond
    k = max(2, min(n, 6))
    out = reflections(k) @ np.diag(s) @ reflections(k)
    return out.real.astype(np.complex128) if real else out


def scramble(fam: OperatorFamily, s: ScrambleSpec) -> OperatorFamily:
    """Permute the basis, conjugate by a shared random ``S``, then add noise."""
    n = fam.n
    real = fam.field_mode == REAL
    prng = np.random.default_rng(s.perm_seed)
    perm = prng.permutation(n)
    crng = np.random.default_rng(s.conj_seed if s.conj_seed is not None else s.perm_seed + 1)
    if s.conj_cond_max == 1.0 and s.noise == 0.0:
        S = np.eye(n)[:, perm]
    else:
        S = np.eye(n)[:, perm] @ random_conjugator(n, s.conj_cond_max, crng, real)
    S_inv = np.linalg.inv(S)
    ops = []
    for op in fam:
        b = S_inv @ op @ S
        if s.noise:
            e = crng.standard_normal((n, n))
            if not real:
                e = e + 1j * crng.standard_normal((n, n))
            b = b + s.noise * e
        ops.append(b.real if real else b)
    return OperatorFamily(tuple(ops), fam.labels, fam.field_mode)


# --- comparison --------------------------------------------------------------


def _actual_signature(block) -> ExpectedBlock:
    if block.kind == CLIFFORD:
        consts = tuple(block.constants[a] for a in block.support)
        return ExpectedBlock(CLIFFORD, tuple(block.support), block.dim, consts)
    if block.kind == SINGLE:
        return ExpectedBlock(SINGLE, tuple(block.support), block.dim)
    return ExpectedBlock(block.kind, tuple(block.support) if block.kind == DEGENERATE else (), block.dim)


def compare_reports(expected: Skeleton, report, rtol: float = 1e-6) -> tuple[bool, str]:
    """Multiset comparison of block inventories; returns (match, diff text)."""
    if (expected.n, expected.N) != (report.n, report.N):
        return False, f"shape mismatch: expected n={expected.n}, N={expected.N}; got n={report.n}, N={report.N}"
    actual = [_actual_signature(b) for b in report.blocks]
    unmatched = list(actual)
    missing = []
    for e in expected.blocks:
        for i, a in enumerate(unmatched):
            if (a.kind, a.support, a.dim) == (e.kind, e.support, e.dim) and (
                e.kind != CLIFFORD or _constants_close(a.constants, e.constants, rtol)
            ):
                del unmatched[i]
                break
        else:
            missing.append(e)
    if not missing and not unmatched:
        return True, ""
    lines = [f"missing: {_describe(b)}" for b in missing]
    lines += [f"unexpected: {_describe(b)}" for b in unmatched]
    return False, "\n".join(lines)


def _describe(b: ExpectedBlock) -> str:
    sup = "{" + ",".join(str(a + 1) for a in b.support) + "}"
    txt = f"{b.kind} support={sup} dim={b.dim}"
    if b.constants:
        txt += " constants=(" + ", ".join(f"{c:.6g}" for c in b.constants) + ")"
    return txt


# --- corpus ------------------------------------------------------------------


@dataclass(frozen=True)
class OracleCase:
    index: int
    specs: tuple[BlockSpec, ...]
    N: int
    field_mode: str
    scramble: ScrambleSpec
    tags: frozenset = frozenset()

    def build(self) -> tuple[OperatorFamily, OperatorFamily, Skeleton]:
        """(unscrambled family, scrambled family, expected skeleton)."""
        fam, skel = build_family(self.specs, self.N, self.field_mode)
        return fam, scramble(fam, self.scramble), skel


_CONSTS_REAL = (-4, -3, -2, -1, 1, 2, 3, 4, 5, 9)
_CONSTS_COMPLEX = (-4, -1, 1, 2, 4, 9, 2 + 1j, -1 + 3j, 1j, -2j)


def _random_constant(rng, field_mode):
    pool = _CONSTS_REAL if field_mode == REAL else _CONSTS_COMPLEX
    return complex(pool[rng.integers(len(pool))])


def _random_spec(rng, N, field_mode, budget, kinds) -> BlockSpec | None:
    mult = 2 if field_mode == REAL else 1
    kind = kinds[rng.integers(len(kinds))]
    seed = int(rng.integers(2**31))
    if kind == KERNEL:
        dim = int(rng.integers(1, 4))
        return BlockSpec(KERNEL, dim, seed=seed) if dim <= budget else None
    if kind == SINGLE:
        a = int(rng.integers(N))
        c = _random_constant(rng, field_mode)
        dim = int(rng.integers(1, 4))
        if field_mode == REAL and c.real < 0:
            dim = 2 * int(rng.integers(1, 3))
        return BlockSpec(SINGLE, dim, (a,), {a: c}, seed) if dim <= budget else None
    if N < 2:
        return None
    m = int(rng.integers(2, N + 1))
    support = tuple(sorted(rng.choice(N, size=m, replace=False).tolist()))
    consts = {a: _random_constant(rng, field_mode) for a in support}
    irrep = 2 ** (m // 2) * mult
    copies = int(rng.integers(1, 3))
    dim = irrep * copies
    if dim > budget:
        dim = irrep
    if dim > budget:
        return None
    return BlockSpec(CLIFFORD, dim, support, consts, seed)


def sample_case(index: int, base_seed: int = 20240517, max_n: int = 32, max_N: int = 5) -> OracleCase:
    """Deterministic random case; the first indices are forced coverage cases."""
    rng = np.random.default_rng([base_seed, index])
    tags = set()
    scr = ScrambleSpec(conj_cond_max=float(rng.uniform(1.0, 50.0)), perm_seed=int(rng.integers(2**31)))
    if index == 0:
        # one-operator family
        specs = (
            BlockSpec(SINGLE, 3, (0,), {0: 4}, 1),
            BlockSpec(SINGLE, 2, (0,), {0: -1}, 2),
            BlockSpec(KERNEL, 2),
        )
        return OracleCase(index, specs, 1, COMPLEX, scr, frozenset({"N=1", "odd-single"}))
    if index == 1:
        # no common kernel
        specs = (
            BlockSpec(CLIFFORD, 4, (0, 1, 2), {0: 1, 1: 2, 2: 3}, 3),
            BlockSpec(SINGLE, 1, (2,), {2: 5}, 4),
        )
        return OracleCase(index, specs, 3, COMPLEX, scr, frozenset({"empty-kernel"}))
    if index == 2:
        # same support, different constants
        specs = (
            BlockSpec(CLIFFORD, 2, (0, 1), {0: 1, 1: 1}, 5),
            BlockSpec(CLIFFORD, 4, (0, 1), {0: 4, 1: -1}, 6),
            BlockSpec(KERNEL, 1),
        )
        return OracleCase(index, specs, 2, COMPLEX, scr, frozenset({"same-support-multi"}))
    if index == 3:
        specs = (
            BlockSpec(SINGLE, 3, (1,), {1: 2}, 7),
            BlockSpec(CLIFFORD, 2, (0, 1), {0: 1, 1: 3}, 8),
        )
        return OracleCase(index, specs, 2, COMPLEX, scr, frozenset({"odd-single"}))
    if index == 4:
        # nilpotent summand: the degenerate regime
        specs = (
            BlockSpec(CLIFFORD, 2, (0, 1), {0: 1, 1: 4}, 9),
            BlockSpec(DEGENERATE, 2, (1,), {1: 0}, 10),
            BlockSpec(SINGLE, 1, (0,), {0: 2}, 11),
        )
        return OracleCase(index, specs, 2, COMPLEX, scr, frozenset({"degenerate"}))

    field_mode = REAL if rng.random() < 0.3 else COMPLEX
    N = int(rng.integers(1, max_N + 1))
    kinds = (KERNEL, SINGLE, CLIFFORD, CLIFFORD, CLIFFORD)
    specs = []
    budget = int(rng.integers(4, max_n + 1))
    for _ in range(int(rng.integers(1, 6))):
        s = _random_spec(rng, N, field_mode, budget, kinds)
        if s is not None:
            specs.append(s)
            budget -= s.dim
        if budget <= 0:
            break
    if not specs:
        specs.append(BlockSpec(KERNEL, 1))
    if N == 1:
        tags.add("N=1")
    if not any(s.kind == KERNEL for s in specs):
        tags.add("empty-kernel")
    if any(s.kind == SINGLE and s.dim % 2 for s in specs):
        tags.add("odd-single")
    return OracleCase(index, tuple(specs), N, field_mode, scr, frozenset(tags))


def corpus(size: int = 200, base_seed: int = 20240517) -> list[OracleCase]:
    return [sample_case(i, base_seed) for i in range(size)]


# --- the worked 20-dimensional example --------------------------------------


def worked_example() -> tuple[list[BlockSpec], list[list[int]]]:
    """Specs and 0-based basis placement for the N=5, n=20 worked example.

    Constants are free choices; the two three-generator blocks get distinct
    constant tuples so they remain separate summands, the six-dimensional
    two-generator block uses one tuple throughout.
    """
    specs = [
        BlockSpec(KERNEL, 1),
        BlockSpec(SINGLE, 1, (3,), {3: 4}, 1),
        BlockSpec(SINGLE, 1, (3,), {3: 1}, 2),
        BlockSpec(SINGLE, 1, (1,), {1: 9}, 3),
        BlockSpec(CLIFFORD, 2, (2, 4), {2: 4, 4: 2}, 4),
        BlockSpec(CLIFFORD, 6, (1, 3), {1: 1, 3: 9}, 5),
        BlockSpec(CLIFFORD, 2, (0, 2, 4), {0: 1, 2: 1, 4: 1}, 6),
        BlockSpec(CLIFFORD, 2, (0, 2, 4), {0: 4, 2: 1, 4: 2}, 7),
        BlockSpec(CLIFFORD, 4, (0, 2, 3, 4), {0: 1, 2: 2, 3: 3, 4: 5}, 8),
    ]
    one_based = [
        [18],
        [1],
        [20],
        [9],
        [2, 4],
        [3, 7, 11, 13, 15, 17],
        [6, 8],
        [10, 14],
        [5, 12, 16, 19],
    ]
    return specs, [[i - 1 for i in p] for p in one_based]


def build_worked_example(field_mode: str = COMPLEX) -> tuple[OperatorFamily, Skeleton]:
    specs, placement = worked_example()
    return build_family(specs, 5, field_mode, placement)
