"""Dense complex linear-algebra foundation and the tolerance policy.

All matrices are handled as ``complex128`` numpy arrays regardless of the
declared field of the input; realness is tracked by the callers.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from .errors import IllConditionedWarning, RankDeficientBasis

ILL_CONDITIONED = 1e8


@dataclass(frozen=True)
class TolerancePolicy:
    """Thresholds for numerical zero and eigenvalue equality.

    ``rel_zero`` and ``eig_cluster`` are relative; they are multiplied by
    ``scale`` (the largest operator 2-norm in the family being processed).
    """

    rel_zero: float = 1e-9
    eig_cluster: float = 1e-7
    scale: float = 1.0

    def __post_init__(self):
        if not (0 < self.rel_zero <= self.eig_cluster < 1):
            raise ValueError(
                f"need 0 < rel_zero <= eig_cluster < 1, got "
                f"{self.rel_zero}, {self.eig_cluster}"
            )
        if not np.isfinite(self.scale) or self.scale <= 0:
            raise ValueError(f"scale must be positive and finite, got {self.scale}")

    @property
    def zero(self) -> float:
        """Absolute threshold below which a first-order quantity is zero."""
        return self.rel_zero * self.scale

    @property
    def cluster_radius(self) -> float:
        return self.eig_cluster * self.scale

    def with_scale(self, scale: float) -> "TolerancePolicy":
        return replace(self, scale=float(scale) if scale > 0 else 1.0)

    def for_ops(self, ops: Iterable[np.ndarray]) -> "TolerancePolicy":
        """Policy whose scale is the max operator norm of ``ops`` (1.0 if all vanish)."""
        norms = [operator_norm(op) for op in ops]
        return self.with_scale(max(norms, default=0.0))

    def squared(self) -> "TolerancePolicy":
        """Policy for quantities quadratic in the operators (squares, products)."""
        return replace(self, scale=self.scale**2)

    @classmethod
    def from_rel_zero(cls, rel_zero: float, scale: float = 1.0) -> "TolerancePolicy":
        """Single-knob constructor; keeps the default 100x cluster/zero ratio."""
        return cls(rel_zero=rel_zero, eig_cluster=min(100 * rel_zero, 0.5), scale=scale)


def as_matrix(m, *, square: bool = True) -> np.ndarray:
    """Coerce ``m`` to a finite 2-d complex array."""
    a = np.array(m, dtype=np.complex128)
    if a.ndim != 2 or 0 in a.shape:
        raise ValueError(f"expected a non-empty 2-d matrix, got shape {a.shape}")
    if square and a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix contains NaN or infinite entries")
    return a


def frobenius_norm(m) -> float:
    return float(np.sqrt(np.sum(np.abs(np.asarray(m, dtype=np.complex128)) ** 2)))


def operator_norm(m) -> float:
    m = np.asarray(m)
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, 2))


def principal_sqrt(c: complex) -> complex:
    """Square root with argument in (-pi/2, pi/2]; negative reals map to +i*sqrt(|c|)."""
    c = complex(c)
    if c.imag == 0.0:
        # drop the sign of a zero imaginary part so -x-0j and -x+0j agree
        c = complex(c.real, 0.0)
    r = complex(np.sqrt(c))
    if r.real == 0.0 and r.imag < 0:
        r = -r
    return r


def cluster_values(values: Sequence[complex], radius: float) -> list[list[int]]:
    """Single-linkage clusters of complex scalars; returns index groups.

    Groups are ordered by their mean (real part, then imaginary part), and
    indices inside a group are ascending.
    """
    vals = np.asarray(values, dtype=np.complex128)
    n = len(vals)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    if n:
        close = np.abs(vals[:, None] - vals[None, :]) <= radius
        for i, j in zip(*np.nonzero(np.triu(close, 1))):
            ri, rj = find(i), find(j)
            if ri != rj:
                parent[max(ri, rj)] = min(ri, rj)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    out = list(groups.values())
    out.sort(key=lambda g: (round_key(vals[g].mean()), g[0]))
    return out


def round_key(z: complex, digits: int = 9) -> tuple[float, float]:
    """Sort key for a complex scalar that is stable under rounding noise."""
    z = complex(z)
    return (round(z.real, digits), round(z.imag, digits))


def orthonormalize(b: np.ndarray) -> np.ndarray:
    q, _ = np.linalg.qr(b)
    return q


def numerical_rank(m: np.ndarray, threshold: float) -> int:
    if m.size == 0:
        return 0
    s = np.linalg.svd(m, compute_uv=False)
    return int(np.sum(s > threshold))


def kernel_basis(m, tol: TolerancePolicy, threshold: float | None = None) -> np.ndarray:
    """Orthonormal basis of the numerical null space of ``m``.

    A right singular vector belongs to the kernel when its singular value is
    at most ``threshold`` (default ``tol.rel_zero * tol.scale``).
    """
    m = np.asarray(m, dtype=np.complex128)
    if threshold is None:
        threshold = tol.zero
    n = m.shape[1]
    _, s, vh = np.linalg.svd(m)
    s_full = np.zeros(n)
    s_full[: len(s)] = s
    mask = s_full <= threshold
    return vh.conj().T[:, mask]


def kernel_gap(m, tol: TolerancePolicy) -> int:
    """dim Ker(M^2) - dim Ker(M); zero for every diagonalizable ``m``."""
    m = np.asarray(m, dtype=np.complex128)
    k1 = kernel_basis(m, tol).shape[1]
    k2 = kernel_basis(m @ m, tol.squared()).shape[1]
    return max(k2 - k1, 0)


@dataclass(frozen=True)
class EigResult:
    values: np.ndarray
    vectors: np.ndarray
    ok: bool
    condition: float
    clusters: tuple[tuple[complex, tuple[int, ...]], ...]
    residual: float

    def __iter__(self):
        # allows ``values, vectors, ok = eig(...)``
        return iter((self.values, self.vectors, self.ok))


def eig(m, tol: TolerancePolicy, *, warn: bool = True) -> EigResult:
    """Clustered eigendecomposition with a diagonalizability verdict.

    Eigenvalues closer than ``tol.eig_cluster * tol.scale`` (single linkage)
    are replaced by their mean.  Each cluster's eigenspace is taken as the
    span of the right singular vectors of ``M - mean*I`` belonging to the
    cluster-size smallest singular values; ``ok`` requires the resulting
    reconstruction residual to stay within ``rel_zero * scale * n``, the
    assembled basis to have full rank, and Ker(M) = Ker(M^2).

    Columns of ``vectors`` have unit norm and are orthonormal within a cluster.
    """
    m = as_matrix(m)
    n = m.shape[0]
    raw = np.linalg.eigvals(m)
    groups = cluster_values(raw, tol.cluster_radius)

    values = np.empty(n, dtype=np.complex128)
    vectors = np.empty((n, n), dtype=np.complex128)
    clusters = []
    col = 0
    eye = np.eye(n)
    for g in groups:
        rep = complex(raw[g].mean())
        k = len(g)
        _, _, vh = np.linalg.svd(m - rep * eye)
        vectors[:, col : col + k] = vh[n - k :].conj().T
        values[col : col + k] = rep
        clusters.append((rep, tuple(range(col, col + k))))
        col += k

    residual = frobenius_norm(m @ vectors - vectors * values[None, :])
    s = np.linalg.svd(vectors, compute_uv=False)
    condition = float(s[0] / s[-1]) if s[-1] > 0 else float("inf")
    full_rank = s[-1] > tol.rel_zero * s[0]
    ok = bool(
        residual <= tol.zero * n and full_rank and kernel_gap(m, tol) == 0
    )
    if ok and warn and condition > ILL_CONDITIONED:
        warnings.warn(
            f"eigenvector matrix condition {condition:.3g} exceeds {ILL_CONDITIONED:g}",
            IllConditionedWarning,
            stacklevel=2,
        )
    return EigResult(values, vectors, ok, condition, tuple(clusters), residual)


def restrict(m, basis, tol: TolerancePolicy) -> tuple[np.ndarray, float]:
    """Matrix of ``m`` in the column basis ``basis`` plus the invariance leak.

    Solves ``basis @ R ~= m @ basis`` in the least-squares sense; the leak is
    ``||m B - B R||_F / (||m||_2 + 1)`` and vanishes iff span(B) is invariant.
    """
    m = np.asarray(m, dtype=np.complex128)
    b = np.asarray(basis, dtype=np.complex128)
    if b.ndim != 2 or b.shape[0] != m.shape[0]:
        raise ValueError(f"basis shape {b.shape} incompatible with {m.shape}")
    if b.shape[1] == 0:
        return np.zeros((0, 0), dtype=np.complex128), 0.0
    s = np.linalg.svd(b, compute_uv=False)
    if s[-1] <= tol.rel_zero * s[0] or b.shape[1] > b.shape[0]:
        raise RankDeficientBasis("basis columns are not linearly independent")
    mb = m @ b
    if b.shape[0] == b.shape[1]:
        r = np.linalg.solve(b, mb)
    else:
        r, *_ = np.linalg.lstsq(b, mb, rcond=None)
    leak = frobenius_norm(mb - b @ r) / (operator_norm(m) + 1.0)
    return r, leak


def is_zero(m, tol: TolerancePolicy) -> bool:
    m = np.asarray(m)
    return m.size == 0 or frobenius_norm(m) <= tol.zero * max(m.shape[0], 1)


def anticommutator(a, b):
    return a @ b + b @ a


def commutator(a, b):
    return a @ b - b @ a
