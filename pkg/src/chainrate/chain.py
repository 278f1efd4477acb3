"""Finite Markov chains: validation, kernel algebra, total variation.

Transition matrices are plain read-only ``float64`` arrays; states are
0-based indices. :func:`tv_diameter` is the exact reference that every
convergence bound in this package is compared against.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import gcd

import numpy as np

from .errors import (
    HorizonExceeded,
    LengthMismatch,
    NegativeEntry,
    NonSquare,
    NotPrimitive,
    RowSumViolation,
    ValidationError,
)

ROW_SUM_TOL = 1e-12

HOMOGENEOUS = "homogeneous"
CYCLIC = "cyclic"
FINITE = "finite"


def validate_matrix(raw) -> np.ndarray:
    """Check that `raw` is row-stochastic and return it as a frozen array.

    Rows are not renormalized: a row summing to ``1 + 2e-12`` is rejected.
    """
    P = np.array(raw, dtype=float)
    if P.ndim != 2 or P.shape[0] != P.shape[1] or P.shape[0] < 1:
        raise NonSquare(P.shape)
    bad = np.argwhere(~(P >= 0))
    if bad.size:
        i, j = (int(v) for v in bad[0])
        raise NegativeEntry(i, j, float(P[i, j]))
    sums = P.sum(axis=1)
    for i, total in enumerate(sums):
        if not abs(total - 1.0) <= ROW_SUM_TOL:
            raise RowSumViolation(i, float(total))
    P.setflags(write=False)
    return P


def validate_distribution(raw, n: int | None = None) -> np.ndarray:
    p = np.array(raw, dtype=float)
    if p.ndim != 1:
        raise ValidationError(f"distribution must be a vector, got shape {p.shape}")
    if n is not None and p.shape[0] != n:
        raise LengthMismatch(f"distribution has {p.shape[0]} entries, chain has {n} states")
    if not np.all(p >= 0):
        raise ValidationError("distribution has negative entries")
    if not abs(p.sum() - 1.0) <= ROW_SUM_TOL:
        raise ValidationError(f"distribution sums to {p.sum()!r}")
    return p


def point_mass(n: int, x: int) -> np.ndarray:
    p = np.zeros(n)
    p[x] = 1.0
    return p


@dataclass(frozen=True)
class ChainSpec:
    """A homogeneous chain or a time-indexed sequence of one-step matrices.

    ``schedule`` is ``"homogeneous"`` (one matrix), ``"cyclic"``
    (``P_t = matrices[t % len]``) or ``"finite"`` (``P_t`` defined only for
    ``t < len``).
    """

    matrices: tuple
    schedule: str = HOMOGENEOUS
    name: str = ""

    def __post_init__(self):
        if not self.matrices:
            raise ValidationError("chain needs at least one transition matrix")
        if self.schedule not in (HOMOGENEOUS, CYCLIC, FINITE):
            raise ValidationError(f"unknown schedule {self.schedule!r}")
        if self.schedule == HOMOGENEOUS and len(self.matrices) != 1:
            raise ValidationError("homogeneous chain takes exactly one matrix")
        n = self.matrices[0].shape[0]
        for k, P in enumerate(self.matrices):
            if P.shape != (n, n):
                raise ValidationError(f"matrix {k} has shape {P.shape}, expected {(n, n)}")

    @classmethod
    def homogeneous(cls, P, name: str = "") -> "ChainSpec":
        return cls((validate_matrix(P),), HOMOGENEOUS, name)

    @classmethod
    def time_varying(cls, matrices, schedule: str = CYCLIC, name: str = "") -> "ChainSpec":
        if schedule not in (CYCLIC, FINITE):
            raise ValidationError(f"time-varying schedule must be cyclic or finite, got {schedule!r}")
        return cls(tuple(validate_matrix(P) for P in matrices), schedule, name)

    @property
    def n_states(self) -> int:
        return self.matrices[0].shape[0]

    @property
    def is_homogeneous(self) -> bool:
        return self.schedule == HOMOGENEOUS

    @property
    def horizon(self) -> int | None:
        """Number of defined one-step kernels, or None if unbounded."""
        return len(self.matrices) if self.schedule == FINITE else None

    @property
    def matrix(self) -> np.ndarray:
        if not self.is_homogeneous:
            raise ValidationError("time-varying chain has no single transition matrix")
        return self.matrices[0]

    def step_matrix(self, t: int) -> np.ndarray:
        if t < 0:
            raise ValidationError(f"time index must be >= 0, got {t}")
        if self.schedule == FINITE and t >= len(self.matrices):
            raise HorizonExceeded(t + 1, len(self.matrices))
        return self.matrices[t % len(self.matrices)]

    def check_horizon(self, end: int) -> None:
        if self.schedule == FINITE and end > len(self.matrices):
            raise HorizonExceeded(end, len(self.matrices))


def m_step_kernel(chain: ChainSpec, t: int, m: int) -> np.ndarray:
    """Transition matrix from time `t` to `t + m`: ``P_t P_{t+1} ... P_{t+m-1}``."""
    if m < 1:
        raise ValidationError(f"step count must be >= 1, got {m}")
    if chain.is_homogeneous:
        return np.linalg.matrix_power(chain.matrix, m)
    chain.check_horizon(t + m)
    K = chain.step_matrix(t)
    for s in range(t + 1, t + m):
        K = K @ chain.step_matrix(s)
    return K


def marginal(chain: ChainSpec, initial, n: int, t0: int = 0) -> np.ndarray:
    """Law at time ``t0 + n`` of the chain started from `initial` at `t0`."""
    mu = np.asarray(initial, dtype=float)
    if mu.shape != (chain.n_states,):
        raise LengthMismatch(f"initial law has shape {mu.shape}, chain has {chain.n_states} states")
    chain.check_horizon(t0 + n)
    for s in range(t0, t0 + n):
        mu = mu @ chain.step_matrix(s)
    return mu


def total_variation(p, q) -> float:
    """Set-supremum distance ``sup_A |p(A) - q(A)| = 0.5 * sum |p - q|``."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise LengthMismatch(f"cannot compare laws of shapes {p.shape} and {q.shape}")
    return min(1.0, 0.5 * float(np.abs(p - q).sum()))


def row_tv_diameter(K: np.ndarray) -> float:
    """Largest total variation distance between two rows of `K`."""
    K = np.asarray(K, dtype=float)
    if K.shape[0] < 2:
        return 0.0
    diffs = 0.5 * np.abs(K[:, None, :] - K[None, :, :]).sum(axis=2)
    return min(1.0, float(diffs.max()))


def tv_diameter(chain: ChainSpec, n: int) -> float:
    """``max_{x,x'} d(law_n from x, law_n from x')`` computed by brute force."""
    if n < 0:
        raise ValidationError(f"time must be >= 0, got {n}")
    chain.check_horizon(n)
    laws = np.eye(chain.n_states)
    for s in range(n):
        laws = laws @ chain.step_matrix(s)
    return row_tv_diameter(laws)


def wielandt_exponent(n: int) -> int:
    return n * n - 2 * n + 2


def _bool_matmul(A, B):
    return (A.astype(np.int64) @ B.astype(np.int64)) > 0


def _bool_power(B, k):
    result = np.eye(B.shape[0], dtype=bool)
    base = B.copy()
    while k:
        if k & 1:
            result = _bool_matmul(result, base)
        base = _bool_matmul(base, base)
        k >>= 1
    return result


def _period(adj: np.ndarray) -> int:
    # BFS levels from state 0; the period is the gcd of level[u] + 1 - level[v] over edges.
    n = adj.shape[0]
    level = [-1] * n
    level[0] = 0
    frontier = [0]
    while frontier:
        nxt = []
        for u in frontier:
            for v in np.flatnonzero(adj[u]):
                if level[v] < 0:
                    level[v] = level[u] + 1
                    nxt.append(int(v))
        frontier = nxt
    d = 0
    for u, v in zip(*np.nonzero(adj)):
        d = gcd(d, abs(level[u] + 1 - level[v]))
    return d


def check_primitive(P: np.ndarray) -> None:
    """Raise :class:`NotPrimitive` unless ``P^k > 0`` for the Wielandt exponent k."""
    adj = np.asarray(P) > 0
    n = adj.shape[0]
    if _bool_power(adj, wielandt_exponent(n)).all():
        return
    reach = _bool_power(adj | np.eye(n, dtype=bool), max(n - 1, 1))
    if not reach.all():
        i, j = (int(v) for v in np.argwhere(~reach)[0])
        raise NotPrimitive("reducible", unreachable=(i, j))
    raise NotPrimitive("periodic", period=_period(adj))


def is_primitive(P: np.ndarray) -> bool:
    try:
        check_primitive(P)
    except NotPrimitive:
        return False
    return True


def stationary_distribution(P) -> np.ndarray:
    """Invariant law of a primitive matrix by a direct linear solve.

    The last balance equation of ``(P^T - I) pi = 0`` is replaced by the
    normalization ``sum(pi) = 1``.
    """
    P = np.asarray(P, dtype=float)
    check_primitive(P)
    n = P.shape[0]
    A = P.T - np.eye(n)
    A[-1, :] = 1.0
    b = np.zeros(n)
    b[-1] = 1.0
    pi = np.linalg.solve(A, b)
    # one refinement step against the full balance system
    r = pi - pi @ P
    r_sum = 1.0 - pi.sum()
    rhs = np.concatenate([r[:-1], [r_sum]])
    pi = pi + np.linalg.solve(A, rhs)
    return np.clip(pi, 0.0, None) / np.clip(pi, 0.0, None).sum()
