"""Sub-stochastic pair operators built from the one-block coupling.

For a kernel ``K`` and an ordered pair of states ``(x1, x2)`` the operator
row is ``(1 - a) * phi1 (x) phi2`` where ``a`` is the overlap mass of the two
rows and ``phi1``, ``phi2`` are the normalized residual kernels. Its powers
bound the probability that the coupled pair has not merged yet.

Pair indexing is row-major: ``(x1, x2) -> x1 * n + x2`` on the full square;
the off-diagonal domain keeps the same order with diagonal pairs removed.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .chain import ChainSpec, m_step_kernel
from .errors import DiagonalPair, IndexOutOfRange, NonFinite, ValidationError

FULL = "full"
OFF_DIAGONAL = "offdiag"

# residual mass at or below this counts as certain coupling
COUPLED_TOL = 1e-14


@dataclass(frozen=True)
class ResidualKernels:
    """Laws of the next states of a pair that fails to couple.

    When ``coupled`` is true the rows overlap completely and ``phi1``/``phi2``
    are zero vectors. When ``alpha == 0`` they are the kernel rows themselves.
    ``overlap`` is the normalized common part, or None when ``alpha == 0``.
    """

    phi1: np.ndarray
    phi2: np.ndarray
    alpha: float
    coupled: bool
    overlap: np.ndarray | None


def residual_kernels(K, x1: int, x2: int) -> ResidualKernels:
    K = np.asarray(K, dtype=float)
    n = K.shape[0]
    for x in (x1, x2):
        if not 0 <= x < n:
            raise IndexOutOfRange(f"state {x} outside 0..{n - 1}")
    if x1 == x2:
        raise DiagonalPair(x1)
    common = np.minimum(K[x1], K[x2])
    alpha = min(1.0, float(common.sum()))
    r1 = K[x1] - common
    r2 = K[x2] - common
    m1, m2 = float(r1.sum()), float(r2.sum())
    if min(m1, m2) <= COUPLED_TOL:
        zero = np.zeros(n)
        return ResidualKernels(zero, zero.copy(), alpha, True, common / common.sum())
    if abs(m1 - m2) > 1e-12:
        raise ValidationError(f"residual masses {m1!r} and {m2!r} disagree; rows of K do not sum to 1")
    if alpha == 0.0:
        return ResidualKernels(K[x1].copy(), K[x2].copy(), 0.0, False, None)
    return ResidualKernels(r1 / m1, r2 / m2, alpha, False, common / alpha)


@dataclass(frozen=True)
class PairOperator:
    n: int
    domain: str
    entries: np.ndarray
    m: int
    t: int = 0

    @property
    def pairs(self) -> list:
        return pair_list(self.n, self.domain)

    def index(self, x1: int, x2: int) -> int:
        if self.domain == FULL:
            return x1 * self.n + x2
        if x1 == x2:
            raise DiagonalPair(x1)
        return x1 * (self.n - 1) + (x2 if x2 < x1 else x2 - 1)


def pair_list(n: int, domain: str = FULL) -> list:
    return [(a, b) for a in range(n) for b in range(n) if domain == FULL or a != b]


def kernel_pair_matrix(K) -> np.ndarray:
    """Full-square pair operator (``n^2 x n^2``) of a single kernel."""
    K = np.asarray(K, dtype=float)
    n = K.shape[0]
    V = np.zeros((n * n, n * n))
    for a in range(n):
        for b in range(n):
            if a == b:
                continue
            res = residual_kernels(K, a, b)
            if res.coupled:
                continue
            if res.alpha == 0.0:
                row = np.outer(K[a], K[b])
            else:
                r1 = K[a] - np.minimum(K[a], K[b])
                r2 = K[b] - np.minimum(K[a], K[b])
                row = np.outer(r1, r2) / (0.5 * (r1.sum() + r2.sum()))
            V[a * n + b] = row.ravel()
    return V


def _restrict(V_full: np.ndarray, n: int) -> np.ndarray:
    keep = np.array([a * n + b for a, b in pair_list(n, OFF_DIAGONAL)], dtype=int)
    return V_full[np.ix_(keep, keep)]


def build_pair_operator(chain: ChainSpec, t: int, m: int, domain: str = OFF_DIAGONAL) -> PairOperator:
    if domain not in (FULL, OFF_DIAGONAL):
        raise ValidationError(f"unknown pair domain {domain!r}")
    K = m_step_kernel(chain, t, m)
    n = K.shape[0]
    V = kernel_pair_matrix(K)
    if domain == OFF_DIAGONAL:
        V = _restrict(V, n)
    return PairOperator(n, domain, V, m, 0 if chain.is_homogeneous else t)


def operator_norm(V) -> float:
    """Max row sum (the sup-norm operator norm of a nonnegative matrix)."""
    A = V.entries if isinstance(V, PairOperator) else np.asarray(V, dtype=float)
    if A.size == 0:
        return 0.0
    return float(np.abs(A).sum(axis=1).max())


def spectral_radius(A, tol: float = 1e-10, max_squarings: int = 60) -> float:
    """Spectral radius by the Gelfand formula ``lim ||A^N||^(1/N)``.

    ``A`` is squared repeatedly (``N = 2^k``) and renormalized after every
    product; the mean log-scale ``log ||A^N|| / N`` is accumulated directly so
    neither overflow nor underflow occurs. The estimates are non-increasing
    and never below the true radius. Iteration stops once two consecutive
    estimates move by less than `tol`.
    """
    B = A.entries if isinstance(A, PairOperator) else np.array(A, dtype=float)
    if B.ndim != 2 or B.shape[0] != B.shape[1]:
        raise ValidationError(f"spectral radius needs a square matrix, got shape {B.shape}")
    if B.size == 0:
        return 0.0
    s = float(np.abs(B).sum(axis=1).max())
    if not math.isfinite(s):
        raise NonFinite("matrix has non-finite entries")
    if s == 0.0:
        return 0.0
    mean_log = math.log(s)
    B = B / s
    estimate = s
    calm = 0
    for k in range(1, max_squarings + 1):
        B = B @ B
        s = float(np.abs(B).sum(axis=1).max())
        if s == 0.0:
            return 0.0
        if not math.isfinite(s):
            raise NonFinite(f"overflow after {k} squarings")
        B /= s
        mean_log += math.log(s) / 2.0**k
        new = math.exp(mean_log)
        calm = calm + 1 if abs(new - estimate) < tol else 0
        estimate = new
        if calm >= 2:
            break
    return estimate


def spectral_bound(chain: ChainSpec, m: int, n: int, eps: float = 1e-6) -> float:
    """``(r(V^(m)) + eps)^floor(n/m)``; dominates the TV diameter only for large n."""
    if not chain.is_homogeneous:
        raise ValidationError("spectral bound is defined for homogeneous chains only")
    if eps < 0:
        raise ValidationError("eps must be >= 0")
    r = spectral_radius(build_pair_operator(chain, 0, m, OFF_DIAGONAL).entries)
    if r + eps >= 1.0:
        warnings.warn(f"r(V^({m})) + eps = {r + eps:.6g} >= 1; the bound is trivial", RuntimeWarning)
    return (r + eps) ** (n // m)


def pointwise_bound(chain: ChainSpec, m: int, n: int) -> np.ndarray:
    """``(V_0 V_m ... V_{(n-1)m} 1)(x1, x2)`` arranged as an ``n x n`` matrix.

    Entry ``(x1, x2)`` bounds the total variation distance at time ``n*m``
    between the chains started at `x1` and `x2`.
    """
    if m < 1 or n < 0:
        raise ValidationError("need m >= 1 and n >= 0")
    size = chain.n_states
    chain.check_horizon(n * m)
    v = np.ones(size * size)
    if chain.is_homogeneous:
        V = build_pair_operator(chain, 0, m, FULL).entries
        for _ in range(n):
            v = V @ v
    else:
        for k in reversed(range(n)):
            v = build_pair_operator(chain, k * m, m, FULL).entries @ v
    out = v.reshape(size, size)
    np.fill_diagonal(out, 0.0)
    return out


def product_bound(chain: ChainSpec, m: int, n: int) -> tuple:
    """Return ``(norm_product, operator_product_sup)`` over `n` blocks of `m` steps.

    The first is the product of the block operator norms, the second the
    largest entry of the ordered operator product applied to the ones vector.
    """
    if m < 1 or n < 0:
        raise ValidationError("need m >= 1 and n >= 0")
    chain.check_horizon(n * m)
    norm_product = 1.0
    for k in range(n):
        norm_product *= operator_norm(build_pair_operator(chain, k * m, m, OFF_DIAGONAL))
    if chain.n_states < 2:
        return norm_product, 0.0
    return norm_product, float(pointwise_bound(chain, m, n).max())
