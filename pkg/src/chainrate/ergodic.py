"""Markov-Dobrushin ergodic coefficients and the MD-m convergence bounds."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chain import ChainSpec, m_step_kernel
from .errors import IndexOutOfRange, ValidationError


@dataclass(frozen=True)
class MdCoefficients:
    """Overlap coefficients of the m-step kernel started at time `t`.

    ``pairwise[x, x']`` is the overlap mass ``sum_y min(K[x, y], K[x', y])``
    and ``alpha`` its minimum over distinct pairs. ``delta`` is computed as the
    largest half-L1 distance between kernel rows, which equals ``1 - alpha``
    but keeps full relative precision when the rows are nearly equal.
    """

    m: int
    t: int
    alpha: float
    delta: float
    pairwise: np.ndarray


def _check_state(K, x):
    if not 0 <= x < K.shape[0]:
        raise IndexOutOfRange(f"state {x} outside 0..{K.shape[0] - 1}")


def pairwise_alpha(K, x: int, x2: int) -> float:
    K = np.asarray(K, dtype=float)
    _check_state(K, x)
    _check_state(K, x2)
    if x == x2:
        return 1.0
    return min(1.0, float(np.minimum(K[x], K[x2]).sum()))


def pairwise_table(K) -> np.ndarray:
    K = np.asarray(K, dtype=float)
    table = np.minimum(K[:, None, :], K[None, :, :]).sum(axis=2)
    np.fill_diagonal(table, 1.0)
    return np.minimum(table, 1.0)


def pairwise_delta_table(K) -> np.ndarray:
    K = np.asarray(K, dtype=float)
    return np.minimum(0.5 * np.abs(K[:, None, :] - K[None, :, :]).sum(axis=2), 1.0)


def kernel_coefficients(K, m: int = 1, t: int = 0) -> MdCoefficients:
    K = np.asarray(K, dtype=float)
    table = pairwise_table(K)
    n = K.shape[0]
    if n == 1:
        return MdCoefficients(m, t, 1.0, 0.0, table)
    off = ~np.eye(n, dtype=bool)
    return MdCoefficients(
        m=m,
        t=t,
        alpha=float(table[off].min()),
        delta=float(pairwise_delta_table(K)[off].max()),
        pairwise=table,
    )


def md_coefficients(chain: ChainSpec, t: int, m: int) -> MdCoefficients:
    return kernel_coefficients(m_step_kernel(chain, t, m), m, t)


def md_delta(chain: ChainSpec, t: int, m: int) -> float:
    """``1 - alpha_t^(m)``; equal to 1 for ``m == 0`` (no step taken)."""
    if m == 0:
        return 1.0
    return md_coefficients(chain, t, m).delta


def md_bound(chain: ChainSpec, m: int, n: int) -> float:
    """Upper bound on :func:`~chainrate.chain.tv_diameter` at time `n` from
    m-step ergodic coefficients.

    Homogeneous chains use ``(1 - alpha^(m))^floor(n/m)``. Time-varying chains
    multiply the coefficients of the ``floor(n/m)`` full blocks starting at
    ``0, m, 2m, ...`` and one trailing block of ``n mod m`` steps.
    """
    if m < 1:
        raise ValidationError(f"step count must be >= 1, got {m}")
    if n < 0:
        raise ValidationError(f"time must be >= 0, got {n}")
    blocks, rest = divmod(n, m)
    if chain.is_homogeneous:
        if blocks == 0:
            return 1.0
        return md_delta(chain, 0, m) ** blocks
    chain.check_horizon(n)
    bound = 1.0
    for k in range(blocks):
        bound *= md_delta(chain, k * m, m)
    return bound * md_delta(chain, blocks * m, rest)


def lambda_symmetrized_alpha(K, x: int, x2: int) -> float:
    """Overlap of rows `x`, `x2` computed through densities with respect to
    the summed measure ``K[x] + K[x2]``.

    Used only as a cross-check on :func:`pairwise_alpha`.
    """
    K = np.asarray(K, dtype=float)
    lam = K[x] + K[x2]
    support = lam > 0
    d1 = K[x][support] / lam[support]
    d2 = K[x2][support] / lam[support]
    return float((np.minimum(d1, d2) * lam[support]).sum())
