"""Monte Carlo realization of the block Markov coupling.

The coupled process carries four components ``(eta1, eta2, xi, zeta)``.
While ``zeta == 1`` the pair has not merged and the observed states are
``(eta1, eta2)``; once ``zeta == 0`` both copies sit at ``xi`` forever.
Over one block of ``m`` steps with kernel ``K`` and overlap ``a`` of the rows
``K[eta1]``, ``K[eta2]``:

* ``eta1``, ``eta2`` move independently by the residual kernels,
* ``zeta`` drops to 0 with probability ``a`` (and stays 0 once there),
* ``xi`` is drawn from the normalized overlap if the pair was not merged,
  otherwise it moves by ``K[xi]``.

Each copy's observed state is then a Markov chain with kernel ``K``, and the
non-merge probability after ``n`` blocks is exactly the DP value
:func:`noncoupling_dp`; :func:`enumerate_coupling` recomputes it by brute
force over the full four-component state space.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import NamedTuple

import numpy as np

from .chain import ChainSpec, m_step_kernel, validate_distribution
from .errors import LengthMismatch, ValidationError
from .pairop import COUPLED_TOL, FULL, build_pair_operator, residual_kernels

CHUNK = 1024
UNIFORMS_PER_STEP = 4
STREAM_ALGORITHM = (
    "numpy PCG64 seeded by SeedSequence([seed, chunk]); trial k belongs to chunk k // 1024 "
    "at offset k % 1024; each chunk draws a (1024, blocks + 1, 4) float64 uniform array in C order"
)


class CouplingState(NamedTuple):
    eta1: int
    eta2: int
    xi: int
    zeta: int


@dataclass
class CouplingStats:
    trials: int
    steps: int
    m: int
    seed: int
    p_not_coupled: list
    marginal_hist1: list
    marginal_hist2: list
    zeta_monotone: bool = True
    rng: str = STREAM_ALGORITHM
    chain: str = ""
    mu1: list = field(default_factory=list)
    mu2: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def _cdf(p):
    """Cumulative table such that ``count(cdf <= u)`` samples index from p for u in [0, 1)."""
    p = np.asarray(p, dtype=float)
    cdf = np.cumsum(p) / p.sum()
    last = np.flatnonzero(p > 0)[-1]
    cdf[last:] = 1.0
    return cdf


def _draw(cdf_rows, u):
    return (cdf_rows <= u[:, None]).sum(axis=1)


@dataclass(frozen=True)
class _BlockTables:
    """Sampling tables of one block kernel, indexed by pair ``a * n + b``."""

    n: int
    alpha: np.ndarray
    phi1: np.ndarray
    phi2: np.ndarray
    overlap: np.ndarray
    kernel: np.ndarray


def _block_tables(K) -> _BlockTables:
    K = np.asarray(K, dtype=float)
    n = K.shape[0]
    alpha = np.ones(n * n)
    phi1 = np.zeros((n * n, n))
    phi2 = np.zeros((n * n, n))
    overlap = np.zeros((n * n, n))
    kernel = np.array([_cdf(row) for row in K])
    for a in range(n):
        for b in range(n):
            i = a * n + b
            if a == b:
                phi1[i] = phi2[i] = overlap[i] = kernel[a]
                continue
            res = residual_kernels(K, a, b)
            if res.coupled:
                # certain coupling: both eta components move by K[a], independently
                phi1[i] = phi2[i] = overlap[i] = kernel[a]
                continue
            alpha[i] = res.alpha
            phi1[i] = _cdf(res.phi1)
            phi2[i] = _cdf(res.phi2)
            overlap[i] = kernel[a] if res.overlap is None else _cdf(res.overlap)
    return _BlockTables(n, alpha, phi1, phi2, overlap, kernel)


def _step(tab: _BlockTables, eta1, eta2, xi, zeta, u):
    pair = eta1 * tab.n + eta2
    a = tab.alpha[pair]
    new1 = _draw(tab.phi1[pair], u[:, 0])
    new2 = _draw(tab.phi2[pair], u[:, 1])
    merge_now = (zeta == 1) & (u[:, 2] < a)
    new_zeta = np.where(merge_now, 0, zeta)
    from_overlap = (zeta == 1) & (a > 0)
    xi_overlap = _draw(tab.overlap[pair], u[:, 3])
    xi_kernel = _draw(tab.kernel[xi], u[:, 3])
    new_xi = np.where(from_overlap, xi_overlap, xi_kernel)
    return new1, new2, new_xi, new_zeta


def _initial(mu1, mu2, u):
    """Vectorized initial draw from two laws; `u` has shape (trials, 4)."""
    common = np.minimum(mu1, mu2)
    alpha0 = min(1.0, float(common.sum()))
    r1, r2 = mu1 - common, mu2 - common
    size = u.shape[0]
    if min(r1.sum(), r2.sum()) <= COUPLED_TOL:
        xi = _draw(np.tile(_cdf(mu1), (size, 1)), u[:, 3])
        return xi.copy(), xi.copy(), xi, np.zeros(size, dtype=int)
    eta1 = _draw(np.tile(_cdf(r1), (size, 1)), u[:, 0])
    eta2 = _draw(np.tile(_cdf(r2), (size, 1)), u[:, 1])
    if alpha0 == 0.0:
        return eta1, eta2, eta1.copy(), np.ones(size, dtype=int)
    xi = _draw(np.tile(_cdf(common), (size, 1)), u[:, 3])
    zeta = np.where(u[:, 2] < alpha0, 0, 1)
    return eta1, eta2, xi, zeta


def initial_coupling(mu1, mu2, rng) -> CouplingState:
    """Draw the initial coupled state for laws `mu1`, `mu2`."""
    mu1 = np.asarray(mu1, dtype=float)
    mu2 = np.asarray(mu2, dtype=float)
    if mu1.shape != mu2.shape:
        raise LengthMismatch(f"laws have shapes {mu1.shape} and {mu2.shape}")
    e1, e2, xi, z = _initial(mu1, mu2, rng.random((1, UNIFORMS_PER_STEP)))
    return CouplingState(int(e1[0]), int(e2[0]), int(xi[0]), int(z[0]))


def coupled_block_step(chain: ChainSpec, t: int, m: int, s: CouplingState, rng) -> CouplingState:
    tab = _block_tables(m_step_kernel(chain, t, m))
    arrs = [np.array([v]) for v in s]
    e1, e2, xi, z = _step(tab, *arrs, rng.random((1, UNIFORMS_PER_STEP)))
    return CouplingState(int(e1[0]), int(e2[0]), int(xi[0]), int(z[0]))


def project_coupled(s: CouplingState) -> tuple:
    if s.zeta == 1:
        return s.eta1, s.eta2
    return s.xi, s.xi


def _chunk_uniforms(seed: int, chunk: int, n_blocks: int) -> np.ndarray:
    gen = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, chunk])))
    return gen.random((CHUNK, n_blocks + 1, UNIFORMS_PER_STEP))


def simulate(chain: ChainSpec, mu1, mu2, m: int, n_blocks: int, trials: int, seed: int) -> CouplingStats:
    """Run `trials` independent coupled trajectories of `n_blocks` blocks.

    Statistics are recorded at every block boundary ``0, m, ..., n_blocks*m``.
    Trial k always consumes the same uniforms for a given seed (see
    ``STREAM_ALGORITHM``), so results do not depend on chunk evaluation order.
    """
    if trials < 1:
        raise ValidationError("need at least one trial")
    if m < 1 or n_blocks < 0:
        raise ValidationError("need m >= 1 and n_blocks >= 0")
    n = chain.n_states
    mu1 = validate_distribution(mu1, n)
    mu2 = validate_distribution(mu2, n)
    chain.check_horizon(n_blocks * m)
    tables = [_block_tables(m_step_kernel(chain, k * m, m)) for k in range(n_blocks)]

    not_coupled = np.zeros(n_blocks + 1, dtype=np.int64)
    hist1 = np.zeros((n_blocks + 1, n), dtype=np.int64)
    hist2 = np.zeros((n_blocks + 1, n), dtype=np.int64)
    monotone = True

    def record(k, e1, e2, xi, z):
        x1 = np.where(z == 1, e1, xi)
        x2 = np.where(z == 1, e2, xi)
        not_coupled[k] += int(z.sum())
        hist1[k] += np.bincount(x1, minlength=n)
        hist2[k] += np.bincount(x2, minlength=n)

    for chunk in range(-(-trials // CHUNK)):
        u = _chunk_uniforms(seed, chunk, n_blocks)
        size = min(CHUNK, trials - chunk * CHUNK)
        u = u[:size]
        e1, e2, xi, z = _initial(mu1, mu2, u[:, 0])
        record(0, e1, e2, xi, z)
        for k, tab in enumerate(tables):
            e1, e2, xi, z_new = _step(tab, e1, e2, xi, z, u[:, k + 1])
            if np.any(z_new > z):
                monotone = False
            z = z_new
            record(k + 1, e1, e2, xi, z)

    return CouplingStats(
        trials=trials,
        steps=n_blocks,
        m=m,
        seed=seed,
        p_not_coupled=(not_coupled / trials).tolist(),
        marginal_hist1=hist1.tolist(),
        marginal_hist2=hist2.tolist(),
        zeta_monotone=monotone,
        chain=chain.name,
        mu1=mu1.tolist(),
        mu2=mu2.tolist(),
    )


def initial_pair_mass(mu1, mu2) -> np.ndarray:
    """Sub-probability law of ``(eta1, eta2)`` on the event that the initial
    draw did not merge, as a flat vector over full-square pair indices."""
    mu1 = np.asarray(mu1, dtype=float)
    mu2 = np.asarray(mu2, dtype=float)
    common = np.minimum(mu1, mu2)
    r1, r2 = mu1 - common, mu2 - common
    m1, m2 = r1.sum(), r2.sum()
    if min(m1, m2) <= COUPLED_TOL:
        return np.zeros(mu1.size ** 2)
    return (np.outer(r1, r2) / (0.5 * (m1 + m2))).ravel()


def noncoupling_dp(chain: ChainSpec, mu1, mu2, m: int, n_blocks: int) -> np.ndarray:
    """Exact ``P(zeta_{km} = 1)`` for ``k = 0..n_blocks`` by propagating the
    unmerged pair mass through the pair operators."""
    p = initial_pair_mass(mu1, mu2)
    out = [float(p.sum())]
    for k in range(n_blocks):
        p = p @ build_pair_operator(chain, k * m, m, FULL).entries
        out.append(float(p.sum()))
    return np.array(out)


@dataclass(frozen=True)
class CouplingLaw:
    """Exact per-block laws from :func:`enumerate_coupling`."""

    p_not_coupled: np.ndarray
    p_differ: np.ndarray
    marginal1: np.ndarray
    marginal2: np.ndarray
    joint: list


def _quadruple_transition(K) -> np.ndarray:
    """Transition matrix of (eta1, eta2, xi, zeta) over index
    ``((a * n + b) * n + c) * 2 + z``, written out state by state."""
    K = np.asarray(K, dtype=float)
    n = K.shape[0]
    T = np.zeros((2 * n ** 3, 2 * n ** 3))
    for a in range(n):
        for b in range(n):
            over = np.minimum(K[a], K[b])
            alpha = over.sum()
            res1 = K[a] - over
            res2 = K[b] - over
            if a == b or min(res1.sum(), res2.sum()) <= COUPLED_TOL:
                alpha = 1.0
                law1 = law2 = K[a]
            else:
                law1 = res1 / res1.sum()
                law2 = res2 / res2.sum()
            for c in range(n):
                for z in (0, 1):
                    src = ((a * n + b) * n + c) * 2 + z
                    if z == 1 and alpha > 0:
                        law3 = over / over.sum()
                        law4 = {0: alpha, 1: 1.0 - alpha}
                    elif z == 1:
                        law3 = K[c]
                        law4 = {0: 0.0, 1: 1.0}
                    else:
                        law3 = K[c]
                        law4 = {0: 1.0, 1: 0.0}
                    for a2 in range(n):
                        for b2 in range(n):
                            for c2 in range(n):
                                base = law1[a2] * law2[b2] * law3[c2]
                                if base == 0.0:
                                    continue
                                for z2 in (0, 1):
                                    T[src, ((a2 * n + b2) * n + c2) * 2 + z2] += base * law4[z2]
    return T


def _quadruple_initial(mu1, mu2) -> np.ndarray:
    n = mu1.size
    law = np.zeros(2 * n ** 3)
    over = np.minimum(mu1, mu2)
    alpha0 = over.sum()
    res1, res2 = mu1 - over, mu2 - over
    for a in range(n):
        for b in range(n):
            for c in range(n):
                if min(res1.sum(), res2.sum()) <= COUPLED_TOL:
                    if a == b == c:
                        law[((a * n + b) * n + c) * 2] = mu1[a]
                elif alpha0 == 0.0:
                    if c == a:
                        law[((a * n + b) * n + c) * 2 + 1] = mu1[a] * mu2[b]
                else:
                    w = (res1[a] / res1.sum()) * (res2[b] / res2.sum()) * (over[c] / alpha0)
                    law[((a * n + b) * n + c) * 2] = w * alpha0
                    law[((a * n + b) * n + c) * 2 + 1] = w * (1.0 - alpha0)
    return law


def enumerate_coupling(chain: ChainSpec, mu1, mu2, m: int, n_blocks: int) -> CouplingLaw:
    """Exact law of the coupled process by enumerating its full state space.

    Cost grows like ``n^6`` per block; intended for chains of at most a few
    states as an oracle for :func:`noncoupling_dp` and :func:`simulate`.
    """
    n = chain.n_states
    mu1 = np.asarray(mu1, dtype=float)
    mu2 = np.asarray(mu2, dtype=float)
    law = _quadruple_initial(mu1, mu2)
    idx = np.arange(2 * n ** 3)
    z = idx % 2
    c = (idx // 2) % n
    b = (idx // (2 * n)) % n
    a = idx // (2 * n * n)
    x1 = np.where(z == 1, a, c)
    x2 = np.where(z == 1, b, c)

    nc, diff, m1s, m2s, joints = [], [], [], [], []
    for k in range(n_blocks + 1):
        if k > 0:
            law = law @ _quadruple_transition(m_step_kernel(chain, (k - 1) * m, m))
        nc.append(law[z == 1].sum())
        diff.append(law[x1 != x2].sum())
        m1s.append(np.bincount(x1, weights=law, minlength=n))
        m2s.append(np.bincount(x2, weights=law, minlength=n))
        joint = np.zeros((n, n))
        np.add.at(joint, (x1, x2), law)
        joints.append(joint)
    return CouplingLaw(np.array(nc), np.array(diff), np.array(m1s), np.array(m2s), joints)
