"""Rate comparison report: every bound method against the exact TV diameter."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .chain import ChainSpec, m_step_kernel, point_mass, tv_diameter
from .coupling import simulate
from .eigref import lambda2_modulus
from .ergodic import md_bound, md_coefficients, pairwise_delta_table
from .errors import ValidationError
from .pairop import FULL, OFF_DIAGONAL, build_pair_operator, operator_norm, spectral_radius

LAMBDA2 = "Lambda2"
MD = "MD"
SPECTRAL_NORM = "SpectralNorm"
SPECTRAL_RADIUS = "SpectralRadius"
PRODUCT_NORM = "ProductNorm"
PRODUCT_OPERATOR = "ProductOperator"
ORACLE = "OracleTV"
SIM = "SimCoupling"

BOUND_METHODS = (MD, SPECTRAL_NORM, SPECTRAL_RADIUS, PRODUCT_NORM, PRODUCT_OPERATOR)
# rows that are references or estimates rather than guaranteed bounds
EXEMPT = (LAMBDA2, ORACLE, SIM)

DOMINANCE_TOL = 1e-10


@dataclass(frozen=True)
class RateRow:
    method: str
    m: int | None
    n: int
    value: float


@dataclass
class RateReport:
    chain: str
    homogeneous: bool
    m_list: list
    n_max: int
    eps: float
    rows: list = field(default_factory=list)
    crossovers: list = field(default_factory=list)
    rates: list = field(default_factory=list)
    summaries: list = field(default_factory=list)
    lambda2: float | None = None
    sim: dict | None = None

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: dict) -> "RateReport":
        doc = dict(doc)
        doc["rows"] = [RateRow(**r) for r in doc.get("rows", [])]
        return cls(**doc)

    def select(self, method: str, m: int | None = None) -> dict:
        """``{n: value}`` for one method (and block size)."""
        return {r.n: r.value for r in self.rows if r.method == method and r.m == m}

    def value(self, method: str, m: int | None, n: int) -> float:
        return self.select(method, m)[n]


def _first_dominating(bound: dict, oracle: dict):
    """Smallest n from which the bound stays >= the oracle, else None."""
    first = None
    for n in sorted(bound):
        if bound[n] + DOMINANCE_TOL >= oracle[n]:
            if first is None:
                first = n
        else:
            first = None
    return first


def worst_pair(chain: ChainSpec, m: int) -> tuple:
    """Ordered pair of states whose m-step rows are farthest apart."""
    table = pairwise_delta_table(m_step_kernel(chain, 0, m))
    x1, x2 = np.unravel_index(int(np.argmax(table)), table.shape)
    return int(x1), int(x2)


def run_report(chain: ChainSpec, m_list, n_max: int, eps: float = 1e-6, sim: dict | None = None) -> RateReport:
    """Evaluate every applicable method on the grid ``n = 0..n_max`` for each m.

    ``sim`` may hold ``trials``, ``seed`` and optionally ``mu1``/``mu2`` laws;
    without explicit laws each m uses point masses at :func:`worst_pair`.
    """
    m_list = [int(m) for m in m_list]
    if not m_list or min(m_list) < 1:
        raise ValidationError("m list must be non-empty with every m >= 1")
    if n_max < max(m_list):
        raise ValidationError(f"n_max={n_max} is smaller than max(m)={max(m_list)}")
    chain.check_horizon(n_max)
    rows = []
    oracle = {n: tv_diameter(chain, n) for n in range(n_max + 1)}
    rows += [RateRow(ORACLE, None, n, v) for n, v in oracle.items()]

    lam = None
    if chain.is_homogeneous:
        lam = lambda2_modulus(chain.matrix).lambda2_modulus
        rows += [RateRow(LAMBDA2, None, n, lam**n) for n in range(n_max + 1)]

    summaries = []
    sim_meta = None
    for m in m_list:
        coeffs = md_coefficients(chain, 0, m)
        summary = {"m": m, "alpha": coeffs.alpha, "delta": coeffs.delta, "md_rate": coeffs.delta ** (1.0 / m)}
        rows += [RateRow(MD, m, n, md_bound(chain, m, n)) for n in range(n_max + 1)]
        if chain.is_homogeneous:
            V = build_pair_operator(chain, 0, m, OFF_DIAGONAL)
            norm = operator_norm(V)
            r = spectral_radius(V.entries)
            summary.update(norm=norm, spectral_radius=r, spectral_rate=r ** (1.0 / m))
            rows += [RateRow(SPECTRAL_NORM, m, n, norm ** (n // m)) for n in range(n_max + 1)]
            rows += [RateRow(SPECTRAL_RADIUS, m, n, (r + eps) ** (n // m)) for n in range(n_max + 1)]
        else:
            size = chain.n_states
            norm_product = 1.0
            M = np.eye(size * size)
            off = ~np.eye(size, dtype=bool).ravel()
            for k in range(n_max // m + 1):
                sup = float((M @ np.ones(size * size))[off].max()) if size > 1 else 0.0
                rows.append(RateRow(PRODUCT_NORM, m, k * m, norm_product))
                rows.append(RateRow(PRODUCT_OPERATOR, m, k * m, sup))
                if k == n_max // m:
                    break
                V = build_pair_operator(chain, k * m, m, FULL)
                norm_product *= operator_norm(V)
                M = M @ V.entries
        summaries.append(summary)

        if sim is not None:
            if sim.get("mu1") is not None and sim.get("mu2") is not None:
                mu1, mu2 = np.asarray(sim["mu1"], float), np.asarray(sim["mu2"], float)
            else:
                x1, x2 = worst_pair(chain, m)
                mu1, mu2 = point_mass(chain.n_states, x1), point_mass(chain.n_states, x2)
            stats = simulate(chain, mu1, mu2, m, n_max // m, sim["trials"], sim["seed"])
            rows += [RateRow(SIM, m, k * m, p) for k, p in enumerate(stats.p_not_coupled)]
            sim_meta = {"trials": sim["trials"], "seed": sim["seed"], "rng": stats.rng}

    crossovers = []
    for method in BOUND_METHODS:
        for m in m_list:
            bound = {r.n: r.value for r in rows if r.method == method and r.m == m}
            if bound:
                crossovers.append({"method": method, "m": m, "first_n": _first_dominating(bound, oracle)})

    rates = []
    seen = []
    for r in rows:
        if (r.method, r.m) not in seen:
            seen.append((r.method, r.m))
    for method, m in seen:
        series = {r.n: r.value for r in rows if r.method == method and r.m == m}
        n_last = max(series)
        if n_last > 0:
            rates.append({"method": method, "m": m, "n": n_last, "rate": series[n_last] ** (1.0 / n_last)})

    return RateReport(
        chain=chain.name,
        homogeneous=chain.is_homogeneous,
        m_list=m_list,
        n_max=n_max,
        eps=eps,
        rows=rows,
        crossovers=crossovers,
        rates=rates,
        summaries=summaries,
        lambda2=lam,
        sim=sim_meta,
    )


def dominance_violations(report: RateReport) -> list:
    """Bound rows that fall below the oracle.

    SpectralRadius rows are only checked from their recorded crossover on,
    because that bound is asymptotic.
    """
    oracle = report.select(ORACLE)
    crossover = {(c["method"], c["m"]): c["first_n"] for c in report.crossovers}
    bad = []
    for row in report.rows:
        if row.method in EXEMPT:
            continue
        if row.method == SPECTRAL_RADIUS:
            start = crossover.get((row.method, row.m))
            if start is None or row.n < start:
                continue
        if oracle[row.n] > row.value + DOMINANCE_TOL:
            bad.append(row)
    return bad
