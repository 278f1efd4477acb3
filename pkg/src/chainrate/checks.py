"""Invariant suite behind ``chainrate check``."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chain import ChainSpec, is_primitive, point_mass, tv_diameter
from .coupling import enumerate_coupling, noncoupling_dp
from .eigref import lambda2_modulus
from .ergodic import md_bound, md_coefficients
from .pairop import FULL, OFF_DIAGONAL, build_pair_operator, operator_norm, pointwise_bound, product_bound, spectral_radius
from .report import dominance_violations, run_report, worst_pair


@dataclass(frozen=True)
class CheckResult:
    chain: str
    name: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        tail = f"  ({self.detail})" if self.detail else ""
        return f"{status}  {self.chain:<12} {self.name}{tail}"


def _pairwise_tv(chain, time):
    laws = np.eye(chain.n_states)
    for s in range(time):
        laws = laws @ chain.step_matrix(s)
    return 0.5 * np.abs(laws[:, None, :] - laws[None, :, :]).sum(axis=2)


def check_chain(chain: ChainSpec, m_values=(1, 2, 3, 4), max_time: int = 24) -> list:
    out = []
    name = chain.name

    def record(label, ok, detail=""):
        out.append(CheckResult(name, label, bool(ok), detail))

    for m in m_values:
        coeffs = md_coefficients(chain, 0, m)
        V = build_pair_operator(chain, 0, m, OFF_DIAGONAL)
        W = build_pair_operator(chain, 0, m, FULL)
        norm = operator_norm(V)
        gap = abs(norm - coeffs.delta)
        record(f"norm identity m={m}", gap < 1e-12, f"|gap|={gap:.1e}")
        record(f"full/offdiag norms m={m}", abs(operator_norm(W) - norm) < 1e-12)
        diag_mass = max(
            (float(W.entries[i].reshape(chain.n_states, -1).diagonal().sum()) for i in range(W.entries.shape[0])),
            default=0.0,
        )
        record(f"no diagonal target mass m={m}", diag_mass == 0.0)
        if chain.is_homogeneous:
            r = spectral_radius(V.entries)
            record(f"r(V) <= ||V|| m={m}", r <= norm + 1e-9, f"r={r:.6g} norm={norm:.6g}")
            worst = 0.0
            for n in range(0, 11):
                if n * m > max_time:
                    break
                worst = max(worst, tv_diameter(chain, n * m) - norm**n)
                excess = _pairwise_tv(chain, n * m) - pointwise_bound(chain, m, n)
                worst = max(worst, float(excess.max()))
            record(f"coupling bounds m={m}", worst <= 1e-10, f"max excess={worst:.1e}")
        else:
            for n in range(0, max_time // m + 1):
                norm_prod, op_sup = product_bound(chain, m, n)
                tv = tv_diameter(chain, n * m)
                if not (op_sup <= norm_prod + 1e-10 and tv <= op_sup + 1e-10):
                    record(f"product bounds m={m}", False, f"n={n}")
                    break
            else:
                record(f"product bounds m={m}", True)
        excess = max(tv_diameter(chain, n) - md_bound(chain, m, n) for n in range(max_time + 1))
        record(f"MD bound m={m}", excess <= 1e-10, f"max excess={excess:.1e}")

    if chain.is_homogeneous and is_primitive(chain.matrix):
        lam = lambda2_modulus(chain.matrix).lambda2_modulus
        record("lambda2 < 1", lam < 1.0, f"|lambda2|={lam:.10g}")

    report = run_report(chain, list(m_values), max_time)
    bad = dominance_violations(report)
    record("report dominance", not bad, f"{len(bad)} violations" if bad else "")

    if chain.n_states <= 4 and chain.n_states >= 2:
        gap = 0.0
        for m in (1, 2):
            x1, x2 = worst_pair(chain, m)
            mu1, mu2 = point_mass(chain.n_states, x1), point_mass(chain.n_states, x2)
            law = enumerate_coupling(chain, mu1, mu2, m, 4)
            dp = noncoupling_dp(chain, mu1, mu2, m, 4)
            gap = max(gap, float(np.abs(law.p_not_coupled - dp).max()))
        record("enumeration == DP", gap <= 1e-12, f"max gap={gap:.1e}")
    return out


def run_checks(chains) -> list:
    results = []
    for chain in chains:
        results += check_chain(chain)
    return results
