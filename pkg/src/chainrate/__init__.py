"""Total-variation convergence bounds for finite Markov chains.

Compares the second-eigenvalue rate, m-step Markov-Dobrushin coefficients
and coupling pair operators against the exact TV diameter.
"""
from .chain import (
    ChainSpec,
    m_step_kernel,
    marginal,
    stationary_distribution,
    total_variation,
    tv_diameter,
    validate_matrix,
)
from .coupling import CouplingState, CouplingStats, coupled_block_step, initial_coupling, project_coupled, simulate
from .eigref import SpectralGap, lambda2_modulus
from .ergodic import MdCoefficients, md_bound, md_coefficients, pairwise_alpha
from .pairop import (
    PairOperator,
    build_pair_operator,
    operator_norm,
    pointwise_bound,
    product_bound,
    residual_kernels,
    spectral_bound,
    spectral_radius,
)
from .report import RateReport, run_report

__version__ = "0.1.0"
