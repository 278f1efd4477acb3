"""Second-eigenvalue modulus of a primitive transition matrix."""
from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np

from .chain import stationary_distribution
from .pairop import spectral_radius

DEFLATED_GELFAND = "deflated-gelfand"
ANALYTIC_SMALL = "analytic-small"


@dataclass(frozen=True)
class SpectralGap:
    lambda2_modulus: float
    method: str
    residual: float


def deflate(P, pi=None) -> np.ndarray:
    """``P - 1 pi^T``: same spectrum as P with the Perron eigenvalue moved to 0."""
    P = np.asarray(P, dtype=float)
    if pi is None:
        pi = stationary_distribution(P)
    return P - np.outer(np.ones(P.shape[0]), pi)


def analytic_lambda2(P) -> float:
    """|lambda_2| from the characteristic polynomial for 1, 2 or 3 states."""
    P = np.asarray(P, dtype=float)
    n = P.shape[0]
    if n == 1:
        return 0.0
    tr = float(np.trace(P))
    if n == 2:
        return abs(tr - 1.0)
    if n != 3:
        raise ValueError("analytic route covers at most 3 states")
    # chi(l) = (l - 1)(l^2 + b l + c) with b = 1 - tr, c = det
    b = 1.0 - tr
    c = float(np.linalg.det(P))
    root = cmath.sqrt(b * b - 4.0 * c)
    return max(abs((-b + root) / 2.0), abs((-b - root) / 2.0))


def lambda2_modulus(P, tol: float = 1e-10) -> SpectralGap:
    """Deflate the Perron eigenvalue and take the Gelfand spectral radius.

    Raises NotPrimitive for reducible or periodic matrices. For three or
    fewer states the result is compared with :func:`analytic_lambda2`.
    """
    P = np.asarray(P, dtype=float)
    A = deflate(P)
    value = spectral_radius(A, tol=tol)
    if P.shape[0] <= 3:
        exact = analytic_lambda2(P)
        residual = abs(value - exact)
        if residual > 1e-9:
            raise ArithmeticError(
                f"Gelfand estimate {value!r} disagrees with characteristic polynomial root {exact!r}"
            )
        return SpectralGap(value, ANALYTIC_SMALL, residual)
    return SpectralGap(value, DEFLATED_GELFAND, tol)
