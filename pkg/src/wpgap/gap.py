"""Spectral gap size, Markov threshold and probability tail for random cusped surfaces.

With ``n <= g^alpha`` cusps the expected geometric side is at most of order
``n^2 g^{1+eps}``.  Markov's inequality makes the event ``R > n^2 g^{1+eps}``
unlikely, and off that event the trace certificate gives
``sqrt(1/4 - lambda_1) <= (2 alpha + 1)/4 + eps``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .constants import load_constants
from .errors import PreconditionError

TAIL_VARIANTS = ("n", "n2")


@dataclass(frozen=True)
class GapParameters:
    alpha: float
    eps: float
    beta: float = field(default_factory=lambda: load_constants()["beta"])

    def __post_init__(self):
        if not 0 <= self.alpha < 0.5:
            raise PreconditionError("alpha must lie in [0, 1/2)")
        if not 0 < self.eps < min(0.25, 0.5 - self.alpha):
            raise PreconditionError("eps must lie in (0, min(1/4, 1/2 - alpha))")
        if not self.beta > 0:
            raise PreconditionError("beta must be positive")


def gap_limit(alpha):
    """``1/4 - ((2 alpha + 1)/4)^2``, the gap as eps -> 0; exact for Fraction input."""
    if not 0 <= alpha <= Fraction(1, 2):
        raise PreconditionError("alpha must lie in [0, 1/2]")
    quarter = Fraction(1, 4) if isinstance(alpha, (int, Fraction)) else 0.25
    return quarter - ((2 * alpha + 1) / 4) ** 2


def gap_value(p: GapParameters) -> float:
    """``1/4 - ((2 alpha + 1)/4)^2 - eps``."""
    return 0.25 - ((2 * p.alpha + 1) / 4.0) ** 2 - p.eps


def _check_gn(g: int, n: int) -> None:
    if g < 2:
        raise PreconditionError("g must be at least 2")
    if n < 1:
        raise PreconditionError("n must be at least 1")


def markov_threshold(g: int, n: int, eps: float) -> float:
    """``n^2 g^{1+eps}``."""
    _check_gn(g, n)
    if not eps > 0:
        raise PreconditionError("eps must be positive")
    return n * n * float(g) ** (1.0 + eps)


def tail_bound(g: int, n: int, eps: float, beta: float, variant: str = "n") -> float:
    """``(1 + log(g)^6 / n + (log g)^{beta+1}) g^{-eps/2}``.

    ``variant="n2"`` divides ``log(g)^6`` by ``n^2`` instead, the smaller of the
    two forms; the default keeps the larger one.  ``eps = 0`` is accepted to
    show that the bound then does not decay.
    """
    _check_gn(g, n)
    if eps < 0:
        raise PreconditionError("eps must be non-negative")
    if variant not in TAIL_VARIANTS:
        raise PreconditionError(f"variant must be one of {TAIL_VARIANTS}")
    lg = math.log(g)
    div = n if variant == "n" else n * n
    log_lg = math.log(lg)
    log_poly = np.logaddexp.reduce([0.0, 6 * log_lg - math.log(div), (beta + 1) * log_lg])
    exponent = float(log_poly) - 0.5 * eps * lg
    # overflow is reported as inf so callers can flag it instead of crashing
    return math.exp(exponent) if exponent < 709.0 else math.inf


def certificate_consistency(p: GapParameters, g: int, n: int) -> float:
    """``g^{2 alpha + 1 + 2 eps - 4 eps^2} - n^2 g^{1+eps}``.

    Positive means that ``s = (2 alpha + 1)/4 + eps`` forces the residual of the
    trace certificate above the Markov threshold.
    """
    _check_gn(g, n)
    a, e = p.alpha, p.eps
    return float(g) ** (2 * a + 1 + 2 * e - 4 * e * e) - markov_threshold(g, n, e)


def cusp_count(g: int, alpha: float) -> int:
    """``max(1, floor(g^alpha))``, nudged so exact powers are not rounded down."""
    return max(1, math.floor(float(g) ** alpha + 1e-9))


def consistency_crossover(p: GapParameters, g_max: int = 10 ** 5) -> int | None:
    """Smallest G with a positive margin at every g in [G, g_max] for n = floor(g^alpha).

    Returns None when the margin is not positive at ``g_max``.
    """
    if g_max < 2:
        raise PreconditionError("g_max must be at least 2")
    G = None
    for g in range(g_max, 1, -1):
        if certificate_consistency(p, g, cusp_count(g, p.alpha)) > 0:
            G = g
        else:
            break
    return G


def sweep_rows(alpha: float, eps: float, beta: float, g_values, variant: str = "n") -> list[dict]:
    """Gap, threshold, tail and margin for each g with n = floor(g^alpha)."""
    p = GapParameters(alpha, eps, beta)
    rows = []
    for g in g_values:
        g = int(g)
        n = cusp_count(g, alpha)
        rows.append({
            "g": g,
            "n": n,
            "alpha": alpha,
            "eps": eps,
            "gap": gap_value(p),
            "threshold": markov_threshold(g, n, eps),
            "tail": tail_bound(g, n, eps, beta, variant),
            "margin": certificate_consistency(p, g, n),
        })
    return rows
