"""Upper bounds for the expected number of short geodesics on a random surface.

The expectation of the geometric side of the trace inequality over the
Weil-Petersson measure on M_{g,n} is split into four terms:

* (a) simple separating geodesics;
* (b) simple non-separating geodesics, measured against ``f_T_hat(i/2)``;
* (c) iterates ``k >= 2`` of primitive geodesics;
* (d) non-simple primitive geodesics, grouped by the subsurface they fill.

Each term has an ``exact`` mode, which integrates table volumes against
``f_T``, and a ``stirling`` mode, which replaces volume ratios by factorial
expressions times constants from the constants table and therefore works for
any genus.  Exact values never exceed the corresponding envelope.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator

import mpmath
import numpy as np

from .constants import load_constants
from .errors import ComputationError, MissingVolumeError, PreconditionError
from .testfunctions import QuadratureConfig, TestFunctionFamily, adaptive_integral, f1_eval
from .volumes import VolumeTable, is_stable, separating_pairs, slot_polynomial

TERMS = ("a", "b", "c", "d")
MODES = ("exact", "stirling")
HIGH_BRANCH_START = 34  # filling subsurfaces with |chi| >= 34 use the soft count


# ---------------------------------------------------------------------------
# Small helpers


def _x2_over_sinh(x):
    """``x^2 / sinh(x/2)`` with the value 0 at x = 0."""
    x = np.asarray(x, dtype=float)
    safe = np.where(x == 0, 1.0, x)
    return np.where(x == 0, 0.0, safe * safe / np.sinh(safe / 2.0))


def _sinhc(x: float) -> float:
    return 1.0 if x == 0 else math.sinh(x / 2.0) / (x / 2.0)


def _ratio(num: Fraction, num_pi: int, den: Fraction, den_pi: int) -> float:
    """``(num pi^(2 num_pi)) / (den pi^(2 den_pi))`` as a float."""
    with mpmath.workdps(30):
        value = (mpmath.mpf(num.numerator) / num.denominator
                 / (mpmath.mpf(den.numerator) / den.denominator)
                 * mpmath.pi ** (2 * (num_pi - den_pi)))
        return float(value)


def _poly_mul(p: dict[int, float], q: dict[int, float]) -> dict[int, float]:
    out: dict[int, float] = {}
    for a, x in p.items():
        for b, y in q.items():
            out[a + b] = out.get(a + b, 0.0) + x * y
    return out


def _poly_values(p: dict[int, float], x):
    x = np.asarray(x, dtype=float)
    total = np.zeros_like(x)
    for power, coef in p.items():
        total = total + coef * x ** power
    return total


def _log_factorial(k: float) -> float:
    return math.lgamma(k + 1.0)


def _log_comb(n: int, j: int) -> float:
    return _log_factorial(n) - _log_factorial(j) - _log_factorial(n - j)


def _check_gn(g: int, n: int) -> None:
    if g < 2 or n < 0:
        raise PreconditionError("expectation bounds need g >= 2 and n >= 0")


# ---------------------------------------------------------------------------
# Integration formula for a single curve


def mif_one_curve(F: Callable[[float], float], volume_factor: Callable[[float], float],
                  C_gamma: float, upper: float, quad: QuadratureConfig | None = None) -> float:
    """``C_gamma * int_0^upper F(x) volume_factor(x) x dx`` by adaptive quadrature.

    ``volume_factor(x)`` is the product of the volumes of the pieces obtained
    by cutting along the curve, with the cut boundaries of length x.
    Dividing by ``V_{g,n}`` turns the result into an expectation.
    """
    if not 0 < C_gamma <= 1:
        raise PreconditionError("C_gamma must lie in (0, 1]")
    if upper < 0:
        raise PreconditionError("upper limit must be non-negative")
    return C_gamma * adaptive_integral(lambda x: F(x) * volume_factor(x) * x, 0.0, upper, quad)


# ---------------------------------------------------------------------------
# Subsurface signatures for term (d)


@dataclass(frozen=True, order=True)
class SubsurfaceSignature:
    """A filled subsurface S_{g0, k + a0} and its complement.

    The filled piece has genus g0, a0 of the surface cusps and k boundary
    geodesics; n0 pairs of those boundaries are glued to each other and the
    remaining ``k - 2 n0`` bound the q complementary pieces.  ``parts`` lists
    ``(g_j, a_j, n_j)`` for each piece: its genus, number of surface cusps and
    number of boundaries shared with the filled piece.
    """

    g0: int
    a0: int
    k: int
    n0: int
    q: int
    parts: tuple[tuple[int, int, int], ...]

    @property
    def m(self) -> int:
        """``|chi|`` of the filled piece, ``2 g0 - 2 + k + a0``."""
        return 2 * self.g0 - 2 + self.k + self.a0

    def core_key(self) -> tuple[int, int]:
        return (self.g0, self.k + self.a0)

    def part_keys(self) -> list[tuple[int, int]]:
        return [(gj, nj + aj) for gj, aj, nj in self.parts]

    def multiplicity(self, n: int) -> int:
        """Ways to distribute the n labelled cusps: ``n! / (a0! a1! ... aq!)``."""
        out = math.factorial(n) // math.factorial(self.a0)
        for _, aj, _ in self.parts:
            out //= math.factorial(aj)
        return out

    def boundary_factorials(self) -> int:
        out = math.factorial(self.n0)
        for _, _, nj in self.parts:
            out *= math.factorial(nj)
        return out


def _check_signature_args(g, n, g0, a0, k, n0, q):
    if min(g, n, g0, a0, k, n0, q) < 0:
        raise PreconditionError("signature parameters must be non-negative")


def enumerate_admissible(g: int, n: int, g0: int, a0: int, k: int, n0: int, q: int
                         ) -> Iterator[SubsurfaceSignature]:
    """All complements of a filled ``S_{g0,k+a0}`` inside ``S_{g,n}``, in lexicographic order.

    A complement is an ordered sequence of q triples ``(g_j, a_j, n_j)`` with
    ``n_j >= 1``, each piece stable, ``sum n_j = k - 2 n0``,
    ``sum a_j = n - a0`` and ``sum (2 g_j - 2 + n_j + a_j) = 2g - 2 + n - m``.
    """
    _check_signature_args(g, n, g0, a0, k, n0, q)
    m = 2 * g0 - 2 + k + a0
    if q == 0 or m < 1 or a0 > n or k - 2 * n0 < q:
        return
    chi_left = 2 * g - 2 + n - m
    bound_left = k - 2 * n0
    cusp_left = n - a0

    def rec(j, chi, nb, na, prefix):
        remaining = q - j
        if remaining == 0:
            if chi == 0 and nb == 0 and na == 0:
                yield SubsurfaceSignature(g0, a0, k, n0, q, tuple(prefix))
            return
        max_g = (chi - (remaining - 1) + 2) // 2
        for gj in range(max_g + 1):
            for aj in range(na + 1):
                for nj in range(1, nb - (remaining - 1) + 1):
                    e = 2 * gj - 2 + nj + aj
                    if e < 1 or e > chi - (remaining - 1):
                        continue
                    if remaining == 1 and (e != chi or nj != nb or aj != na):
                        continue
                    yield from rec(j + 1, chi - e, nb - nj, na - aj, prefix + [(gj, aj, nj)])

    yield from rec(0, chi_left, bound_left, cusp_left, [])


def admissible_exists(g: int, n: int, g0: int, a0: int, k: int, n0: int, q: int) -> bool:
    """Whether :func:`enumerate_admissible` yields anything, decided without enumerating.

    Writing ``N = k - 2 n0``, ``A = n - a0`` and ``E = 2g - 2 + n - m``, the
    genera of the pieces sum to ``G = (E - N - A)/2 + q``.  A piece of genus 0
    needs ``n_j + a_j >= 3`` and any other piece only ``n_j >= 1``, so at most
    ``min(G, q)`` pieces escape the genus-0 requirement.
    """
    _check_signature_args(g, n, g0, a0, k, n0, q)
    m = 2 * g0 - 2 + k + a0
    N, A, E = k - 2 * n0, n - a0, 2 * g - 2 + n - m
    if q == 0 or m < 1 or A < 0 or N < q or E < q:
        return False
    if (E - N - A) % 2:
        return False
    G = (E - N - A) // 2 + q
    if G < 0:
        return False
    return N + A >= 3 * q - 2 * min(G, q)


def filling_types(g: int, n: int, m_cap: int) -> list[tuple[int, int, int]]:
    """``(g0, a0, k)`` with ``1 <= m <= m_cap``, ``k >= 1`` and ``a0 <= n``."""
    out = []
    top = min(m_cap, 2 * g - 3 + n)
    for g0 in range(0, top // 2 + 2):
        for a0 in range(0, n + 1):
            for k in range(1, top + 3):
                m = 2 * g0 - 2 + k + a0
                if 1 <= m <= top:
                    out.append((g0, a0, k))
    return sorted(out)


def filling_m_cap(g: int, T: float | None = None) -> int:
    """Largest |chi| of a filled subsurface that term (d) sums over.

    A geodesic of length below T fills a subsurface with ``|chi| <= 4T/(2 pi)``;
    the proof also uses ``m <= 3 log g - 2``.  The larger of the two is used so
    that no subsurface allowed by either cap is dropped.
    """
    T = 4.0 * math.log(g) if T is None else T
    return max(math.ceil(4.0 * T / (2.0 * math.pi)), math.floor(3.0 * math.log(g) - 2.0))


def admissible_volume_sum(table: VolumeTable, g: int, n: int, g0: int, a0: int, k: int,
                          n0: int, q: int, include_core: bool = True,
                          boundary_factorials: bool = False) -> float:
    """``sum_A n!/(a0!..aq!) V_{g0,k+a0} prod V_{g_j,n_j+a_j} / V_{g,n}``.

    ``include_core=False`` drops ``V_{g0,k+a0}``; ``boundary_factorials=True``
    divides each summand by ``n0! n1! ... nq!``.
    """
    sigs = list(enumerate_admissible(g, n, g0, a0, k, n0, q))
    if not sigs:
        return 0.0
    needed = {(g, n)}
    for sig in sigs:
        needed.update(sig.part_keys())
        if include_core:
            needed.add(sig.core_key())
    table.require(needed)
    whole = table.constant(g, n)
    total = 0.0
    for sig in sigs:
        num, num_pi = Fraction(sig.multiplicity(n)), 0
        keys = sig.part_keys() + ([sig.core_key()] if include_core else [])
        for key in keys:
            c = table.constant(*key)
            num *= c.rational
            num_pi += c.pi_power
        if boundary_factorials:
            num /= sig.boundary_factorials()
        total += _ratio(num, num_pi, whole.rational, whole.pi_power)
    return total


def filling_factorial_scale(g: int, n: int, g0: int, a0: int, k: int) -> float:
    """``(2 g0 + k + a0 - 3)! n^a0 / g^m``."""
    m = 2 * g0 - 2 + k + a0
    log_val = _log_factorial(2 * g0 + k + a0 - 3) - m * math.log(g)
    if a0:
        log_val += a0 * math.log(n)
    return math.exp(log_val)


# ---------------------------------------------------------------------------
# Factorial proxies used by the stirling mode


def separating_factorial_sum(g: int, n: int, window: int = 64) -> float:
    """``sum C(n,j) (2i+j-2)! (2g-2i+n-j-2)! / (2g+n-3)!`` over separating (i, j).

    For fixed j the summand is log-convex in i, so only ``window`` terms at
    each end are summed exactly; the middle block is bounded by its length
    times the larger of the two innermost exact terms (an over-estimate).
    """
    if g < 1:
        raise PreconditionError("needs g >= 1")
    log_den = _log_factorial(2 * g + n - 3)
    total = 0.0
    for j in range(n + 1):
        lo = max(0, math.ceil((2 - j) / 2))
        hi = min(g, (2 * g + n - 2 - j) // 2)
        if lo > hi:
            continue
        lc = _log_comb(n, j)

        def term(i):
            return math.exp(lc + _log_factorial(2 * i + j - 2)
                            + _log_factorial(2 * g - 2 * i + n - j - 2) - log_den)

        if hi - lo + 1 <= 2 * window:
            total += sum(term(i) for i in range(lo, hi + 1))
            continue
        left = [term(i) for i in range(lo, lo + window)]
        right = [term(i) for i in range(hi - window + 1, hi + 1)]
        middle = (hi - lo + 1 - 2 * window) * max(left[-1], right[0])
        total += sum(left) + sum(right) + middle
    return total


# ---------------------------------------------------------------------------
# The four terms


def _family(g: int, fam: TestFunctionFamily | None) -> TestFunctionFamily:
    return fam or TestFunctionFamily.for_genus(g)


def _separating_product(table: VolumeTable, g: int, n: int) -> dict[int, float]:
    """``sum C(n,j) V_{i,j+1}(0,x) V_{g-i,n-j+1}(0,x) / V_{g,n}`` as a polynomial in x."""
    pairs = separating_pairs(g, n)
    needed = {(g, n)}
    for i, j in pairs:
        needed.update({(i, j + 1), (g - i, n - j + 1)})
    table.require(needed)
    whole = float(table.constant(g, n))
    out: dict[int, float] = {}
    for i, j in pairs:
        left = table[(i, j + 1)]
        right = table[(g - i, n - j + 1)]
        _, lp = slot_polynomial(left, [left.n - 1])
        _, rp = slot_polynomial(right, [right.n - 1])
        prod = _poly_mul(dict(lp), dict(rp))
        for power, coef in prod.items():
            out[power] = out.get(power, 0.0) + math.comb(n, j) * coef / whole
    return out


def _nonseparating_cut(table: VolumeTable, g: int, n: int) -> dict[int, float]:
    """``V_{g-1,n+2}(0,..,0,x,x) / V_{g,n}`` as a polynomial in x."""
    table.require([(g - 1, n + 2), (g, n)])
    cut = table[(g - 1, n + 2)]
    _, pairs = slot_polynomial(cut, [cut.n - 2, cut.n - 1])
    whole = float(table.constant(g, n))
    return {p: c / whole for p, c in pairs}


def _separating_ratio(table: VolumeTable, g: int, n: int) -> float:
    pairs = separating_pairs(g, n)
    needed = {(g, n)}
    for i, j in pairs:
        needed.update({(i, j + 1), (g - i, n - j + 1)})
    table.require(needed)
    whole = table.constant(g, n)
    total = 0.0
    for i, j in pairs:
        left, right = table.constant(i, j + 1), table.constant(g - i, n - j + 1)
        total += math.comb(n, j) * _ratio(left.rational * right.rational, left.pi_power + right.pi_power,
                                          whole.rational, whole.pi_power)
    return total


def term_a(g: int, n: int, mode: str = "exact", table: VolumeTable | None = None,
           fam: TestFunctionFamily | None = None, constants: dict | None = None) -> float:
    """Simple separating geodesics.

    exact: ``int_0^T x^2/sinh(x/2) f_T(x) sum C(n,j) V_{i,j+1}(0,x) V_{g-i,n-j+1}(0,x) dx / V_{g,n}``.
    stirling: ``4 K_sep F(g,n) f1(0) e^{T/2}`` with F the factorial proxy of the
    separating volume sum.
    """
    _check_gn(g, n)
    fam = _family(g, fam)
    if mode == "exact":
        poly = _separating_product(_need_table(table), g, n)
        return fam._quad(lambda x: float(_x2_over_sinh(x) * fam.f(x) * _poly_values(poly, x)), 0.0, fam.T)
    if mode == "stirling":
        c = constants or load_constants()
        return 4.0 * c["K_sep"] * separating_factorial_sum(g, n) * f1_eval(0.0) * math.exp(fam.T / 2.0)
    raise PreconditionError(f"unknown mode {mode!r}")


def term_b_exact(table: VolumeTable, g: int, n: int, fam: TestFunctionFamily) -> tuple[float, float]:
    """Expected sum over simple non-separating geodesics and its deviation from ``f_T_hat(i/2)``.

    The single orbit has ``C_gamma = 1/2`` and two orientations, so the
    expectation is ``1/2 int_0^T x^2/sinh(x/2) f_T(x) V_{g-1,n+2}(0,..,0,x,x) dx / V_{g,n}``.
    """
    from .trace import fhat_half

    poly = _nonseparating_cut(table, g, n)
    expectation = 2.0 * mif_one_curve(
        lambda x: x / (2.0 * math.sinh(x / 2.0)) * fam.f(x) if x > 0 else 0.0,
        lambda x: float(_poly_values(poly, x)), 0.5, fam.T, fam.quad)
    return expectation, abs(expectation - fhat_half(fam))


def term_b(g: int, n: int, mode: str = "exact", table: VolumeTable | None = None,
           fam: TestFunctionFamily | None = None, constants: dict | None = None) -> float:
    """Simple non-separating geodesics minus ``f_T_hat(i/2)``, in absolute value.

    stirling: ``f1(0) (1 - e^{-T}) + K f1(0) e^{T/2} (1 + n^2 + n T^2) / g``.
    """
    _check_gn(g, n)
    fam = _family(g, fam)
    if mode == "exact":
        return term_b_exact(_need_table(table), g, n, fam)[1]
    if mode == "stirling":
        c = constants or load_constants()
        T, f0 = fam.T, f1_eval(0.0)
        return f0 * (1.0 - math.exp(-T)) + c["K_nonsep_error"] * f0 * math.exp(T / 2.0) * (1 + n * n + n * T * T) / g
    raise PreconditionError(f"unknown mode {mode!r}")


def iterate_long_part(g: int, n: int, T: float) -> float:
    """Deterministic bound for iterates of geodesics of length at least 1.

    Uses ``sum_{k>=2} l / (2 sinh(k l / 2)) <= l e^{-l} / ((1 - e^{-1/2})(1 - e^{-2}))``
    and at most ``2((g - 1 + n/2) e^{L+6} + 3g - 3 + n)`` oriented geodesics of
    length at most L, binned over ``m <= l < m + 1``.
    """
    f0 = f1_eval(0.0)
    pref = f0 / ((1.0 - math.exp(-0.5)) * (1.0 - math.exp(-2.0)))
    total = 0.0
    for m in range(1, math.floor(T / 2.0) + 1):
        count = 2.0 * ((g - 1 + n / 2.0) * math.exp(m + 7) + 3 * g - 3 + n)
        total += count * (m + 1) * math.exp(-m)
    return pref * total


def short_curve_expectation(table: VolumeTable, g: int, n: int) -> float:
    """Exact expected number of simple closed geodesics of length below 1, weighted by 1/l."""
    nonsep = _nonseparating_cut(table, g, n)
    sep = _separating_product(table, g, n)
    total = 0.0
    for poly in (nonsep, sep):
        total += sum(c / (p + 1) for p, c in poly.items())
    return total


def term_c(g: int, n: int, mode: str = "exact", table: VolumeTable | None = None,
           fam: TestFunctionFamily | None = None, constants: dict | None = None) -> float:
    """Iterates ``k >= 2`` of primitive geodesics.

    Long geodesics use :func:`iterate_long_part`.  A geodesic of length l < 1
    has fewer than T / l iterates, each weighted by at most ``f1(0)``, so the
    short part is ``f1(0) T E[sum_{l < 1} 1/l]``.
    """
    _check_gn(g, n)
    fam = _family(g, fam)
    long_part = iterate_long_part(g, n, fam.T)
    if mode == "exact":
        short = short_curve_expectation(_need_table(table), g, n)
    elif mode == "stirling":
        c = constants or load_constants()
        short = _sinhc(1.0) ** 2 * (c["K_cut"] + c["K_sep"] * separating_factorial_sum(g, n))
    else:
        raise PreconditionError(f"unknown mode {mode!r}")
    return long_part + f1_eval(0.0) * fam.T * short


def _filling_weight(m: int, T: float, c: dict) -> float:
    if m >= HIGH_BRANCH_START:
        return c["soft_count"] * T * math.exp(T + 3.5 * T)
    return c["c1"] * T * math.exp(c["beta"] * math.log(T) + T / 2.0 + c["eps1"] * T)


def term_d_breakdown(g: int, n: int, mode: str = "exact", table: VolumeTable | None = None,
                     fam: TestFunctionFamily | None = None, constants: dict | None = None) -> list[dict]:
    """Contributions to term (d) per filling type ``(g0, a0, k)``."""
    _check_gn(g, n)
    fam = _family(g, fam)
    c = constants or load_constants()
    rows = []
    for g0, a0, k in filling_types(g, n, filling_m_cap(g, fam.T)):
        m = 2 * g0 - 2 + k + a0
        high = m >= HIGH_BRANCH_START
        vol = 0.0
        for n0 in range(k // 2 + 1):
            for q in range(1, k - 2 * n0 + 1):
                if mode == "exact":
                    vol += admissible_volume_sum(_need_table(table), g, n, g0, a0, k, n0, q,
                                                 include_core=high, boundary_factorials=True)
                elif mode == "stirling":
                    if not admissible_exists(g, n, g0, a0, k, n0, q):
                        continue
                    if high:
                        vol += c["K_filling"] * filling_factorial_scale(g, n, g0, a0, k)
                    else:
                        vol += c["K_filling_low"] * (n ** a0) / float(g) ** m
                else:
                    raise PreconditionError(f"unknown mode {mode!r}")
        weight = _filling_weight(m, fam.T, c)
        rows.append({"g0": g0, "a0": a0, "k": k, "m": m, "branch": "high" if high else "low",
                     "volume_sum": vol, "weight": weight, "value": weight * vol})
    return rows


def term_d(g: int, n: int, mode: str = "exact", table: VolumeTable | None = None,
           fam: TestFunctionFamily | None = None, constants: dict | None = None) -> float:
    """Non-simple primitive geodesics, summed over the subsurfaces they fill."""
    return sum(r["value"] for r in term_d_breakdown(g, n, mode, table, fam, constants))


def _need_table(table: VolumeTable | None) -> VolumeTable:
    if table is None:
        raise PreconditionError("exact mode needs a volume table")
    return table


# ---------------------------------------------------------------------------
# Totals and reports


def sweep_denominators(g: int, n: int, constants: dict) -> dict[str, float]:
    """Size each term is expected to stay below, up to a constant factor."""
    lg = math.log(g)
    soft = constants["c1"] * lg ** (constants["beta"] + 1) * (1 + n * n) * g ** (1 + 4 * constants["eps1"])
    den = {
        "a": (1 + n * n) * g,
        "b": (1 + n * n) * g + n * lg ** 2 * g,
        "c": lg ** 2 * g,
        "d": lg ** 6 * g + soft,
    }
    den["total"] = (1 + n * n) * g + lg ** 6 * g + soft
    return den


def required_volumes(g: int, n: int, T: float | None = None) -> list[tuple[int, int]]:
    """Every ``(g', n')`` whose volume the exact mode reads for ``(g, n)``."""
    _check_gn(g, n)
    T = 4.0 * math.log(g) if T is None else T
    keys = {(g, n), (g - 1, n + 2)}
    for i, j in separating_pairs(g, n):
        keys.update({(i, j + 1), (g - i, n - j + 1)})
    for g0, a0, k in filling_types(g, n, filling_m_cap(g, T)):
        m = 2 * g0 - 2 + k + a0
        for n0 in range(k // 2 + 1):
            for q in range(1, k - 2 * n0 + 1):
                for sig in enumerate_admissible(g, n, g0, a0, k, n0, q):
                    keys.update(sig.part_keys())
                    if m >= HIGH_BRANCH_START:
                        keys.add(sig.core_key())
    return sorted(k for k in keys if is_stable(*k))


def exact_available(table: VolumeTable, g: int, n: int) -> bool:
    return all(k in table for k in required_volumes(g, n))


def exact_frontier(table: VolumeTable, n: int, g_limit: int = 64) -> int | None:
    """Largest g (up to ``g_limit``) with exact mode possible at every genus 2..g for this n."""
    best = None
    for g in range(2, g_limit + 1):
        if not exact_available(table, g, n):
            break
        best = g
    return best


def stirling_ratio(w: int) -> float:
    """``w! / (sqrt(2 pi w) (w/e)^w)``, which decreases to 1."""
    if w < 1:
        raise PreconditionError("w must be at least 1")
    return math.exp(_log_factorial(w) - 0.5 * math.log(2 * math.pi * w) - w * (math.log(w) - 1.0))


@dataclass
class TermReport:
    g: int
    n: int
    T: float
    eps1: float
    mode: str
    term_a: float
    term_b: float
    term_c: float
    term_d: float
    total: float
    denominators: dict[str, float]
    ratios: dict[str, float]
    constants: dict[str, float]

    def terms(self) -> dict[str, float]:
        return {"a": self.term_a, "b": self.term_b, "c": self.term_c, "d": self.term_d}

    def as_dict(self) -> dict:
        keys = (*TERMS, "total")
        return {
            "g": self.g,
            "n": self.n,
            "T": self.T,
            "eps1": self.eps1,
            "mode": self.mode,
            "term_a": self.term_a,
            "term_b": self.term_b,
            "term_c": self.term_c,
            "term_d": self.term_d,
            "total": self.total,
            "denominators": {k: self.denominators[k] for k in keys},
            "ratios": {k: self.ratios[k] for k in keys},
            "constants": dict(sorted(self.constants.items())),
        }


def total_bound(g: int, n: int, mode: str = "exact", table: VolumeTable | None = None,
                constants: dict | None = None, fam: TestFunctionFamily | None = None) -> TermReport:
    """All four terms at ``T = 4 log g`` together with their sweep ratios.

    Exact mode raises :class:`MissingVolumeError` listing every absent volume;
    it never falls back to the stirling mode.
    """
    _check_gn(g, n)
    c = constants or load_constants()
    fam = _family(g, fam)
    if mode == "exact":
        gaps = [k for k in required_volumes(g, n, fam.T) if table is None or k not in table]
        if gaps:
            raise MissingVolumeError(gaps)
    elif mode != "stirling":
        raise PreconditionError(f"unknown mode {mode!r}")
    funcs = {"a": term_a, "b": term_b, "c": term_c, "d": term_d}
    terms = {k: funcs[k](g, n, mode, table, fam, c) for k in TERMS}
    for k, v in terms.items():
        if not math.isfinite(v) or v < 0:
            raise ComputationError(f"term ({k}) is not a finite non-negative number: {v}")
    total = sum(terms.values())
    den = sweep_denominators(g, n, c)
    ratios = {k: terms[k] / den[k] for k in TERMS}
    ratios["total"] = total / den["total"]
    return TermReport(g, n, fam.T, c["eps1"], mode, terms["a"], terms["b"], terms["c"], terms["d"],
                      total, den, ratios, c)
