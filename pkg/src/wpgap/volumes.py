"""Exact Weil-Petersson volume polynomials.

A volume polynomial is stored through its intersection numbers
``[tau_{d_1} ... tau_{d_n}]_{g,n}``, defined by

    V_{g,n}(2x_1, ..., 2x_n) = sum_d [tau_d]_{g,n} prod_i x_i^{2 d_i} / (2 d_i + 1)!

Every coefficient is a positive rational multiple of ``pi^(2 p)`` with
``p = 3g - 3 + n - |d|``; only the rational part and ``p`` are kept.
Coefficients are generated by Mirzakhani's recursion written on intersection
numbers, with ``V_{g,0}`` obtained from ``V_{g,1}`` through the dilaton
equation.  Evaluation is done in ``mpmath`` at a configurable precision.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, permutations
from typing import Iterable, Sequence

import mpmath
import sympy

from .errors import ComplexityCapError, MissingVolumeError, ParseError, PreconditionError

PRECISION_ENV = "WPGAP_PRECISION"
DEFAULT_PRECISION = 50
DEFAULT_COMPLEXITY_CAP = 14


def default_precision() -> int:
    """Decimal digits used when no explicit precision is given."""
    raw = os.environ.get(PRECISION_ENV)
    if raw is None:
        return DEFAULT_PRECISION
    try:
        value = int(raw)
    except ValueError as exc:
        raise PreconditionError(f"{PRECISION_ENV} must be an integer, got {raw!r}") from exc
    if value < 15:
        raise PreconditionError(f"{PRECISION_ENV} must be at least 15")
    return value


def dimension(g: int, n: int) -> int:
    """Complex dimension 3g - 3 + n of the moduli space."""
    return 3 * g - 3 + n


def is_stable(g: int, n: int) -> bool:
    return g >= 0 and n >= 0 and 2 * g - 2 + n > 0


@dataclass(frozen=True, order=True)
class PiRational:
    """The number ``numerator / denominator * pi^(2 * pi_power)``."""

    numerator: int
    denominator: int
    pi_power: int

    def __post_init__(self):
        if self.denominator == 0:
            raise PreconditionError("denominator must be non-zero")
        if self.pi_power < 0:
            raise PreconditionError("pi_power must be non-negative")
        num, den = self.numerator, self.denominator
        if den < 0:
            num, den = -num, -den
        common = math.gcd(num, den)
        object.__setattr__(self, "numerator", num // common)
        object.__setattr__(self, "denominator", den // common)

    @classmethod
    def from_fraction(cls, value: Fraction, pi_power: int) -> "PiRational":
        return cls(value.numerator, value.denominator, pi_power)

    @property
    def rational(self) -> Fraction:
        return Fraction(self.numerator, self.denominator)

    def value(self, precision: int | None = None) -> mpmath.mpf:
        dps = precision or default_precision()
        with mpmath.workdps(dps + 10):
            out = mpmath.mpf(self.numerator) / self.denominator * mpmath.pi ** (2 * self.pi_power)
        with mpmath.workdps(dps):
            return +out

    def __float__(self):
        return float(self.value(30))

    def __str__(self):
        return f"{self.numerator}/{self.denominator}*pi^{2 * self.pi_power}"


@dataclass
class VolumePolynomial:
    """Intersection-number expansion of ``V_{g,n}``; keys are multi-indices ``d``."""

    g: int
    n: int
    coeffs: dict[tuple[int, ...], PiRational] = field(default_factory=dict)

    def validate(self) -> None:
        g, n = self.g, self.n
        if not is_stable(g, n):
            raise PreconditionError(f"(g, n) = ({g}, {n}) violates 2g - 2 + n > 0")
        dim = dimension(g, n)
        for d, c in self.coeffs.items():
            if len(d) != n:
                raise PreconditionError(f"multi-index {d} has wrong length for n = {n}")
            if any(x < 0 for x in d):
                raise PreconditionError(f"multi-index {d} has a negative entry")
            if sum(d) > dim:
                raise PreconditionError(f"degree bound violated: |{d}| > {dim} for (g, n) = ({g}, {n})")
            if c.pi_power != dim - sum(d):
                raise PreconditionError(
                    f"pi power {c.pi_power} for d = {d} should be {dim - sum(d)}")
            if c.numerator <= 0:
                raise PreconditionError(f"coefficient for d = {d} is not positive")
        for d, c in self.coeffs.items():
            for perm in set(permutations(d)):
                if self.coeffs.get(perm) != c:
                    raise PreconditionError(f"coefficients not symmetric at d = {d}")

    @property
    def constant_term(self) -> PiRational:
        return self.coeffs[(0,) * self.n]

    def evaluate(self, lengths: Sequence[float], precision: int | None = None) -> mpmath.mpf:
        """Value of ``V_{g,n}(L_1, ..., L_n)``."""
        return evaluate(self, lengths, precision)

    def __eq__(self, other):
        if not isinstance(other, VolumePolynomial):
            return NotImplemented
        return (self.g, self.n, self.coeffs) == (other.g, other.n, other.coeffs)


@dataclass
class VolumeTable:
    """Volume polynomials keyed by ``(g, n)`` with a provenance tag per entry."""

    entries: dict[tuple[int, int], VolumePolynomial] = field(default_factory=dict)
    provenance: dict[tuple[int, int], str] = field(default_factory=dict)

    def add(self, poly: VolumePolynomial, provenance: str) -> None:
        key = (poly.g, poly.n)
        if key in self.entries:
            raise PreconditionError(f"duplicate table entry for (g, n) = {key}")
        poly.validate()
        self.entries[key] = poly
        self.provenance[key] = provenance

    def __contains__(self, key):
        return key in self.entries

    def __getitem__(self, key) -> VolumePolynomial:
        try:
            return self.entries[key]
        except KeyError:
            raise MissingVolumeError([key]) from None

    def __iter__(self):
        return iter(sorted(self.entries))

    def __len__(self):
        return len(self.entries)

    def require(self, keys: Iterable[tuple[int, int]]) -> None:
        missing = [k for k in keys if k not in self.entries]
        if missing:
            raise MissingVolumeError(missing)

    def constant(self, g: int, n: int) -> PiRational:
        return self[(g, n)].constant_term

    def constant_value(self, g: int, n: int, precision: int | None = None) -> mpmath.mpf:
        return self.constant(g, n).value(precision)


# ---------------------------------------------------------------------------
# Recursion


@lru_cache(maxsize=None)
def _kernel_coefficient(L: int) -> Fraction:
    """Rational part of ``zeta(2L) (1 - 2^(1 - 2L))``, with value 1/2 at L = 0."""
    if L == 0:
        return Fraction(1, 2)
    b = sympy.bernoulli(2 * L)
    bern = Fraction(int(b.p), int(b.q))
    zeta = (-1) ** (L + 1) * bern * 2 ** (2 * L - 1) / math.factorial(2 * L)
    return zeta * (1 - Fraction(1, 2 ** (2 * L - 1)))


class IntersectionNumbers:
    """Memoised recursion for the rational parts of ``[tau_d]_{g,n}``.

    The memo is private to the instance, so a finished instance can be read
    from several threads without locking.
    """

    def __init__(self):
        self._memo: dict[tuple[int, tuple[int, ...]], Fraction] = {}

    def __call__(self, g: int, d: Sequence[int]) -> Fraction:
        key = (g, tuple(sorted(d, reverse=True)))
        hit = self._memo.get(key)
        if hit is None:
            hit = self._compute(*key)
            self._memo[key] = hit
        return hit

    def _compute(self, g: int, d: tuple[int, ...]) -> Fraction:
        n = len(d)
        if not is_stable(g, n) or (d and d[-1] < 0):
            return Fraction(0)
        m = dimension(g, n) - sum(d)
        if m < 0:
            return Fraction(0)
        if (g, n) == (0, 3):
            return Fraction(1)
        if (g, n) == (1, 1):
            return Fraction(1, 12) if d[0] == 0 else Fraction(1, 2)
        a = [_kernel_coefficient(L) for L in range(m + 1)]
        d1, rest = d[0], d[1:]
        total = Fraction(0)

        # boundary 1 glued to boundary j along a pair of pants
        for j, dj in enumerate(rest):
            others = rest[:j] + rest[j + 1:]
            for L in range(m + 1):
                total += 8 * (2 * dj + 1) * a[L] * self(g, (d1 + dj + L - 1,) + others)

        # pants with two new boundaries on the same surface
        if g >= 1:
            for L in range(m + 1):
                s = L + d1 - 2
                for k1 in range(s + 1):
                    total += 16 * a[L] * self(g - 1, (k1, s - k1) + rest)

        # pants separating the surface in two
        positions = range(len(rest))
        for r in range(len(rest) + 1):
            for chosen in combinations(positions, r):
                d_i = tuple(rest[i] for i in chosen)
                d_j = tuple(rest[i] for i in positions if i not in chosen)
                for g1 in range(g + 1):
                    g2 = g - g1
                    if not is_stable(g1, len(d_i) + 1) or not is_stable(g2, len(d_j) + 1):
                        continue
                    for L in range(m + 1):
                        s = L + d1 - 2
                        for k1 in range(s + 1):
                            left = self(g1, (k1,) + d_i)
                            if left:
                                total += 16 * a[L] * left * self(g2, (s - k1,) + d_j)
        return total

    def constant_no_boundary(self, g: int) -> Fraction:
        """Rational part of ``V_{g,0}`` (g >= 2) from ``V_{g,1}`` via the dilaton equation."""
        total = Fraction(0)
        for d in range(1, dimension(g, 1) + 1):
            total += self(g, (d,)) * d * (-1) ** (d + 1) / (2 * (2 * g - 2) * math.factorial(2 * d + 1))
        return total


def _multi_indices(n: int, max_total: int):
    """Non-increasing tuples of length n with entries summing to at most max_total."""
    def rec(prefix, remaining, cap):
        if len(prefix) == n:
            yield tuple(prefix)
            return
        for v in range(min(cap, remaining), -1, -1):
            yield from rec(prefix + [v], remaining - v, v)
    yield from rec([], max_total, max_total)


def volume_polynomial(g: int, n: int, engine: IntersectionNumbers | None = None) -> VolumePolynomial:
    """Exact ``V_{g,n}`` from the recursion."""
    if not is_stable(g, n):
        raise PreconditionError(f"(g, n) = ({g}, {n}) violates 2g - 2 + n > 0")
    engine = engine or IntersectionNumbers()
    dim = dimension(g, n)
    coeffs = {}
    if n == 0:
        coeffs[()] = PiRational.from_fraction(engine.constant_no_boundary(g), dim)
    else:
        for d in _multi_indices(n, dim):
            value = PiRational.from_fraction(engine(g, d), dim - sum(d))
            for perm in set(permutations(d)):
                coeffs[perm] = value
    return VolumePolynomial(g, n, dict(sorted(coeffs.items())))


def generate_volumes(g_max: int, n_max: int, complexity_cap: int = DEFAULT_COMPLEXITY_CAP) -> VolumeTable:
    """All stable ``V_{g,n}`` with ``g <= g_max`` and ``n <= n_max``."""
    if g_max < 0 or n_max < 0:
        raise PreconditionError("g_max and n_max must be non-negative")
    keys = [(g, n) for g in range(g_max + 1) for n in range(n_max + 1) if is_stable(g, n)]
    if not keys:
        raise PreconditionError("no stable (g, n) in range")
    worst = max(dimension(g, n) for g, n in keys)
    if worst > complexity_cap:
        raise ComplexityCapError(
            f"3g - 3 + n reaches {worst}, above the complexity cap {complexity_cap}")
    return generate_volume_entries(keys, complexity_cap)


def generate_volume_entries(keys: Iterable[tuple[int, int]],
                            complexity_cap: int = DEFAULT_COMPLEXITY_CAP) -> VolumeTable:
    """Table holding exactly the requested stable ``(g, n)``."""
    keys = sorted(set(keys))
    for g, n in keys:
        if not is_stable(g, n):
            raise PreconditionError(f"(g, n) = ({g}, {n}) violates 2g - 2 + n > 0")
        if dimension(g, n) > complexity_cap:
            raise ComplexityCapError(
                f"3g - 3 + n = {dimension(g, n)} for (g, n) = ({g}, {n}) exceeds the complexity cap {complexity_cap}")
    engine = IntersectionNumbers()
    table = VolumeTable()
    for g, n in keys:
        table.add(volume_polynomial(g, n, engine), "generated")
    return table


# ---------------------------------------------------------------------------
# Text format


def parse_volume_table(text: str, provenance: str = "ingested") -> VolumeTable:
    """Parse the line format ``g n | d_1 .. d_n | num/den | piexp``."""
    rows: dict[tuple[int, int], dict[tuple[int, ...], PiRational]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = [f.strip() for f in line.split("|")]
        if len(fields) != 4:
            raise ParseError("expected four '|'-separated fields", lineno)
        try:
            gn = [int(x) for x in fields[0].split()]
            d = tuple(int(x) for x in fields[1].split())
            num_s, den_s = fields[2].split("/")
            num, den = int(num_s), int(den_s)
            piexp = int(fields[3])
        except ValueError as exc:
            raise ParseError(f"malformed field ({exc})", lineno) from None
        if len(gn) != 2:
            raise ParseError("first field must be 'g n'", lineno)
        g, n = gn
        if not is_stable(g, n):
            raise ParseError(f"(g, n) = ({g}, {n}) is not stable", lineno)
        if len(d) != n:
            raise ParseError(f"expected {n} indices, got {len(d)}", lineno)
        if any(x < 0 for x in d):
            raise ParseError("negative index", lineno)
        if den <= 0:
            raise ParseError("denominator must be positive", lineno)
        if num <= 0:
            raise ParseError("coefficient must be positive", lineno)
        if sum(d) > dimension(g, n):
            raise ParseError(f"degree bound violated: |d| = {sum(d)} > {dimension(g, n)}", lineno)
        if piexp != dimension(g, n) - sum(d):
            raise ParseError(f"pi exponent {piexp} should be {dimension(g, n) - sum(d)}", lineno)
        bucket = rows.setdefault((g, n), {})
        if d in bucket:
            raise ParseError(f"duplicate row for (g, n, d) = ({g}, {n}, {d})", lineno)
        bucket[d] = PiRational(num, den, piexp)
    table = VolumeTable()
    for (g, n), coeffs in sorted(rows.items()):
        try:
            table.add(VolumePolynomial(g, n, dict(sorted(coeffs.items()))), provenance)
        except PreconditionError as exc:
            raise ParseError(str(exc)) from None
    return table


def serialize_volume_table(table: VolumeTable, header: str | None = None) -> str:
    lines = []
    if header:
        lines.extend(f"# {h}" for h in header.splitlines())
    for key in table:
        poly = table[key]
        for d, c in poly.coeffs.items():
            idx = " ".join(str(x) for x in d)
            lines.append(f"{poly.g} {poly.n} | {idx} | {c.numerator}/{c.denominator} | {c.pi_power}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Evaluation and the numerical volume inequalities


def _as_lengths(poly: VolumePolynomial, lengths: Sequence[float]) -> list:
    lengths = list(lengths)
    if len(lengths) != poly.n:
        raise PreconditionError(f"expected {poly.n} lengths, got {len(lengths)}")
    out = []
    for x in lengths:
        x = mpmath.mpf(x)
        if x < 0:
            raise PreconditionError("lengths must be non-negative")
        out.append(x)
    return out


def evaluate(poly: VolumePolynomial, lengths: Sequence[float], precision: int | None = None) -> mpmath.mpf:
    """``sum_d [tau_d] prod_i (L_i/2)^(2 d_i) / (2 d_i + 1)!`` at the given precision."""
    dps = precision or default_precision()
    with mpmath.workdps(dps + 10):
        xs = _as_lengths(poly, lengths)
        pi2 = mpmath.pi ** 2
        total = mpmath.mpf(0)
        for d, c in poly.coeffs.items():
            term = mpmath.mpf(c.numerator) / c.denominator * pi2 ** c.pi_power
            for x, di in zip(xs, d):
                if di:
                    term *= (x / 2) ** (2 * di) / mpmath.factorial(2 * di + 1)
            total += term
    with mpmath.workdps(dps):
        return +total


def _sinhc(x):
    """sinh(x/2) / (x/2) with the limit 1 at x = 0."""
    if x == 0:
        return mpmath.mpf(1)
    return mpmath.sinh(x / 2) / (x / 2)


def sinh_ratio_margin(poly: VolumePolynomial, lengths: Sequence[float], precision: int | None = None) -> mpmath.mpf:
    """``prod sinh(x_i/2)/(x_i/2) - V(x)/V(0)``, non-negative for every volume."""
    dps = precision or default_precision()
    with mpmath.workdps(dps + 10):
        xs = _as_lengths(poly, lengths)
        bound = mpmath.fprod(_sinhc(x) for x in xs)
        ratio = evaluate(poly, xs, dps + 10) / poly.constant_term.value(dps + 10)
        out = bound - ratio
    with mpmath.workdps(dps):
        return +out


def two_slot_residual(table: VolumeTable, g: int, n: int, x1: float, x2: float,
                      pattern: str = "own", precision: int | None = None) -> mpmath.mpf:
    """Normalised error of the two-slot product approximation.

    With ``pattern="own"`` the numerator is ``V_{g,n}(0,..,0,x1,x2)`` (needs
    n >= 2); with ``pattern="cut"`` it is ``V_{g-1,n+2}(0,..,0,x1,x2)``, the
    surface obtained by cutting a non-separating curve.  Both are divided by
    ``V_{g,n}`` and compared with ``4 sinh(x1/2) sinh(x2/2) / (x1 x2)``; the
    relative error is divided by ``n (x1^2 + x2^2) / g`` (with n replaced by 1
    when n = 0).
    """
    if x1 <= 0 or x2 <= 0:
        raise PreconditionError("x1 and x2 must be positive")
    if pattern == "own":
        if n < 2:
            raise PreconditionError("pattern 'own' needs at least two boundary slots")
        num_key = (g, n)
    elif pattern == "cut":
        num_key = (g - 1, n + 2)
    else:
        raise PreconditionError(f"unknown slot pattern {pattern!r}")
    table.require([num_key, (g, n)])
    dps = precision or default_precision()
    with mpmath.workdps(dps + 10):
        top = table[num_key]
        zeros = [0] * (top.n - 2)
        ratio = evaluate(top, zeros + [x1, x2], dps + 10) / table.constant_value(g, n, dps + 10)
        a, b = mpmath.mpf(x1), mpmath.mpf(x2)
        model = 4 * mpmath.sinh(a / 2) * mpmath.sinh(b / 2) / (a * b)
        scale = max(n, 1) * (a ** 2 + b ** 2) / g
        out = abs(ratio / model - 1) / scale
    with mpmath.workdps(dps):
        return +out


def mz_ratio(table: VolumeTable, g: int, n: int, precision: int | None = None) -> mpmath.mpf:
    """``V_{g,n} sqrt(g) / ((2g-3+n)! (4 pi^2)^(2g-3+n))``, an empirical estimate of B."""
    w = 2 * g - 3 + n
    if g < 1 or w < 1:
        raise PreconditionError("mz_ratio needs g >= 1 and 2g - 3 + n >= 1")
    dps = precision or default_precision()
    with mpmath.workdps(dps + 10):
        v = table.constant_value(g, n, dps + 10)
        out = v * mpmath.sqrt(g) / (mpmath.factorial(w) * (4 * mpmath.pi ** 2) ** w)
    with mpmath.workdps(dps):
        return +out


def separating_pairs(g: int, n: int) -> list[tuple[int, int]]:
    """Index pairs (i, j) with 0 <= i <= g, 0 <= j <= n, 2 <= 2i + j <= 2g + n - 2."""
    return [(i, j) for i in range(g + 1) for j in range(n + 1)
            if 2 <= 2 * i + j <= 2 * g + n - 2]


def separating_sum(table: VolumeTable, g: int, n: int, precision: int | None = None):
    """``sum C(n,j) V_{i,j+1} V_{g-i,n-j+1} / V_{g,n}`` and its ratio to ``(1+n^2)/g``."""
    if g < 1:
        raise PreconditionError("separating_sum needs g >= 1")
    pairs = separating_pairs(g, n)
    needed = {(g, n)}
    for i, j in pairs:
        needed.update({(i, j + 1), (g - i, n - j + 1)})
    table.require(needed)
    dps = precision or default_precision()
    with mpmath.workdps(dps + 10):
        exact = Fraction(0)
        pi_power = None
        for i, j in pairs:
            left, right = table.constant(i, j + 1), table.constant(g - i, n - j + 1)
            exact += math.comb(n, j) * left.rational * right.rational
            pi_power = left.pi_power + right.pi_power
        if not pairs:
            total = mpmath.mpf(0)
        else:
            whole = table.constant(g, n)
            total = (mpmath.mpf(exact.numerator) / exact.denominator / whole.rational.numerator
                     * whole.rational.denominator * mpmath.pi ** (2 * (pi_power - whole.pi_power)))
        ratio = total / (mpmath.mpf(1 + n * n) / g)
    with mpmath.workdps(dps):
        return +total, +ratio


def cusp_reduction_pairs(table: VolumeTable, min_b: int = 0):
    """Yield ``(a, b, V_{a,b+2}, V_{a+1,b})`` for all table pairs with 2a + b >= 1."""
    for a, b2 in table:
        b = b2 - 2
        if b < min_b or 2 * a + b < 1 or (a + 1, b) not in table:
            continue
        yield a, b, table.constant(a, b + 2), table.constant(a + 1, b)


def compare_pi_rationals(x: PiRational, y: PiRational) -> int:
    """Sign of ``x - y`` decided with exact rational arithmetic plus interval pi."""
    with mpmath.workdps(60):
        diff = x.value(60) - y.value(60)
    if diff == 0:
        return 0
    return 1 if diff > 0 else -1


def cusp_reduction_violations(table: VolumeTable, min_b: int = 0):
    """Pairs where ``V_{a,b+2} > V_{a+1,b}``."""
    return [(a, b, lhs, rhs) for a, b, lhs, rhs in cusp_reduction_pairs(table, min_b)
            if compare_pi_rationals(lhs, rhs) > 0]


def slot_polynomial(poly: VolumePolynomial, slots: Sequence[int]):
    """Restrict ``V`` to lengths zero except for the given slots, which share one length x.

    Returns a callable ``x -> float`` together with the list of
    ``(power_of_x, float_coefficient)`` pairs, convenient for fast quadrature.
    """
    slots = list(slots)
    terms: dict[int, float] = {}
    for d, c in poly.coeffs.items():
        if any(d[i] for i in range(poly.n) if i not in slots):
            continue
        power = 2 * sum(d[i] for i in slots)
        weight = 1.0
        for i in slots:
            weight /= 4.0 ** d[i] * math.factorial(2 * d[i] + 1)
        terms[power] = terms.get(power, 0.0) + float(c) * weight
    pairs = sorted(terms.items())

    def value(x):
        return sum(coef * x ** power for power, coef in pairs)

    return value, pairs

