"""Both sides of the trace inequality and the resulting lambda_1 certificate.

For a length spectrum the geometric side is

    sum_gamma sum_{k >= 1} l_gamma / (2 sinh(k l_gamma / 2)) f_T(k l_gamma),

and the quantity tested by the certificate is

    R = geometric side - f_T_hat(i/2) + nu n g.

If lambda_1 <= 3/16 then ``C log(g) g^{4(1-eps) s} <= R`` with
``s = sqrt(1/4 - lambda_1) >= 1/4``, so a small R rules out eigenvalues
below 3/16 and otherwise bounds s from above.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .errors import CertificateError, ParseError, PreconditionError
from .testfunctions import SpectralParameter, TestFunctionFamily, f1_eval, fourier_fT, inverse_abel_kT

ABOVE = "AboveThreeSixteenths"
LOWER = "LowerBound"


@dataclass(frozen=True)
class SurfaceTopology:
    """Genus and number of cusps; n = 0 (closed surfaces) is allowed."""

    g: int
    n: int

    def __post_init__(self):
        if self.g < 2:
            raise PreconditionError("genus must be at least 2")
        if self.n < 0:
            raise PreconditionError("number of cusps must be non-negative")

    @property
    def area(self) -> float:
        return 2.0 * math.pi * (2 * self.g - 2 + self.n)

    @property
    def truncated_area(self) -> float:
        """Area with the n cusp regions beyond height 2 removed (each has area 1/2)."""
        return self.area - self.n / 2.0


@dataclass
class LengthSpectrum:
    """Primitive closed-geodesic lengths with multiplicities.

    ``oriented=False`` means each entry stands for an unoriented geodesic and
    therefore counts twice in sums over oriented geodesics.
    """

    entries: list[tuple[float, int]] = field(default_factory=list)
    oriented: bool = True

    def __post_init__(self):
        clean = []
        for length, mult in self.entries:
            length, mult = float(length), int(mult)
            if not length > 0 or not math.isfinite(length):
                raise PreconditionError(f"lengths must be positive and finite, got {length}")
            if mult < 1:
                raise PreconditionError(f"multiplicities must be at least 1, got {mult}")
            clean.append((length, mult))
        self.entries = sorted(clean)

    @property
    def orientation_factor(self) -> int:
        return 1 if self.oriented else 2

    def merged(self, other: "LengthSpectrum") -> "LengthSpectrum":
        if self.oriented != other.oriented:
            raise PreconditionError("cannot merge spectra with different orientation conventions")
        return LengthSpectrum(self.entries + other.entries, self.oriented)


def parse_length_spectrum(text: str, oriented: bool = True) -> LengthSpectrum:
    """Parse CSV with header ``length,multiplicity``; ``#`` lines are comments."""
    lines = [(i, line) for i, line in enumerate(text.splitlines(), start=1)
             if line.strip() and not line.lstrip().startswith("#")]
    if not lines:
        raise ParseError("spectrum file has no header")
    header_no, header = lines[0]
    cols = [c.strip() for c in next(csv.reader([header]))]
    if cols != ["length", "multiplicity"]:
        raise ParseError("header must be 'length,multiplicity'", header_no)
    entries = []
    for lineno, line in lines[1:]:
        row = [c.strip() for c in next(csv.reader([line]))]
        if len(row) != 2:
            raise ParseError("expected two columns", lineno)
        try:
            length = float(row[0])
            mult = int(row[1])
        except ValueError:
            raise ParseError(f"cannot read row {line!r}", lineno) from None
        if not length > 0 or not math.isfinite(length) or mult < 1:
            raise ParseError("lengths must be positive and multiplicities at least 1", lineno)
        entries.append((length, mult))
    return LengthSpectrum(entries, oriented)


def format_length_spectrum(spec: LengthSpectrum) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["length", "multiplicity"])
    for length, mult in spec.entries:
        writer.writerow([repr(length), mult])
    return buf.getvalue()


@dataclass(frozen=True)
class TraceConstants:
    """Non-explicit constants: eps, C(eps) and the O(ng) absorber nu."""

    eps: float
    C_eps: float
    nu: float = 0.0

    def __post_init__(self):
        if not 0 < self.eps < 1:
            raise PreconditionError("eps must lie in (0, 1)")
        if not self.C_eps > 0:
            raise PreconditionError("C_eps must be positive")
        if self.nu < 0:
            raise PreconditionError("nu must be non-negative")


@dataclass(frozen=True)
class GapCertificate:
    """Outcome of :func:`certify`.

    ``s_raw`` is the unclamped solution of ``R = C log(g) g^{4(1-eps) s}``
    (None when R = 0);
    ``s_max`` is it clamped to [1/4, 1/2].  ``lower_bound`` is
    ``1/4 - s_max^2`` for a LowerBound verdict and None otherwise.
    """

    verdict: str
    lower_bound: float | None
    s_raw: float | None
    s_max: float
    g: int
    n: int
    T: float
    residual: float
    geometric: float | None
    fhat_half: float | None
    eps: float
    C_eps: float
    nu: float

    def as_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "lower_bound": self.lower_bound,
            "s_raw": self.s_raw,
            "s_max": self.s_max,
            "g": self.g,
            "n": self.n,
            "T": self.T,
            "residual": self.residual,
            "geometric": self.geometric,
            "fhat_half": self.fhat_half,
            "eps": self.eps,
            "C_eps": self.C_eps,
            "nu": self.nu,
        }


def geometric_side(spec: LengthSpectrum, fam: TestFunctionFamily) -> float:
    """Sum over oriented primitive geodesics and iterates with k l < T."""
    T = fam.T
    total = 0.0
    for length, mult in spec.entries:
        kmax = math.ceil(T / length) - 1
        if kmax < 1:
            continue
        k = np.arange(1, kmax + 1, dtype=float)
        x = k * length
        terms = length / (2.0 * np.sinh(x / 2.0)) * fam.f(x)
        total += mult * spec.orientation_factor * float(np.sum(terms))
    return total


def identity_term(topo: SurfaceTopology, fam: TestFunctionFamily) -> float:
    """``(2 pi (2g - 2 + n) - n/2) k_T(0)``."""
    return topo.truncated_area * inverse_abel_kT(fam, 0.0)


def parabolic_bound(topo: SurfaceTopology, fam: TestFunctionFamily) -> float:
    """``2 n f1(0) (log(2 sqrt 2) + T/2)``."""
    return 2.0 * topo.n * f1_eval(0.0) * (math.log(2.0 * math.sqrt(2.0)) + fam.T / 2.0)


def fhat_half(fam: TestFunctionFamily) -> float:
    return fourier_fT(fam, SpectralParameter.imag(0.5))


def positivity_defect(spec: LengthSpectrum, topo: SurfaceTopology, fam: TestFunctionFamily, nu: float) -> float:
    """``geometric side - f_T_hat(i/2) + nu n g``."""
    if nu < 0:
        raise PreconditionError("nu must be non-negative")
    return geometric_side(spec, fam) - fhat_half(fam) + nu * topo.n * topo.g


def invert_residual(R: float, g: int, consts: TraceConstants) -> float:
    """Solve ``R = C log(g) g^{4(1-eps) s}`` for s (R > 0)."""
    log_g = math.log(g)
    return math.log(R / (consts.C_eps * log_g)) / (4.0 * (1.0 - consts.eps) * log_g)


def certify_from_residual(R: float, g: int, n: int, consts: TraceConstants, T: float | None = None,
                          geometric: float | None = None, fhat: float | None = None) -> GapCertificate:
    """Certificate for a precomputed residual R."""
    if g < 2:
        raise PreconditionError("genus must be at least 2")
    if R < 0:
        raise CertificateError(
            f"residual R = {R:.6g} is negative: nu = {consts.nu} is too small for this spectrum")
    T = 4.0 * math.log(g) if T is None else T
    threshold = consts.C_eps * math.log(g) * g ** (1.0 - consts.eps)
    s_raw = None if R == 0 else invert_residual(R, g, consts)
    if R < threshold:
        verdict, lower, s_max = ABOVE, None, 0.25
    else:
        s_max = min(max(s_raw, 0.25), 0.5)
        verdict, lower = LOWER, 0.25 - s_max ** 2
    return GapCertificate(verdict, lower, s_raw, s_max, g, n, T, R, geometric, fhat,
                          consts.eps, consts.C_eps, consts.nu)


def certify(spec: LengthSpectrum, topo: SurfaceTopology, consts: TraceConstants,
            fam: TestFunctionFamily | None = None) -> GapCertificate:
    """Certificate from a length spectrum with ``T = 4 log g``."""
    fam = fam or TestFunctionFamily.for_genus(topo.g)
    geo = geometric_side(spec, fam)
    fh = fhat_half(fam)
    R = geo - fh + consts.nu * topo.n * topo.g
    return certify_from_residual(R, topo.g, topo.n, consts, fam.T, geo, fh)


def synthetic_spectrum(lengths: Iterable[float], oriented: bool = False) -> LengthSpectrum:
    """Spectrum with multiplicity one for each given length."""
    return LengthSpectrum([(float(x), 1) for x in lengths], oriented)
