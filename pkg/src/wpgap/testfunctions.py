"""The compactly supported test functions f_T, their Fourier transforms and
their inverse Abel transforms k_T.

The mollifier is ``psi0(x) = exp(-1 / (1 - 4 x^2))`` on ``|x| < 1/2``;
``f1 = psi0 * psi0`` (convolution) is supported on ``(-1, 1)`` and
``f_T(x) = f1(x / T)``.  By the convolution theorem ``f1_hat = psi0_hat^2``,
which is how the Fourier transform is evaluated; the direct cosine integral is
kept as a cross-check.

Fourier convention: ``f_hat(xi) = int f(x) exp(i xi x) dx``.  For even real f
this is ``2 int_0^inf cos(xi x) f(x) dx`` on the real axis and
``2 int_0^inf cosh(t x) f(x) dx`` at ``xi = i t``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicSpline

from .errors import ComputationError, PreconditionError

SQRT2 = math.sqrt(2.0)

# Gauss-Legendre rules on [-1, 1]; psi0 is flat to all orders at +-1/2, so
# fixed high-order rules converge to machine precision.
_CONV_NODES, _CONV_WEIGHTS = np.polynomial.legendre.leggauss(400)
_HAT_NODES, _HAT_WEIGHTS = np.polynomial.legendre.leggauss(2000)
_HAT_X = 0.25 * (_HAT_NODES + 1.0)
_HAT_W = 0.25 * _HAT_WEIGHTS


def psi0(x):
    """The mollifier; vectorised, zero outside (-1/2, 1/2)."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = np.abs(x) < 0.5
    out[inside] = np.exp(-1.0 / (1.0 - 4.0 * x[inside] ** 2))
    return out


def dpsi0(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = np.abs(x) < 0.5
    xi = x[inside]
    denom = 1.0 - 4.0 * xi ** 2
    out[inside] = np.exp(-1.0 / denom) * (-8.0 * xi / denom ** 2)
    return out


def _convolve(x, kernel, chunk=4096):
    """``int kernel(|x| - t) psi0(t) dt`` over the overlap [|x| - 1/2, 1/2]."""
    x = np.abs(np.atleast_1d(np.asarray(x, dtype=float)))
    vals = np.empty_like(x)
    for start in range(0, x.size, chunk):
        xs = x[start:start + chunk]
        lo = xs - 0.5
        half = (0.5 - lo) / 2.0
        mid = (0.5 + lo) / 2.0
        t = half[:, None] * _CONV_NODES[None, :] + mid[:, None]
        vals[start:start + chunk] = (kernel(xs[:, None] - t) * psi0(t)) @ _CONV_WEIGHTS * half
    vals[x >= 1.0] = 0.0
    return vals


def f1_direct(x):
    """f1 by 400-point Gauss-Legendre quadrature of the convolution (1-d array out)."""
    return _convolve(x, psi0)


def f1_prime_direct(x):
    """f1' for x >= 0 (the derivative lands on the shifted factor)."""
    return _convolve(x, dpsi0)


def f1_eval(x):
    """f1(x); scalar in, float out, or array in, array out."""
    arr = np.asarray(x, dtype=float)
    vals = f1_direct(arr.ravel()).reshape(arr.shape)
    return float(vals) if arr.ndim == 0 else vals


class _F1Cache:
    """Splines of f1 and f1' on [0, 1), built once on first use.

    On [0, 0.9] the values are interpolated directly.  On [0.9, 0.995] the
    logarithms of f1 and -f1' are interpolated instead, which keeps the signs
    exact while the magnitudes fall off super-exponentially; past 0.995 both
    are below 1e-85 and are returned as 0.
    """

    SPLIT = 0.9
    CUTOFF = 0.995

    def __init__(self):
        self._built = False

    def _build(self):
        inner = np.linspace(0.0, self.SPLIT, 18001)
        outer = np.linspace(self.SPLIT, self.CUTOFF, 4001)
        self._value = CubicSpline(inner, f1_direct(inner))
        self._deriv = CubicSpline(inner, f1_prime_direct(inner))
        self._log_value = CubicSpline(outer, np.log(f1_direct(outer)))
        self._log_deriv = CubicSpline(outer, np.log(-f1_prime_direct(outer)))
        self._built = True

    def _eval(self, y, bulk, log_tail, sign):
        if not self._built:
            self._build()
        arr = np.asarray(y, dtype=float)
        y = np.abs(arr.ravel())
        out = np.zeros_like(y)
        near = y <= self.SPLIT
        out[near] = bulk(y[near])
        tail = (~near) & (y < self.CUTOFF)
        out[tail] = sign * np.exp(log_tail(y[tail]))
        return float(out[0]) if arr.ndim == 0 else out.reshape(arr.shape)

    def value(self, y):
        return self._eval(y, self._bulk_value, self._tail_value, 1.0)

    def derivative(self, y):
        """f1'(|y|), i.e. the derivative on the positive half-line."""
        return self._eval(y, self._bulk_deriv, self._tail_deriv, -1.0)

    def _bulk_value(self, y):
        return self._value(y)

    def _tail_value(self, y):
        return self._log_value(y)

    def _bulk_deriv(self, y):
        return self._deriv(y)

    def _tail_deriv(self, y):
        return self._log_deriv(y)


_CACHE = _F1Cache()


def psi0_hat(xi):
    """``2 int_0^{1/2} cos(xi x) psi0(x) dx``; vectorised."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    return 2.0 * np.cos(np.outer(xi, _HAT_X)) @ (_HAT_W * psi0(_HAT_X))


def psi0_hat_imag(s):
    """``2 int_0^{1/2} cosh(s x) psi0(x) dx``, the transform at ``xi = i s``."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    return 2.0 * np.cosh(np.outer(s, _HAT_X)) @ (_HAT_W * psi0(_HAT_X))


def f1_hat(xi):
    return psi0_hat(xi) ** 2


@dataclass(frozen=True)
class QuadratureConfig:
    """Tolerances for adaptive quadrature and the spectral truncation radius.

    ``truncation_radius=None`` lets the spectral integral pick its radius by
    doubling until the next dyadic block contributes less than abs_tol / 10.
    """

    rel_tol: float = 1e-11
    abs_tol: float = 1e-14
    max_subdivisions: int = 200
    truncation_radius: float | None = None
    max_truncation_radius: float = 51200.0

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise PreconditionError("quadrature tolerances must be positive")
        if self.max_subdivisions < 1:
            raise PreconditionError("max_subdivisions must be positive")
        if self.truncation_radius is not None and self.truncation_radius <= 0:
            raise PreconditionError("truncation radius must be positive")


@dataclass(frozen=True)
class SpectralParameter:
    """A point ``r`` on the real axis or ``i t`` with ``t`` in [0, 1/2]."""

    value: float
    imaginary: bool = False

    def __post_init__(self):
        if self.value < 0:
            raise PreconditionError("spectral parameter must be non-negative")
        if self.imaginary and self.value > 0.5:
            raise PreconditionError("imaginary spectral parameter must lie in [0, 1/2]")

    @classmethod
    def real(cls, r: float) -> "SpectralParameter":
        return cls(float(r), False)

    @classmethod
    def imag(cls, t: float) -> "SpectralParameter":
        return cls(float(t), True)


@dataclass(frozen=True)
class TestFunctionFamily:
    """The scaled test function ``f_T`` together with its quadrature settings."""

    __test__ = False  # not a pytest class

    T: float
    quad: QuadratureConfig = field(default_factory=QuadratureConfig)

    def __post_init__(self):
        if not self.T > 1:
            raise PreconditionError(f"T must exceed 1, got {self.T}")

    @classmethod
    def for_genus(cls, g: int, quad: QuadratureConfig | None = None) -> "TestFunctionFamily":
        """The family with ``T = 4 log g``."""
        if g < 2:
            raise PreconditionError("genus must be at least 2")
        return cls(4.0 * math.log(g), quad or QuadratureConfig())

    def f(self, x):
        """Vectorised ``f_T``."""
        return _CACHE.value(np.asarray(x, dtype=float) / self.T)

    def f_prime(self, x):
        """Vectorised ``f_T'`` on x >= 0."""
        return _CACHE.derivative(np.asarray(x, dtype=float) / self.T) / self.T

    def _quad(self, fn, a, b, points=None):
        return adaptive_integral(fn, a, b, self.quad, points)


def adaptive_integral(fn, a: float, b: float, quad: QuadratureConfig | None = None, points=None) -> float:
    """``scipy.integrate.quad`` that raises ComputationError when the error estimate is too large."""
    q = quad or QuadratureConfig()
    with warnings.catch_warnings():
        # convergence is judged from the returned error estimate below
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(fn, a, b, epsabs=q.abs_tol, epsrel=q.rel_tol,
                                  limit=q.max_subdivisions, points=points)
    if err > max(q.abs_tol, q.rel_tol * abs(val)) * 100:
        raise ComputationError(f"quadrature did not converge: estimated error {err:.3e} for value {val:.6e}")
    return val


def fT_eval(fam: TestFunctionFamily, x: float) -> float:
    """``f_T(x) = f1(x / T)``."""
    return f1_eval(x / fam.T)


def fourier_fT(fam: TestFunctionFamily, s: SpectralParameter, method: str = "product") -> float:
    """``f_T_hat`` at a real point r or an imaginary point i t.

    ``method="product"`` uses ``f_T_hat(xi) = T psi0_hat(T xi)^2``;
    ``method="direct"`` integrates ``2 cos(r x) f_T(x)`` (or cosh) over [0, T].
    """
    T = fam.T
    if method == "product":
        if s.imaginary:
            return float(T * psi0_hat_imag(T * s.value)[0] ** 2)
        return float(T * psi0_hat(T * s.value)[0] ** 2)
    if method == "direct":
        if s.imaginary:
            fn = lambda x: 2.0 * math.cosh(s.value * x) * fam.f(x)
        else:
            fn = lambda x: 2.0 * math.cos(s.value * x) * fam.f(x)
        pts = list(np.linspace(0.0, T, 9)[1:-1])
        return fam._quad(fn, 0.0, T, points=pts)
    raise PreconditionError(f"unknown method {method!r}")


def inverse_abel_kT(fam: TestFunctionFamily, rho: float) -> float:
    """``k_T(rho)`` via the substitution ``cosh u = cosh rho + v^2``.

    The integrand becomes ``-(sqrt 2 / pi) f_T'(u(v)) / sinh(u(v))``, bounded
    at v = 0.  The v-range is split at the images of 16 equal steps in u so
    that each piece is smooth and well resolved.
    """
    if rho < 0:
        raise PreconditionError("rho must be non-negative")
    T = fam.T
    if rho >= T:
        return 0.0
    ch = math.cosh(rho)
    us = np.linspace(rho, T, 17)
    vs = np.sqrt(np.maximum(np.cosh(us) - ch, 0.0))

    def integrand(v):
        u = math.acosh(ch + v * v)
        sh = math.sinh(u)
        if sh == 0.0:
            # v -> 0 with rho = 0: f_T'(u)/sinh(u) -> f_T''(0), obtained from the spline
            u = 1e-8
            sh = math.sinh(u)
        return fam.f_prime(u) / sh

    total = 0.0
    for a, b in zip(vs[:-1], vs[1:]):
        total += fam._quad(integrand, float(a), float(b))
    return -SQRT2 / math.pi * total


@dataclass(frozen=True)
class SpectralResult:
    value: float
    truncation_radius: float
    truncation_error: float


def k_zero_spectral(fam: TestFunctionFamily, detail: bool = False):
    """``k_T(0) = (1/4 pi) int r f_T_hat(r) tanh(pi r) dr`` over the real line.

    After ``r' = T r`` this is ``(1 / (2 pi T)) int_0^R r' f1_hat(r') tanh(pi r'/T) dr'``;
    R grows by doubling (or is fixed by the config) and the last block's size
    is reported as the truncation error.
    """
    T = fam.T
    q = fam.quad

    def fn(r):
        return r * float(f1_hat(r)[0]) * math.tanh(math.pi * r / T)

    def block(a, b):
        val, err = integrate.quad(fn, a, b, epsabs=q.abs_tol * 1e-2, epsrel=q.rel_tol,
                                  limit=max(q.max_subdivisions, 500))
        return val

    scale = 1.0 / (2.0 * math.pi * T)
    if q.truncation_radius is not None:
        R = q.truncation_radius * T
        edges = [0.0] + [min(50.0 * 2 ** k, R) for k in range(40) if 50.0 * 2 ** (k - 1) < R]
        parts = [block(a, b) for a, b in zip(edges[:-1], edges[1:]) if b > a]
        total = sum(parts)
        tail = abs(parts[-1]) * scale
        if tail > q.abs_tol * 1e3:
            raise ComputationError(f"truncation error {tail:.3e} above tolerance at R = {q.truncation_radius}")
    else:
        edges = [0.0, 50.0]
        total = block(0.0, 50.0)
        while True:
            a = edges[-1]
            b = 2 * a
            part = block(a, b)
            total += part
            edges.append(b)
            tail = abs(part) * scale
            if tail < q.abs_tol / 10:
                break
            if b >= q.max_truncation_radius:
                raise ComputationError(f"spectral tail {tail:.3e} still above tolerance at r' = {b}")
        R = edges[-1]
    value = total * scale
    if detail:
        return SpectralResult(value, R / T, tail)
    return value


_SEG_NODES, _SEG_WEIGHTS = np.polynomial.legendre.leggauss(48)


def kT_values(fam: TestFunctionFamily, rhos) -> np.ndarray:
    """Vectorised k_T on an array of rho values.

    Same substitution and the same 16-piece split as :func:`inverse_abel_kT`,
    with a 48-point Gauss-Legendre rule on each piece instead of adaptive
    quadrature.
    """
    rhos = np.atleast_1d(np.asarray(rhos, dtype=float))
    T = fam.T
    out = np.zeros_like(rhos)
    live = rhos < T
    r = rhos[live]
    ch = np.cosh(r)
    frac = np.linspace(0.0, 1.0, 17)
    us = r[:, None] + (T - r)[:, None] * frac[None, :]
    vs = np.sqrt(np.maximum(np.cosh(us) - ch[:, None], 0.0))
    a, b = vs[:, :-1], vs[:, 1:]
    half, mid = (b - a) / 2.0, (b + a) / 2.0
    v = half[..., None] * _SEG_NODES + mid[..., None]
    u = np.arccosh(ch[:, None, None] + v * v)
    sh = np.sinh(u)
    tiny = sh < 1e-12
    u = np.where(tiny, 1e-8, u)
    sh = np.where(tiny, np.sinh(1e-8), sh)
    vals = fam.f_prime(u.ravel()).reshape(u.shape) / sh
    total = np.einsum("ijk,k,ij->i", vals, _SEG_WEIGHTS, half)
    out[live] = -SQRT2 / math.pi * total
    return out


def abel_forward_at_zero(fam: TestFunctionFamily, detail: bool = False):
    """Forward Abel transform of k_T at 0, which must return ``f_T(0) = f1(0)``.

    The forward transform paired with the inverse used for k_T is
    ``sqrt 2 int_0^T k_T(rho) sinh(rho) / sqrt(cosh rho - 1) drho``, and
    ``sinh(rho) / sqrt(cosh rho - 1) = sqrt 2 cosh(rho / 2)``.  The outer
    integral is a 32-piece composite 48-point Gauss-Legendre rule over [0, T]
    on top of :func:`kT_values`.  With ``detail=True`` the bare integral
    (without the leading sqrt 2) is returned as well.
    """
    T = fam.T
    edges = np.linspace(0.0, T, 33)
    half = (edges[1:] - edges[:-1]) / 2.0
    mid = (edges[1:] + edges[:-1]) / 2.0
    rho = (half[:, None] * _SEG_NODES + mid[:, None]).ravel()
    w = (half[:, None] * _SEG_WEIGHTS).ravel()
    raw = float(np.sum(w * kT_values(fam, rho) * SQRT2 * np.cosh(rho / 2.0)))
    value = SQRT2 * raw
    if detail:
        return value, raw
    return value


def empirical_C_eps(Ts: Sequence[float], eps: float, t_grid: Sequence[float], per_T: bool = False):
    """``min over (T, t) of f_T_hat(i t) exp(-T (1 - eps) t) / T``.

    With ``per_T=True`` the minimum for each T is returned as a list as well.
    """
    if not 0 < eps < 1:
        raise PreconditionError("eps must lie in (0, 1)")
    Ts, t_grid = list(Ts), np.asarray(list(t_grid), dtype=float)
    if not Ts or t_grid.size == 0:
        raise PreconditionError("grids must be non-empty")
    if np.any(t_grid < 0) or np.any(t_grid > 0.5):
        raise PreconditionError("t values must lie in [0, 1/2]")
    minima = []
    for T in Ts:
        TestFunctionFamily(T)  # validates T
        vals = psi0_hat_imag(T * t_grid) ** 2 * np.exp(-T * (1.0 - eps) * t_grid)
        minima.append(float(vals.min()))
    overall = min(minima)
    if per_T:
        return overall, minima
    return overall


def table_rows(fam: TestFunctionFamily, kind: str, points: Iterable[float]):
    """Rows ``(x, f_T(x))``, ``(t, f_T_hat(i t))`` or ``(rho, k_T(rho))``."""
    rows = []
    for p in points:
        p = float(p)
        if kind == "f":
            rows.append((p, fT_eval(fam, p)))
        elif kind == "fhat":
            rows.append((p, fourier_fT(fam, SpectralParameter.imag(p))))
        elif kind == "k":
            rows.append((p, inverse_abel_kT(fam, p)))
        else:
            raise PreconditionError(f"unknown table kind {kind!r}")
    return rows
