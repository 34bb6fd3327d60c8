"""Special functions for the Hoyt relay analysis.

Three functions matter here: the modified Bessel function I0 (Hoyt PDF), the
first-order Marcum Q-function (Hoyt CDF) and the Lauricella function F_D of
n variables, which closes the MGF-based error integrals.  F_D is evaluated
from its Euler integral

    F_D(a; b; c; x) = Gamma(c) / (Gamma(a) Gamma(c-a))
                      * int_0^1 t^(a-1) (1-t)^(c-a-1) prod_i (1 - x_i t)^(-b_i) dt

by adaptive quadrature, which stays cheap when the number of variables grows
(the multiple power series does not).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, special

from .errors import DomainError, NumericError

__all__ = [
    "QuadratureSpec",
    "LauricellaArgs",
    "DEFAULT_QUAD",
    "bessel_i0",
    "bessel_i0e",
    "marcum_q1",
    "integrate_finite",
    "lauricella_fd",
]


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances for :func:`integrate_finite`."""

    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    max_subdivisions: int = 60

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise DomainError("quadrature tolerances must be positive")
        if int(self.max_subdivisions) != self.max_subdivisions or self.max_subdivisions < 1:
            raise DomainError("max_subdivisions must be a positive integer")


DEFAULT_QUAD = QuadratureSpec()


@dataclass(frozen=True)
class LauricellaArgs:
    """Parameters of F_D^(n)(a; b_1..b_n; c; x_1..x_n)."""

    a: float
    b: tuple[float, ...]
    c: float
    x: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "b", tuple(float(v) for v in self.b))
        object.__setattr__(self, "x", tuple(float(v) for v in self.x))
        if len(self.b) != len(self.x):
            raise DomainError(f"len(b)={len(self.b)} differs from len(x)={len(self.x)}")
        values = (self.a, self.c, *self.b, *self.x)
        if not all(math.isfinite(v) for v in values):
            raise DomainError("Lauricella parameters must be finite")
        if not (self.c > self.a > 0):
            raise DomainError(f"need c > a > 0 for the Euler integral, got a={self.a}, c={self.c}")
        if any(xi >= 1 for xi in self.x):
            raise DomainError("every x_i must be < 1")

    @property
    def n(self) -> int:
        return len(self.x)


def _check_finite(x):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError("argument must be finite")
    return arr


def _as_output(arr):
    return float(arr) if np.ndim(arr) == 0 else arr


def bessel_i0(x):
    """Modified Bessel function of the first kind, order zero."""
    return _as_output(special.i0(_check_finite(x)))


def bessel_i0e(x):
    """Exponentially scaled I0, ``exp(-|x|) * I0(x)``; never overflows."""
    return _as_output(special.i0e(_check_finite(x)))


_MARCUM_RTOL = 1e-14
_MARCUM_MAX_TERMS = 100_000


def _bessel_series(r, z, start):
    """sum_{k>=start} r^k ive(k, z), with r in (0, 1), vectorised over r, z."""
    total = np.zeros_like(z)
    active = np.arange(z.size)
    rk = r ** start
    k = start
    while active.size:
        term = rk[active] * special.ive(k, z[active])
        total[active] += term
        ra = r[active]
        # Terms decrease at least geometrically with ratio r, so the tail is
        # bounded by term * r / (1 - r).
        tail = term * ra / (1.0 - ra)
        done = (tail <= _MARCUM_RTOL * total[active]) | (term == 0.0)
        active = active[~done]
        k += 1
        rk = rk * r
        if k - start > _MARCUM_MAX_TERMS:
            raise NumericError("Marcum Q series did not converge", float(total[active[0]]))
    return total


def marcum_q1(a, b):
    """First-order Marcum Q-function Q_1(a, b); accepts scalars or arrays.

    Uses the Neumann series in modified Bessel functions.  For a < b the
    series for Q_1 itself has ratio a/b < 1; for a > b the complementary series
    for 1 - Q_1 is summed instead (ratio b/a), so neither tail suffers from
    cancellation.  Bessel values are exponentially scaled to avoid overflow.
    """
    a_arr, b_arr = np.broadcast_arrays(_check_finite(a), _check_finite(b))
    if np.any(a_arr < 0) or np.any(b_arr < 0):
        raise DomainError("Marcum Q_1 needs a >= 0 and b >= 0")
    a_f = a_arr.ravel().astype(float)
    b_f = b_arr.ravel().astype(float)
    out = np.empty_like(a_f)

    b_zero = b_f == 0.0
    a_zero = (a_f == 0.0) & ~b_zero
    equal = (a_f == b_f) & ~b_zero & ~a_zero
    below = (a_f < b_f) & ~a_zero
    above = (a_f > b_f) & ~b_zero

    out[b_zero] = 1.0
    out[a_zero] = np.exp(-0.5 * b_f[a_zero] ** 2)
    # Q_1(a, a) = (1 + exp(-a^2) I0(a^2)) / 2
    out[equal] = 0.5 * (1.0 + special.ive(0, a_f[equal] ** 2))

    if np.any(below):
        aa, bb = a_f[below], b_f[below]
        scale = np.exp(-0.5 * (aa - bb) ** 2)
        out[below] = scale * _bessel_series(aa / bb, aa * bb, 0)
    if np.any(above):
        aa, bb = a_f[above], b_f[above]
        scale = np.exp(-0.5 * (aa - bb) ** 2)
        out[above] = 1.0 - scale * _bessel_series(bb / aa, aa * bb, 1)

    return _as_output(np.clip(out, 0.0, 1.0).reshape(a_arr.shape))


def integrate_finite(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    quad: QuadratureSpec = DEFAULT_QUAD,
    points: Sequence[float] = (),
) -> float:
    """Adaptive Gauss-Kronrod integral of ``f`` over ``[lo, hi]``.

    ``points`` are interior breakpoints where ``f`` changes scale abruptly;
    the adaptive rule would otherwise sample across them blindly.  Raises :class:`NumericError` carrying the estimate and its error bound when
    the requested tolerance is not met within ``quad.max_subdivisions``.
    """
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise DomainError(f"need finite lo < hi, got [{lo}, {hi}]")
    inner = sorted(p for p in points if lo < p < hi)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        value, bound, info = integrate.quad(
            f,
            lo,
            hi,
            epsabs=quad.abs_tol,
            epsrel=quad.rel_tol,
            limit=int(quad.max_subdivisions),
            full_output=1,
            points=inner or None,
        )[:3]
    target = max(quad.abs_tol, quad.rel_tol * abs(value))
    if not math.isfinite(value) or bound > target:
        raise NumericError(
            f"quadrature on [{lo}, {hi}] missed tolerance after {info['last']} subdivisions",
            value,
            bound,
        )
    return value


def _endpoint_map(exponent_plus_one: float):
    """Power k of the substitution s = w^k removing s^(e) at s = 0, e = exponent."""
    # s^(e) ds = k w^(k(e+1) - 1) dw.  k = 2 smooths half-integer exponents;
    # k = 1/(e+1) flattens stronger singularities completely.
    return 2.0 if exponent_plus_one >= 0.5 else 1.0 / exponent_plus_one


def lauricella_fd(args: LauricellaArgs, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Lauricella F_D^(n) from its Euler integral.

    The interval is split at t = 1/2.  Near t = 0 the substitution t = u^k and
    near t = 1 the substitution 1 - t = v^k absorb the endpoint power laws, so
    the integrand handed to the quadrature is bounded.
    """
    if not isinstance(args, LauricellaArgs):
        raise DomainError("expected LauricellaArgs")
    a, c = args.a, args.c
    d = c - a
    # Factors with b_i = 0 or x_i = 0 are identically one.
    pairs = [(bi, xi) for bi, xi in zip(args.b, args.x) if bi != 0.0 and xi != 0.0]
    bs = [p[0] for p in pairs]
    xs = [p[1] for p in pairs]

    def log_product(t: float) -> float:
        acc = 0.0
        for bi, xi in zip(bs, xs):
            acc -= bi * math.log1p(-xi * t)
        return acc

    log_beta = math.lgamma(a) + math.lgamma(d) - math.lgamma(c)

    k_left = _endpoint_map(a)
    k_right = _endpoint_map(d)

    def left(u: float) -> float:
        t = u**k_left
        return k_left * u ** (k_left * a - 1.0) * math.exp((d - 1.0) * math.log1p(-t) + log_product(t) - log_beta)

    def right(v: float) -> float:
        s = v**k_right
        t = 1.0 - s
        return k_right * v ** (k_right * d - 1.0) * math.exp((a - 1.0) * math.log(t) + log_product(t) - log_beta)

    # A variable with x_i << -1 switches its factor off within t ~ 1/|x_i|
    # of the origin; breakpoints at every decade from that scale up to 1/2
    # keep the adaptive rule from stepping over the layer.
    scales = {10.0**j / -xi for xi in xs if xi < -2.0 for j in range(int(math.log10(-xi)) + 1)}
    left_points = [t ** (1.0 / k_left) for t in sorted(scales) if t < 0.5]

    def halves(spec):
        lo_half = integrate_finite(left, 0.0, 0.5 ** (1.0 / k_left), spec, left_points)
        hi_half = integrate_finite(right, 0.0, 0.5 ** (1.0 / k_right), spec)
        return lo_half + hi_half

    value = halves(quad)
    if 0.0 < value < 1.0:
        # Large negative x_i make F_D tiny, and then abs_tol alone would be a
        # loose relative tolerance.  Rescale it and integrate again.
        value = halves(replace(quad, abs_tol=quad.abs_tol * value))
    return value
