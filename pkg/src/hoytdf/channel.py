"""Nakagami-q (Hoyt) faded wireless hop.

A hop is described by its fading parameter q in (0, 1], mean channel power
omega = E|h|^2, transmit power and noise variance.  The received SNR
gamma = |h|^2 P / N0 has mean gamma_bar = omega P / N0 and density

    p(gamma) = (1+q^2)/(2 q gamma_bar) exp(-(1+q^2)^2 gamma / (4 q^2 gamma_bar))
               * I0((1-q^4) gamma / (4 q^2 gamma_bar))

q = 1 is Rayleigh fading (exponential SNR).

CDF argument pair
-----------------
The CDF is written as Q1(alpha sqrt(g), beta sqrt(g)) - Q1(beta sqrt(g), alpha sqrt(g))
with g = gamma / gamma_bar.  Matching its derivative to the density fixes

    alpha^2 = (1 - q^4)(1 + q) / (4 q^2 (1 - q)) = (1 + q^2)(1 + q)^2 / (4 q^2)
    beta^2  = (1 - q^4)(1 - q) / (4 q^2 (1 + q)) = (1 + q^2)(1 - q)^2 / (4 q^2)

since (alpha^2 + beta^2)/2 and alpha*beta must reproduce the exponential and
Bessel arguments of the density.  The often-quoted variant with (1 + q^4) in
the numerators and 8q in the denominators does not differentiate to the
density; ``_cdf_args_alt`` keeps it only so the tests can show that.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .specfun import bessel_i0e, marcum_q1

__all__ = [
    "HoytLink",
    "ComplexGain",
    "pdf_snr",
    "cdf_snr",
    "mgf",
    "mgf_craig",
    "sample_gain",
    "sample_gains",
    "quadrature_stddevs",
]


@dataclass(frozen=True)
class HoytLink:
    q: float
    omega: float = 1.0
    power: float = 1.0
    noise: float = 1.0
    gamma_bar: float = field(init=False)

    def __post_init__(self):
        for name in ("q", "omega", "power", "noise"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")
        if not 0.0 < self.q <= 1.0:
            raise DomainError(f"q must lie in (0, 1], got {self.q}")
        if self.omega <= 0.0:
            raise DomainError(f"omega must be positive, got {self.omega}")
        if self.power < 0.0:
            raise DomainError(f"power must be non-negative, got {self.power}")
        if self.noise <= 0.0:
            raise DomainError(f"noise must be positive, got {self.noise}")
        object.__setattr__(self, "gamma_bar", self.omega * self.power / self.noise)

    @classmethod
    def from_snr(cls, q: float, gamma_bar: float, omega: float = 1.0, noise: float = 1.0) -> "HoytLink":
        """Link with the given mean SNR, realised through the transmit power."""
        return cls(q=q, omega=omega, power=gamma_bar * noise / omega, noise=noise)

    @classmethod
    def from_db(cls, q: float, snr_db: float, omega: float = 1.0, noise: float = 1.0) -> "HoytLink":
        return cls.from_snr(q, 10.0 ** (snr_db / 10.0), omega=omega, noise=noise)


@dataclass(frozen=True)
class ComplexGain:
    re: float
    im: float

    def __post_init__(self):
        if not (math.isfinite(self.re) and math.isfinite(self.im)):
            raise DomainError("gain components must be finite")

    def __complex__(self):
        return complex(self.re, self.im)


def _check_gamma(gamma):
    g = np.asarray(gamma, dtype=float)
    if np.any(~np.isfinite(g)) or np.any(g < 0):
        raise DomainError("SNR argument must be finite and non-negative")
    return g


def _out(v):
    return float(v) if np.ndim(v) == 0 else v


def pdf_snr(link: HoytLink, gamma):
    """Density of the instantaneous SNR."""
    g = _check_gamma(gamma)
    gb, q2 = link.gamma_bar, link.q**2
    if gb == 0.0:
        raise DomainError("density undefined for a silent link (gamma_bar = 0)")
    pref = (1.0 + q2) / (2.0 * link.q * gb)
    decay = (1.0 + q2) ** 2 / (4.0 * q2 * gb)
    bess = (1.0 - q2**2) / (4.0 * q2 * gb)
    # exp(-decay g) I0(bess g) = exp(-(decay - bess) g) * i0e(bess g)
    return _out(pref * np.exp(-(decay - bess) * g) * bessel_i0e(bess * g))


def _cdf_args(q: float):
    q2 = q * q
    alpha2 = (1.0 + q2) * (1.0 + q) ** 2 / (4.0 * q2)
    beta2 = (1.0 + q2) * (1.0 - q) ** 2 / (4.0 * q2)
    return math.sqrt(alpha2), math.sqrt(beta2)


def _cdf_args_alt(q: float):
    q4 = q**4
    alpha2 = (1.0 + q4) * (1.0 + q) / (8.0 * q * (1.0 - q))
    beta2 = (1.0 - q4) * (1.0 - q) / (8.0 * q * (1.0 + q))
    return math.sqrt(alpha2), math.sqrt(beta2)


def cdf_snr(link: HoytLink, gamma, _args=_cdf_args):
    """P(SNR <= gamma) as a difference of two Marcum Q_1 values."""
    g = _check_gamma(gamma)
    if link.gamma_bar == 0.0:
        return _out(np.ones_like(g))
    alpha, beta = _args(link.q)
    r = np.sqrt(g / link.gamma_bar)
    value = marcum_q1(alpha * r, beta * r) - marcum_q1(beta * r, alpha * r)
    return _out(np.clip(value, 0.0, 1.0))


def mgf(link: HoytLink, s: float) -> float:
    """Moment generating function E[exp(s * SNR)]."""
    x = 2.0 * s * link.gamma_bar
    q2 = link.q**2
    # 1 - x + x^2 q^2/(1+q^2)^2 = (1 - x/(1+q^2)) (1 - x q^2/(1+q^2)); the
    # expectation is finite only below the smaller root x = 1 + q^2.
    if not x < 1.0 + q2:
        raise DomainError(f"MGF diverges at s={s}")
    radicand = (1.0 - x / (1.0 + q2)) * (1.0 - x * q2 / (1.0 + q2))
    return radicand**-0.5


def mgf_craig(link: HoytLink, g: float, theta: float) -> float:
    """MGF at s = -g / sin^2(theta), in the factored Craig form."""
    if not 0.0 < theta <= math.pi / 2:
        raise DomainError(f"theta must lie in (0, pi/2], got {theta}")
    if not g > 0:
        raise DomainError(f"g must be positive, got {g}")
    s2 = math.sin(theta) ** 2
    q2 = link.q**2
    scale = 2.0 * link.gamma_bar * g / ((1.0 + q2) * s2)
    return ((1.0 + scale) * (1.0 + q2 * scale)) ** -0.5


def quadrature_stddevs(link: HoytLink) -> tuple[float, float]:
    """(sigma_x, sigma_y) with sigma_y / sigma_x = q and sigma_x^2 + sigma_y^2 = omega."""
    q2 = link.q**2
    var_x = link.omega / (1.0 + q2)
    return math.sqrt(var_x), math.sqrt(q2 * var_x)


def sample_gains(link: HoytLink, rng: np.random.Generator, size) -> np.ndarray:
    """Draw complex Hoyt channel gains h = X + iY."""
    sx, sy = quadrature_stddevs(link)
    re = rng.standard_normal(size) * sx
    im = rng.standard_normal(size) * sy
    return re + 1j * im


def sample_gain(link: HoytLink, rng: np.random.Generator) -> ComplexGain:
    h = sample_gains(link, rng, None)
    return ComplexGain(float(h.real), float(h.imag))
