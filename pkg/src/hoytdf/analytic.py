"""Exact average SER of a K-relay decode-and-forward network over Hoyt fading.

The destination combines the direct path with every relay that decoded
correctly (MRC), so for a relay decoding pattern z with n active relays

    P(e | z) = (4C/pi) I1 - (4C^2/pi) I2,
    I1 = int_0^{pi/2} prod_j (1 + a_j / sin^2 t)^(-1/2) dt,
    I2 = same integrand over [0, pi/4],

where the a_j run over the 2n + 2 link constants (A1, A2 of the direct path
and B1k, B2k of each active relay-destination hop).  Substituting u = sin^2 t
turns both integrals into Euler integrals of a Lauricella F_D of dimension
2n + 2 (I1) and 2n + 3 (I2).  A failed relay contributes an MGF factor of one
and drops out entirely; n is therefore the count of decoding relays, not K.

The average SER sums P(e | z) P(z) over the 2^K patterns, with independent
relay decoding errors given by the same construction on the source-relay hop.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .channel import HoytLink, mgf_craig
from .errors import DomainError, ResourceError
from .specfun import DEFAULT_QUAD, LauricellaArgs, QuadratureSpec, integrate_finite, lauricella_fd

__all__ = [
    "QamScheme",
    "NetworkScenario",
    "RelayState",
    "StateTerm",
    "SerBreakdown",
    "MAX_RELAYS",
    "qam_scheme",
    "link_constants",
    "i1_closed",
    "i2_closed",
    "i1_iid",
    "i2_iid",
    "i3_closed",
    "i4_closed",
    "relay_error_prob",
    "conditional_dest_error",
    "state_probability",
    "total_ser",
    "ser_oracle_quadrature",
    "symbol_error_from_integrals",
    "symbol_conditioned_ser",
]

MAX_RELAYS = 20


@dataclass(frozen=True)
class QamScheme:
    m: int
    c_const: float
    g_qam: float


def qam_scheme(m: int) -> QamScheme:
    """Constants C = 1 - 1/sqrt(M) and g = 3 / (2(M - 1)) of square M-QAM."""
    if isinstance(m, bool) or int(m) != m:
        raise DomainError(f"modulation order must be an integer, got {m!r}")
    m = int(m)
    root = math.isqrt(m) if m > 0 else 0
    if m < 4 or root * root != m:
        raise DomainError(f"M must be a perfect square >= 4, got {m}")
    return QamScheme(m=m, c_const=1.0 - 1.0 / root, g_qam=3.0 / (2.0 * (m - 1)))


@dataclass(frozen=True)
class NetworkScenario:
    sd: HoytLink
    sr: tuple[HoytLink, ...]
    rd: tuple[HoytLink, ...]
    qam: QamScheme

    def __post_init__(self):
        object.__setattr__(self, "sr", tuple(self.sr))
        object.__setattr__(self, "rd", tuple(self.rd))
        if len(self.sr) != len(self.rd):
            raise DomainError(f"{len(self.sr)} source-relay links but {len(self.rd)} relay-destination links")
        if isinstance(self.qam, int):
            object.__setattr__(self, "qam", qam_scheme(self.qam))

    @property
    def k(self) -> int:
        return len(self.sr)

    @classmethod
    def symmetric(cls, m: int, k: int, q: float, gamma_bar: float) -> "NetworkScenario":
        """All 2K + 1 hops share q and gamma_bar (unit omega and noise)."""
        link = HoytLink.from_snr(q, gamma_bar)
        return cls(sd=link, sr=(link,) * k, rd=(link,) * k, qam=qam_scheme(m))


@dataclass(frozen=True)
class RelayState:
    """Decoding outcome of the K relays; True means decoded correctly."""

    bits: tuple[bool, ...]

    def __post_init__(self):
        object.__setattr__(self, "bits", tuple(bool(b) for b in self.bits))

    @property
    def k(self) -> int:
        return len(self.bits)

    @property
    def n_active(self) -> int:
        return sum(self.bits)

    @property
    def index(self) -> int:
        return sum(1 << i for i, b in enumerate(self.bits) if b)

    @classmethod
    def from_index(cls, z: int, k: int) -> "RelayState":
        if not 0 <= z < (1 << k):
            raise DomainError(f"state index {z} out of range for K={k}")
        return cls(tuple(bool((z >> i) & 1) for i in range(k)))

    @classmethod
    def all_states(cls, k: int):
        return [cls.from_index(z, k) for z in range(1 << k)]


@dataclass(frozen=True)
class StateTerm:
    state: RelayState
    probability: float
    conditional_error: float


@dataclass(frozen=True)
class SerBreakdown:
    total: float
    per_state: tuple[StateTerm, ...]


def link_constants(link: HoytLink, g: float) -> tuple[float, float]:
    """(2 g gbar / (1+q^2), 2 g q^2 gbar / (1+q^2)) of one hop."""
    if not g > 0:
        raise DomainError(f"g must be positive, got {g}")
    q2 = link.q**2
    first = 2.0 * g * link.gamma_bar / (1.0 + q2)
    return first, q2 * first


def _check_state(scenario: NetworkScenario, state: RelayState):
    if state.k != scenario.k:
        raise DomainError(f"state has {state.k} relays, scenario has {scenario.k}")


def _mrc_constants(scenario: NetworkScenario, state: RelayState) -> list[float]:
    _check_state(scenario, state)
    g = scenario.qam.g_qam
    consts = list(link_constants(scenario.sd, g))
    for active, link in zip(state.bits, scenario.rd):
        if active:
            consts.extend(link_constants(link, g))
    return consts


def _craig_closed(consts: Sequence[float], weights: Sequence[float], quarter: bool, quad: QuadratureSpec) -> float:
    """Closed form of int prod_j (1 + a_j/sin^2)^(-w_j) over [0, pi/2] or [0, pi/4].

    With u = sin^2 and m = 2 sum w_j the integrand becomes
    u^((m-1)/2) (1-u)^(-1/2) prod (u + a_j)^(-w_j) / 2, an Euler integral with
    a = (m+1)/2.  Over [0, pi/2]: c = a + 1/2.  Over [0, pi/4] rescale u = y/2:
    c = a + 1 and (1 - y/2)^(-1/2) becomes an extra variable x = 1/2.
    Constants equal to zero are silent links whose factor is exactly one.
    """
    pairs = [(a, w) for a, w in zip(consts, weights) if a != 0.0 and w != 0.0]
    if not pairs:
        return math.pi / 4 if quarter else math.pi / 2
    m = 2.0 * sum(w for _, w in pairs)
    a = 0.5 * (m + 1.0)
    log_consts = sum(w * math.log(c) for c, w in pairs)
    b = tuple(w for _, w in pairs)
    if not quarter:
        c = a + 0.5
        fd = lauricella_fd(LauricellaArgs(a, b, c, tuple(-1.0 / v for v, _ in pairs)), quad)
        log_pref = 0.5 * math.log(math.pi) + math.lgamma(a) - math.lgamma(c) - math.log(2.0) - log_consts
    else:
        c = a + 1.0
        x = tuple(-0.5 / v for v, _ in pairs) + (0.5,)
        fd = lauricella_fd(LauricellaArgs(a, b + (0.5,), c, x), quad)
        log_pref = math.lgamma(a) - math.lgamma(c) - (a + 1.0) * math.log(2.0) - log_consts
    return math.exp(log_pref) * fd


def i1_closed(scenario: NetworkScenario, state: RelayState, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """I1 for independent, non-identical hops (one F_D variable per constant)."""
    consts = _mrc_constants(scenario, state)
    return _craig_closed(consts, [0.5] * len(consts), False, quad)


def i2_closed(scenario: NetworkScenario, state: RelayState, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    consts = _mrc_constants(scenario, state)
    return _craig_closed(consts, [0.5] * len(consts), True, quad)


def _iid_constants(scenario: NetworkScenario, state: RelayState):
    _check_state(scenario, state)
    active = [link for bit, link in zip(state.bits, scenario.rd) if bit]
    if any((l.q, l.gamma_bar) != (active[0].q, active[0].gamma_bar) for l in active[1:]):
        raise DomainError("active relay-destination links are not identically distributed")
    g = scenario.qam.g_qam
    a1, a2 = link_constants(scenario.sd, g)
    n = len(active)
    if n == 0:
        return [a1, a2], [0.5, 0.5]
    b1, b2 = link_constants(active[0], g)
    # n identical relay factors merge into one F_D variable with b = n/2.
    return [a1, a2, b1, b2], [0.5, 0.5, 0.5 * n, 0.5 * n]


def i1_iid(scenario: NetworkScenario, state: RelayState, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    consts, weights = _iid_constants(scenario, state)
    return _craig_closed(consts, weights, False, quad)


def i2_iid(scenario: NetworkScenario, state: RelayState, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    consts, weights = _iid_constants(scenario, state)
    return _craig_closed(consts, weights, True, quad)


def i3_closed(link: HoytLink, qam: QamScheme, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """pi / (4 sqrt(C1 C2)) F_D^(2)(3/2; 1/2, 1/2; 2; -1/C1, -1/C2)."""
    c1, c2 = link_constants(link, qam.g_qam)
    if c1 == 0.0:
        return math.pi / 2
    fd = lauricella_fd(LauricellaArgs(1.5, (0.5, 0.5), 2.0, (-1.0 / c1, -1.0 / c2)), quad)
    return math.pi / (4.0 * math.sqrt(c1 * c2)) * fd


def i4_closed(link: HoytLink, qam: QamScheme, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """1 / (6 sqrt(2 C1 C2)) F_D^(3)(3/2; 1/2, 1/2, 1/2; 5/2; -1/(2C1), -1/(2C2), 1/2)."""
    c1, c2 = link_constants(link, qam.g_qam)
    if c1 == 0.0:
        return math.pi / 4
    args = LauricellaArgs(1.5, (0.5, 0.5, 0.5), 2.5, (-0.5 / c1, -0.5 / c2, 0.5))
    return lauricella_fd(args, quad) / (6.0 * math.sqrt(2.0 * c1 * c2))


def symbol_error_from_integrals(qam: QamScheme, i1: float, i2: float) -> float:
    c = qam.c_const
    return 4.0 * c / math.pi * i1 - 4.0 * c * c / math.pi * i2


def relay_error_prob(link: HoytLink, qam: QamScheme, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Symbol error probability of one hop, i.e. P(relay fails to decode)."""
    return symbol_error_from_integrals(qam, i3_closed(link, qam, quad), i4_closed(link, qam, quad))


def conditional_dest_error(
    scenario: NetworkScenario, state: RelayState, quad: QuadratureSpec = DEFAULT_QUAD
) -> float:
    """Destination SER after MRC given which relays forward."""
    return symbol_error_from_integrals(scenario.qam, i1_closed(scenario, state, quad), i2_closed(scenario, state, quad))


def state_probability(state: RelayState, relay_errors: Sequence[float]) -> float:
    """prod_k p_k^(1 - b_k) (1 - p_k)^(b_k)."""
    if len(relay_errors) != state.k:
        raise DomainError(f"{len(relay_errors)} relay error probabilities for K={state.k}")
    prob = 1.0
    for ok, p in zip(state.bits, relay_errors):
        if not 0.0 <= p <= 1.0:
            raise DomainError(f"relay error probability {p} outside [0, 1]")
        prob *= (1.0 - p) if ok else p
    return prob


def total_ser(scenario: NetworkScenario, quad: QuadratureSpec = DEFAULT_QUAD) -> SerBreakdown:
    """Average end-to-end SER by enumeration of all 2^K relay decoding patterns."""
    if scenario.k > MAX_RELAYS:
        raise ResourceError(f"K={scenario.k} exceeds the enumeration cap of {MAX_RELAYS} relays")
    relay_errors = [relay_error_prob(link, scenario.qam, quad) for link in scenario.sr]
    terms = []
    total = 0.0
    for state in RelayState.all_states(scenario.k):
        p_state = state_probability(state, relay_errors)
        p_err = conditional_dest_error(scenario, state, quad)
        terms.append(StateTerm(state, p_state, p_err))
        total += p_state * p_err
    return SerBreakdown(total=total, per_state=tuple(terms))


def ser_oracle_quadrature(
    scenario: NetworkScenario, state: RelayState, quad: QuadratureSpec = DEFAULT_QUAD
) -> tuple[float, float]:
    """(I1, I2) by direct theta-quadrature of the MGF product in Craig form."""
    _check_state(scenario, state)
    g = scenario.qam.g_qam
    links = [scenario.sd] + [l for bit, l in zip(state.bits, scenario.rd) if bit]

    links = [l for l in links if l.gamma_bar > 0.0]

    def integrand(theta: float) -> float:
        prod = 1.0
        for link in links:
            prod *= mgf_craig(link, g, theta)
        return prod

    # A factor (1 + a/sin^2)^(-1/2) with small a rises from 0 to ~1 within
    # sin(theta) ~ sqrt(a); mark that region for the adaptive rule.
    small = [c for l in links for c in link_constants(l, g) if c < 0.1]
    points = sorted({math.asin(math.sqrt(c * 10.0**j)) for c in small for j in range(int(-math.log10(c)) + 1)})
    return (
        integrate_finite(integrand, 0.0, math.pi / 2, quad, points),
        integrate_finite(integrand, 0.0, math.pi / 4, quad, points),
    )


def _symbol_classes(qam: QamScheme):
    """Neighbour-count classes (n_i, n_q, weight) of square QAM symbols.

    Per axis an outer level has one neighbour and an inner level two; the
    symbol error probability given the symbol is n Q - n_i n_q Q^2 with
    n = n_i + n_q.  Averaging over the classes gives back 4C and 4C^2.
    """
    side = math.isqrt(qam.m)
    per_axis = [(1, 2.0 / side)] + ([(2, (side - 2.0) / side)] if side > 2 else [])
    return [(ni, nq, wi * wq) for ni, wi in per_axis for nq, wq in per_axis]


def symbol_conditioned_ser(scenario: NetworkScenario, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Average SER with relay decoding and destination detection both
    conditioned on the transmitted symbol's neighbour class.

    :func:`total_ser` averages relay failure and destination error over the
    symbol separately, which is exact when every symbol has the same number of
    neighbours (M = 4).  For larger M inner symbols fail more often at the
    relays *and* at the destination, and this function keeps that correlation.
    It coincides with :func:`total_ser` for K = 0 or M = 4.
    """
    if scenario.k > MAX_RELAYS:
        raise ResourceError(f"K={scenario.k} exceeds the enumeration cap of {MAX_RELAYS} relays")
    qam = scenario.qam
    relay_ints = [(i3_closed(l, qam, quad), i4_closed(l, qam, quad)) for l in scenario.sr]
    states = RelayState.all_states(scenario.k)
    dest_ints = [(i1_closed(scenario, s, quad), i2_closed(scenario, s, quad)) for s in states]
    total = 0.0
    for ni, nq, weight in _symbol_classes(qam):
        lin, quadr = (ni + nq) / math.pi, ni * nq / math.pi
        p_relay = [lin * i3 - quadr * i4 for i3, i4 in relay_ints]
        for state, (i1, i2) in zip(states, dest_ints):
            total += weight * state_probability(state, p_relay) * (lin * i1 - quadr * i2)
    return total
