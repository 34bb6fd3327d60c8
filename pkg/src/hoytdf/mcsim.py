"""Link-level Monte Carlo simulation of the decode-and-forward relay network.

Each trial draws a QAM symbol, broadcasts it over the direct and the K
source-relay hops, lets every relay detect it (ML), and has the relays that
detected it correctly re-transmit on their own orthogonal slot.  The
destination combines the direct path and the forwarding relays with MRC
weights sqrt(P) h^* / N0 and detects the normalised statistic.

Trials are simulated in vectorised blocks.  Every block draws from its own
substream spawned from the seed, and blocks are reduced in index order, so an
estimate depends only on (scenario, trials, seed).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .analytic import NetworkScenario, RelayState, qam_scheme
from .channel import HoytLink, sample_gains
from .errors import DomainError

__all__ = [
    "Constellation",
    "TrialOutcome",
    "SerEstimate",
    "BLOCK_SIZE",
    "build_constellation",
    "demodulate",
    "simulate_block",
    "run_trial",
    "estimate_ser",
]

BLOCK_SIZE = 65536


def _gray(v):
    return v ^ (v >> 1)


@dataclass(frozen=True, eq=False)
class Constellation:
    """Unit-energy square QAM.  Point ``i = row * L + col`` sits at lattice
    coordinates (2 row - L + 1, 2 col - L + 1) on the (I, Q) axes."""

    m: int
    points: np.ndarray
    gray_labels: np.ndarray


def build_constellation(m: int) -> Constellation:
    qam = qam_scheme(m)
    side = math.isqrt(qam.m)
    levels = 2.0 * np.arange(side) - (side - 1)
    rows, cols = np.meshgrid(np.arange(side), np.arange(side), indexing="ij")
    points = (levels[rows] + 1j * levels[cols]).ravel()
    # Average energy of the unscaled lattice is 2 (M - 1) / 3.
    points = points / math.sqrt(2.0 * (qam.m - 1) / 3.0)
    bits = side.bit_length() - 1
    labels = ((_gray(rows) << bits) | _gray(cols)).ravel()
    points.setflags(write=False)
    labels.setflags(write=False)
    return Constellation(m=qam.m, points=points, gray_labels=labels)


def demodulate(c: Constellation, y):
    """Index of the nearest constellation point; ties go to the lowest index."""
    y_arr = np.asarray(y, dtype=complex)
    # argmin |y - x|^2 = argmin (|x|^2 - 2 Re(y conj(x))); argmin keeps the first hit
    metric = np.abs(c.points) ** 2 - 2.0 * (y_arr[..., None] * np.conj(c.points)).real
    idx = np.argmin(metric, axis=-1)
    return int(idx) if idx.ndim == 0 else idx


@dataclass(frozen=True)
class TrialOutcome:
    symbol_error: bool
    active_relays: RelayState


@dataclass(frozen=True)
class SerEstimate:
    ser: float
    trials: int
    std_error: float
    seed: int
    relay_failures: tuple[int, ...] = ()
    state_counts: tuple[int, ...] = ()

    @property
    def errors(self) -> int:
        return int(round(self.ser * self.trials))


def _awgn(link: HoytLink, rng, n):
    # complex noise of total variance N0, N0/2 per real dimension
    s = math.sqrt(link.noise / 2.0)
    return s * (rng.standard_normal(n) + 1j * rng.standard_normal(n))


def _gains(link: HoytLink, rng, n, fading: bool):
    if fading:
        return sample_gains(link, rng, n)
    return np.full(n, math.sqrt(link.omega), dtype=complex)


def simulate_block(
    scenario: NetworkScenario,
    c: Constellation,
    rng: np.random.Generator,
    n: int,
    fading: bool = True,
):
    """Simulate ``n`` independent trials.

    Returns ``(symbol_errors, forwarded)``: a boolean array of shape (n,) and a
    boolean array of shape (n, K) marking relays that decoded correctly.
    ``fading=False`` pins every channel gain to sqrt(omega) (AWGN only).
    """
    if c.m != scenario.qam.m:
        raise DomainError(f"constellation order {c.m} does not match scenario M={scenario.qam.m}")
    k = scenario.k
    sent = rng.integers(c.m, size=n)
    x = c.points[sent]

    sd = scenario.sd
    h_sd = _gains(sd, rng, n, fading)
    y_sd = math.sqrt(sd.power) * h_sd * x + _awgn(sd, rng, n)
    combined = math.sqrt(sd.power) * np.conj(h_sd) / sd.noise * y_sd
    gain = sd.power * np.abs(h_sd) ** 2 / sd.noise

    forwarded = np.zeros((n, k), dtype=bool)
    for j, (sr, rd) in enumerate(zip(scenario.sr, scenario.rd)):
        h_sr = _gains(sr, rng, n, fading)
        y_sr = math.sqrt(sr.power) * h_sr * x + _awgn(sr, rng, n)
        with np.errstate(divide="ignore", invalid="ignore"):
            eq = y_sr / (math.sqrt(sr.power) * h_sr)
        eq = np.where(np.isfinite(eq), eq, 0.0)
        ok = demodulate(c, eq) == sent
        forwarded[:, j] = ok

        p_fwd = rd.power * ok
        h_rd = _gains(rd, rng, n, fading)
        y_rd = np.sqrt(p_fwd) * h_rd * x + _awgn(rd, rng, n)
        combined = combined + np.sqrt(p_fwd) * np.conj(h_rd) / rd.noise * y_rd
        gain = gain + p_fwd * np.abs(h_rd) ** 2 / rd.noise

    with np.errstate(divide="ignore", invalid="ignore"):
        stat = combined / gain
    stat = np.where(gain > 0, stat, 0.0)
    decided = demodulate(c, stat)
    return decided != sent, forwarded


def run_trial(
    scenario: NetworkScenario, c: Constellation, rng: np.random.Generator, fading: bool = True
) -> TrialOutcome:
    errors, fwd = simulate_block(scenario, c, rng, 1, fading)
    return TrialOutcome(symbol_error=bool(errors[0]), active_relays=RelayState(tuple(fwd[0])))


def _block_counts(scenario, c, seed_seq, n, fading):
    rng = np.random.Generator(np.random.PCG64(seed_seq))
    errors, fwd = simulate_block(scenario, c, rng, n, fading)
    k = scenario.k
    z = (fwd * (1 << np.arange(k))).sum(axis=1) if k else np.zeros(n, dtype=int)
    return (
        int(errors.sum()),
        (~fwd).sum(axis=0).astype(np.int64),
        np.bincount(z, minlength=1 << k).astype(np.int64),
    )


def estimate_ser(
    scenario: NetworkScenario,
    trials: int,
    seed: int,
    workers: int = 1,
    fading: bool = True,
    block_size: int = BLOCK_SIZE,
) -> SerEstimate:
    """Monte Carlo SER with binomial standard error.

    The result is bit-identical for a given (scenario, trials, seed) whatever
    ``workers`` is.
    """
    if int(trials) != trials or trials < 1:
        raise DomainError(f"trials must be a positive integer, got {trials}")
    trials = int(trials)
    c = build_constellation(scenario.qam.m)
    n_blocks = -(-trials // block_size)
    sizes = [block_size] * (n_blocks - 1) + [trials - block_size * (n_blocks - 1)]
    streams = np.random.SeedSequence(seed).spawn(n_blocks)

    def work(i):
        return _block_counts(scenario, c, streams[i], sizes[i], fading)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(work, range(n_blocks)))
    else:
        parts = [work(i) for i in range(n_blocks)]

    errors = 0
    relay_fail = np.zeros(scenario.k, dtype=np.int64)
    states = np.zeros(1 << scenario.k, dtype=np.int64)
    for e, rf, st in parts:
        errors += e
        relay_fail += rf
        states += st
    ser = errors / trials
    return SerEstimate(
        ser=ser,
        trials=trials,
        std_error=math.sqrt(ser * (1.0 - ser) / trials),
        seed=seed,
        relay_failures=tuple(int(v) for v in relay_fail),
        state_counts=tuple(int(v) for v in states),
    )
