"""Built-in verification suite.

Each check returns a :class:`CheckResult`; ``run_all`` runs them in order.
The acceptance tests call the same functions at full scale, the ``validate``
CLI subcommand can run them in a reduced ``quick`` mode.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .analytic import (
    NetworkScenario,
    RelayState,
    i1_closed,
    i1_iid,
    i2_closed,
    i2_iid,
    i3_closed,
    i4_closed,
    qam_scheme,
    ser_oracle_quadrature,
    total_ser,
)
from .channel import HoytLink, cdf_snr, mgf, pdf_snr, sample_gains
from .mcsim import estimate_ser
from .specfun import LauricellaArgs, lauricella_fd

ORACLE_TOL = 1e-6
MC_SIGMAS = 3.0
MC_MIN_SER = 1e-4
MC_PASS_RATE = 0.99
RAYLEIGH_MGF_TOL = 1e-12
RAYLEIGH_SER_TOL = 1e-8
REDUCTION_TOL = 1e-10
IID_TOL = 1e-9
CDF_DERIV_TOL = 1e-6
KS_TOL = 0.002


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    failures: list = field(default_factory=list)

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail}"


def db(x):
    return 10.0 ** (x / 10.0)


def inid_scenario(m: int, k: int, snr_db: float, variant: int) -> NetworkScenario:
    """Two fixed non-identical assignments used across the grids.

    Variant 0 degrades the relay-destination hops, variant 1 the source-relay
    hops; per-relay SNR offsets alternate around the nominal SNR.
    """
    q_rd = [(0.3, 0.7, 1.0), (0.5, 1.0, 0.8)][variant]
    q_sr = [(0.5, 1.0, 0.8), (0.3, 0.7, 0.5)][variant]
    off_rd = [(-2.0, 2.0, 0.0), (1.0, -1.0, 3.0)][variant]
    off_sr = [(3.0, 0.0, -3.0), (-2.0, 2.0, 0.0)][variant]
    q_sd = (0.5, 0.8)[variant]
    sd = HoytLink.from_db(q_sd, snr_db)
    sr = tuple(HoytLink.from_db(q_sr[i], snr_db + off_sr[i]) for i in range(k))
    rd = tuple(HoytLink.from_db(q_rd[i], snr_db + off_rd[i]) for i in range(k))
    return NetworkScenario(sd=sd, sr=sr, rd=rd, qam=qam_scheme(m))


def scenario_grid(ms=(4, 16), ks=(0, 1, 2, 3), qs=(0.3, 0.5, 1.0), snrs_db=(0.0, 5.0, 10.0, 20.0)):
    """Symmetric points over (M, K, q, SNR) plus two i.n.i.d assignments per (M, K >= 1, SNR)."""
    out = []
    for m, k, q, s in itertools.product(ms, ks, qs, snrs_db):
        out.append((f"M={m} K={k} q={q} {s:g}dB", NetworkScenario.symmetric(m, k, q, db(s))))
    for m, k, s, v in itertools.product(ms, ks, snrs_db, (0, 1)):
        if k:
            out.append((f"M={m} K={k} inid{v} {s:g}dB", inid_scenario(m, k, s, v)))
    return out


def _rel(a, b):
    return abs(a - b) / abs(b)


def check_closed_vs_oracle(grid=None) -> CheckResult:
    grid = scenario_grid() if grid is None else grid
    worst, failures, count = 0.0, [], 0
    for label, sc in grid:
        o3, o4 = ser_oracle_quadrature(
            NetworkScenario(sd=sc.sd, sr=(), rd=(), qam=sc.qam), RelayState(())
        )
        devs = [_rel(i3_closed(sc.sd, sc.qam), o3), _rel(i4_closed(sc.sd, sc.qam), o4)]
        for state in RelayState.all_states(sc.k):
            o1, o2 = ser_oracle_quadrature(sc, state)
            devs += [_rel(i1_closed(sc, state), o1), _rel(i2_closed(sc, state), o2)]
            count += 1
        for link in sc.sr:
            single = NetworkScenario(sd=link, sr=(), rd=(), qam=sc.qam)
            o3, o4 = ser_oracle_quadrature(single, RelayState(()))
            devs += [_rel(i3_closed(link, sc.qam), o3), _rel(i4_closed(link, sc.qam), o4)]
        d = max(devs)
        worst = max(worst, d)
        if not d < ORACLE_TOL:
            failures.append((label, d))
    return CheckResult(
        "closed form vs quadrature oracle",
        not failures,
        f"{len(grid)} scenarios, {count} relay states, max rel dev {worst:.2e} (tol {ORACLE_TOL:g})",
        failures,
    )


def check_analytic_vs_mc(grid=None, trials=10**6, seed=20240101, min_ser=MC_MIN_SER) -> CheckResult:
    """Binomial 3-sigma agreement; sigma taken at the analytic SER (the null hypothesis)."""
    grid = scenario_grid(snrs_db=(0.0, 5.0, 10.0, 20.0)) if grid is None else grid
    checked, failures = 0, []
    seeds = np.random.SeedSequence(seed).spawn(len(grid))
    for (label, sc), ss in zip(grid, seeds):
        p = total_ser(sc).total
        if p < min_ser:
            continue
        est = estimate_ser(sc, trials, int(ss.generate_state(1)[0]))
        sigma = math.sqrt(p * (1.0 - p) / trials)
        z = (est.ser - p) / sigma
        checked += 1
        if abs(z) > MC_SIGMAS:
            failures.append((label, p, est.ser, z))
    rate = 1.0 - len(failures) / checked if checked else 0.0
    return CheckResult(
        "analytic vs Monte Carlo",
        checked > 0 and rate >= MC_PASS_RATE,
        f"{checked - len(failures)}/{checked} points within {MC_SIGMAS:g} sigma "
        f"(pass rate {rate:.1%}, need {MC_PASS_RATE:.0%}, {trials} trials)",
        failures,
    )


def rayleigh_qam_ser(m: int, gamma_bar: float) -> float:
    """Square M-QAM SER over Rayleigh fading, direct link."""
    qam = qam_scheme(m)
    c = qam.c_const
    mu = math.sqrt(qam.g_qam * gamma_bar / (1.0 + qam.g_qam * gamma_bar))
    return 2.0 * c * (1.0 - mu) - c * c * (1.0 - 4.0 / math.pi * mu * math.atan(1.0 / mu))


def check_rayleigh_reduction(snrs_db=tuple(range(-5, 36, 5))) -> CheckResult:
    worst_mgf, worst_ser = 0.0, 0.0
    for s_db in snrs_db:
        link = HoytLink.from_db(1.0, s_db)
        for s in (-0.01, -0.1, -1.0, -10.0, -100.0, 0.0):
            ref = 1.0 / (1.0 - s * link.gamma_bar)
            worst_mgf = max(worst_mgf, _rel(mgf(link, s), ref))
        sc = NetworkScenario.symmetric(4, 0, 1.0, db(s_db))
        worst_ser = max(worst_ser, _rel(total_ser(sc).total, rayleigh_qam_ser(4, db(s_db))))
    ok = worst_mgf < RAYLEIGH_MGF_TOL and worst_ser < RAYLEIGH_SER_TOL
    return CheckResult(
        "Rayleigh reduction",
        ok,
        f"max MGF rel dev {worst_mgf:.1e} (tol {RAYLEIGH_MGF_TOL:g}), "
        f"max 4-QAM SER rel dev {worst_ser:.1e} (tol {RAYLEIGH_SER_TOL:g})",
    )


def check_structural_reductions(grid=None) -> CheckResult:
    grid = scenario_grid() if grid is None else grid
    worst_n0 = worst_iid = worst_fd = 0.0
    for _, sc in grid:
        zero = RelayState((False,) * sc.k)
        worst_n0 = max(
            worst_n0,
            _rel(i1_closed(sc, zero), i3_closed(sc.sd, sc.qam)),
            _rel(i2_closed(sc, zero), i4_closed(sc.sd, sc.qam)),
        )
        if len({(l.q, l.gamma_bar) for l in sc.rd}) <= 1:
            for st in RelayState.all_states(sc.k):
                worst_iid = max(
                    worst_iid,
                    _rel(i1_iid(sc, st), i1_closed(sc, st)),
                    _rel(i2_iid(sc, st), i2_closed(sc, st)),
                )
    for a, c, n in itertools.product((0.5, 1.5, 3.5), (4.0, 6.0), (1, 3, 7)):
        worst_fd = max(worst_fd, abs(lauricella_fd(LauricellaArgs(a, (0.5,) * n, c, (0.0,) * n)) - 1.0))
    ok = worst_n0 < REDUCTION_TOL and worst_iid < IID_TOL and worst_fd < REDUCTION_TOL
    return CheckResult(
        "structural reductions",
        ok,
        f"n=0 vs I3/I4 {worst_n0:.1e} (tol {REDUCTION_TOL:g}), iid vs inid {worst_iid:.1e} "
        f"(tol {IID_TOL:g}), F_D(x=0) - 1 {worst_fd:.1e} (tol {REDUCTION_TOL:g})",
    )


def check_channel_law(samples=10**6, seed=5, qs_ks=(0.3, 0.5, 1.0)) -> CheckResult:
    worst_d = 0.0
    gb = 2.0
    for q in (0.3, 0.5, 0.8, 1.0):
        link = HoytLink.from_snr(q, gb)
        g = gb * np.arange(0.1, 5.0001, 0.1)
        h = 1e-5 * gb
        deriv = (cdf_snr(link, g + h) - cdf_snr(link, g - h)) / (2 * h)
        worst_d = max(worst_d, float(np.max(np.abs(deriv - pdf_snr(link, g)))))
    rng = np.random.default_rng(seed)
    ks = {}
    for q in qs_ks:
        link = HoytLink.from_snr(q, gb)
        snr = np.abs(sample_gains(link, rng, samples)) ** 2 * link.power / link.noise
        ks[q] = stats.kstest(snr, lambda x: cdf_snr(link, x)).statistic
    ok = worst_d < CDF_DERIV_TOL and max(ks.values()) < KS_TOL
    ks_txt = ", ".join(f"q={q}: {v:.5f}" for q, v in ks.items())
    return CheckResult(
        "channel law consistency",
        ok,
        f"max |dCDF - PDF| {worst_d:.1e} (tol {CDF_DERIV_TOL:g}); KS ({samples} samples) {ks_txt} (tol {KS_TOL:g})",
    )


def _sweep(m, k, q, snrs):
    return np.array([total_ser(NetworkScenario.symmetric(m, k, q, db(s))).total for s in snrs])


def check_relay_ordering(snrs_db=np.arange(0.0, 30.01, 1.0)) -> CheckResult:
    curves = {(k, q): _sweep(4, k, q, snrs_db) for k in range(4) for q in (0.3, 1.0)}
    hi = snrs_db >= 5.0
    problems = []
    for q in (0.3, 1.0):
        for k in (1, 2):
            if not np.all(curves[(k + 1, q)][hi] < curves[(k, q)][hi]):
                problems.append(f"K={k + 1} not below K={k} at q={q}")
    for k in (1, 2, 3):
        if not np.all(curves[(k, 1.0)][hi] < curves[(k, 0.3)][hi]):
            problems.append(f"q=1 not below q=0.3 at K={k}")
    coop_max = np.max([curves[(k, q)] for k in (1, 2, 3) for q in (0.3, 1.0)], axis=0)
    for q in (0.3, 1.0):
        if not np.all(curves[(0, q)] > coop_max):
            problems.append(f"direct q={q} not above every cooperative curve")
    return CheckResult(
        "ordering in K, q and against direct transmission",
        not problems,
        "; ".join(problems) or f"all orderings hold on {len(snrs_db)} SNR points",
        problems,
    )


def _cp_bounds(errors: int, trials: int, sigmas: float = MC_SIGMAS):
    tail = stats.norm.sf(sigmas)
    lo = stats.beta.ppf(tail, errors, trials - errors + 1) if errors else 0.0
    hi = stats.beta.ppf(1.0 - tail, errors + 1, trials - errors) if errors < trials else 1.0
    return lo, hi


def check_modulation_ordering(snrs_db=np.arange(0.0, 30.01, 1.0), trials=4 * 10**6, seed=33) -> CheckResult:
    problems = []
    for q in (0.3, 1.0):
        s4, s16 = _sweep(4, 2, q, snrs_db), _sweep(16, 2, q, snrs_db)
        if not np.all(s16 > s4):
            problems.append(f"16-QAM not above 4-QAM at q={q}")
    a4 = total_ser(NetworkScenario.symmetric(4, 2, 1.0, db(25.0))).total
    a16 = total_ser(NetworkScenario.symmetric(16, 2, 1.0, db(25.0))).total
    if not a16 >= 10.0 * a4:
        problems.append(f"analytic separation {a16 / a4:.1f} < 10 at 25 dB")
    e4 = estimate_ser(NetworkScenario.symmetric(4, 2, 1.0, db(25.0)), trials, seed)
    e16 = estimate_ser(NetworkScenario.symmetric(16, 2, 1.0, db(25.0)), trials, seed + 1)
    lo16, _ = _cp_bounds(e16.errors, trials)
    _, hi4 = _cp_bounds(e4.errors, trials)
    if not lo16 >= 10.0 * hi4:
        problems.append(f"Monte Carlo separation not established: 16-QAM >= {lo16:.2e}, 4-QAM <= {hi4:.2e}")
    return CheckResult(
        "16-QAM above 4-QAM",
        not problems,
        "; ".join(problems)
        or f"analytic ratio {a16 / a4:.0f} at 25 dB; MC 16-QAM >= {lo16:.2e} vs 4-QAM <= {hi4:.2e}",
        problems,
    )


def sensitivity_scenario(q_sr: float, q_rd: float, snr_db: float = 15.0, q_sd: float = 1.0) -> NetworkScenario:
    g = db(snr_db)
    return NetworkScenario(
        sd=HoytLink.from_snr(q_sd, g),
        sr=(HoytLink.from_snr(q_sr, g),) * 2,
        rd=(HoytLink.from_snr(q_rd, g),) * 2,
        qam=qam_scheme(4),
    )


def check_link_sensitivity() -> CheckResult:
    base = total_ser(sensitivity_scenario(1.0, 1.0)).total
    d_rd = total_ser(sensitivity_scenario(1.0, 0.3)).total - base
    d_sr = total_ser(sensitivity_scenario(0.3, 1.0)).total - base
    return CheckResult(
        "relay-destination vs source-relay sensitivity",
        d_rd > d_sr > 0,
        f"base {base:.3e}; degrading q_RD adds {d_rd:.3e}, degrading q_SR adds {d_sr:.3e}",
    )


def run_all(quick: bool = False):
    """Run every check; ``quick`` shrinks grids and trial counts for the CLI."""
    if quick:
        small = scenario_grid(ms=(4, 16), ks=(0, 1, 2), qs=(0.3, 1.0), snrs_db=(5.0, 15.0))
        mc_grid = scenario_grid(ms=(4, 16), ks=(0, 1, 2), qs=(0.3, 1.0), snrs_db=(5.0, 10.0))
        return [
            check_closed_vs_oracle(small),
            check_analytic_vs_mc(mc_grid, trials=2 * 10**5),
            check_rayleigh_reduction(),
            check_structural_reductions(small),
            check_channel_law(qs_ks=(0.5,)),
            check_relay_ordering(np.arange(0.0, 30.01, 5.0)),
            check_link_sensitivity(),
        ]
    return [
        check_closed_vs_oracle(),
        check_analytic_vs_mc(),
        check_rayleigh_reduction(),
        check_structural_reductions(),
        check_channel_law(),
        check_relay_ordering(),
        check_modulation_ordering(),
        check_link_sensitivity(),
    ]
