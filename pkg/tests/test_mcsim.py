import math

import numpy as np
import pytest
from scipy import stats

from hoytdf.analytic import (
    NetworkScenario,
    RelayState,
    qam_scheme,
    relay_error_prob,
    state_probability,
    symbol_conditioned_ser,
    total_ser,
)
from hoytdf.channel import HoytLink
from hoytdf.errors import DomainError
from hoytdf.mcsim import (
    TrialOutcome,
    build_constellation,
    demodulate,
    estimate_ser,
    run_trial,
    simulate_block,
)


def db(x):
    return 10.0 ** (x / 10.0)


def within(est, p, sigmas=3.0):
    sigma = math.sqrt(p * (1 - p) / est.trials)
    return abs(est.ser - p) <= sigmas * sigma


def awgn_qam_ser(m, snr):
    c = 1 - 1 / math.sqrt(m)
    pq = stats.norm.sf(math.sqrt(3 * snr / (m - 1)))
    return 4 * c * pq - 4 * c * c * pq * pq


# --- constellation ---------------------------------------------------------


def test_4qam_points():
    c = build_constellation(4)
    expected = {complex(a, b) / math.sqrt(2) for a in (-1, 1) for b in (-1, 1)}
    assert len(c.points) == 4
    for p in c.points:
        assert min(abs(p - e) for e in expected) < 1e-15


def test_16qam_lattice():
    c = build_constellation(16)
    scaled = c.points * math.sqrt(10)
    assert sorted(set(np.round(scaled.real, 12))) == [-3, -1, 1, 3]
    assert sorted(set(np.round(scaled.imag, 12))) == [-3, -1, 1, 3]
    assert len(set(np.round(scaled, 12))) == 16


@pytest.mark.parametrize("m", [4, 16, 64, 256])
def test_unit_energy_and_gray(m):
    c = build_constellation(m)
    assert np.mean(np.abs(c.points) ** 2) == pytest.approx(1.0, abs=1e-12)
    assert sorted(c.gray_labels) == list(range(m))
    d_min = np.min([abs(a - b) for i, a in enumerate(c.points) for b in c.points[:i]])
    for i, a in enumerate(c.points):
        for j, b in enumerate(c.points):
            if i < j and abs(abs(a - b) - d_min) < 1e-9:
                assert bin(int(c.gray_labels[i]) ^ int(c.gray_labels[j])).count("1") == 1


def test_constellation_rejects_bad_order():
    with pytest.raises(DomainError):
        build_constellation(8)


def test_demodulate_round_trip():
    c = build_constellation(16)
    assert [demodulate(c, p) for p in c.points] == list(range(16))
    assert list(demodulate(c, c.points)) == list(range(16))


def test_demodulate_tie_goes_to_lowest_index():
    assert demodulate(build_constellation(4), 0.0) == 0


# --- simulator -------------------------------------------------------------


def test_run_trial_outcome():
    sc = NetworkScenario.symmetric(4, 2, 0.5, db(10.0))
    out = run_trial(sc, build_constellation(4), np.random.default_rng(1))
    assert isinstance(out, TrialOutcome)
    assert out.active_relays.k == 2


def test_constellation_must_match():
    sc = NetworkScenario.symmetric(4, 1, 0.5, 1.0)
    with pytest.raises(DomainError):
        simulate_block(sc, build_constellation(16), np.random.default_rng(0), 10)


@pytest.mark.parametrize("m", [4, 16])
def test_awgn_calibration(m):
    sc = NetworkScenario.symmetric(m, 0, 1.0, db(10.0))
    est = estimate_ser(sc, 10**6, seed=101, fading=False)
    assert within(est, awgn_qam_ser(m, db(10.0)))


def test_noiseless_limit_never_errs():
    link = HoytLink(q=0.5, noise=1e-14)
    sc = NetworkScenario(sd=link, sr=(link,) * 2, rd=(link,) * 2, qam=qam_scheme(16))
    assert estimate_ser(sc, 200_000, seed=4).errors == 0


def test_silent_relays_reduce_to_direct_rayleigh():
    sd = HoytLink.from_snr(1.0, db(10.0))
    quiet = HoytLink(q=1.0, power=0.0)
    sc = NetworkScenario(sd=sd, sr=(sd, sd), rd=(quiet, quiet), qam=qam_scheme(4))
    mu = math.sqrt(0.5 * db(10.0) / (1 + 0.5 * db(10.0)))
    ref = 2 * 0.5 * (1 - mu) - 0.25 * (1 - 4 / math.pi * mu * math.atan(1 / mu))
    assert within(estimate_ser(sc, 10**6, seed=8), ref)


def test_zero_snr_guessing_floor():
    quiet = HoytLink(q=0.7, power=0.0)
    sc = NetworkScenario(sd=quiet, sr=(quiet,), rd=(quiet,), qam=qam_scheme(4))
    assert within(estimate_ser(sc, 10**6, seed=2), 0.75)


def test_one_relay_matches_analytic():
    sc = NetworkScenario.symmetric(4, 1, 0.5, db(10.0))
    assert within(estimate_ser(sc, 10**6, seed=12), total_ser(sc).total)


def test_two_iid_relays_match_analytic():
    sc = NetworkScenario.symmetric(4, 2, 0.3, db(15.0))
    assert within(estimate_ser(sc, 10**6, seed=13), total_ser(sc).total)


def test_relay_error_frequency_ten_million():
    link = HoytLink.from_snr(1.0, 10.0)
    sc = NetworkScenario(sd=link, sr=(link,), rd=(link,), qam=qam_scheme(4))
    est = estimate_ser(sc, 10**7, seed=77)
    p = relay_error_prob(link, sc.qam)
    assert abs(est.relay_failures[0] / est.trials - p) <= 3 * math.sqrt(p * (1 - p) / est.trials)


@pytest.mark.parametrize("q,snr_db", [(0.3, 5.0), (0.5, 10.0), (1.0, 20.0)])
def test_relay_failure_counts_per_link(q, snr_db):
    qam = qam_scheme(16)
    sr = (HoytLink.from_db(q, snr_db), HoytLink.from_db(q, snr_db + 3.0))
    sc = NetworkScenario(sd=sr[0], sr=sr, rd=sr, qam=qam)
    est = estimate_ser(sc, 10**6, seed=21)
    for count, link in zip(est.relay_failures, sr):
        p = relay_error_prob(link, qam)
        assert abs(count / est.trials - p) <= 3 * math.sqrt(p * (1 - p) / est.trials)


def test_state_frequencies_multinomial():
    qam = qam_scheme(4)
    sr = (HoytLink.from_db(0.3, 3.0), HoytLink.from_db(0.8, 6.0))
    sc = NetworkScenario(sd=sr[0], sr=sr, rd=sr, qam=qam)
    est = estimate_ser(sc, 10**6, seed=31)
    ps = [relay_error_prob(l, qam) for l in sr]
    expected = np.array([state_probability(s, ps) for s in RelayState.all_states(2)]) * est.trials
    chi2 = stats.chisquare(est.state_counts, expected)
    assert chi2.pvalue > 1e-3


def test_symbol_class_model_matches_16qam():
    # For M > 4 relay failures and destination errors correlate through the
    # transmitted symbol; the class-resolved expression tracks the simulator.
    sc = NetworkScenario.symmetric(16, 2, 0.5, db(10.0))
    assert within(estimate_ser(sc, 10**6, seed=44), symbol_conditioned_ser(sc))


# --- reproducibility -------------------------------------------------------


def test_same_seed_same_estimate():
    sc = NetworkScenario.symmetric(16, 2, 0.4, db(8.0))
    assert estimate_ser(sc, 150_000, seed=9) == estimate_ser(sc, 150_000, seed=9)
    assert estimate_ser(sc, 150_000, seed=9) != estimate_ser(sc, 150_000, seed=10)


def test_worker_count_does_not_matter():
    sc = NetworkScenario.symmetric(4, 3, 0.4, db(5.0))
    ref = estimate_ser(sc, 300_000, seed=5)
    assert estimate_ser(sc, 300_000, seed=5, workers=4) == ref


def test_estimate_fields():
    sc = NetworkScenario.symmetric(4, 1, 0.4, db(5.0))
    est = estimate_ser(sc, 70_000, seed=3)
    assert est.trials == 70_000 and est.seed == 3
    assert est.std_error == pytest.approx(math.sqrt(est.ser * (1 - est.ser) / est.trials))
    assert sum(est.state_counts) == est.trials


@pytest.mark.parametrize("trials", [0, -5, 2.5])
def test_trials_must_be_positive(trials):
    with pytest.raises(DomainError):
        estimate_ser(NetworkScenario.symmetric(4, 0, 1.0, 1.0), trials, seed=1)
