import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

import oracles
from seema.infotheory import (DetectorConfig, UnboundedSupremumError, asymptotic_exponent_iid,
                              average_kl, bernoulli_log_mgf, chernoff_bound_iid, decide, detector_threshold,
                              exponent_sweep_dc, hoeffding_bound_inid, kl_bernoulli, legendre_transform,
                              mixture_log_mgf, rate_report)
from seema.model import SensorProfile

probs = st.floats(1e-4, 1 - 1e-4)


def ordered_pair(a, b):
    p0, p1 = sorted((a, b))
    assume(p1 - p0 > 1e-3)
    return p0, p1


def iid(p0, p1, N, eta=1.0, Z=1.0):
    return DetectorConfig.iid(SensorProfile.from_probs(p0, p1), N, eta, Z)


# KL divergences

def test_kl_examples():
    assert kl_bernoulli(0.5, 0.5) == 0.0
    assert kl_bernoulli(0.2, 0.1) == pytest.approx(float(oracles.kl(0.2, 0.1)), rel=1e-14)
    assert kl_bernoulli(0.2, 0.1) == pytest.approx(0.2 * math.log(2) + 0.8 * math.log(8 / 9), rel=1e-14)
    assert kl_bernoulli(0.0, 0.3) == pytest.approx(math.log(1 / 0.7), rel=1e-14)
    assert kl_bernoulli(1.0, 0.3) == pytest.approx(math.log(1 / 0.3), rel=1e-14)


def test_kl_domain_errors():
    with pytest.raises(ValueError):
        kl_bernoulli(0.5, 0.0)
    with pytest.raises(ValueError):
        kl_bernoulli(0.5, 1.0)
    with pytest.raises(ValueError):
        kl_bernoulli(1.2, 0.5)
    assert kl_bernoulli(0.0, 0.0) == 0.0


@given(st.floats(0, 1), probs)
def test_kl_nonnegative_and_oracle(q0, q1):
    d = kl_bernoulli(q0, q1)
    assert d >= 0
    assert d == pytest.approx(float(oracles.kl(q0, q1)), rel=1e-9, abs=1e-14)


def test_average_kl():
    prof = [SensorProfile.from_probs(0.1, 0.3), SensorProfile.from_probs(0.2, 0.5)]
    expected = float((oracles.kl(0.1, 0.3) + oracles.kl(0.2, 0.5)) / 2)
    assert average_kl(prof, "01") == pytest.approx(expected, rel=1e-14)
    assert average_kl(prof, "01") == pytest.approx(0.154533256803881, rel=1e-12)
    assert average_kl(prof[:1] * 5, "10") == pytest.approx(kl_bernoulli(0.3, 0.1), rel=1e-14)
    same = [SensorProfile.from_probs(p, p) for p in (0.1, 0.4, 0.7)]
    assert average_kl(same, "01") == 0.0
    with pytest.raises(ValueError):
        average_kl([], "01")


# detector

def test_threshold_examples():
    cfg = iid(0.0574, 0.3422, 50)
    assert detector_threshold(cfg) == pytest.approx(math.log(0.9426 / 0.6578), rel=1e-14)
    assert detector_threshold(cfg) == pytest.approx(0.3598, abs=1e-4)


@given(st.lists(st.tuples(probs, probs), min_size=1, max_size=30), st.floats(-5, 5))
def test_threshold_decompositions(pairs, log_eta):
    profiles = []
    for a, b in pairs:
        p0, p1 = sorted((a, b))
        profiles.append(SensorProfile.from_probs(p0, p1))
    cfg = DetectorConfig(math.exp(log_eta), 1.0, tuple(profiles))
    tau = detector_threshold(cfg)  # raises on disagreement
    assert tau == pytest.approx(np.mean(cfg.p0 * cfg.A) + cfg.delta0, abs=1e-12 * max(1, abs(tau)))


def test_decide_ties_go_to_h0():
    cfg = iid(0.1, 0.3, 10, Z=2.0)
    tau = detector_threshold(cfg)
    assert decide(2.0 * tau, cfg) == 0
    assert decide(2.0 * (tau + 1), cfg) == 1
    assert decide(2.0 * (tau - 1), cfg) == 0
    assert list(decide(np.array([2 * tau, 2 * tau + 1e-9]), cfg)) == [0, 1]


# bounds

def test_hoeffding_noiseless_closed_form():
    p0, p1, N = 0.0574, 0.3422, 40
    cfg = iid(p0, p1, N)
    b = hoeffding_bound_inid(cfg, 0.0, 1.0)
    A = cfg.A[0]
    assert b.valid
    assert b.H0 == pytest.approx(math.exp(-2 * N * kl_bernoulli(p0, p1) ** 2 / A ** 2), rel=1e-12)


def test_bounds_vacuous_below_minimal_size():
    cfg = iid(0.1, 0.3, 2, eta=1e-6)
    assert cfg.delta0 <= 0
    assert hoeffding_bound_inid(cfg, 1.0, 1.0) == (1.0, 1.0, False)
    assert chernoff_bound_iid(cfg, 1.0, 1.0) == (1.0, 1.0, False)


def test_hoeffding_monotone_in_N():
    vals = [hoeffding_bound_inid(iid(0.06, 0.34, N), 5.0, 1.0) for N in range(1, 400)]
    assert all(b.H0 >= c.H0 and b.H1 >= c.H1 for b, c in zip(vals, vals[1:]))


def test_bounds_grow_with_noise():
    cfg = iid(0.06, 0.34, 80)
    prev = (0.0, 0.0, 0.0, 0.0)
    for s2 in (0.0, 0.5, 2.0, 8.0, 50.0, 1e3, 1e5):
        h, c = hoeffding_bound_inid(cfg, s2, 1.0), chernoff_bound_iid(cfg, s2, 1.0)
        cur = (h.H0, h.H1, c.H0, c.H1)
        assert all(x >= y for x, y in zip(cur, prev))
        assert all(0 <= x <= 1 for x in cur)
        prev = cur
    assert prev[0] > 0.99 and prev[1] > 0.9


def test_chernoff_noiseless_equals_exponent():
    p0, p1 = 0.0574331196320036, 0.3421122526169636
    I = asymptotic_exponent_iid(p0, p1)
    for N in (10, 50, 200):
        c = chernoff_bound_iid(iid(p0, p1, N), 0.0, 1.0)
        assert c.H0 == pytest.approx(math.exp(-N * I), rel=1e-12)
        assert c.H1 == pytest.approx(math.exp(-N * I), rel=1e-12)


def test_chernoff_noise_correction_vanishes():
    cfg = iid(0.06, 0.34, 50)
    I = asymptotic_exponent_iid(0.06, 0.34)
    gaps = [-math.log(chernoff_bound_iid(cfg, 5.0, E).H0) / 50 - I for E in (1, 10, 100, 1e4, 1e8)]
    assert all(g <= 0 for g in gaps)
    assert all(abs(b) <= abs(a) for a, b in zip(gaps, gaps[1:]))
    assert abs(gaps[-1]) < 1e-8


@given(probs, probs, st.integers(1, 500), st.floats(-3, 3))
def test_chernoff_below_hoeffding_noiseless(a, b, N, log_eta):
    # Pinsker's inequality makes this hold for every noiseless configuration
    p0, p1 = ordered_pair(a, b)
    cfg = iid(p0, p1, N, math.exp(log_eta))
    c, h = chernoff_bound_iid(cfg, 0.0, 1.0), hoeffding_bound_inid(cfg, 0.0, 1.0)
    assert c.H0 <= h.H0 * (1 + 1e-12) and c.H1 <= h.H1 * (1 + 1e-12)


def test_chernoff_needs_iid():
    cfg = DetectorConfig(1.0, 1.0, (SensorProfile.from_probs(0.1, 0.3), SensorProfile.from_probs(0.2, 0.4)))
    with pytest.raises(ValueError):
        chernoff_bound_iid(cfg, 0.0, 1.0)


# Legendre transform and exponents

@pytest.mark.parametrize("p", [0.05, 0.2, 0.5])
def test_legendre_of_bernoulli_is_kl(p):
    lam = bernoulli_log_mgf(p)
    for x in np.round(np.arange(0.01, 1.0, 0.01), 2):
        assert legendre_transform(lam, x)[0] == pytest.approx(kl_bernoulli(x, p), abs=1e-8)


def test_legendre_examples():
    assert legendre_transform(bernoulli_log_mgf(0.3), 0.3) == (0.0, 0.0)
    val, t = legendre_transform(lambda s: 0.5 * s * s, 1.0)
    assert val == pytest.approx(0.5, abs=1e-10)
    assert t == pytest.approx(1.0, abs=1e-8)


def test_legendre_unbounded():
    with pytest.raises(UnboundedSupremumError):
        legendre_transform(bernoulli_log_mgf(0.3), 1.5)
    with pytest.raises(UnboundedSupremumError):
        legendre_transform(bernoulli_log_mgf(0.3), -0.1)


@given(st.floats(0.01, 0.99), st.floats(-40, 40))
def test_log_mgf_basics(p, t):
    lam = bernoulli_log_mgf(p)
    assert lam(0.0) == 0.0
    # convexity at t via a symmetric midpoint check
    h = 0.5
    assert lam(t - h) + lam(t + h) >= 2 * lam(t) - 1e-12


def test_exponent_identity_random_pairs():
    rng = np.random.default_rng(11)
    pairs = np.sort(rng.uniform(0, 1, size=(10_000, 2)), axis=1)
    pairs = pairs[(pairs[:, 0] > 0) & (pairs[:, 1] - pairs[:, 0] > 1e-9)]
    for p0, p1 in pairs:
        asymptotic_exponent_iid(p0, p1)  # raises IdentityViolation past 1e-10


def test_exponent_value_and_limits():
    I = asymptotic_exponent_iid(0.0574, 0.3422)
    assert I == pytest.approx(oracles.iid_exponent(0.0574, 0.3422), rel=1e-12)
    assert asymptotic_exponent_iid(0.3, 0.3 + 1e-6) < 1e-12
    with pytest.raises(ValueError):
        asymptotic_exponent_iid(0.4, 0.3)


@given(probs, probs)
def test_exponent_below_stein_exponents(a, b):
    p0, p1 = ordered_pair(a, b)
    I = asymptotic_exponent_iid(p0, p1)
    assert 0 <= I <= min(kl_bernoulli(p0, p1), kl_bernoulli(p1, p0)) + 1e-15


def test_rate_report_matches_closed_form():
    p0, p1 = 0.0574, 0.3422
    tau = math.log((1 - p0) / (1 - p1))
    A = math.log((1 - p0) * p1 / ((1 - p1) * p0))
    lam = lambda p: bernoulli_log_mgf(p, lambda t: A * t)  # noqa: E731
    r = rate_report(lam(p0), lam(p1), tau)
    I = asymptotic_exponent_iid(p0, p1)
    assert r.exponent_H0 == pytest.approx(I, abs=1e-9)
    assert r.exponent_H1 == pytest.approx(I, abs=1e-9)
    assert r.exponent == min(r.exponent_H0, r.exponent_H1)


def test_mixture_log_mgf_is_weighted_sum():
    f, g = bernoulli_log_mgf(0.2), bernoulli_log_mgf(0.6)
    mix = mixture_log_mgf([(1.0, f), (3.0, g)])
    for t in (-2.0, 0.0, 0.7, 5.0):
        assert mix(t) == pytest.approx(0.25 * f(t) + 0.75 * g(t), rel=1e-14)


# region sweep

def test_sweep_argmax_at_half_theta():
    grid = np.round(np.arange(-4, 6.0001, 0.01), 2)
    sweep = exponent_sweep_dc(2.0, 1.0, grid)
    assert sweep.argmax == pytest.approx(1.0, abs=0.01)
    idx = {round(x, 2): i for i, x in enumerate(sweep.X_L)}
    assert sweep.exponent[idx[1.0]] > sweep.exponent[idx[0.5]]
    assert sweep.exponent[idx[1.0]] > sweep.exponent[idx[1.5]]
    left = sweep.exponent[:200]
    assert left[0] < 1e-4 and np.all(np.diff(left) >= 0)


def test_sweep_single_point():
    assert len(exponent_sweep_dc(2.0, 1.0, [1.0]).rows()) == 1


@given(st.floats(0.01, 2.5))
def test_sweep_symmetry(delta):
    sweep = exponent_sweep_dc(2.0, 1.0, [1.0 - delta, 1.0 + delta])
    assert sweep.exponent[0] == pytest.approx(sweep.exponent[1], rel=1e-8, abs=1e-14)
