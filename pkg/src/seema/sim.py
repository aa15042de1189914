"""Seeded Monte Carlo engine for SEEMA and the baseline fusion schemes.

Trials run in fixed-size chunks.  Every chunk draws from independent
substreams keyed by (seed, N, hypothesis, chunk, role), so counts are
bit-identical for a given seed no matter how chunks are scheduled.  All
schemes requested together see the same observations (paired comparison).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate

from .channel import EQUAL, ON_OFF, ChannelModel, NoiseSpec, choose_Z
from .infotheory import DetectorConfig, detector_threshold
from .markov import MarkovField, markov_llr, sample_field
from .model import ObservationModel, SensorProfile, TransmissionRegion, gaussian_tail

SEEMA = "seema"
TDMA_NOISY = "tdma-noisy"
TDMA_NOISELESS = "tdma-noiseless"
LBMA = "lbma-noisy"
COUNTING = "counting-noiseless"
CV_TSA = "cv-tsa"
COPULA = "copula-forward"
SCHEMES = (SEEMA, TDMA_NOISY, TDMA_NOISELESS, LBMA, COUNTING, CV_TSA, COPULA)

CHUNK = 1 << 14
_ROLES = {"obs": 0, "gain": 1, "mac": 2, "tdma": 3, "cv": 4, "lbma": 5}


class IncompatibleScheme(ValueError):
    """The scheme cannot run on this scenario."""


@dataclass(frozen=True)
class EnergyRule:
    """Per-sensor transmit energy E_N: constant, or N**exponent."""

    kind: str = "constant"
    value: float = 1.0

    def __post_init__(self):
        if self.kind not in ("constant", "power"):
            raise ValueError(f"unknown energy rule {self.kind!r}")
        if self.kind == "constant" and not self.value > 0:
            raise ValueError("constant energy must be positive")

    def __call__(self, N: int) -> float:
        return self.value if self.kind == "constant" else float(N) ** self.value


@dataclass(frozen=True)
class Scenario:
    """Everything needed to simulate one network size.

    Gaussian scenarios give ``groups`` of (observation model, weight) and a
    common ``region``; sensors are allocated to groups in contiguous blocks
    proportional to the weights.  Markov scenarios give ``field`` instead and
    transmit exactly when the chain is in state 1.
    """

    groups: Tuple[Tuple[ObservationModel, float], ...] = ()
    region: Optional[TransmissionRegion] = None
    field: Optional[MarkovField] = None
    channel: ChannelModel = ChannelModel.equal(1.0)
    noise: NoiseSpec = NoiseSpec(0.0)
    N: int = 100
    eta: float = 1.0
    energy: EnergyRule = EnergyRule()
    scheme: str = SEEMA
    Z: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "groups", tuple((m, float(w)) for m, w in self.groups))
        if (self.field is None) == (len(self.groups) == 0):
            raise ValueError("give either observation groups or a Markov field")
        if self.groups and self.region is None:
            raise ValueError("Gaussian observations need a transmission region")
        if self.N < 1:
            raise ValueError("N must be positive")
        if not self.eta > 0:
            raise ValueError("eta must be positive")
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")

    @property
    def is_markov(self) -> bool:
        return self.field is not None

    @property
    def priors(self) -> Tuple[float, float]:
        return self.eta / (1.0 + self.eta), 1.0 / (1.0 + self.eta)

    @property
    def E_N(self) -> float:
        return self.energy(self.N)

    @property
    def Z_value(self) -> float:
        return choose_Z(self.channel) if self.Z is None else self.Z

    def group_bounds(self) -> List[Tuple[int, int]]:
        if self.is_markov:
            return [(0, self.N)]
        w = np.array([w for _, w in self.groups])
        edges = np.rint(np.concatenate([[0.0], np.cumsum(w) / w.sum()]) * self.N).astype(int)
        return list(zip(edges[:-1].tolist(), edges[1:].tolist()))

    def group_profiles(self) -> List[SensorProfile]:
        if self.is_markov:
            return [self.field.profile()]
        return [SensorProfile.from_region(self.region, m) for m, _ in self.groups]

    def detector(self) -> DetectorConfig:
        profiles = []
        for prof, (a, b) in zip(self.group_profiles(), self.group_bounds()):
            profiles.extend([prof] * (b - a))
        return DetectorConfig(self.eta, self.Z_value, tuple(profiles))


@dataclass
class MCResult:
    """Error counts of one scheme at one network size."""

    scheme: str
    N: int
    trials: int
    errors_H0: int
    errors_H1: int
    prior_H0: float
    seed: int
    energy_H0: float = 0.0
    energy_H1: float = 0.0
    transmissions_H0: int = 0
    transmissions_H1: int = 0

    @property
    def prior_H1(self) -> float:
        return 1.0 - self.prior_H0

    @property
    def Pe(self) -> float:
        return (self.prior_H0 * self.errors_H0 + self.prior_H1 * self.errors_H1) / self.trials

    @property
    def ci95(self) -> float:
        """Half-width of a 95% interval on Pe; Wilson per hypothesis below 20 errors."""
        z = 1.959963984540054
        var = 0.0
        for prior, k in ((self.prior_H0, self.errors_H0), (self.prior_H1, self.errors_H1)):
            n = self.trials
            if k >= 20:
                rate = k / n
                hw = z * math.sqrt(rate * (1.0 - rate) / n)
            else:
                lo, hi = wilson_interval(k, n, z)
                hw = 0.5 * (hi - lo)
            var += (prior * hw) ** 2
        return math.sqrt(var)

    @property
    def avg_energy(self) -> float:
        return energy_accounting(self)

    @property
    def transmit_fraction(self) -> float:
        per_trial = (self.prior_H0 * self.transmissions_H0 + self.prior_H1 * self.transmissions_H1) / self.trials
        return per_trial / self.N

    def merge(self, other: "MCResult") -> "MCResult":
        return replace(
            self,
            trials=self.trials + other.trials,
            errors_H0=self.errors_H0 + other.errors_H0,
            errors_H1=self.errors_H1 + other.errors_H1,
            energy_H0=self.energy_H0 + other.energy_H0,
            energy_H1=self.energy_H1 + other.energy_H1,
            transmissions_H0=self.transmissions_H0 + other.transmissions_H0,
            transmissions_H1=self.transmissions_H1 + other.transmissions_H1,
        )


def wilson_interval(k: int, n: int, z: float = 1.959963984540054) -> Tuple[float, float]:
    p = k / n
    denom = 1.0 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


def energy_accounting(result: MCResult) -> float:
    """Average transmit energy per data collection, prior-weighted over hypotheses."""
    return (result.prior_H0 * result.energy_H0 + result.prior_H1 * result.energy_H1) / result.trials


def expected_seema_energy(scenario: Scenario) -> float:
    """E_N sum_n A_n^2 (P(H0) p0n + P(H1) p1n)."""
    cfg = scenario.detector()
    q0, q1 = scenario.priors
    return scenario.E_N * float(np.sum(cfg.A ** 2 * (q0 * cfg.p0 + q1 * cfg.p1)))


class _Layout:
    """Per-sensor arrays derived from a scenario, computed once per run."""

    def __init__(self, sc: Scenario):
        self.sc = sc
        self.cfg = sc.detector()
        self.tau = detector_threshold(self.cfg)
        self.A = self.cfg.A
        self.p0 = self.cfg.p0
        self.p1 = self.cfg.p1
        self.bounds = sc.group_bounds()
        self.log_eta = math.log(sc.eta)

    @cached_property
    def gaussian_params(self):
        """Per-sensor (mean0, mean1, std0, std1)."""
        out = np.zeros((4, self.sc.N))
        for (m, _), (a, b) in zip(self.sc.groups, self.bounds):
            out[:, a:b] = np.array([m.mean(0), m.mean(1), m.std(0), m.std(1)])[:, None]
        return out

    @cached_property
    def cv_probs(self):
        """Effective P(re-detected bit = 1 | H_i) per sensor for the two-stage rule."""
        sc = self.sc
        mu = sc.channel.mean
        sigma = math.sqrt(sc.noise.sigma2 / sc.E_N)
        q = np.zeros((2, sc.N))
        for A in np.unique(self.A):
            thr = 0.5 * mu * A
            if sigma == 0:
                p_false = 0.0
                p_det = _gain_tail(sc.channel, thr / A)
            else:
                p_false = float(gaussian_tail(thr / sigma))
                p_det = _expect_over_gain(sc.channel, lambda h: gaussian_tail((thr - h * A) / sigma))
            sel = self.A == A
            q[0, sel] = self.p0[sel] * p_det + (1 - self.p0[sel]) * p_false
            q[1, sel] = self.p1[sel] * p_det + (1 - self.p1[sel]) * p_false
        return np.clip(q, 1e-300, 1 - 1e-16)


def _gain_tail(channel: ChannelModel, x: float) -> float:
    if channel.kind == EQUAL:
        return float(channel.gain > x)
    if channel.kind == ON_OFF:
        return channel.p * float(channel.gain > x)
    return math.exp(-x * x / channel.power)


def _expect_over_gain(channel: ChannelModel, fn) -> float:
    if channel.kind == EQUAL:
        return float(fn(channel.gain))
    if channel.kind == ON_OFF:
        return float(channel.p * fn(channel.gain) + (1 - channel.p) * fn(0.0))
    P = channel.power
    val, _ = integrate.quad(lambda h: fn(h) * 2 * h / P * math.exp(-h * h / P), 0, np.inf,
                            epsabs=1e-13, limit=200)
    return val


def _check_compatible(sc: Scenario, layout: _Layout, scheme: str):
    if scheme == COPULA and not sc.is_markov:
        raise IncompatibleScheme("copula-forward fusion needs a Markov field")
    if scheme in (TDMA_NOISY, TDMA_NOISELESS) and sc.is_markov:
        raise IncompatibleScheme("TDMA transmits raw observations; use copula-forward for Markov fields")
    if scheme == COUNTING:
        if sc.channel.kind != EQUAL:
            raise IncompatibleScheme("counting rule needs equal channel gains")
        if np.ptp(layout.A) != 0:
            raise IncompatibleScheme("counting rule needs a common amplification")


class _SameStream(dict):
    def __init__(self, rng):
        super().__init__()
        self.rng = rng

    def __missing__(self, key):
        return self.rng


def _streams(seed: int, N: int, hypothesis: int, chunk: int):
    return {role: np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(N, hypothesis, chunk, k)))
            for role, k in _ROLES.items()}


def _seema_energy(bits, count, A, common_A, E):
    if common_A is not None:
        return (E * common_A ** 2) * count
    return E * (bits @ (A ** 2))


def _simulate(layout: _Layout, hypothesis: int, n: int, streams, schemes: Sequence[str]):
    """Decisions, energies and transmit counts for n trials of every scheme."""
    sc = layout.sc
    N, E = sc.N, sc.E_N
    sqrtE = math.sqrt(E)
    Z = layout.cfg.Z

    if sc.is_markov:
        bits = sample_field(sc.field, hypothesis, N, streams["obs"], size=n).view(bool)
        x = None
    else:
        x = np.empty((n, N))
        for (m, _), (a, b) in zip(sc.groups, layout.bounds):
            if b > a:
                x[:, a:b] = m.sample(streams["obs"], hypothesis, (n, b - a))
        bits = sc.region.contains(x)

    equal_gain = sc.channel.kind == EQUAL
    h = None if equal_gain else sc.channel.sample(streams["gain"], (n, N))
    g = sc.channel.gain
    count = np.count_nonzero(bits, axis=1)
    common_A = layout.A[0] if np.ptp(layout.A) == 0 else None
    out = {}

    if SEEMA in schemes:
        if equal_gain and common_A is not None:
            s = (g * common_A) * count
        elif equal_gain:
            s = g * (bits @ layout.A)
        else:
            s = np.einsum("ij,ij,j->i", bits, h, layout.A)
        w = sc.noise.sample(streams["mac"], n)
        y = s / N + w / (N * sqrtE)
        dec = y / Z > layout.tau
        out[SEEMA] = (dec, _seema_energy(bits, count, layout.A, common_A, E), count)

    if COUNTING in schemes:
        A = layout.A[0]
        dec = count > N * layout.tau / A
        out[COUNTING] = (dec, E * count.astype(float), count)

    if COPULA in schemes:
        llr = markov_llr(sc.field, bits.astype(np.int8))
        out[COPULA] = (llr > layout.log_eta, E * count.astype(float), count)

    if LBMA in schemes:
        if sc.is_markov:
            L = np.where(bits, math.log(layout.p1[0] / layout.p0[0]),
                         math.log((1 - layout.p1[0]) / (1 - layout.p0[0])))
        else:
            L = np.empty_like(x)
            for (m, _), (a, b) in zip(sc.groups, layout.bounds):
                L[:, a:b] = m.llr(x[:, a:b])
        w = sc.noise.sample(streams["lbma"], n)
        s = g * L.sum(axis=1) if equal_gain else np.einsum("ij,ij->i", L, h)
        stat = s / Z + w / (Z * sqrtE)
        out[LBMA] = (stat > layout.log_eta, E * np.einsum("ij,ij->i", L, L), np.full(n, N))

    if TDMA_NOISY in schemes or TDMA_NOISELESS in schemes:
        m0, m1, s0, s1 = layout.gaussian_params
        hh = g if equal_gain else h
        energy = E * np.einsum("ij,ij->i", x, x)
        if TDMA_NOISELESS in schemes:
            L = np.empty_like(x)
            for (m, _), (a, b) in zip(sc.groups, layout.bounds):
                L[:, a:b] = m.llr(x[:, a:b])
            if not equal_gain:
                L = np.where(h > 0, L, 0.0)
            out[TDMA_NOISELESS] = (L.sum(axis=1) > layout.log_eta, energy, np.full(n, N))
        if TDMA_NOISY in schemes:
            nv = sc.noise.sigma2 / E
            z = hh * x + math.sqrt(nv) * streams["tdma"].standard_normal((n, N))
            v0 = hh * hh * s0 ** 2 + nv
            v1 = hh * hh * s1 ** 2 + nv
            with np.errstate(divide="ignore", invalid="ignore"):
                L = (0.5 * np.log(v0 / v1) + 0.5 * (z - hh * m0) ** 2 / v0
                     - 0.5 * (z - hh * m1) ** 2 / v1)
            L = np.where(v0 > 0, L, 0.0)
            out[TDMA_NOISY] = (L.sum(axis=1) > layout.log_eta, energy, np.full(n, N))

    if CV_TSA in schemes:
        sigma = math.sqrt(sc.noise.sigma2 / E)
        hh = g if equal_gain else h
        r = hh * layout.A * bits + sigma * streams["cv"].standard_normal((n, N))
        redetect = r > 0.5 * sc.channel.mean * layout.A
        q0, q1 = layout.cv_probs
        w1 = np.log(q1 / q0)
        w0 = np.log((1 - q1) / (1 - q0))
        stat = redetect @ (w1 - w0) + w0.sum()
        out[CV_TSA] = (stat > layout.log_eta, _seema_energy(bits, count, layout.A, common_A, E), count)

    return out


def run_seema_trial(scenario: Scenario, hypothesis: int, rng: np.random.Generator) -> Tuple[int, int]:
    """One data collection under SEEMA: (decision, number of transmitting sensors)."""
    layout = _Layout(scenario)
    dec, _, count = _simulate(layout, hypothesis, 1, _SameStream(rng), (SEEMA,))[SEEMA]
    return int(dec[0]), int(count[0])


def run_baseline_trial(scheme: str, scenario: Scenario, hypothesis: int, rng: np.random.Generator) -> int:
    """One data collection of a baseline scheme; returns the decision."""
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}")
    layout = _Layout(scenario)
    _check_compatible(scenario, layout, scheme)
    dec, _, _ = _simulate(layout, hypothesis, 1, _SameStream(rng), (scheme,))[scheme]
    return int(dec[0])


def paired_decisions(scenario: Scenario, schemes: Sequence[str], hypothesis: int, trials: int,
                     seed: int) -> Dict[str, np.ndarray]:
    """Trial-by-trial decisions of several schemes on shared randomness."""
    layout = _Layout(scenario)
    for s in schemes:
        _check_compatible(scenario, layout, s)
    parts = {s: [] for s in schemes}
    for chunk, start in enumerate(range(0, trials, CHUNK)):
        n = min(CHUNK, trials - start)
        res = _simulate(layout, hypothesis, n, _streams(seed, scenario.N, hypothesis, chunk), schemes)
        for s in schemes:
            parts[s].append(res[s][0])
    return {s: np.concatenate(v).astype(np.int8) for s, v in parts.items()}


def _run_chunk(layout, schemes, seed, hypothesis, chunk, n):
    res = _simulate(layout, hypothesis, n, _streams(seed, layout.sc.N, hypothesis, chunk), schemes)
    wrong = (lambda d: ~d) if hypothesis == 1 else (lambda d: d)
    return {s: (int(np.count_nonzero(wrong(d))), float(e.sum()), int(c.sum())) for s, (d, e, c) in res.items()}


def estimate_errors(scenario: Scenario, schemes: Sequence[str], trials: int, seed: int,
                    workers: int = 1) -> Dict[str, MCResult]:
    """Monte Carlo error probabilities of several schemes on paired trials.

    ``trials`` is per hypothesis.  The result does not depend on ``workers``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    schemes = tuple(dict.fromkeys(schemes))
    if not schemes:
        raise ValueError("no schemes requested")
    layout = _Layout(scenario)
    for s in schemes:
        _check_compatible(scenario, layout, s)
    jobs = []
    for hyp in (0, 1):
        for chunk, start in enumerate(range(0, trials, CHUNK)):
            jobs.append((hyp, chunk, min(CHUNK, trials - start)))

    def work(job):
        hyp, chunk, n = job
        return hyp, _run_chunk(layout, schemes, seed, hyp, chunk, n)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            done = list(pool.map(work, jobs))
    else:
        done = [work(j) for j in jobs]

    out = {}
    q0 = scenario.priors[0]
    for s in schemes:
        err = [0, 0]
        en = [0.0, 0.0]
        tx = [0, 0]
        for hyp, res in done:
            e, energy, count = res[s]
            err[hyp] += e
            en[hyp] += energy
            tx[hyp] += count
        out[s] = MCResult(s, scenario.N, trials, err[0], err[1], q0, seed, en[0], en[1], tx[0], tx[1])
    return out


def estimate_error(scenario: Scenario, trials_per_hypothesis: int, seed: int, workers: int = 1) -> MCResult:
    """Monte Carlo error probability of ``scenario.scheme``."""
    return estimate_errors(scenario, (scenario.scheme,), trials_per_hypothesis, seed, workers)[scenario.scheme]


def sweep_N(scenario: Scenario, schemes: Sequence[str], N_grid: Iterable[int], trials: int, seed: int,
            workers: int = 1) -> Dict[str, List[MCResult]]:
    """estimate_errors over a grid of network sizes, sorted by N."""
    out = {s: [] for s in schemes}
    for N in sorted(int(n) for n in N_grid):
        res = estimate_errors(replace(scenario, N=N), schemes, trials, seed, workers)
        for s in schemes:
            out[s].append(res[s])
    return out


def energy_at_pe(results: Sequence[MCResult], targets) -> np.ndarray:
    """Average energy at given Pe levels, log-linear interpolation over an N sweep.

    NaN where a target lies outside the simulated Pe range.
    """
    pts = sorted((r for r in results if r.Pe > 0), key=lambda r: r.N)
    if len(pts) < 2:
        return np.full(np.shape(targets), np.nan)
    neg_log_pe = np.array([-math.log(r.Pe) for r in pts])
    energy = np.array([r.avg_energy for r in pts])
    order = np.argsort(neg_log_pe)
    neg_log_pe, energy = neg_log_pe[order], energy[order]
    t = -np.log(np.asarray(targets, dtype=float))
    return np.interp(t, neg_log_pe, energy, left=np.nan, right=np.nan)


def decay_slope(N, Pe) -> float:
    """Least-squares slope of -log Pe against N."""
    N = np.asarray(N, dtype=float)
    y = -np.log(np.asarray(Pe, dtype=float))
    return float(np.polyfit(N, y, 1)[0])


def classify_decay(N, Pe) -> str:
    """'exponential' when log Pe is fit better by a + bN than by a + b sqrt(N)."""
    N = np.asarray(N, dtype=float)
    y = np.log(np.asarray(Pe, dtype=float))
    res_lin = np.sum((np.polyval(np.polyfit(N, y, 1), N) - y) ** 2)
    res_sqrt = np.sum((np.polyval(np.polyfit(np.sqrt(N), y, 1), np.sqrt(N)) - y) ** 2)
    return "exponential" if res_lin < res_sqrt else "sub-exponential"
