"""Observation models, transmission regions and region calibration.

A sensor transmits when its observation falls inside its transmission region.
The probabilities of that event under each hypothesis, ``p0`` and ``p1``, fix
the amplification ``A`` the sensor uses and everything the fusion center needs
to run the threshold detector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import integrate, optimize, special, stats

PROB_EPS = 1e-12

DC_IN_AWGN = "dc-in-awgn"
GAUSSIAN_VARIANCE = "gaussian-variance"
MARKOV_BINARY = "markov-binary"

ONE_SIDED = "one-sided"
TWO_SIDED = "two-sided"
GENERAL = "general"


class DegenerateProbabilityError(ValueError):
    """A transmission probability collapsed to 0 or 1."""


class CalibrationError(ValueError):
    """The requested transmit fraction cannot be bracketed."""


def gaussian_tail(x):
    """Standard normal upper tail Q(x), accurate far into both tails."""
    return 0.5 * special.erfc(np.asarray(x, dtype=float) / math.sqrt(2.0))


@dataclass(frozen=True)
class ObservationModel:
    """Conditional law of one sensor's scalar observation under H0/H1.

    ``dc-in-awgn``: H0 ~ N(0, noise_var), H1 ~ N(theta, noise_var).
    ``gaussian-variance``: H0 ~ N(0, noise_var), H1 ~ N(0, signal_var + noise_var).
    ``markov-binary`` carries no density here; the chain lives in
    :mod:`seema.markov`.

    ``dim > 1`` means a vector observation with i.i.d. components, only usable
    with general regions.
    """

    kind: str
    noise_var: float = 1.0
    theta: float = 0.0
    signal_var: float = 0.0
    dim: int = 1

    def __post_init__(self):
        if self.kind not in (DC_IN_AWGN, GAUSSIAN_VARIANCE, MARKOV_BINARY):
            raise ValueError(f"unknown observation kind {self.kind!r}")
        if not self.noise_var > 0:
            raise ValueError("noise_var must be positive")
        if self.signal_var < 0:
            raise ValueError("signal_var must be nonnegative")
        if self.dim < 1:
            raise ValueError("dim must be >= 1")

    @classmethod
    def dc(cls, theta: float, noise_var: float = 1.0) -> "ObservationModel":
        return cls(DC_IN_AWGN, noise_var=noise_var, theta=theta)

    @classmethod
    def gaussian_variance(cls, signal_var: float, noise_var: float = 1.0) -> "ObservationModel":
        return cls(GAUSSIAN_VARIANCE, noise_var=noise_var, signal_var=signal_var)

    def _require_gaussian(self):
        if self.kind == MARKOV_BINARY:
            raise TypeError("markov-binary observations have no scalar density")

    def mean(self, hypothesis: int) -> float:
        self._require_gaussian()
        return self.theta if (self.kind == DC_IN_AWGN and hypothesis == 1) else 0.0

    def std(self, hypothesis: int) -> float:
        self._require_gaussian()
        var = self.noise_var
        if self.kind == GAUSSIAN_VARIANCE and hypothesis == 1:
            var += self.signal_var
        return math.sqrt(var)

    def pdf(self, x, hypothesis: int):
        """Density of one component under ``hypothesis``."""
        return stats.norm.pdf(x, loc=self.mean(hypothesis), scale=self.std(hypothesis))

    def sample(self, rng: np.random.Generator, hypothesis: int, size) -> np.ndarray:
        z = rng.standard_normal(size if self.dim == 1 else _as_tuple(size) + (self.dim,))
        return self.mean(hypothesis) + self.std(hypothesis) * z

    def llr(self, x):
        """Log-likelihood ratio log f(x|H1)/f(x|H0) of a raw scalar observation."""
        x = np.asarray(x, dtype=float)
        if self.kind == DC_IN_AWGN:
            return (self.theta * x - 0.5 * self.theta ** 2) / self.noise_var
        v0 = self.noise_var
        v1 = self.noise_var + self.signal_var
        return 0.5 * math.log(v0 / v1) + 0.5 * x * x * (1.0 / v0 - 1.0 / v1)


def _as_tuple(size):
    return (size,) if np.isscalar(size) else tuple(size)


@dataclass(frozen=True)
class TransmissionRegion:
    """Set of observations that trigger a transmission.

    one-sided: x > X_L.  two-sided: |x| > X_L.  general: ``predicate(x)``
    returns a boolean array; ``breakpoints`` are hints for 1-D quadrature
    (boundaries of the region).
    """

    shape: str
    X_L: float = 0.0
    predicate: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, compare=False)
    breakpoints: Tuple[float, ...] = ()

    def __post_init__(self):
        if self.shape not in (ONE_SIDED, TWO_SIDED, GENERAL):
            raise ValueError(f"unknown region shape {self.shape!r}")
        if self.shape == TWO_SIDED and self.X_L < 0:
            raise ValueError("two-sided threshold must be nonnegative")
        if self.shape == GENERAL and self.predicate is None:
            raise ValueError("general region needs a predicate")

    @classmethod
    def one_sided(cls, X_L: float) -> "TransmissionRegion":
        return cls(ONE_SIDED, X_L=X_L)

    @classmethod
    def two_sided(cls, X_L: float) -> "TransmissionRegion":
        return cls(TWO_SIDED, X_L=X_L)

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.shape == ONE_SIDED:
            return x > self.X_L
        if self.shape == TWO_SIDED:
            return np.abs(x) > self.X_L
        return np.asarray(self.predicate(x), dtype=bool)


@dataclass(frozen=True)
class SensorProfile:
    """Transmission probabilities of one sensor and its amplification."""

    p0: float
    p1: float
    A: float
    region: Optional[TransmissionRegion] = None

    def __post_init__(self):
        for p in (self.p0, self.p1):
            if not 0.0 < p < 1.0:
                raise DegenerateProbabilityError(f"probability {p} outside (0, 1)")
        if self.p1 < self.p0:
            raise ValueError(f"region must favour H1 (p1={self.p1} < p0={self.p0})")

    @classmethod
    def from_probs(cls, p0: float, p1: float, region: Optional[TransmissionRegion] = None) -> "SensorProfile":
        return cls(p0, p1, amplification(p0, p1), region)

    @classmethod
    def from_region(cls, region: TransmissionRegion, model: ObservationModel) -> "SensorProfile":
        p0, p1 = transmission_probs(region, model)
        return cls.from_probs(p0, p1, region)


def amplification(p0: float, p1: float) -> float:
    """Amplitude log((1-p0) p1 / ((1-p1) p0)); positive iff p1 > p0."""
    if not (0.0 < p0 < 1.0 and 0.0 < p1 < 1.0):
        raise DegenerateProbabilityError("amplification needs p0, p1 in (0, 1)")
    return math.log1p(-p0) - math.log(p0) + math.log(p1) - math.log1p(-p1)


def transmission_probs(region: TransmissionRegion, model: ObservationModel,
                       check: bool = True) -> Tuple[float, float]:
    """Probability that a sensor transmits under H0 and under H1.

    Closed form for Gaussian models with one- and two-sided regions, adaptive
    quadrature for general 1-D regions and scrambled Sobol points for vector
    observations.  With ``check`` the result must be strictly inside
    (1e-12, 1 - 1e-12), otherwise :class:`DegenerateProbabilityError`.
    """
    model._require_gaussian()
    probs = []
    for hyp in (0, 1):
        m, s = model.mean(hyp), model.std(hyp)
        if region.shape == ONE_SIDED and model.dim == 1:
            p = float(gaussian_tail((region.X_L - m) / s))
        elif region.shape == TWO_SIDED and model.dim == 1:
            p = float(gaussian_tail((region.X_L - m) / s) + gaussian_tail((region.X_L + m) / s))
        elif model.dim == 1:
            p = _quad_probability(region, model, hyp)
        else:
            p, _ = _qmc_probability(region, model, hyp)
        probs.append(p)
    if check:
        for p in probs:
            if not PROB_EPS < p < 1.0 - PROB_EPS:
                raise DegenerateProbabilityError(
                    f"transmission probability {p!r} is degenerate; region unusable")
    return probs[0], probs[1]


def _quad_probability(region, model, hyp) -> float:
    m = model.mean(hyp)

    def integrand(x):
        return float(region.contains(x)) * model.pdf(x, hyp)

    # split at the region boundaries so quad never straddles a jump
    cuts = sorted(set(region.breakpoints) | {m})
    edges = [-np.inf] + cuts + [np.inf]
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        val, _ = integrate.quad(integrand, a, b, epsabs=1e-10, epsrel=1e-10, limit=200)
        total += val
    return min(max(total, 0.0), 1.0)


def _qmc_probability(region, model, hyp, m_log2: int = 16, replicates: int = 8,
                     seed: int = 0) -> Tuple[float, float]:
    """Randomized QMC estimate of P(x in region) and its standard error."""
    from scipy.stats import qmc

    estimates = []
    for r in range(replicates):
        sobol = qmc.Sobol(d=model.dim, scramble=True, seed=seed + r)
        u = sobol.random_base2(m_log2)
        x = model.mean(hyp) + model.std(hyp) * stats.norm.ppf(u)
        estimates.append(np.mean(region.contains(x)))
    estimates = np.asarray(estimates)
    return float(estimates.mean()), float(estimates.std(ddof=1) / math.sqrt(replicates))


def transmission_probs_qmc(region: TransmissionRegion, model: ObservationModel,
                           m_log2: int = 16, replicates: int = 8, seed: int = 0):
    """QMC transmission probabilities with standard errors, ``((p0, se0), (p1, se1))``."""
    return tuple(_qmc_probability(region, model, h, m_log2, replicates, seed) for h in (0, 1))


ModelMixture = Union[ObservationModel, Sequence[Tuple[ObservationModel, float]]]


def _mixture(model: ModelMixture):
    if isinstance(model, ObservationModel):
        return [(model, 1.0)]
    parts = [(m, float(w)) for m, w in model]
    total = sum(w for _, w in parts)
    return [(m, w / total) for m, w in parts]


def transmit_fraction(region: TransmissionRegion, model: ModelMixture,
                      priors: Tuple[float, float] = (0.5, 0.5)) -> float:
    """Expected fraction of transmitting sensors, P(H0) p0 + P(H1) p1.

    ``model`` may be a list of ``(model, weight)`` groups; the fraction is then
    averaged over groups with those weights.
    """
    frac = 0.0
    for m, w in _mixture(model):
        p0, p1 = transmission_probs(region, m, check=False)
        frac += w * (priors[0] * p0 + priors[1] * p1)
    return frac


def calibrate_region(model: ModelMixture, priors: Tuple[float, float] = (0.5, 0.5),
                     target_fraction: float = 0.2, shape: str = TWO_SIDED,
                     tol: float = 1e-8) -> TransmissionRegion:
    """Threshold X_L whose expected transmit fraction equals ``target_fraction``."""
    if not 0.0 < target_fraction < 1.0:
        raise CalibrationError("target fraction must lie strictly inside (0, 1)")
    if shape not in (ONE_SIDED, TWO_SIDED):
        raise CalibrationError(f"cannot calibrate a {shape!r} region")

    def excess(x_l):
        return transmit_fraction(TransmissionRegion(shape, X_L=x_l), model, priors) - target_fraction

    lo = 0.0 if shape == TWO_SIDED else -1.0
    hi = 1.0
    while excess(hi) > 0:
        hi *= 2.0
        if hi > 1e3:
            raise CalibrationError("target transmit fraction unreachable (too small)")
    if shape == ONE_SIDED:
        while excess(lo) < 0:
            lo *= 2.0
            if lo < -1e3:
                raise CalibrationError("target transmit fraction unreachable (too large)")
    elif excess(lo) <= 0:
        raise CalibrationError("target transmit fraction unreachable for a two-sided region")

    x_l = optimize.brentq(excess, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=500)
    if abs(excess(x_l)) > tol:
        raise CalibrationError("calibration did not reach the requested tolerance")
    return TransmissionRegion(shape, X_L=x_l)
