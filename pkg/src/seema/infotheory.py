"""Divergences, detector threshold, log-MGFs, rate functions and error bounds.

Every quantity is expressed for the normalized fusion statistic
``y_N / Z = (1/N) sum_n (h_n / Z) A_n 1{x_n in region} + noise``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize, special

from .model import SensorProfile, amplification, gaussian_tail

LogMGF = Callable[[float], float]

T_MAX = 50.0


class UnboundedSupremumError(ArithmeticError):
    """The Legendre supremum is not attained inside the working interval."""


class IdentityViolation(ArithmeticError):
    """Two algebraically equal expressions disagreed; indicates a bug."""


def kl_bernoulli(q0, q1):
    """KL divergence D(q0 || q1) between Bernoulli laws, with 0 log 0 = 0."""
    q0 = np.asarray(q0, dtype=float)
    q1 = np.asarray(q1, dtype=float)
    if np.any((q0 < 0) | (q0 > 1)) or np.any((q1 < 0) | (q1 > 1)):
        raise ValueError("probabilities must lie in [0, 1]")
    out = special.rel_entr(q0, q1) + special.rel_entr(1.0 - q0, 1.0 - q1)
    if np.any(np.isinf(out)):
        raise ValueError("KL divergence is infinite: q1 in {0,1} with mismatched q0")
    return float(out) if out.ndim == 0 else out


def average_kl(profiles: Sequence[SensorProfile], direction: str = "01") -> float:
    """Mean over sensors of D(p_i,n || p_j,n); ``direction`` is "01" or "10"."""
    if len(profiles) == 0:
        raise ValueError("need at least one profile")
    p0 = np.array([p.p0 for p in profiles])
    p1 = np.array([p.p1 for p in profiles])
    if direction == "01":
        return float(np.mean(kl_bernoulli(p0, p1)))
    if direction == "10":
        return float(np.mean(kl_bernoulli(p1, p0)))
    raise ValueError("direction must be '01' or '10'")


@dataclass(frozen=True)
class DetectorConfig:
    """Fusion-center detector: prior ratio, normalizer and sensor profiles."""

    eta: float
    Z: float
    profiles: Tuple[SensorProfile, ...]

    def __post_init__(self):
        if not self.eta > 0 or not self.Z > 0:
            raise ValueError("eta and Z must be positive")
        if len(self.profiles) == 0:
            raise ValueError("need at least one sensor")
        object.__setattr__(self, "profiles", tuple(self.profiles))

    @classmethod
    def iid(cls, profile: SensorProfile, N: int, eta: float = 1.0, Z: float = 1.0) -> "DetectorConfig":
        return cls(eta, Z, (profile,) * N)

    @property
    def N(self) -> int:
        return len(self.profiles)

    @property
    def p0(self) -> np.ndarray:
        return np.array([p.p0 for p in self.profiles])

    @property
    def p1(self) -> np.ndarray:
        return np.array([p.p1 for p in self.profiles])

    @property
    def A(self) -> np.ndarray:
        return np.array([p.A for p in self.profiles])

    @property
    def is_iid(self) -> bool:
        first = self.profiles[0]
        return all((p.p0, p.p1, p.A) == (first.p0, first.p1, first.A) for p in self.profiles)

    @property
    def delta0(self) -> float:
        return average_kl(self.profiles, "01") + math.log(self.eta) / self.N

    @property
    def delta1(self) -> float:
        return average_kl(self.profiles, "10") - math.log(self.eta) / self.N

    @property
    def guarantees_hold(self) -> bool:
        """Both margins positive, i.e. N exceeds the minimal network size."""
        return self.delta0 > 0 and self.delta1 > 0


def detector_threshold(cfg: DetectorConfig) -> float:
    """Threshold tau of the censoring detector (decide H1 iff y_N/Z > tau).

    The two decompositions tau = mean(p0 A) + delta0 = mean(p1 A) - delta1 are
    checked to 1e-12 before returning.
    """
    p0, p1 = cfg.p0, cfg.p1
    tau = math.log(cfg.eta) / cfg.N + float(np.mean(np.log1p(-p0) - np.log1p(-p1)))
    via0 = float(np.mean(p0 * cfg.A)) + cfg.delta0
    via1 = float(np.mean(p1 * cfg.A)) - cfg.delta1
    scale = max(1.0, abs(tau))
    if abs(via0 - tau) > 1e-12 * scale or abs(via1 - tau) > 1e-12 * scale:
        raise IdentityViolation(f"threshold decompositions disagree: {tau}, {via0}, {via1}")
    return tau


def decide(y_N, cfg: DetectorConfig, tau: Optional[float] = None):
    """1 (H1) iff y_N / Z > tau; exact ties decide 0 (H0). Vectorized over y_N."""
    if tau is None:
        tau = detector_threshold(cfg)
    out = np.asarray(y_N, dtype=float) / cfg.Z > tau
    return int(out) if out.ndim == 0 else out.astype(np.int8)


class Bounds(NamedTuple):
    H0: float
    H1: float
    valid: bool  # False when the margins are not positive (N <= N0); bounds are then 1


def hoeffding_bound_inid(cfg: DetectorConfig, sigma2: float, E_N: float, h_max: float = 1.0,
                         deltas: Optional[Tuple[float, float]] = None) -> Bounds:
    """Hoeffding-type bound on both error probabilities for independent sensors.

    exp{-N 2 delta^2 / (h_max^2 mean(A^2) + 4 sigma2 / (N E_N Z^2))}.  ``deltas``
    overrides the equal-gain margins (use the channel-aware margins under fading).
    """
    N = cfg.N
    d0, d1 = deltas if deltas is not None else (cfg.delta0, cfg.delta1)
    if not (d0 > 0 and d1 > 0):
        return Bounds(1.0, 1.0, False)
    denom = h_max ** 2 * float(np.mean(cfg.A ** 2)) + 4.0 * sigma2 / (N * E_N * cfg.Z ** 2)
    b0 = math.exp(-N * 2.0 * d0 ** 2 / denom)
    b1 = math.exp(-N * 2.0 * d1 ** 2 / denom)
    return Bounds(min(b0, 1.0), min(b1, 1.0), True)


def chernoff_bound_iid(cfg: DetectorConfig, sigma2: float, E_N: float) -> Bounds:
    """Chernoff bound for identical sensors over equal unit gains.

    exp{-N [D(p0 + delta0/A || p0) - eps0(N)]} under H0 and the mirrored
    expression under H1, where eps0, eps1 charge the channel noise.
    """
    if not cfg.is_iid:
        raise ValueError("Chernoff bound needs identical sensor profiles")
    if not cfg.guarantees_hold:
        return Bounds(1.0, 1.0, False)
    prof = cfg.profiles[0]
    p0, p1, A, N = prof.p0, prof.p1, prof.A, cfg.N
    s0 = cfg.delta0 / A
    s1 = cfg.delta1 / A
    a0, a1 = p0 + s0, p1 - s1
    if not (0.0 < a0 < 1.0 and 0.0 < a1 < 1.0):
        raise ValueError("shifted Chernoff arguments leave (0, 1)")
    scale = sigma2 / (2.0 * N * A ** 2 * E_N)
    eps0 = scale * math.log1p(s0 / (p0 * (1.0 - a0))) ** 2
    eps1 = scale * math.log1p(s1 / (a1 * (1.0 - p1))) ** 2
    b0 = math.exp(min(0.0, -N * (kl_bernoulli(a0, p0) - eps0)))
    b1 = math.exp(min(0.0, -N * (kl_bernoulli(a1, p1) - eps1)))
    return Bounds(b0, b1, True)


def _derivative(lam: LogMGF, t: float) -> float:
    h = 1e-6 * (1.0 + abs(t))
    return (lam(t + h) - lam(t - h)) / (2.0 * h)


def _finite(lam, t):
    try:
        with np.errstate(over="ignore", invalid="ignore"):
            v = lam(t)
    except OverflowError:
        return False
    return bool(np.isfinite(v))


def _outer_bracket(lam, x, direction, t_max):
    """Walk from 0 towards +/- t_max until lam' crosses x; returns (inner, outer)."""
    inner, step = 0.0, 1.0
    while True:
        outer = direction * min(step, t_max)
        while not _finite(lam, outer + direction * 1e-5 * (1 + abs(outer))):
            # shrink on overflow
            outer = 0.5 * (inner + outer)
            if abs(outer - inner) < 1e-9:
                raise UnboundedSupremumError("log-MGF overflows next to the mean")
            t_max = abs(outer)
        g = _derivative(lam, outer) - x
        if direction * g >= 0:
            return inner, outer
        if abs(outer) >= t_max:
            raise UnboundedSupremumError(
                f"x={x!r} outside the range of the log-MGF derivative on [-{t_max}, {t_max}]")
        inner = outer
        step *= 2.0


def legendre_transform(lam: LogMGF, x: float, t_max: float = T_MAX) -> Tuple[float, float]:
    """Fenchel-Legendre transform sup_t (x t - lam(t)) and the maximizing t.

    ``lam`` must be convex, finite near 0 with lam(0) = 0.  The supremum is found
    by solving lam'(t) = x, with lam' from central differences, on the working
    interval [-t_max, t_max] (shrunk automatically where lam overflows).
    """
    mean = _derivative(lam, 0.0)
    # central differences are good to ~1e-10 here
    if abs(x - mean) <= 1e-9 * max(1.0, abs(mean)):
        return 0.0, 0.0
    direction = 1.0 if x > mean else -1.0
    inner, outer = _outer_bracket(lam, x, direction, t_max)

    def slope_gap(t):
        return _derivative(lam, t) - x

    lo, hi = sorted((inner, outer))
    if slope_gap(lo) == 0:
        t_star = lo
    elif slope_gap(hi) == 0:
        t_star = hi
    else:
        t_star = optimize.brentq(slope_gap, lo, hi, xtol=1e-12, rtol=1e-12, maxiter=500)
    value = x * t_star - lam(t_star)
    return max(float(value), 0.0), float(t_star)


def bernoulli_log_mgf(p: float, gain_log_mgf: Optional[LogMGF] = None) -> LogMGF:
    """t -> log(p E[exp(t G)] + 1 - p), the log-MGF of G * Bernoulli(p).

    Without ``gain_log_mgf`` the gain is the constant 1.
    """
    log_p, log_q = math.log(p), math.log1p(-p)

    def lam(t):
        lg = t if gain_log_mgf is None else gain_log_mgf(t)
        if lg < 30.0:
            return math.log1p(p * math.expm1(lg))
        return float(np.logaddexp(log_p + lg, log_q))

    return lam


def mixture_log_mgf(parts: Sequence[Tuple[float, LogMGF]]) -> LogMGF:
    """Weighted sum of per-area log-MGFs (local i.i.d. deployment)."""
    parts = [(float(w), lam) for w, lam in parts]
    total = sum(w for w, _ in parts)

    def lam(t):
        return sum(w * f(t) for w, f in parts) / total

    return lam


@dataclass
class RateReport:
    """Error exponents of the threshold test for a pair of limiting log-MGFs."""

    exponent_H0: float
    exponent_H1: float
    threshold: float
    argsup_H0: float
    argsup_H1: float
    lambda_H0: LogMGF
    lambda_H1: LogMGF

    @property
    def exponent(self) -> float:
        """Exponent of the prior-weighted error probability."""
        return min(self.exponent_H0, self.exponent_H1)


def rate_report(lam0: LogMGF, lam1: LogMGF, threshold: float) -> RateReport:
    """Exponents -lim (1/N) log P(error | H_i) for the test y > threshold.

    The exponent is zero on a side where the threshold does not separate the
    threshold from that hypothesis' mean.
    """
    mean0, mean1 = _derivative(lam0, 0.0), _derivative(lam1, 0.0)
    e0, t0 = legendre_transform(lam0, threshold) if threshold > mean0 else (0.0, 0.0)
    e1, t1 = legendre_transform(lam1, threshold) if threshold < mean1 else (0.0, 0.0)
    return RateReport(e0, e1, threshold, t0, t1, lam0, lam1)


def asymptotic_exponent_iid(p0: float, p1: float) -> float:
    """Closed-form error exponent for identical sensors over equal gains.

    D(p0 + D(p0||p1)/A || p0); the mirrored form D(p1 - D(p1||p0)/A || p1) must
    agree to 1e-10.
    """
    if not 0.0 < p0 < p1 < 1.0:
        raise ValueError("need 0 < p0 < p1 < 1")
    A = amplification(p0, p1)
    via0 = kl_bernoulli(p0 + kl_bernoulli(p0, p1) / A, p0)
    via1 = kl_bernoulli(p1 - kl_bernoulli(p1, p0) / A, p1)
    if abs(via0 - via1) > 1e-10:
        raise IdentityViolation(f"exponent forms disagree: {via0} vs {via1}")
    return float(via0)


@dataclass
class ExponentSweep:
    X_L: np.ndarray
    transmit_fraction: np.ndarray
    exponent: np.ndarray

    @property
    def argmax(self) -> float:
        return float(self.X_L[int(np.argmax(self.exponent))])

    def rows(self):
        return list(zip(self.X_L.tolist(), self.transmit_fraction.tolist(), self.exponent.tolist()))


def exponent_sweep_dc(theta: float, sigma_v2: float, grid, priors: Tuple[float, float] = (0.5, 0.5)) -> ExponentSweep:
    """Exponent and expected transmit fraction over one-sided thresholds X_L.

    Observations are N(0, sigma_v2) under H0 and N(theta, sigma_v2) under H1.
    """
    x_l = np.asarray(grid, dtype=float)
    sd = math.sqrt(sigma_v2)
    p0 = gaussian_tail(x_l / sd)
    p1 = gaussian_tail((x_l - theta) / sd)
    frac = priors[0] * p0 + priors[1] * p1
    expo = np.zeros_like(x_l)
    for i, (a, b) in enumerate(zip(p0, p1)):
        if 0.0 < a < b < 1.0:
            expo[i] = asymptotic_exponent_iid(float(a), float(b))
    return ExponentSweep(x_l, frac, expo)
