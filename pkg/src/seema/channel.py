"""Channel gains, additive sub-Gaussian noise and receiver normalization."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy import special

from .infotheory import Bounds, DetectorConfig, detector_threshold, hoeffding_bound_inid

EQUAL = "equal"
RAYLEIGH = "rayleigh"
ON_OFF = "on-off"

SQRT_PI = math.sqrt(math.pi)


class BoundUnavailable(ValueError):
    """Gain distribution has unbounded support; the Hoeffding bound does not apply."""


def _rayleigh_log_mgf_z(z: float) -> float:
    # MGF of a*h, h Rayleigh with E h^2 = P, is 1 + sqrt(pi) z e^{z^2} (1 + erf z), z = a t sqrt(P) / 2
    if z >= 0:
        if z < 5.0:
            return math.log1p(SQRT_PI * z * math.exp(z * z) * (1.0 + math.erf(z)))
        return z * z + math.log(SQRT_PI * z * (1.0 + math.erf(z)) + math.exp(-z * z))
    if z > -1e4:
        return math.log(1.0 + SQRT_PI * z * special.erfcx(-z))
    inv = 1.0 / (z * z)
    # asymptotic series of 1 - sqrt(pi)|z| erfcx(|z|)
    return math.log(0.5 * inv * (1.0 - 1.5 * inv + 3.75 * inv * inv))


def rayleigh_log_mgf(t: float, P_r: float, A_k: float = 1.0) -> float:
    """log E[exp(t A_k h)] for a Rayleigh gain h with E|h|^2 = P_r."""
    if not P_r > 0:
        raise ValueError("received power must be positive")
    if A_k == 0:
        raise ValueError("amplitude must be nonzero")
    return _rayleigh_log_mgf_z(0.5 * A_k * t * math.sqrt(P_r))


def rayleigh_mgf(t: float, P_r: float, A_k: float = 1.0) -> float:
    """E[exp(t A_k h)] for a Rayleigh gain h with E|h|^2 = P_r.

    Equals 1 + sqrt(pi/2) (sqrt(P_r) A_k t / sqrt(2)) exp(P_r A_k^2 t^2 / 4)
    (1 + erf(sqrt(P_r) A_k t / 2)), evaluated through erfcx for t A_k < 0.
    Raises OverflowError beyond double range.
    """
    return math.exp(rayleigh_log_mgf(t, P_r, A_k))


@dataclass(frozen=True)
class ChannelModel:
    """Real, phase-corrected channel gain distribution.

    equal: h = gain.  rayleigh: E|h|^2 = power.  on-off: h = gain w.p. p, else 0.
    """

    kind: str
    gain: float = 1.0
    power: float = 1.0
    p: float = 1.0

    def __post_init__(self):
        if self.kind not in (EQUAL, RAYLEIGH, ON_OFF):
            raise ValueError(f"unknown channel kind {self.kind!r}")
        if self.kind in (EQUAL, ON_OFF) and not self.gain > 0:
            raise ValueError("gain must be positive")
        if self.kind == RAYLEIGH and not self.power > 0:
            raise ValueError("power must be positive")
        if self.kind == ON_OFF and not 0.0 < self.p <= 1.0:
            raise ValueError("ON probability must lie in (0, 1]")

    @classmethod
    def equal(cls, gain: float = 1.0) -> "ChannelModel":
        return cls(EQUAL, gain=gain)

    @classmethod
    def rayleigh(cls, power: float = 1.0) -> "ChannelModel":
        return cls(RAYLEIGH, power=power)

    @classmethod
    def on_off(cls, p: float, gain: float = 1.0) -> "ChannelModel":
        return cls(ON_OFF, gain=gain, p=p)

    @property
    def mean(self) -> float:
        if self.kind == EQUAL:
            return self.gain
        if self.kind == RAYLEIGH:
            return math.sqrt(math.pi * self.power / 4.0)
        return self.p * self.gain

    @property
    def variance(self) -> float:
        if self.kind == EQUAL:
            return 0.0
        if self.kind == RAYLEIGH:
            return self.power * (1.0 - math.pi / 4.0)
        return self.gain ** 2 * self.p * (1.0 - self.p)

    @property
    def h_max(self) -> Optional[float]:
        """Upper bound on the gain, or None for unbounded support."""
        return None if self.kind == RAYLEIGH else self.gain

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        if self.kind == EQUAL:
            return np.full(size, self.gain)
        if self.kind == RAYLEIGH:
            # inverse CDF; 1 - U keeps the log argument away from 0
            return np.sqrt(-self.power * np.log1p(-rng.random(size)))
        return self.gain * (rng.random(size) < self.p)

    def log_mgf(self, t: float, scale: float = 1.0) -> float:
        """log E[exp(t * scale * h)]."""
        s = t * scale
        if self.kind == EQUAL:
            return s * self.gain
        if self.kind == RAYLEIGH:
            return _rayleigh_log_mgf_z(0.5 * s * math.sqrt(self.power)) if s != 0 else 0.0
        return float(np.logaddexp(math.log(self.p) + s * self.gain, math.log1p(-self.p))) if self.p < 1 \
            else s * self.gain

    def mgf(self, t: float, scale: float = 1.0) -> float:
        return math.exp(self.log_mgf(t, scale))


@dataclass(frozen=True)
class NoiseSpec:
    """Zero-mean sigma2-sub-Gaussian receiver noise.

    With ``interferer`` b > 0 the noise is a uniform interferer on [-b, b]
    (b^2-sub-Gaussian) plus Gaussian noise of variance sigma2 - b^2, so the
    total variance proxy stays sigma2.
    """

    sigma2: float = 0.0
    interferer: float = 0.0

    def __post_init__(self):
        if self.sigma2 < 0:
            raise ValueError("variance proxy must be nonnegative")
        if self.interferer < 0 or self.interferer ** 2 > self.sigma2 + 1e-15:
            raise ValueError("interferer amplitude must satisfy b^2 <= sigma2")

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        if self.sigma2 == 0:
            return np.zeros(size)
        gauss_var = max(self.sigma2 - self.interferer ** 2, 0.0)
        w = math.sqrt(gauss_var) * rng.standard_normal(size)
        if self.interferer > 0:
            w = w + self.interferer * rng.uniform(-1.0, 1.0, size)
        return w


def choose_Z(channel: ChannelModel) -> float:
    """Receiver normalizer: the mean gain (equal gain g gives g)."""
    if not channel.mean > 0:
        raise ValueError("channel mean must be positive")
    return channel.mean


def _tiled(cfg: DetectorConfig, n: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    idx = np.arange(n) % cfg.N
    return cfg.p0[idx], cfg.p1[idx], cfg.A[idx]


def channel_margins(cfg: DetectorConfig, channel: ChannelModel) -> Tuple[float, float]:
    """tau - E[y_N/Z | H0] and E[y_N/Z | H1] - tau for the configured N."""
    tau = detector_threshold(cfg)
    ratio = channel.mean / cfg.Z
    d0 = tau - ratio * float(np.mean(cfg.p0 * cfg.A))
    d1 = ratio * float(np.mean(cfg.p1 * cfg.A)) - tau
    return d0, d1


def verify_A1(cfg: DetectorConfig, channel: ChannelModel, N_cap: int = 100_000):
    """Channel-aware margins at cfg.N and the smallest N0 beyond which both stay positive.

    Sensor profiles are repeated cyclically to grow the network.  N0 is None
    when the margins are not positive for every N in [N0, N_cap].
    """
    d0, d1 = channel_margins(cfg, channel)
    p0, p1, A = _tiled(cfg, N_cap)
    n = np.arange(1, N_cap + 1)
    ratio = channel.mean / cfg.Z
    base = np.cumsum(np.log1p(-p0) - np.log1p(-p1)) / n + math.log(cfg.eta) / n
    m0 = base - ratio * np.cumsum(p0 * A) / n
    m1 = ratio * np.cumsum(p1 * A) / n - base
    good = (m0 > 0) & (m1 > 0)
    if not good[-1]:
        return d0, d1, None
    bad = np.flatnonzero(~good)
    N0 = 1 if bad.size == 0 else int(bad[-1]) + 2
    return d0, d1, N0


def fading_hoeffding_bound(cfg: DetectorConfig, channel: ChannelModel, sigma2: float, E_N: float) -> Bounds:
    """Hoeffding bound with bounded independent gains, |h/Z| <= h_max."""
    if channel.h_max is None:
        raise BoundUnavailable(f"{channel.kind} gains are unbounded; no Hoeffding bound")
    deltas = channel_margins(cfg, channel)
    return hoeffding_bound_inid(cfg, sigma2, E_N, h_max=channel.h_max / cfg.Z, deltas=deltas)
