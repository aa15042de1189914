"""Spatial two-state Markov (Gilbert-Elliott) model for transmit indicators.

Under each hypothesis the indicators 1{x_n in region} form a Markov chain
along the sensor index with transition matrix [[alpha, 1-alpha], [1-beta, beta]].
The limiting log-MGF of the fusion statistic is the log Perron root of the
tilted matrix Pi D_t with D_t = diag(1, E[exp(t h)]).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .channel import ChannelModel
from .infotheory import LogMGF, legendre_transform
from .model import SensorProfile

STATIONARY = "stationary"


class ReducibilityError(ValueError):
    """The 2x2 matrix has a zero off-diagonal entry."""


@dataclass(frozen=True)
class MarkovChain2:
    """Two-state chain; alpha = P(0 -> 0), beta = P(1 -> 1)."""

    alpha: float
    beta: float

    def __post_init__(self):
        if not (0.0 <= self.alpha <= 1.0 and 0.0 <= self.beta <= 1.0):
            raise ValueError("transition probabilities must lie in [0, 1]")

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.alpha, 1.0 - self.alpha], [1.0 - self.beta, self.beta]])

    @property
    def irreducible(self) -> bool:
        return self.alpha < 1.0 and self.beta < 1.0

    @property
    def stationary_one(self) -> float:
        """Stationary probability of state 1."""
        if not self.irreducible:
            raise ReducibilityError("stationary law is not unique for a reducible chain")
        return (1.0 - self.alpha) / ((1.0 - self.alpha) + (1.0 - self.beta))


@dataclass(frozen=True)
class MarkovField:
    """Per-hypothesis chains plus the initial condition.

    ``init`` is "stationary" (first indicator drawn from the stationary law) or
    a virtual state s in {0, 1} preceding the first sensor.
    """

    H0: MarkovChain2
    H1: MarkovChain2
    init: Union[str, int] = STATIONARY

    def __post_init__(self):
        if self.init not in (STATIONARY, 0, 1):
            raise ValueError("init must be 'stationary', 0 or 1")

    @classmethod
    def from_params(cls, alpha0, beta0, alpha1, beta1, init=STATIONARY) -> "MarkovField":
        return cls(MarkovChain2(alpha0, beta0), MarkovChain2(alpha1, beta1), init)

    def chain(self, hypothesis: int) -> MarkovChain2:
        return self.H1 if hypothesis == 1 else self.H0

    def profile(self) -> SensorProfile:
        """Sensor profile built from the stationary transmit probabilities."""
        return SensorProfile.from_probs(self.H0.stationary_one, self.H1.stationary_one)

    def first_one_prob(self, hypothesis: int) -> float:
        c = self.chain(hypothesis)
        if self.init == STATIONARY:
            return c.stationary_one
        return c.beta if self.init == 1 else 1.0 - c.alpha


def sample_field(field: MarkovField, hypothesis: int, N: int, rng: np.random.Generator,
                 size=None) -> np.ndarray:
    """Draw indicator vectors of length N; ``size`` adds a leading batch axis."""
    if N < 1:
        raise ValueError("N must be >= 1")
    c = field.chain(hypothesis)
    batch = 1 if size is None else int(size)
    u = rng.random((N, batch))
    # next state is (u < beta) after a 1 and (u < 1 - alpha) after a 0
    from_zero = u < 1.0 - c.alpha
    switch = (u < c.beta) ^ from_zero
    out = np.empty((N, batch), dtype=bool)
    out[0] = u[0] < field.first_one_prob(hypothesis)
    for n in range(1, N):
        np.bitwise_xor(from_zero[n], out[n - 1] & switch[n], out=out[n])
    out = out.T.astype(np.int8)
    return out[0] if size is None else out


def tilted_matrix(field: MarkovField, hypothesis: int, t: float,
                  channel_mgf: Callable[[float], float]) -> np.ndarray:
    """Pi_t = Pi diag(1, E[exp(t h)])."""
    kappa = channel_mgf(t)
    return field.chain(hypothesis).matrix * np.array([1.0, kappa])


def perron_eigenvalue(M) -> float:
    """Perron root of a nonnegative irreducible 2x2 matrix.

    For Pi_t this is (beta k + alpha)/2 + sqrt(((beta k + alpha)/2)^2
    - k (alpha beta - (1-alpha)(1-beta))); the discriminant is evaluated as
    ((a - d)/2)^2 + b c, which is the same number without cancellation.
    """
    M = np.asarray(M, dtype=float)
    if M.shape != (2, 2) or np.any(M < 0):
        raise ValueError("expected a nonnegative 2x2 matrix")
    a, b, c, d = M[0, 0], M[0, 1], M[1, 0], M[1, 1]
    if b == 0 or c == 0:
        raise ReducibilityError("off-diagonal entry is zero")
    if a + b == c + d:
        # equal row sums: the ones vector is the positive eigenvector
        return float(a + b)
    return float(0.5 * (a + d) + math.sqrt(0.25 * (a - d) ** 2 + b * c))


def tilted_log_perron(alpha: float, beta: float, log_kappa: float) -> float:
    """log rho(Pi_t) given log kappa = log E[exp(t h)], safe for huge kappa."""
    if not (alpha < 1.0 and beta < 1.0):
        raise ReducibilityError("chain is reducible")
    if log_kappa == 0:
        return 0.0
    if log_kappa < 0:
        kappa = math.exp(log_kappa)
        return math.log(0.5 * (alpha + beta * kappa)
                        + math.sqrt(0.25 * (alpha - beta * kappa) ** 2 + kappa * (1 - alpha) * (1 - beta)))
    inv = math.exp(-log_kappa)
    # rho / kappa, using the matrix divided by kappa
    scaled = (0.5 * (alpha * inv + beta)
              + math.sqrt(0.25 * (alpha * inv - beta) ** 2 + inv * (1 - alpha) * (1 - beta)))
    return log_kappa + math.log(scaled)


def markov_log_mgf(field: MarkovField, hypothesis: int, gain_log_mgf: LogMGF) -> LogMGF:
    """Limiting log-MGF t -> log rho(Pi_t) of (1/N) sum_n G_n 1_n.

    ``gain_log_mgf`` is the log-MGF of the per-transmission contribution G.
    """
    c = field.chain(hypothesis)

    def lam(t):
        return tilted_log_perron(c.alpha, c.beta, gain_log_mgf(t))

    return lam


def markov_rate_function(field: MarkovField, hypothesis: int, channel: ChannelModel, x: float,
                         amplitude: float = 1.0, Z: float = 1.0) -> float:
    """Rate function I(x) of (1/N) sum_n (amplitude h_n / Z) 1_n under a hypothesis."""
    scale = amplitude / Z
    lam = markov_log_mgf(field, hypothesis, lambda t: channel.log_mgf(t, scale))
    return legendre_transform(lam, x)[0]


def markov_log_likelihood(field: MarkovField, hypothesis: int, bits) -> np.ndarray:
    """Log-probability of indicator vectors (last axis = sensors) under one chain."""
    bits = np.atleast_2d(np.asarray(bits, dtype=np.int8))
    c = field.chain(hypothesis)
    P = c.matrix
    with np.errstate(divide="ignore"):
        logP = np.log(P)
        q = field.first_one_prob(hypothesis)
        first = np.where(bits[:, 0] == 1, math.log(q) if q > 0 else -np.inf,
                         math.log1p(-q) if q < 1 else -np.inf)
    trans = logP[bits[:, :-1], bits[:, 1:]].sum(axis=1)
    return first + trans


def markov_llr(field: MarkovField, bits) -> np.ndarray:
    """Exact log-likelihood ratio log P1(bits)/P0(bits) by forward accumulation."""
    return markov_log_likelihood(field, 1, bits) - markov_log_likelihood(field, 0, bits)
