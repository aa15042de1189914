"""Censoring-based distributed detection over multiple-access channels.

Sensors whose observation lands in a transmission region send a common
amplified waveform; the fusion center thresholds the superimposed signal.
The package covers the observation and channel models, exponents and
finite-sample bounds, a spatial Markov extension, and a Monte Carlo engine
with baseline fusion schemes.
"""

from .channel import ChannelModel, NoiseSpec, choose_Z, rayleigh_mgf, verify_A1
from .infotheory import (DetectorConfig, RateReport, asymptotic_exponent_iid, average_kl, chernoff_bound_iid,
                         decide, detector_threshold, exponent_sweep_dc, hoeffding_bound_inid, kl_bernoulli,
                         legendre_transform)
from .markov import MarkovField, markov_rate_function, perron_eigenvalue, sample_field, tilted_matrix
from .model import (ObservationModel, SensorProfile, TransmissionRegion, amplification, calibrate_region,
                    transmission_probs)
from .sim import MCResult, Scenario, energy_accounting, estimate_error, estimate_errors, run_baseline_trial, \
    run_seema_trial

__all__ = [
    "ChannelModel", "NoiseSpec", "choose_Z", "rayleigh_mgf", "verify_A1",
    "DetectorConfig", "RateReport", "asymptotic_exponent_iid", "average_kl", "chernoff_bound_iid", "decide",
    "detector_threshold", "exponent_sweep_dc", "hoeffding_bound_inid", "kl_bernoulli", "legendre_transform",
    "MarkovField", "markov_rate_function", "perron_eigenvalue", "sample_field", "tilted_matrix",
    "ObservationModel", "SensorProfile", "TransmissionRegion", "amplification", "calibrate_region",
    "transmission_probs",
    "MCResult", "Scenario", "energy_accounting", "estimate_error", "estimate_errors", "run_baseline_trial",
    "run_seema_trial",
]

__version__ = "0.1.0"
