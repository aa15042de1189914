"""Pick a transmission region and read off what the detector will do with it.

A Gaussian signal of variance 3 sits in unit noise. Sensors transmit when
|x| exceeds X_L, and X_L is tuned so that a fifth of them transmit on
average. From the resulting per-sensor probabilities we get the waveform
amplitude, the detector threshold, and the asymptotic error exponent.
"""

import math

from seema import (DetectorConfig, ObservationModel, SensorProfile, asymptotic_exponent_iid, calibrate_region,
                   detector_threshold, kl_bernoulli)

model = ObservationModel.gaussian_variance(3.0, noise_var=1.0)
region = calibrate_region(model, target_fraction=0.2)
prof = SensorProfile.from_region(region, model)
print(f"calibrated X_L = {region.X_L:.4f}")
print(f"P(transmit | H0) = {prof.p0:.4f}   P(transmit | H1) = {prof.p1:.4f}")
print(f"amplitude A = {prof.A:.4f}")

# Both Bernoulli divergences drive the finite-N margins.
print(f"D(p0||p1) = {kl_bernoulli(prof.p0, prof.p1):.5f}   D(p1||p0) = {kl_bernoulli(prof.p1, prof.p0):.5f}")

I = asymptotic_exponent_iid(prof.p0, prof.p1)
print(f"error exponent I = {I:.5f}  ->  Pe roughly exp(-{I:.3f} N)")
for N in (20, 60, 120):
    cfg = DetectorConfig.iid(prof, N)
    print(f"  N={N:4d}  tau={detector_threshold(cfg):.4f}  exp(-N I)={math.exp(-N * I):.2e}")
