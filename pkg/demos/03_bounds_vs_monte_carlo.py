"""Finite-sample guarantees next to simulated error rates.

The Hoeffding bound holds for any bounded gains; the Chernoff bound uses the
exact Bernoulli structure. Both should sit above the Monte Carlo estimate.
"""

from dataclasses import replace

from seema import ObservationModel, TransmissionRegion, chernoff_bound_iid, estimate_error, hoeffding_bound_inid
from seema.channel import NoiseSpec
from seema.sim import Scenario

sc = Scenario(groups=((ObservationModel.gaussian_variance(3.0), 1.0),), region=TransmissionRegion.two_sided(1.9),
              noise=NoiseSpec(5.0))
print("   N   Pe (MC)      hoeffding    chernoff")
for N in (20, 40, 60, 80):
    scN = replace(sc, N=N)
    cfg = scN.detector()
    mc = estimate_error(scN, 200_000, seed=N)
    q0, q1 = scN.priors
    h = hoeffding_bound_inid(cfg, 5.0, 1.0)
    c = chernoff_bound_iid(cfg, 5.0, 1.0)
    print(f"{N:4d}   {mc.Pe:.3e}    {q0 * h.H0 + q1 * h.H1:.3e}    {q0 * c.H0 + q1 * c.H1:.3e}")
