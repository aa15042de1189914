"""Shrinking per-sensor energy as the network grows.

With E_N = N^-0.3 the error still falls exponentially in N. With
E_N = N^-1.3 the channel noise wins and the decay becomes sub-exponential.
"""

from seema.config import bundled, load_scenario
from seema.sim import SEEMA, classify_decay, sweep_N

for name in ("fig2_energy_slow", "fig2_energy_fast"):
    rs = load_scenario(bundled(name), trials=50_000)
    res = sweep_N(rs.scenario, (SEEMA,), rs.N_grid, rs.trials, rs.seed)[SEEMA]
    print(rs.document["description"])
    for r in res[::2]:
        print(f"  N={r.N:4d}  Pe={r.Pe:.3e}")
    print(f"  decay: {classify_decay([r.N for r in res], [r.Pe for r in res])}")
