"""How much energy does each scheme spend to reach a given error level?

SEEMA only pays for sensors that transmit, and it needs fewer sensors than
LBMA or TDMA to reach the same error rate over a noisy channel.
"""

from seema.config import bundled, load_scenario
from seema.sim import energy_at_pe, sweep_N

rs = load_scenario(bundled("fig1_energy"), trials=20_000)
res = sweep_N(rs.scenario, rs.schemes, rs.N_grid, rs.trials, rs.seed)
targets = [0.05, 0.01]
print("scheme          " + "".join(f"Pe={t:<10g}" for t in targets))
for s in rs.schemes:
    print(f"{s:15s} " + "".join(f"{e:<13.1f}" for e in energy_at_pe(res[s], targets)))
