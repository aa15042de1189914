"""Sweep the one-sided threshold X_L for a DC level in Gaussian noise.

Lowering X_L makes more sensors transmit, but past a point the extra
transmissions carry little information: the exponent peaks at half the DC
level and decays to zero as everyone transmits regardless of hypothesis.
"""

import numpy as np

from seema import exponent_sweep_dc

theta = 2.0
sweep = exponent_sweep_dc(theta, 1.0, np.round(np.arange(-4.0, 6.0001, 0.01), 2))
print(f"best X_L = {sweep.argmax:.2f} (theta/2 = {theta / 2})")
print(" X_L   transmit  exponent")
for x in (-4.0, -2.0, 0.0, 0.5, 1.0, 1.5, 2.0, 3.0, 5.0):
    i = int(np.argmin(np.abs(sweep.X_L - x)))
    print(f"{x:5.1f}   {sweep.transmit_fraction[i]:.4f}   {sweep.exponent[i]:.5f}")
