"""Thermal QFI of the LMG model and its two-level crossover.

Disordered phase at Lambda = -0.5 with N = 2000: the QFI follows
F_0 tanh(D/2T) and the crossover sits near D/T = 2.4.
"""

import math

import numpy as np

from qfi_criticality.lmg_model import LMGSpec, LMGThermal, lmg_gaps, lmg_kmode_thermal_law
from qfi_criticality.thermal_scaling import crossover_temperature

spec = LMGSpec(2000, -0.5)
thermal, gap = LMGThermal(spec), lmg_gaps(spec)[0]
F0 = thermal.qfi(1e-3 * gap)
for T in np.array([0.1, 0.3, 1.0, 3.0]) * gap:
    law = lmg_kmode_thermal_law(F0, gap, T, math.inf)
    print(f"T/D={T / gap:4.1f}  F_Q={thermal.qfi(T):.4f}  tanh law={law:.4f}")

temps = np.geomspace(0.05, 5, 80) * gap
Tc = crossover_temperature(temps, [thermal.qfi(T) for T in temps])
print(f"D/T_cross={gap / Tc:.3f}")
