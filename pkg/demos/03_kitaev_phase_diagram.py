"""Winding number and QFI scaling exponent across the long-range Kitaev chain.

b is fitted from L = 32..512; phases with W = 1 show b = 1, the alpha < 1
side shows b = 3/4 and the trivial phase b = 0.
"""

import math

import numpy as np

from qfi_criticality.errors import WindingUndefinedError
from qfi_criticality.free_fermion import build_kitaev, qfi_scaling_series
from qfi_criticality.kitaev_momentum import winding_number
from qfi_criticality.thermal_scaling import fit_power_law

sizes = [32, 64, 128, 256, 512]
print("alpha    mu      W      b")
for alpha in (0.0, 3.0, math.inf):
    for mu in (-2.0, -0.5, 0.5, 1.0, 2.0):
        try:
            w = f"{winding_number(1.0, mu, 1.0, alpha):+.1f}"
        except WindingUndefinedError:
            w = "crit"
        series = qfi_scaling_series(lambda L: build_kitaev(L, 1.0, mu, 1.0, alpha), sizes, axis=None)
        b = fit_power_law(series).params["b"] if np.all(series.ys > 0) else 0.0
        print(f"{alpha:5}  {mu:5.1f}  {w:>5}  {b:5.2f}")
