"""Critical QFI growth of the nearest-neighbour transverse Ising chain.

Free-fermion ground states of the open chain at theta = -pi/4 for L up to
512, fitted to f_Q = a L^b.
"""

import math

from qfi_criticality.free_fermion import build_ising_nn_fermion, qfi_scaling_series
from qfi_criticality.thermal_scaling import fit_power_law

sizes = [32, 64, 128, 256, 512]
series = qfi_scaling_series(lambda L: build_ising_nn_fermion(L, -math.pi / 4, boundary="open"),
                            sizes, axis="x", subtract_one=False)
for L, fq in zip(series.xs, series.ys):
    print(f"L={int(L):4d}  f_Q={fq:.4f}")
fit = fit_power_law(series)
print(f"a={fit.params['a']:.3f}  b={fit.params['b']:.3f}  rms={fit.rms:.2e}")
