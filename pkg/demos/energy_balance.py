"""Power, stored energy and dissipation for a smooth strain history on case 1.

Halving the step should roughly halve the residual of the balance P = dW/dt + Pdiss.
"""

import numpy as np

from fraczener.cli import PRESETS
from fraczener.energy import STRAIN, History, energy_from_strain
from fraczener.model_catalog import model_from_descriptor

m = model_from_descriptor(PRESETS["case-np"])
for n in (2000, 4000):
    h = History.from_function(lambda t: 1 - np.exp(-t), 10.0, n, STRAIN)
    e = energy_from_strain(m, h)
    print(f"n={n:5d}  residual/max|P| = {e.identity_residual / np.max(np.abs(e.P)):.3e}"
          f"  min W = {e.W.min():.2e}  min Pdiss = {e.Pdiss.min():.2e}  W(10) = {e.W[-1]:.6f}")
