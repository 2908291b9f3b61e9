"""Relaxation modulus and creep compliance for the three I+ID.ID parameter rows.

Prints the pole regime of each row, then both curves on a coarse log grid. The
printed RP row sits within 1e-3 of tangency but, checked strictly, has no zero on
the cut, so its response is evaluated as a no-pole row.
"""

import numpy as np

from fraczener.cli import PRESETS, EXAMPLE_ROWS
from fraczener.model_catalog import model_from_descriptor
from fraczener.pole_finder import classify
from fraczener.response import classify_relaxation, creep, relaxation

t = np.geomspace(1e-2, 1e2, 9)

for name in EXAMPLE_ROWS:
    m = model_from_descriptor(PRESETS[name])
    cls = classify(m.phi_sigma, rp_tol=1e-3)
    print(f"{name}: phi_sigma zeros within 1e-3 -> {cls.kind}"
          + ("" if cls.rho is None else f" (rho={cls.rho:.6f}, phi/pi={cls.phi / np.pi:.6f})")
          + f"; evaluated as {classify_relaxation(m).kind}")
    r = relaxation(m, t, rp_tol=1e-3).values
    c = creep(m, t).values
    print(f"{'t':>10} {'relaxation':>14} {'creep':>14}")
    for row in zip(t, r, c):
        print("{:10.4g} {:14.6e} {:14.6e}".format(*row))
    print()
