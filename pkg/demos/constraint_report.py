"""Constraint report and K(rho) scan for an admissible and an inadmissible parameter set."""

import numpy as np

from fraczener.cli import PRESETS
from fraczener.constraints import K_generic, K_nonneg_scan, check_narrowed
from fraczener.model_catalog import model_from_descriptor

for name in ("case-np", "case-ccp"):
    m = model_from_descriptor(PRESETS[name])
    report = check_narrowed(m)
    print(f"{name}: {report.overall}")
    for f in report.failures():
        print(f"  failed {f.id}: {f.lhs:.6g} {f.relation} {f.rhs:.6g}")
    scan = K_nonneg_scan(m)
    if scan.nonnegative:
        print("  K >= 0 on [1e-6, 1e6]")
    else:
        rho, k = scan.first_violation
        print(f"  K({rho:.4g}) = {k:.4g} < 0")
    rho = np.geomspace(1e-2, 1e2, 5)
    print("  K on a few points:", np.array2string(K_generic(m, rho), precision=4))
