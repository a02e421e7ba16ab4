"""The alpha2 = 0 branch: closed-form quantum value, its optimal two-qubit
realization, the sum-of-squares certificate and the region of quantum
advantage on a coarse grid.

Run with ``python3 demos/branch0_family.py`` (a few seconds).
"""
import numpy as np

from i3322.bounds_classical import classify_region, local_value_closed
from i3322.functional import FunctionalParams
from i3322.grid import Grid
from i3322.quantum_exact import (optimal_realization_branch0,
                                 quantum_value_branch0, sos_residual)
from i3322.realization import value


def main():
    p = FunctionalParams(0.25, 0, 1.5)
    nu, regime = quantum_value_branch0(p)
    print(f"{p}: beta_Q = {nu:.10f} ({regime}), beta_L = "
          f"{local_value_closed(p):.4f}")
    for mu in (0.0, 1.0, 2.0):
        r = optimal_realization_branch0(p, mu)
        print(f"  mu = {mu:.1f}: value {value(p, r):.12f}, SOS residual "
              f"{sos_residual(p, r):.1e}")

    # 'Q' where the quantum value exceeds the local one
    g = Grid.regular(0.25, alpha2=0)
    rows = {}
    for i, j, q in g.nodes():
        rows.setdefault(j, []).append(
            "Q" if classify_region(q).quantum == "Q_gt_L" else ".")
    print("\nalpha3 \\ alpha1 0 .. 4 (step 0.25)")
    for j in sorted(rows, reverse=True):
        print(f"{g.alpha3[j]:5.2f}  {''.join(rows[j])}")
    edge = np.sqrt(np.asarray([g.alpha3[j] for j in sorted(rows)]) ** 2 + 1) - 1
    print("upper edge sqrt(alpha3^2+1)-1:", np.round(edge, 3))


if __name__ == "__main__":
    main()
