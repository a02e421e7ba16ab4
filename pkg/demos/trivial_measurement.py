"""The alpha2 = 1 branch: the trivial-measurement and triangular
constructions against the see-saw in dimension 2.

Run with ``python3 demos/trivial_measurement.py`` (about 10 s).
"""
from i3322.functional import FunctionalParams
from i3322.quantum_exact import (triangular_region_realization,
                                 trivial_measurement_value)
from i3322.realization import value
from i3322.seesaw import SeesawConfig, seesaw


def main():
    cfg = SeesawConfig(seed=1)
    for a1, a3 in ((1.5, 0.75), (2.0, 1.25), (2.5, 1.5)):
        p = FunctionalParams(a1, 1, a3)
        v, phi, _ = trivial_measurement_value(p)
        print(f"{p}: trivial {v:.10f} (phi={phi:.4f}), see-saw "
              f"{seesaw(p, cfg).value:.10f}")
    for a1, a3 in ((0.5, 1.0), (0.2, 1.5)):
        p = FunctionalParams(a1, 1, a3)
        r = triangular_region_realization(p)
        print(f"{p}: triangular {value(p, r):.10f} = 4 + alpha3^2, see-saw "
              f"{seesaw(p, cfg).value:.10f}")


if __name__ == "__main__":
    main()
