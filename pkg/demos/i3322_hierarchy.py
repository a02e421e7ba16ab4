"""The chain of bounds on I3322: local, two-qubit, PV lower bounds and the
NPA upper bounds.

Run with ``python3 demos/i3322_hierarchy.py`` (about 30 s).
"""
from i3322.bounds_classical import local_value_closed, ns_value_closed
from i3322.functional import I3322
from i3322.npa import npa_value
from i3322.pv import LadderSchedule, StoppingRule, ladder_run
from i3322.seesaw import SeesawConfig, seesaw


def main():
    print(f"beta_L        = {local_value_closed(I3322):.10f}")
    print(f"beta_2x2      = {seesaw(I3322, SeesawConfig(seed=1)).value:.10f}")

    sched = LadderSchedule(tuple(range(3, 51)))
    lr = ladder_run(I3322, None, sched, StoppingRule(window=100))
    for n, v in zip(lr.dims, lr.values):
        if n in (5, 10, 15, 20, 24, 30, 40, 50):
            print(f"beta_PV(n={n:3d}) = {v:.10f}")

    for level in ("1", "1+AB", "2", "3"):
        print(f"NPA {level:<5s}     = {npa_value(I3322, level):.10f}")
    print(f"beta_NS       = {ns_value_closed(I3322):.10f}")


if __name__ == "__main__":
    main()
