"""Acceptance criteria, one marked group per criterion.

Every test carries ``@pytest.mark.criterion(k, ...)``; ``conftest.py`` prints
one PASS/FAIL line per criterion at the end of the run.
"""
import math

import numpy as np
import pytest

from i3322.bounds_classical import (local_value_closed, local_value_enum,
                                    ns_value_closed, ns_value_lp)
from i3322.functional import I3322
from i3322.functional import FunctionalParams as F
from i3322.grid import Grid
from i3322.npa import npa_value
from i3322.pv import (LadderSchedule, StoppingRule, angle_counts, ladder_run,
                      PVParams, pv_value_dense, pv_value_fast)
from i3322.quantum_exact import (optimal_realization_branch0,
                                 probability_point, quantum_value_branch0,
                                 region_bounds_branch0,
                                 sos_polynomials, sos_residual,
                                 triangular_region_realization,
                                 trivial_measurement_bracket,
                                 trivial_measurement_value)
from i3322.realization import (Realization, haar_state,
                               random_projective_observable, value)
from i3322.seesaw import SeesawConfig, seesaw
from i3322.sweep import SweepSpec, read_rows, run_sweep

SEESAW = SeesawConfig(dA=2, dB=2, trials=150, iterations=50, seed=20240611)


def criterion(k, desc):
    return pytest.mark.criterion(k, desc)


def axis(lo, hi, step):
    return np.round(np.arange(lo, hi + step / 2, step), 10)


# ------------------------------------------------------------ 1

C1 = criterion(1, "closed forms agree with enumeration and the NS LP")


@C1
@pytest.mark.parametrize("alpha2", [0, 1])
def test_c1_local_closed_equals_enum(alpha2):
    bad = [(a1, a3) for a1 in axis(0, 4, 0.1) for a3 in axis(0, 2, 0.1)
           if local_value_closed(F(a1, alpha2, a3))
           != local_value_enum(F(a1, alpha2, a3))[0]]
    assert not bad


@C1
@pytest.mark.parametrize("alpha2", [0, 1])
def test_c1_ns_closed_matches_lp(alpha2):
    err = max(abs(ns_value_closed(F(a1, alpha2, a3))
                  - ns_value_lp(F(a1, alpha2, a3)))
              for a1 in axis(0, 4, 0.1) for a3 in axis(0, 2, 0.1))
    assert err < 1e-7


# ------------------------------------------------------------ 2

C2 = criterion(2, "branch-0 optimal realization, SOS certificate and NPA")

BRANCH0_SAMPLE = [F(a1, 0, a3) for a1 in axis(0, 4, 0.25)
                  for a3 in axis(0, 2, 0.25)
                  if a1 < a3 and 1 + a1 - math.sqrt(a3 ** 2 + 1) <= 0]


def test_branch0_sample_nonempty():
    assert len(BRANCH0_SAMPLE) >= 8


@C2
@pytest.mark.parametrize("p", BRANCH0_SAMPLE, ids=str)
def test_c2_branch0_node(p):
    nu, regime = quantum_value_branch0(p)
    assert regime == "nu"
    r = optimal_realization_branch0(p)
    assert abs(value(p, r) - nu) < 1e-10
    assert sos_residual(p, r) < 1e-10
    for P in sos_polynomials(p, r.A, r.B):
        assert np.linalg.norm(P @ r.state) < 1e-8
    assert abs(npa_value(p, "2") - nu) < 1e-6


@C2
def test_c2_spot_values():
    for p, v in ((F(0, 0, 1), 5.0), (F(0, 0, 2), 8.0)):
        assert abs(quantum_value_branch0(p)[0] - v) < 1e-12
        assert abs(value(p, optimal_realization_branch0(p)) - v) < 1e-10


# ------------------------------------------------------------ 3

C3 = criterion(3, "mu-family flatness and its closed-form behavior")

MUS = np.linspace(0, 2 * math.pi, 8, endpoint=False) + 0.1


@C3
@pytest.mark.parametrize("p", [F(0, 0, 1), F(0.25, 0, 1.5), F(0.5, 0, 2)],
                         ids=str)
def test_c3_mu_family(p):
    nu = quantum_value_branch0(p)[0]
    for mu in MUS:
        r = optimal_realization_branch0(p, mu)
        assert abs(value(p, r) - nu) < 1e-10
        diff = r.behavior().vector() - probability_point(p, mu).vector()
        assert np.max(np.abs(diff)) < 1e-10


# ------------------------------------------------------------ 4

@criterion(4, "I3322 two-qubit see-saw value 5")
def test_c4_i3322_seesaw():
    assert abs(seesaw(I3322, SEESAW).value - 5.0) < 1e-6


# ------------------------------------------------------------ 5

@criterion(5, "I3322 NPA level 3 bound 5.00350175")
def test_c5_i3322_npa3():
    assert abs(npa_value(I3322, "3") - 5.00350175) < 1e-6


# ------------------------------------------------------------ 6

C6 = criterion(6, "I3322 PV ladder value and small-dimension excess over 5")


@C6
def test_c6_pv_ladder_converges():
    lr = ladder_run(I3322, None, LadderSchedule())
    assert lr.flag == "converged_below_bound"
    assert abs(lr.best[1] - 5.00350154) < 2e-7


@C6
def test_c6_quick_excess_at_small_dimension():
    lr = ladder_run(I3322, None, LadderSchedule(tuple(range(3, 16))),
                    StoppingRule(window=100))
    assert max(lr.values) > 5.0


# ------------------------------------------------------------ 7

C7 = criterion(7, "triangular alpha2=1 region: see-saw 4 + alpha3^2")

_tri_rng = np.random.default_rng(7)
TRIANGULAR = []
while len(TRIANGULAR) < 10:
    a1, a3 = _tri_rng.uniform(0, 2, 2)
    if a1 + a3 < 2:
        TRIANGULAR.append(F(round(a1, 3), 1, round(a3, 3)))


@C7
@pytest.mark.parametrize("p", TRIANGULAR, ids=str)
def test_c7_triangular_node(p):
    target = 4 + p.alpha3 ** 2
    assert abs(seesaw(p, SEESAW).value - target) < 1e-6
    assert abs(value(p, triangular_region_realization(p)) - target) < 1e-10


# ------------------------------------------------------------ 8

C8 = criterion(8, "trivial-measurement branch matches see-saw, phi=pi gives L")

TRIVIAL_NODES = [F(1.5, 1, 0.75), F(1.5, 1, 1), F(2, 1, 1.25),
                 F(2.5, 1, 1.5), F(2, 1, 2)]


@C8
@pytest.mark.parametrize("p", TRIVIAL_NODES, ids=str)
def test_c8_trivial_measurement(p):
    v, _, r = trivial_measurement_value(p)
    assert abs(v - seesaw(p, SEESAW).value) < 1e-6
    assert abs(value(p, r) - v) < 1e-8
    assert abs(2 * trivial_measurement_bracket(p, math.pi)
               - local_value_closed(p)) < 1e-12


# ------------------------------------------------------------ 9

C9 = criterion(9, "property suites and 0.25-step region boundary")


@C9
@pytest.mark.parametrize("alpha2", [0, 1])
def test_c9_sos_identity_random(alpha2):
    rng = np.random.default_rng(100 + alpha2)
    for dA, dB in ((2, 2), (2, 3), (3, 3), (4, 2)):
        for _ in range(10):
            a3 = rng.uniform(0.2, 2)
            p = F(rng.uniform(0, a3 - 0.1), alpha2, a3)
            A = tuple(random_projective_observable(dA, rng) for _ in range(3))
            B = tuple(random_projective_observable(dB, rng) for _ in range(3))
            r = Realization(A, B, haar_state(dA * dB, rng))
            assert sos_residual(p, r) < 1e-10


SANDWICH_RNG = np.random.default_rng(909)
SANDWICH_NODES = [F(round(SANDWICH_RNG.uniform(0, 4), 4),
                    int(SANDWICH_RNG.integers(2)),
                    round(SANDWICH_RNG.uniform(0, 2), 4)) for _ in range(50)]


@C9
@pytest.mark.parametrize("p", SANDWICH_NODES, ids=str)
def test_c9_npa_monotone_and_sandwich(p):
    levels = [npa_value(p, lv) for lv in ("1", "1+AB", "2", "3")]
    assert all(a >= b - 1e-7 for a, b in zip(levels, levels[1:]))
    q = seesaw(p, SeesawConfig(trials=5, seed=1)).value
    bL, bNS = local_value_closed(p), ns_value_closed(p)
    assert bL - 1e-9 <= q <= levels[-1] + 1e-6
    # level 1 has the joint probabilities only off the diagonal and can
    # exceed the no-signalling value; from 1+AB on they are diagonal
    assert levels[1] <= bNS + 1e-6


@C9
@pytest.mark.parametrize("n", range(3, 10))
def test_c9_pv_fast_vs_dense(n):
    rng = np.random.default_rng(n)
    kA, kB = angle_counts(n)
    for _ in range(50):
        p = F(rng.uniform(0, 4), int(rng.integers(2)), rng.uniform(0, 2))
        q = PVParams(n, rng.uniform(0, np.pi, kA), rng.uniform(0, np.pi, kB),
                     rng.standard_normal(n))
        assert abs(pv_value_fast(p, q) - pv_value_dense(p, q)) < 1e-10


@C9
def test_c9_seesaw_monotone():
    for k in range(20):
        r = seesaw(F(0.3 * k % 4, k % 2, 0.1 * k), SeesawConfig(trials=1,
                                                              seed=k))
        assert np.all(np.diff(r.history) >= -1e-12)


@C9
def test_c9_sweep_determinism(tmp_path):
    kw = dict(grid=Grid.regular(0.5, a1_max=1.0, a3_max=1.0),
              tasks=("local", "ns", "seesaw:2"), seesaw_trials=3, seed=4)
    a = run_sweep(SweepSpec(out_dir=tmp_path / "a", workers=1, **kw))
    b = run_sweep(SweepSpec(out_dir=tmp_path / "b", workers=2, **kw))
    full = a.csv_path.read_bytes()
    assert b.csv_path.read_bytes() == full
    lines = full.decode().splitlines(keepends=True)
    (tmp_path / "c").mkdir()
    (tmp_path / "c" / "sweep.csv").write_text("".join(lines[:4]))
    c = run_sweep(SweepSpec(out_dir=tmp_path / "c", workers=1, **kw))
    assert c.csv_path.read_bytes() == full


@C9
def test_c9_coarse_region_boundary(tmp_path):
    s = run_sweep(SweepSpec(grid=Grid.regular(0.25, alpha2=0),
                            tasks=("local", "exact"), out_dir=tmp_path))
    rows = read_rows(s.csv_path)
    assert len(rows) == 153
    cell = 0.25
    for row in rows:
        a1, a3 = float(row["alpha1"]), float(row["alpha3"])
        gt = "Q_gt_L" in row["region"].split("|")
        if a3 == 0:
            assert not gt
            continue
        # quantum advantage lies strictly between the two edges; at
        # alpha3 = 2 the lower edge sqrt(alpha3 (alpha3 - 2)) touches 0
        lo, hi = region_bounds_branch0(a3)
        if lo + cell < a1 < hi - cell:
            assert gt, (a1, a3)
        elif a1 > hi + cell or a1 < lo - cell:
            assert not gt, (a1, a3)
        elif a1 == 0 and a3 == 2:
            assert not gt
