"""Randomized properties driven by hypothesis."""
import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from i3322.bounds_classical import (local_value_closed, local_value_enum,
                                    ns_value_closed, ns_value_lp)
from i3322.functional import (Behavior, FunctionalParams, evaluate,
                              symmetry_generators, table_from_behavior)
from i3322.pv import PVParams, angle_counts, pv_value_dense, pv_value_fast
from i3322.quantum_exact import sos_residual
from i3322.realization import (Realization, haar_state,
                               random_projective_observable)

alpha1 = st.floats(0, 4, allow_nan=False)
alpha3 = st.floats(0, 2, allow_nan=False)
alpha2 = st.integers(0, 1)
seeds = st.integers(0, 2 ** 32 - 1)


@st.composite
def params(draw):
    return FunctionalParams(draw(alpha1), draw(alpha2), draw(alpha3))


@st.composite
def behaviors(draw):
    v = draw(st.lists(st.floats(-1, 1, allow_nan=False), min_size=15,
                      max_size=15))
    return Behavior(v[:3], v[3:6], np.reshape(v[6:], (3, 3)))


@given(params(), behaviors())
def test_symmetries_any_behavior(p, b):
    for g in symmetry_generators(p.alpha2):
        assert abs(evaluate(p, g(b)) - evaluate(p, b)) < 1e-12


@given(params(), behaviors(), behaviors(), st.floats(0, 1))
def test_evaluate_affine(p, b1, b2, t):
    mix = Behavior(*(t * x + (1 - t) * y for x, y in
                     ((b1.marg_A, b2.marg_A), (b1.marg_B, b2.marg_B),
                      (b1.corr, b2.corr))))
    lhs = evaluate(p, mix)
    rhs = t * evaluate(p, b1) + (1 - t) * evaluate(p, b2)
    assert abs(lhs - rhs) < 1e-10


@settings(max_examples=60, deadline=None)
@given(params())
def test_local_closed_matches_enum(p):
    assert abs(local_value_enum(p)[0] - local_value_closed(p)) < 1e-12


@settings(max_examples=40, deadline=None)
@given(params())
def test_ns_closed_matches_lp(p):
    assert abs(ns_value_lp(p) - ns_value_closed(p)) < 1e-7


@settings(max_examples=40, deadline=None)
@given(st.floats(0, 1.9), alpha2, st.integers(2, 4), st.integers(2, 4), seeds)
def test_sos_identity(a1, a2, dA, dB, seed):
    a3 = a1 + 0.1 + (2 - a1) * 0.5
    rng = np.random.default_rng(seed)
    A = tuple(random_projective_observable(dA, rng) for _ in range(3))
    B = tuple(random_projective_observable(dB, rng) for _ in range(3))
    r = Realization(A, B, haar_state(dA * dB, rng))
    assert sos_residual(FunctionalParams(a1, a2, a3), r) < 1e-10


@settings(max_examples=60, deadline=None)
@given(params(), st.integers(3, 9), seeds)
def test_pv_fast_matches_dense(p, n, seed):
    rng = np.random.default_rng(seed)
    kA, kB = angle_counts(n)
    q = PVParams(n, rng.uniform(-4, 4, kA), rng.uniform(-4, 4, kB),
                 rng.standard_normal(n))
    assert abs(pv_value_fast(p, q) - pv_value_dense(p, q)) < 1e-10


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_quantum_behavior_is_valid_table(seed):
    rng = np.random.default_rng(seed)
    A = tuple(random_projective_observable(2, rng) for _ in range(3))
    B = tuple(random_projective_observable(3, rng) for _ in range(3))
    b = Realization(A, B, haar_state(6, rng)).behavior()
    t = table_from_behavior(b)
    assert np.all(t.p >= 0)
