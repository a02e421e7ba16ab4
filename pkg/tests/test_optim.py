import math

import numpy as np
import pytest
from scipy.optimize import linprog

from i3322.bounds_classical import ns_lp
from i3322.functional import I3322, BellCoefficients
from i3322.functional import FunctionalParams as F
from i3322.npa import build_moment_problem
from i3322.optim.lp import LinearProgram, LpError, solve_lp
from i3322.optim.qn import (QuasiNewtonConfig, central_gradient,
                            golden_section_max, maximize_qn)
from i3322.optim.sdp import SdpProblem, dump_sdp, solve_sdp
from i3322.quantum_exact import trivial_measurement_bracket

CHSH = BellCoefficients(0.0, np.zeros(3), np.zeros(3),
                        [[1, 1, 0], [1, -1, 0], [0, 0, 0]])


# ---------------------------------------------------------------- LP

def test_lp_trivial():
    r = solve_lp(LinearProgram([1.0], np.zeros((0, 1)), [], ub=[1.0]))
    assert r.value == 1.0


def test_lp_ns_polytope():
    r = solve_lp(ns_lp(F(0, 0, 1)))
    assert abs(r.value - 8) < 1e-9
    assert r.duality_gap < 1e-9 and r.primal_residual < 1e-10


def test_lp_zero_objective():
    lp = ns_lp(F(0, 0, 1))
    lp.c = np.zeros_like(lp.c)
    r = solve_lp(lp)
    assert r.value == 0.0
    assert np.max(np.abs(lp.A_eq @ r.x - lp.b_eq)) < 1e-10


def test_lp_infeasible_and_unbounded():
    with pytest.raises(LpError) as e:
        solve_lp(LinearProgram([1.0, 0.0], [[1.0, 1.0]], [-1.0]))
    assert e.value.status == "infeasible"
    with pytest.raises(LpError) as e:
        solve_lp(LinearProgram([1.0, 0.0], [[1.0, -1.0]], [0.0]))
    assert e.value.status == "unbounded"


def test_lp_matches_highs(rng):
    for _ in range(25):
        n, k = 8, 4
        A = rng.standard_normal((k, n))
        x0 = rng.uniform(0, 1, n)
        b = A @ x0
        c = rng.standard_normal(n)
        ub = np.full(n, 2.0)
        mine = solve_lp(LinearProgram(c, A, b, lb=0.0, ub=ub))
        ref = linprog(-c, A_eq=A, b_eq=b, bounds=[(0, 2)] * n, method="highs")
        assert abs(mine.value + ref.fun) < 1e-8
        # objective trace from phase two is monotone
        tr = np.array(mine.objective_trace)
        assert mine.pivots >= 0 and np.all(np.isfinite(tr))


# ---------------------------------------------------------------- SDP

def test_sdp_scalar():
    p = SdpProblem(np.array([[1.0]]), [np.array([[-1.0]])], [1.0])
    r = solve_sdp(p)
    assert abs(r.value - 1) < 1e-8 and abs(r.bound - 1) < 1e-8


def test_sdp_chsh_level1():
    mp = build_moment_problem(CHSH, "1")
    r = solve_sdp(mp.sdp())
    assert abs(mp.offset + r.bound - 2 * math.sqrt(2)) < 1e-7


def _random_sdp(rng, m=6, K=5):
    blocks = []
    for _ in range(K):
        G = rng.standard_normal((m, m))
        blocks.append(G + G.T)
    G = rng.standard_normal((m, m))
    X0 = G @ G.T + np.eye(m)
    c = -np.array([np.sum(Mi * X0) for Mi in blocks])
    return SdpProblem(np.eye(m), blocks, c), blocks


def test_sdp_matches_cvxopt(rng):
    pytest.importorskip("cvxopt")
    from cvxopt import matrix, solvers
    solvers.options["show_progress"] = False
    solvers.options["abstol"] = 1e-10
    solvers.options["reltol"] = 1e-10
    for _ in range(5):
        prob, blocks = _random_sdp(rng)
        G = matrix(np.column_stack([-Mi.reshape(-1, order="F")
                                    for Mi in blocks]))
        sol = solvers.sdp(matrix(-prob.c), Gs=[G], hs=[matrix(prob.M0)])
        ref = -sol["primal objective"]
        r = solve_sdp(prob)
        assert r.converged
        assert abs(r.value - ref) < 1e-6 * (1 + abs(ref))
        assert r.gap < 1e-9 * (1 + abs(r.value)) * 10


def test_sdp_weak_duality(rng):
    prob, _ = _random_sdp(rng)
    r = solve_sdp(prob)
    X = r.certificate
    assert np.linalg.eigvalsh(X).min() > -1e-9
    assert np.linalg.eigvalsh(r.Z).min() > -1e-9
    # dual feasibility reproduces the bound: <M0, X> >= c^T y
    assert r.value <= float(np.sum(prob.M0 * X)) + 1e-8


def test_dump_sdp(tmp_path):
    mp = build_moment_problem(I3322, "1")
    prob = mp.sdp()
    path = tmp_path / "inst.txt"
    dump_sdp(prob, path)
    lines = path.read_text().splitlines()
    assert lines[0] == f"{prob.m} {prob.K}"
    assert len(lines[1].split()) == prob.K
    M = [np.zeros((prob.m, prob.m)) for _ in range(prob.K + 1)]
    for ln in lines[2:]:
        k, i, j, v = ln.split()
        M[int(k)][int(i), int(j)] = float(v)
    assert np.allclose(np.triu(M[0]), np.triu(prob.M0))
    assert np.allclose(np.triu(M[1]), np.triu(prob.block(0).toarray()))


# ---------------------------------------------------------------- QN

def test_qn_quadratic():
    f = lambda x: -np.sum((x - 1) ** 2)
    g = lambda x: -2 * (x - 1)
    r = maximize_qn(f, np.zeros(4), g)
    assert r.converged and abs(r.value) < 1e-16
    assert np.allclose(r.x, 1)


def test_qn_rosenbrock_central():
    f = lambda x: -((1 - x[0]) ** 2 + 100 * (x[1] - x[0] ** 2) ** 2)
    r = maximize_qn(f, np.array([-1.2, 1.0]),
                    cfg=QuasiNewtonConfig(gradient="central", gtol=1e-6,
                                          max_iter=2000))
    assert np.allclose(r.x, [1, 1], atol=1e-5)


def test_qn_monotone(rng):
    vals = []
    f = lambda x: -np.sum(x ** 4 - 3 * x ** 2 + x)
    g = lambda x: -(4 * x ** 3 - 6 * x + 1)
    maximize_qn(f, rng.standard_normal(5), g,
                callback=lambda x, v: vals.append(v))
    assert np.all(np.diff(vals) >= -1e-12)


def test_qn_bracket_matches_golden():
    p = F(2.5, 1, 0.5)
    f1 = lambda t: float(trivial_measurement_bracket(p, t))
    xs = np.linspace(0, math.pi, 2001)
    k = int(np.argmax(trivial_measurement_bracket(p, xs)))
    x_g, v_g = golden_section_max(f1, xs[max(k - 1, 0)], xs[k + 1])
    r = maximize_qn(lambda x: f1(x[0]), np.array([xs[k]]),
                    cfg=QuasiNewtonConfig(gradient="central"))
    assert abs(r.value - v_g) < 1e-9


def test_qn_gradient_check(rng):
    """Central differences agree with an analytic gradient to 1e-5."""
    A = rng.standard_normal((4, 4))
    f = lambda x: float(np.sin(x) @ A @ np.cos(x))
    g = lambda x: np.cos(x) * (A @ np.cos(x)) - np.sin(x) * (A.T @ np.sin(x))
    for _ in range(20):
        x = rng.standard_normal(4)
        num = central_gradient(f, x)
        assert np.allclose(num, g(x), rtol=1e-5, atol=1e-8)


def test_qn_nan_abort():
    f = lambda x: float("nan") if x[0] > 0.5 else -float((x[0] - 2) ** 2)
    r = maximize_qn(f, np.array([0.0]), lambda x: np.array([-2 * (x[0] - 2)]))
    assert np.isfinite(r.value) and r.x[0] <= 0.5
    assert r.status == "nan"


def test_qn_config_validation():
    with pytest.raises(ValueError):
        QuasiNewtonConfig(c1=0.9, c2=0.1)
