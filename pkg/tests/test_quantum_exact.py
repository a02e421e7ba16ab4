import math

import numpy as np
import pytest

from i3322.bounds_classical import local_value_closed
from i3322.functional import DomainError, evaluate
from i3322.functional import FunctionalParams as F
from i3322.quantum_exact import (bell_operator, branch0_solution,
                                 optimal_realization_branch0,
                                 probability_point, quantum_value_branch0,
                                 region_bounds_branch0, sos_polynomials,
                                 sos_residual, structural_checks,
                                 trivial_measurement_bracket,
                                 trivial_measurement_realization,
                                 trivial_measurement_value,
                                 triangular_region_realization)
from i3322.realization import (IDENTITY2, PAULI_X, PAULI_Z, Realization,
                               haar_state, random_projective_observable,
                               value)


def random_realization(rng, dA, dB, real=False):
    A = tuple(random_projective_observable(dA, rng, real) for _ in range(3))
    B = tuple(random_projective_observable(dB, rng, real) for _ in range(3))
    return Realization(A, B, haar_state(dA * dB, rng))


def top_eig(W):
    return float(np.linalg.eigvalsh(W)[-1])


# ------------------------------------------------------------ Bell operator

def test_bell_operator_correlated_optimum():
    r = optimal_realization_branch0(F(0, 0, 1))
    assert abs(top_eig(bell_operator(F(0, 0, 1), r)) - 5) < 1e-12


@pytest.mark.parametrize("a1,a3", [(0.0, 1.0), (1.5, 0.3)])
def test_bell_operator_identity_observables(rng, a1, a3):
    I = IDENTITY2
    r = Realization((I, I, I), (I, I, I), haar_state(4, rng))
    W = bell_operator(F(a1, 0, a3), r)
    # alpha1 (<A1>+<A2>+<B1>+<B2>) + 4 correlators; the alpha3 terms cancel
    assert abs(r.expectation(W) - (4 * a1 + 4)) < 1e-12


@pytest.mark.parametrize("alpha2", [0, 1])
def test_bell_operator_matches_behavior(rng, alpha2):
    p = F(0.8, alpha2, 1.2)
    for _ in range(10):
        r = random_realization(rng, 2, 2)
        assert abs(r.expectation(bell_operator(p, r))
                   - evaluate(p, r.behavior())) < 1e-10


def test_flipped_operator_is_relabel(rng):
    p = F(0.8, 1, 1.2)
    r = random_realization(rng, 2, 3)
    Wf = bell_operator(p, r, flipped=True)
    relabeled = Realization(r.A, (-r.B[1], -r.B[0], r.B[2]), r.state)
    assert abs(r.expectation(Wf) - value(p, relabeled)) < 1e-12


def test_bell_operator_dimension_mismatch():
    with pytest.raises(DomainError):
        bell_operator(F(0, 0, 1), ((PAULI_X, PAULI_Z, np.eye(3)),
                                   (PAULI_X, PAULI_Z, PAULI_X)))


# ------------------------------------------------------------ branch 0

@pytest.mark.parametrize("p,v", [((0, 0, 1), 5.0), ((0, 0, 2), 8.0),
                                 ((0.25, 0, 1), 5.2041667)])
def test_branch0_values(p, v):
    val, regime = quantum_value_branch0(F(*p))
    assert regime == "nu"
    assert abs(val - v) < 1e-7


def test_branch0_value_formula():
    # gamma^2 = (1 - 1/16)/2 = 15/32, nu = 2 (15/32 + 32/15)
    assert abs(quantum_value_branch0(F(0.25, 0, 1))[0]
               - 2 * (15 / 32 + 32 / 15)) < 1e-14


def test_branch0_regimes():
    assert quantum_value_branch0(F(2, 0, 1))[1] == "local_4(alpha1+1)"
    assert quantum_value_branch0(F(0.5, 0, 3))[1] == "local_4alpha3"
    assert quantum_value_branch0(F(2.0, 0, 3))[1] == "nu"
    assert quantum_value_branch0(F(1.0, 0, 0))[1] == "alpha3_zero"
    with pytest.raises(DomainError):
        quantum_value_branch0(F(0, 1, 1))


def test_solution_relations():
    for a1, a3 in [(0, 1), (0.25, 1), (0.6, 1.8), (0.3, 0.9)]:
        s = branch0_solution(F(a1, 0, a3))
        g2 = s.gamma2
        assert abs(g2 - 0.5 * (a3 ** 2 - a1 ** 2)) < 1e-14
        assert abs(s.nu - 2 * (g2 + a3 ** 2 / g2)) < 1e-12
        assert abs((2 * math.sin(s.theta)) ** 2
                   - 2 * (g2 - a1 ** 2 / g2)) < 1e-12
        assert abs(math.cos(s.phi) - a1 / g2 * math.cos(s.theta)) < 1e-10
        assert abs(math.sin(s.phi) - a3 / g2 * math.sin(s.theta)) < 1e-10


def test_solution_domain_errors():
    with pytest.raises(DomainError, match="alpha1 < alpha3"):
        branch0_solution(F(1, 0, 1))
    with pytest.raises(DomainError, match="f\\(alpha1, alpha3\\)"):
        branch0_solution(F(0.9, 0, 1))
    with pytest.raises(DomainError, match="sqrt\\(alpha3 \\(alpha3 - 2\\)\\)"):
        branch0_solution(F(0.5, 0, 3))


def test_realization_correlated_case():
    r = optimal_realization_branch0(F(0, 0, 1), mu=0.0)
    s = branch0_solution(F(0, 0, 1))
    assert abs(math.sin(s.theta) - 0.5) < 1e-14
    assert abs(s.phi - math.pi / 2) < 1e-14
    assert abs(value(F(0, 0, 1), r) - 5) < 1e-12


@pytest.mark.parametrize("a3", [0.3, 1.0, 1.9])
def test_maximally_entangled_at_alpha1_zero(a3):
    for mu in (0.0, 1.0, 2.5):
        psi = optimal_realization_branch0(F(0, 0, a3), mu).state
        assert abs(abs(psi[0]) - abs(psi[3])) < 1e-14


def test_mu_independence():
    p = F(0.25, 0, 1)
    v0 = value(p, optimal_realization_branch0(p, 0.0))
    v1 = value(p, optimal_realization_branch0(p, math.pi / 2))
    assert abs(v1 - v0) < 1e-12 and abs(v0 - 5.2041667) < 1e-7


def test_probability_point_examples():
    b = probability_point(F(0, 0, 1.3), mu=math.pi / 2)
    assert np.allclose(b.marg_A, 0, atol=1e-15)
    assert np.allclose(b.marg_B, 0, atol=1e-15)
    assert abs(b.corr[2, 2]) < 1e-15
    b = probability_point(F(0, 0, 1), mu=0.0)
    assert abs(b.corr[2, 2] - 1) < 1e-15 and abs(b.corr[2, 0] - 0.5) < 1e-15


def test_probability_point_segment(rng):
    p = F(0.4, 0, 1.5)
    b0 = probability_point(p, 0.0).vector()
    bpi = probability_point(p, math.pi).vector()
    for mu in rng.uniform(0, 2 * math.pi, 10):
        t = 0.5 * (1 - math.cos(mu))
        assert np.allclose(probability_point(p, mu).vector(),
                           (1 - t) * b0 + t * bpi, atol=1e-14)
        assert abs(evaluate(p, probability_point(p, mu))
                   - quantum_value_branch0(p)[0]) < 1e-12


def test_cos_phi_monotone_in_alpha1():
    for a3 in (0.5, 1.0, 1.5, 2.0):
        hi = region_bounds_branch0(a3)[1]
        cs = [math.cos(branch0_solution(F(a1, 0, a3)).phi)
              for a1 in np.linspace(0, hi, 25)]
        assert np.all(np.diff(cs) >= -1e-12)


def test_boundary_consistency():
    for a3 in (0.5, 1.0, 1.7, 2.0):
        a1 = math.sqrt(a3 ** 2 + 1) - 1
        g2 = 0.5 * (a3 ** 2 - a1 ** 2)
        assert abs(2 * (g2 + a3 ** 2 / g2) - 4 * (a1 + 1)) < 1e-10
    for a3 in (2.2, 2.5, 3.0):
        p = F(math.sqrt(a3 * (a3 - 2)), 0, a3)
        assert abs(value(p, optimal_realization_branch0(p)) - 4 * a3) < 1e-9


# ------------------------------------------------------------ SOS

@pytest.mark.parametrize("alpha2", [0, 1])
@pytest.mark.parametrize("dims", [(2, 2), (3, 2), (2, 4), (3, 3)])
def test_sos_identity_random(rng, alpha2, dims):
    p = F(0.3, alpha2, 1.0)
    for _ in range(10):
        r = random_realization(rng, *dims)
        assert sos_residual(p, r) < 1e-10


def test_sos_six_dimensional(rng):
    r = random_realization(rng, 6, 6)
    assert sos_residual(F(0.3, 1, 1), r) < 1e-10


def test_sos_requires_projective(rng):
    r = random_realization(rng, 2, 2)
    r2 = Realization((0.5 * r.A[0],) + r.A[1:], r.B, r.state)
    with pytest.raises(DomainError, match="projective"):
        sos_residual(F(0.3, 0, 1), r2)


@pytest.mark.parametrize("a1,a3", [(0, 1), (0.25, 1), (0.7, 1.6)])
def test_sos_annihilates_optimal_state(a1, a3):
    p = F(a1, 0, a3)
    for mu in np.linspace(0, 2 * math.pi, 7):
        r = optimal_realization_branch0(p, mu)
        for P in sos_polynomials(p, r.A, r.B):
            assert np.linalg.norm(P @ r.state) < 1e-8


# ------------------------------------------------------------ structure

def test_structural_checks_pass():
    p = F(0.25, 0, 1)
    for mu in (0.0, 1.1):
        rep = structural_checks(p, optimal_realization_branch0(p, mu))
        assert rep.ok, rep.residuals


def test_structural_anticommutator_value():
    p = F(0, 0, 1)
    r = optimal_realization_branch0(p)
    s = branch0_solution(p)
    assert abs(math.cos(2 * s.theta) - 0.5) < 1e-14
    ac = r.A[0] @ r.A[1] + r.A[1] @ r.A[0]
    assert np.allclose(ac, 2 * 0.5 * np.eye(2), atol=1e-14)


def test_structural_perturbed_fails():
    p = F(0.25, 0, 1)
    s = branch0_solution(p)
    c, t = math.cos(s.theta + 0.01), math.sin(s.theta + 0.01)
    r = optimal_realization_branch0(p)
    A = (c * PAULI_Z + t * PAULI_X, c * PAULI_Z - t * PAULI_X, r.A[2])
    rep = structural_checks(p, Realization(A, r.B, r.state))
    assert rep.residuals["eigenvector"] > 1e-4
    assert "eigenvector" in rep.failures


# ------------------------------------------------------------ alpha2 = 1

def test_trivial_measurement_phi_zero():
    for a1 in (0.0, 0.7, 2.0):
        assert abs(2 * trivial_measurement_bracket(F(a1, 1, 0.9), 0.0)
                   - 4) < 1e-14


def test_trivial_measurement_grid_oracle():
    p = F(2.5, 1, 0.5)
    v, phi, r = trivial_measurement_value(p)
    grid = np.arange(0, math.pi, 1e-5)
    ref = 2 * trivial_measurement_bracket(p, grid).max()
    assert v >= ref - 1e-9 and v - ref < 1e-8
    assert abs(value(p, r) - v) < 1e-9


def test_trivial_measurement_phi_pi_is_local():
    for p in (F(1.5, 1, 0.75), F(2.5, 1, 1.5), F(0.5, 1, 1.0)):
        assert abs(2 * trivial_measurement_bracket(p, math.pi)
                   - 2 * (p.alpha1 + p.alpha3)) < 1e-12
    p = F(2.5, 1, 1.5)
    assert abs(value(p, trivial_measurement_realization(p, math.pi))
               - local_value_closed(p)) < 1e-12


@pytest.mark.parametrize("p,v", [((0.5, 1, 1), 5.0), ((0, 1, 2), 8.0),
                                 ((0, 1, 0), 4.0)])
def test_triangular_realization(p, v):
    r = triangular_region_realization(F(*p))
    assert abs(value(F(*p), r) - v) < 1e-12


def test_triangular_domain():
    with pytest.raises(DomainError):
        triangular_region_realization(F(1.5, 1, 1))
    with pytest.raises(DomainError):
        triangular_region_realization(F(0.5, 0, 1))
