"""
Exact quantum values and optimal two-qubit realizations.

For ``alpha2 = 0`` and ``alpha1 < alpha3`` the Bell operator admits the
sum-of-squares decomposition

    nu 1 - W = P1^2 + P2^2 + P3^2,   nu = 2 (gamma^2 + alpha3^2 / gamma^2),
    gamma^2 = (alpha3^2 - alpha1^2) / 2,

valid for every projective realization, and ``nu`` is attained by a
one-parameter family of two-qubit realizations whenever

    0 <= gamma^2 - alpha1^2 / gamma^2 <= 2.

Outside that band the quantum value equals one of the local values. For
``alpha2 = 1`` the same decomposition holds for the operator obtained by
the relabeling ``B1 -> -B2, B2 -> -B1`` (with the sign inside ``P3``
reversed), but
``nu`` is not attained; this module supplies the two closed-form two-qubit
constructions known for that branch.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from .bounds_classical import local_value_closed
from .functional import Behavior, DomainError, FunctionalParams, evaluate
from .optim.qn import golden_section_max
from .realization import (IDENTITY2, PAULI_X, PAULI_Y, PAULI_Z, Realization,
                          bell_operator as _bell_operator)

__all__ = ["BranchZeroSolution", "bell_operator", "branch0_solution",
           "quantum_value_branch0", "optimal_realization_branch0",
           "probability_point", "sos_polynomials", "sos_residual",
           "structural_checks", "StructuralReport",
           "trivial_measurement_bracket", "trivial_measurement_value",
           "trivial_measurement_realization", "triangular_region_realization",
           "region_bounds_branch0"]

_I2 = IDENTITY2


def _require_branch(params: FunctionalParams, alpha2: int):
    if params.alpha2 != alpha2:
        raise DomainError(f"operation defined for alpha2={alpha2}, "
                          f"got alpha2={params.alpha2}")


def bell_operator(params: FunctionalParams, r, flipped: bool = False
                  ) -> np.ndarray:
    """Bell operator of ``params`` on the observables of ``r``.

    Parameters
    ----------
    params : FunctionalParams
    r : Realization or tuple ``(A, B)``
    flipped : bool
        Only for ``alpha2 = 1``: substitute ``B1 -> -B2``, ``B2 -> -B1``,
        which turns the operator into

            alpha1 [(A1+A2) x 1 + 1 x (B1+B2)] - (A1+A2) x (B1+B2)
            + alpha3 [(A1-A2) x B3 + A3 x (B1-B2)],

        the form in which the sum-of-squares decomposition holds. (Negating
        ``B1`` and ``B2`` alone would also flip the sign of the
        ``A3 x (B1-B2)`` term; the extra swap is a symmetry.)

    Returns
    -------
    ndarray
        Hermitian ``(dA dB, dA dB)``; for ``flipped=False``,
        ``<psi|W|psi> = evaluate(params, r.behavior())``.
    """
    A, B = (r.A, r.B) if isinstance(r, Realization) else r
    if len(A) != 3 or len(B) != 3:
        raise DomainError("need three observables per party")
    dA, dB = A[0].shape[0], B[0].shape[0]
    if any(a.shape != (dA, dA) for a in A) or any(b.shape != (dB, dB)
                                                  for b in B):
        raise DomainError("observable dimensions do not match")
    if flipped:
        _require_branch(params, 1)
        B = (-B[1], -B[0], B[2])
    return _bell_operator(params, A, B)


# ---------------------------------------------------------------------------
# alpha2 = 0 closed forms

@dataclass(frozen=True)
class BranchZeroSolution:
    """Closed-form data of the optimal two-qubit family.

    Attributes
    ----------
    gamma2 : float
        ``gamma^2 = (alpha3^2 - alpha1^2) / 2``.
    nu : float
        The sum-of-squares bound ``2 (gamma^2 + alpha3^2 / gamma^2)``.
    theta, phi : float
        Measurement angle in ``[0, pi/2]`` and state angle in ``[0, pi]``.
    f_value : float
        ``1 + alpha1 - sqrt(alpha3^2 + 1)``.
    """

    gamma2: float
    nu: float
    theta: float
    phi: float
    f_value: float


def region_bounds_branch0(alpha3: float) -> Tuple[float, float]:
    """Interval of ``alpha1`` where ``nu`` is attained, at given ``alpha3``.

    ``[0, sqrt(alpha3^2 + 1) - 1]`` for ``alpha3 <= 2`` and
    ``[sqrt(alpha3 (alpha3 - 2)), sqrt(alpha3^2 + 1) - 1]`` beyond.
    """
    hi = math.sqrt(alpha3 ** 2 + 1) - 1
    lo = math.sqrt(alpha3 * (alpha3 - 2)) if alpha3 > 2 else 0.0
    return lo, hi


def branch0_solution(params: FunctionalParams, tol: float = 1e-12
                     ) -> BranchZeroSolution:
    """Angles of the optimal realization, with validity checks.

    Raises
    ------
    DomainError
        If ``alpha2 != 0``, ``gamma^2 <= 0`` (``alpha1 >= alpha3``), or one
        of ``gamma^2 - alpha1^2/gamma^2 >= 0`` (i.e. ``f <= 0``) and
        ``gamma^2 - alpha1^2/gamma^2 <= 2`` is violated.
    """
    _require_branch(params, 0)
    a1, a3 = params.alpha1, params.alpha3
    g2 = 0.5 * (a3 ** 2 - a1 ** 2)
    if g2 <= 0:
        raise DomainError(
            f"gamma^2 = (alpha3^2 - alpha1^2)/2 = {g2:.3g} must be positive "
            "(requires alpha1 < alpha3)")
    t = g2 - a1 ** 2 / g2
    f_value = 1 + a1 - math.sqrt(a3 ** 2 + 1)
    if t < -tol:
        raise DomainError(
            "gamma^2 - alpha1^2/gamma^2 >= 0 violated, i.e. "
            f"f(alpha1, alpha3) = 1 + alpha1 - sqrt(alpha3^2+1) = "
            f"{f_value:.3g} > 0")
    if t > 2 + tol:
        raise DomainError(
            "gamma^2 - alpha1^2/gamma^2 <= 2 violated, i.e. "
            "alpha1 < sqrt(alpha3 (alpha3 - 2))")
    s = 0.5 * math.sqrt(2 * min(max(t, 0.0), 2.0))
    theta = math.asin(min(s, 1.0))
    phi = math.atan2(a3 / g2 * math.sin(theta), a1 / g2 * math.cos(theta))
    nu = 2 * (g2 + a3 ** 2 / g2)
    return BranchZeroSolution(g2, nu, theta, phi, f_value)


def quantum_value_branch0(params: FunctionalParams) -> Tuple[float, str]:
    """Quantum value for ``alpha2 = 0`` and the regime that produced it.

    Returns
    -------
    value : float
    regime : {"nu", "local_4(alpha1+1)", "local_4alpha3", "alpha3_zero"}

    Examples
    --------
    >>> quantum_value_branch0(FunctionalParams(0, 0, 1))
    (5.0, 'nu')
    """
    _require_branch(params, 0)
    a1, a3 = params.alpha1, params.alpha3
    if a3 == 0:
        return local_value_closed(params), "alpha3_zero"
    lo, hi = region_bounds_branch0(a3)
    if a1 > hi:
        return 4 * (a1 + 1), "local_4(alpha1+1)"
    if a1 < lo:
        return 4 * a3, "local_4alpha3"
    g2 = 0.5 * (a3 ** 2 - a1 ** 2)
    return 2 * (g2 + a3 ** 2 / g2), "nu"


def _branch0_observables(theta: float, mu: float):
    c, s = math.cos(theta), math.sin(theta)
    rot = math.cos(mu) * PAULI_X - math.sin(mu) * PAULI_Y
    A = (c * PAULI_Z + s * PAULI_X,
         c * PAULI_Z - s * PAULI_X,
         math.cos(mu) * PAULI_X + math.sin(mu) * PAULI_Y)
    B = (c * PAULI_Z + s * rot,
         c * PAULI_Z - s * rot,
         PAULI_X)
    return A, B


def _schmidt_state(phi: float) -> np.ndarray:
    psi = np.zeros(4, dtype=complex)
    psi[0] = math.cos(phi / 2)
    psi[3] = math.sin(phi / 2)
    return psi


def optimal_realization_branch0(params: FunctionalParams, mu: float = 0.0
                                ) -> Realization:
    """Two-qubit realization attaining ``nu``.

    The state is ``cos(phi/2)|00> + sin(phi/2)|11>``. Alice measures
    ``A1,2 = cos(theta) Z +- sin(theta) X`` and
    ``A3 = cos(mu) X + sin(mu) Y``; Bob measures
    ``B1,2 = cos(theta) Z +- sin(theta) (cos(mu) X - sin(mu) Y)`` and
    ``B3 = X``. ``mu = 0`` gives ``A_x = B_x``.

    Raises
    ------
    DomainError
        Outside the region where ``nu`` is attained; the message names the
        violated inequality.
    """
    sol = branch0_solution(params)
    A, B = _branch0_observables(sol.theta, mu)
    return Realization(A, B, _schmidt_state(sol.phi))


def probability_point(params: FunctionalParams, mu: float = 0.0) -> Behavior:
    """Behavior of :func:`optimal_realization_branch0` in closed form.

    ``<A1> = <A2> = <B1> = <B2> = cos(theta) cos(phi)``, third marginals 0,
    ``<A1B1> = <A2B2> = cos^2(theta) + sin^2(theta) sin(phi) cos(mu)``,
    ``<A1B2> = <A2B1> = cos^2(theta) - sin^2(theta) sin(phi) cos(mu)``,
    ``<A3B1> = -<A3B2> = <A1B3> = -<A2B3> = sin(theta) sin(phi)`` and
    ``<A3B3> = cos(mu) sin(phi)``.

    The points are affine in ``cos(mu)``; the family is the segment between
    ``mu = 0`` and ``mu = pi``.
    """
    sol = branch0_solution(params)
    ct, st = math.cos(sol.theta), math.sin(sol.theta)
    cp, sp_ = math.cos(sol.phi), math.sin(sol.phi)
    cm = math.cos(mu)
    m = ct * cp
    d = ct * ct + st * st * sp_ * cm
    o = ct * ct - st * st * sp_ * cm
    x = st * sp_
    corr = np.array([[d, o, x],
                     [o, d, -x],
                     [x, -x, cm * sp_]])
    return Behavior([m, m, 0.0], [m, m, 0.0], corr)


# ---------------------------------------------------------------------------
# sum of squares

def sos_polynomials(params: FunctionalParams, A, B):
    """The three polynomials ``P1, P2, P3`` as matrices.

    ``P3`` carries ``-`` for ``alpha2 = 0`` and ``+`` for ``alpha2 = 1``
    (where ``W`` is the flipped operator of :func:`bell_operator`).
    """
    a1, a3 = params.alpha1, params.alpha3
    g2 = 0.5 * (a3 ** 2 - a1 ** 2)
    if g2 <= 0:
        raise DomainError("sum-of-squares decomposition requires "
                          "alpha1 < alpha3")
    g = math.sqrt(g2)
    dA, dB = A[0].shape[0], B[0].shape[0]
    IA, IB = np.eye(dA), np.eye(dB)
    I = np.eye(dA * dB)
    Ap, Am = A[0] + A[1], A[0] - A[1]
    Bp, Bm = B[0] + B[1], B[0] - B[1]
    P1 = (a1 * np.kron(Ap, IB) + a3 * np.kron(Am, B[2]) - 2 * g2 * I) / (2 * g)
    P2 = (a1 * np.kron(IA, Bp) + a3 * np.kron(A[2], Bm) - 2 * g2 * I) / (2 * g)
    sign = 1.0 if params.alpha2 == 1 else -1.0
    P3 = (np.kron(Ap, IB) + sign * np.kron(IA, Bp)) / math.sqrt(2)
    return P1, P2, P3


def _sos_nu(params):
    a1, a3 = params.alpha1, params.alpha3
    g2 = 0.5 * (a3 ** 2 - a1 ** 2)
    return 2 * (g2 + a3 ** 2 / g2)


def sos_residual(params: FunctionalParams, r: Realization) -> float:
    """Frobenius norm of ``nu 1 - W - sum_i P_i^2``.

    ``W`` is the operator of :func:`bell_operator` (the flipped form for
    ``alpha2 = 1``). The identity is algebraic, so the residual vanishes for
    any projective ``r``.

    Raises
    ------
    DomainError
        If ``r`` is not projective or ``alpha1 >= alpha3``.
    """
    if not r.projective:
        raise DomainError("sum-of-squares identity needs projective "
                          "observables (A_x^2 = B_y^2 = 1)")
    P = sos_polynomials(params, r.A, r.B)
    W = bell_operator(params, r, flipped=params.alpha2 == 1)
    R = _sos_nu(params) * np.eye(W.shape[0]) - W - sum(p @ p for p in P)
    return float(np.linalg.norm(R))


@dataclass
class StructuralReport:
    """Residuals of the structural relations, each to be < ``tol``."""

    residuals: Dict[str, float] = field(default_factory=dict)
    tol: float = 1e-8

    @property
    def failures(self):
        return [k for k, v in self.residuals.items() if not v < self.tol]

    @property
    def ok(self) -> bool:
        return not self.failures


def structural_checks(params: FunctionalParams, r: Realization,
                      tol: float = 1e-8) -> StructuralReport:
    """Check the relations an optimal ``alpha2 = 0`` realization obeys.

    Reported entries (spectral norms):

    * ``anticomm_A12``: ``{A1, A2} - 2 (1 - gamma^2 + alpha1^2/gamma^2) 1``,
      ``anticomm_B12`` likewise;
    * ``anticomm_A3``: ``{A1 + A2, A3}``, ``anticomm_B3``: ``{B1 + B2, B3}``;
    * ``projective``: largest ``||O^2 - 1||``;
    * ``eigenvector``: ``||W psi - beta_Q psi||``;
    * ``sum_eigenvector``: ``||(A1+A2)(B1+B2) psi - 4 cos^2(theta) psi||``,
      i.e. ``psi`` is a ``+1`` eigenvector of the normalized operator.
    """
    a1, a3 = params.alpha1, params.alpha3
    g2 = 0.5 * (a3 ** 2 - a1 ** 2)
    rep = StructuralReport(tol=tol)
    k = 2 * (1 - g2 + a1 ** 2 / g2)
    IA, IB = np.eye(r.dA), np.eye(r.dB)
    A, B = r.A, r.B
    nrm = lambda M: float(np.linalg.norm(M, 2))
    rep.residuals["anticomm_A12"] = nrm(A[0] @ A[1] + A[1] @ A[0] - k * IA)
    rep.residuals["anticomm_B12"] = nrm(B[0] @ B[1] + B[1] @ B[0] - k * IB)
    Ap, Bp = A[0] + A[1], B[0] + B[1]
    rep.residuals["anticomm_A3"] = nrm(Ap @ A[2] + A[2] @ Ap)
    rep.residuals["anticomm_B3"] = nrm(Bp @ B[2] + B[2] @ Bp)
    rep.residuals["projective"] = max(
        [nrm(o @ o - IA) for o in A] + [nrm(o @ o - IB) for o in B])
    if not r.mixed:
        psi = r.state
        W = bell_operator(params, r)
        bQ, _ = quantum_value_branch0(params)
        rep.residuals["eigenvector"] = float(np.linalg.norm(W @ psi - bQ * psi))
        cos2 = 1 - 0.5 * (g2 - a1 ** 2 / g2)   # cos^2(theta)
        rep.residuals["sum_eigenvector"] = float(np.linalg.norm(
            np.kron(Ap, Bp) @ psi - 4 * cos2 * psi))
    return rep


# ---------------------------------------------------------------------------
# alpha2 = 1 constructions

def trivial_measurement_bracket(params: FunctionalParams, phi):
    """``(a1+a3)/2 + (a1-a3)/2 cos(phi) + sqrt([(a1-1)cos(phi)-1]^2
    + a3^2 sin^2(phi))``; the two-qubit value of the trivial-measurement
    construction is twice its maximum over ``phi``."""
    a1, a3 = params.alpha1, params.alpha3
    c, s = np.cos(phi), np.sin(phi)
    return (0.5 * (a1 + a3) + 0.5 * (a1 - a3) * c
            + np.sqrt(((a1 - 1) * c - 1) ** 2 + a3 ** 2 * s ** 2))


def _bracket_derivatives(params, phi):
    a1, a3 = params.alpha1, params.alpha3
    c, s = math.cos(phi), math.sin(phi)
    u = (a1 - 1) * c - 1
    q = u * u + a3 * a3 * s * s
    r = math.sqrt(q)
    # dq/dphi and d2q/dphi2
    dq = -2 * u * (a1 - 1) * s + 2 * a3 * a3 * s * c
    d2q = (2 * (a1 - 1) ** 2 * s * s - 2 * u * (a1 - 1) * c
           + 2 * a3 * a3 * (c * c - s * s))
    d1 = -0.5 * (a1 - a3) * s + dq / (2 * r)
    d2 = -0.5 * (a1 - a3) * c + d2q / (2 * r) - dq * dq / (4 * r ** 3)
    return d1, d2


def trivial_measurement_realization(params: FunctionalParams, phi: float,
                                    theta: Optional[float] = None
                                    ) -> Realization:
    """Two-qubit realization with one trivial measurement per party.

    ``A1 = 1, A2 = Z, A3 = X`` and ``B1,2 = cos(theta) Z +- sin(theta) X``,
    ``B3 = 1`` on ``cos(phi/2)|00> + sin(phi/2)|11>``. With ``theta=None``
    the angle maximizing the value at this ``phi`` is used (the value is
    of the form ``c + a cos(theta) + b sin(theta)``).
    """
    def build(t):
        A = (_I2, PAULI_Z, PAULI_X)
        B = (math.cos(t) * PAULI_Z + math.sin(t) * PAULI_X,
             math.cos(t) * PAULI_Z - math.sin(t) * PAULI_X, _I2)
        return Realization(A, B, _schmidt_state(phi))

    if theta is None:
        v0 = evaluate(params, build(0.0).behavior())
        vpi = evaluate(params, build(math.pi).behavior())
        vh = evaluate(params, build(0.5 * math.pi).behavior())
        c0 = 0.5 * (v0 + vpi)
        theta = math.atan2(vh - c0, v0 - c0)
    return build(theta)


def trivial_measurement_value(params: FunctionalParams, grid: int = 2001,
                              tol: float = 1e-10
                              ) -> Tuple[float, float, Realization]:
    """Maximize the trivial-measurement construction over ``phi in [0, pi]``.

    A grid scan brackets the maximum, golden-section search refines it and
    Newton's method polishes until ``|d/dphi| < tol`` (interior maxima).

    Returns
    -------
    value : float
        ``2 max_phi bracket(phi)``.
    phi_opt : float
    realization : Realization
        The explicit realization at ``(theta_opt, phi_opt)``; its value
        matches ``value`` to about 1e-9.
    """
    _require_branch(params, 1)
    phis = np.linspace(0.0, math.pi, grid)
    vals = trivial_measurement_bracket(params, phis)
    k = int(np.argmax(vals))
    lo = phis[max(k - 1, 0)]
    hi = phis[min(k + 1, grid - 1)]
    phi, _ = golden_section_max(
        lambda p: float(trivial_measurement_bracket(params, p)), lo, hi,
        tol=1e-12)
    if 0.0 < phi < math.pi:
        for _ in range(50):
            d1, d2 = _bracket_derivatives(params, phi)
            if abs(d1) < tol or d2 >= 0:
                break
            step = d1 / d2
            new = min(max(phi - step, 0.0), math.pi)
            if (trivial_measurement_bracket(params, new)
                    < trivial_measurement_bracket(params, phi) - 1e-15):
                break
            phi = new
    value = 2 * float(trivial_measurement_bracket(params, phi))
    return value, float(phi), trivial_measurement_realization(params, phi)


def triangular_region_realization(params: FunctionalParams) -> Realization:
    """Maximally entangled realization with value ``4 + alpha3^2``.

    ``A_x = B_x`` with ``A1,2 = cos(theta) Z +- sin(theta) X``, ``A3 = X``
    and ``sin(theta) = alpha3 / 2``.

    Raises
    ------
    DomainError
        Unless ``alpha2 = 1`` and ``alpha1 + alpha3 <= 2``.
    """
    _require_branch(params, 1)
    if params.alpha1 + params.alpha3 > 2 + 1e-12:
        raise DomainError("triangular region requires alpha1 + alpha3 <= 2")
    s = 0.5 * params.alpha3
    c = math.sqrt(max(0.0, 1 - s * s))
    ops = (c * PAULI_Z + s * PAULI_X, c * PAULI_Z - s * PAULI_X, PAULI_X)
    psi = np.array([1, 0, 0, 1], dtype=complex) / math.sqrt(2)
    return Realization(ops, ops, psi)
