"""
See-saw maximization of a Bell functional at fixed local dimension.

Each round alternates three exact partial maximizations, so the value never
decreases within a trial:

1. every ``A_x`` becomes ``sign(Y_x)``, where ``Y_x = Tr_B[(1 x C_x) rho]``
   and ``C_x`` collects all terms of the Bell operator multiplying ``A_x``;
2. the same for every ``B_y``;
3. the state becomes a top eigenvector of the Bell operator.

Initial observables are signs of random Hermitian matrices and the initial
state is Haar random; the best value over many seeded trials is returned.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Union

import numpy as np

from .functional import BellCoefficients, FunctionalParams, coefficients
from .realization import (Realization, bell_operator, haar_state,
                          random_projective_observable)

__all__ = ["SeesawConfig", "SeesawResult", "seesaw", "sign_update",
           "gap_report", "GAP_TOL"]

log = logging.getLogger(__name__)

GAP_TOL = 1e-6
"""Gap below which the two-qubit value is taken to reach the NPA bound."""

ZERO_EIG = 1e-12


@dataclass(frozen=True)
class SeesawConfig:
    """Settings for :func:`seesaw`.

    Attributes
    ----------
    dA, dB : int
        Local dimensions.
    trials, iterations : int
        Number of random restarts and rounds per restart.
    seed : int
        Trial ``k`` draws from ``np.random.default_rng([seed, k])``.
    tol : float
        A trial counts as converged when its last round changed the value by
        less than this.
    stall : int
        Stop a trial after this many consecutive rounds with change below
        ``1e-12``.
    """

    dA: int = 2
    dB: int = 2
    trials: int = 150
    iterations: int = 50
    seed: int = 0
    tol: float = 1e-10
    stall: int = 3

    def __post_init__(self):
        if self.dA < 1 or self.dB < 1:
            raise ValueError("local dimensions must be >= 1")
        if self.trials < 1 or self.iterations < 1:
            raise ValueError("need at least one trial and one iteration")


@dataclass
class SeesawResult:
    value: float
    realization: Realization
    trial: int
    converged: bool
    trial_values: np.ndarray
    history: List[float] = field(default_factory=list)


def sign_update(Y: np.ndarray) -> np.ndarray:
    """``sign(Y)`` of a Hermitian matrix; near-zero eigenvalues map to +1."""
    w, v = np.linalg.eigh(0.5 * (Y + Y.conj().T))
    s = np.where(w < -ZERO_EIG, -1.0, 1.0)
    return (v * s) @ v.conj().T


def _update_A(c: BellCoefficients, A, B, Psi):
    dB = B[0].shape[0]
    out = []
    for x in range(3):
        C = c.margA[x] * np.eye(dB) + sum(c.corr[x, y] * B[y] for y in range(3))
        # <psi| A x C |psi> = Tr(A Psi C^T Psi^dagger)
        Y = Psi @ C.T @ Psi.conj().T
        out.append(sign_update(Y))
    return tuple(out)


def _update_B(c: BellCoefficients, A, B, Psi):
    dA = A[0].shape[0]
    out = []
    for y in range(3):
        D = c.margB[y] * np.eye(dA) + sum(c.corr[x, y] * A[x] for x in range(3))
        # <psi| D x B |psi> = Tr(B (Psi^dagger D Psi)^T)
        Y = (Psi.conj().T @ D @ Psi).T
        out.append(sign_update(Y))
    return tuple(out)


def _expect(W, psi):
    return float(np.real(np.vdot(psi, W @ psi)))


def _trial(c: BellCoefficients, cfg: SeesawConfig, k: int):
    rng = np.random.default_rng([cfg.seed, k])
    A = tuple(random_projective_observable(cfg.dA, rng) for _ in range(3))
    B = tuple(random_projective_observable(cfg.dB, rng) for _ in range(3))
    psi = haar_state(cfg.dA * cfg.dB, rng)
    values = [_expect(bell_operator(c, A, B), psi)]
    stall = 0
    last_change = np.inf
    for _ in range(cfg.iterations):
        start = values[-1]
        Psi = psi.reshape(cfg.dA, cfg.dB)
        A = _update_A(c, A, B, Psi)
        values.append(_expect(bell_operator(c, A, B), psi))
        B = _update_B(c, A, B, Psi)
        W = bell_operator(c, A, B)
        values.append(_expect(W, psi))
        w, v = np.linalg.eigh(W)
        psi = v[:, -1]
        values.append(float(w[-1]))
        last_change = values[-1] - start
        stall = stall + 1 if last_change < 1e-12 else 0
        if stall >= cfg.stall:
            break
    return values[-1], Realization(A, B, psi), values, last_change < cfg.tol


def seesaw(params: Union[FunctionalParams, BellCoefficients],
           cfg: SeesawConfig = SeesawConfig()) -> SeesawResult:
    """Best see-saw value over ``cfg.trials`` random restarts.

    Ties between trials go to the lowest trial index.

    Examples
    --------
    >>> from i3322.functional import I3322
    >>> r = seesaw(I3322, SeesawConfig(trials=20, seed=1))
    >>> round(r.value, 6)
    5.0
    """
    c = coefficients(params) if isinstance(params, FunctionalParams) else params
    best = None
    vals = np.empty(cfg.trials)
    for k in range(cfg.trials):
        v, r, hist, conv = _trial(c, cfg, k)
        vals[k] = v
        if best is None or v > best[0]:
            best = (v, r, k, conv, hist)
    v, r, k, conv, hist = best
    if not conv:
        log.info("best see-saw trial %d did not converge to %.1e", k, cfg.tol)
    return SeesawResult(value=float(v + 0.0), realization=r, trial=k,
                        converged=conv, trial_values=vals, history=hist)


def gap_report(params, cfg: SeesawConfig = SeesawConfig(),
               npa_value: Union[float, Callable, None] = None,
               beta_2x2: Optional[float] = None) -> dict:
    """Compare the see-saw value with an NPA bound.

    Parameters
    ----------
    npa_value : float or callable
        The bound, or ``npa_value(params) -> float``.
    beta_2x2 : float, optional
        Use this value instead of running :func:`seesaw`.

    Returns
    -------
    dict
        ``beta_2x2``, ``beta_npa``, ``gap`` and ``flag``, which is
        ``"two-qubit-optimal"`` if ``gap < GAP_TOL`` and ``"gap-open"``
        otherwise.
    """
    if npa_value is None:
        raise ValueError("an NPA value or callable is required")
    bound = float(npa_value(params) if callable(npa_value) else npa_value)
    if beta_2x2 is None:
        beta_2x2 = seesaw(params, cfg).value
    gap = bound - beta_2x2
    flag = "two-qubit-optimal" if gap < GAP_TOL else "gap-open"
    return {"beta_2x2": float(beta_2x2), "beta_npa": bound, "gap": float(gap),
            "flag": flag}
