"""
NPA moment-matrix relaxations for the three-setting, two-outcome scenario.

Operators are the projectors ``P_x = M^A_{1|x}`` and ``Q_y = M^B_{1|y}``.
A word is a pair ``(a, b)`` of letter tuples over ``{0, 1, 2}``; Alice's
letters precede Bob's (the parties commute), and idempotence ``P_x P_x = P_x``
removes adjacent repeats. There are no other reductions.

Moments are taken real: the objective has real coefficients and is invariant
under transposing the moment matrix, so the real part of any complex
feasible moment matrix is feasible with the same value. A word is therefore
identified with its adjoint, ``(a, b) ~ (reversed(a), reversed(b))``.

Word sets per level (sizes for this scenario):

======  =========================================  ====
level   generating words                           size
======  =========================================  ====
1       1, P_x, Q_y                                7
1+AB    level 1 plus P_x Q_y                       16
2       all words of length <= 2                   28
3       all words of length <= 3                   88
======  =========================================  ====
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np
import scipy.sparse as sp

from .functional import (BellCoefficients, FunctionalParams, coefficients,
                         projector_coefficients)
from .optim.sdp import SdpProblem, solve_sdp

__all__ = ["LEVELS", "Word", "reduce_letters", "canonical", "product",
           "generating_words", "MomentProblem", "build_moment_problem",
           "npa_value", "npa_solve", "parse_level", "npa_record",
           "advantage_region", "ADVANTAGE_COLUMNS", "ADVANTAGE_TOL"]

LEVELS = ("1", "1+AB", "2", "3")

Word = Tuple[Tuple[int, ...], Tuple[int, ...]]
IDENTITY: Word = ((), ())


def parse_level(level) -> str:
    s = str(level).strip().lower().replace(" ", "")
    aliases = {"1": "1", "1ab": "1+AB", "1+ab": "1+AB", "2": "2", "3": "3"}
    if s not in aliases:
        raise ValueError(f"unsupported NPA level {level!r}; "
                         f"choose from {LEVELS}")
    return aliases[s]


def reduce_letters(letters) -> Tuple[int, ...]:
    """Collapse runs of equal letters (projector idempotence)."""
    return tuple(k for k, _ in itertools.groupby(letters))


def canonical(w: Word) -> Word:
    """Representative of ``w`` under identification with its adjoint."""
    a, b = reduce_letters(w[0]), reduce_letters(w[1])
    return min((a, b), (a[::-1], b[::-1]))


def product(u: Word, v: Word) -> Word:
    """Canonical form of ``u^dagger v``."""
    return canonical((u[0][::-1] + v[0], u[1][::-1] + v[1]))


def _party_words(max_len: int) -> List[Tuple[int, ...]]:
    out = [()]
    for n in range(1, max_len + 1):
        for w in itertools.product(range(3), repeat=n):
            if all(w[i] != w[i + 1] for i in range(n - 1)):
                out.append(w)
    return out


def generating_words(level) -> List[Word]:
    """Index set of the moment matrix, ordered by length then lexically."""
    level = parse_level(level)
    if level == "1":
        max_len, extra = 1, []
    elif level == "1+AB":
        max_len = 1
        extra = [((x,), (y,)) for x in range(3) for y in range(3)]
    else:
        max_len, extra = int(level), []
    pw = _party_words(max_len)
    words = [(a, b) for a in pw for b in pw if len(a) + len(b) <= max_len]
    words += extra
    words.sort(key=lambda w: (len(w[0]) + len(w[1]), -len(w[0]), w))
    return words


@dataclass
class MomentProblem:
    """A moment matrix relaxation of one functional at one level.

    Attributes
    ----------
    level : str
    words : list of Word
        Moment-matrix index set.
    index : dict
        Canonical word -> variable id; the identity is not a variable.
    variables : list of Word
        Inverse of ``index``.
    entry_var : ndarray of int, shape (m, m)
        Variable id of each moment-matrix entry, ``-1`` for the identity.
    objective : ndarray, shape (K,)
        Coefficient of each variable in the functional.
    offset : float
        Constant part of the functional.
    """

    level: str
    words: List[Word]
    index: Dict[Word, int]
    variables: List[Word]
    entry_var: np.ndarray
    objective: np.ndarray
    offset: float

    @property
    def m(self) -> int:
        return len(self.words)

    @property
    def K(self) -> int:
        return len(self.variables)

    def sdp(self) -> SdpProblem:
        m = self.m
        ev = self.entry_var.reshape(-1)
        M0 = (self.entry_var == -1).astype(float)
        rows = np.nonzero(ev >= 0)[0]
        F = sp.csc_matrix((np.ones(rows.size), (rows, ev[rows])),
                          shape=(m * m, self.K))
        return SdpProblem(M0, F, self.objective)

    def moment_matrix(self, y: np.ndarray) -> np.ndarray:
        vals = np.concatenate([np.asarray(y, dtype=float), [1.0]])
        return vals[self.entry_var]

    def moments_of(self, P, Q, state) -> np.ndarray:
        """Variable values for projectors ``P``, ``Q`` and a pure state.

        Used to check that a quantum realization is feasible for the
        relaxation.
        """
        dA, dB = P[0].shape[0], Q[0].shape[0]
        psi = np.asarray(state).reshape(dA, dB)
        y = np.empty(self.K)
        for k, (a, b) in enumerate(self.variables):
            opA = np.eye(dA)
            for x in a:
                opA = opA @ P[x]
            opB = np.eye(dB)
            for yy in b:
                opB = opB @ Q[yy]
            y[k] = np.real(np.vdot(psi, opA @ psi @ opB.T))
        return y


def build_moment_problem(f, level) -> MomentProblem:
    """Moment problem maximizing the functional ``f`` at ``level``.

    ``f`` is :class:`FunctionalParams` or :class:`BellCoefficients` in the
    +/-1 convention; it is rewritten on projectors internally.
    """
    level = parse_level(level)
    c = coefficients(f) if isinstance(f, FunctionalParams) else f
    if not isinstance(c, BellCoefficients):
        raise TypeError("expected FunctionalParams or BellCoefficients")
    words = generating_words(level)
    m = len(words)
    index: Dict[Word, int] = {}
    variables: List[Word] = []
    entry_var = np.empty((m, m), dtype=int)
    for i, u in enumerate(words):
        for j in range(i, m):
            w = product(u, words[j])
            if w == IDENTITY:
                k = -1
            else:
                k = index.get(w)
                if k is None:
                    k = index[w] = len(variables)
                    variables.append(w)
            entry_var[i, j] = entry_var[j, i] = k
    pf = projector_coefficients(c)
    obj = np.zeros(len(variables))
    for x in range(3):
        obj[index[((x,), ())]] += pf.pA[x]
        obj[index[((), (x,))]] += pf.pB[x]
        for y in range(3):
            obj[index[((x,), (y,))]] += pf.pAB[x, y]
    return MomentProblem(level, words, index, variables, entry_var, obj,
                         pf.const)


def npa_solve(f, level, tol: float = 1e-9, max_iter: int = 100):
    """Build and solve; returns ``(problem, SdpResult)``."""
    mp = build_moment_problem(f, level)
    res = solve_sdp(mp.sdp(), tol=tol, max_iter=max_iter)
    return mp, res


def npa_value(f, level, tol: float = 1e-9) -> float:
    """NPA upper bound on the quantum value of ``f`` at ``level``.

    Returns the dual objective (the certified side) plus the constant term.
    """
    mp, res = npa_solve(f, level, tol=tol)
    return mp.offset + res.bound


ADVANTAGE_TOL = 1e-6
ADVANTAGE_COLUMNS = ("alpha1", "alpha3", "alpha2", "level", "beta_npa",
                     "beta_L", "advantage_flag", "solver_gap")


def npa_record(params: FunctionalParams, level) -> dict:
    """One row of :func:`advantage_region` for a single node."""
    from .bounds_classical import local_value_closed
    level = parse_level(level)
    bL = local_value_closed(params)
    row = {"alpha1": params.alpha1, "alpha3": params.alpha3,
           "alpha2": params.alpha2, "level": level, "beta_L": bL}
    try:
        mp, res = npa_solve(params, level)
        bound = mp.offset + res.bound
        row.update(beta_npa=bound, solver_gap=res.gap,
                   advantage_flag=bool(bound - bL > ADVANTAGE_TOL), error="")
    except Exception as exc:  # recorded, the sweep continues
        row.update(beta_npa=None, solver_gap=None, advantage_flag=None,
                   error=f"{type(exc).__name__}: {exc}")
    return row


def advantage_region(level, grid=None):
    """Nodes where the NPA bound exceeds the local value by more than 1e-6.

    Parameters
    ----------
    level : level tag
    grid : Grid, optional
        Defaults to the full 0.025-step ``alpha2 = 1`` grid (13041 nodes).

    Yields
    ------
    dict
        Rows with keys :data:`ADVANTAGE_COLUMNS` plus ``error``; solver
        failures leave the numeric fields empty and fill ``error``.
    """
    from .grid import DEFAULT_GRID
    grid = DEFAULT_GRID if grid is None else grid
    for _, _, p in grid.nodes():
        yield npa_record(p, level)
