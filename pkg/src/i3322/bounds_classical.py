"""
Local (deterministic) and no-signalling values of the family.

Each value has a closed form and an independent oracle: exhaustive search
over the 64 deterministic strategies for the local value, and a linear
program over the no-signalling polytope for the no-signalling value.
"""
from __future__ import annotations

import itertools
from fractions import Fraction
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .functional import (OUTCOMES, FunctionalParams, coefficients,
                         deterministic_behavior)
from .optim.lp import LinearProgram, solve_lp

__all__ = ["DeterministicStrategy", "RegionLabel", "STRICT_TOL",
           "all_strategies", "local_value_enum", "local_value_closed",
           "ns_value_lp", "ns_value_closed", "ns_lp", "classify_region"]

STRICT_TOL = 1e-9
"""Threshold for calling one value strictly larger than another."""


@dataclass(frozen=True)
class DeterministicStrategy:
    """Outcomes ``a[x]`` and ``b[y]`` in ``{+1, -1}``."""

    a: Tuple[int, int, int]
    b: Tuple[int, int, int]

    def behavior(self):
        return deterministic_behavior(self.a, self.b)


def all_strategies():
    """The 64 deterministic strategies in lexicographic order of ``(a, b)``,
    with ``+1`` ordered before ``-1``."""
    for a in itertools.product(OUTCOMES, repeat=3):
        for b in itertools.product(OUTCOMES, repeat=3):
            yield DeterministicStrategy(a, b)


def _exact_strategy_value(c, s: DeterministicStrategy) -> Fraction:
    """Value of ``s`` in exact rational arithmetic on the float
    coefficients (deterministic correlators factorize)."""
    a, b = s.a, s.b
    v = Fraction(c.const)
    for x in range(3):
        v += Fraction(c.margA[x]) * a[x] + Fraction(c.margB[x]) * b[x]
        for y in range(3):
            v += Fraction(c.corr[x, y]) * (a[x] * b[y])
    return v


def local_value_enum(params: FunctionalParams
                     ) -> Tuple[float, DeterministicStrategy]:
    """Local value by enumeration, with the first maximizing strategy.

    Strategies are compared exactly (rational arithmetic on the float
    inputs) and the maximum is rounded once, so the result is the
    correctly rounded local value.

    Examples
    --------
    >>> local_value_enum(FunctionalParams(1, 0, 1))[0]
    8.0
    """
    c = coefficients(params)
    best, arg = None, None
    for s in all_strategies():
        v = _exact_strategy_value(c, s)
        if best is None or v > best:
            best, arg = v, s
    return float(best), arg


def _local_pieces_alpha2_1(a1: float, a3: float):
    return [4 * (a1 - 1), 4 * a3, 2 * (a1 + a3), 4.0]


def local_value_closed(params: FunctionalParams) -> float:
    """Closed-form local value.

    ``alpha2 = 0``: ``4 alpha3`` if ``alpha1 <= alpha3 - 1`` and
    ``4 (alpha1 + 1)`` otherwise. ``alpha2 = 1``:
    ``max{4(alpha1 - 1), 4 alpha3, 2(alpha1 + alpha3), 4}``.
    """
    a1, a3 = params.alpha1, params.alpha3
    if params.alpha2 == 0:
        return float(max(4 * a3, 4 * (a1 + 1)))
    return float(max(_local_pieces_alpha2_1(a1, a3)))


def ns_value_closed(params: FunctionalParams) -> float:
    """Closed-form no-signalling value.

    ``alpha2 = 0``: ``4 (alpha1 + 1)`` if ``alpha1 >= alpha3`` and
    ``4 (alpha3 + 1)`` otherwise. ``alpha2 = 1``:
    ``max{beta_L, 4 (1 + alpha3)}``.
    """
    a1, a3 = params.alpha1, params.alpha3
    if params.alpha2 == 0:
        return 4 * (a1 + 1) if a1 >= a3 else 4 * (a3 + 1)
    return max(local_value_closed(params), 4 * (1 + a3))


def ns_lp(params) -> LinearProgram:
    """The no-signalling LP over the 36 probabilities ``p(ab|xy)``.

    Variables are ordered as ``p[a, b, x, y]`` flattened in C order, with
    nine normalization rows and 24 no-signalling rows (some redundant). The
    constant term of the functional is not included.
    """
    c = coefficients(params) if isinstance(params, FunctionalParams) else params
    s = np.array(OUTCOMES, dtype=float)
    obj = np.zeros((2, 2, 3, 3))
    # marginals are read off setting 0 of the other party (no-signalling)
    obj[:, :, :, 0] += (s[:, None] * np.ones(2)[None, :])[:, :, None] * c.margA
    obj[:, :, 0, :] += (np.ones(2)[:, None] * s[None, :])[:, :, None] * c.margB
    obj += np.einsum("a,b,xy->abxy", s, s, c.corr)
    rows, rhs = [], []
    for x in range(3):
        for y in range(3):
            r = np.zeros((2, 2, 3, 3))
            r[:, :, x, y] = 1
            rows.append(r.ravel())
            rhs.append(1.0)
    for a in range(2):
        for x in range(3):
            for y in (1, 2):
                r = np.zeros((2, 2, 3, 3))
                r[a, :, x, y] = 1
                r[a, :, x, 0] -= 1
                rows.append(r.ravel())
                rhs.append(0.0)
    for b in range(2):
        for y in range(3):
            for x in (1, 2):
                r = np.zeros((2, 2, 3, 3))
                r[:, b, x, y] = 1
                r[:, b, 0, y] -= 1
                rows.append(r.ravel())
                rhs.append(0.0)
    return LinearProgram(obj.ravel(), np.array(rows), np.array(rhs),
                         lb=0.0, ub=1.0)


def ns_value_lp(params: FunctionalParams, perturb: Optional[np.ndarray] = None
                ) -> float:
    """No-signalling value from the LP, solved by the in-repo simplex.

    Parameters
    ----------
    perturb : ndarray, shape (36,), optional
        Added to the LP objective; used to probe vertex optimality.
    """
    lp = ns_lp(params)
    const = coefficients(params).const
    if perturb is not None:
        lp.c = lp.c + np.asarray(perturb, dtype=float)
    res = solve_lp(lp)
    if res.duality_gap > 1e-9 or res.primal_residual > 1e-10:
        raise RuntimeError(
            f"NS LP inaccurate: gap {res.duality_gap:.2e}, "
            f"residual {res.primal_residual:.2e}")
    return const + res.value


@dataclass(frozen=True)
class RegionLabel:
    """Which closed-form pieces are active at a parameter point.

    Attributes
    ----------
    local : str
        ``"L_eq_4alpha3"`` or ``"L_eq_4(alpha1+1)"`` for ``alpha2 = 0``;
        ``"L_alpha2_1_case(k)"`` for ``alpha2 = 1`` where ``k`` indexes the
        first maximal entry of ``[4(a1-1), 4 a3, 2(a1+a3), 4]``.
    ns : str
        ``"NS_gt_L"`` or ``"NS_eq_L"``.
    quantum : str or None
        ``"Q_gt_L"`` or ``"Q_eq_L"`` where the quantum value is known in
        closed form (``alpha2 = 0``), else ``None``.
    """

    local: str
    ns: str
    quantum: Optional[str] = None

    @property
    def tags(self):
        return tuple(t for t in (self.local, self.ns, self.quantum) if t)


def classify_region(params: FunctionalParams) -> RegionLabel:
    """Label the region of ``params``; strict comparisons use ``STRICT_TOL``.

    Examples
    --------
    >>> classify_region(FunctionalParams(4, 1, 1)).ns
    'NS_eq_L'
    """
    a1, a3 = params.alpha1, params.alpha3
    bL = local_value_closed(params)
    if params.alpha2 == 0:
        local = "L_eq_4alpha3" if a1 < a3 - 1 else "L_eq_4(alpha1+1)"
    else:
        pieces = _local_pieces_alpha2_1(a1, a3)
        k = int(np.argmax(pieces))
        local = f"L_alpha2_1_case({k})"
    ns = "NS_gt_L" if ns_value_closed(params) - bL > STRICT_TOL else "NS_eq_L"
    quantum = None
    if params.alpha2 == 0:
        from .quantum_exact import quantum_value_branch0
        bQ, _ = quantum_value_branch0(params)
        quantum = "Q_gt_L" if bQ - bL > STRICT_TOL else "Q_eq_L"
    return RegionLabel(local, ns, quantum)
