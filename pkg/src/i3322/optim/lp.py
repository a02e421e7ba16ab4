"""
Dense two-phase simplex method with Bland's anti-cycling rule.

Intended for small linear programs (tens of variables), where a full
tableau is cheap and exact pivoting keeps the optimum at a vertex.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

__all__ = ["LinearProgram", "LpResult", "LpError", "solve_lp"]

PIVOT_TOL = 1e-11
FEAS_TOL = 1e-9


class LpError(RuntimeError):
    """Raised for infeasible or unbounded programs.

    Attributes
    ----------
    status : {"infeasible", "unbounded", "max_iter"}
    """

    def __init__(self, status: str, msg: str):
        super().__init__(msg)
        self.status = status


@dataclass
class LinearProgram:
    """``maximize c^T x`` subject to ``A_eq x = b_eq`` and ``lb <= x <= ub``.

    Parameters
    ----------
    c : array_like, shape (n,)
    A_eq : array_like, shape (k, n)
    b_eq : array_like, shape (k,)
    lb, ub : array_like, shape (n,), optional
        Box bounds; ``lb`` defaults to 0 and ``ub`` to ``+inf``. Lower
        bounds must be finite.
    """

    c: np.ndarray
    A_eq: np.ndarray
    b_eq: np.ndarray
    lb: Optional[np.ndarray] = None
    ub: Optional[np.ndarray] = None

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).reshape(-1)
        n = self.c.size
        self.A_eq = np.asarray(self.A_eq, dtype=float).reshape(-1, n)
        self.b_eq = np.asarray(self.b_eq, dtype=float).reshape(-1)
        if self.b_eq.size != self.A_eq.shape[0]:
            raise ValueError("A_eq and b_eq have inconsistent shapes")
        self.lb = (np.zeros(n) if self.lb is None
                   else np.broadcast_to(np.asarray(self.lb, float), (n,)).copy())
        self.ub = (np.full(n, np.inf) if self.ub is None
                   else np.broadcast_to(np.asarray(self.ub, float), (n,)).copy())
        for arr in (self.c, self.A_eq, self.b_eq, self.lb):
            if not np.all(np.isfinite(arr)):
                raise ValueError("LP data and lower bounds must be finite")
        if np.any(self.ub < self.lb):
            raise ValueError("empty box: ub < lb")

    @property
    def n(self) -> int:
        return self.c.size


@dataclass
class LpResult:
    value: float
    x: np.ndarray
    dual: np.ndarray
    primal_residual: float
    duality_gap: float
    pivots: int
    objective_trace: list


def _pivot(T, r, j):
    T[r] /= T[r, j]
    col = T[:, j].copy()
    col[r] = 0.0
    T -= np.outer(col, T[r])


def _run(T, basis, allowed, max_iter, trace):
    """Maximize with the reduced costs stored (negated) in the last row.

    Bland's rule: the entering column is the lowest-index improving one; the
    leaving row is the minimum ratio, ties broken by lowest basic index.
    """
    m = T.shape[0] - 1
    for _ in range(max_iter):
        red = -T[-1, :-1]
        cand = np.nonzero((red > PIVOT_TOL) & allowed)[0]
        if cand.size == 0:
            return "optimal"
        j = cand[0]
        col = T[:m, j]
        pos = col > PIVOT_TOL
        if not np.any(pos):
            return "unbounded"
        ratios = np.full(m, np.inf)
        ratios[pos] = T[:m, -1][pos] / col[pos]
        best = ratios.min()
        ties = np.nonzero(ratios <= best + 1e-12 * max(1.0, abs(best)))[0]
        r = min(ties, key=lambda i: basis[i])
        _pivot(T, r, j)
        basis[r] = j
        trace.append(float(T[-1, -1]))
    return "max_iter"


def solve_lp(lp: LinearProgram, max_iter: int = 10_000) -> LpResult:
    """Solve ``lp`` by the two-phase tableau simplex.

    Returns
    -------
    LpResult
        ``value`` is the optimal objective and ``x`` a vertex attaining it;
        ``dual`` holds the multipliers of the equality rows.

    Raises
    ------
    LpError
        With ``status`` "infeasible" or "unbounded".

    Examples
    --------
    >>> r = solve_lp(LinearProgram([1.0], np.zeros((0, 1)), [], ub=[1.0]))
    >>> r.value
    1.0
    """
    n = lp.n
    # shift x = lb + x', add rows x'_j + s_j = ub_j - lb_j for finite ub
    finite_ub = np.nonzero(np.isfinite(lp.ub))[0]
    k, nb = lp.A_eq.shape[0], finite_ub.size
    rows = k + nb
    ncols = n + nb
    A = np.zeros((rows, ncols))
    A[:k, :n] = lp.A_eq
    b = np.empty(rows)
    b[:k] = lp.b_eq - lp.A_eq @ lp.lb
    for t, j in enumerate(finite_ub):
        A[k + t, j] = 1.0
        A[k + t, n + t] = 1.0
        b[k + t] = lp.ub[j] - lp.lb[j]
    c = np.zeros(ncols)
    c[:n] = lp.c
    sign = np.where(b < 0, -1.0, 1.0)
    A *= sign[:, None]
    b *= sign

    # phase I: artificial columns, maximize -sum(artificials)
    T = np.zeros((rows + 1, ncols + rows + 1))
    T[:rows, :ncols] = A
    T[:rows, ncols:ncols + rows] = np.eye(rows)
    T[:rows, -1] = b
    T[-1, :ncols] = -A.sum(axis=0)          # negated reduced costs
    T[-1, -1] = -b.sum()
    basis = list(range(ncols, ncols + rows))
    trace: list = []
    allowed = np.ones(ncols + rows, dtype=bool)
    status = _run(T, basis, allowed, max_iter, trace)
    if status == "max_iter":
        raise LpError("max_iter", "phase I did not terminate")
    if T[-1, -1] < -FEAS_TOL * max(1.0, np.abs(b).sum()):
        raise LpError("infeasible", "the linear program is infeasible")

    # drive artificials out of the basis; drop redundant rows
    keep = []
    for r in range(rows):
        if basis[r] >= ncols:
            nz = np.nonzero(np.abs(T[r, :ncols]) > PIVOT_TOL)[0]
            if nz.size:
                _pivot(T, r, nz[0])
                basis[r] = nz[0]
                keep.append(r)
        else:
            keep.append(r)
    T = np.vstack([T[keep][:, list(range(ncols)) + [-1]], np.zeros(ncols + 1)])
    basis = [basis[r] for r in keep]

    # phase II
    cB = c[basis]
    T[-1, :-1] = cB @ T[:-1, :-1] - c
    T[-1, -1] = cB @ T[:-1, -1]
    trace = [float(T[-1, -1])]
    status = _run(T, basis, np.ones(ncols, dtype=bool), max_iter, trace)
    if status == "unbounded":
        raise LpError("unbounded", "the linear program is unbounded")
    if status == "max_iter":
        raise LpError("max_iter", "phase II did not terminate")

    xs = np.zeros(ncols)
    xs[basis] = T[:-1, -1]
    x = lp.lb + xs[:n]
    value = float(lp.c @ x)

    # equality multipliers from the optimal basis: B^T u = c_B
    Bm = A[keep][:, basis]
    u = np.linalg.lstsq(Bm.T, c[basis], rcond=None)[0]
    u_rows = np.zeros(rows)
    u_rows[keep] = u
    u_rows *= sign
    # dual objective in the shifted problem plus the constant c^T lb
    dual_obj = (float(u_rows[:k] @ (lp.b_eq - lp.A_eq @ lp.lb))
                + float(u_rows[k:] @ (lp.ub[finite_ub] - lp.lb[finite_ub]))
                + float(lp.c @ lp.lb))
    resid = lp.A_eq @ x - lp.b_eq
    box = np.maximum(lp.lb - x, 0) + np.maximum(x - lp.ub, 0)
    presid = float(np.linalg.norm(np.concatenate([resid, box]), np.inf)
                   ) if x.size else 0.0
    return LpResult(value=value, x=x, dual=u_rows[:k], pivots=len(trace) - 1,
                    primal_residual=presid, duality_gap=abs(dual_obj - value),
                    objective_trace=trace)
