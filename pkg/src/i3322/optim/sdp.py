"""
Dense primal-dual interior-point method for linear matrix inequalities.

Solves

    maximize    c^T y
    subject to  Z(y) = M0 + sum_i y_i M_i  is positive semidefinite

together with its dual

    minimize    <M0, X>
    subject to  <M_i, X> = -c_i,  X positive semidefinite,

using Nesterov-Todd scaling and Mehrotra's predictor-corrector, with an
infeasible starting point. The Schur complement is dense and factored by
Cholesky; the constraint blocks only need to be sparse enough that forming
``W M_i W`` for each block is cheap.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

__all__ = ["SdpProblem", "SdpResult", "SdpError", "solve_sdp", "dump_sdp"]

log = logging.getLogger(__name__)

# a breakdown after reaching this accuracy returns the best iterate
NEAR_TOL = 1e-6


class SdpError(RuntimeError):
    """Numerical breakdown of the interior-point iteration."""

    def __init__(self, msg, iterate=None):
        super().__init__(msg)
        self.iterate = iterate


@dataclass
class SdpProblem:
    """An LMI ``M0 + sum_i y_i M_i >= 0`` with objective ``max c^T y``.

    Parameters
    ----------
    M0 : ndarray, shape (m, m)
        Constant symmetric block.
    blocks : sequence of (m, m) arrays or sparse matrices, or a sparse
        matrix of shape (m*m, K) whose column ``i`` is ``vec(M_i)``.
    c : ndarray, shape (K,)
    """

    M0: np.ndarray
    blocks: object
    c: np.ndarray
    F: sp.csc_matrix = field(init=False, repr=False)

    def __post_init__(self):
        self.M0 = np.asarray(self.M0, dtype=float)
        m = self.M0.shape[0]
        if self.M0.shape != (m, m):
            raise ValueError("M0 must be square")
        if np.max(np.abs(self.M0 - self.M0.T), initial=0) > 1e-14:
            raise ValueError("M0 must be symmetric")
        if sp.issparse(self.blocks) and self.blocks.shape[0] == m * m:
            F = sp.csc_matrix(self.blocks, dtype=float)
        else:
            cols = [sp.csr_matrix(b, dtype=float).reshape(1, m * m)
                    for b in self.blocks]
            F = sp.vstack(cols).T.tocsc()
        self.F = F
        self.c = np.asarray(self.c, dtype=float).reshape(-1)
        if F.shape[1] != self.c.size or self.c.size < 1:
            raise ValueError("need one objective coefficient per block, K >= 1")
        for i in range(F.shape[1]):
            Mi = self.block(i)
            if abs(Mi - Mi.T).max() > 1e-14:
                raise ValueError(f"block {i} is not symmetric")
        self._pattern = None

    @property
    def m(self) -> int:
        return self.M0.shape[0]

    @property
    def K(self) -> int:
        return self.c.size

    def block(self, i: int) -> sp.csr_matrix:
        col = self.F[:, i]
        return sp.csr_matrix(col.reshape(self.m, self.m))

    def Z(self, y: np.ndarray) -> np.ndarray:
        return self.M0 + (self.F @ y).reshape(self.m, self.m)

    def adjoint(self, X: np.ndarray) -> np.ndarray:
        """``(<M_i, X>)_i``."""
        return self.F.T @ X.reshape(-1)

    def entries(self):
        """Per block: row indices, column indices and values of ``M_i``."""
        if self._pattern is None:
            m = self.m
            F = self.F
            out = []
            for i in range(self.K):
                sl = slice(F.indptr[i], F.indptr[i + 1])
                idx = F.indices[sl]
                out.append((idx // m, idx % m, F.data[sl]))
            self._pattern = out
        return self._pattern


@dataclass
class SdpResult:
    """Outcome of :func:`solve_sdp`.

    ``value`` is the primal objective ``c^T y``; ``bound`` is the dual
    objective ``<M0, X>``, an upper bound whenever ``X`` is feasible.
    ``certificate`` is the dual matrix ``X``.
    """

    value: float
    bound: float
    y: np.ndarray
    Z: np.ndarray
    certificate: np.ndarray
    gap: float
    primal_infeasibility: float
    dual_infeasibility: float
    iterations: int
    converged: bool
    status: str


def _chol(M):
    return np.linalg.cholesky(0.5 * (M + M.T))


def _max_step(L, D):
    """Largest ``a`` with ``L L^T + a D`` positive semidefinite (capped)."""
    Linv_D = sla.solve_triangular(L, D, lower=True)
    S = sla.solve_triangular(L, Linv_D.T, lower=True)
    lam = np.linalg.eigvalsh(0.5 * (S + S.T))[0]
    if lam >= 0:
        return np.inf
    return -1.0 / lam


def _schur(prob: SdpProblem, W: np.ndarray) -> np.ndarray:
    """``H_ij = <M_i, W M_j W>``."""
    m, K = prob.m, prob.K
    T = np.empty((K, m * m))
    for j, (r, cidx, v) in enumerate(prob.entries()):
        T[j] = ((W[:, r] * v) @ W[cidx, :]).reshape(-1)
    H = prob.F.T @ T.T
    H = np.asarray(H)
    return 0.5 * (H + H.T)


def _apply_W(prob, W, dy):
    """``W (sum_j dy_j M_j) W``."""
    S = (prob.F @ dy).reshape(prob.m, prob.m)
    return W @ S @ W


def solve_sdp(prob: SdpProblem, tol: float = 1e-9, max_iter: int = 100,
              verbose: bool = False, refine: int = 2) -> SdpResult:
    """Maximize ``c^T y`` subject to ``M0 + sum y_i M_i >= 0``.

    Stops when the relative duality gap and both relative infeasibilities
    drop below ``tol``. On iteration exhaustion, or on a numerical breakdown
    once every measure is below ``NEAR_TOL``, the best iterate seen is
    returned with ``converged=False`` (status ``"max_iter"`` or
    ``"numerical"``).

    Raises
    ------
    SdpError
        If the Schur complement or an iterate loses positive definiteness
        before the iterate is near optimal.
    """
    m, K = prob.m, prob.K
    # standard form: min <C,X> s.t. <A_i,X> = b_i with C = M0, A_i = -M_i
    b = prob.c
    C = prob.M0
    nC = max(1.0, np.linalg.norm(C))
    nb = max(1.0, np.linalg.norm(b))
    Fnorms = np.sqrt(np.asarray(prob.F.multiply(prob.F).sum(axis=0))).ravel()
    xi = max(10.0, np.sqrt(m), m * np.max((1 + np.abs(b)) / (1 + Fnorms)))
    eta = max(10.0, np.sqrt(m), np.max(Fnorms), np.linalg.norm(C))
    X = xi * np.eye(m)
    Z = eta * np.eye(m)
    y = np.zeros(K)
    I = np.eye(m)

    def residuals(X, y, Z):
        rp = b + prob.adjoint(X)           # b - A(X), A(X) = -adj(X)
        Rd = prob.Z(y) - Z                 # C - Z - sum y_i A_i
        return rp, Rd

    status = "max_iter"
    converged = False
    history = None
    best = None
    for it in range(1, max_iter + 1):
        rp, Rd = residuals(X, y, Z)
        pobj = float(b @ y)                # maximized objective
        dobj = float(np.sum(C * X))
        gap = float(np.sum(X * Z))
        relgap = abs(dobj - pobj) / (1 + abs(pobj) + abs(dobj))
        pinf = np.linalg.norm(rp) / nb
        dinf = np.linalg.norm(Rd) / nC
        history = (X, y, Z)
        score = max(relgap, pinf, dinf)
        if best is None or score < best[0]:
            best = (score, X, y, Z)
        if verbose:
            log.info("it %3d  pobj %.10f dobj %.10f gap %.2e pinf %.2e "
                     "dinf %.2e", it, pobj, dobj, relgap, pinf, dinf)
        if relgap < tol and pinf < tol and dinf < tol:
            status, converged = "optimal", True
            break
        mu = gap / m

        try:
            LX = _chol(X)
            LZ = _chol(Z)
        except np.linalg.LinAlgError as e:
            if best is not None and best[0] < NEAR_TOL:
                status = "numerical"
                break
            raise SdpError("iterate lost positive definiteness", history) from e
        U, s, Vt = np.linalg.svd(LZ.T @ LX)
        G = LX @ Vt.T / np.sqrt(s)
        Ginv = (U.T @ LZ.T) / np.sqrt(s)[:, None]     # G^{-1} = D^{-1/2} U^T LZ^T
        W = G @ G.T
        d = s                                          # scaled iterate V = diag(d)

        H = _schur(prob, W)
        try:
            cho = sla.cho_factor(H + 1e-14 * np.trace(H) / K * np.eye(K))
        except np.linalg.LinAlgError as e:
            if best is not None and best[0] < NEAR_TOL:
                status = "numerical"
                break
            raise SdpError("Schur complement not positive definite",
                           history) from e

        WRdW = W @ Rd @ W
        dd = d[:, None] + d[None, :]

        def direction(Khat):
            R = G @ Khat @ G.T
            rhs = rp + prob.adjoint(R - WRdW)      # rp - A(R - W Rd W)
            dy = sla.cho_solve(cho, rhs)
            for _ in range(refine):
                dZ = Rd + (prob.F @ dy).reshape(m, m)  # Rd - sum dy_i A_i
                dX = R - W @ dZ @ W
                res = rp + prob.adjoint(0.5 * (dX + dX.T))
                if np.linalg.norm(res) < 1e-15 * nb:
                    break
                dy = dy + sla.cho_solve(cho, res)
            dZ = Rd + (prob.F @ dy).reshape(m, m)
            dX = R - W @ dZ @ W
            return 0.5 * (dX + dX.T), dy, 0.5 * (dZ + dZ.T)

        # predictor
        dXa, dya, dZa = direction(-np.diag(d))
        ap = min(1.0, _max_step(LX, dXa))
        ad = min(1.0, _max_step(LZ, dZa))
        gap_a = float(np.sum((X + ap * dXa) * (Z + ad * dZa)))
        sigma = min(1.0, (gap_a / gap) ** 3)

        # corrector
        Xh = Ginv @ dXa @ Ginv.T
        Zh = G.T @ dZa @ G
        Rc = 2 * sigma * mu * I - 2 * np.diag(d * d) - (Xh @ Zh + Zh @ Xh)
        dX, dy, dZ = direction(Rc / dd)

        tau = 0.9 + 0.09 * min(ap, ad)
        ap = min(1.0, tau * _max_step(LX, dX))
        ad = min(1.0, tau * _max_step(LZ, dZ))
        if verbose:
            log.info("         sigma %.2e  step_p %.3e  step_d %.3e",
                     sigma, ap, ad)
        X = X + ap * dX
        y = y + ad * dy
        Z = Z + ad * dZ
        X = 0.5 * (X + X.T)
        Z = 0.5 * (Z + Z.T)
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(Z))):
            raise SdpError("non-finite iterate", history)

    if not converged and best is not None:
        _, X, y, Z = best
    rp, Rd = residuals(X, y, Z)
    pobj = float(b @ y)
    dobj = float(np.sum(C * X))
    return SdpResult(
        value=pobj, bound=dobj, y=y, Z=prob.Z(y), certificate=X,
        gap=abs(dobj - pobj), primal_infeasibility=float(np.linalg.norm(rp)),
        dual_infeasibility=float(np.linalg.norm(Rd)), iterations=it,
        converged=converged, status=status)


def dump_sdp(prob: SdpProblem, path) -> None:
    """Write ``prob`` as text, one nonzero per line: ``block row col value``.

    Block 0 is ``M0`` and blocks ``1..K`` are the ``M_i``; row and column are
    0-based, only the upper triangle is written. The first line is
    ``m K`` and the second holds the objective vector ``c``.
    """
    with open(path, "w") as fh:
        fh.write(f"{prob.m} {prob.K}\n")
        fh.write(" ".join(repr(float(v)) for v in prob.c) + "\n")
        r, cc = np.nonzero(np.triu(prob.M0))
        for i, j in zip(r, cc):
            fh.write(f"0 {i} {j} {float(prob.M0[i, j])!r}\n")
        for k, (r, cc, v) in enumerate(prob.entries(), start=1):
            for i, j, val in zip(r, cc, v):
                if i <= j:
                    fh.write(f"{k} {i} {j} {float(val)!r}\n")
