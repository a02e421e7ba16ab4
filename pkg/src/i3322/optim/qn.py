"""
Unconstrained smooth maximization: BFGS with a strong-Wolfe line search,
plus a golden-section search for one-dimensional problems.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

__all__ = ["QuasiNewtonConfig", "QnResult", "maximize_qn",
           "central_gradient", "golden_section_max"]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class QuasiNewtonConfig:
    """Settings for :func:`maximize_qn`.

    Attributes
    ----------
    gradient : {"analytic", "central"}
        ``"central"`` differences with step ``h`` are used when no gradient
        callable is supplied or this is set explicitly.
    c1, c2 : float
        Strong Wolfe constants, ``0 < c1 < c2 < 1``.
    gtol : float
        Stop when the gradient infinity norm falls below this.
    """

    gradient: str = "analytic"
    h: float = 1e-6
    c1: float = 1e-4
    c2: float = 0.9
    max_iter: int = 500
    gtol: float = 1e-9
    ftol: float = 0.0
    max_ls: int = 40

    def __post_init__(self):
        if not 0 < self.c1 < self.c2 < 1:
            raise ValueError("need 0 < c1 < c2 < 1")
        if self.gradient not in ("analytic", "central"):
            raise ValueError("gradient must be 'analytic' or 'central'")


@dataclass
class QnResult:
    value: float
    x: np.ndarray
    grad_norm: float
    iterations: int
    converged: bool
    status: str


def central_gradient(f: Callable, x: np.ndarray, h: float = 1e-6) -> np.ndarray:
    """Central-difference gradient, ``2 len(x)`` evaluations."""
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def _line_search(phi, dphi, phi0, dphi0, cfg: QuasiNewtonConfig, a1=1.0):
    """Strong-Wolfe search for ``min phi`` along a descent direction.

    Returns ``(alpha, phi(alpha), cached_grad)`` or ``None`` on failure.
    """
    a_prev, f_prev, d_prev = 0.0, phi0, dphi0
    a = a1

    def zoom(lo, hi, f_lo, d_lo, f_hi):
        for _ in range(cfg.max_ls):
            # safeguarded quadratic interpolation
            denom = 2 * (f_hi - f_lo - d_lo * (hi - lo))
            if denom != 0:
                aj = lo - d_lo * (hi - lo) ** 2 / denom
            else:
                aj = 0.5 * (lo + hi)
            lo_b, hi_b = min(lo, hi), max(lo, hi)
            width = hi_b - lo_b
            if not (lo_b + 0.1 * width <= aj <= hi_b - 0.1 * width):
                aj = 0.5 * (lo + hi)
            fj, gj, dj = phi(aj)
            if not np.isfinite(fj):
                hi, f_hi = aj, np.inf
                continue
            if fj > phi0 + cfg.c1 * aj * dphi0 or fj >= f_lo:
                hi, f_hi = aj, fj
            else:
                if abs(dj) <= -cfg.c2 * dphi0:
                    return aj, fj, gj
                if dj * (hi - lo) >= 0:
                    hi, f_hi = lo, f_lo
                lo, f_lo, d_lo = aj, fj, dj
            if abs(hi - lo) < 1e-16 * max(1.0, abs(lo)):
                break
        if f_lo < phi0:
            fj, gj, _ = phi(lo)
            return lo, fj, gj
        return None

    for i in range(cfg.max_ls):
        fa, ga, da = phi(a)
        if not np.isfinite(fa):
            a = 0.5 * (a_prev + a)
            continue
        if fa > phi0 + cfg.c1 * a * dphi0 or (i > 0 and fa >= f_prev):
            return zoom(a_prev, a, f_prev, d_prev, fa)
        if abs(da) <= -cfg.c2 * dphi0:
            return a, fa, ga
        if da >= 0:
            return zoom(a, a_prev, fa, da, f_prev)
        a_prev, f_prev, d_prev = a, fa, da
        a = 2 * a
    return None


def maximize_qn(f: Callable[[np.ndarray], float], x0,
                grad: Optional[Callable[[np.ndarray], np.ndarray]] = None,
                cfg: QuasiNewtonConfig = QuasiNewtonConfig(),
                callback: Optional[Callable] = None) -> QnResult:
    """Maximize a smooth function by BFGS.

    Parameters
    ----------
    f : callable
        Objective ``f(x) -> float``.
    x0 : array_like
        Starting point.
    grad : callable, optional
        Gradient of ``f``; central differences with step ``cfg.h`` otherwise.
    cfg : QuasiNewtonConfig
    callback : callable, optional
        Called as ``callback(x, value)`` after each accepted step.

    Returns
    -------
    QnResult
        The accepted values never decrease. A NaN objective stops the
        iteration and returns the last good iterate (status ``"nan"``).

    Examples
    --------
    >>> r = maximize_qn(lambda x: -np.sum((x - 1) ** 2), np.zeros(3))
    >>> bool(np.allclose(r.x, 1))
    True
    """
    x = np.array(x0, dtype=float).reshape(-1)
    if grad is None or cfg.gradient == "central":
        def g_of(z):
            return central_gradient(f, z, cfg.h)
    else:
        def g_of(z):
            return np.asarray(grad(z), dtype=float)

    fx = float(f(x))
    if not np.isfinite(fx):
        raise ValueError("objective is not finite at the starting point")
    gx = g_of(x)
    n = x.size
    Hinv = np.eye(n)
    first = True
    status, converged = "max_iter", False
    it = 0
    for it in range(1, cfg.max_iter + 1):
        gnorm = float(np.max(np.abs(gx))) if n else 0.0
        if gnorm < cfg.gtol:
            status, converged = "gtol", True
            break
        if not np.all(np.isfinite(gx)):
            status = "nan"
            break
        # minimize -f: descent direction p = Hinv (+g)
        p = Hinv @ gx
        slope = -float(gx @ p)
        if slope >= 0:                       # lost positive definiteness
            Hinv = np.eye(n)
            p = gx.copy()
            slope = -float(gx @ gx)
        a1 = 1.0
        if first:
            a1 = min(1.0, 1.0 / max(gnorm, 1e-300))

        cache = {}
        hit_nan = []

        def phi(a):
            z = x + a * p
            fz = float(f(z))
            if not np.isfinite(fz):
                hit_nan.append(a)
                return np.inf, None, np.nan
            gz = g_of(z)
            cache[a] = (z, fz, gz)
            return -fz, gz, -float(gz @ p)

        found = _line_search(phi, None, -fx, slope, cfg, a1)
        if found is None:
            status = "nan" if hit_nan else "line_search"
            break
        a, neg_f, gz = found
        z = x + a * p
        fz = -neg_f
        if not np.isfinite(fz):
            status = "nan"
            break
        s = z - x
        yv = -(gz - gx)                      # gradient change of -f
        sy = float(s @ yv)
        improvement = fz - fx
        x, fx, gx = z, fz, gz
        if callback is not None:
            callback(x, fx)
        if sy > 1e-300:
            if first:
                Hinv = np.eye(n) * (sy / float(yv @ yv))
            rho = 1.0 / sy
            Hy = Hinv @ yv
            Hinv = (Hinv - rho * (np.outer(s, Hy) + np.outer(Hy, s))
                    + (rho * rho * float(yv @ Hy) + rho) * np.outer(s, s))
            first = False
        if cfg.ftol > 0 and improvement < cfg.ftol * max(1.0, abs(fx)):
            status, converged = "ftol", True
            break
    gnorm = float(np.max(np.abs(gx))) if n else 0.0
    if not converged and gnorm < cfg.gtol:
        status, converged = "gtol", True
    return QnResult(value=fx, x=x, grad_norm=gnorm, iterations=it,
                    converged=converged, status=status)


_INVPHI = (math.sqrt(5) - 1) / 2


def golden_section_max(f: Callable[[float], float], a: float, b: float,
                       tol: float = 1e-12, max_iter: int = 500
                       ) -> Tuple[float, float]:
    """Maximize a unimodal ``f`` on ``[a, b]``; returns ``(x*, f(x*))``.

    The endpoints are also compared, so a maximum on the boundary is found.
    """
    lo, hi = float(a), float(b)
    c = hi - _INVPHI * (hi - lo)
    d = lo + _INVPHI * (hi - lo)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if hi - lo < tol:
            break
        if fc > fd:
            hi, d, fd = d, c, fc
            c = hi - _INVPHI * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + _INVPHI * (hi - lo)
            fd = f(d)
    xs = [(f(a), float(a)), (f(b), float(b)), (fc, c), (fd, d)]
    best = max(xs)
    return best[1], best[0]
