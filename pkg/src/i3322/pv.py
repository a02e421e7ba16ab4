"""
Block-structured realizations of Pál–Vértesi type in local dimension ``n``.

Alice's observables in her Jordan basis ``|0>, ..., |n-1>``:

* ``A1`` is ``+1`` on the one-dimensional block ``|0>`` and
  ``cos(t_j) Z + sin(t_j) X`` on each two-dimensional block
  ``{|j>, |j+1>}``, ``j = 1, 3, ..., n-2``;
* ``A2`` is ``A1`` with the off-diagonal entries negated;
* ``A3`` is ``+1`` on ``|n-1>`` and ``X`` on the blocks
  ``{|j>, |j+1>}``, ``j = 0, 2, ..., n-3``.

Bob's ``B1``, ``B2``, ``B3`` have the same form with his own angles, and the
state is ``sum_k sqrt(lam_k) |k>|n-1-k>`` with real non-negative amplitudes.
For even ``n`` the blocks keep the same pattern but the parties differ:
``B1``, ``B2`` and ``A3`` consist of ``n/2`` two-dimensional blocks, while
``A1``, ``A2`` and ``B3`` have one-dimensional first and last blocks.

The construction is designed for the relabeled form of the functional in
which Bob's first two observables enter as ``-B2``, ``-B1``; the realization
returned by :func:`build_pv` carries that relabeling, so that it can be
evaluated with the functional directly.

Each observable is tridiagonal in its basis and the state pairs ``|k>`` with
``|n-1-k>``, so the functional restricted to the Schmidt support is an
``n x n`` symmetric tridiagonal matrix ``M``: values cost ``O(n)``, and the
best Schmidt coefficients for fixed angles are the squared top eigenvector
of ``M``. The off-diagonal of ``M`` is proportional to ``sin(t_j)``, so for
angles in ``[0, pi]`` that eigenvector has non-negative entries.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .functional import (BellCoefficients, DomainError, FunctionalParams,
                         coefficients)
from .optim.qn import QuasiNewtonConfig, maximize_qn
from .realization import Realization

__all__ = ["PVParams", "PVConfig", "PVResult", "LadderSchedule",
           "StoppingRule", "LadderResult", "default_schedule", "build_pv",
           "pv_operators", "pv_value_fast", "pv_value_dense", "pv_top",
           "canonical_angles", "structured_init", "upsample",
           "optimize_pv", "ladder_run", "analyze_solution", "angle_counts",
           "classify_peaks", "fold_angles", "pv_support_matrix",
           "warm_optimize"]

log = logging.getLogger(__name__)

PEAK_TOL = 1e-4
"""Relative tolerance for entries sharing the maximal Schmidt weight."""


def angle_counts(n: int) -> Tuple[int, int]:
    """Numbers of principal angles ``(Alice, Bob)`` in dimension ``n``."""
    if n < 3:
        raise DomainError(f"dimension must be >= 3, got {n}")
    if n % 2:
        return (n - 1) // 2, (n - 1) // 2
    return (n - 2) // 2, n // 2


def _layout(n: int):
    """Block starts and one-dimensional positions per party.

    Returns ``(jordan_A, ones_jA, x_A, ones_xA, jordan_B, ones_jB, x_B,
    ones_xB)``, where "jordan" refers to the pair of observables with
    principal angles and "x" to the third observable.
    """
    if n % 2:
        jordan = np.arange(1, n - 1, 2)
        x = np.arange(0, n - 2, 2)
        return (jordan, [0], x, [n - 1], jordan, [0], x, [n - 1])
    inner = np.arange(1, n - 2, 2)
    full = np.arange(0, n - 1, 2)
    return (inner, [0, n - 1], full, [], full, [], inner, [0, n - 1])


@dataclass(frozen=True)
class PVParams:
    """Angles and Schmidt weights of a realization in dimension ``n``.

    Attributes
    ----------
    n : int
        Local dimension, at least 3.
    theta_A, theta_B : ndarray
        Principal angles of each party, one per two-dimensional Jordan
        block of the first two observables (see :func:`angle_counts`).
    schmidt_raw : ndarray, shape (n,)
        Unconstrained reals ``u``; the Schmidt weights are
        ``lam = u**2 / sum(u**2)``, with ``lam[k]`` the weight of
        ``|k>|n-1-k>``.
    """

    n: int
    theta_A: np.ndarray
    theta_B: np.ndarray
    schmidt_raw: np.ndarray

    def __post_init__(self):
        n = int(self.n)
        kA, kB = angle_counts(n)
        tA = np.array(self.theta_A, dtype=float).reshape(-1)
        tB = np.array(self.theta_B, dtype=float).reshape(-1)
        u = np.array(self.schmidt_raw, dtype=float).reshape(-1)
        if tA.size != kA or tB.size != kB:
            raise DomainError(
                f"dimension {n} needs {kA} and {kB} angles, got "
                f"{tA.size} and {tB.size}")
        if u.size != n:
            raise DomainError(f"need {n} Schmidt parameters, got {u.size}")
        if not (np.all(np.isfinite(tA)) and np.all(np.isfinite(tB))
                and np.all(np.isfinite(u))):
            raise DomainError("parameters must be finite")
        if not np.any(u != 0):
            raise DomainError("Schmidt parameters must not all vanish")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "theta_A", tA)
        object.__setattr__(self, "theta_B", tB)
        object.__setattr__(self, "schmidt_raw", u)

    @property
    def lam(self) -> np.ndarray:
        """Schmidt weights, non-negative and summing to one."""
        u2 = self.schmidt_raw ** 2
        return u2 / u2.sum()

    @property
    def tied(self) -> bool:
        return (self.theta_A.size == self.theta_B.size
                and bool(np.all(self.theta_A == self.theta_B)))

    @classmethod
    def symmetric(cls, n: int, theta, schmidt_raw) -> "PVParams":
        """Odd ``n`` with the same angles for both parties."""
        if n % 2 == 0:
            raise DomainError("tied angles need odd n")
        return cls(n, theta, theta, schmidt_raw)


# -- tridiagonal pieces -------------------------------------------------------

def _jordan_pair(n, starts, ones, theta):
    """``(d, e)`` of the first two observables of one party."""
    d = np.zeros(n)
    e1 = np.zeros(n - 1)
    d[list(ones)] = 1.0
    c, s = np.cos(theta), np.sin(theta)
    d[starts] = c
    d[starts + 1] = -c
    e1[starts] = s
    return (d, e1), (d.copy(), -e1)


def _x_observable(n, starts, ones):
    d = np.zeros(n)
    e = np.zeros(n - 1)
    d[list(ones)] = 1.0
    e[starts] = 1.0
    return d, e


def _raw_tridiagonals(p: PVParams):
    jA, oA, xA, oxA, jB, oB, xB, oxB = _layout(p.n)
    A = list(_jordan_pair(p.n, jA, oA, p.theta_A)) + [_x_observable(p.n, xA, oxA)]
    B = list(_jordan_pair(p.n, jB, oB, p.theta_B)) + [_x_observable(p.n, xB, oxB)]
    return A, B


def _bob_effective(B):
    """Relabel ``(B1, B2, B3) -> (-B2, -B1, B3)`` and reverse Bob's index so
    that his entries line up with Alice's on the Schmidt support."""
    rel = [(-B[1][0], -B[1][1]), (-B[0][0], -B[0][1]), B[2]]
    return [(d[::-1].copy(), e[::-1].copy()) for d, e in rel]


def _support_matrix(c: BellCoefficients, A, Bt):
    n = A[0][0].size
    D = np.full(n, c.const)
    E = np.zeros(n - 1)
    for x in range(3):
        D += c.margA[x] * A[x][0]
    for y in range(3):
        D += c.margB[y] * Bt[y][0]
        for x in range(3):
            D += c.corr[x, y] * A[x][0] * Bt[y][0]
            E += c.corr[x, y] * A[x][1] * Bt[y][1]
    return D, E


def _coeffs(params) -> BellCoefficients:
    if isinstance(params, BellCoefficients):
        return params
    return coefficients(params)


def pv_support_matrix(params, p: PVParams) -> Tuple[np.ndarray, np.ndarray]:
    """Diagonal and off-diagonal of ``M_kl = <k,n-1-k| W |l,n-1-l>``."""
    A, B = _raw_tridiagonals(p)
    return _support_matrix(_coeffs(params), A, _bob_effective(B))


def pv_value_fast(params: Union[FunctionalParams, BellCoefficients],
                  p: PVParams) -> float:
    """``<Psi|W|Psi>`` in ``O(n)`` from the tridiagonal support matrix.

    Examples
    --------
    >>> from i3322.functional import I3322
    >>> p = PVParams(3, [0.7], [0.7], [1.0, 0.0, 0.0])
    >>> round(pv_value_fast(I3322, p), 9)     # product state: 2 + 2 cos(0.7)
    3.529684375
    """
    D, E = pv_support_matrix(params, p)
    psi = np.sqrt(p.lam)
    return float(psi @ (D * psi) + 2 * np.sum(E * psi[:-1] * psi[1:]))


# -- dense construction -------------------------------------------------------

def _dense(de):
    d, e = de
    return np.diag(d) + np.diag(e, 1) + np.diag(e, -1)


def pv_operators(p: PVParams):
    """The six observables in their Jordan bases, before Bob's relabeling."""
    A, B = _raw_tridiagonals(p)
    return tuple(_dense(a) for a in A), tuple(_dense(b) for b in B)


def _state(p: PVParams) -> np.ndarray:
    n = p.n
    psi = np.zeros(n * n)
    k = np.arange(n)
    psi[k * n + (n - 1 - k)] = np.sqrt(p.lam)
    return psi


def build_pv(p: PVParams) -> Realization:
    """Dense realization: Alice ``(A1, A2, A3)``, Bob ``(-B2, -B1, B3)`` and
    the Schmidt state, as an input for the functional itself."""
    A, B = pv_operators(p)
    return Realization(A, (-B[1], -B[0], B[2]), _state(p))


def pv_value_dense(params, p: PVParams) -> float:
    """Reference value from the full ``n^2``-dimensional Bell operator."""
    from .realization import value
    return value(_coeffs(params), build_pv(p))


# -- optimization over angles -------------------------------------------------

def _top(D, E):
    n = D.size
    w, v = eigh_tridiagonal(D, E, select="i", select_range=(n - 1, n - 1))
    v = v[:, 0]
    if v.sum() < 0:
        v = -v
    return float(w[0]), v


def _angle_grad(gd0, gd1, ge0, ge1, starts, theta):
    c, s = np.cos(theta), np.sin(theta)
    return (-(gd0[starts] + gd1[starts]) * s
            + (gd0[starts + 1] + gd1[starts + 1]) * s
            + (ge0[starts] - ge1[starts]) * c)


def pv_top(params, n: int, theta_A, theta_B):
    """Best value over Schmidt weights for fixed angles.

    Returns
    -------
    value : float
        Largest eigenvalue of the support matrix.
    v : ndarray
        Its eigenvector (amplitudes ``sqrt(lam)`` up to sign).
    grad_A, grad_B : ndarray
        Derivatives of ``value`` with respect to the angles.
    """
    c = _coeffs(params)
    p = PVParams(n, theta_A, theta_B, np.ones(n))
    A, B = _raw_tridiagonals(p)
    Bt = _bob_effective(B)
    D, E = _support_matrix(c, A, Bt)
    val, v = _top(D, E)
    GD = v * v
    GE = 2 * v[:-1] * v[1:]
    gdA = [GD * (c.margA[x] + sum(c.corr[x, y] * Bt[y][0] for y in range(3)))
           for x in range(3)]
    geA = [GE * sum(c.corr[x, y] * Bt[y][1] for y in range(3)) for x in range(3)]
    gdBt = [GD * (c.margB[y] + sum(c.corr[x, y] * A[x][0] for x in range(3)))
            for y in range(3)]
    geBt = [GE * sum(c.corr[x, y] * A[x][1] for x in range(3)) for y in range(3)]
    # undo the index reversal, then the relabeling B'1 = -B2, B'2 = -B1
    gdB = [g[::-1] for g in gdBt]
    geB = [g[::-1] for g in geBt]
    gd0, gd1 = -gdB[1], -gdB[0]
    ge0, ge1 = -geB[1], -geB[0]
    jA, _, _, _, jB, _, _, _ = _layout(n)
    gA = _angle_grad(gdA[0], gdA[1], geA[0], geA[1], jA, p.theta_A)
    gB = _angle_grad(gd0, gd1, ge0, ge1, jB, p.theta_B)
    return val, v, gA, gB


def canonical_angles(theta) -> np.ndarray:
    """Map angles into ``[0, pi]``.

    Flipping the sign of ``sin(t)`` flips one off-diagonal of the support
    matrix, which leaves its spectrum unchanged and only changes the sign
    pattern of the optimal amplitudes; in ``[0, pi]`` the amplitudes are
    non-negative.
    """
    t = np.mod(np.asarray(theta, dtype=float) + np.pi, 2 * np.pi) - np.pi
    return np.abs(t)


@dataclass(frozen=True)
class PVConfig:
    """Settings for :func:`optimize_pv`.

    Attributes
    ----------
    tie_angles : bool
        Use the same angles for both parties (odd ``n`` only).
    qn : QuasiNewtonConfig
    retries : int
        Restarts from a perturbed initial point after a NaN objective.
    seed : int
        Seed of the perturbations.
    """

    tie_angles: bool = True
    qn: QuasiNewtonConfig = field(default_factory=lambda: QuasiNewtonConfig(
        max_iter=20000, gtol=1e-10))
    retries: int = 3
    seed: int = 0


@dataclass
class PVResult:
    value: float
    params: PVParams
    iterations: int
    status: str


def _bump(n: int) -> np.ndarray:
    k = np.arange(n)
    return np.exp(-0.5 * ((k - (n - 1) / 2) / max(n / 6, 1.0)) ** 2)


def structured_init(n: int, theta_c: float = 0.6,
                    theta_0: Optional[float] = None) -> PVParams:
    """Step-profile starting point.

    Angles are ``theta_c`` on the first half of the blocks and
    ``pi/2 - theta_c`` on the second half, with ``theta_0`` and
    ``pi/2 - theta_0`` on the first and last block; the Schmidt profile is
    a symmetric bump centred at ``n/2``.
    """
    if theta_0 is None:
        theta_0 = theta_c / 2
    kA, kB = angle_counts(n)

    def profile(k):
        j = np.arange(k)
        t = np.where(j < k / 2, theta_c, np.pi / 2 - theta_c)
        if k >= 3:
            t[0], t[-1] = theta_0, np.pi / 2 - theta_0
        return t

    return PVParams(n, profile(kA), profile(kB), np.sqrt(_bump(n)))


def _resample(y: np.ndarray, k: int) -> np.ndarray:
    if y.size == k:
        return y.copy()
    if y.size == 1:
        return np.full(k, y[0])
    return np.interp(np.linspace(0, 1, k), np.linspace(0, 1, y.size), y)


def upsample(p: PVParams, n: int) -> PVParams:
    """Interpolate the angle and Schmidt curves of ``p`` onto dimension
    ``n``; the Schmidt curve is renormalized."""
    kA, kB = angle_counts(n)
    tA = _resample(p.theta_A, kA)
    tB = _resample(p.theta_B, kB)
    if n % 2 and p.tied:
        tB = tA
    lam = np.maximum(_resample(p.lam, n), 0.0)
    if lam.sum() <= 0:
        lam = np.ones(n)
    return PVParams(n, tA, tB, np.sqrt(lam / lam.sum()))


def optimize_pv(params, n: int, init: Optional[PVParams] = None,
                cfg: PVConfig = PVConfig()) -> PVResult:
    """Maximize the value over angles and Schmidt weights in dimension ``n``.

    The Schmidt weights are eliminated exactly: for fixed angles the best
    weights are the squared top eigenvector of the support matrix, and
    the remaining function of the angles is maximized by BFGS with the
    Hellmann–Feynman gradient. The returned value is never below the value
    of ``init``.

    Parameters
    ----------
    init : PVParams, optional
        Starting point of dimension ``n``; :func:`structured_init` if absent.
    """
    c = _coeffs(params)
    if init is None:
        init = structured_init(n)
    if init.n != n:
        init = upsample(init, n)
    tie = cfg.tie_angles and n % 2 == 1
    kA, kB = angle_counts(n)

    def split(x):
        return (x, x) if tie else (x[:kA], x[kA:])

    def f(x):
        return pv_top(c, n, *split(x))[0]

    def g(x):
        _, _, gA, gB = pv_top(c, n, *split(x))
        return gA + gB if tie else np.concatenate([gA, gB])

    x0 = (init.theta_B.copy() if tie and init.tied
          else init.theta_A.copy() if tie
          else np.concatenate([init.theta_A, init.theta_B]))
    base = pv_value_fast(c, init)
    rng = np.random.default_rng([cfg.seed, n])
    res = None
    for attempt in range(cfg.retries + 1):
        res = maximize_qn(f, x0, grad=g, cfg=cfg.qn)
        if res.status != "nan":
            break
        log.warning("NaN objective at n=%d, retry %d", n, attempt + 1)
        x0 = x0 + 1e-3 * rng.standard_normal(x0.size)
    tA, tB = split(canonical_angles(res.x))
    val, v, _, _ = pv_top(c, n, tA, tB)
    out = PVParams(n, tA, tB, np.abs(v))
    if val < base:
        # cannot happen for a converged run, guard the contract anyway
        val, out = base, init
    status = res.status if res.status != "nan" else "failed"
    return PVResult(value=float(val), params=out, iterations=res.iterations,
                    status=status)


# -- dimension ladder ---------------------------------------------------------

def default_schedule(cap: int = 1200) -> List[int]:
    """3..50 step 1, then step 10 to 150, 30 to 300, 50 to 600 and 100
    up to ``cap``."""
    ns = list(range(3, 51))
    for lo, hi, step in ((50, 150, 10), (150, 300, 30), (300, 600, 50),
                         (600, cap, 100)):
        ns += list(range(lo + step, min(hi, cap) + 1, step))
    return [n for n in ns if n <= cap]


@dataclass(frozen=True)
class LadderSchedule:
    dims: Tuple[int, ...] = tuple(default_schedule())

    def __post_init__(self):
        d = tuple(int(n) for n in self.dims)
        if not d or d[0] != 3 or any(b <= a for a, b in zip(d, d[1:])):
            raise ValueError("schedule must start at 3 and increase strictly")
        object.__setattr__(self, "dims", d)

    @classmethod
    def odd(cls, cap: int = 1200) -> "LadderSchedule":
        """The default schedule restricted to odd dimensions."""
        return cls(tuple(n for n in default_schedule(cap) if n % 2))


@dataclass(frozen=True)
class StoppingRule:
    """Stop when the gap to the bound closes, or when ``window``
    consecutive values agree to ``plateau_tol``. The gap test comes first."""

    gap_tol: float = 1e-6
    plateau_tol: float = 1e-7
    window: int = 5

    def check(self, values: Sequence[float],
              bound: Optional[float]) -> Optional[str]:
        if bound is not None and bound - values[-1] < self.gap_tol:
            return "gap_closed"
        if len(values) >= self.window:
            tail = values[-self.window:]
            if max(tail) - min(tail) < self.plateau_tol:
                return "converged_below_bound"
        return None


@dataclass
class LadderResult:
    dims: List[int]
    values: List[float]
    flag: str
    closing_n: Optional[int]
    solutions: Dict[int, PVParams]
    statuses: List[str]

    @property
    def best(self) -> Tuple[int, float, PVParams]:
        i = int(np.argmax(self.values))
        n = self.dims[i]
        return n, self.values[i], self.solutions[n]


def ladder_run(params, npa_value: Optional[float],
               schedule: LadderSchedule = LadderSchedule(),
               rule: StoppingRule = StoppingRule(),
               cfg: PVConfig = PVConfig(),
               init: Optional[PVParams] = None,
               callback: Optional[Callable[[int, float], None]] = None
               ) -> LadderResult:
    """Optimize along a schedule of dimensions with warm starts.

    Each step starts from the previous solution upsampled to the new
    dimension, and from the structured guess; the better result is kept.
    Without ``npa_value`` only the plateau rule can stop the ladder.

    Returns
    -------
    LadderResult
        ``flag`` is ``"gap_closed"``, ``"converged_below_bound"`` or
        ``"schedule_exhausted"``; ``closing_n`` is the first dimension with
        a closed gap.
    """
    c = _coeffs(params)
    dims, values, statuses = [], [], []
    sols: Dict[int, PVParams] = {}
    prev = init
    flag = "schedule_exhausted"
    closing = None
    for n in schedule.dims:
        starts = [structured_init(n)]
        if prev is not None:
            starts.insert(0, upsample(prev, n))
        best = None
        for s in starts:
            try:
                r = optimize_pv(c, n, s, cfg)
            except (np.linalg.LinAlgError, ValueError) as exc:
                log.warning("optimizer failed at n=%d: %s", n, exc)
                continue
            if best is None or r.value > best.value:
                best = r
        if best is None:
            statuses.append("failed")
            continue
        dims.append(n)
        values.append(best.value)
        statuses.append(best.status)
        sols[n] = best.params
        prev = best.params
        if callback is not None:
            callback(n, best.value)
        log.info("n=%d beta_pv=%.10f", n, best.value)
        stop = rule.check(values, npa_value)
        if stop is not None:
            flag = stop
            if stop == "gap_closed":
                closing = n
            break
    return LadderResult(dims, values, flag, closing, sols, statuses)


def warm_optimize(params, n: int, cfg: PVConfig = PVConfig()) -> PVResult:
    """Optimize in dimension ``n`` after warm-starting along the odd
    dimensions below it; much more reliable than a single cold start."""
    dims = tuple(range(3, n, 2)) + (n,)
    lr = ladder_run(params, None, LadderSchedule(dims),
                    StoppingRule(window=len(dims) + 1), cfg)
    if lr.dims[-1] != n:
        raise RuntimeError(f"optimization failed at n={n}")
    return PVResult(lr.values[-1], lr.solutions[n], 0, lr.statuses[-1])


# -- solution analysis --------------------------------------------------------

def _peak_runs(lam: np.ndarray, tol: float = PEAK_TOL) -> List[List[int]]:
    """Maximal runs of consecutive indices within ``tol * max`` of the
    maximum."""
    near = np.nonzero(lam >= lam.max() * (1 - tol))[0]
    runs: List[List[int]] = []
    for k in near:
        if runs and k == runs[-1][-1] + 1:
            runs[-1].append(int(k))
        else:
            runs.append([int(k)])
    return runs


def classify_peaks(lam, tol: float = PEAK_TOL) -> str:
    """``"single-peak"``, ``"double-peak"`` or ``"triple/flat"``.

    Entries within a relative ``tol`` of the maximum are grouped into runs of
    consecutive indices. One run of length at most two is a single peak
    (for even ``n`` a centred peak is shared by the two middle entries),
    two runs are a double peak, and a run of three or more entries, or more
    than two runs, is a flat top.

    Examples
    --------
    >>> classify_peaks([1, 2, 3, 2, 1])
    'single-peak'
    >>> classify_peaks([1, 3, 2, 3, 1])
    'double-peak'
    >>> classify_peaks([1, 3, 3, 3, 1])
    'triple/flat'
    """
    runs = _peak_runs(np.asarray(lam, dtype=float), tol)
    if len(runs) == 1 and len(runs[0]) <= 2:
        return "single-peak"
    if len(runs) == 2 and all(len(r) <= 2 for r in runs):
        return "double-peak"
    return "triple/flat"


def fold_angles(theta) -> np.ndarray:
    """``min(t, pi - t)`` of canonical angles, in ``[0, pi/2]``.

    Optimal curves sit near ``pi - theta_c`` on one half of the blocks and
    near ``theta_c`` on the other; folding puts both halves on one scale.
    """
    t = canonical_angles(theta)
    return np.minimum(t, np.pi - t)


def analyze_solution(p: PVParams, tol: float = PEAK_TOL) -> dict:
    """Angle and Schmidt curves with a peak classification.

    Returns
    -------
    dict
        ``angles_A``, ``angles_B`` (canonical, in ``[0, pi]``), ``schmidt``;
        ``peaks`` (runs of indices within a relative ``tol`` of the maximum);
        ``peak_class`` from :func:`classify_peaks`; ``theta_0``, Bob's first
        folded angle, and ``theta_c``, the median of Bob's folded angles over
        the middle third of the first half of the blocks, where the plateau
        lies between the end effect and the central transition.

    Examples
    --------
    >>> p = PVParams(5, [0.3, 1.2], [0.3, 1.2], [1, 2, 3, 2, 1])
    >>> analyze_solution(p)["peak_class"]
    'single-peak'
    """
    lam = p.lam
    tB = fold_angles(p.theta_B)
    half = max(1, tB.size // 2)
    lo = half // 3
    hi = max(lo + 1, (2 * half) // 3)
    return {
        "n": p.n,
        "angles_A": canonical_angles(p.theta_A).tolist(),
        "angles_B": canonical_angles(p.theta_B).tolist(),
        "schmidt": lam.tolist(),
        "peaks": _peak_runs(lam, tol),
        "peak_class": classify_peaks(lam, tol),
        "theta_0": float(tB[0]),
        "theta_c": float(np.median(tB[lo:hi])),
    }
