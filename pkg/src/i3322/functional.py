"""
The three-parameter family of I3322-like Bell functionals.

A functional is selected by ``(alpha1, alpha2, alpha3)`` and acts on a
*behavior*, the 15 expectation values of a two-party, three-setting,
binary-outcome box, written in the +/-1 outcome convention:

    beta = alpha1 [<A1> + <A2> + (-1)^alpha2 (<B1> + <B2>)]
         + <A1B1> + <A1B2> + <A2B1> + <A2B2>
         + alpha3 [<A3B1> - <A3B2> + <A1B3> - <A2B3>]

Probability tables ``p(ab|xy)`` are an ingestion format only; everything
downstream works on expectations. The 0/1 (projector) convention appears only
in :func:`projector_coefficients` and :func:`to_projector_form`.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Tuple, Union

import numpy as np

__all__ = [
    "DomainError",
    "UnsupportedError",
    "FunctionalParams",
    "SignFlip",
    "Behavior",
    "ProbabilityTable",
    "BellCoefficients",
    "ProjectorForm",
    "coefficients",
    "evaluate",
    "behavior_from_table",
    "table_from_behavior",
    "deterministic_behavior",
    "symmetry_generators",
    "projector_coefficients",
    "to_projector_form",
    "projector_relabel",
    "I3322",
    "load_behavior",
    "dump_behavior",
]

TABLE_TOL = 1e-12
# slack for expectations computed in floating point from quantum states
RANGE_TOL = 1e-9

# outcome a = +1 is index 0, a = -1 is index 1
OUTCOMES = (1, -1)


class DomainError(ValueError):
    """Input outside the domain of an operation."""


class UnsupportedError(ValueError):
    """Operation not defined for the requested family member."""


@dataclass(frozen=True)
class FunctionalParams:
    """Parameters ``(alpha1, alpha2, alpha3)`` of a family member.

    Instances are always normalized: ``alpha2`` is 0 or 1 and ``alpha1``,
    ``alpha3`` are finite and non-negative. Use :meth:`normalize` for
    arbitrary signs.
    """

    alpha1: float
    alpha2: int
    alpha3: float

    def __post_init__(self):
        if self.alpha2 not in (0, 1):
            raise DomainError(f"alpha2 must be 0 or 1, got {self.alpha2!r}")
        for name in ("alpha1", "alpha3"):
            v = getattr(self, name)
            if not np.isfinite(v):
                raise DomainError(f"{name} must be finite, got {v!r}")
            if v < 0:
                raise DomainError(
                    f"{name} must be non-negative, got {v!r}; "
                    "use FunctionalParams.normalize")
        object.__setattr__(self, "alpha1", float(self.alpha1))
        object.__setattr__(self, "alpha3", float(self.alpha3))
        object.__setattr__(self, "alpha2", int(self.alpha2))

    @classmethod
    def normalize(cls, alpha1: float, alpha2: int,
                  alpha3: float) -> Tuple["FunctionalParams", "SignFlip"]:
        """Map arbitrary real ``alpha1``, ``alpha3`` onto the canonical
        non-negative member.

        Returns the canonical parameters and the relabeling ``g`` such that
        ``evaluate((alpha1, alpha2, alpha3), b) == evaluate(p, g(b))``.
        """
        flip_all = alpha1 < 0
        flip3 = alpha3 < 0
        p = cls(abs(alpha1), alpha2, abs(alpha3))
        return p, SignFlip(flip_A3=flip3, flip_B3=flip3, flip_all=flip_all)

    def as_tuple(self) -> Tuple[float, int, float]:
        return (self.alpha1, self.alpha2, self.alpha3)


I3322 = FunctionalParams(1.0, 1, 1.0)
"""The I3322 member, in the labeling where its local value is 4."""


@dataclass(frozen=True)
class SignFlip:
    """A relabeling of observables acting on behaviors.

    The operations are applied in the order: party swap, ``A1<->A2``,
    ``B1<->B2``, ``A3 -> -A3``, ``B3 -> -B3``, all observables negated.
    The symmetry ``A1<->A2, B3->-B3`` is ``SignFlip(swap_A12=True,
    flip_B3=True)``.
    """

    flip_A3: bool = False
    flip_B3: bool = False
    flip_all: bool = False
    swap_A12: bool = False
    swap_B12: bool = False
    swap_parties: bool = False

    def apply(self, b: "Behavior") -> "Behavior":
        mA, mB, corr = b.marg_A.copy(), b.marg_B.copy(), b.corr.copy()
        if self.swap_parties:
            mA, mB, corr = mB, mA, corr.T.copy()
        if self.swap_A12:
            mA = mA[[1, 0, 2]]
            corr = corr[[1, 0, 2], :]
        if self.swap_B12:
            mB = mB[[1, 0, 2]]
            corr = corr[:, [1, 0, 2]]
        if self.flip_A3:
            mA[2] = -mA[2]
            corr[2, :] = -corr[2, :]
        if self.flip_B3:
            mB[2] = -mB[2]
            corr[:, 2] = -corr[:, 2]
        if self.flip_all:
            mA, mB = -mA, -mB
        return Behavior(mA, mB, corr)

    __call__ = apply


def symmetry_generators(alpha2: int = 0):
    """The three generators of the functional's relabeling symmetry group.

    For ``alpha2 = 1`` the marginal terms of the two parties carry opposite
    signs, so the party swap is composed with negating every observable.
    """
    return (SignFlip(swap_parties=True, flip_all=bool(alpha2)),
            SignFlip(swap_A12=True, flip_B3=True),
            SignFlip(swap_B12=True, flip_A3=True))


@dataclass(frozen=True)
class Behavior:
    """Marginals ``<A_x>``, ``<B_y>`` and correlators ``<A_x B_y>``.

    ``corr[x, y]`` holds ``<A_{x+1} B_{y+1}>``.
    """

    marg_A: np.ndarray
    marg_B: np.ndarray
    corr: np.ndarray

    def __post_init__(self):
        mA = np.array(self.marg_A, dtype=float).reshape(3)
        mB = np.array(self.marg_B, dtype=float).reshape(3)
        corr = np.array(self.corr, dtype=float).reshape(3, 3)
        for arr in (mA, mB, corr):
            if not np.all(np.isfinite(arr)):
                raise DomainError("behavior entries must be finite")
            if np.any(np.abs(arr) > 1 + RANGE_TOL):
                raise DomainError(
                    f"behavior entries must lie in [-1, 1], got max "
                    f"|entry| = {np.abs(arr).max():.3g}")
            arr.setflags(write=False)
        object.__setattr__(self, "marg_A", mA)
        object.__setattr__(self, "marg_B", mB)
        object.__setattr__(self, "corr", corr)

    @classmethod
    def zero(cls) -> "Behavior":
        return cls(np.zeros(3), np.zeros(3), np.zeros((3, 3)))

    def vector(self) -> np.ndarray:
        """Flatten to the 15-vector ``(marg_A, marg_B, corr.ravel())``."""
        return np.concatenate([self.marg_A, self.marg_B, self.corr.ravel()])

    def distance(self, other: "Behavior") -> float:
        return float(np.max(np.abs(self.vector() - other.vector())))

    def to_dict(self) -> dict:
        return {"margA": self.marg_A.tolist(), "margB": self.marg_B.tolist(),
                "corr": self.corr.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "Behavior":
        return cls(d["margA"], d["margB"], d["corr"])


def load_behavior(path: Union[str, Path]) -> Behavior:
    with open(path) as fh:
        return Behavior.from_dict(json.load(fh))


def dump_behavior(b: Behavior, path: Union[str, Path]) -> None:
    with open(path, "w") as fh:
        json.dump(b.to_dict(), fh, indent=2)


@dataclass(frozen=True)
class ProbabilityTable:
    """Conditional probabilities ``p[a, b, x, y] = p(ab|xy)``.

    Outcome index 0 is ``+1`` and index 1 is ``-1``; settings are 0-based.
    """

    p: np.ndarray
    no_signalling: bool = field(default=False)

    def __post_init__(self):
        p = np.array(self.p, dtype=float)
        if p.shape != (2, 2, 3, 3):
            raise DomainError(f"table must have shape (2,2,3,3), got {p.shape}")
        if np.any(p < -TABLE_TOL) or np.any(p > 1 + TABLE_TOL):
            raise DomainError("probabilities must lie in [0, 1]")
        norm = p.sum(axis=(0, 1))
        if np.max(np.abs(norm - 1)) > TABLE_TOL:
            raise DomainError(
                f"table not normalized: max |sum_ab p - 1| = "
                f"{np.max(np.abs(norm - 1)):.3g}")
        if self.no_signalling:
            pa = p.sum(axis=1)  # (a, x, y)
            pb = p.sum(axis=0)  # (b, x, y)
            if (np.max(np.abs(pa - pa[:, :, :1])) > TABLE_TOL
                    or np.max(np.abs(pb - pb[:, :1, :])) > TABLE_TOL):
                raise DomainError("table flagged no-signalling but signals")
        p.setflags(write=False)
        object.__setattr__(self, "p", p)

    @classmethod
    def uniform(cls) -> "ProbabilityTable":
        return cls(np.full((2, 2, 3, 3), 0.25), no_signalling=True)

    def marginal_A(self) -> np.ndarray:
        """``p(a|x)`` as shape (2, 3), averaged over Bob's setting."""
        return self.p.sum(axis=1).mean(axis=2)

    def marginal_B(self) -> np.ndarray:
        """``p(b|y)`` as shape (2, 3), averaged over Alice's setting."""
        return self.p.sum(axis=0).mean(axis=1)


def behavior_from_table(t: ProbabilityTable) -> Behavior:
    """Expectations ``<A_x> = sum_a a p(a|x)`` etc. of a probability table.

    For a signalling table the marginals are averaged over the other
    party's setting.
    """
    if not isinstance(t, ProbabilityTable):
        t = ProbabilityTable(t)
    s = np.array(OUTCOMES, dtype=float)
    mA = s @ t.marginal_A()
    mB = s @ t.marginal_B()
    corr = np.einsum("a,b,abxy->xy", s, s, t.p)
    return Behavior(mA, mB, corr)


def table_from_behavior(b: Behavior) -> ProbabilityTable:
    """The unique no-signalling table with the given expectations.

    Raises :class:`DomainError` if some probability would be negative, i.e.
    the expectations are not those of a valid box.
    """
    s = np.array(OUTCOMES, dtype=float)
    p = 0.25 * (1 + s[:, None, None, None] * b.marg_A[None, None, :, None]
                + s[None, :, None, None] * b.marg_B[None, None, None, :]
                + s[:, None, None, None] * s[None, :, None, None]
                * b.corr[None, None, :, :])
    if p.min() < -TABLE_TOL:
        raise DomainError("expectations do not define a non-negative table")
    return ProbabilityTable(np.clip(p, 0.0, 1.0), no_signalling=True)


def deterministic_behavior(a, b) -> Behavior:
    """Behavior of the deterministic strategy with outcomes ``a[x]``, ``b[y]``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return Behavior(a, b, np.outer(a, b))


@dataclass(frozen=True)
class BellCoefficients:
    """A general linear functional on behaviors (+/-1 convention).

    ``value = const + margA . <A> + margB . <B> + sum(corr * <AB>)``
    """

    const: float
    margA: np.ndarray
    margB: np.ndarray
    corr: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "const", float(self.const))
        object.__setattr__(self, "margA",
                           np.array(self.margA, dtype=float).reshape(3))
        object.__setattr__(self, "margB",
                           np.array(self.margB, dtype=float).reshape(3))
        object.__setattr__(self, "corr",
                           np.array(self.corr, dtype=float).reshape(3, 3))

    def __call__(self, b: Behavior) -> float:
        return float(self.const + self.margA @ b.marg_A
                     + self.margB @ b.marg_B + np.sum(self.corr * b.corr))

    def vector(self) -> np.ndarray:
        return np.concatenate([self.margA, self.margB, self.corr.ravel()])


def coefficients(params: FunctionalParams) -> BellCoefficients:
    """Coefficients of the family member ``params``."""
    a1, a3 = params.alpha1, params.alpha3
    sb = -1.0 if params.alpha2 else 1.0
    corr = np.array([[1.0, 1.0, a3],
                     [1.0, 1.0, -a3],
                     [a3, -a3, 0.0]])
    return BellCoefficients(0.0, [a1, a1, 0.0], [sb * a1, sb * a1, 0.0], corr)


def evaluate(params: FunctionalParams, b: Behavior) -> float:
    """Value of the functional ``params`` on the behavior ``b``."""
    if not isinstance(b, Behavior):
        raise DomainError("evaluate expects a Behavior")
    return coefficients(params)(b)


@dataclass(frozen=True)
class ProjectorForm:
    """A functional written on projector expectations.

    ``value = const + pA . <M^A_{1|x}> + pB . <M^B_{1|y}>
    + sum(pAB * <M^A_{1|x} M^B_{1|y}>)``.
    """

    const: float
    pA: np.ndarray
    pB: np.ndarray
    pAB: np.ndarray

    def evaluate_table(self, t: ProbabilityTable) -> float:
        return float(self.const + self.pA @ t.marginal_A()[0]
                     + self.pB @ t.marginal_B()[0]
                     + np.sum(self.pAB * t.p[0, 0]))

    def terms(self):
        """Non-zero terms as ``(coefficient, label)`` pairs."""
        out = [(self.const, "1")]
        for x in range(3):
            if self.pA[x]:
                out.append((self.pA[x], f"M^A_{{1|{x + 1}}}"))
        for y in range(3):
            if self.pB[y]:
                out.append((self.pB[y], f"M^B_{{1|{y + 1}}}"))
        for x in range(3):
            for y in range(3):
                if self.pAB[x, y]:
                    out.append((self.pAB[x, y],
                                f"M^A_{{1|{x + 1}}}M^B_{{1|{y + 1}}}"))
        return out


def projector_coefficients(c: BellCoefficients) -> ProjectorForm:
    """Rewrite ``c`` through ``A_x = 2 M^A_{1|x} - 1``, ``B_y = 2 M^B_{1|y} - 1``."""
    const = c.const - c.margA.sum() - c.margB.sum() + c.corr.sum()
    pA = 2 * c.margA - 2 * c.corr.sum(axis=1)
    pB = 2 * c.margB - 2 * c.corr.sum(axis=0)
    pAB = 4 * c.corr
    return ProjectorForm(float(const), pA, pB, pAB)


projector_relabel = SignFlip(flip_A3=True, flip_B3=True)
"""Relabeling taking the I3322 member to the labeling of its projector form."""


def to_projector_form(params: FunctionalParams) -> ProjectorForm:
    """Projector-form coefficients of the I3322 member.

    The returned form ``F`` satisfies
    ``F.evaluate_table(t) == evaluate(I3322, projector_relabel(behavior_from_table(t)))``
    for every no-signalling table ``t``: constant 4, and 4 times
    ``-M^A_{1|2} - M^B_{1|1} - 2 M^B_{1|2} + (A1+A2)(B1+B2) - A1B3 + A2B3
    - A3B1 + A3B2`` in projector products.
    """
    if params != I3322:
        raise UnsupportedError(
            "projector form is only provided for the I3322 member "
            f"(alpha1=alpha3=1, alpha2=1); got {params.as_tuple()}")
    c = coefficients(params)
    # flipping A3 and B3 negates the alpha3 row/column of the correlators
    corr = c.corr.copy()
    corr[2, :] *= -1
    corr[:, 2] *= -1
    return projector_coefficients(BellCoefficients(c.const, c.margA, c.margB,
                                                   corr))
