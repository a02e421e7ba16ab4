"""
Finite-dimensional quantum realizations and Bell operators.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .functional import (BellCoefficients, Behavior, DomainError,
                         FunctionalParams, coefficients)

__all__ = ["Realization", "PAULI_X", "PAULI_Y", "PAULI_Z", "IDENTITY2",
           "bell_operator", "value", "random_projective_observable",
           "haar_state", "load_realization", "dump_realization"]

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY2 = np.eye(2, dtype=complex)

HERMITIAN_TOL = 1e-12
NORM_TOL = 1e-12
PROJECTIVE_TOL = 1e-10


@dataclass(frozen=True)
class Realization:
    """A state and three binary observables per party.

    ``state`` is a unit vector in ``C^{dA dB}`` (Alice's factor first) or, if
    ``mixed`` is set, a density matrix.
    """

    A: tuple
    B: tuple
    state: np.ndarray
    mixed: bool = False

    def __post_init__(self):
        A = tuple(np.array(a, dtype=complex) for a in self.A)
        B = tuple(np.array(b, dtype=complex) for b in self.B)
        if len(A) != 3 or len(B) != 3:
            raise DomainError("a realization needs three observables per party")
        for ops in (A, B):
            d = ops[0].shape[0]
            for o in ops:
                if o.shape != (d, d):
                    raise DomainError("observables of one party must share a "
                                      "square shape")
                if np.max(np.abs(o - o.conj().T), initial=0) > HERMITIAN_TOL:
                    raise DomainError("observables must be Hermitian")
                if np.linalg.norm(o, 2) > 1 + HERMITIAN_TOL:
                    raise DomainError("observables must satisfy ||O|| <= 1")
        dim = A[0].shape[0] * B[0].shape[0]
        state = np.array(self.state, dtype=complex)
        if self.mixed:
            if state.shape != (dim, dim):
                raise DomainError(f"density matrix must be {dim}x{dim}")
            if abs(np.trace(state).real - 1) > NORM_TOL:
                raise DomainError("density matrix must have unit trace")
        else:
            state = state.reshape(-1)
            if state.shape != (dim,):
                raise DomainError(
                    f"state has dimension {state.size}, expected {dim}")
            if abs(np.linalg.norm(state) - 1) > NORM_TOL:
                raise DomainError("state must be normalized")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "state", state)

    @property
    def dA(self) -> int:
        return self.A[0].shape[0]

    @property
    def dB(self) -> int:
        return self.B[0].shape[0]

    @property
    def projective(self) -> bool:
        return (all(np.linalg.norm(o @ o - np.eye(self.dA)) < PROJECTIVE_TOL
                    for o in self.A)
                and all(np.linalg.norm(o @ o - np.eye(self.dB)) < PROJECTIVE_TOL
                        for o in self.B))

    def density(self) -> np.ndarray:
        if self.mixed:
            return self.state
        return np.outer(self.state, self.state.conj())

    def expectation(self, op: np.ndarray) -> float:
        if self.mixed:
            return float(np.real(np.trace(op @ self.state)))
        return float(np.real(self.state.conj() @ op @ self.state))

    def behavior(self) -> Behavior:
        """Expectations of all single and product observables.

        Computed by contracting the state tensor with each local operator
        separately, never forming the Kronecker products.
        """
        dA, dB = self.dA, self.dB
        if self.mixed:
            rho = self.state.reshape(dA, dB, dA, dB)
            rA = np.einsum("ibjb->ij", rho)
            rB = np.einsum("aiaj->ij", rho)
            mA = [np.real(np.trace(a @ rA)) for a in self.A]
            mB = [np.real(np.trace(b @ rB)) for b in self.B]
            corr = [[np.real(np.einsum("ij,kl,jlik->", a, b, rho))
                     for b in self.B] for a in self.A]
        else:
            psi = self.state.reshape(dA, dB)
            aPsi = [a @ psi for a in self.A]
            psiB = [psi @ b.T for b in self.B]
            mA = [np.real(np.vdot(psi, ap)) for ap in aPsi]
            mB = [np.real(np.vdot(psi, pb)) for pb in psiB]
            corr = [[np.real(np.vdot(psi, ap @ b.T)) for b in self.B]
                    for ap in aPsi]
        return Behavior(np.clip(mA, -1, 1), np.clip(mB, -1, 1),
                        np.clip(corr, -1, 1))

    def relabel_B(self, signs: Sequence[float]) -> "Realization":
        """Multiply Bob's observables by the given signs."""
        return Realization(self.A, tuple(s * b for s, b in zip(signs, self.B)),
                           self.state, self.mixed)

    def to_dict(self) -> dict:
        def enc(m):
            m = np.asarray(m)
            return np.stack([m.real, m.imag], axis=-1).tolist()
        return {"dA": self.dA, "dB": self.dB, "mixed": self.mixed,
                "A": [enc(a) for a in self.A], "B": [enc(b) for b in self.B],
                "state": enc(self.state)}

    @classmethod
    def from_dict(cls, d: dict) -> "Realization":
        def dec(x):
            x = np.asarray(x, dtype=float)
            return x[..., 0] + 1j * x[..., 1]
        return cls(tuple(dec(a) for a in d["A"]), tuple(dec(b) for b in d["B"]),
                   dec(d["state"]), bool(d.get("mixed", False)))


def dump_realization(r: Realization, path: Union[str, Path]) -> None:
    with open(path, "w") as fh:
        json.dump(r.to_dict(), fh)


def load_realization(path: Union[str, Path]) -> Realization:
    with open(path) as fh:
        return Realization.from_dict(json.load(fh))


def _coeffs(f) -> BellCoefficients:
    if isinstance(f, FunctionalParams):
        return coefficients(f)
    if isinstance(f, BellCoefficients):
        return f
    raise TypeError("expected FunctionalParams or BellCoefficients")


def bell_operator(f, A: Sequence[np.ndarray], B: Sequence[np.ndarray]) -> np.ndarray:
    """Bell operator ``W`` of a functional for the given observables.

    ``f`` is a :class:`FunctionalParams` or :class:`BellCoefficients`.
    ``<psi|W|psi>`` equals the functional evaluated on the behavior of
    ``(A, B, psi)``.
    """
    if isinstance(A, Realization):
        A, B = A.A, A.B
    c = _coeffs(f)
    dA, dB = A[0].shape[0], B[0].shape[0]
    IA, IB = np.eye(dA), np.eye(dB)
    W = c.const * np.eye(dA * dB, dtype=complex)
    for x in range(3):
        # group every term containing A_x into one Kronecker product
        Bx = c.margA[x] * IB + sum(c.corr[x, y] * B[y] for y in range(3))
        W += np.kron(A[x], Bx)
    for y in range(3):
        W += c.margB[y] * np.kron(IA, B[y])
    return 0.5 * (W + W.conj().T)


def value(f, r: Realization) -> float:
    """``<W>`` of a realization, via its behavior."""
    return _coeffs(f)(r.behavior())


def random_projective_observable(d: int, rng: np.random.Generator,
                                 real: bool = False) -> np.ndarray:
    """Sign of a random GUE (or GOE) matrix: a random +/-1 observable."""
    if real:
        G = rng.standard_normal((d, d))
    else:
        G = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    H = G + G.conj().T
    w, v = np.linalg.eigh(H)
    s = np.where(w >= 0, 1.0, -1.0)
    return (v * s) @ v.conj().T


def haar_state(d: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return z / np.linalg.norm(z)
