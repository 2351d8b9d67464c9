"""Quadratic time-dependent Hamiltonians and extended phase space states.

A linear Hamiltonian problem ``y' = A(t) y`` with ``A(t)`` in sp(2n) has the
Hamiltonian ``H(y, t) = -1/2 y^T J_n A(t) y``. Phase points are stacked as
``y = (q_1..q_n, p_1..p_n)``. The extended state appends time ``t`` and its
conjugate ``u``; the extended Hamiltonian ``K = H + u`` is conserved by the
extended flow, so ``-u`` tracks the energy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DimensionError
from .matkernels import sp_residual, structure_matrix

MatrixFunction = Callable[[float], np.ndarray]


def _finite_vector(v, name: str) -> np.ndarray:
    arr = np.array(v, dtype=float)
    if arr.ndim != 1:
        raise DimensionError(f"{name} must be a vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class PhasePoint:
    """A point ``(q, p)`` of the phase space R^2n."""

    q: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        q = _finite_vector(self.q, "q")
        p = _finite_vector(self.p, "p")
        if q.shape != p.shape or q.size == 0:
            raise DimensionError(f"q and p must have equal positive length, got {q.size}, {p.size}")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "p", p)

    @property
    def n(self) -> int:
        return self.q.size

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate((self.q, self.p))

    @classmethod
    def from_vector(cls, y) -> "PhasePoint":
        y = np.asarray(y, dtype=float)
        if y.ndim != 1 or y.size % 2:
            raise DimensionError(f"stacked phase vector must have even length, got shape {y.shape}")
        n = y.size // 2
        return cls(y[:n], y[n:])


def as_phase_vector(y) -> np.ndarray:
    """Stacked ``(q, p)`` vector from a :class:`PhasePoint` or array-like."""
    if isinstance(y, PhasePoint):
        return y.vector
    return np.asarray(y, dtype=float)


@dataclass(frozen=True)
class ExtendedPoint:
    """A point ``(q, p, t, u)`` of the extended phase space.

    ``y`` holds the stacked ``(q, p)`` vector; ``q`` and ``p`` are views.
    """

    y: np.ndarray
    t: float
    u: float

    def __post_init__(self):
        y = _finite_vector(as_phase_vector(self.y), "y")
        if y.size == 0 or y.size % 2:
            raise DimensionError(f"stacked phase vector must have even length, got {y.size}")
        t, u = float(self.t), float(self.u)
        if not (math.isfinite(t) and math.isfinite(u)):
            raise ValueError("t and u must be finite")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "u", u)

    @property
    def n(self) -> int:
        return self.y.size // 2

    @property
    def q(self) -> np.ndarray:
        return self.y[: self.n]

    @property
    def p(self) -> np.ndarray:
        return self.y[self.n :]

    @property
    def phase_point(self) -> PhasePoint:
        return PhasePoint(self.q, self.p)

    def as_array(self) -> np.ndarray:
        """Flat ``(q, p, t, u)`` array."""
        return np.concatenate((self.y, [self.t, self.u]))

    @classmethod
    def from_array(cls, z) -> "ExtendedPoint":
        z = np.asarray(z, dtype=float)
        return cls(z[:-2], z[-2], z[-1])


@dataclass(frozen=True)
class LinearHamiltonianProblem:
    """``y' = A(t) y`` with ``A(t)`` in sp(2n) and its analytic derivative.

    Args:
        n: Degrees of freedom; matrices are ``2n x 2n``.
        coefficient: ``t -> A(t)``.
        coefficient_derivative: ``t -> A'(t)``.
        autonomous: Set when ``A`` is constant; lets methods skip work.
    """

    n: int
    coefficient: MatrixFunction
    coefficient_derivative: MatrixFunction
    autonomous: bool = False
    J: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n}")
        object.__setattr__(self, "J", structure_matrix(int(self.n)))

    @property
    def dim(self) -> int:
        return 2 * self.n

    def A(self, t: float) -> np.ndarray:
        return self.coefficient(t)

    def dA(self, t: float) -> np.ndarray:
        return self.coefficient_derivative(t)

    @classmethod
    def constant(cls, A) -> "LinearHamiltonianProblem":
        """Autonomous problem with a fixed coefficient matrix."""
        A = np.array(A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] % 2:
            raise DimensionError(f"A must be square of even size, got {A.shape}")
        A.flags.writeable = False
        zero = np.zeros_like(A)
        zero.flags.writeable = False
        return cls(A.shape[0] // 2, lambda t: A, lambda t: zero, autonomous=True)

    def check_structure(self, times, tol: float = 1e-13) -> float:
        """Largest ``||J A(t) + A(t)^T J||_F`` over ``times``; raises if above ``tol``."""
        worst = max(sp_residual(self.A(t), self.J) for t in times)
        if worst > tol:
            raise ValueError(f"A(t) leaves sp(2n): residual {worst:.3g} > {tol:g}")
        return worst


class PerturbedOscillator(LinearHamiltonianProblem):
    """Slowly perturbed harmonic oscillator.

    ``H(q, p, t) = ((1 + eps sin(alpha t)) q.q + p.p) / 2``, i.e.
    ``A(t) = [[0, I], [-(1 + eps sin(alpha t)) I, 0]]``.
    """

    def __init__(self, n: int, epsilon: float, alpha: float):
        object.__setattr__(self, "epsilon", float(epsilon))
        object.__setattr__(self, "alpha", float(alpha))
        eye = np.eye(n)
        base = np.zeros((2 * n, 2 * n))
        base[:n, n:] = eye
        lower = np.zeros((2 * n, 2 * n))
        lower[n:, :n] = -eye

        def coefficient(t: float) -> np.ndarray:
            return base + (1.0 + self.epsilon * math.sin(self.alpha * t)) * lower

        def coefficient_derivative(t: float) -> np.ndarray:
            return (self.epsilon * self.alpha * math.cos(self.alpha * t)) * lower

        super().__init__(n, coefficient, coefficient_derivative, autonomous=(self.epsilon == 0.0))

    def frequency_squared(self, t: float) -> float:
        return 1.0 + self.epsilon * math.sin(self.alpha * t)

    def __repr__(self) -> str:
        return f"PerturbedOscillator(n={self.n}, epsilon={self.epsilon}, alpha={self.alpha})"


def _check_dims(prob: LinearHamiltonianProblem, y: np.ndarray) -> None:
    if y.shape != (prob.dim,):
        raise DimensionError(f"state has shape {y.shape}, problem expects ({prob.dim},)")


def _quadratic(J: np.ndarray, B: np.ndarray, y: np.ndarray) -> float:
    return -0.5 * float(y @ (J @ (B @ y)))


def hamiltonian(prob: LinearHamiltonianProblem, y, t: float) -> float:
    """``H(y, t) = -1/2 y^T J A(t) y``."""
    y = as_phase_vector(y)
    _check_dims(prob, y)
    return _quadratic(prob.J, prob.A(t), y)


def hamiltonian_time_derivative(prob: LinearHamiltonianProblem, y, t: float) -> float:
    """Explicit time derivative ``dH/dt = -1/2 y^T J A'(t) y``."""
    y = as_phase_vector(y)
    _check_dims(prob, y)
    return _quadratic(prob.J, prob.dA(t), y)


def extended_vector_field(prob: LinearHamiltonianProblem, z: ExtendedPoint) -> np.ndarray:
    """Tangent ``(q', p', t', u') = (A(t) y, 1, -dH/dt)`` of the extended flow."""
    _check_dims(prob, z.y)
    out = np.empty(prob.dim + 2)
    out[:-2] = prob.A(z.t) @ z.y
    out[-2] = 1.0
    out[-1] = -_quadratic(prob.J, prob.dA(z.t), z.y)
    return out


def extended_hamiltonian(prob: LinearHamiltonianProblem, z: ExtendedPoint) -> float:
    """``K = H(y, t) + u``."""
    return hamiltonian(prob, z.y, z.t) + z.u


def initial_point(prob: LinearHamiltonianProblem, q0, p0, t0: float = 0.0) -> ExtendedPoint:
    """Extended initial state with ``u0 = -H(q0, p0, t0)`` so that ``K = 0``."""
    y0 = np.concatenate((np.asarray(q0, dtype=float), np.asarray(p0, dtype=float)))
    return ExtendedPoint(y0, t0, -hamiltonian(prob, y0, t0))
