"""Method descriptors, step results and the one-step method wrapper."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ..errors import NotSymplectic
from ..matkernels import as_matrix, structure_matrix, symplectic_residual
from ..model import ExtendedPoint, LinearHamiltonianProblem, _check_dims, as_phase_vector

# advance(prob, y, t, u, h, with_u) -> (Y, U)
Advance = Callable[[LinearHamiltonianProblem, np.ndarray, float, float, float, bool], "tuple[np.ndarray, float]"]


@dataclass(frozen=True)
class MethodDescriptor:
    """Identity, order and structural properties of a one-step method.

    ``canonical``, ``symmetric`` and ``exponential`` are the C/S/E property
    flags; ``has_u_update`` is False for methods that copy ``u`` unchanged.
    """

    id: str
    label: str
    order: int
    canonical: bool
    symmetric: bool
    exponential: bool
    has_u_update: bool = True
    order_claim_valid: bool = True

    @property
    def properties(self) -> str:
        return "".join(flag for flag, on in zip("CSE", (self.canonical, self.symmetric, self.exponential)) if on)


@dataclass(frozen=True)
class StepResult:
    z_next: ExtendedPoint
    diagnostics: Optional[dict] = None


@dataclass(frozen=True)
class Method:
    """A fixed-step integrator for linear Hamiltonian problems in extended phase space.

    ``advance`` works on raw arrays and is what trajectory loops call;
    :meth:`step` wraps it with validation and the :class:`ExtendedPoint` type.
    Time always advances as ``T = t + h``.
    """

    descriptor: MethodDescriptor
    advance: Advance = field(repr=False)
    stages: int = 1

    @property
    def id(self) -> str:
        return self.descriptor.id

    def step(self, prob: LinearHamiltonianProblem, z: ExtendedPoint, h: float, diagnostics: bool = False) -> StepResult:
        if h == 0 or not np.isfinite(h):
            raise ValueError(f"step size must be finite and nonzero, got {h}")
        _check_dims(prob, z.y)
        Y, U = self.advance(prob, z.y, z.t, z.u, h, True)
        z_next = ExtendedPoint(Y, z.t + h, U)
        diag = None
        if diagnostics:
            M = step_matrix(self, prob, z.t, h)
            diag = {
                "stages": self.stages,
                "solver_iterations": 0,
                "symplectic_residual": symplectic_residual(M),
            }
        return StepResult(z_next, diag)


def step_matrix(method: Method, prob: LinearHamiltonianProblem, t: float, h: float) -> np.ndarray:
    """Matrix of the (linear) map ``y -> Y`` of one step from time ``t``."""
    d = prob.dim
    M = np.empty((d, d))
    for j in range(d):
        e = np.zeros(d)
        e[j] = 1.0
        M[:, j], _ = method.advance(prob, e, t, 0.0, h, False)
    return M


def canonical_u_update(M, M_prime, y, u: float, tol: float = 1e-10) -> float:
    """Auxiliary update ``u + 1/2 y^T M^T J M' y`` for a map ``y -> M(t) y``.

    This is the generating-function form valid for any symplectic ``M(t)``;
    ``M_prime`` is the derivative of ``M`` with respect to ``t``.

    Raises:
        NotSymplectic: ``||M^T J M - J||_F > tol``; the update is then meaningless.
    """
    M = as_matrix(M, "M")
    Mp = as_matrix(M_prime, "M_prime")
    y = as_phase_vector(y)
    J = structure_matrix(M.shape[0] // 2)
    res = symplectic_residual(M, J)
    if res > tol:
        raise NotSymplectic(f"step matrix is not symplectic (residual {res:.3g})")
    return u + 0.5 * float(y @ (M.T @ (J @ (Mp @ y))))
