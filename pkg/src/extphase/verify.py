"""Numerical checks of the structural properties claimed for each method.

Canonicity is checked through a finite-difference Jacobian of the full
extended step map. In the coordinate order ``(q, t, p, u)`` the symplectic
form ``dp_i ^ dq^i + du ^ dt`` has the standard block structure matrix
``J_{n+1}``; a step is canonical when

* the ``(q, p)`` block ``Y_y`` is symplectic,
* the ``u`` row satisfies ``W_y = -Y_t^T J_n Y_y``,

which together are equivalent to the whole Jacobian preserving ``J_{n+1}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ExtPhaseError, NonConvergence, NotApplicable
from .integrators import Method, get_method
from .matkernels import _expm, fro, structure_matrix
from .model import ExtendedPoint, LinearHamiltonianProblem, PerturbedOscillator, hamiltonian, initial_point

FD_STEP = 1e-5


@dataclass(frozen=True)
class CanonicityReport:
    """Residuals of the canonicity conditions; ``None`` where not applicable."""

    symplectic_residual_Yy: float
    w_condition_residual: Optional[float]
    extended_residual: Optional[float]

    @property
    def worst(self) -> float:
        vals = [v for v in (self.symplectic_residual_Yy, self.w_condition_residual, self.extended_residual) if v is not None]
        return max(vals)

    def as_dict(self) -> dict:
        return {
            "symplectic_residual_Yy": self.symplectic_residual_Yy,
            "w_condition_residual": self.w_condition_residual,
            "extended_residual": self.extended_residual,
        }


@dataclass(frozen=True)
class OrderEstimate:
    measured_order: float
    step_sizes: tuple
    errors: tuple


def _resolve(method) -> Method:
    return get_method(method) if isinstance(method, str) else method


def extended_map(method: Method, prob: LinearHamiltonianProblem, h: float):
    """The step as a map on flat ``(q, p, t, u)`` arrays."""

    def F(z: np.ndarray) -> np.ndarray:
        d = z.size - 2
        Y, U = method.advance(prob, z[:d].copy(), float(z[d]), float(z[d + 1]), h, True)
        return np.concatenate((Y, [z[d] + h, U]))

    return F


def fd_jacobian(F, z: np.ndarray, fd_step: float = FD_STEP) -> np.ndarray:
    """Central-difference Jacobian; steps are relative for components above 1."""
    z = np.asarray(z, dtype=float)
    cols = []
    for i in range(z.size):
        step = fd_step * max(1.0, abs(z[i]))
        zp, zm = z.copy(), z.copy()
        zp[i] += step
        zm[i] -= step
        cols.append((F(zp) - F(zm)) / (2.0 * step))
    return np.column_stack(cols)


def extended_ordering(n: int) -> np.ndarray:
    """Indices taking ``(q, p, t, u)`` storage order to ``(q, t, p, u)``."""
    q = np.arange(n)
    p = np.arange(n, 2 * n)
    return np.concatenate((q, [2 * n], p, [2 * n + 1]))


def extended_structure_matrix(n: int) -> np.ndarray:
    """Structure matrix of ``dp_i ^ dq^i + du ^ dt`` in the ``(q, t, p, u)`` order.

    Each term ``d(momentum) ^ d(position)`` puts ``+1`` at (position, momentum)
    and ``-1`` at (momentum, position), matching ``J_n`` for ``(q, p)``.
    """
    m = 2 * n + 2
    # positions (q_1..q_n, t) come first, momenta (p_1..p_n, u) after
    pairs = [(i, n + 1 + i) for i in range(n)] + [(n, 2 * n + 1)]
    Jt = np.zeros((m, m))
    for pos, mom in pairs:
        Jt[pos, mom] = 1.0
        Jt[mom, pos] = -1.0
    return Jt


def check_canonicity(method, prob: LinearHamiltonianProblem, z: ExtendedPoint, h: float,
                     fd_step: float = FD_STEP) -> CanonicityReport:
    """Finite-difference check of the canonical-transformation conditions.

    For methods that copy ``u`` only the ``Y_y`` residual is reported.
    """
    method = _resolve(method)
    if not 1e-7 <= fd_step <= 1e-4:
        raise ValueError(f"fd_step must lie in [1e-7, 1e-4], got {fd_step}")
    n = prob.n
    Z = fd_jacobian(extended_map(method, prob, h), z.as_array(), fd_step)
    Jn = structure_matrix(n)
    Yy = Z[: 2 * n, : 2 * n]
    r_sympl = fro(Yy.T @ Jn @ Yy - Jn)
    if not method.descriptor.has_u_update:
        return CanonicityReport(r_sympl, None, None)
    Yt = Z[: 2 * n, 2 * n]
    Wy = Z[2 * n + 1, : 2 * n]
    r_w = float(np.linalg.norm(Wy + Yt @ Jn @ Yy))
    perm = extended_ordering(n)
    Zp = Z[np.ix_(perm, perm)]
    Jt = extended_structure_matrix(n)
    r_ext = fro(Zp.T @ Jt @ Zp - Jt)
    return CanonicityReport(r_sympl, r_w, r_ext)


def check_exponential_exactness(method, A, y, t: float, h: float) -> float:
    """Relative deviation ``||step(y) - exp(hA) y|| / ||y||`` for constant ``A``."""
    method = _resolve(method)
    prob = LinearHamiltonianProblem.constant(A)
    y = np.asarray(y, dtype=float)
    Y, _ = method.advance(prob, y.copy(), t, 0.0, h, False)
    exact = _expm(h * prob.A(t)) @ y
    return float(np.linalg.norm(Y - exact) / np.linalg.norm(y))


def check_symmetry(method, prob: LinearHamiltonianProblem, z: ExtendedPoint, h: float) -> float:
    """``||step_{-h}(step_h(z)) - z||_inf`` over the components the method updates."""
    method = _resolve(method)
    z1 = method.step(prob, z, h).z_next
    z2 = method.step(prob, z1, -h).z_next
    diff = z2.as_array() - z.as_array()
    if not method.descriptor.has_u_update:
        diff = diff[:-1]
    return float(np.max(np.abs(diff)))


def integrate(method, prob: LinearHamiltonianProblem, z0: ExtendedPoint, h: float, steps: int,
              with_u: bool = True) -> ExtendedPoint:
    """Final state after ``steps`` fixed steps."""
    method = _resolve(method)
    y, t, u = z0.y.copy(), z0.t, z0.u
    with_u = with_u and method.descriptor.has_u_update
    for _ in range(steps):
        y, u = method.advance(prob, y, t, u, h, with_u)
        t = t + h
    return ExtendedPoint(y, t, u)


def _steps_for(span: float, h: float) -> int:
    k = round(span / h)
    if k < 1 or abs(span / h - k) > 1e-9 * max(1.0, span / h):
        raise ValueError(f"interval {span} is not a multiple of h={h}")
    return int(k)


def estimate_order(method, prob: LinearHamiltonianProblem, z0: ExtendedPoint, t_end: float, h0: float,
                   reference: str = "lie_gauss", reference_divisor: int = 64) -> OrderEstimate:
    """Convergence order from errors at ``h0, h0/2, h0/4``.

    Errors are max-norm deviations of ``y(t_end)`` from the reference method
    run at ``h0 / reference_divisor``.

    Raises:
        NonConvergence: the errors do not decrease.
    """
    method = _resolve(method)
    span = t_end - z0.t
    hs = (h0, h0 / 2, h0 / 4)
    ref_h = h0 / reference_divisor
    y_ref = integrate(reference, prob, z0, ref_h, _steps_for(span, ref_h), with_u=False).y
    errs = []
    for h in hs:
        y = integrate(method, prob, z0, h, _steps_for(span, h), with_u=False).y
        errs.append(float(np.max(np.abs(y - y_ref))))
    if not (errs[0] > errs[1] > errs[2] > 0):
        raise NonConvergence(f"errors do not decrease: {errs}")
    order = 0.5 * (math.log2(errs[0] / errs[1]) + math.log2(errs[1] / errs[2]))
    return OrderEstimate(order, hs, tuple(errs))


def K_series(method, prob: LinearHamiltonianProblem, z0: ExtendedPoint, steps: int, h: float) -> np.ndarray:
    """``K_k = u_k + H(q_k, p_k, t_k)`` along a trajectory (``steps + 1`` values)."""
    method = _resolve(method)
    if not method.descriptor.has_u_update:
        raise NotApplicable(f"{method.id} has no auxiliary u update")
    y, t, u = z0.y.copy(), z0.t, z0.u
    K = np.empty(steps + 1)
    K[0] = u + hamiltonian(prob, y, t)
    for k in range(1, steps + 1):
        y, u = method.advance(prob, y, t, u, h, True)
        t = t + h
        K[k] = u + hamiltonian(prob, y, t)
    return K


def check_K_conservation(method, prob: LinearHamiltonianProblem, z0: ExtendedPoint, steps: int, h: float) -> float:
    """``max_k |K_k - K_0|`` over the trajectory.

    Raises:
        NotApplicable: the method copies ``u`` instead of updating it.
    """
    K = K_series(method, prob, z0, steps, h)
    return float(np.max(np.abs(K - K[0])))


def trajectory_points(method, prob: LinearHamiltonianProblem, z0: ExtendedPoint, h: float, steps: int,
                      count: int) -> list:
    """``count`` states spread evenly over a trajectory of ``steps`` steps."""
    method = _resolve(method)
    picks = set(np.linspace(0, steps, count).round().astype(int).tolist())
    out = []
    y, t, u = z0.y.copy(), z0.t, z0.u
    with_u = method.descriptor.has_u_update
    for k in range(steps + 1):
        if k in picks:
            out.append(ExtendedPoint(y, t, u))
        if k < steps:
            y, u = method.advance(prob, y, t, u, h, with_u)
            t = t + h
    return out


def random_sp(n: int, rng: np.random.Generator, scale: Optional[float] = None) -> np.ndarray:
    """Random element ``-J S`` of sp(2n) with ``S = (G + G^T) / 2`` for Gaussian ``G``.

    With ``scale`` the result is normalised to that Frobenius norm.
    """
    J = structure_matrix(n)
    G = rng.standard_normal((2 * n, 2 * n))
    # J^{-1} S = -J S is in sp(2n) for symmetric S
    X = -J @ (0.5 * (G + G.T))
    return X if scale is None else X * (scale / fro(X))


# -- standard settings for the property and order surveys -------------------

# the order survey needs a clearly time-dependent coefficient so that the
# leading error term of first-order methods is not masked by O(h^2) terms
ORDER_EPSILON = 0.5
ORDER_ALPHA = 1.0
ORDER_T_END = 10.0
ORDER_H0 = 0.1
# first-order methods only reach their asymptotic regime at smaller steps
ORDER_H0_FIRST = 0.00625

SURVEY_H = 0.3
POSITIVE_TOL = {"canonical": 1e-6, "symmetric": 1e-10, "exponential": 1e-11}
NEGATIVE_MARGIN = {"canonical": 1e-8, "symmetric": 1e-6, "exponential": 1e-6}
ORDER_TOL = 0.2


def order_problem(n: int = 4):
    """The oscillator used for order estimates, with its initial point."""
    prob = PerturbedOscillator(n, ORDER_EPSILON, ORDER_ALPHA)
    q0 = np.arange(1.0, n + 1.0)
    return prob, initial_point(prob, q0, np.roll(q0, 1), 0.0)


def order_h0(method) -> float:
    """Largest step of the three used when estimating ``method``'s order."""
    return ORDER_H0_FIRST if _resolve(method).descriptor.order == 1 else ORDER_H0


@dataclass(frozen=True)
class PropertyCheck:
    """One measured property of one method against its flag."""

    method_id: str
    prop: str
    flagged: bool
    value: float
    passed: bool

    @property
    def line(self) -> str:
        verdict = "ok" if self.passed else "MISMATCH"
        want = "flagged" if self.flagged else "not flagged"
        return f"{self.method_id:<18} {self.prop:<12} {want:<12} {self.value:10.3e}  {verdict}"


def _judge(method_id: str, prop: str, flagged: bool, value: float) -> PropertyCheck:
    ok = value <= POSITIVE_TOL[prop] if flagged else value >= NEGATIVE_MARGIN[prop]
    return PropertyCheck(method_id, prop, flagged, value, ok)


def canonicity_check(method, prob, points, h: float = SURVEY_H) -> PropertyCheck:
    """Worst residual over ``points`` if flagged canonical, else smallest ``Y_y`` residual."""
    method = _resolve(method)
    d = method.descriptor
    if d.canonical:
        value = max(check_canonicity(method, prob, z, h).worst for z in points)
    else:
        value = min(check_canonicity(method, prob, z, h).symplectic_residual_Yy for z in points)
    return _judge(method.id, "canonical", d.canonical, value)


def symmetry_check(method, prob, points, h: float = SURVEY_H) -> PropertyCheck:
    method = _resolve(method)
    vals = [check_symmetry(method, prob, z, h) for z in points]
    d = method.descriptor
    return _judge(method.id, "symmetric", d.symmetric, max(vals) if d.symmetric else min(vals))


def exactness_check(method, matrices, y, h: float = SURVEY_H) -> PropertyCheck:
    method = _resolve(method)
    vals = []
    for A in matrices:
        try:
            vals.append(check_exponential_exactness(method, A, y, 0.0, h))
        except ExtPhaseError:
            # a step that cannot be taken is certainly not exp(hA)
            vals.append(math.inf)
    d = method.descriptor
    return _judge(method.id, "exponential", d.exponential, max(vals) if d.exponential else min(vals))


def order_check(method, prob=None, z0=None) -> tuple:
    """``(OrderEstimate, passed)`` on the standard order problem."""
    method = _resolve(method)
    if prob is None:
        prob, z0 = order_problem()
    est = estimate_order(method, prob, z0, ORDER_T_END, order_h0(method))
    return est, abs(est.measured_order - method.descriptor.order) <= ORDER_TOL
