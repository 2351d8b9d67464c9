"""The method zoo and its registry (lookup by string id)."""

from __future__ import annotations

from functools import partial

from ..model import ExtendedPoint, LinearHamiltonianProblem
from .base import Method, MethodDescriptor, StepResult, canonical_u_update, step_matrix
from .composition import triple_jump, triple_jump_weights
from .exponential import (
    exp_noncan_advance,
    exp_sym_noncan_advance,
    lie_euler_advance,
    lie_gauss_advance,
    lie_midpoint_advance,
    projection_advance,
)
from .runge_kutta import (
    GAUSS_LEGENDRE4,
    LOBATTO_IIIC,
    MIDPOINT,
    RADAU_IIA,
    ButcherTableau,
    kahan_advance,
    rk_extended_advance,
    symplectic_euler_advance,
)

__all__ = [
    "ButcherTableau",
    "METHODS",
    "Method",
    "MethodDescriptor",
    "StepResult",
    "TABLE_ONE_IDS",
    "canonical_u_update",
    "get_method",
    "step_matrix",
    "triple_jump",
    "triple_jump_weights",
]


def _rk_method(tab: ButcherTableau, label: str, canonical: bool, symmetric: bool) -> Method:
    desc = MethodDescriptor(tab.name, label, tab.order, canonical, symmetric, exponential=False)
    return Method(desc, partial(rk_extended_advance, tab), stages=tab.s)


LIE_EULER = Method(MethodDescriptor("lie_euler", "Lie-Euler", 1, True, False, True), lie_euler_advance)
LIE_MIDPOINT = Method(MethodDescriptor("lie_midpoint", "Lie-midpoint", 2, True, True, True), lie_midpoint_advance)
LIE_GAUSS = Method(MethodDescriptor("lie_gauss", "Lie-Gauss", 4, True, True, True), lie_gauss_advance, stages=2)
PROJECTION = Method(MethodDescriptor("projection", "Projection", 1, True, False, False), projection_advance)
EXP_NONCAN = Method(
    MethodDescriptor("exp_noncan", "ExpNonCan", 1, False, False, True, has_u_update=False), exp_noncan_advance
)
EXP_SYM_NONCAN = Method(
    MethodDescriptor("exp_sym_noncan", "ExpSymNonCan", 1, False, True, True, has_u_update=False),
    exp_sym_noncan_advance,
)
GAUSS_LEGENDRE = _rk_method(GAUSS_LEGENDRE4, "Gauss-Legendre", canonical=True, symmetric=True)
MIDPOINT_RK = _rk_method(MIDPOINT, "Midpoint", canonical=True, symmetric=True)
LOBATTO3C = _rk_method(LOBATTO_IIIC, "Lobatto IIIC", canonical=False, symmetric=False)
RADAU2A = _rk_method(RADAU_IIA, "Radau IIA", canonical=False, symmetric=False)
KAHAN = Method(MethodDescriptor("kahan", "Kahan", 2, False, True, False), kahan_advance, stages=3)
SYMPLECTIC_EULER = Method(
    MethodDescriptor("symplectic_euler", "Symplectic Euler", 1, True, False, False, has_u_update=False),
    symplectic_euler_advance,
)

METHODS: dict[str, Method] = {
    m.id: m
    for m in (
        LIE_GAUSS,
        triple_jump(LIE_MIDPOINT),
        LIE_MIDPOINT,
        LIE_EULER,
        GAUSS_LEGENDRE,
        triple_jump(MIDPOINT_RK),
        MIDPOINT_RK,
        EXP_SYM_NONCAN,
        triple_jump(KAHAN),
        PROJECTION,
        KAHAN,
        EXP_NONCAN,
        SYMPLECTIC_EULER,
        RADAU2A,
        LOBATTO3C,
    )
}

# rows of the long-time energy-error table, best to worst
TABLE_ONE_IDS = (
    "lie_gauss",
    "lie_midpoint_tj",
    "lie_midpoint",
    "lie_euler",
    "gauss_legendre4",
    "midpoint_tj",
    "midpoint",
    "exp_sym_noncan",
    "kahan_tj",
    "projection",
    "kahan",
    "exp_noncan",
    "symplectic_euler",
    "radau2a",
)


def get_method(method_id: str) -> Method:
    try:
        return METHODS[method_id]
    except KeyError:
        raise KeyError(f"unknown method {method_id!r}; choose from {sorted(METHODS)}") from None


def _stepper(method: Method):
    def step(prob: LinearHamiltonianProblem, z: ExtendedPoint, h: float) -> StepResult:
        return method.step(prob, z, h)

    step.__name__ = f"step_{method.id}"
    step.__doc__ = f"One {method.descriptor.label} step in extended phase space."
    return step


step_lie_euler = _stepper(LIE_EULER)
step_lie_midpoint = _stepper(LIE_MIDPOINT)
step_lie_gauss = _stepper(LIE_GAUSS)
step_projection = _stepper(PROJECTION)
step_exp_noncan = _stepper(EXP_NONCAN)
step_exp_sym_noncan = _stepper(EXP_SYM_NONCAN)
step_kahan = _stepper(KAHAN)
step_symplectic_euler = _stepper(SYMPLECTIC_EULER)


def step_rk_extended(
    prob: LinearHamiltonianProblem, z: ExtendedPoint, h: float, tableau: ButcherTableau, solver: str = "direct"
) -> StepResult:
    """One Runge-Kutta step of the extended system with the given tableau."""
    if h == 0:
        raise ValueError("step size must be nonzero")
    Y, U = rk_extended_advance(tableau, prob, z.y, z.t, z.u, h, True, solver)
    return StepResult(ExtendedPoint(Y, z.t + h, U), {"stages": tableau.s})
