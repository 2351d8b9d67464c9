"""Exponential (Magnus-type) methods ``Y = exp(h X(t)) y``.

The canonical ones carry the auxiliary update

    U = u + h/2 * Y^T J (dexp_{hX} X') Y,

where ``X'`` is the derivative of ``X`` in ``t`` at fixed ``h``. The two
non-canonical variants exponentiate something outside sp(2n) and copy ``u``.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import LogDomainError
from ..matkernels import DEFAULT_TOL, LOG_SERIES_RADIUS, _dexp, _expm, _log_series, _project_sp, fro

SQRT3 = math.sqrt(3.0)
GAUSS_C1 = 0.5 - SQRT3 / 6.0
GAUSS_C2 = 0.5 + SQRT3 / 6.0


def _magnus_advance(prob, y, u, h, X, dX, with_u):
    hX = h * X
    Y = _expm(hX) @ y
    if not with_u:
        return Y, u
    D = _dexp(hX, dX)
    return Y, u + 0.5 * h * float(Y @ (prob.J @ (D @ Y)))


def lie_euler_advance(prob, y, t, u, h, with_u=True):
    return _magnus_advance(prob, y, u, h, prob.A(t), prob.dA(t) if with_u else None, with_u)


def lie_midpoint_advance(prob, y, t, u, h, with_u=True):
    tm = t + 0.5 * h
    return _magnus_advance(prob, y, u, h, prob.A(tm), prob.dA(tm) if with_u else None, with_u)


def lie_gauss_generator(prob, t, h):
    """``X(t) = (A1 + A2)/2 + sqrt(3) h/12 [A2, A1]`` at the Gauss nodes."""
    A1, A2 = prob.A(t + GAUSS_C1 * h), prob.A(t + GAUSS_C2 * h)
    return 0.5 * (A1 + A2) + (SQRT3 * h / 12.0) * (A2 @ A1 - A1 @ A2)


def lie_gauss_advance(prob, y, t, u, h, with_u=True):
    t1, t2 = t + GAUSS_C1 * h, t + GAUSS_C2 * h
    A1, A2 = prob.A(t1), prob.A(t2)
    k = SQRT3 * h / 12.0
    X = 0.5 * (A1 + A2) + k * (A2 @ A1 - A1 @ A2)
    dX = None
    if with_u:
        dA1, dA2 = prob.dA(t1), prob.dA(t2)
        dX = 0.5 * (dA1 + dA2) + k * (dA2 @ A1 - A1 @ dA2 + A2 @ dA1 - dA1 @ A2)
    return _magnus_advance(prob, y, u, h, X, dX, with_u)


def log_series_with_derivative(E: np.ndarray, dE: np.ndarray | None, tol: float = DEFAULT_TOL):
    """Truncated ``log(I + E)`` and its term-wise derivative along ``dE``.

    Raises:
        LogDomainError: ``||E||_F`` exceeds the series guard, i.e. the step is
            too large for the projection method.
    """
    if fro(E) > LOG_SERIES_RADIUS:
        raise LogDomainError(
            f"||h A(t)||_F = {fro(E):.3g} exceeds {LOG_SERIES_RADIUS}; reduce the step size"
        )
    return _log_series(E, tol, dE)


def projection_generator(prob, t, h, with_derivative=True):
    """``X = Pi(log(I + h A(t))) / h`` and ``X'``."""
    E = h * prob.A(t)
    dE = h * prob.dA(t) if with_derivative else None
    L, dL = log_series_with_derivative(E, dE)
    X = _project_sp(L, prob.J) / h
    dX = _project_sp(dL, prob.J) / h if with_derivative else None
    return X, dX


def projection_advance(prob, y, t, u, h, with_u=True):
    X, dX = projection_generator(prob, t, h, with_u)
    return _magnus_advance(prob, y, u, h, X, dX, with_u)


def exp_noncan_exponent(prob, t, h):
    """``h A0 (I + h A0 [A0, A1])`` with ``Ai = A(t + i h)``."""
    A0, A1 = prob.A(t), prob.A(t + h)
    hA0 = h * A0
    return hA0 + hA0 @ (hA0 @ (A0 @ A1 - A1 @ A0))


def exp_sym_noncan_exponent(prob, t, h):
    """``h A_half (I + h A_half [A0, A1])``."""
    A0, A1, Am = prob.A(t), prob.A(t + h), prob.A(t + 0.5 * h)
    hAm = h * Am
    return hAm + hAm @ (hAm @ (A0 @ A1 - A1 @ A0))


def exp_noncan_advance(prob, y, t, u, h, with_u=True):
    return _expm(exp_noncan_exponent(prob, t, h)) @ y, u


def exp_sym_noncan_advance(prob, y, t, u, h, with_u=True):
    return _expm(exp_sym_noncan_exponent(prob, t, h)) @ y, u
