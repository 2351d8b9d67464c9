"""Runge-Kutta type methods applied to the extended Hamiltonian system.

For ``y' = A(t) y`` the stage times ``T_i = t + c_i h`` are known in advance,
so the ``s * 2n`` stage equations are linear and solved in one LU solve.
The ``u`` component never feeds back into ``(q, p, t)`` and is updated
explicitly from the stages with ``l_i = 1/2 Y_i^T J A'(T_i) Y_i``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import NonConvergence, StageSolveError


@dataclass(frozen=True)
class ButcherTableau:
    name: str
    a: np.ndarray
    b: np.ndarray
    order: int

    def __post_init__(self):
        a = np.array(self.a, dtype=float)
        b = np.array(self.b, dtype=float)
        s = b.size
        if a.shape != (s, s):
            raise ValueError(f"a must be {s}x{s}, got {a.shape}")
        a.flags.writeable = False
        b.flags.writeable = False
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def s(self) -> int:
        return self.b.size

    @property
    def c(self) -> np.ndarray:
        return self.a.sum(axis=1)

    def companion(self) -> "ButcherTableau":
        """Second tableau of the symplectic partitioned pair.

        ``ahat_ij = b_j - a_ji b_j / b_i``, ``bhat = b``; needs every ``b_i != 0``.
        """
        if np.any(self.b == 0):
            raise ValueError("companion tableau needs nonzero weights")
        b = self.b
        ahat = b[None, :] - self.a.T * b[None, :] / b[:, None]
        return ButcherTableau(self.name + "_hat", ahat, b, self.order)


_S3 = math.sqrt(3.0)

GAUSS_LEGENDRE4 = ButcherTableau(
    "gauss_legendre4",
    [[0.25, 0.25 - _S3 / 6.0], [0.25 + _S3 / 6.0, 0.25]],
    [0.5, 0.5],
    order=4,
)
MIDPOINT = ButcherTableau("midpoint", [[0.5]], [1.0], order=2)
LOBATTO_IIIC = ButcherTableau("lobatto3c", [[0.5, -0.5], [0.5, 0.5]], [0.5, 0.5], order=2)
RADAU_IIA = ButcherTableau("radau2a", [[5.0 / 12.0, -1.0 / 12.0], [0.75, 0.25]], [0.75, 0.25], order=3)


def _stage_matrix(tab, A_stages, h):
    s, d = tab.s, A_stages[0].shape[0]
    S = np.eye(s * d)
    for i in range(s):
        for j in range(s):
            if tab.a[i, j]:
                S[i * d : (i + 1) * d, j * d : (j + 1) * d] -= (h * tab.a[i, j]) * A_stages[j]
    return S


def solve_stages_direct(tab, A_stages, y, h):
    """Stage values ``Y_i = y + h sum_j a_ij A(T_j) Y_j`` by one LU solve."""
    s, d = tab.s, y.size
    try:
        stacked = np.linalg.solve(_stage_matrix(tab, A_stages, h), np.tile(y, s))
    except np.linalg.LinAlgError as exc:
        raise StageSolveError("singular stage system") from exc
    return stacked.reshape(s, d)


def solve_stages_fixed_point(tab, A_stages, y, h, tol=1e-14, max_iter=100):
    """Fixed-point iteration for the stage equations; kept for nonlinear use.

    Returns the stage values and the iteration count.
    """
    s = tab.s
    Ys = np.tile(y, (s, 1))
    for it in range(1, max_iter + 1):
        K = np.stack([A_stages[j] @ Ys[j] for j in range(s)])
        new = y[None, :] + h * (tab.a @ K)
        delta = np.max(np.abs(new - Ys))
        Ys = new
        if delta <= tol * max(1.0, np.max(np.abs(Ys))):
            return Ys, it
    raise NonConvergence(f"stage iteration did not converge in {max_iter} iterations")


def rk_extended_advance(tab, prob, y, t, u, h, with_u=True, solver="direct"):
    T = [t + ci * h for ci in tab.c]
    A_stages = [prob.A(Ti) for Ti in T]
    if solver == "direct":
        Ys = solve_stages_direct(tab, A_stages, y, h)
    elif solver == "fixed_point":
        Ys, _ = solve_stages_fixed_point(tab, A_stages, y, h)
    else:
        raise ValueError(f"unknown stage solver {solver!r}")
    Y = y.copy()
    for i in range(tab.s):
        Y += (h * tab.b[i]) * (A_stages[i] @ Ys[i])
    if not with_u:
        return Y, u
    J = prob.J
    U = u
    for i in range(tab.s):
        U += h * tab.b[i] * 0.5 * float(Ys[i] @ (J @ (prob.dA(T[i]) @ Ys[i])))
    return Y, U


def kahan_advance(prob, y, t, u, h, with_u=True):
    """``z+ = z + h(-f(z)/2 + 2 f((z + z+)/2) - f(z+)/2)`` on the extended field."""
    A0, Am, A1 = prob.A(t), prob.A(t + 0.5 * h), prob.A(t + h)
    I = np.eye(y.size)
    lhs = I - h * Am + (0.5 * h) * A1
    rhs = y + h * (Am @ y) - (0.5 * h) * (A0 @ y)
    try:
        Y = np.linalg.solve(lhs, rhs)
    except np.linalg.LinAlgError as exc:
        raise StageSolveError("singular Kahan system") from exc
    if not with_u:
        return Y, u
    J = prob.J

    def g(v, tau):
        return 0.5 * float(v @ (J @ (prob.dA(tau) @ v)))

    ym = 0.5 * (y + Y)
    return Y, u + h * (-0.5 * g(y, t) + 2.0 * g(ym, t + 0.5 * h) - 0.5 * g(Y, t + h))


def symplectic_euler_advance(prob, y, t, u, h, with_u=True):
    """``P = p - h H_q(P, q, t)``, ``Q = q + h H_p(P, q, t)``; ``u`` is copied.

    In block form ``A = [[A11, A12], [A21, A22]]`` this is
    ``(I - h A22) P = p + h A21 q`` followed by ``Q = q + h (A11 q + A12 P)``.
    """
    n = y.size // 2
    A = prob.A(t)
    q, p = y[:n], y[n:]
    A11, A12, A21, A22 = A[:n, :n], A[:n, n:], A[n:, :n], A[n:, n:]
    rhs = p + h * (A21 @ q)
    if np.any(A22):
        try:
            P = np.linalg.solve(np.eye(n) - h * A22, rhs)
        except np.linalg.LinAlgError as exc:
            raise StageSolveError("singular symplectic Euler system") from exc
    else:
        P = rhs
    Q = q + h * (A11 @ q + A12 @ P)
    return np.concatenate((Q, P)), u
