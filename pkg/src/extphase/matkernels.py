"""Dense matrix kernels for small real matrices.

Everything here works on plain 2-D ``numpy`` arrays. The public functions
validate their arguments; the underscored variants skip validation and are
what the integrators call inside their step loops.

The Frobenius norm is used wherever a spectral-norm bound is meant. It
over-estimates the spectral norm, so every guard based on it is conservative.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from numba import njit

from .errors import DimensionError, InvalidMatrix, LogDomainError, SeriesDivergence

DEFAULT_TOL = 1e-13

# mat_exp scales until the Frobenius norm is at most this, then squares back
EXP_SCALE_TARGET = 0.5
_EXP_MAX_TERMS = 40

LOG_SERIES_RADIUS = 0.9
_LOG_MAX_TERMS = 2000
_LOG_MAX_SQRTS = 16
_DB_MAX_ITER = 100

DEXP_MAX_TERMS = 25
DEXP_NORM_GUARD = 5.0


def fro(X: np.ndarray) -> float:
    """Frobenius norm, cheaper than ``np.linalg.norm`` for tiny arrays."""
    flat = X.ravel()
    return math.sqrt(float(np.dot(flat, flat)))


def as_matrix(X, name: str = "matrix") -> np.ndarray:
    """Return ``X`` as a finite square float array or raise :class:`InvalidMatrix`."""
    M = np.asarray(X, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] == 0:
        raise InvalidMatrix(f"{name} must be a non-empty square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise InvalidMatrix(f"{name} has non-finite entries")
    return M


def _same_dims(X: np.ndarray, Y: np.ndarray) -> None:
    if X.shape != Y.shape:
        raise DimensionError(f"dimension mismatch: {X.shape} vs {Y.shape}")


@lru_cache(maxsize=None)
def structure_matrix(n: int) -> np.ndarray:
    """The canonical structure matrix ``J_n = [[0, I_n], [-I_n, 0]]``.

    The returned array is shared and read-only.
    """
    if n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    J = np.zeros((2 * n, 2 * n))
    J[:n, n:] = np.eye(n)
    J[n:, :n] = -np.eye(n)
    J.flags.writeable = False
    return J


def _structure_for(X: np.ndarray, J: np.ndarray | None) -> np.ndarray:
    d = X.shape[0]
    if J is None:
        if d % 2:
            raise DimensionError(f"odd dimension {d} has no symplectic structure")
        return structure_matrix(d // 2)
    J = np.asarray(J, dtype=float)
    if J.shape != X.shape:
        raise DimensionError(f"structure matrix shape {J.shape} does not match {X.shape}")
    return J


# -- exponential ------------------------------------------------------------


@njit(cache=True)
def _expm_core(X, tol):
    d = X.shape[0]
    nrm = np.sqrt(np.sum(X * X))
    s = 0
    if nrm > EXP_SCALE_TARGET:
        s = int(np.ceil(np.log2(nrm / EXP_SCALE_TARGET)))
    Xs = X / (2.0**s)
    # squaring multiplies the relative error by roughly 2**s
    term_tol = max(tol / (2.0**s), 1e-17)
    E = np.eye(d)
    term = np.eye(d)
    for k in range(1, _EXP_MAX_TERMS + 1):
        term = (term @ Xs) / k
        E += term
        if np.sqrt(np.sum(term * term)) <= term_tol:
            break
    for _ in range(s):
        E = E @ E
    return E


def _expm(X: np.ndarray, tol: float = DEFAULT_TOL) -> np.ndarray:
    return _expm_core(np.ascontiguousarray(X, dtype=np.float64), tol)


def mat_exp(X, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Matrix exponential by scaling and squaring around a Taylor core.

    ``X`` is scaled by ``2**-s`` until its Frobenius norm is at most 0.5, the
    Taylor series is summed until a term drops below ``tol * 2**-s`` and the
    result is squared ``s`` times. ``mat_exp(0)`` is exactly the identity.

    Raises:
        InvalidMatrix: ``X`` is not square or not finite.
    """
    X = as_matrix(X, "X")
    if not 0 < tol <= 1e-6:
        raise ValueError(f"tol must lie in (0, 1e-6], got {tol}")
    E = _expm(X, tol)
    if not np.all(np.isfinite(E)):
        raise InvalidMatrix("matrix exponential overflowed")
    return E


# -- logarithm --------------------------------------------------------------


@njit(cache=True)
def _log_series_core(E, dE, with_derivative, tol, max_terms):
    L = E.copy()
    dL = dE.copy()
    power = E.copy()
    dpower = dE.copy()
    for k in range(2, max_terms + 1):
        if with_derivative:
            dpower = dpower @ E + power @ dE
        power = power @ E
        sign = 1.0 if k % 2 else -1.0
        L += (sign / k) * power
        done = np.sqrt(np.sum(power * power)) / k <= tol
        if with_derivative:
            dL += (sign / k) * dpower
            done = done and np.sqrt(np.sum(dpower * dpower)) / k <= tol
        if done:
            return L, dL, k
    return L, dL, -1


def _log_series(E: np.ndarray, tol: float, dE: np.ndarray | None = None):
    """Mercator series for ``log(I + E)`` and optionally its derivative along ``dE``.

    ``d(E^k) = d(E^(k-1)) E + E^(k-1) dE`` sums every placement of ``dE`` with
    one product per term; both series share the truncation index.
    """
    E = np.ascontiguousarray(E, dtype=np.float64)
    with_derivative = dE is not None
    dE_arr = np.ascontiguousarray(dE, dtype=np.float64) if with_derivative else np.zeros_like(E)
    L, dL, k = _log_series_core(E, dE_arr, with_derivative, tol, _LOG_MAX_TERMS)
    if k < 0:
        raise SeriesDivergence(f"logarithm series did not reach {tol:g} in {_LOG_MAX_TERMS} terms")
    return L, (dL if with_derivative else None)


def sqrtm_denman_beavers(B, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Principal square root via the Denman-Beavers iteration."""
    B = as_matrix(B, "B")
    d = B.shape[0]
    Y, Z = B.copy(), np.eye(d)
    for _ in range(_DB_MAX_ITER):
        try:
            Yi, Zi = np.linalg.inv(Y), np.linalg.inv(Z)
        except np.linalg.LinAlgError as exc:
            raise LogDomainError("square-root iteration hit a singular matrix") from exc
        Y_next = 0.5 * (Y + Zi)
        Z = 0.5 * (Z + Yi)
        delta = fro(Y_next - Y)
        Y = Y_next
        if delta <= tol * max(1.0, fro(Y)):
            return Y
    raise LogDomainError("square-root iteration did not converge")


def mat_log_near_identity(B, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Logarithm of a matrix close to the identity.

    Uses the Mercator series ``log(I + E) = sum (-1)**(k+1) E**k / k`` while
    ``||E||_F <= 0.9``. Further out, square roots are taken (inverse scaling)
    until the guard holds and the result is scaled back by ``2**m``.

    Raises:
        LogDomainError: the square-root iteration fails, or ``B`` is too far
            from the identity to be brought inside the guard.
    """
    B = as_matrix(B, "B")
    d = B.shape[0]
    I = np.eye(d)
    scale = 1.0
    for _ in range(_LOG_MAX_SQRTS + 1):
        E = B - I
        if fro(E) <= LOG_SERIES_RADIUS:
            L, _ = _log_series(E, tol / scale)
            return scale * L
        B = sqrtm_denman_beavers(B, tol)
        scale *= 2.0
    raise LogDomainError(f"matrix too far from the identity after {_LOG_MAX_SQRTS} square roots")


# -- Lie algebra helpers ----------------------------------------------------


def commutator(X, Y) -> np.ndarray:
    """Return ``XY - YX``."""
    X = as_matrix(X, "X")
    Y = as_matrix(Y, "Y")
    _same_dims(X, Y)
    return X @ Y - Y @ X


@njit(cache=True)
def _dexp_core(X, Y, tol, max_terms):
    out = Y.copy()
    term = Y.copy()
    # tail is dominated by the last term once factorial decay has set in
    stop = tol * max(1.0, np.sqrt(np.sum(Y * Y)))
    for k in range(1, max_terms):
        term = (X @ term - term @ X) / (k + 1)
        out += term
        if np.sqrt(np.sum(term * term)) < stop:
            return out, True
    return out, False


def _dexp(X: np.ndarray, Y: np.ndarray, tol: float = DEFAULT_TOL) -> np.ndarray:
    out, ok = _dexp_core(
        np.ascontiguousarray(X, dtype=np.float64), np.ascontiguousarray(Y, dtype=np.float64), tol, DEXP_MAX_TERMS
    )
    if not ok:
        raise SeriesDivergence(f"dexp series did not converge in {DEXP_MAX_TERMS} terms")
    return out


def dexp(X, Y, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Derivative of the exponential, ``sum_k ad_X^k(Y) / (k+1)!``.

    With this convention ``d/dt exp(X(t)) = dexp(X, X'(t)) @ exp(X(t))``.
    At most 25 terms are summed; the series stops early once a term falls
    below ``tol * max(1, ||Y||_F)``.

    Raises:
        SeriesDivergence: ``||X||_F > 5`` or the term cap was reached first.
    """
    X = as_matrix(X, "X")
    Y = as_matrix(Y, "Y")
    _same_dims(X, Y)
    if fro(X) > DEXP_NORM_GUARD:
        raise SeriesDivergence(f"||X||_F = {fro(X):.3g} exceeds the dexp guard {DEXP_NORM_GUARD}")
    return _dexp(X, Y, tol)


def project_sp(X, J=None) -> np.ndarray:
    """Linear projection onto sp(2n): ``(X + J X^T J) / 2``."""
    X = as_matrix(X, "X")
    J = _structure_for(X, J)
    return 0.5 * (X + J @ X.T @ J)


def _project_sp(X: np.ndarray, J: np.ndarray) -> np.ndarray:
    return 0.5 * (X + J @ X.T @ J)


def symplectic_residual(M, J=None) -> float:
    """``||M^T J M - J||_F``; zero exactly when ``M`` is in Sp(2n)."""
    M = as_matrix(M, "M")
    J = _structure_for(M, J)
    return fro(M.T @ J @ M - J)


def sp_residual(X, J=None) -> float:
    """``||J X + X^T J||_F``; zero exactly when ``X`` is in sp(2n)."""
    X = as_matrix(X, "X")
    J = _structure_for(X, J)
    return fro(J @ X + X.T @ J)
