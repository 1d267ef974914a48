"""Smallest generalized eigenpair of a symmetric tridiagonal pencil.

Spectrum slicing: the number of negative pivots in the LDL^T factorization of
``K - sigma M`` equals the number of eigenvalues of ``K v = lambda M v`` below
``sigma`` (Sylvester's law of inertia, M positive definite). Bisection on that
count gives a certified bracket, and shifted inverse iteration from the lower
end of the bracket recovers the eigenvector.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from . import _kernels
from .assembly import SymTriPencil

DEFAULT_TOL = 1e-12
DEFAULT_RESIDUAL_TOL = 1e-8
_EPS = np.finfo(float).eps
MAX_INVERSE_SWEEPS = 50
MAX_BISECTION_STEPS = 400
_NUDGE = 1e-14
_MAX_NUDGES = 8


class EigenSolveError(RuntimeError):
    def __init__(self, message, bracket=None):
        super().__init__(message)
        self.bracket = bracket


@dataclass(frozen=True)
class EigenResult:
    lambda_min: float
    vector: np.ndarray
    residual: float
    iterations: int
    bracket: Tuple[float, float]
    bisection_steps: int = 0


def inertia(pencil: SymTriPencil, sigma: float) -> int:
    """Number of generalized eigenvalues strictly below ``sigma``.

    An exactly zero pivot means ``sigma`` hit an eigenvalue of a leading
    block; the shift is nudged by a relative 1e-14 and the count retried.
    """
    s = float(sigma)
    for _ in range(_MAX_NUDGES + 1):
        count = _kernels.negative_pivot_count(
            pencil.K_off, pencil.row_sums(), pencil.M_diag, pencil.M_off, s)
        if count >= 0:
            return int(count)
        s = s + _NUDGE * abs(s) if s != 0.0 else np.finfo(float).tiny
    raise EigenSolveError(f"zero pivot persists near sigma={sigma!r}")


def apply_K(pencil: SymTriPencil, v: np.ndarray) -> np.ndarray:
    """K @ v written in difference form, accurate for smooth v."""
    Kv = pencil.row_sums() * v
    dv = np.diff(v)
    Kv[:-1] += pencil.K_off * dv
    Kv[1:] -= pencil.K_off * dv
    return Kv


def apply_M(pencil: SymTriPencil, v: np.ndarray) -> np.ndarray:
    Mv = pencil.M_diag * v
    Mv[:-1] += pencil.M_off * v[1:]
    Mv[1:] += pencil.M_off * v[:-1]
    return Mv


def energy(pencil: SymTriPencil, v: np.ndarray) -> float:
    """v^T K v as row-sum terms plus squared differences."""
    dv = np.diff(v)
    return float(np.dot(pencil.row_sums(), v * v) - np.dot(pencil.K_off, dv * dv))


def mass(pencil: SymTriPencil, v: np.ndarray) -> float:
    return float(np.dot(pencil.M_diag, v * v) + 2.0 * np.dot(pencil.M_off, v[:-1] * v[1:]))


def rayleigh(pencil: SymTriPencil, v) -> float:
    """(v^T K v) / (v^T M v)."""
    v = np.asarray(v, dtype=float)
    if v.shape != (pencil.dof_count,):
        raise ValueError(f"vector length {v.shape} does not match {pencil.dof_count} dofs")
    if not np.any(v):
        raise ValueError("Rayleigh quotient of the zero vector")
    return energy(pencil, v) / mass(pencil, v)


def residual_norm(pencil: SymTriPencil, v: np.ndarray, lam: float) -> float:
    Kv = apply_K(pencil, v)
    return float(np.linalg.norm(Kv - lam * apply_M(pencil, v)) / np.linalg.norm(Kv))


def initial_bracket(pencil: SymTriPencil) -> Tuple[float, float]:
    """[0, hi] with hi an upper bound for lambda_min.

    The Gershgorin-type bound max_i(sum_j |K_ij| / M_ii) is tightened to
    min_i K_ii / M_ii, the Rayleigh quotient of a coordinate vector.
    """
    absrow = np.abs(pencil.K_diag).copy()
    absrow[:-1] += np.abs(pencil.K_off)
    absrow[1:] += np.abs(pencil.K_off)
    gersh = float(np.max(absrow / pencil.M_diag))
    hi = min(gersh, float(np.min(pencil.K_diag / pencil.M_diag)))
    return 0.0, hi * (1.0 + 1e-10)


def bisect_smallest(pencil: SymTriPencil, tol: float = DEFAULT_TOL,
                    max_steps: int = MAX_BISECTION_STEPS):
    """Bracket [lo, hi] with inertia(lo) = 0, inertia(hi) >= 1 and width <= tol*hi."""
    lo, hi = initial_bracket(pencil)
    if inertia(pencil, lo) != 0:
        raise EigenSolveError("pencil is not positive definite (eigenvalue below 0)", (lo, hi))
    grow = 0
    while inertia(pencil, hi) < 1:
        hi *= 2.0
        grow += 1
        if grow > 60:
            raise EigenSolveError("could not bracket the smallest eigenvalue", (lo, hi))
    steps = 0
    while hi - lo > tol * hi:
        if steps >= max_steps:
            raise EigenSolveError("bisection did not converge", (lo, hi))
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if inertia(pencil, mid) == 0:
            lo = mid
        else:
            hi = mid
        steps += 1
    return lo, hi, steps


def default_residual_tol(dof_count: int) -> float:
    # K v and lambda M v are O(h) while rounding v costs O(eps/h): the
    # attainable relative residual grows like eps * N^2
    return max(DEFAULT_RESIDUAL_TOL, _EPS * float(dof_count) ** 2)


def smallest_eigenpair(pencil: SymTriPencil, tol: float = DEFAULT_TOL,
                       residual_tol: Optional[float] = None,
                       max_sweeps: int = MAX_INVERSE_SWEEPS) -> EigenResult:
    """Bisection to relative width ``tol``, then inverse iteration.

    ``lambda_min`` is the Rayleigh quotient of the returned (M-normalized)
    vector and is checked against the bisection bracket.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if residual_tol is None:
        residual_tol = default_residual_tol(pencil.dof_count)
    lo, hi, steps = bisect_smallest(pencil, tol)
    if pencil.dof_count == 1:
        v = np.array([1.0 / np.sqrt(pencil.M_diag[0])])
        lam = rayleigh(pencil, v)
        return EigenResult(lam, v, 0.0, 0, (lo, hi), steps)

    # K - lo*M is positive definite (inertia(lo) == 0): no pivoting needed
    d, l = _kernels.ldl_factor(pencil.K_off, pencil.row_sums(),
                               pencil.M_diag, pencil.M_off, lo)
    v = np.ones(pencil.dof_count)
    v /= np.sqrt(mass(pencil, v))
    lam = rayleigh(pencil, v)
    res = np.inf
    for sweep in range(1, max_sweeps + 1):
        w = _kernels.ldl_solve(d, l, apply_M(pencil, v))
        w /= np.sqrt(mass(pencil, w))
        if w[np.argmax(np.abs(w))] < 0:
            w = -w
        new_lam = rayleigh(pencil, w)
        res = residual_norm(pencil, w, new_lam)
        settled = abs(new_lam - lam) <= tol * abs(new_lam)
        v, lam = w, new_lam
        if settled and res <= residual_tol:
            if not lo * (1 - 1e-9) <= lam <= hi * (1 + 1e-9):
                raise EigenSolveError(
                    f"inverse iteration left the bracket: {lam!r} not in [{lo!r}, {hi!r}]", (lo, hi))
            return EigenResult(lam, v, res, sweep, (lo, hi), steps)
    raise EigenSolveError(
        f"inverse iteration did not converge in {max_sweeps} sweeps (residual {res:.3e})", (lo, hi))
