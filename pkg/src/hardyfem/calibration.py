"""Calibrated lower bounds for the discrete Hardy constants.

Relaxing the finite element space to functions that are only linear next to
the singular end(s) gives a problem whose infimum ``mu_h`` is computable:
``mu_h = S + delta_h^2`` where ``delta_h`` (and, radially, a phase
``gamma_h``) solve a small transcendental system. The multiplier ``phi``
solves a Riccati equation with equality, and the closed-form functions
``u_h`` / ``v_h`` attain ``mu_h`` exactly.

Radial phases are stored through ``beta = pi/2 - gamma``. At ``r = 1 - h``
the phase ``gamma + delta*log r`` sits within ``~h*delta`` of ``pi/2``, so
every tangent is evaluated as ``cot(beta - delta*log r)`` to keep full
relative precision there.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy import optimize

from .assembly import hardy_constant

POLE_GUARD = 1e-10
SCAN_POINTS = 4096
DELTA_LO = 1e-6
_PIO2_LO = 6.123233995736766e-17  # pi/2 - float(pi/2)


class CalibrationError(RuntimeError):
    pass


class PoleProximityError(ValueError):
    """A tangent argument came within POLE_GUARD of a pole."""


def _abs_log(h: float) -> float:
    if not 0.0 < h < 1.0:
        raise ValueError(f"mesh size must lie in (0, 1), got {h}")
    return -math.log(h)


def _tan_checked(theta):
    theta = np.asarray(theta, dtype=float)
    if np.any(np.abs(theta) >= math.pi / 2 - POLE_GUARD):
        raise PoleProximityError("tangent argument outside (-pi/2, pi/2) or too close to a pole")
    return np.tan(theta)


def _cot_checked(x):
    # x = pi/2 - theta is carried at full relative precision, so the pole at
    # theta = pi/2 only needs the branch check x > 0
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0.0) or np.any(x >= math.pi - POLE_GUARD):
        raise PoleProximityError("tangent argument outside (-pi/2, pi/2) or too close to a pole")
    return np.cos(x) / np.sin(x)


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


# ---------------------------------------------------------------------------
# one dimension


@dataclass(frozen=True)
class Calibration1D:
    h: float
    delta: float
    lam: float
    residual: float

    @property
    def mu(self) -> float:
        return self.lam


def residual_1d(delta: float, h: float) -> float:
    """1/4 + delta*tan(atan(1/(2 delta)) + delta*log h) - delta^2."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    theta = math.atan(1.0 / (2.0 * delta)) + delta * math.log(h)
    return 0.25 + delta * float(_tan_checked(theta)) - delta * delta


def _pole_delta_1d(h: float) -> float:
    """delta at which the tangent argument at x = h reaches -pi/2."""
    L = _abs_log(h)
    f = lambda d: math.atan(1.0 / (2.0 * d)) - d * L + math.pi / 2
    return optimize.brentq(f, 1e-300, math.pi / L, xtol=1e-300, rtol=4 * np.finfo(float).eps)


def solve_delta_1d(h: float, tol: float = 1e-14) -> Calibration1D:
    """Root of residual_1d in (0, pi/|log h|) by scan then bisection."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    if not 0.0 < h < 1.0:
        raise CalibrationError(f"h too large for calibration (h = {h})")
    d_pole = _pole_delta_1d(h)
    grid = np.linspace(DELTA_LO, d_pole, SCAN_POINTS + 1)[:-1]
    prev_d, prev_r = None, None
    bracket = None
    for d in grid:
        try:
            r = residual_1d(d, h)
        except PoleProximityError:
            break
        if prev_r is not None and prev_r > 0 >= r:
            bracket = (prev_d, d)
            break
        prev_d, prev_r = d, r
    if bracket is None:
        raise CalibrationError(f"h too large for calibration: no sign change for h = {h}")
    delta = optimize.bisect(residual_1d, *bracket, args=(h,), xtol=tol, rtol=4 * np.finfo(float).eps)
    delta = float(delta)
    return Calibration1D(h, delta, 0.25 + delta * delta, residual_1d(delta, h))


def phi_1d(x, delta: float):
    """Multiplier delta*tan(atan(1/(2 delta)) + delta*log x) - 1/2."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0) or np.any(x > 1):
        raise ValueError("phi_1d is defined on (0, 1]")
    theta = math.atan(1.0 / (2.0 * delta)) + delta * np.log(x)
    return _scalar(delta * _tan_checked(theta) - 0.5)


def near_u_1d(x, cal: Calibration1D):
    """Closed-form minimizer over the relaxed space, normalized by u(1) = 1."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or np.any(x > 1):
        raise ValueError("near_u_1d is defined on [0, 1]")
    d, h = cal.delta, cal.h
    a0 = math.atan(1.0 / (2.0 * d))
    A = 1.0 / math.cos(a0)  # u(1) = A cos(a0)
    inner = A * (x / math.sqrt(h)) * math.cos(a0 + d * math.log(h))
    xs = np.maximum(x, h)
    outer = A * np.sqrt(xs) * np.cos(a0 + d * np.log(xs))
    return _scalar(np.where(x <= h, inner, outer))


# ---------------------------------------------------------------------------
# radial, n >= 3


def f_m(h: float, m: int, n: int) -> float:
    """(1/m) * sum_{k<m} (1-h)^(2-n+k)."""
    if m < 1:
        raise ValueError("m must be a positive integer")
    if not 0.0 <= h < 1.0:
        raise ValueError(f"f_m needs 0 <= h < 1, got {h}")
    q = 1.0 - h
    return math.fsum(q ** (2 - n + k) for k in range(m)) / m


def g_n(h: float, n: int) -> float:
    if n < 3:
        raise ValueError("g_n needs n >= 3")
    return f_m(h, n, n) - 2.0 * f_m(h, n - 1, n) + f_m(h, n - 2, n)


@dataclass(frozen=True)
class CalibrationRadial:
    n: int
    h: float
    delta: float
    gamma: float
    lam: float
    residuals: Tuple[float, float]
    gamma_complement: float  # pi/2 - gamma at full relative precision
    method: str = "newton"

    @property
    def mu(self) -> float:
        return self.lam


def _radial_parts(delta, beta, n, h):
    L = _abs_log(h)
    x_h = beta + delta * L
    x_1 = beta - delta * math.log1p(-h)
    return x_h, x_1


def _complement(gamma, gamma_complement):
    if gamma_complement is not None:
        return gamma_complement
    return (math.pi / 2 - gamma) + _PIO2_LO


def residual_radial(delta: float, gamma: float, n: int, h: float, *,
                    gamma_complement: Optional[float] = None) -> Tuple[float, float]:
    """Residuals of the determinant equation and the outer boundary equation.

    ``gamma_complement`` (``pi/2 - gamma``) may be passed to evaluate the
    tangents beyond the precision of a rounded ``gamma``.
    """
    if n < 3:
        raise ValueError("radial calibration needs n >= 3")
    beta = _complement(gamma, gamma_complement)
    x_h, x_1 = _radial_parts(delta, beta, n, h)
    d2 = delta * delta
    lam = (n - 2) ** 2 / 4.0 + d2
    r1 = ((n * n - 2 * n) / 2.0 - 2.0 * d2) * (n * n / 4.0 - d2 + n * delta * float(_cot_checked(x_h))) \
        - (n - 2) / (n - 1) * (n * n / 4.0 + d2) ** 2
    r2 = (n - 2) / 2.0 + delta * float(_cot_checked(x_1)) \
        - (f_m(h, n, n) - g_n(h, n) * lam) / h
    return r1, r2


def _jacobian(delta, beta, n, h):
    L = _abs_log(h)
    x_h, x_1 = _radial_parts(delta, beta, n, h)
    cot_h, cot_1 = 1.0 / math.tan(x_h), 1.0 / math.tan(x_1)
    csc2_h, csc2_1 = 1.0 + cot_h**2, 1.0 + cot_1**2
    d2 = delta * delta
    P = (n * n - 2 * n) / 2.0 - 2.0 * d2
    Q = n * n / 4.0 - d2 + n * delta * cot_h
    dQ_dd = -2.0 * delta + n * cot_h - n * delta * csc2_h * L
    dr1_dd = -4.0 * delta * Q + P * dQ_dd - (n - 2) / (n - 1) * 4.0 * delta * (n * n / 4.0 + d2)
    dr1_db = -P * n * delta * csc2_h
    dr2_dd = cot_1 + delta * csc2_1 * math.log1p(-h) + 2.0 * delta * g_n(h, n) / h
    dr2_db = -delta * csc2_1
    return np.array([[dr1_dd, dr1_db], [dr2_dd, dr2_db]])


def _initial_guess(n, h):
    L = _abs_log(h)
    d0 = math.pi / (8.0 * (n - 1) / (n * (n - 2)) + h + L)
    gamma0 = -math.atan(n * (n - 2) / (8.0 * (n - 1) * d0)) + d0 * L
    return d0, (math.pi / 2 - gamma0) + _PIO2_LO


def _scaled_norm(r, h):
    return max(abs(r[0]), abs(r[1]) * h)


def _newton(n, h, delta, beta, damped, max_iter=60, tol=1e-13):
    try:
        r = residual_radial(delta, None, n, h, gamma_complement=beta)
    except PoleProximityError:
        return None
    for _ in range(max_iter):
        if _scaled_norm(r, h) <= tol:
            return delta, beta, r
        J = _jacobian(delta, beta, n, h)
        try:
            step = np.linalg.solve(J, -np.asarray(r))
        except np.linalg.LinAlgError:
            return None
        t = 1.0
        while True:
            nd, nb = delta + t * step[0], beta + t * step[1]
            try:
                if nd <= 0:
                    raise PoleProximityError
                nr = residual_radial(nd, None, n, h, gamma_complement=nb)
                ok = (not damped) or _scaled_norm(nr, h) < _scaled_norm(r, h)
            except PoleProximityError:
                ok = False
            if ok:
                break
            if not damped:
                return None
            t *= 0.5
            if t < 1e-12:
                return None
        if not np.all(np.isfinite(nr)):
            return None
        delta, beta, r = nd, nb, nr
    return (delta, beta, r) if _scaled_norm(r, h) <= 1e3 * tol else None


def _reduced_phases(delta, n, h):
    """Phases x(h), x(1-h) solving each equation separately for the tangent."""
    d2 = delta * delta
    lam = (n - 2) ** 2 / 4.0 + d2
    P = (n * n - 2 * n) / 2.0 - 2.0 * d2
    T_h = ((n - 2) / (n - 1) * (n * n / 4.0 + d2) ** 2 / P - n * n / 4.0 + d2) / (n * delta)
    T_1 = ((f_m(h, n, n) - g_n(h, n) * lam) / h - (n - 2) / 2.0) / delta
    return math.atan2(1.0, T_h), math.atan2(1.0, T_1)


def _scan_solve(n, h):
    """Eliminate the phase: x(h) - x(1-h) = delta*log((1-h)/h), then bisect."""
    L = _abs_log(h)
    span = L + math.log1p(-h)

    def G(d):
        xh, x1 = _reduced_phases(d, n, h)
        return xh - x1 - d * span

    d_max = min(math.sqrt(n * (n - 2)) / 2.0, math.pi / span) * (1 - 1e-12)
    grid = np.linspace(DELTA_LO, d_max, SCAN_POINTS)
    vals = [G(d) for d in grid]
    for i in range(len(grid) - 1):
        if vals[i] > 0 >= vals[i + 1]:
            delta = optimize.brentq(G, grid[i], grid[i + 1], xtol=1e-16, rtol=4 * np.finfo(float).eps)
            _, x1 = _reduced_phases(delta, n, h)
            return delta, x1 + delta * math.log1p(-h)
    raise CalibrationError(f"no root of the radial calibration system for n={n}, h={h}")


def solve_radial(n: int, h: float, tol: float = 1e-10) -> CalibrationRadial:
    """Solve for (delta_h, gamma_h): Newton from the asymptotic guess, then
    damped Newton, then a scan of the phase-eliminated equation."""
    if n < 3:
        raise ValueError("radial calibration needs n >= 3")
    if not 0.0 < h < 0.5:
        raise CalibrationError(f"h too large for calibration (h = {h})")
    d0, b0 = _initial_guess(n, h)
    method = "newton"
    sol = _newton(n, h, d0, b0, damped=False)
    if sol is None:
        method = "damped-newton"
        sol = _newton(n, h, d0, b0, damped=True)
    if sol is None:
        method = "scan"
        d, b = _scan_solve(n, h)
        sol = _newton(n, h, d, b, damped=True) or (d, b, residual_radial(d, None, n, h, gamma_complement=b))
    delta, beta, r = sol
    delta, beta = float(delta), float(beta)
    # the outer equation has terms of size 1/h, so its rounding floor is ~eps/h
    tol2 = max(tol, 4096 * np.finfo(float).eps / h)
    if abs(r[0]) > tol or abs(r[1]) > tol2 or n * (n - 2) - 4 * delta * delta < 0:
        raise CalibrationError(
            f"radial calibration failed for n={n}, h={h}: residuals {r[0]:.3e}, {r[1]:.3e}")
    return CalibrationRadial(n=n, h=h, delta=delta, gamma=math.pi / 2 - beta,
                             lam=hardy_constant(n) + delta * delta,
                             residuals=(float(r[0]), float(r[1])),
                             gamma_complement=beta, method=method)


def phi_radial(r, cal: CalibrationRadial):
    """(n-2)/2 + delta*tan(gamma + delta*log r)."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0) or np.any(r > 1):
        raise ValueError("phi_radial is defined on (0, 1]")
    x = cal.gamma_complement - cal.delta * np.log(r)
    return _scalar((cal.n - 2) / 2.0 + cal.delta * _cot_checked(x))


def matrix_M(n: int, h: float, cal: CalibrationRadial) -> np.ndarray:
    lam = cal.lam
    phi_h = phi_radial(h, cal)
    off = (n - 2) * (1 - n - lam)
    return np.array([[(n - 1) * (n - 2) - 2 * lam, off],
                     [off, (n - 1) * (n - 2) * (1 - lam + n * phi_h)]])


def _psi(r, cal):
    # r^{-(n-2)/2} cos(gamma + delta log r), with cos(gamma + .) = sin(beta - .)
    return r ** (-(cal.n - 2) / 2.0) * np.sin(cal.gamma_complement - cal.delta * np.log(r))


def inner_slope_ratio(cal: CalibrationRadial) -> float:
    """v(0)/v(h) for the closed-form radial minimizer."""
    n, lam = cal.n, cal.lam
    return -(n - 2) * (1 - n - lam) / ((n - 1) * (n - 2) - 2 * lam)


def near_v_radial(r, cal: CalibrationRadial):
    """Closed-form radial minimizer (linear, Psi, linear), normalized by v(0) = 1."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0) or np.any(r > 1):
        raise ValueError("near_v_radial is defined on [0, 1]")
    h = cal.h
    ratio = inner_slope_ratio(cal)
    psi_h = float(_psi(h, cal))
    psi_1 = float(_psi(1.0 - h, cal))
    A = 1.0 / (ratio * psi_h)
    mid = A * _psi(np.clip(r, h, 1.0 - h), cal)
    left = A / h * (r + ratio * (h - r)) * psi_h
    right = A / h * (1.0 - r) * psi_1
    out = np.where(r <= h, left, np.where(r >= 1.0 - h, right, mid))
    return _scalar(out)


def mu_lower_bound(n: int, h: float) -> float:
    """Exact infimum over the relaxed space: S + delta_h^2."""
    if n == 1:
        return solve_delta_1d(h).lam
    return solve_radial(n, h).lam
