import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hardyfem.assembly import assemble_pencil, hardy_constant
from hardyfem.calibration import (CalibrationError, PoleProximityError, f_m, g_n,
                                  inner_slope_ratio, matrix_M, mu_lower_bound, near_u_1d,
                                  near_v_radial, phi_1d, phi_radial, residual_1d,
                                  residual_radial, solve_delta_1d, solve_radial)
from hardyfem.eigensolve import smallest_eigenpair
from hardyfem.mesh import uniform_mesh
from oracles import near_u_rayleigh, near_v_rayleigh


def lead_1d(h):
    return (6 - math.log(h)) / math.pi


def lead_radial(n, h):
    return (8 * (n - 1) / (n * (n - 2)) + h - math.log(h)) / math.pi


# ---------------------------------------------------------------- 1D


def test_residual_small_delta_limit_unit_h():
    # at h = 1 the log term vanishes and the limit is 1/4 + 1/2
    d = 1e-5
    assert residual_1d(d, 1.0) == pytest.approx(0.75 - d * d, abs=1e-10)


@pytest.mark.parametrize("h", [1e-2, 1e-3, 1e-6])
def test_residual_small_delta_limit(h):
    # delta*tan(pi/2 - 2 delta + delta log h) -> 1/(2 + |log h|)
    L = -math.log(h)
    assert residual_1d(1e-7, h) == pytest.approx(0.25 + 1 / (2 + L), abs=1e-6)


def test_residual_sign_change_scan():
    h = 1e-3
    L = -math.log(h)
    vals = []
    for d in np.linspace(1e-6, math.pi / L, 10000)[:-1]:
        try:
            vals.append(residual_1d(d, h))
        except PoleProximityError:
            break
    vals = np.array(vals)
    assert vals[0] > 0 and np.any(vals < 0)


def test_residual_rejects():
    with pytest.raises(ValueError):
        residual_1d(0.0, 1e-3)
    # argument pushed past -pi/2
    with pytest.raises(PoleProximityError):
        residual_1d(0.9 * math.pi / -math.log(1e-3), 1e-3)


def test_solve_1d_bracket():
    cal = solve_delta_1d(1e-3)
    assert 0.20 < cal.delta < 0.28
    assert abs(cal.residual) <= 1e-12
    assert cal.lam == 0.25 + cal.delta**2
    # independent scan + bisection oracle
    f = lambda d: 0.25 + d * math.tan(math.atan(1 / (2 * d)) + d * math.log(1e-3)) - d * d
    lo, hi = 0.20, 0.28
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if f(mid) > 0 else (lo, mid)
    assert cal.delta == pytest.approx(lo, abs=1e-12)


def test_solve_1d_asymptotic_ratio():
    cal = solve_delta_1d(1e-8)
    assert 0.9 < cal.delta * lead_1d(1e-8) < 1.1


@settings(max_examples=30, deadline=None)
@given(st.floats(-30, -0.05))
def test_solve_1d_invariants(logh):
    h = math.exp(logh)
    cal = solve_delta_1d(h)
    assert abs(cal.residual) <= 1e-12
    assert 0 < cal.delta < math.pi / -math.log(h)


@pytest.mark.parametrize("h", [1.0, 2.0, 0.0])
def test_solve_1d_rejects(h):
    with pytest.raises(CalibrationError):
        solve_delta_1d(h)


def test_phi_1d():
    for d in (0.05, 0.2, 0.7):
        assert phi_1d(1.0, d) == pytest.approx(0.0, abs=1e-15)
    cal = solve_delta_1d(1e-3)
    assert 1 - cal.lam + phi_1d(cal.h, cal.delta) == pytest.approx(0, abs=1e-10)


@pytest.mark.parametrize("x", [0.1, 0.5, 0.9])
def test_phi_1d_riccati(x):
    d = solve_delta_1d(1e-3).delta
    e = 1e-6
    dphi = (phi_1d(x + e, d) - phi_1d(x - e, d)) / (2 * e)
    phi = phi_1d(x, d)
    assert x * dphi - phi - (0.25 + d * d) - phi**2 == pytest.approx(0, abs=1e-6)


def test_phi_riccati_random():
    rng = np.random.default_rng(5)
    d1 = solve_delta_1d(1e-3).delta
    cal = solve_radial(4, 1e-3)
    e = 1e-6
    for x in rng.uniform(0.05, 0.95, 100):
        dphi = (phi_1d(x + e, d1) - phi_1d(x - e, d1)) / (2 * e)
        assert abs(x * dphi - phi_1d(x, d1) - (0.25 + d1**2) - phi_1d(x, d1) ** 2) <= 1e-5
        n = cal.n
        F = lambda r: r ** (n - 2) * phi_radial(r, cal)
        lhs = (F(x + e) - F(x - e)) / (2 * e) - cal.lam * x ** (n - 3)
        assert abs(lhs - x ** (n - 3) * phi_radial(x, cal) ** 2) <= 1e-5


def test_near_u_1d_shape():
    cal = solve_delta_1d(1e-3)
    assert near_u_1d(0.0, cal) == 0.0
    assert near_u_1d(1.0, cal) == pytest.approx(1.0, abs=1e-15)
    h = cal.h
    assert near_u_1d(h * (1 - 1e-15), cal) == pytest.approx(near_u_1d(h * (1 + 1e-15), cal), abs=1e-14)
    with pytest.raises(ValueError):
        near_u_1d(1.5, cal)


@pytest.mark.parametrize("h", [1e-2, 1e-3, 1e-4])
def test_near_u_1d_rayleigh(h):
    cal = solve_delta_1d(h)
    assert near_u_rayleigh(cal) == pytest.approx(cal.lam, abs=1e-8)


# ---------------------------------------------------------------- f_m, g_n


def test_f_m_values():
    for m in (1, 2, 5):
        for n in (3, 4, 5):
            assert f_m(0.0, m, n) == 1.0
    assert f_m(0.5, 1, 3) == 2.0
    assert f_m(0.25, 2, 3) == pytest.approx(7 / 6, rel=1e-15)
    with pytest.raises(ValueError):
        f_m(1.0, 2, 3)


def test_g_n_values():
    for n in (3, 4, 5):
        assert g_n(0.0, n) == 0.0
    expected = f_m(0.5, 3, 3) - 2 * f_m(0.5, 2, 3) + f_m(0.5, 1, 3)
    assert g_n(0.5, 3) == pytest.approx(expected, rel=1e-15)
    assert g_n(0.5, 3) == pytest.approx(0.5**2 / (3 * 0.5), rel=1e-14)
    with pytest.raises(ValueError):
        g_n(0.1, 1)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_g_n_vanishes_linearly(n):
    a, b = g_n(1e-3, n), g_n(1e-4, n)
    # ratio below the linear rate of 10 means the slope g/h stays finite
    assert 0 < b < a and (b / 1e-4) <= (a / 1e-3) * 1.01


# ---------------------------------------------------------------- radial


def test_residual_radial_n3_coefficients():
    d, h = 0.3, 0.5
    # gamma = delta*log 2 zeroes both tangents at h = 1/2
    r1, r2 = residual_radial(d, d * math.log(2), 3, h)
    assert r1 == pytest.approx((1.5 - 2 * d * d) * (9 / 4 - d * d) - 0.5 * (9 / 4 + d * d) ** 2, abs=1e-13)
    assert r2 == pytest.approx(0.5 - (f_m(h, 3, 3) - g_n(h, 3) * (0.25 + d * d)) / h, abs=1e-13)


def test_residual_radial_grid_encloses_root():
    n, h = 3, 1e-3
    ds = np.linspace(0.19, 0.28, 41)
    cal = solve_radial(n, h)
    vals = []
    for d in ds:
        # second equation solved for the phase; the first then changes sign over delta
        T1 = ((f_m(h, n, n) - g_n(h, n) * ((n - 2) ** 2 / 4 + d * d)) / h - (n - 2) / 2) / d
        beta = math.atan2(1.0, T1) + d * math.log1p(-h)
        vals.append(residual_radial(d, math.pi / 2 - beta, n, h, gamma_complement=beta)[0])
    vals = np.array(vals)
    assert np.any(vals > 0) and np.any(vals < 0)
    assert ds[np.argmax(vals < 0) - 1] <= cal.delta <= ds[np.argmax(vals < 0)]


@pytest.mark.parametrize("n", [3, 4, 5])
@pytest.mark.parametrize("h", [1e-2, 1e-3])
def test_solve_radial_invariants(n, h):
    cal = solve_radial(n, h)
    assert max(map(abs, cal.residuals)) <= 1e-10
    assert n * (n - 2) - 4 * cal.delta**2 >= 0
    assert cal.lam == hardy_constant(n) + cal.delta**2
    M = matrix_M(n, h, cal)
    assert abs(np.linalg.det(M)) <= 1e-8 * np.linalg.norm(M, 2)
    ev = np.linalg.eigvalsh(M)
    assert ev.min() >= -1e-8 * np.trace(M)
    assert M[0, 0] > 0
    assert cal.gamma == pytest.approx(math.pi / 2 - cal.gamma_complement, abs=1e-15)


def test_solve_radial_bracket():
    assert 0.19 < solve_radial(3, 1e-3).delta < 0.28


@pytest.mark.parametrize("n", [3, 4, 5])
def test_solve_radial_asymptotic_ratio(n):
    cal = solve_radial(n, 1e-6)
    assert 0.9 < cal.delta * lead_radial(n, 1e-6) < 1.1


def test_solve_radial_rejects():
    with pytest.raises(ValueError):
        solve_radial(1, 1e-3)
    with pytest.raises(CalibrationError):
        solve_radial(3, 0.7)


def test_phi_radial_relations():
    cal = solve_radial(3, 1e-3)
    r = 0.37
    assert phi_radial(r, cal) - 0.5 == pytest.approx(cal.delta * math.tan(cal.gamma + cal.delta * math.log(r)),
                                                    rel=1e-12)
    h = cal.h
    assert phi_radial(1 - h, cal) == pytest.approx(0.5 + cal.delta * math.tan(cal.gamma + cal.delta * math.log1p(-h)),
                                                  rel=1e-6)


@pytest.mark.parametrize("r", [0.2, 0.5, 0.8])
@pytest.mark.parametrize("n", [3, 4, 5])
def test_phi_radial_riccati(n, r):
    # (r^{n-2} phi)' - lambda r^{n-3} = r^{n-3} phi^2
    cal = solve_radial(n, 1e-3)
    e = 1e-6
    F = lambda s: s ** (n - 2) * phi_radial(s, cal)
    lhs = (F(r + e) - F(r - e)) / (2 * e) - cal.lam * r ** (n - 3)
    assert lhs == pytest.approx(r ** (n - 3) * phi_radial(r, cal) ** 2, abs=1e-6)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_near_v_shape(n):
    cal = solve_radial(n, 1e-2)
    h = cal.h
    assert near_v_radial(0.0, cal) == pytest.approx(1.0, abs=1e-14)
    assert near_v_radial(1.0, cal) == 0.0
    assert near_v_radial(0.0, cal) / near_v_radial(h, cal) == pytest.approx(inner_slope_ratio(cal), rel=1e-13)
    for x in (h, 1 - h):
        assert near_v_radial(x * (1 - 1e-14), cal) == pytest.approx(near_v_radial(x * (1 + 1e-14), cal),
                                                                    rel=1e-10, abs=1e-14)


@pytest.mark.parametrize("n", [3, 4, 5])
@pytest.mark.parametrize("h", [1e-2, 1e-3])
def test_near_v_rayleigh(n, h):
    cal = solve_radial(n, h)
    assert near_v_rayleigh(cal) == pytest.approx(cal.lam, abs=1e-8)


def test_mu_lower_bound_sandwich():
    mu1 = mu_lower_bound(1, 1e-4)
    assert 0.25 < mu1 < smallest_eigenpair(assemble_pencil(uniform_mesh(10**4), 1)).lambda_min
    mu3 = mu_lower_bound(3, 1e-3)
    assert mu3 < smallest_eigenpair(assemble_pencil(uniform_mesh(10**3), 3)).lambda_min


@pytest.mark.parametrize("n", [1, 3, 4, 5])
@pytest.mark.parametrize("N", [10, 100, 1000])
def test_strict_sandwich(n, N):
    mu = mu_lower_bound(n, 1 / N)
    assert mu < smallest_eigenpair(assemble_pencil(uniform_mesh(N), n)).lambda_min


@pytest.mark.parametrize("n", [1, 3, 4, 5])
def test_asymptotic_ratio_tail(n):
    hs = np.logspace(-2, -8, 13)
    if n == 1:
        r = [solve_delta_1d(h).delta * lead_1d(h) for h in hs]
    else:
        r = [solve_radial(n, h).delta * lead_radial(n, h) for h in hs]
    tail = np.abs(np.array(r[-5:]) - 1)
    assert np.all(np.diff(tail) < 0)
    assert tail[-1] < 0.1
