"""Explicit near-minimizers and the interpolation upper bound.

The function ``v_eps`` vanishes on ``[0, eps]`` and behaves like the
singular Hardy extremal on ``(eps, 1]``; its Rayleigh quotient is
``S + pi^2/|log eps|^2``. Choosing ``eps = m h`` on a mesh node means the
nodal interpolant is exact on ``[0, eps]``, so the discrete Rayleigh quotient
of the interpolant is a computable upper bound on the discrete constant.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np

from .assembly import assemble_pencil, boundary_condition, check_dimension, free_nodes
from .eigensolve import rayleigh
from .mesh import Mesh1D, uniform_mesh

# nodes within this relative distance of the cutoff are treated as the cutoff
_CUTOFF_SLACK = 1e-13


class ScheduleError(ValueError):
    pass


@dataclass(frozen=True)
class NearMinimizer:
    n: int
    epsilon: float
    m: int
    h: float

    def __post_init__(self):
        check_dimension(self.n)
        if self.m < 1:
            raise ValueError("m must be a positive integer")
        if self.epsilon != self.m * self.h:
            raise ValueError("epsilon must equal m*h")
        if not 0.0 < self.epsilon < 1.0:
            raise ScheduleError("mesh too coarse for the ε-schedule "
                                f"(eps = {self.epsilon:.6g} >= 1)")


def choose_m(n: int, h: float) -> NearMinimizer:
    """Cutoff index m for eps = m*h.

    n = 1: m = floor(|log h|^3); n >= 3: m = floor(h^((1-n)/(n+1)) |log h|^(6/(n+1))).
    """
    check_dimension(n)
    if not 0.0 < h < 1.0:
        raise ValueError(f"mesh size must lie in (0, 1), got {h}")
    L = -math.log(h)
    if n == 1:
        m = math.floor(L**3)
    else:
        m = math.floor(h ** ((1 - n) / (n + 1)) * L ** (6.0 / (n + 1)))
    if m < 1 or m * h >= 1.0:
        raise ScheduleError(f"mesh too coarse for the ε-schedule (n={n}, h={h:.6g}, m={m})")
    return NearMinimizer(n=n, epsilon=m * h, m=m, h=h)


def v_eps(x, nm: NearMinimizer):
    """Near-minimizer with cutoff at ``nm.epsilon``."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or np.any(x > 1):
        raise ValueError("v_eps is defined on [0, 1]")
    eps = nm.epsilon
    live = x > eps * (1.0 + _CUTOFF_SLACK)
    xs = np.where(live, x, 1.0)
    power = 0.5 if nm.n == 1 else -(nm.n - 2) / 2.0
    vals = xs**power * np.sin(math.pi * np.log(xs) / math.log(eps))
    out = np.where(live, vals, 0.0)
    return float(out) if out.ndim == 0 else out


def interpolate(mesh: Mesh1D, f: Callable, n: int = 1) -> np.ndarray:
    """Nodal values of f on the free nodes of the dimension-n pencil."""
    vals = np.asarray(f(mesh.nodes), dtype=float)
    if vals.shape != mesh.nodes.shape:
        vals = np.array([f(x) for x in mesh.nodes], dtype=float)
    if not np.all(np.isfinite(vals)):
        raise ValueError("function is not finite at every node")
    return vals[free_nodes(mesh.nodes.size, boundary_condition(n))].copy()


def _abs_log_eps(epsilon: float) -> float:
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    return -math.log(epsilon)


def norms_1d_closed(epsilon: float) -> Tuple[float, float, float]:
    """(int v^2/x^2, int v'^2, int_eps^1 x^2 v''^2) for the 1D near-minimizer."""
    L = _abs_log_eps(epsilon)
    pi2 = math.pi**2
    mass = L / 2.0
    stiffness = L / 2.0 * (0.25 + pi2 / L**2)
    second = L / 32.0 + pi2 / (4.0 * L) + pi2**2 / (2.0 * L**3)
    return mass, stiffness, second


def norms_radial_closed(epsilon: float, n: int) -> Tuple[float, float, float]:
    """(int r^{n-3} v^2, int r^{n-1} v'^2, int_eps^1 r^{n+1} v''^2) for n >= 3."""
    if n < 3:
        raise ValueError("radial norms need n >= 3")
    L = _abs_log_eps(epsilon)
    pi2 = math.pi**2
    mass = L / 2.0
    stiffness = (n - 2) ** 2 / 8.0 * L + pi2 / (2.0 * L)
    second = (n * n * (n - 2) ** 2 / 32.0 * L + pi2 * (n * n - 2 * n + 2) / (4.0 * L)
              + pi2**2 / (2.0 * L**3))
    return mass, stiffness, second


def error_functional(nm: NearMinimizer) -> float:
    """Interpolation error functional of v_eps, reported without its unknown constant."""
    if nm.n == 1:
        _, stiff, second = norms_1d_closed(nm.epsilon)
        p = 1.0
    else:
        _, stiff, second = norms_radial_closed(nm.epsilon, nm.n)
        p = (nm.n + 1) / 2.0
    a = nm.h / nm.epsilon**p
    return a * math.sqrt(stiff * second) + a * a * second


def upper_bound_value(N: int, n: int) -> Tuple[float, float]:
    """Rayleigh quotient of the interpolated near-minimizer on uniform_mesh(N).

    Returns ``(bound, epsilon)``.
    """
    check_dimension(n)
    mesh = uniform_mesh(N)
    nm = choose_m(n, 1.0 / N)
    vec = interpolate(mesh, lambda x: v_eps(x, nm), n)
    return rayleigh(assemble_pencil(mesh, n), vec), nm.epsilon
