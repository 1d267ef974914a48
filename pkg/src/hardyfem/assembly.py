"""Element integrals and tridiagonal assembly for the weighted Hardy forms.

On an element ``[a, b]`` with local hats ``phi_L = (b - r)/H`` and
``phi_R = (r - a)/H`` (``H = b - a``) we need

    stiffness   int_a^b r^(n-1) phi_i' phi_j' dr
    mass        int_a^b r^(n-3) phi_i  phi_j  dr

Both are evaluated in closed form. For ``n >= 3`` the weights are polynomials
and the substitution ``r = a + H s`` turns every integral into a positive sum
of Beta integrals (no cancellation). For ``n = 1`` the mass weight is
``r^-2``; with ``t = H/a`` the exact antiderivatives give

    LL = [t(2+t) - 2(1+t) log1p(t)] / (a t^2)
    LR = [(2+t) log1p(t) - 2t]      / (a t^2)
    RR = [t/(1+t) + t - 2 log1p(t)] / (a t^2)

which cancel to O(t^3) and are replaced by their Taylor series for small t.
On ``[0, b]`` only the RR entry is finite (``= 1/b``).
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from math import comb
from typing import Optional

import numpy as np

from .mesh import Mesh1D

# below this t = H/a the log closed forms lose more than ~1e-14 relative
_SERIES_T = 0.25
_SERIES_TERMS = 40


class SingularEntryError(ValueError):
    """Raised when a divergent element integral is requested as a number."""


class BoundaryCondition(enum.Enum):
    LEFT_DIRICHLET = "left"    # v(0) = 0, weight x^-2 (n = 1)
    RIGHT_DIRICHLET = "right"  # v(1) = 0, radial case n >= 3


def check_dimension(n: int) -> int:
    n = int(n)
    if n == 2:
        raise ValueError("dimension n = 2 is not supported (critical Hardy case)")
    if n < 1:
        raise ValueError(f"dimension must be 1 or >= 3, got {n}")
    return n


def boundary_condition(n: int) -> BoundaryCondition:
    return BoundaryCondition.LEFT_DIRICHLET if check_dimension(n) == 1 else BoundaryCondition.RIGHT_DIRICHLET


def hardy_constant(n: int) -> float:
    """Optimal Hardy constant: 1/4 for n = 1, (n-2)^2/4 for n >= 3."""
    n = check_dimension(n)
    return 0.25 if n == 1 else (n - 2) ** 2 / 4.0


# ---------------------------------------------------------------------------
# vectorised element kernels


def stiffness_coefficients(a, b, n: int) -> np.ndarray:
    """Scalar ``k_e`` with element stiffness ``k_e * [[1, -1], [-1, 1]]``."""
    a = np.asarray(a, dtype=float)
    H = np.asarray(b, dtype=float) - a
    # int_a^b r^(n-1) dr = H * sum_j C(n-1, j) a^(n-1-j) H^j / (j+1)
    total = np.zeros(np.broadcast(a, H).shape)
    for j in range(n):
        total = total + comb(n - 1, j) * a ** (n - 1 - j) * H**j / (j + 1)
    return total / H


def _series(t, coeff):
    acc = np.zeros_like(t)
    for k in range(_SERIES_TERMS + 2, 2, -1):
        acc = acc * t + coeff(k)
    return acc * t


def _mass_r2(a, b):
    """(LL, LR, RR) for the weight r^-2 on [a, b], a > 0."""
    t = (b - a) / a
    LL = np.empty_like(t)
    LR = np.empty_like(t)
    RR = np.empty_like(t)
    small = t < _SERIES_T
    if np.any(small):
        ts = t[small]
        LL[small] = _series(ts, lambda k: (-1) ** (k + 1) * 2.0 / (k * (k - 1)))
        LR[small] = _series(ts, lambda k: (-1) ** (k + 1) * (k - 2) / (k * (k - 1)))
        RR[small] = _series(ts, lambda k: (-1) ** (k + 1) * (k - 2) / k)
    big = ~small
    if np.any(big):
        tb = t[big]
        lg = np.log1p(tb)
        t2 = tb * tb
        LL[big] = (tb * (2 + tb) - 2 * (1 + tb) * lg) / t2
        LR[big] = ((2 + tb) * lg - 2 * tb) / t2
        RR[big] = (tb / (1 + tb) + tb - 2 * lg) / t2
    return LL / a, LR / a, RR / a


def _mass_poly(a, b, k):
    """(LL, LR, RR) for the weight r^k, k >= 0."""
    H = b - a
    LL = np.zeros_like(H)
    LR = np.zeros_like(H)
    RR = np.zeros_like(H)
    for j in range(k + 1):
        w = comb(k, j) * a ** (k - j) * H ** (j + 1)
        LL = LL + w * (2.0 / ((j + 1) * (j + 2) * (j + 3)))
        LR = LR + w * (1.0 / ((j + 2) * (j + 3)))
        RR = RR + w * (1.0 / (j + 3))
    return LL, LR, RR


def mass_coefficients(a, b, n: int):
    """Element weighted-mass entries ``(LL, LR, RR)``; NaN marks a divergent entry."""
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    a, b = np.broadcast_arrays(a, b)
    if n >= 3:
        return _mass_poly(a, b, n - 3)
    LL = np.full(a.shape, np.nan)
    LR = np.full(a.shape, np.nan)
    RR = np.empty(a.shape)
    at0 = a == 0.0
    RR[at0] = 1.0 / b[at0]
    pos = ~at0
    if np.any(pos):
        LL[pos], LR[pos], RR[pos] = _mass_r2(a[pos], b[pos])
    return LL, LR, RR


# ---------------------------------------------------------------------------
# scalar element API


def _check_element(a, b, n):
    n = check_dimension(n)
    if not (0.0 <= a < b <= 1.0):
        raise ValueError(f"element needs 0 <= a < b <= 1, got a={a}, b={b}")
    return n


def element_stiffness(a: float, b: float, n: int) -> np.ndarray:
    n = _check_element(a, b, n)
    k = float(stiffness_coefficients(a, b, n))
    return k * np.array([[1.0, -1.0], [-1.0, 1.0]])


@dataclass(frozen=True)
class ElementMass:
    """2x2 element mass matrix whose divergent entries are flagged."""

    values: np.ndarray
    singular: np.ndarray

    def __getitem__(self, idx):
        if self.singular[idx]:
            raise SingularEntryError(f"entry {idx} diverges (unused-singular)")
        return float(self.values[idx])

    @property
    def has_singular(self) -> bool:
        return bool(self.singular.any())

    def toarray(self) -> np.ndarray:
        if self.has_singular:
            raise SingularEntryError("element matrix has unused-singular entries")
        return self.values.copy()


def element_weighted_mass(a: float, b: float, n: int) -> ElementMass:
    n = _check_element(a, b, n)
    LL, LR, RR = (float(v[0]) for v in mass_coefficients(a, b, n))
    values = np.array([[LL, LR], [LR, RR]])
    return ElementMass(values, np.isnan(values))


# ---------------------------------------------------------------------------
# global pencil


@dataclass(frozen=True)
class SymTriPencil:
    """Symmetric tridiagonal pair (K, M) of stiffness and weighted mass.

    ``K_rowsum`` optionally holds the exact row sums of K. Assembly knows them
    (they vanish away from the Dirichlet end), which lets quadratic forms be
    evaluated as sums of squared differences without cancellation.
    """

    K_diag: np.ndarray
    K_off: np.ndarray
    M_diag: np.ndarray
    M_off: np.ndarray
    dim_n: int = 1
    bc: BoundaryCondition = BoundaryCondition.LEFT_DIRICHLET
    K_rowsum: Optional[np.ndarray] = None

    def __post_init__(self):
        arrays = {}
        for name in ("K_diag", "K_off", "M_diag", "M_off"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=float)
            if arr.ndim != 1:
                raise ValueError(f"{name} must be one-dimensional")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} has non-finite entries")
            arrays[name] = arr
        N = arrays["K_diag"].size
        if N < 1:
            raise ValueError("pencil must have at least one degree of freedom")
        if arrays["M_diag"].size != N or arrays["K_off"].size != N - 1 or arrays["M_off"].size != N - 1:
            raise ValueError("inconsistent tridiagonal lengths")
        if self.K_rowsum is not None:
            rs = np.ascontiguousarray(self.K_rowsum, dtype=float)
            if rs.shape != (N,):
                raise ValueError("K_rowsum has wrong length")
            arrays["K_rowsum"] = rs
        for name, arr in arrays.items():
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def dof_count(self) -> int:
        return self.K_diag.size

    def row_sums(self) -> np.ndarray:
        if self.K_rowsum is not None:
            return self.K_rowsum
        rs = self.K_diag.copy()
        rs[:-1] += self.K_off
        rs[1:] += self.K_off
        return rs

    def dense(self):
        """Dense (K, M); intended for small oracle checks."""
        K = np.diag(self.K_diag) + np.diag(self.K_off, 1) + np.diag(self.K_off, -1)
        M = np.diag(self.M_diag) + np.diag(self.M_off, 1) + np.diag(self.M_off, -1)
        return K, M

    def scaled(self, c: float) -> "SymTriPencil":
        """Pencil (K, c*M)."""
        return SymTriPencil(self.K_diag, self.K_off, c * self.M_diag, c * self.M_off,
                            self.dim_n, self.bc, self.K_rowsum)


def free_nodes(num_nodes: int, bc: BoundaryCondition) -> slice:
    """Slice of mesh node indices carrying degrees of freedom."""
    if bc is BoundaryCondition.LEFT_DIRICHLET:
        return slice(1, num_nodes)
    return slice(0, num_nodes - 1)


def assemble_pencil(mesh: Mesh1D, n: int) -> SymTriPencil:
    """Assemble (K, M) on ``mesh`` with the Dirichlet end dictated by ``n``."""
    n = check_dimension(n)
    x = mesh.nodes
    a, b = x[:-1], x[1:]
    k = stiffness_coefficients(a, b, n)
    LL, LR, RR = mass_coefficients(a, b, n)
    N = mesh.num_elements
    rowsum = np.zeros(N)
    if n == 1:
        # dofs are nodes 1..N; element e joins dofs e-1 and e
        K_diag = k.copy()
        K_diag[:-1] += k[1:]
        K_off = -k[1:]
        M_diag = RR.copy()
        M_diag[:-1] += LL[1:]
        M_off = LR[1:].copy()
        rowsum[0] = k[0]
        bc = BoundaryCondition.LEFT_DIRICHLET
    else:
        # dofs are nodes 0..N-1; element e joins dofs e and e+1
        K_diag = k.copy()
        K_diag[1:] += k[:-1]
        K_off = -k[:-1]
        M_diag = LL.copy()
        M_diag[1:] += RR[:-1]
        M_off = LR[:-1].copy()
        rowsum[-1] = k[-1]
        bc = BoundaryCondition.RIGHT_DIRICHLET
    return SymTriPencil(K_diag, K_off, M_diag, M_off, n, bc, rowsum)
