"""One-dimensional meshes of the unit interval."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Mesh1D:
    """Ordered nodes ``0 = x_0 < x_1 < ... < x_N = 1``.

    ``min_ratio`` is the quasi-uniformity constant c: every element size
    must satisfy ``c * h <= h_T <= h``.
    """

    nodes: np.ndarray
    min_ratio: float = 1.0
    element_sizes: np.ndarray = field(init=False, repr=False)
    h: float = field(init=False)

    def __post_init__(self):
        x = np.array(self.nodes, dtype=float)
        if x.ndim != 1 or x.size < 2:
            raise ValueError("a mesh needs at least two nodes")
        if x[0] != 0.0 or x[-1] != 1.0:
            raise ValueError("mesh must start at 0 and end at 1 exactly")
        sizes = np.diff(x)
        if np.any(sizes <= 0):
            raise ValueError("mesh nodes must be strictly increasing")
        if not 0.0 < self.min_ratio <= 1.0:
            raise ValueError("quasi-uniformity constant must lie in (0, 1]")
        h = float(sizes.max())
        # rounding slack so that k/N meshes pass the c = 1 check
        if sizes.min() < self.min_ratio * h - 8 * np.spacing(1.0):
            raise ValueError(
                f"mesh violates quasi-uniformity: min/max = {sizes.min() / h:.3g} "
                f"< {self.min_ratio}"
            )
        x.flags.writeable = False
        sizes.flags.writeable = False
        object.__setattr__(self, "nodes", x)
        object.__setattr__(self, "element_sizes", sizes)
        object.__setattr__(self, "h", h)

    @property
    def num_elements(self) -> int:
        return self.nodes.size - 1

    @property
    def uniformity(self) -> float:
        return float(self.element_sizes.min() / self.h)


def uniform_mesh(N: int) -> Mesh1D:
    """Mesh with nodes ``k/N``, ``k = 0..N``."""
    N = int(N)
    if N < 1:
        raise ValueError(f"uniform_mesh needs N >= 1, got {N}")
    x = np.arange(N + 1, dtype=float) / N
    x[-1] = 1.0
    return Mesh1D(x)


def nested_refine(mesh: Mesh1D) -> Mesh1D:
    """Bisect every element at its midpoint."""
    x = mesh.nodes
    fine = np.empty(2 * x.size - 1)
    fine[0::2] = x
    fine[1::2] = 0.5 * (x[:-1] + x[1:])
    return Mesh1D(fine, min_ratio=mesh.min_ratio)
