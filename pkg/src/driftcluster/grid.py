"""Uniform cell-centered finite-volume mesh on (-1, 1).

The domain is split into n cells of width h = 2/n.  Cell averages live at
centers x_i = -1 + (i + 1/2) h; fluxes live at the n + 1 faces.  All discrete
norms are the cell-average quadratures

    ||f||_1 = h sum |f_i|,   ||f||_2 = (h sum f_i^2)^(1/2),   ||f||_inf = max |f_i|,

so norm values are directly comparable across resolutions.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import StructuralError, ValidationError


@dataclass(frozen=True)
class Grid:
    """Uniform mesh with n >= 8 cells on (-1, 1)."""

    n: int

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or isinstance(self.n, bool):
            raise ValidationError(f"grid cell count must be an integer, got {self.n!r}")
        if self.n < 8:
            raise ValidationError(f"grid needs at least 8 cells, got {self.n}")

    @property
    def h(self) -> float:
        return 2.0 / self.n

    @cached_property
    def centers(self) -> np.ndarray:
        """Cell centers x_i = -1 + (i + 1/2) h, shape (n,)."""
        return -1.0 + (np.arange(self.n) + 0.5) * self.h

    @cached_property
    def faces(self) -> np.ndarray:
        """Face coordinates including both walls, shape (n + 1,)."""
        return -1.0 + np.arange(self.n + 1) * self.h

    def check_field(self, f, name: str = "field") -> np.ndarray:
        """Coerce to a float array of shape (n,) or raise StructuralError."""
        arr = np.asarray(f, dtype=np.float64)
        if arr.shape != (self.n,):
            raise StructuralError(
                f"{name} has shape {arr.shape}, expected ({self.n},)"
            )
        return arr


def norm_l1(f, grid: Grid) -> float:
    f = grid.check_field(f)
    return float(grid.h * np.abs(f).sum())


def norm_l2(f, grid: Grid) -> float:
    f = grid.check_field(f)
    return float(np.sqrt(grid.h * np.dot(f, f)))


def norm_sup(f, grid: Grid) -> float:
    f = grid.check_field(f)
    return float(np.abs(f).max())


def total_mass(f, grid: Grid) -> float:
    """Signed cell-average integral h sum f_i."""
    f = grid.check_field(f)
    return float(grid.h * f.sum())


def centered_gradient(f, grid: Grid, bc: str = "neumann_zero") -> np.ndarray:
    """Second-order centered gradient at cell centers.

    bc selects the ghost-cell closure at the walls:

    * ``neumann_zero``: reflecting ghost cells (zero normal derivative at
      the wall itself).  Right for the density field.
    * ``one_sided``: first-order one-sided differences at the walls, for
      fields with no natural reflection.
    """
    f = grid.check_field(f)
    h = grid.h
    out = np.empty_like(f)
    out[1:-1] = (f[2:] - f[:-2]) / (2.0 * h)
    if bc == "neumann_zero":
        out[0] = (f[1] - f[0]) / (2.0 * h)
        out[-1] = (f[-1] - f[-2]) / (2.0 * h)
    elif bc == "one_sided":
        out[0] = (f[1] - f[0]) / h
        out[-1] = (f[-1] - f[-2]) / h
    else:
        raise ValidationError(f"unknown gradient closure {bc!r}")
    return out


def face_average(f, grid: Grid) -> np.ndarray:
    """Arithmetic face interpolation with zero wall values, shape (n + 1,).

    Interior faces get the two-cell average; the wall entries are zero,
    matching the homogeneous Dirichlet condition the velocity satisfies.
    """
    f = grid.check_field(f)
    out = np.zeros(grid.n + 1)
    out[1:-1] = 0.5 * (f[:-1] + f[1:])
    return out
