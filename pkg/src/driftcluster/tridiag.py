"""Tridiagonal systems: container, solve wrapper and matvec.

The solve itself lives in driftcluster.kernels (compiled Thomas algorithm or
scipy banded solve).  This module owns validation and the package-level error
type, plus the matvec used for residual checks and tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import SingularSystemError, StructuralError


@dataclass
class TridiagonalSystem:
    """Bands and right-hand side of an n x n tridiagonal system.

    sub and sup have length n - 1, diag and rhs length n.
    """

    sub: np.ndarray
    diag: np.ndarray
    sup: np.ndarray
    rhs: np.ndarray

    def __post_init__(self):
        self.sub = np.ascontiguousarray(self.sub, dtype=np.float64)
        self.diag = np.ascontiguousarray(self.diag, dtype=np.float64)
        self.sup = np.ascontiguousarray(self.sup, dtype=np.float64)
        self.rhs = np.ascontiguousarray(self.rhs, dtype=np.float64)
        n = self.diag.shape[0]
        if n < 1:
            raise StructuralError("tridiagonal system must have at least one row")
        if (self.sub.shape != (n - 1,) or self.sup.shape != (n - 1,)
                or self.rhs.shape != (n,)):
            raise StructuralError(
                "band lengths inconsistent: "
                f"diag {n}, sub {self.sub.shape[0]}, sup {self.sup.shape[0]}, "
                f"rhs {self.rhs.shape[0]}"
            )

    @property
    def n(self) -> int:
        return self.diag.shape[0]


def thomas_solve(system: TridiagonalSystem) -> np.ndarray:
    """Solve the system; raises SingularSystemError on a zero pivot."""
    try:
        return kernels.thomas(system.sub, system.diag, system.sup, system.rhs)
    except ZeroDivisionError as exc:
        raise SingularSystemError(str(exc)) from exc


def apply_tridiagonal(system: TridiagonalSystem, x) -> np.ndarray:
    """Matvec A x for the system's bands (rhs is ignored)."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (system.n,):
        raise StructuralError(
            f"vector has shape {x.shape}, expected ({system.n},)"
        )
    out = system.diag * x
    out[:-1] += system.sup * x[1:]
    out[1:] += system.sub * x[:-1]
    return out
