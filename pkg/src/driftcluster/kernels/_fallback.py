"""Pure-Python kernel implementations (numpy/scipy).

Drop-in replacements for the compiled routines in _core.pyx.  The tridiagonal
solve delegates to LAPACK via scipy.linalg.solve_banded; the flux and update
kernels are vectorised numpy.  Semantics, including the ZeroDivisionError on
a singular system, match the compiled backend.
"""

import numpy as np
from scipy.linalg import solve_banded


def thomas(sub, diag, sup, rhs):
    """Solve a tridiagonal system; zero pivot raises ZeroDivisionError."""
    sub = np.asarray(sub, dtype=np.float64)
    diag = np.asarray(diag, dtype=np.float64)
    sup = np.asarray(sup, dtype=np.float64)
    rhs = np.asarray(rhs, dtype=np.float64)
    n = diag.shape[0]
    if n < 1:
        raise ValueError("empty system")
    if sub.shape[0] != n - 1 or sup.shape[0] != n - 1 or rhs.shape[0] != n:
        raise ValueError("inconsistent tridiagonal band lengths")
    ab = np.zeros((3, n))
    ab[0, 1:] = sup
    ab[1, :] = diag
    ab[2, :-1] = sub
    try:
        return solve_banded((1, 1), ab, rhs, overwrite_ab=True,
                            check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise ZeroDivisionError(f"singular tridiagonal system: {exc}") from exc


def upwind_fluxes(u, phi_face):
    """First-order upwind advective fluxes with zero-flux walls."""
    u = np.asarray(u, dtype=np.float64)
    phi_face = np.asarray(phi_face, dtype=np.float64)
    n = u.shape[0]
    if phi_face.shape[0] != n + 1:
        raise ValueError("phi_face must have n + 1 entries")
    f = np.zeros(n + 1)
    v = phi_face[1:n]
    f[1:n] = np.where(v >= 0.0, v * u[:-1], v * u[1:])
    return f


def explicit_update(u, flux, dt, h, r, bistable, a):
    """One explicit transport + reaction update (see _core.pyx)."""
    u = np.asarray(u, dtype=np.float64)
    flux = np.asarray(flux, dtype=np.float64)
    n = u.shape[0]
    if flux.shape[0] != n + 1:
        raise ValueError("flux must have n + 1 entries")
    lam = dt / h
    if bistable:
        e = (1.0 - u) * (u - a)
    else:
        e = 1.0 - u
    return u - lam * (flux[1:] - flux[:-1]) + dt * r * u * e
