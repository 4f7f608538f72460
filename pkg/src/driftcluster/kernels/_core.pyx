# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner-loop kernels.

Three routines dominate the run time of a simulation: the tridiagonal solve
(twice per step: velocity and implicit diffusion), the upwind flux sweep and
the explicit cell update.  They are written against typed memoryviews only,
so the module needs no numpy headers to compile.

Semantics must match driftcluster.kernels._fallback exactly; the test suite
compares both backends elementwise.
"""

import numpy as np


def thomas(const double[::1] sub, const double[::1] diag,
           const double[::1] sup, const double[::1] rhs):
    """Solve a tridiagonal system by the Thomas algorithm.

    Bands: sub (length n-1), diag (n), sup (n-1).  No pivoting; a zero
    pivot raises ZeroDivisionError.  Intended for the diagonally dominant
    systems this package assembles, where pivoting is never needed.
    """
    cdef Py_ssize_t n = diag.shape[0]
    if n < 1:
        raise ValueError("empty system")
    if sub.shape[0] != n - 1 or sup.shape[0] != n - 1 or rhs.shape[0] != n:
        raise ValueError("inconsistent tridiagonal band lengths")

    x_arr = np.empty(n, dtype=np.float64)
    w_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] x = x_arr
    cdef double[::1] w = w_arr
    cdef double piv
    cdef Py_ssize_t i

    piv = diag[0]
    if piv == 0.0:
        raise ZeroDivisionError("zero pivot in tridiagonal solve")
    w[0] = 0.0
    x[0] = rhs[0] / piv
    for i in range(1, n):
        w[i] = sup[i - 1] / piv
        piv = diag[i] - sub[i - 1] * w[i]
        if piv == 0.0:
            raise ZeroDivisionError("zero pivot in tridiagonal solve")
        x[i] = (rhs[i] - sub[i - 1] * x[i - 1]) / piv
    for i in range(n - 2, -1, -1):
        x[i] = x[i] - w[i + 1] * x[i + 1]
    return x_arr


def upwind_fluxes(const double[::1] u, const double[::1] phi_face):
    """First-order upwind advective fluxes F[j] = phi_face[j] * u_upwind.

    u has n cells, phi_face has n+1 face values.  The boundary fluxes
    F[0] and F[n] are forced to zero (no-flux walls).
    """
    cdef Py_ssize_t n = u.shape[0]
    if phi_face.shape[0] != n + 1:
        raise ValueError("phi_face must have n + 1 entries")
    f_arr = np.zeros(n + 1, dtype=np.float64)
    cdef double[::1] f = f_arr
    cdef double v
    cdef Py_ssize_t j
    for j in range(1, n):
        v = phi_face[j]
        if v >= 0.0:
            f[j] = v * u[j - 1]
        else:
            f[j] = v * u[j]
    return f_arr


def explicit_update(const double[::1] u, const double[::1] flux,
                    double dt, double h, double r, int bistable, double a):
    """One explicit transport + reaction update.

    out[i] = u[i] - (dt/h) (flux[i+1] - flux[i]) + dt r u[i] E(u[i])
    with E(u) = 1 - u (monostable) or (1 - u)(u - a) (bistable).
    """
    cdef Py_ssize_t n = u.shape[0]
    if flux.shape[0] != n + 1:
        raise ValueError("flux must have n + 1 entries")
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double lam = dt / h
    cdef double e
    cdef Py_ssize_t i
    for i in range(n):
        if bistable:
            e = (1.0 - u[i]) * (u[i] - a)
        else:
            e = 1.0 - u[i]
        out[i] = u[i] - lam * (flux[i + 1] - flux[i]) + dt * r * u[i] * e
    return out_arr
