"""Backend parity: the compiled kernels and the pure-Python fallback must
produce identical answers, so every test runs against whatever is available."""

import numpy as np
import pytest

from driftcluster import kernels

BACKENDS = sorted(kernels.available_backends())


def test_selected_backend_is_available():
    assert kernels.BACKEND in kernels.available_backends()


@pytest.fixture(params=BACKENDS)
def impl(request):
    return kernels.available_backends()[request.param]


def test_thomas_matches_dense(impl, rng):
    n = 40
    sub = rng.uniform(-1.0, 1.0, n - 1)
    sup = rng.uniform(-1.0, 1.0, n - 1)
    diag = 3.0 + rng.uniform(0.0, 1.0, n)
    rhs = rng.uniform(-2.0, 2.0, n)
    a = np.diag(diag) + np.diag(sub, -1) + np.diag(sup, 1)
    x = impl.thomas(sub.copy(), diag.copy(), sup.copy(), rhs.copy())
    np.testing.assert_allclose(x, np.linalg.solve(a, rhs), rtol=1e-12,
                               atol=1e-12)


def test_thomas_zero_pivot(impl):
    with pytest.raises(ZeroDivisionError):
        impl.thomas(np.array([0.0]), np.array([1.0, 0.0]), np.array([0.0]),
                    np.array([1.0, 1.0]))


def test_upwind_direction(impl):
    u = np.array([1.0, 2.0, 3.0, 4.0])
    v = np.array([0.0, 0.5, -0.5, 0.5, 0.0])
    f = impl.upwind_fluxes(u, v)
    assert f[0] == 0.0 and f[-1] == 0.0         # wall faces carry nothing
    assert f[1] == pytest.approx(0.5 * 1.0)     # v > 0 takes the left cell
    assert f[2] == pytest.approx(-0.5 * 3.0)    # v < 0 takes the right cell
    assert f[3] == pytest.approx(0.5 * 3.0)


def test_explicit_update_no_reaction_conserves(impl, rng):
    n = 50
    u = rng.uniform(0.0, 1.0, n)
    v = rng.uniform(-0.5, 0.5, n + 1)
    v[0] = v[-1] = 0.0
    h = 2.0 / n
    f = impl.upwind_fluxes(u, v)
    out = impl.explicit_update(u, f, 1e-3, h, 0.0, 0, 0.5)
    assert abs(out.sum() - u.sum()) < 1e-13 * n


def test_explicit_update_reaction_terms(impl):
    u = np.array([0.5] * 8)
    f = np.zeros(9)
    dt, h, r = 1e-2, 0.25, 2.0
    mono = impl.explicit_update(u, f, dt, h, r, 0, 0.5)
    np.testing.assert_allclose(mono, 0.5 + dt * r * 0.5 * (1 - 0.5))
    a = 0.25
    bist = impl.explicit_update(u, f, dt, h, r, 1, a)
    np.testing.assert_allclose(bist, 0.5 + dt * r * 0.5 * (1 - 0.5)
                               * (0.5 - a))


@pytest.mark.skipif(len(BACKENDS) < 2, reason="single backend build")
def test_backend_parity(rng):
    impls = [kernels.available_backends()[b] for b in BACKENDS]
    for n in (8, 33, 128):
        u = rng.uniform(0.0, 2.0, n)
        v = rng.uniform(-1.0, 1.0, n + 1)
        v[0] = v[-1] = 0.0
        h = 2.0 / n
        outs_f = [impl.upwind_fluxes(u, v) for impl in impls]
        np.testing.assert_array_equal(outs_f[0], outs_f[1])
        outs_u = [impl.explicit_update(u, outs_f[0], 1e-3, h, 1.5, 1, 0.3)
                  for impl in impls]
        np.testing.assert_allclose(outs_u[0], outs_u[1], rtol=1e-15,
                                   atol=1e-15)
        diag = 3.0 + rng.uniform(0.0, 1.0, n)
        sub = rng.uniform(-1.0, 1.0, n - 1)
        sup = rng.uniform(-1.0, 1.0, n - 1)
        rhs = rng.uniform(-1.0, 1.0, n)
        outs_t = [impl.thomas(sub.copy(), diag.copy(), sup.copy(),
                              rhs.copy()) for impl in impls]
        np.testing.assert_allclose(outs_t[0], outs_t[1], rtol=1e-14,
                                   atol=1e-14)
