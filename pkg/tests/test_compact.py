import numpy as np
import pytest
from hypothesis import given, strategies as st

from cvples import _jit
from cvples.compact import (CyclicTridiagonalSystem, SIXTH_ORDER, ddx, divergence, filter8_transfer, gradient,
                            solution_filter, solve_cyclic_tridiagonal)
from cvples.cases import TgvParams, tgv_fields
from cvples.errors import AxisTooSmall, BadAlpha, ZeroPivot
from cvples.grid import Grid, volume_average
from cvples.kernels import apply_line, constant_cyclic_factor, factor_cyclic

from conftest import band_limited


# -- cyclic tridiagonal solver --------------------------------------------------

def test_identity_system_returns_rhs(rng):
    sys = CyclicTridiagonalSystem.constant(12, 0.0, 1.0)
    r = rng.normal(size=12)
    np.testing.assert_array_equal(solve_cyclic_tridiagonal(sys, r), r)


def test_hand_solved_4x4():
    # circulant rows (1, 4, 1) with unit corners, x = (1, 2, 3, 4) by hand
    sys = CyclicTridiagonalSystem.constant(4, 1.0, 4.0)
    x = solve_cyclic_tridiagonal(sys, np.array([10.0, 12.0, 18.0, 20.0]))
    np.testing.assert_allclose(x, [1.0, 2.0, 3.0, 4.0], rtol=0, atol=1e-14)


@pytest.mark.parametrize("seed", range(5))
def test_random_dominant_system_residual(seed):
    r = np.random.default_rng(seed)
    n = 64
    sub, sup = r.uniform(-1, 1, n), r.uniform(-1, 1, n)
    diag = np.abs(sub) + np.abs(sup) + r.uniform(0.5, 2.0, n)
    diag *= r.choice([-1.0, 1.0], n)
    sys = CyclicTridiagonalSystem(sub, diag, sup, float(sub[0]), float(sup[-1]))
    b = r.normal(size=n)
    x = solve_cyclic_tridiagonal(sys, b)
    assert np.max(np.abs(sys.dense() @ x - b)) <= 1e-12 * np.max(np.abs(b))


def test_multi_column_rhs_matches_columnwise(rng):
    sys = CyclicTridiagonalSystem.constant(20, 0.3, 1.0)
    b = rng.normal(size=(20, 7))
    x = solve_cyclic_tridiagonal(sys, b)
    for j in range(7):
        np.testing.assert_allclose(x[:, j], solve_cyclic_tridiagonal(sys, b[:, j]), atol=1e-14)


def test_singular_system_raises_zero_pivot():
    # (1/2, 1, 1/2) circulant annihilates the Nyquist mode on an even grid
    with pytest.raises(ZeroPivot):
        solve_cyclic_tridiagonal(CyclicTridiagonalSystem.constant(8, 0.5, 1.0), np.ones(8))


def test_factor_needs_three_rows():
    with pytest.raises(ValueError):
        factor_cyclic(np.ones(2), np.ones(2), np.ones(2), 0.0, 0.0)


# -- backends -------------------------------------------------------------------

@pytest.mark.skipif(not _jit.HAVE_NUMBA, reason="numba not installed")
@pytest.mark.parametrize("shape,axis", [((9, 10, 11), 0), ((9, 10, 11), 1), ((9, 10, 11), 2),
                                        ((3, 40, 12, 33), 3), ((2, 12, 10, 10), 1)])
@pytest.mark.parametrize("implicit", [False, True])
@pytest.mark.parametrize("odd", [False, True])
def test_numba_and_numpy_backends_agree(shape, axis, implicit, odd, rng):
    f = rng.normal(size=shape)
    coeffs = np.array([0.2, 0.7, -0.1, 0.05, 0.01])
    fac = constant_cyclic_factor(shape[axis], 0.3) if implicit else None
    a = apply_line(f, axis, coeffs, odd, fac, use_numba=True)
    b = apply_line(f, axis, coeffs, odd, fac, use_numba=False)
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-13)


def test_backend_flag_reflects_environment():
    import os
    flag = os.environ.get("CVPLES_DISABLE_NUMBA", "").lower() in ("1", "true", "yes", "on")
    assert _jit.USE_NUMBA == (_jit.HAVE_NUMBA and not flag)
    assert _jit.backend() in ("numba", "numpy")


# -- derivative -------------------------------------------------------------------

def _sine_error(n, axis, lengths=(2.0, 3.0, 5.0)):
    g = Grid(n, n, n, *lengths)
    X = g.mesh()
    k = 2 * np.pi / g.lengths[axis]
    d = ddx(np.sin(k * X[axis]), g, axis)
    return np.max(np.abs(d - k * np.cos(k * X[axis])))


def test_derivative_of_constant_is_zero(cube16):
    for axis in range(3):
        assert np.max(np.abs(ddx(np.full(cube16.shape, 7.0), cube16, axis))) < 1e-13


@pytest.mark.parametrize("axis", [0, 1, 2])
def test_derivative_accuracy_n32(axis):
    lx = (2.0, 3.0, 5.0)[axis]
    # error bound scales with the derivative amplitude 2 pi / l
    assert _sine_error(32, axis) < 1e-5 * (2 * np.pi / lx)


@pytest.mark.parametrize("axis", [0, 1, 2])
def test_derivative_convergence_order(axis):
    p = np.log2(_sine_error(16, axis) / _sine_error(32, axis))
    assert 5.5 <= p <= 6.5


def test_modified_wavenumber_matches_operator():
    n = 24
    g = Grid(n, 8, 8, 2 * np.pi, 1.0, 1.0)
    x = g.mesh()[0]
    for k in (1, 5, 9):
        d = ddx(np.sin(k * x), g, 0)
        kh = k * g.dx
        amp = SIXTH_ORDER.modified_wavenumber(kh) / g.dx
        np.testing.assert_allclose(d, amp * np.cos(k * x), atol=1e-12)


def test_derivative_too_short_axis():
    g = Grid(8, 8, 8, 1.0, 1.0, 1.0)
    with pytest.raises(AxisTooSmall):
        ddx(np.zeros((8, 8, 7)), g, 2)


def test_gradient_constant_and_manufactured():
    g = Grid(16, 32, 16, 1.0, 2.0, 1.0)
    u = np.broadcast_to(np.array([1.0, -2.0, 3.0])[:, None, None, None], (3,) + g.shape)
    assert np.max(np.abs(gradient(u, g))) < 1e-13
    y = g.mesh()[1]
    k = 2 * np.pi / g.ly
    v = np.zeros((3,) + g.shape)
    v[0] = np.sin(k * y)
    G = gradient(v, g)
    assert np.max(np.abs(G[0, 1] - k * np.cos(k * y))) < 1e-5
    assert np.max(np.abs(G[0, 0])) < 1e-12 and np.max(np.abs(G[1:])) == 0.0


def test_tgv_initial_divergence_free():
    p = TgvParams()
    g = p.grid(24)
    _, u, _ = tgv_fields(g, p, p.thermo())
    assert np.max(np.abs(divergence(u, g))) < 1e-10
    G = gradient(u, g)
    assert np.max(np.abs(np.trace(G))) < 1e-10


def test_derivative_commutes_with_shift(rng):
    g = Grid(12, 10, 9, 1.0, 1.3, 0.7)
    f = rng.normal(size=g.shape)
    for axis in range(3):
        for s in (1, 3):
            lhs = ddx(np.roll(f, s, axis=axis), g, axis)
            np.testing.assert_allclose(lhs, np.roll(ddx(f, g, axis), s, axis=axis), atol=1e-11)


@given(seed=st.integers(0, 2**31), axis=st.integers(0, 2))
def test_integration_by_parts(seed, axis):
    g = Grid(16, 16, 16, 2.0, 1.0, 3.0)
    r = np.random.default_rng(seed)
    f, h = band_limited(g, r), band_limited(g, r)
    val = volume_average(f * ddx(h, g, axis) + h * ddx(f, g, axis))
    assert abs(val) < 1e-10


@given(a=st.floats(-5, 5), b=st.floats(-5, 5), seed=st.integers(0, 2**31))
def test_derivative_linear(a, b, seed):
    g = Grid.cube(10)
    r = np.random.default_rng(seed)
    f, h = r.normal(size=(2,) + g.shape)
    lhs = ddx(a * f + b * h, g, 1)
    np.testing.assert_allclose(lhs, a * ddx(f, g, 1) + b * ddx(h, g, 1), atol=1e-11 * (1 + abs(a) + abs(b)))


# -- solution filter -------------------------------------------------------------

def test_filter_keeps_constant(cube16):
    f = np.full(cube16.shape, -1.5)
    np.testing.assert_allclose(solution_filter(f), f, atol=1e-13)


def test_filter_annihilates_nyquist():
    g = Grid.cube(16)
    i, j, k = np.indices(g.shape)
    f = (-1.0) ** (i + j + k)
    assert np.max(np.abs(solution_filter(f))) < 1e-12
    # a single axis only removes the Nyquist content along that axis
    assert np.max(np.abs(solution_filter((-1.0) ** i, axes=(0,)))) < 1e-12


def test_filter_smooth_amplitude_loss():
    g = Grid(64, 8, 8, 2.0, 1.0, 1.0)
    x = g.mesh()[0]
    f = np.sin(2 * np.pi * x / g.lx)
    out = solution_filter(f, 0.49, axes=(0,))
    assert np.max(np.abs(out - f)) < 1e-6
    assert 1 - filter8_transfer(0.49, 2 * np.pi / 64) < 1e-6


@pytest.mark.parametrize("alpha", [0.25, 0.5, 0.6, -0.1])
def test_filter_bad_alpha(alpha, cube16):
    with pytest.raises(BadAlpha):
        solution_filter(np.zeros(cube16.shape), alpha)


@given(alpha=st.floats(0.26, 0.499))
def test_filter_transfer_endpoints(alpha):
    assert filter8_transfer(alpha, 0.0) == pytest.approx(1.0, abs=1e-14)
    assert abs(filter8_transfer(alpha, np.pi)) < 1e-13


def test_filter_reversal_symmetry(rng):
    f = rng.normal(size=(16, 12, 10))
    rev = f[::-1, ::-1, ::-1]
    np.testing.assert_allclose(solution_filter(rev), solution_filter(f)[::-1, ::-1, ::-1], atol=1e-13)


def test_filter_on_batched_fields(rng):
    f = rng.normal(size=(5, 12, 12, 12))
    out = solution_filter(f)
    np.testing.assert_allclose(out[2], solution_filter(f[2]), atol=1e-14)
