"""Finite differences, curvature and tensor calculus in coordinates."""

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from flowlab import tensor
from flowlab.tensor import FD, Chart


def flat(n):
    return lambda x, t: np.eye(n)


def stereo_sphere(n, radius=1.0):
    """Round sphere of ``radius`` in stereographic coordinates."""
    def g(x, t):
        x = np.asarray(x, dtype=float)
        return (2 * radius / (1 + x @ x)) ** 2 * np.eye(n)
    return g


def warped_torus(x, t):
    phi = 2 + np.sin(x[0])
    return np.diag([1.0, phi ** 2, phi ** 2])


# -- finite differences ------------------------------------------------------


def test_second_derivative_of_square():
    val = tensor.fd_derivative(lambda x, t: x[0] ** 2, (2, 0, 0), np.array([0.7, 0.1, -0.3]))
    assert val == pytest.approx(2.0, abs=1e-6)


def test_derivative_of_constant_vanishes():
    # roundoff grows like eps / h^k
    for mi in [(1, 0, 0), (0, 2, 0), (1, 1, 1)]:
        assert abs(tensor.fd_derivative(lambda x, t: 3.5, mi, np.zeros(3))) < 1e-7


def test_first_derivative_sine_fourth_order():
    fd = FD(h=1e-2, order=4)
    x = np.array([0.4, 0.0, 0.0])
    val = tensor.fd_derivative(lambda y, t: np.sin(y[0]), (1, 0, 0), x, fd=fd)
    assert abs(val - np.cos(0.4)) < 1e-8


def test_stencil_order_observed():
    x = np.array([0.3, 0.0, 0.0])
    errs = []
    for h in (4e-2, 2e-2, 1e-2):
        val = tensor.fd_derivative(lambda y, t: np.exp(y[0]), (1, 0, 0), x, fd=FD(h=h, order=4))
        errs.append(abs(val - np.exp(0.3)))
    slopes = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(np.abs(slopes - 4) < 0.2)


def test_total_order_above_three_rejected():
    with pytest.raises(ValueError):
        tensor.fd_derivative(lambda x, t: 0.0, (2, 2, 0), np.zeros(3))


def test_small_chart_rejected():
    with pytest.raises(ValueError):
        Chart(dim=2)


def test_invalid_stencil_order_rejected():
    with pytest.raises(ValueError):
        FD(order=3)


def test_alpha_constant():
    assert tensor.alpha_n(3) == 2.0
    assert tensor.alpha_n(4) == 1.5
    with pytest.raises(ValueError):
        tensor.alpha_n(2)


def test_degenerate_metric_raises():
    with pytest.raises(tensor.DegenerateMetricError):
        tensor.invert_metric(np.diag([1.0, 0.0, 1.0]))


@settings(max_examples=25, deadline=None)
@given(st.floats(min_value=0.0, max_value=1.0))
def test_one_sided_stencil_flag(x0):
    chart = Chart(dim=3, coord_ranges=((0.0, 1.0), (-1.0, 1.0), (-1.0, 1.0)))
    fd = FD(h=1e-2, order=4)
    val, info = tensor.fd_derivative(lambda y, t: y[0] ** 3, (1, 0, 0), np.array([x0, 0.0, 0.0]),
                                     fd=fd, chart=chart, return_info=True)
    near = x0 < 2e-2 or x0 > 1 - 2e-2
    assert (0 in info["one_sided_axes"]) == near
    assert val == pytest.approx(3 * x0 ** 2, abs=1e-5)


# -- curvature ---------------------------------------------------------------


def test_flat_curvature_vanishes():
    pkg = tensor.curvature_package(flat(4), np.array([0.1, 0.2, 0.3, 0.4]))
    assert np.max(np.abs(pkg.riem)) < 1e-10
    assert abs(pkg.scalar) < 1e-10


@pytest.mark.parametrize("n", [3, 4])
def test_unit_sphere_curvature(n):
    x = np.linspace(0.1, 0.3, n)
    pkg = tensor.curvature_package(stereo_sphere(n), x)
    assert np.max(np.abs(pkg.ric - (n - 1) * pkg.g)) < 1e-6
    assert pkg.scalar == pytest.approx(n * (n - 1), abs=1e-6)


def test_sphere_curvature_scales_with_radius():
    pkg = tensor.curvature_package(stereo_sphere(3, radius=2.0), np.array([0.2, 0.1, 0.0]))
    assert pkg.scalar == pytest.approx(6 / 4, abs=1e-6)


def _warped_oracle(r0):
    """Ricci tensor and scalar of dr^2 + (2 + sin r)^2 (dth^2 + dps^2) from sympy."""
    r, th, ps = sp.symbols("r th ps")
    X = [r, th, ps]
    phi = 2 + sp.sin(r)
    G = sp.diag(1, phi ** 2, phi ** 2)
    Gi = G.inv()
    n = 3
    Gam = [[[sum(Gi[a, d] * (sp.diff(G[d, b], X[c]) + sp.diff(G[d, c], X[b])
                             - sp.diff(G[b, c], X[d])) for d in range(n)) / 2
             for c in range(n)] for b in range(n)] for a in range(n)]

    def ricci(b, c):
        return sp.simplify(sum(sp.diff(Gam[a][b][c], X[a]) - sp.diff(Gam[a][b][a], X[c])
                               + sum(Gam[a][a][d] * Gam[d][b][c] - Gam[a][c][d] * Gam[d][b][a]
                                     for d in range(n)) for a in range(n)))

    Ric = sp.Matrix(n, n, lambda b, c: ricci(b, c))
    R = sp.simplify(sum(Gi[a, b] * Ric[a, b] for a in range(n) for b in range(n)))
    f_ric = sp.lambdify(r, Ric, "numpy")
    f_R = sp.lambdify(r, R, "numpy")
    return np.array(f_ric(r0), dtype=float), float(f_R(r0))


def test_warped_torus_against_symbolic_oracle():
    x = np.array([0.6, 1.0, 2.0])
    ric, R = _warped_oracle(x[0])
    pkg = tensor.curvature_package(warped_torus, x)
    assert np.max(np.abs(pkg.ric - ric)) < 1e-6
    assert abs(pkg.scalar - R) < 1e-6


def test_warped_torus_closed_form():
    # fiber components of Ric for a flat 2-torus fiber: -(phi phi'' + phi'^2)
    r = 1.3
    phi, dphi, ddphi = 2 + np.sin(r), np.cos(r), -np.sin(r)
    pkg = tensor.curvature_package(warped_torus, np.array([r, 0.0, 0.0]))
    assert pkg.ric[0, 0] == pytest.approx(-2 * ddphi / phi, abs=1e-6)
    assert pkg.ric[1, 1] == pytest.approx(-(phi * ddphi + dphi ** 2), abs=1e-6)


@settings(max_examples=15, deadline=None)
@given(st.lists(st.floats(min_value=-0.5, max_value=0.5), min_size=3, max_size=3))
def test_riemann_symmetries(xs):
    def g(x, t):
        x = np.asarray(x)
        return np.array([[1 + 0.2 * np.sin(x[1]), 0.1 * x[2], 0.0],
                         [0.1 * x[2], 1.5 + 0.1 * x[0] ** 2, 0.05 * np.cos(x[0])],
                         [0.0, 0.05 * np.cos(x[0]), 2.0 + 0.3 * x[1] * x[0]]])

    pkg = tensor.curvature_package(g, np.array(xs))
    res = tensor.riemann_symmetry_residuals(pkg)
    assert res["antisym_ab"] < 1e-12
    assert res["antisym_cx"] < 1e-12
    assert res["pair_swap"] < 1e-5
    assert res["first_bianchi"] < 1e-5


@settings(max_examples=20, deadline=None)
@given(st.lists(st.floats(min_value=-2, max_value=2), min_size=3, max_size=3))
def test_inverse_metric_identity(xs):
    pkg = tensor.curvature_package(stereo_sphere(3), np.array(xs))
    assert np.max(np.abs(pkg.ginv @ pkg.g - np.eye(3))) < 1e-12


# -- scalar operators --------------------------------------------------------


def test_ops_half_square():
    x = np.array([0.3, -0.2, 0.5])
    ops = tensor.differential_ops(lambda y, t: 0.5 * y @ y, flat(3), x)
    assert np.allclose(ops.grad, x, atol=1e-8)
    assert np.allclose(ops.hess, np.eye(3), atol=1e-6)
    assert ops.lap == pytest.approx(3.0, abs=1e-6)
    assert ops.grad_sq == pytest.approx(x @ x, abs=1e-8)


def test_ops_linear_function():
    c = np.array([1.0, -2.0, 0.5])
    ops = tensor.differential_ops(lambda y, t: c @ y, flat(3), np.array([0.1, 0.2, 0.3]))
    assert np.allclose(ops.df, c, atol=1e-9)
    assert np.max(np.abs(ops.hess)) < 1e-6


def test_ops_gaussian_potential():
    tau, n = 0.7, 4
    x = np.array([0.2, -0.1, 0.4, 0.3])
    ops = tensor.differential_ops(lambda y, t: y @ y / (4 * tau), flat(n), x)
    assert ops.lap == pytest.approx(n / (2 * tau), abs=1e-6)
    assert ops.grad_sq == pytest.approx(x @ x / (4 * tau ** 2), abs=1e-8)


def test_sphere_laplacian_of_height():
    # x_{n+1} restricted to the unit sphere is a first eigenfunction: lap = -n h
    n = 3

    def height(y, t):
        s = y @ y
        return (s - 1) / (s + 1)

    x = np.array([0.3, 0.2, -0.1])
    ops = tensor.differential_ops(height, stereo_sphere(n), x)
    assert ops.lap == pytest.approx(-n * height(x, 0), abs=1e-6)


# -- Lie derivative ----------------------------------------------------------


def test_lie_derivative_of_gradient_field():
    g = flat(3)
    f = lambda y, t: np.sin(y[0]) * y[1] + y[2] ** 2
    x = np.array([0.3, 0.4, -0.2])
    X = lambda y, t: tensor.differential_ops(f, g, y, t).grad
    L = tensor.lie_derivative_metric(g, X, x, fd=FD(order=4, h=1e-3))
    hess = tensor.differential_ops(f, g, x).hess
    assert np.max(np.abs(L - 2 * hess)) < 1e-5


def test_rotation_is_killing():
    X = lambda y, t: np.array([-y[1], y[0], 0.0])
    L = tensor.lie_derivative_metric(flat(3), X, np.array([0.5, -0.4, 0.9]))
    assert np.max(np.abs(L)) < 1e-9


# -- Bianchi -----------------------------------------------------------------


FD_B = FD(order=4, h_outer=2e-2)


@pytest.mark.parametrize("metric,x", [
    (flat(3), np.array([0.1, 0.2, 0.3])),
    (stereo_sphere(3), np.array([0.2, 0.1, -0.1])),
    (warped_torus, np.array([0.8, 0.0, 0.0])),
])
def test_contracted_bianchi(metric, x):
    assert np.max(np.abs(tensor.bianchi_residual(metric, x, fd=FD_B))) < 1e-4


def test_bianchi_residual_converges():
    x = np.array([0.8, 0.3, 0.0])
    errs = [np.max(np.abs(tensor.bianchi_residual(warped_torus, x, fd=FD(order=4, h_outer=h))))
            for h in (8e-2, 4e-2)]
    assert errs[1] < errs[0] / 8
