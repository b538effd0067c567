"""Induced geometry, intrinsic operators and quadrature on hypersurfaces."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from flowlab import build_scenario, builtin_spec
from flowlab import hypersurface as hs
from flowlab.tensor import FD


def flat(n):
    return lambda x, t: np.eye(n)


def test_round_sphere_second_fundamental_form():
    r = 1.7
    imm = hs.round_sphere(r, 3)
    pk = hs.induced_package(imm, flat(3), np.array([0.8, 0.4]))
    assert np.max(np.abs(pk.A - pk.ghat / r)) < 1e-7
    assert pk.H == pytest.approx(2 / r, abs=1e-7)


def test_round_sphere_in_four_dimensions():
    imm = hs.round_sphere(2.0, 4)
    pk = hs.induced_package(imm, flat(4), np.array([1.1, 0.9, 0.3]))
    assert pk.H == pytest.approx(3 / 2.0, abs=1e-7)


def test_flat_graph_is_totally_geodesic():
    imm = hs.graph_immersion(lambda p, t: 0.25, 3, period=1.0)
    pk = hs.induced_package(imm, flat(3), np.array([0.3, 0.6]))
    assert np.max(np.abs(pk.A)) < 1e-10
    assert np.allclose(pk.e0, [0, 0, 1])


def test_bowl_mean_curvature_is_vertical_normal():
    scn = build_scenario(builtin_spec("bowl-harnack"))
    for p in ([0.0, 0.0], [0.3, -0.2], [-0.5, 0.6]):
        pk = hs.induced_package(scn.immersion, scn.g, np.array(p))
        assert pk.H == pytest.approx(pk.e0[-1], abs=1e-6)


def test_sphere_laplacian_of_height():
    imm = hs.round_sphere(1.0, 3)
    p = np.array([0.9, 0.0])

    def z(q, s):
        return imm.point(q, s)[2]

    ops = hs.surface_differential_ops(z, imm, flat(3), p)
    assert ops.lap == pytest.approx(-2 * z(p, 0.0), abs=1e-5)


def test_torus_graph_laplacian():
    imm = hs.graph_immersion(lambda p, t: 0.0, 3, period=1.0)
    p = np.array([0.13, 0.4])
    phi = lambda q, s: np.sin(2 * np.pi * q[0])
    ops = hs.surface_differential_ops(phi, imm, flat(3), p, h=1e-3)
    assert ops.lap == pytest.approx(-(2 * np.pi) ** 2 * np.sin(2 * np.pi * 0.13), rel=1e-6)


def test_unit_sphere_area():
    area = hs.integrate_surface(1.0, hs.round_sphere(1.0, 3), flat(3), resolution=24)
    assert area == pytest.approx(4 * np.pi, rel=1e-10)


def test_shrinker_sphere_gaussian_area():
    imm = hs.round_sphere(2.0, 3)
    val = hs.integrate_surface(1.0, imm, flat(3), resolution=24,
                               weight=lambda x, t: np.exp(-x @ x / 4))
    assert val == pytest.approx(16 * np.pi / np.e, rel=1e-10)


def test_total_mean_curvature_of_unit_sphere():
    val = hs.integrate_surface(lambda pk, q: pk.H, hs.round_sphere(1.0, 3), flat(3), resolution=24)
    assert val == pytest.approx(8 * np.pi, rel=1e-7)


@settings(max_examples=10, deadline=None)
@given(st.floats(min_value=0.3, max_value=3.0), st.sampled_from([3, 4]))
def test_area_scales_with_radius(r, n):
    area = hs.integrate_surface(1.0, hs.round_sphere(r, n), flat(n), resolution=16)
    assert area == pytest.approx(hs.sphere_area(n - 1) * r ** (n - 1), rel=1e-9)


def test_codazzi_on_sphere():
    res = hs.codazzi_residual(hs.round_sphere(1.0, 3), flat(3), np.array([1.0, 0.5]))
    assert np.max(np.abs(res)) < 1e-5


def test_simons_on_sphere():
    fd = FD(order=4, h_outer=2e-2)
    res = hs.simons_residual(hs.round_sphere(1.0, 3), flat(3), np.array([1.0, 0.5]), fd=fd)
    assert np.max(np.abs(res)) < 1e-4


@settings(max_examples=20, deadline=None)
@given(st.floats(min_value=0.2, max_value=2.9), st.floats(min_value=0.0, max_value=6.0))
def test_normal_unit_and_orthogonal(theta, phi):
    def g(x, t):
        return np.diag([1.0, 1.0 + 0.3 * np.sin(x[0]) ** 2, 2.0])

    pk = hs.induced_package(hs.round_sphere(1.3, 3), g, np.array([theta, phi]))
    assert pk.e0 @ pk.g @ pk.e0 == pytest.approx(1.0, abs=1e-12)
    assert np.max(np.abs(pk.tangents @ pk.g @ pk.e0)) < 1e-10


def test_inward_normal_points_to_center():
    pk = hs.induced_package(hs.round_sphere(1.0, 3), flat(3), np.array([0.7, 0.2]))
    assert pk.e0 @ pk.x < 0


def test_degenerate_parametrization_raises():
    imm = hs.graph_immersion(lambda p, t: 0.0, 3, period=1.0)
    imm = hs.Immersion(embed=lambda p, t: np.array([p[0], p[0], 0.0]), param_dim=2,
                       kind="graph", inward=imm.inward)
    with pytest.raises(hs.ImmersionError):
        hs.induced_package(imm, flat(3), np.array([0.1, 0.2]))
