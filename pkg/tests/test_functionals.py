"""Weighted action, its variations, Harnack, Huisken and entropy functionals."""

from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from flowlab import build_scenario, builtin_spec
from flowlab import functionals as fn
from flowlab import hypersurface as hs
from flowlab.flows import AmbientState
from flowlab.profiles import ChebProfile
from flowlab.warped import flat_ball

ZERO = lambda r: np.zeros_like(np.asarray(r, dtype=float))  # noqa: E731


def flat(n):
    return lambda x, t: np.eye(n)


# -- action ------------------------------------------------------------------


def test_flat_unit_ball_action():
    assert fn.action_I(flat_ball(3, 1.0)).value == pytest.approx(16 * np.pi, rel=1e-12)


@pytest.mark.parametrize("n,R", [(3, 2.0), (4, 1.0), (5, 0.7)])
def test_flat_ball_action_is_twice_total_mean_curvature(n, R):
    expect = 2 * (n - 1) / R * hs.sphere_area(n - 1) * R ** (n - 1)
    assert fn.action_I(flat_ball(n, R)).value == pytest.approx(expect, rel=1e-10)


def test_action_splits_into_lott_and_alpha_terms():
    W = build_scenario(builtin_spec("warped-closed")).warped
    rep = fn.action_I(W)
    assert rep.value == pytest.approx(rep.decomposition["lott"] + rep.decomposition["alpha_term"],
                                      rel=1e-12)
    assert rep.decomposition["alpha_term"] < 0


def test_constant_dilaton_action_equals_lott():
    W = build_scenario(builtin_spec("warped-closed")).warped
    const = replace(W, w=W.w.with_values(np.full(W.w.N, 0.7)))
    rep = fn.action_I(const)
    assert rep.decomposition["alpha_term"] == 0.0
    assert rep.value == rep.decomposition["lott"]


def test_action_resums():
    rep = fn.action_I(build_scenario(builtin_spec("warped-boundary")).warped)
    assert rep.resum() == pytest.approx(rep.value, rel=1e-14)
    assert rep.boundary_integrand.size == 2


def test_report_csv_columns(tmp_path):
    rep = fn.action_I(build_scenario(builtin_spec("warped-boundary")).warped, resolution=8)
    path = tmp_path / "action.csv"
    rep.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0].startswith("region,x0,weight,integrand")
    assert sum(ln.startswith("interior") for ln in lines) == 8
    assert sum(ln.startswith("boundary") for ln in lines) == 2


# -- first variation ---------------------------------------------------------


def test_zero_variation_vanishes():
    W = build_scenario(builtin_spec("warped-boundary")).warped
    assert fn.variation_delta_I(W, (ZERO, ZERO), ZERO, ZERO).value == 0.0


@pytest.mark.parametrize("n", [3, 4])
def test_conformal_variation_of_flat_ball(n):
    # v = 2c g with h = n c keeps e^-f dV fixed; scaling H and dA gives dI = -2c I
    c = 0.3
    ball = flat_ball(n, 1.0)
    const = lambda r: np.full_like(np.asarray(r, dtype=float), 2 * c)  # noqa: E731
    h = lambda r: np.full_like(np.asarray(r, dtype=float), n * c)  # noqa: E731
    dI = fn.variation_delta_I(ball, (const, const), h, ZERO).value
    assert dI == pytest.approx(-2 * c * fn.action_I(ball).value, rel=1e-10)


def test_variation_rejects_measure_change():
    W = build_scenario(builtin_spec("warped-boundary")).warped
    one = lambda r: np.ones_like(np.asarray(r, dtype=float))  # noqa: E731
    with pytest.raises(fn.TraceConditionError):
        fn.variation_delta_I(W, (one, ZERO), ZERO, ZERO)


def test_variation_matches_difference_quotient():
    W = build_scenario(builtin_spec("warped-boundary")).warped
    v_ss = lambda r: 0.2 * np.sin(r)  # noqa: E731
    v_ff = lambda r: 0.1 * np.cos(2 * r)  # noqa: E731
    m = W.m
    h = lambda r: 0.5 * (v_ss(r) + m * v_ff(r))  # noqa: E731
    th = lambda r: 0.3 * np.cos(r)  # noqa: E731
    dI = fn.variation_delta_I(W, (v_ss, v_ff), h, th).value
    eps = 1e-4
    Ip = fn.action_I(fn.perturbed_warped(W, eps, v_ss, v_ff, h, th)).value
    Im = fn.action_I(fn.perturbed_warped(W, -eps, v_ss, v_ff, h, th)).value
    assert (Ip - Im) / (2 * eps) == pytest.approx(dI, rel=1e-5)


# -- time derivative of the action ------------------------------------------


def test_dI_forms_agree_and_interior_is_nonnegative():
    W = build_scenario(builtin_spec("warped-boundary")).warped
    A = fn.dI_dt_integrands(W, "A")
    dh = [fn.warped_slice_dHdt(W, r, s) for r, s in W.boundary_sides()]
    B = fn.dI_dt_integrands(W, "B", dHdt=dh)
    assert B.value == pytest.approx(A.value, rel=1e-5)
    assert np.all(A.interior_integrand >= 0)


@settings(max_examples=8, deadline=None)
@given(st.floats(min_value=-0.5, max_value=0.5), st.floats(min_value=-0.5, max_value=0.5))
def test_dI_interior_nonnegative_for_any_fields(cw, cf):
    W = build_scenario(builtin_spec("warped-closed")).warped
    r = W.w.grid
    W = replace(W, w=W.w.with_values(cw * np.sin(r) + 0.1 * np.cos(2 * r)),
                f=W.f.with_values(cf * np.cos(r)))
    assert np.all(fn.dI_dt_integrands(W, "A").interior_integrand >= 0)


# -- Harnack -----------------------------------------------------------------


def test_harnack_sphere_control():
    # V = 0 on a shrinking sphere: Z = dH/dt = |A|^2 H = 4 / r^3 at r = 1
    scn = build_scenario(builtin_spec("shrinking-sphere"))
    state = AmbientState(g=flat(3), w=lambda x, t: 0.0, n=3, t=0.0)
    Z = fn.harnack_Z(scn.immersion, state, np.array([1.0, 0.0]), V=lambda pk: np.zeros(2))
    assert Z == pytest.approx(4.0, rel=1e-6)


def test_harnack_static_minimal_slice():
    imm = hs.coordinate_slice(lambda t: 0.3, 3)
    state = AmbientState(g=flat(3), w=lambda x, t: 0.0, n=3, t=0.0)
    Z = fn.harnack_Z(imm, state, np.array([1.0, 2.0]), V=lambda pk: np.zeros(2))
    assert abs(Z) < 1e-10


def test_harnack_vanishes_on_bowl():
    scn = build_scenario(builtin_spec("bowl-harnack"))
    for p in ([0.2, 0.1], [-0.4, 0.3]):
        Z = fn.harnack_Z(scn.immersion, scn.state(0.0), np.array(p))
        assert abs(Z) < 1e-7


# -- Huisken -----------------------------------------------------------------


def test_huisken_constant_on_self_shrinker():
    scn = build_scenario(builtin_spec("self-shrinker"))
    Q = [fn.huisken_quantity(scn.immersion, scn.g, scn.f, t, "shrinking", tau=-t, n=3,
                             resolution=24) for t in (-1.0, -0.5, -0.2)]
    assert np.allclose(Q, 16 * np.pi / np.e, rtol=1e-9)
    D = fn.huisken_dissipation(scn.immersion, scn.g, scn.f, -0.5, "shrinking", tau=0.5, n=3,
                               resolution=24)
    assert abs(D) < 1e-8


def test_huisken_scale_rejects_bad_input():
    with pytest.raises(ValueError):
        fn.huisken_scale("shrinking", 3, -1.0)
    with pytest.raises(ValueError):
        fn.huisken_scale("rotating", 3, 1.0)
    assert fn.huisken_scale("steady", 3, None) == 1.0


def test_gaussian_huisken_revolution_sphere():
    theta = (np.arange(64) + 0.5) * np.pi / 64
    Q, D = fn.gaussian_huisken_revolution(2 * np.sin(theta), 2 * np.cos(theta), 3, 1.0)
    assert Q == pytest.approx(16 * np.pi / np.e, rel=1e-12)
    assert abs(D) < 1e-12


# -- solitons ----------------------------------------------------------------


def test_shrinker_soliton_residuals():
    scn = build_scenario(builtin_spec("self-shrinker"))
    res = fn.soliton_residuals(scn.state(-1.0), -1, -1.0, points=[np.array([0.5, 0.2, -0.3])],
                               imm=scn.immersion, surface_nodes=[np.array([1.0, 0.0])])
    for key in ("ambient_eq1", "ambient_eq2", "surface_H_residual", "restricted_eq1",
                "restricted_eq2"):
        assert np.max(np.abs(res[key])) < 1e-6, key


def test_plain_sphere_is_not_a_soliton_boundary():
    r = 1.5
    state = AmbientState(g=flat(3), w=lambda x, t: 0.0, n=3, t=0.0)
    res = fn.soliton_residuals(state, 0, 0.0, imm=hs.round_sphere(r, 3),
                               surface_nodes=[np.array([0.8, 0.0])])
    assert res["surface_H_residual"][0] == pytest.approx(2 / r, rel=1e-8)


# -- entropy -----------------------------------------------------------------


def _gaussian_ball(n, R, tau):
    ball = flat_ball(n, R)
    f = ChebProfile.from_function(lambda r: r ** 2 / (4 * tau), 0.0, R, 48)
    return replace(ball, f=f, tau=tau)


@pytest.mark.parametrize("n,R,tau", [(3, 1.0, 0.5), (3, 2.0, 1.0), (3, 1.8, 1.0), (4, 1.5, 0.3)])
def test_ecker_entropy_of_gaussian_ball(n, R, tau):
    # integrating the interior by parts leaves a single boundary expression
    expect = (hs.sphere_area(n - 1) * (4 * np.pi * tau) ** (-n / 2) * np.exp(-R ** 2 / (4 * tau))
              * R ** (n - 2) * (2 * tau * (n - 1) - R ** 2))
    val = fn.entropy_W(_gaussian_ball(n, R, tau), tau).value
    assert val == pytest.approx(expect, rel=1e-9, abs=1e-10)


def test_entropy_rejects_nonpositive_tau():
    with pytest.raises(ValueError):
        fn.entropy_W(flat_ball(3, 1.0), 0.0)


def test_ecker_soliton_interior_vanishes():
    st_ = _gaussian_ball(3, 1.0, 0.5)
    rep = fn.ecker_dW_dt(st_, 0.5, [1.0])
    assert np.max(np.abs(rep.interior_integrand)) < 1e-12


def test_list_integrand_nonnegative():
    W = build_scenario(builtin_spec("warped-closed")).warped
    rep = fn.list_dW_dt_integrand(W, 1.0)
    assert np.all(rep.interior_integrand >= 0)
    assert rep.boundary_integrand.size == 0
