"""Scenario configs, built-in scenarios and their closed-form content."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from flowlab import ConfigError, build_scenario, builtin_spec, list_scenarios
from flowlab import hypersurface as hs
from flowlab.flows import extended_ricci_rhs
from flowlab.scenarios import ScenarioSpec, perturb_scenario
from flowlab.tensor import differential_ops


@pytest.mark.parametrize("name", [k for k, _ in list_scenarios()])
def test_builtin_scenarios_build(name):
    scn = build_scenario(builtin_spec(name))
    assert scn.n >= 3
    assert scn.spec.name == name


@pytest.mark.parametrize("name", [k for k, _ in list_scenarios()])
def test_yaml_round_trip(name):
    spec = builtin_spec(name)
    again = ScenarioSpec.from_yaml(spec.to_yaml())
    assert again.to_dict() == spec.to_dict()


def test_soliton_metadata():
    shr = build_scenario(builtin_spec("self-shrinker")).soliton
    assert shr.is_soliton and shr.case == "shrinking" and shr.c == -1 and shr.closed_form
    bowl = build_scenario(builtin_spec("bowl-harnack")).soliton
    assert bowl.is_soliton and bowl.case == "steady" and bowl.c == 0
    assert not build_scenario(builtin_spec("shrinking-sphere")).soliton.is_soliton


def test_shrinking_round_sphere_matches_flow():
    scn = build_scenario(builtin_spec("latitude-s3"))
    x = np.array([0.3, -0.2, 0.1])
    t, h = 0.02, 1e-4
    dg = (scn.g(x, t + h) - scn.g(x, t - h)) / (2 * h)
    rhs = extended_ricci_rhs(scn.state(t), x)["g"]
    assert np.max(np.abs(rhs - dg)) < 1e-6


def test_shrinker_potential_rate_equals_gradient_square():
    scn = build_scenario(builtin_spec("self-shrinker"))
    x = np.array([0.7, -0.4, 1.1])
    t, h = -0.8, 1e-5
    dfdt = (scn.f(x, t + h) - scn.f(x, t - h)) / (2 * h)
    ops = differential_ops(scn.f, scn.g, x, t)
    assert dfdt == pytest.approx(ops.grad_sq, rel=1e-8)


def test_warped_boundary_conditions_hold():
    W = build_scenario(builtin_spec("warped-boundary")).warped
    sides = list(W.boundary_sides())
    assert len(sides) == 2
    for rb, sg in sides:
        geo = W.slice_geometry(rb, sg)
        assert abs(geo["H"] + geo["e0f"]) < 1e-10
        assert abs(geo["e0w"]) < 1e-10


def test_perturb_with_zero_amplitude_is_identical():
    spec = builtin_spec("self-shrinker")
    a = build_scenario(spec).immersion
    b = build_scenario(perturb_scenario(spec, 0.0)).immersion
    for p in ([0.4, 0.0], [1.3, 0.0], [2.8, 0.0]):
        assert np.array_equal(a.point(p, -1.0), b.point(p, -1.0))


def test_perturbation_moves_surface():
    spec = builtin_spec("self-shrinker")
    b = build_scenario(perturb_scenario(spec, 1e-2)).immersion
    radii = [np.linalg.norm(b.point([th, 0.0], -1.0)) for th in (0.2, 0.8, 1.5)]
    assert np.ptp(radii) > 1e-3


def test_unknown_top_level_key_rejected():
    with pytest.raises(ConfigError, match="bogus"):
        ScenarioSpec.from_dict({"name": "x", "bogus": 1})


def test_unknown_section_key_rejected():
    with pytest.raises(ConfigError, match="surface.radius"):
        ScenarioSpec.from_dict({"name": "x", "surface": {"kind": "round-sphere", "radius": 1}})


def test_unknown_resolution_key_rejected():
    with pytest.raises(ConfigError, match="resolution.cells"):
        ScenarioSpec.from_dict({"name": "x", "resolution": {"cells": 4}})


def test_incompatible_sections_rejected():
    with pytest.raises(ConfigError):
        ScenarioSpec.from_dict({"name": "x", "ambient": {"kind": "shrinking-round-sphere"},
                                "surface": {"kind": "round-sphere"}})


def test_window_past_singular_time_rejected():
    with pytest.raises(ConfigError):
        ScenarioSpec.from_dict({"name": "x", "surface": {"kind": "round-sphere", "r0": 1.0},
                                "time_window": [0.0, 0.6]})


def test_malformed_yaml_rejected():
    with pytest.raises(ConfigError):
        ScenarioSpec.from_yaml("name: [unclosed")


def test_unknown_builtin_rejected():
    with pytest.raises(ConfigError):
        builtin_spec("no-such-scenario")


@settings(max_examples=10, deadline=None)
@given(st.floats(min_value=0.5, max_value=3.0))
def test_round_sphere_radius_follows_closed_form(r0):
    spec = ScenarioSpec.from_dict({"name": "s", "surface": {"kind": "round-sphere", "r0": r0},
                                   "time_window": [0.0, 0.1 * r0 ** 2]})
    imm = build_scenario(spec).immersion
    t = 0.05 * r0 ** 2
    pk = hs.induced_package(imm, lambda x, s: np.eye(3), np.array([1.0, 0.0]), t)
    assert pk.H == pytest.approx(2 / np.sqrt(r0 ** 2 - 4 * t), rel=1e-6)
