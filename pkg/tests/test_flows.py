"""Flow right-hand sides, time integration, conjugate heat solver and export."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from flowlab import build_scenario, builtin_spec
from flowlab import flows, tensor
from flowlab import hypersurface as hs
from flowlab.flows import AmbientState, BoundaryCondition, Coefficients, CoefficientHistory


def flat(n):
    return lambda x, t: np.eye(n)


def warped_torus(x, t):
    phi = 2 + np.sin(x[0])
    return np.diag([1.0, phi ** 2, phi ** 2])


# -- pointwise right-hand sides ---------------------------------------------


def test_constant_dilaton_gives_plain_ricci_flow():
    x = np.array([0.7, 0.1, 0.2])
    st_ = AmbientState(g=warped_torus, w=lambda y, t: 0.4, n=3)
    rhs = flows.extended_ricci_rhs(st_, x)
    assert np.array_equal(rhs["g"], -2 * tensor.curvature_package(warped_torus, x).ric)


def test_flat_torus_periodic_dilaton():
    k = 2 * np.pi
    x = np.array([0.13, 0.5, 0.2])
    st_ = AmbientState(g=flat(3), w=lambda y, t: np.sin(k * y[0]), n=3)
    rhs = flows.extended_ricci_rhs(st_, x)
    al = tensor.alpha_n(3)
    expect = np.zeros((3, 3))
    expect[0, 0] = 2 * al * (k * np.cos(k * x[0])) ** 2
    assert np.max(np.abs(rhs["g"] - expect)) < 1e-6
    assert rhs["w"] == pytest.approx(-k ** 2 * np.sin(k * x[0]), rel=1e-6)


def test_modified_flow_is_steady_on_bowl_ambient():
    scn = build_scenario(builtin_spec("bowl-harnack"))
    rhs = flows.perelman_modified_rhs(scn.state(0.0), np.array([0.3, -0.2, 0.4]))
    assert np.max(np.abs(rhs["g"])) < 1e-8
    assert abs(rhs["f"]) < 1e-8


@settings(max_examples=10, deadline=None)
@given(st.floats(min_value=0.0, max_value=6.0), st.floats(min_value=0.1, max_value=0.5))
def test_modified_flow_preserves_weighted_measure(r, amp):
    st_ = AmbientState(g=warped_torus, w=lambda y, t: amp * np.sin(y[0]) * np.cos(y[1]), n=3,
                       f=lambda y, t: amp * np.cos(y[0]) + 0.1 * y[2] ** 2)
    x = np.array([r, 0.4, 0.3])
    rhs = flows.perelman_modified_rhs(st_, x)
    ginv = np.linalg.inv(warped_torus(x, 0.0))
    trace = np.einsum("ab,ab->", ginv, rhs["g"])
    assert abs(trace / 2 - rhs["f"]) < 1e-9


def test_tau_term_shifts_potential_rate():
    st_ = AmbientState(g=flat(4), w=lambda y, t: 0.0, n=4, f=lambda y, t: 0.0, tau=0.5)
    x = np.zeros(4)
    plain = flows.perelman_modified_rhs(st_, x)["f"]
    shifted = flows.perelman_modified_rhs(st_, x, tau_term=True)["f"]
    assert shifted - plain == pytest.approx(4 / (2 * 0.5))


def test_mcf_velocity_on_sphere():
    r = 1.5
    imm = hs.round_sphere(r, 3)
    st_ = AmbientState(g=flat(3), w=lambda y, t: 0.0, n=3)
    p = np.array([0.6, 0.0])
    v = flows.mcf_velocity(imm, st_, p)
    x = imm.point(p)
    assert np.allclose(v, -(2 / r) * x / r, atol=1e-7)


# -- integration -------------------------------------------------------------


def test_integrate_radius_ode():
    traj = flows.integrate_flow(lambda y, t: -2 / y, np.array([1.0]), 0.0, 0.2, 1e-3)
    assert traj.states[-1][0] == pytest.approx(np.sqrt(1 - 0.8), rel=1e-9)
    assert not traj.truncated


def test_integrate_respects_cfl_bound():
    traj = flows.integrate_flow(lambda y, t: -y, np.array([1.0]), 0.0, 0.1, 1e-2, dt_max=3e-3)
    assert traj.diagnostics["dt"] <= 3e-3
    assert traj.diagnostics["halvings"] == 2


def test_blowup_is_flagged():
    traj = flows.integrate_flow(lambda y, t: y ** 2, np.array([1.0]), 0.0, 2.0, 1e-3)
    assert traj.truncated
    assert 0.99 < traj.diagnostics["blowup_time"] < 1.01


def test_revolution_sphere_shrinks_on_schedule():
    theta = flows.revolution_grid(64)
    traj = flows.evolve_revolution(np.sin(theta), np.cos(theta), 3, 0.0, 0.1, 1e-4)
    y = traj.states[-1]
    radius = np.hypot(y[:64], y[64:])
    assert np.max(np.abs(radius - np.sqrt(1 - 0.4))) < 1e-6


def test_extended_flow_scale_factor_on_round_s3():
    scn = build_scenario(builtin_spec("latitude-s3"))
    x = np.array([0.2, 0.1, -0.3])
    g0 = scn.g(x, 0.0)

    def rhs(y, t):
        st_ = AmbientState(g=lambda q, s: y[0] * scn.g(q, 0.0), w=lambda q, s: 0.0, n=3)
        return np.array([flows.extended_ricci_rhs(st_, x)["g"][0, 0] / g0[0, 0]])

    traj = flows.integrate_flow(rhs, np.array([1.0]), 0.0, 0.1, 1e-2)
    assert traj.states[-1][0] == pytest.approx(1 - 4 * 0.1, rel=1e-6)
    assert np.allclose(scn.g(x, 0.1), (1 - 0.4) * g0, rtol=1e-12)


# -- conjugate heat ----------------------------------------------------------


def _static(N, a=1.0):
    ones = np.ones(N)
    return CoefficientHistory([0.0], [Coefficients(a=a * ones, drift=0 * ones,
                                                   potential=0 * ones, a_r=0 * ones)])


def test_conjugate_heat_periodic_kernel():
    N, s0 = 64, 0.5
    r = 2 * np.pi * np.arange(N) / N

    def kernel(s):
        k = np.arange(-5, 6)[:, None]
        d = r[None, :] - np.pi + 2 * np.pi * k
        return np.sum(np.exp(-d ** 2 / (4 * s)), axis=0) / np.sqrt(4 * np.pi * s)

    traj = flows.conjugate_heat_solve_backward(r, _static(N), kernel(s0), 0.0, 0.2, 1e-3)
    assert traj.times[-1] == pytest.approx(0.0)
    assert np.max(np.abs(traj.states[-1] - kernel(s0 + 0.2))) < 1e-8


def test_conjugate_heat_mass_on_closed_circle():
    N = 48
    r = 2 * np.pi * np.arange(N) / N
    u = 1 + 0.5 * np.cos(r) + 0.2 * np.sin(3 * r)
    traj = flows.conjugate_heat_solve_backward(r, _static(N), u, 0.0, 0.3, 1e-3)
    masses = [np.sum(s) * (2 * np.pi / N) for s in traj.states]
    assert np.ptp(masses) < 1e-12


def test_conjugate_heat_slab_exponential():
    N = 40
    r = np.linspace(0.0, 1.0, N + 1)
    bcs = (BoundaryCondition("dirichlet", value=lambda t: np.exp(-t)),
           BoundaryCondition("dirichlet", value=lambda t: np.exp(-1 - t)))
    traj = flows.conjugate_heat_solve_backward(r, _static(N + 1), np.exp(-r - 0.1), 0.0, 0.1,
                                               1e-4, periodic=False, bcs=bcs)
    assert np.max(np.abs(traj.states[-1] - np.exp(-r))) < 1e-7


def test_conjugate_heat_positivity_abort():
    N = 32
    r = 2 * np.pi * np.arange(N) / N
    with pytest.raises(flows.NumericalAbort):
        flows.conjugate_heat_solve_backward(r, _static(N), np.cos(r), 0.0, 0.1, 1e-3)


# -- export ------------------------------------------------------------------


def test_snapshot_round_trip(tmp_path):
    arrays = {"rho": np.linspace(0, 1, 7), "grid": np.arange(6.0).reshape(2, 3)}
    path = tmp_path / "state.snap"
    flows.write_snapshot(path, 0.125, arrays)
    t, back = flows.read_snapshot(path)
    assert t == 0.125
    assert set(back) == set(arrays)
    for k in arrays:
        assert np.array_equal(back[k], arrays[k])


def test_snapshot_rejects_foreign_file(tmp_path):
    path = tmp_path / "bad.snap"
    path.write_bytes(b"NOTASNAP" + bytes(16))
    with pytest.raises(ValueError):
        flows.read_snapshot(path)


def test_float_format_round_trips():
    for x in (np.pi, 1e-300, -2.5e17, 0.1 + 0.2):
        assert float(flows.fmt(x)) == x


def test_csv_is_deterministic(tmp_path):
    cols = {"t": np.linspace(0, 1, 5), "v": np.sqrt(np.arange(5.0))}
    flows.write_csv(tmp_path / "a.csv", cols)
    flows.write_csv(tmp_path / "b.csv", cols)
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert (tmp_path / "a.csv").read_text().splitlines()[0] == "t,v"
