"""Right-hand sides and time integrators.

Pointwise RHS functions work on analytic chart fields through the tensor
module. The integrators act on one-dimensional discretizations: revolution
profiles for mean curvature flow, warped profiles for the ambient flows, and
radial/periodic grids for the backward conjugate heat equation.
"""

from __future__ import annotations

import csv
import functools
import logging
import struct
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from . import tensor
from .hypersurface import Immersion, induced_package
from .profiles import FourierProfile
from .tensor import DEFAULT_FD, FD, alpha_n, stencil_weights
from .warped import WarpedState

log = logging.getLogger(__name__)


class NumericalAbort(RuntimeError):
    """Blow-up, positivity loss or an unrecoverable step failure."""


# --------------------------------------------------------------------------
# pointwise right-hand sides
# --------------------------------------------------------------------------


@dataclass
class AmbientState:
    """Metric, dilaton and optional potential as chart fields."""

    g: Callable
    w: Callable
    n: int
    f: Callable | None = None
    t: float = 0.0
    tau: float | None = None

    @property
    def alpha(self) -> float:
        return alpha_n(self.n)


def extended_ricci_rhs(state: AmbientState, x, fd: FD = DEFAULT_FD) -> dict:
    """dg = -2 Ric + 2 alpha dw dw, dw = Lap w."""
    t = state.t
    cp = tensor.curvature_package(state.g, x, t, fd)
    ops = tensor.differential_ops(state.w, state.g, x, t, fd)
    dg = -2 * cp.ric
    if state.alpha * ops.grad_sq != 0.0:
        dg = dg + 2 * state.alpha * np.outer(ops.df, ops.df)
    return {"g": dg, "w": ops.lap}


def perelman_modified_rhs(state: AmbientState, x, fd: FD = DEFAULT_FD,
                          tau_term: bool = False) -> dict:
    """Modified flow with the potential equation.

    ``tau_term`` adds ``n/(2 tau)`` to the potential rate (entropy gauge).
    """
    if state.f is None:
        raise ValueError("modified flow needs a potential f")
    t, al = state.t, state.alpha
    cp = tensor.curvature_package(state.g, x, t, fd)
    wo = tensor.differential_ops(state.w, state.g, x, t, fd)
    fo = tensor.differential_ops(state.f, state.g, x, t, fd)
    dg = -2 * (cp.ric + fo.hess - al * np.outer(wo.df, wo.df))
    dw = wo.lap - fo.df @ wo.grad
    df = -fo.lap - cp.scalar + al * wo.grad_sq
    if tau_term:
        df += state.n / (2 * state.tau)
    return {"g": dg, "w": dw, "f": df}


def mcf_velocity(imm: Immersion, state: AmbientState, p, fd: FD = DEFAULT_FD) -> np.ndarray:
    """H e0 in chart components (inward normal, so spheres shrink)."""
    pkg = induced_package(imm, state.g, p, state.t, fd)
    return pkg.H * pkg.e0


def tangent_state(state: AmbientState, delta: float, rhs=perelman_modified_rhs,
                  fd: FD = DEFAULT_FD, **kw) -> AmbientState:
    """Fields displaced by ``delta`` along the flow direction at ``state.t``.

    Any smooth quantity Q satisfies ``(Q(S(d)) - Q(S(-d))) / 2d = dQ/dt +
    O(d^2)`` on this path, which makes the flow derivative available without
    integrating backward-parabolic equations.
    """
    t0 = state.t

    def gd(x, t=None):
        return np.asarray(state.g(x, t0)) + delta * rhs(state, x, fd, **kw)["g"]

    def wd(x, t=None):
        return float(state.w(x, t0)) + delta * rhs(state, x, fd, **kw)["w"]

    fdl = None
    if state.f is not None:
        def fdl(x, t=None):
            return float(state.f(x, t0)) + delta * rhs(state, x, fd, **kw).get("f", 0.0)
    tau = None if state.tau is None else state.tau - delta
    return AmbientState(g=gd, w=wd, n=state.n, f=fdl, t=t0, tau=tau)


def advanced_immersion(imm: Immersion, state: AmbientState, delta: float,
                       fd: FD = DEFAULT_FD) -> Immersion:
    """Immersion displaced by ``delta`` times the MCF velocity."""
    t0 = state.t

    def embed(p, t=None):
        return imm.point(p, t0) + delta * mcf_velocity(imm, state, p, fd)

    return replace(imm, embed=embed)


# --------------------------------------------------------------------------
# generic explicit integration
# --------------------------------------------------------------------------


@dataclass
class FlowTrajectory:
    times: list = field(default_factory=list)
    states: list = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)
    truncated: bool = False

    def as_array(self) -> np.ndarray:
        return np.array(self.states)


def rk4_step(rhs, y, t: float, dt: float):
    k1 = rhs(y, t)
    k2 = rhs(y + 0.5 * dt * k1, t + 0.5 * dt)
    k3 = rhs(y + 0.5 * dt * k2, t + 0.5 * dt)
    k4 = rhs(y + dt * k3, t + dt)
    return y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def integrate_flow(rhs, y0, t0: float, t1: float, dt: float, dt_max: float | None = None,
                   snapshot_every: int = 1, blowup: float = 1e8,
                   post: Callable | None = None) -> FlowTrajectory:
    """Explicit RK4 from t0 to t1 (either direction).

    ``dt_max`` is the CFL bound; a larger requested step is halved until it
    complies. ``post`` maps the state after each step (constraint projection).
    """
    span = t1 - t0
    if span == 0:
        return FlowTrajectory([t0], [np.array(y0, dtype=float)])
    step = abs(dt)
    halvings = 0
    while dt_max is not None and step > dt_max:
        step *= 0.5
        halvings += 1
    nsteps = max(1, int(np.ceil(abs(span) / step - 1e-9)))
    h = span / nsteps
    y = np.array(y0, dtype=float)
    traj = FlowTrajectory([t0], [y.copy()], {"dt": abs(h), "halvings": halvings,
                                             "cfl": None if dt_max is None else abs(h) / dt_max})
    t = t0
    for i in range(nsteps):
        y = rk4_step(rhs, y, t, h)
        if post is not None:
            y = post(y, t + h)
        t = t0 + (i + 1) * h
        if not np.all(np.isfinite(y)) or np.max(np.abs(y)) > blowup:
            traj.truncated = True
            traj.diagnostics["blowup_time"] = t
            log.warning("blow-up detected at t=%g", t)
            break
        if (i + 1) % snapshot_every == 0 or i == nsteps - 1:
            traj.times.append(t)
            traj.states.append(y.copy())
    return traj


# --------------------------------------------------------------------------
# spatial derivative helpers
# --------------------------------------------------------------------------


def periodic_fd4(u: np.ndarray, h: float, k: int) -> np.ndarray:
    """4th-order central k-th derivative (k = 1, 2) on a periodic grid."""
    if k == 1:
        return (8 * (np.roll(u, -1) - np.roll(u, 1)) - (np.roll(u, -2) - np.roll(u, 2))) / (12 * h)
    return (-(np.roll(u, -2) + np.roll(u, 2)) + 16 * (np.roll(u, -1) + np.roll(u, 1))
            - 30 * u) / (12 * h ** 2)


def periodic_spectral(u: np.ndarray, period: float, k: int) -> np.ndarray:
    return FourierProfile(u, period).grid_derivative(k)


# --------------------------------------------------------------------------
# mean curvature flow of hypersurfaces of revolution in R^n
# --------------------------------------------------------------------------


def revolution_grid(N: int) -> np.ndarray:
    return (np.arange(N) + 0.5) * np.pi / N


def _extend(rho, z):
    return np.concatenate([rho, -rho[::-1]]), np.concatenate([z, z[::-1]])


def revolution_geometry(rho, z, n: int, deriv: str = "fd4") -> dict:
    """Inward normal, principal curvatures and H of a revolution profile.

    ``rho, z`` are sampled at theta_j = (j + 1/2) pi / N; the profile is
    extended to a full period with rho odd and z even across the poles.
    """
    N = rho.size
    re, ze = _extend(rho, z)
    if deriv == "spectral":
        d = [periodic_spectral(v, 2 * np.pi, k) for v in (re, ze) for k in (1, 2)]
    else:
        h = np.pi / N
        d = [periodic_fd4(v, h, k) for v in (re, ze) for k in (1, 2)]
    r1, r2, z1, z2 = (v[:N] for v in d)
    speed = np.hypot(r1, z1)
    Nr, Nz = z1 / speed, -r1 / speed
    k_mer = (r2 * z1 - z2 * r1) / speed ** 3
    k_rot = -Nr / rho
    H = k_mer + (n - 2) * k_rot
    return {"H": H, "Nr": Nr, "Nz": Nz, "k_mer": k_mer, "k_rot": k_rot, "speed": speed,
            "r1": r1, "z1": z1}


def revolution_mcf_rhs(n: int, deriv: str = "fd4"):
    def rhs(y, t):
        N = y.size // 2
        geo = revolution_geometry(y[:N], y[N:], n, deriv)
        return np.concatenate([geo["H"] * geo["Nr"], geo["H"] * geo["Nz"]])
    return rhs


def revolution_cfl(y, c_cfl: float = 0.2) -> float:
    N = y.size // 2
    re, ze = _extend(y[:N], y[N:])
    seg = np.hypot(np.diff(re), np.diff(ze))
    return c_cfl * float(np.min(seg[:N])) ** 2


def evolve_revolution(rho0, z0, n: int, t0: float, t1: float, dt: float,
                      deriv: str = "fd4", snapshot_every: int = 1,
                      c_cfl: float = 0.2) -> FlowTrajectory:
    y0 = np.concatenate([rho0, z0])
    # spectral second derivatives have about twice the fd4 spectral radius
    c_eff = c_cfl if deriv == "fd4" else 0.25 * c_cfl
    return integrate_flow(revolution_mcf_rhs(n, deriv), y0, t0, t1, dt,
                          dt_max=revolution_cfl(y0, c_eff), snapshot_every=snapshot_every)


def revolution_area_weights(n: int, N: int) -> np.ndarray:
    from .hypersurface import revolution_weights
    return revolution_weights(N, n)[1]


def revolution_integral(values, rho, z, n: int, deriv: str = "spectral") -> float:
    """int values dA over a revolution hypersurface given on the staggered grid."""
    geo = revolution_geometry(rho, z, n, deriv)
    w = revolution_area_weights(n, rho.size)
    return float(np.sum(w * values * np.abs(rho) ** (n - 2) * geo["speed"]))


# --------------------------------------------------------------------------
# warped profile flows (closed case: r periodic)
# --------------------------------------------------------------------------


def warped_pack(state: WarpedState, r_slice: float | None = None) -> np.ndarray:
    parts = [state.a.values, state.b.values, state.w.values, state.f.values]
    y = np.concatenate(parts)
    return np.append(y, r_slice) if r_slice is not None else y


def warped_unpack(y: np.ndarray, template: WarpedState, with_slice: bool = False):
    N = template.a.N
    prof = lambda v: template.a.with_values(v)  # noqa: E731
    st = replace(template, a=prof(y[:N]), b=prof(y[N:2 * N]), w=prof(y[2 * N:3 * N]),
                 f=prof(y[3 * N:4 * N]))
    return (st, float(y[4 * N])) if with_slice else (st, None)


def warped_flow_rhs(template: WarpedState, kind: str = "extended", with_slice: bool = False,
                    tau0: float | None = None, t_ref: float = 0.0):
    """RHS on packed Fourier profiles (a, b, w, f[, slice radius]).

    ``kind`` is ``extended`` or ``modified``; ``entropy`` is the modified
    flow whose potential carries ``n/(2 tau)`` with ``tau = tau0 - (t - t_ref)``.
    """
    def rhs(y, t):
        st, rs = warped_unpack(y, template, with_slice)
        r = st.a.grid
        if kind == "extended":
            rates = st.extended_ricci_rates(r)
        else:
            if kind == "entropy":
                st = replace(st, tau=tau0 - (t - t_ref))
            rates = st.modified_rates(r, tau_term=(kind == "entropy"))
        out = [rates["a2"] / (2 * st.a.values), rates["b2"] / (2 * st.b.values),
               rates["w"], rates["f"]]
        res = np.concatenate(out)
        if with_slice:
            res = np.append(res, float(st.mcf_slice_speed(rs)))
        return res
    return rhs


def warped_cfl(state: WarpedState, c_cfl: float = 0.2) -> float:
    h = state.a.period / state.a.N
    return c_cfl * (h * float(np.min(state.a.values))) ** 2


def evolve_warped(state: WarpedState, t0: float, t1: float, dt: float, kind: str = "extended",
                  r_slice: float | None = None, snapshot_every: int = 1,
                  tau0: float | None = None) -> tuple:
    """Integrate a closed warped state; returns (trajectory, unpack function)."""
    with_slice = r_slice is not None
    y0 = warped_pack(state, r_slice)
    traj = integrate_flow(warped_flow_rhs(state, kind, with_slice, tau0, t0), y0, t0, t1, dt,
                          dt_max=warped_cfl(state), snapshot_every=snapshot_every)

    def unpack(y):
        return warped_unpack(y, state, with_slice)

    return traj, unpack


# --------------------------------------------------------------------------
# backward conjugate heat equation
# --------------------------------------------------------------------------


@dataclass
class Coefficients:
    """Coefficients of Lu = u_ss + drift u_s + potential u on a 1D grid.

    Under the conjugate heat equation with s = b - t: du/ds = Lu with
    drift = m b_s / b and potential = -(R - alpha |grad w|^2).
    """

    a: np.ndarray
    drift: np.ndarray
    potential: np.ndarray
    a_r: np.ndarray


def warped_coefficients(state: WarpedState, r) -> Coefficients:
    geo = state.geometry(r)
    ws = state.scalar_ops(state.w, r)
    return Coefficients(a=geo["a"], drift=state.m * geo["bs"] / geo["b"],
                        potential=-(geo["R"] - state.alpha * ws["s"] ** 2),
                        a_r=state.a(r, 1))


class CoefficientHistory:
    """Cubic Hermite interpolation in time of grid coefficients."""

    def __init__(self, times, coeffs: list, rates: list | None = None):
        self.times = np.asarray(times, dtype=float)
        self.static = len(coeffs) == 1
        names = ("a", "drift", "potential", "a_r")
        if self.static:
            self.fixed = coeffs[0]
            return
        self.splines = {}
        for nm in names:
            vals = np.array([getattr(c, nm) for c in coeffs])
            if rates is None:
                dv = np.gradient(vals, self.times, axis=0, edge_order=2)
            else:
                dv = np.array([getattr(c, nm) for c in rates])
            self.splines[nm] = CubicHermiteSpline(self.times, vals, dv, axis=0)

    def __call__(self, t: float) -> Coefficients:
        if self.static:
            return self.fixed
        return Coefficients(**{k: s(t) for k, s in self.splines.items()})


@functools.lru_cache(maxsize=32)
def interval_diff_matrices(N: int, order: int = 4) -> tuple:
    """First/second derivative matrices (unit spacing), one-sided near the ends."""
    D1 = np.zeros((N, N))
    D2 = np.zeros((N, N))
    half = order // 2
    for i in range(N):
        lo = max(0, min(i - half, N - order - 1))
        D1[i, lo:lo + order + 1] = stencil_weights(tuple(range(lo - i, lo - i + order + 1)), 1)
        lo2 = max(0, min(i - half, N - order - 2))
        D2[i, lo2:lo2 + order + 2] = stencil_weights(tuple(range(lo2 - i, lo2 - i + order + 2)), 2)
    return D1, D2


def _interval_operator(u, h, c: Coefficients, order: int = 4):
    """u_ss + drift u_s + potential u on a uniform grid in r, one-sided near ends."""
    D1, D2 = interval_diff_matrices(u.size, order)
    d1 = D1 @ u / h
    d2 = D2 @ u / h ** 2
    us = d1 / c.a
    uss = d2 / c.a ** 2 - c.a_r * d1 / c.a ** 3
    return uss + c.drift * us + c.potential * u


@dataclass
class BoundaryCondition:
    """Boundary data at one end of an interval grid.

    kind ``dirichlet``: value(t); kind ``robin``: e0 u = coef(t) u with the
    inward normal ``sigma / a d_r``.
    """

    kind: str
    value: Callable | None = None
    coef: Callable | None = None
    sigma: float = 1.0


def _apply_bc(u, t, h, c: Coefficients, bcs, order: int = 4):
    u = u.copy()
    for side, bc in zip((0, -1), bcs):
        if bc is None:
            continue
        if bc.kind == "dirichlet":
            u[side] = bc.value(t)
            continue
        # Robin via one-sided derivative: sigma u_r / a = kappa u at the end node
        offs = tuple(range(order + 1)) if side == 0 else tuple(range(-order, 1))
        wts = stencil_weights(offs, 1) / h
        idx = np.arange(order + 1) if side == 0 else np.arange(u.size - order - 1, u.size)
        kappa = bc.coef(t) * c.a[side] / bc.sigma
        w_end = wts[0] if side == 0 else wts[-1]
        rest = wts @ u[idx] - w_end * u[side]
        u[side] = -rest / (w_end - kappa)
    return u


def conjugate_heat_solve_backward(r: np.ndarray, coeffs: CoefficientHistory, u_b: np.ndarray,
                                  t_a: float, t_b: float, dt: float, periodic: bool = True,
                                  bcs=(None, None), c_cfl: float = 0.2, order: int = 4,
                                  snapshot_every: int = 1) -> FlowTrajectory:
    """Solve du/dt = -Lap u + R u - alpha |grad w|^2 u backward from t_b to t_a.

    ``r`` is the uniform grid (periodic, or with the boundary at both end
    nodes). Positivity is checked after every step.
    """
    r = np.asarray(r, dtype=float)
    h = r[1] - r[0]
    period = h * r.size

    def L(u, t):
        c = coeffs(t)
        if periodic:
            us = periodic_spectral(u, period, 1) / c.a
            uss = periodic_spectral(u, period, 2) / c.a ** 2 - c.a_r * us / c.a ** 2
            return uss + c.drift * us + c.potential * u
        ub = _apply_bc(u, t, h, c, bcs, order)
        out = _interval_operator(ub, h, c, order)
        for side, bc in zip((0, -1), bcs):
            if bc is not None:
                out[side] = 0.0
        return out

    # s = t_b - t, du/ds = L u evaluated at t = t_b - s
    def rhs(y, s):
        return L(y, t_b - s)

    def post(y, s):
        if not periodic:
            y = _apply_bc(y, t_b - s, h, coeffs(t_b - s), bcs, order)
        if np.any(y <= 0):
            raise NumericalAbort(f"positivity lost at t={t_b - s:.6g}, "
                                 f"node {int(np.argmin(y))}")
        return y

    amin = float(np.min(coeffs(t_b).a))
    dt_max = c_cfl * (h * amin) ** 2 if periodic else c_cfl * 0.75 * (h * amin) ** 2
    u0 = post(np.asarray(u_b, dtype=float), 0.0)
    traj = integrate_flow(rhs, u0, 0.0, t_b - t_a, dt, dt_max=dt_max,
                          snapshot_every=snapshot_every, post=post)
    traj.times = [t_b - s for s in traj.times]
    return traj


def warped_history(states: list, times) -> CoefficientHistory:
    """Coefficient history on the Fourier grid of a closed warped trajectory."""
    r = states[0].a.grid
    coeffs = [warped_coefficients(s, r) for s in states]
    return CoefficientHistory(times, coeffs)


# --------------------------------------------------------------------------
# export
# --------------------------------------------------------------------------


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_csv(path, columns: dict) -> None:
    names = list(columns)
    rows = zip(*[np.atleast_1d(columns[k]) for k in names])
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(names)
        for row in rows:
            wr.writerow([fmt(v) for v in row])


SNAPSHOT_MAGIC = b"FLOWSNAP"
SNAPSHOT_VERSION = 1


def write_snapshot(path, t: float, arrays: dict) -> None:
    """Binary snapshot: magic, version, time, count, then (name, shape, data)."""
    with open(path, "wb") as fh:
        fh.write(SNAPSHOT_MAGIC)
        fh.write(struct.pack("<Id I", SNAPSHOT_VERSION, float(t), len(arrays)))
        for name, arr in arrays.items():
            arr = np.ascontiguousarray(arr, dtype="<f8")
            key = name.encode()
            fh.write(struct.pack("<I", len(key)) + key)
            fh.write(struct.pack("<I", arr.ndim) + struct.pack(f"<{arr.ndim}Q", *arr.shape))
            fh.write(arr.tobytes())


def read_snapshot(path) -> tuple:
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:8] != SNAPSHOT_MAGIC:
        raise ValueError("not a snapshot file")
    off = 8
    version, t, count = struct.unpack_from("<Id I", data, off)
    if version != SNAPSHOT_VERSION:
        raise ValueError(f"unsupported snapshot version {version}")
    off += struct.calcsize("<Id I")
    arrays = {}
    for _ in range(count):
        (klen,) = struct.unpack_from("<I", data, off)
        off += 4
        name = data[off:off + klen].decode()
        off += klen
        (ndim,) = struct.unpack_from("<I", data, off)
        off += 4
        shape = struct.unpack_from(f"<{ndim}Q", data, off)
        off += 8 * ndim
        size = int(np.prod(shape)) if ndim else 1
        arrays[name] = np.frombuffer(data, dtype="<f8", count=size, offset=off).reshape(shape)
        off += 8 * size
    return t, arrays
