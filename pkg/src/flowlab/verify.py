"""Named checks with residual norms, convergence orders and verdicts.

Each check evaluates one checkable statement on one scenario and returns a
:class:`CheckReport`. Tolerances and reference resolutions live in two
tables (:data:`TOLERANCES`, :data:`RESOLUTIONS`) so that calibration is
auditable and overridable from the command line.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
from dataclasses import asdict, dataclass, field, replace
from typing import Callable

import numpy as np

from . import flows as fl
from . import functionals as fn
from . import hypersurface as hs
from . import scenarios as sc
from . import tensor
from .flows import fmt
from .profiles import ChebProfile
from .scenarios import ConfigError
from .tensor import FD
from .warped import ConstantProfile, flat_ball

log = logging.getLogger(__name__)


# --------------------------------------------------------------------------
# tolerance and resolution tables
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Tolerance:
    value: float
    calibrated: str


TOLERANCES = {
    "exact-flow.rel_err": Tolerance(1e-4, "revolution grid 256, dt 1e-5, fd4"),
    "evolution.rel_residual": Tolerance(1e-3, "FD order 6, h_outer 3e-2, step 2.5e-3"),
    "evolution.min_order": Tolerance(1.8, "step ladder 1e-2, 5e-3, 2.5e-3"),
    "variation.rel_err": Tolerance(1e-4, "Gauss-Legendre 96, Chebyshev degree 48, eps 2.5e-3"),
    "variation.slope_dev": Tolerance(0.3, "eps ladder 1e-2, 5e-3, 2.5e-3"),
    "dI.rel_err": Tolerance(1e-3, "Gauss-Legendre 96, Chebyshev degree 64, step 2.5e-3"),
    "dI.interior_min": Tolerance(1e-10, "Gauss-Legendre 96"),
    "dI.form_gap": Tolerance(1e-5, "slice dH/dt step 1e-3"),
    "dI.bc_drift": Tolerance(1e-6, "Chebyshev degree 64 endpoint fit"),
    "huisken.drift": Tolerance(1e-3, "surface quadrature 32 / 16 nodes"),
    "huisken.rel_err": Tolerance(1e-3, "spectral revolution grid 64, dt 2e-5"),
    "huisken.band_factor": Tolerance(10.0, "noise band = factor x formula-vs-FD residual"),
    "harnack.sup": Tolerance(1e-3, "FD order 6, h_outer 3e-2, dt 1e-3"),
    "harnack.control": Tolerance(0.1, "round sphere radius ~1"),
    "harnack.translator": Tolerance(1e-3, "FD order 6, h_outer 3e-2"),
    "identity.flat": Tolerance(1e-6, "FD order 6, h_outer 3e-2"),
    "identity.curved": Tolerance(1e-3, "finest rung of the h_outer ladder"),
    "identity.min_order": Tolerance(1.5, "h_outer ladder with ratio 2"),
    "conjugate-heat.drift": Tolerance(1e-6, "Fourier grid 64, dt 1e-3"),
    "conjugate-heat.soliton": Tolerance(1e-4, "81 nodes, fd4, Robin ends"),
    "reduction.exact": Tolerance(1e-12, "same code path"),
    "entropy.rel_err": Tolerance(1e-3, "Gauss-Legendre 96, step 2.5e-3"),
    "entropy.negativity": Tolerance(1e-10, "Fourier grid 64"),
}

RESOLUTIONS = {
    "exact-flow.grid": 256,
    "exact-flow.dt": 1e-5,
    "evolution.fd_order": 6,
    "evolution.h_outer": 3e-2,
    "evolution.delta": 1e-2,
    "variation.eps": 1e-2,
    "dI.delta": 1e-2,
    "huisken.grid": 64,
    "huisken.dt": 2e-5,
    "huisken.quad": 32,
    "harnack.dt": 1e-3,
    "identity.fd_order": 6,
    "identity.h_outer": 3e-2,
    "conjugate-heat.dt": 1e-3,
    "conjugate-heat.window": 0.1,
    "conjugate-heat.nodes": 81,
    "entropy.delta": 1e-2,
    "entropy.tau0": 1.0,
}


class Settings:
    """Tolerance/resolution lookup with validated ``key=value`` overrides."""

    def __init__(self, overrides: dict | None = None):
        self.tol = {k: v.value for k, v in TOLERANCES.items()}
        self.res = dict(RESOLUTIONS)
        for key, val in (overrides or {}).items():
            self.set(key, val)

    def set(self, key: str, val) -> None:
        if key in self.tol:
            self.tol[key] = _as_float(key, val)
        elif key in self.res:
            v = _as_float(key, val)
            self.res[key] = int(v) if isinstance(RESOLUTIONS[key], int) else v
        else:
            raise ConfigError(f"unknown override key '{key}'")

    def fd(self, group: str) -> FD:
        return FD(order=int(self.res[f"{group}.fd_order"]), h_outer=self.res[f"{group}.h_outer"])


def _as_float(key, val) -> float:
    try:
        v = float(val)
    except (TypeError, ValueError):
        raise ConfigError(f"override '{key}' needs a number, got '{val}'") from None
    if not math.isfinite(v):
        raise ConfigError(f"override '{key}' must be finite")
    return v


def parse_overrides(items) -> dict:
    out = {}
    for item in items or []:
        if "=" not in item:
            raise ConfigError(f"override '{item}' is not of the form key=value")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    Settings(out)  # validate before any computation
    return out


# --------------------------------------------------------------------------
# reports
# --------------------------------------------------------------------------


@dataclass
class CheckReport:
    """Outcome of one check.

    ``residual_norms[name] = {"sup": ..., "l2": ...}``; a residual passes
    when its sup is below ``tolerances[name]``. Signed residuals (margins)
    use the signed maximum instead of the absolute one.
    """

    check_id: str
    scenario_id: str
    criterion: int
    residual_norms: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    convergence_order: float | None = None
    min_order: float | None = None
    order_status: str = "n/a"
    verdict: str = "fail"
    runtime: float = 0.0
    values: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    warn: bool = False

    def add(self, name: str, values, tol: float, signed: bool = False) -> None:
        v = np.atleast_1d(np.asarray(values, dtype=float))
        sup = float(np.max(v)) if signed else float(np.max(np.abs(v)))
        self.residual_norms[name] = {"sup": sup, "l2": float(np.sqrt(np.mean(v ** 2)))}
        self.tolerances[name] = float(tol)

    def set_order(self, order: float | None, minimum: float, status: str = "measured") -> None:
        self.convergence_order = None if order is None else float(order)
        self.min_order = float(minimum)
        self.order_status = status

    def finalize(self) -> "CheckReport":
        ok = all(self.residual_norms[k]["sup"] < self.tolerances[k]
                 and math.isfinite(self.residual_norms[k]["sup"]) for k in self.residual_norms)
        if self.min_order is not None and self.order_status == "measured":
            ok = ok and self.convergence_order is not None \
                and self.convergence_order >= self.min_order
        self.verdict = ("warn" if self.warn else "pass") if ok else "fail"
        return self

    @property
    def passed(self) -> bool:
        return self.verdict != "fail"

    def to_record(self) -> dict:
        d = asdict(self)
        d.pop("warn")
        return _json_safe(d)


def _json_safe(obj):
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, np.ndarray):
        return _json_safe(obj.tolist())
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def ladder_order(errors) -> float | None:
    """Smallest observed order over consecutive rungs of a halving ladder."""
    e = np.abs(np.asarray(errors, dtype=float))
    if np.any(e[1:] == 0):
        return None
    return float(np.min(np.log2(e[:-1] / e[1:])))


def _rel(a, b, scale=None) -> float:
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    s = scale if scale is not None else max(float(np.linalg.norm(b)), 1e-300)
    return float(np.linalg.norm(a - b)) / s


# --------------------------------------------------------------------------
# criterion 1: exact flow
# --------------------------------------------------------------------------


def shrinking_sphere_run(spec: sc.ScenarioSpec, grid: int, dt: float, snapshot_every: int = 0):
    """Revolution MCF of the round sphere; returns (times, r_num, r_exact)."""
    n = spec.n
    r0 = float(spec.section("surface")["r0"])
    t_a, t_b = spec.time_window
    th = fl.revolution_grid(grid)
    every = snapshot_every or max(1, int(round((t_b - t_a) / dt / 10)))
    traj = fl.evolve_revolution(r0 * np.sin(th), r0 * np.cos(th), n, t_a, t_b, dt,
                                deriv="fd4", snapshot_every=every)
    if traj.truncated:
        raise fl.NumericalAbort("revolution flow blew up")
    times = np.array(traj.times)
    r_num = np.array([np.max(np.hypot(y[:grid], y[grid:])) for y in traj.states])
    r_exact = np.sqrt(r0 ** 2 - 2 * (n - 1) * (times - t_a))
    return times, r_num, r_exact


def check_exact_flow(settings: Settings, scenario: str = "shrinking-sphere") -> CheckReport:
    rep = CheckReport("exact-flow-sphere", scenario, 1)
    spec = sc.builtin_spec(scenario)
    r0 = float(spec.section("surface")["r0"])
    spec.time_window = [0.0, 0.2 * r0 ** 2 / 4]
    times, r_num, r_exact = shrinking_sphere_run(spec, int(settings.res["exact-flow.grid"]),
                                                 settings.res["exact-flow.dt"])
    rep.add("rel_err", np.abs(r_num / r_exact - 1), settings.tol["exact-flow.rel_err"])
    rep.values.update(t_final=float(times[-1]), r_num=float(r_num[-1]),
                      r_exact=float(r_exact[-1]))
    return rep


# --------------------------------------------------------------------------
# criterion 2: evolution equations
# --------------------------------------------------------------------------

EVOLUTION_MATRIX = (
    ("shrinking-sphere", "mcf-in-background", ("g_ij", "A_ij", "H", "dA")),
    ("latitude-s3", "mcf-in-background", ("g_ij", "A_ij", "H", "dA")),
    ("warped-slice", "mcf-in-background", ("g_ij", "w", "dA")),
    ("warped-slice-neutral", "mcf-in-background", ("g_ij", "w", "A_ij", "H", "dA")),
    ("warped-boundary", "modified-flow-boundary", ("g_ij", "w", "A_ij", "H", "dA")),
)

_SHORT = {"g_ij": "g", "w": "w", "A_ij": "A", "H": "H", "dA": "dA"}
_SPHERE_NODES = (np.array([0.7, 0.4]), np.array([2.0, 2.5]))
_BC_TOL = 1e-8


def _slice_family(W, r0: float, sigma: float, regime: str):
    if regime == "mcf-in-background":
        rates, v = W.extended_ricci_rates, float(W.mcf_slice_speed(r0))
    else:
        rates, v = (lambda r: W.modified_rates(r)), 0.0

    def at(delta):
        Sd = W.advanced(rates, delta) if delta else W
        rd = r0 + delta * v
        imm = hs.coordinate_slice(lambda t, rd=rd: rd, W.n, W.fiber_period, inward_sign=sigma)
        return Sd, imm
    return at


def evolution_family(scn: sc.Scenario, regime: str, quantity: str):
    """(value(delta, node), rhs(node, fd), nodes) for a scenario and regime.

    Closed-form scenarios difference in time; warped slices difference along
    the flow's tangent path through the current state.
    """
    imm = scn.immersion
    if imm is None:
        raise ConfigError(f"scenario '{scn.spec.name}' has no surface")
    if scn.warped is not None and imm.kind == "slice":
        W = scn.warped
        r0, sigma = float(imm.meta["r"]), float(imm.meta["sigma"])
        sg = W.slice_geometry(r0, sigma)
        if regime == "modified-flow-boundary":
            if W.periodic or min(abs(r0 - e) for e in W.domain) > 1e-12:
                raise ConfigError("modified-flow-boundary needs a boundary slice")
            if abs(sg["H"] + sg["e0f"]) > _BC_TOL or abs(sg["e0w"]) > _BC_TOL:
                raise ConfigError("modified-flow-boundary needs H + e0 f = 0 and e0 w = 0")
        elif quantity in ("A_ij", "H") and abs(sg["e0w"]) > _BC_TOL:
            raise ConfigError(f"{quantity} equation needs e0 w = 0 on the surface")
        at = _slice_family(W, r0, sigma, regime)

        def value(delta, p, fd):
            Sd, im = at(delta)
            return np.asarray(hs.surface_quantity(quantity, im, Sd.metric_field(), p,
                                                  w=Sd.scalar_field(Sd.w), fd=fd), dtype=float)

        def rhs(p, fd):
            _, im = at(0.0)
            return np.asarray(hs.evolution_rhs(quantity, regime, im, W.metric_field(), p,
                                               w=W.scalar_field(W.w), f=W.scalar_field(W.f),
                                               alpha=W.alpha, fd=fd), dtype=float)
        return value, rhs, (np.array([1.0, 2.0]),)

    if regime != "mcf-in-background":
        raise ConfigError(f"regime '{regime}' needs a warped boundary scenario")
    if not imm.meta.get("closed_form"):
        raise ConfigError(f"scenario '{scn.spec.name}' has no closed-form surface family")
    t_a, t_b = scn.spec.time_window
    t_ref = 0.5 * (t_a + t_b)

    def value(delta, p, fd):
        return np.asarray(hs.surface_quantity(quantity, imm, scn.g, p, t_ref + delta,
                                              w=scn.w, fd=fd), dtype=float)

    def rhs(p, fd):
        return np.asarray(hs.evolution_rhs(quantity, regime, imm, scn.g, p, t_ref, w=scn.w,
                                           f=scn.f, alpha=scn.alpha, fd=fd), dtype=float)
    return value, rhs, _SPHERE_NODES


def check_evolution(quantity: str, regime: str, scenario: str,
                    settings: Settings | None = None) -> CheckReport:
    """Centered differences along the flow against the evolution RHS."""
    settings = settings or Settings()
    if quantity not in hs.EVOLUTION_QUANTITIES:
        raise ConfigError(f"unknown quantity '{quantity}'")
    if regime not in hs.EVOLUTION_REGIMES:
        raise ConfigError(f"unknown regime '{regime}'")
    rep = CheckReport(f"evolution-{_SHORT[quantity]}-{scenario}", scenario, 2)
    scn = sc.build_scenario(sc.builtin_spec(scenario))
    value, rhs, nodes = evolution_family(scn, regime, quantity)
    fd = settings.fd("evolution")
    d0 = settings.res["evolution.delta"]
    deltas = (d0, d0 / 2, d0 / 4)
    rel, orders, exact = [], [], True
    for p in nodes:
        R = rhs(p, fd)
        D = [(value(d, p, fd) - value(-d, p, fd)) / (2 * d) for d in deltas]
        scale = max(float(np.linalg.norm(R)), float(np.linalg.norm(D[-1])), 1e-12)
        rel.append(_rel(D[-1], R, scale))
        diffs = [float(np.linalg.norm(D[k] - D[k + 1])) for k in range(2)]
        if diffs[1] > 1e-9 * scale:
            exact = False
            orders.append(np.log2(diffs[0] / diffs[1]) if diffs[0] > 0 else 0.0)
    rep.add("rel_residual", rel, settings.tol["evolution.rel_residual"])
    minimum = settings.tol["evolution.min_order"]
    if exact:
        rep.set_order(None, minimum, "exact")
        rep.notes.append("difference quotients agree to roundoff on every rung")
    else:
        rep.set_order(min(orders), minimum)
    rep.values.update(regime=regime, quantity=quantity, deltas=list(deltas))
    return rep


# --------------------------------------------------------------------------
# criterion 3: first variation
# --------------------------------------------------------------------------


def variation_ball():
    """Flat unit ball with active dilaton and a measure-preserving variation."""
    B = flat_ball(3, 1.0)
    W = replace(B, w=ChebProfile.from_function(lambda r: 0.3 * np.cos(np.pi * r), 0, 1, 48),
                f=ChebProfile.from_function(lambda r: 0.2 * r ** 2, 0, 1, 48))
    v_ss = lambda r: 0.3 * np.cos(r) + 0.1 * r ** 2  # noqa: E731
    v_ff = lambda r: 0.3 * np.cos(r) - 0.05 * r ** 2  # noqa: E731
    h = lambda r: (v_ss(r) + 2 * v_ff(r)) / 2  # noqa: E731
    theta = lambda r: np.exp(-r ** 2)  # noqa: E731
    return W, v_ss, v_ff, h, theta


def check_variation(settings: Settings) -> CheckReport:
    rep = CheckReport("variation-ball", "flat-ball", 3)
    W, v_ss, v_ff, h, theta = variation_ball()
    formula = fn.variation_delta_I(W, (v_ss, v_ff), h, theta).value
    e0 = settings.res["variation.eps"]
    errs = []
    for eps in (e0, e0 / 2, e0 / 4):
        Ip = fn.action_I(fn.perturbed_warped(W, eps, v_ss, v_ff, h, theta)).value
        Im = fn.action_I(fn.perturbed_warped(W, -eps, v_ss, v_ff, h, theta)).value
        errs.append(abs((Ip - Im) / (2 * eps) - formula) / abs(formula))
    slopes = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    rep.add("rel_err", errs[-1], settings.tol["variation.rel_err"])
    # dilaton-only variation: the secant against 2 alpha int theta (Lap w - <dw, df>) e^-f
    zero = lambda r: np.zeros_like(np.asarray(r, dtype=float))  # noqa: E731

    def w_only(e):
        return fn.action_I(fn.perturbed_warped(W, e, zero, zero, zero, theta)).value

    sec = (w_only(e0 / 4) - w_only(-e0 / 4)) / (e0 / 2)

    def direct(r):
        ws, fs = W.scalar_ops(W.w, r), W.scalar_ops(W.f, r)
        return theta(r) * (ws["lap"] - fs["s"] * ws["s"]) * np.exp(-W.f(r))

    target = 2 * W.alpha * W.integrate(direct)
    rep.add("dilaton_only_rel_err", abs(sec - target) / abs(target),
            settings.tol["variation.rel_err"])
    rep.add("slope_dev", slopes - 2.0, settings.tol["variation.slope_dev"])
    rep.convergence_order = float(np.min(slopes))
    rep.order_status = "measured"
    rep.values.update(formula=formula, errors=errs, dilaton_only=target)
    return rep


# --------------------------------------------------------------------------
# criterion 4: dI/dt under the modified flow
# --------------------------------------------------------------------------


def check_dI_monotonicity(settings: Settings | None = None, scenario: str = "warped-boundary"
                          ) -> CheckReport:
    settings = settings or Settings()
    rep = CheckReport("dI-monotonicity", scenario, 4)
    W = sc.build_scenario(sc.builtin_spec(scenario)).warped
    rates = lambda r: W.modified_rates(r)  # noqa: E731
    d0 = settings.res["dI.delta"]
    D = [(fn.action_I(W.advanced(rates, d)).value - fn.action_I(W.advanced(rates, -d)).value)
         / (2 * d) for d in (d0, d0 / 2, d0 / 4)]
    fd_rich = (4 * D[2] - D[1]) / 3
    A = fn.dI_dt_integrands(W, "A")
    dh = [fn.warped_slice_dHdt(W, r, s) for r, s in W.boundary_sides()]
    B = fn.dI_dt_integrands(W, "B", dHdt=dh)
    tol = settings.tol["dI.rel_err"]
    rep.add("fd_vs_form_A", abs(fd_rich - A.value) / abs(A.value), tol)
    rep.add("fd_vs_form_B", abs(fd_rich - B.value) / abs(B.value), tol)
    rep.add("form_gap", abs(A.value - B.value) / abs(A.value), settings.tol["dI.form_gap"])
    rep.add("interior_negativity", -A.interior_integrand, settings.tol["dI.interior_min"],
            signed=True)
    order = ladder_order([D[0] - D[1], D[1] - D[2]])
    rep.set_order(order if order is not None else None, 1.8,
                  "measured" if order is not None else "exact")
    drift = max(max(abs(T["H"] + T["e0f"]), abs(T["e0w"]))
                for T in (fn.warped_boundary_terms(W, r, s) for r, s in W.boundary_sides()))
    if drift > settings.tol["dI.bc_drift"]:
        rep.warn = True
        rep.notes.append(f"boundary conditions drift {drift:.3g}")
    rep.values.update(fd=D, fd_richardson=fd_rich, form_A=A.value, form_B=B.value,
                      interior=A.interior_total, boundary_A=A.boundary_total,
                      interior_min=float(np.min(A.interior_integrand)))
    return rep


# --------------------------------------------------------------------------
# criterion 5: Huisken monotonicity
# --------------------------------------------------------------------------


def check_huisken_shrinker(settings: Settings, scenario: str = "self-shrinker") -> CheckReport:
    rep = CheckReport("huisken-shrinker", scenario, 5)
    scn = sc.build_scenario(sc.builtin_spec(scenario))
    t_a, t_b = scn.spec.time_window
    res = int(settings.res["huisken.quad"])
    kw = dict(case="shrinking", n=scn.n, resolution=res, exponent=scn.spec.huisken_exponent)
    ts = np.linspace(t_a, t_b, 3)
    Q = np.array([fn.huisken_quantity(scn.immersion, scn.g, scn.f, t, tau=-t, **kw) for t in ts])
    Dm = fn.huisken_dissipation(scn.immersion, scn.g, scn.f, ts[1], tau=-ts[1], **kw)
    tol = settings.tol["huisken.drift"]
    rep.add("drift_per_tau", np.abs(Q - Q[0]) / abs(Q[0]) / (t_b - t_a), tol)
    rep.add("dissipation", abs(Dm) / abs(Q[0]), tol)
    rep.values.update(Q=Q.tolist(), reference=16 * np.pi / np.e)
    return rep


def check_huisken_perturbed(settings: Settings,
                            scenario: str = "perturbed-shrinker") -> CheckReport:
    rep = CheckReport("huisken-perturbed", scenario, 5)
    spec = sc.builtin_spec(scenario)
    surf = spec.section("surface")
    n, r0, eps, mode = spec.n, float(surf["r0"]), float(surf["eps"]), int(surf["mode"])
    N = int(settings.res["huisken.grid"])
    dt = settings.res["huisken.dt"]
    t_a, t_b = spec.time_window
    th = fl.revolution_grid(N)
    R = r0 * (1 + eps * np.cos(mode * th))
    every = max(1, int(round((t_b - t_a) / dt / 100)))
    traj = fl.evolve_revolution(R * np.sin(th), R * np.cos(th), n, t_a, t_b, dt,
                                deriv="spectral", snapshot_every=every)
    if traj.truncated:
        raise fl.NumericalAbort("revolution flow blew up")
    ts = np.array(traj.times)
    QD = [fn.gaussian_huisken_revolution(y[:N], y[N:], n, -t, "spectral")
          for t, y in zip(ts, traj.states)]
    Q = np.array([q for q, _ in QD])
    D = np.array([d for _, d in QD])
    h = ts[1] - ts[0]
    k = np.arange(2, len(ts) - 2)
    dQ = (8 * (Q[k + 1] - Q[k - 1]) - (Q[k + 2] - Q[k - 2])) / (12 * h)
    resid = np.abs(dQ - D[k])
    band = settings.tol["huisken.band_factor"] * float(np.max(resid))
    rep.add("formula_vs_fd", resid / np.abs(D[k]), settings.tol["huisken.rel_err"])
    rep.add("derivative_plus_band", dQ + band, 0.0, signed=True)
    rep.values.update(dQdt_mid=float(dQ[len(k) // 2]), dissipation_mid=float(D[k][len(k) // 2]),
                      band=band, Q0=float(Q[0]))
    return rep


def check_huisken_bowl(settings: Settings, scenario: str = "bowl-harnack") -> CheckReport:
    rep = CheckReport("huisken-bowl", scenario, 5)
    scn = sc.build_scenario(sc.builtin_spec(scenario))
    t_a, t_b = scn.spec.time_window
    res = max(8, int(settings.res["huisken.quad"]) // 2)
    kw = dict(case="steady", n=scn.n, resolution=res)
    ts = np.linspace(t_a, t_b, 3)
    Q = np.array([fn.huisken_quantity(scn.immersion, scn.g, scn.f, t, **kw) for t in ts])
    Dm = fn.huisken_dissipation(scn.immersion, scn.g, scn.f, ts[1], **kw)
    tol = settings.tol["huisken.drift"]
    rep.add("drift_per_t", np.abs(Q - Q[0]) / abs(Q[0]) / (t_b - t_a), tol)
    rep.add("dissipation", abs(Dm) / abs(Q[0]), tol)
    rep.values.update(Q=Q.tolist())
    return rep


# --------------------------------------------------------------------------
# criterion 6: Harnack expression
# --------------------------------------------------------------------------

_BOWL_NODES = (np.array([0.3, 0.2]), np.array([-0.5, 0.6]), np.array([0.0, 0.0]))


def check_harnack_bowl(settings: Settings, scenario: str = "bowl-harnack") -> CheckReport:
    rep = CheckReport("harnack-bowl", scenario, 6)
    scn = sc.build_scenario(sc.builtin_spec(scenario))
    fd = settings.fd("identity")
    t = 0.2 * sum(scn.spec.time_window)
    st = scn.state(t)
    dt = settings.res["harnack.dt"]
    Z = [fn.harnack_Z(scn.immersion, st, p, dt=dt, fd=fd) for p in _BOWL_NODES]
    Zl = [fn.harnack_Z(scn.immersion, st, p, extended=False, dt=dt, fd=fd) for p in _BOWL_NODES]
    H = [hs.induced_package(scn.immersion, scn.g, p, t, fd).H for p in _BOWL_NODES]
    scale = max(np.max(np.abs(H)) ** 2, 1e-300)   # natural units of dH/dt on a unit bowl
    tol = settings.tol["harnack.sup"]
    rep.add("Z_extended", np.array(Z) / scale, tol)
    rep.add("Z_lott", np.array(Zl) / scale, tol)
    rep.values.update(Z=Z, Z_lott=Zl, H=H)
    return rep


def check_harnack_control(settings: Settings, scenario: str = "shrinking-sphere") -> CheckReport:
    rep = CheckReport("harnack-control", scenario, 6)
    scn = sc.build_scenario(sc.builtin_spec(scenario))
    fd = settings.fd("identity")
    t = 0.2 * scn.spec.time_window[1]
    Z = [fn.harnack_Z(scn.immersion, scn.state(t), p, dt=settings.res["harnack.dt"], fd=fd)
         for p in _SPHERE_NODES]
    rep.add("control_margin", settings.tol["harnack.control"] - np.abs(Z), 0.0, signed=True)
    rep.values.update(Z=Z)
    return rep


def check_translator_pair(settings: Settings, scenario: str = "bowl-harnack") -> CheckReport:
    rep = CheckReport("translator-pair", scenario, 6)
    scn = sc.build_scenario(sc.builtin_spec(scenario))
    fd = settings.fd("identity")
    t = 0.2 * sum(scn.spec.time_window)
    res = fn.soliton_residuals(scn.state(t), 0, t, points=[np.array([0.1, 0.2, 0.3])],
                               imm=scn.immersion, surface_nodes=_BOWL_NODES, fd=fd)
    tol = settings.tol["harnack.translator"]
    for key in ("ambient_eq1", "ambient_eq2", "surface_H_residual", "restricted_eq1",
                "restricted_eq2", "translator_hess", "translator_grad"):
        rep.add(key, res[key], tol)
    return rep


# --------------------------------------------------------------------------
# criterion 7: identities
# --------------------------------------------------------------------------

_CHART_SHIFT = 0.05   # Bianchi is evaluated slightly off the surface


def _identity_target(scenario: str):
    scn = sc.build_scenario(sc.builtin_spec(scenario))
    if scn.warped is not None:
        p = np.array([1.0, 2.0])
    elif scn.immersion.kind == "graph":
        p = _BOWL_NODES[0]
    else:
        p = _SPHERE_NODES[0]
    return scn, p, scn.immersion.point(p, 0.0) + _CHART_SHIFT


def _identity_residual(which: str, scn, p, x, fd: FD) -> float:
    if which == "simons":
        return float(np.max(np.abs(hs.simons_residual(scn.immersion, scn.g, p, 0.0, fd))))
    if which == "codazzi":
        return float(np.max(np.abs(hs.codazzi_residual(scn.immersion, scn.g, p, 0.0, fd))))
    if which == "bianchi":
        return float(np.max(np.abs(tensor.bianchi_residual(scn.g, x, 0.0, fd))))
    raise ConfigError(f"unknown identity '{which}'")


def check_identities_flat(settings: Settings) -> CheckReport:
    """Simons and Codazzi on the flat-space sphere, Bianchi on the round sphere metric."""
    rep = CheckReport("identities-flat-sphere", "shrinking-sphere", 7)
    fd = settings.fd("identity")
    tol = settings.tol["identity.flat"]
    scn, _, x = _identity_target("shrinking-sphere")
    rep.add("simons", [_identity_residual("simons", scn, p, x, fd) for p in _SPHERE_NODES], tol)
    rep.add("codazzi", [_identity_residual("codazzi", scn, p, x, fd) for p in _SPHERE_NODES], tol)
    sph, _, _ = _identity_target("latitude-s3")
    rep.add("bianchi", [_identity_residual("bianchi", sph, None, x, fd),
                        _identity_residual("bianchi", scn, None, x, fd)], tol)
    return rep


# (identity, scenario, stencil order, coarsest h_outer)
IDENTITY_LADDERS = (
    ("simons", "latitude-s3", 4, 8e-2),
    ("simons", "warped-boundary", 4, 8e-2),
    ("codazzi", "bowl-harnack", 2, 4e-2),
    ("bianchi", "latitude-s3", 4, 8e-2),
    ("bianchi", "warped-boundary", 4, 8e-2),
)


def check_identity(which: str, scenario: str, settings: Settings, order: int = 4,
                   h0: float = 8e-2) -> CheckReport:
    """Residual of an identity on a curved scenario under stencil refinement."""
    rep = CheckReport(f"{which}-{scenario}", scenario, 7)
    scn, p, x = _identity_target(scenario)
    hs_ = (h0, h0 / 2, h0 / 4)
    res = [_identity_residual(which, scn, p, x, FD(order=order, h_outer=h)) for h in hs_]
    rep.add("residual", res[-1], settings.tol["identity.curved"])
    minimum = settings.tol["identity.min_order"]
    if res[-1] < 1e-9:
        rep.set_order(None, minimum, "floor")
        rep.notes.append("residual at roundoff floor")
    else:
        rep.set_order(ladder_order(res), minimum)
    rep.values.update(ladder=list(hs_), residuals=res, stencil_order=order)
    return rep


def check_simons_bowl(settings: Settings) -> CheckReport:
    rep = CheckReport("simons-bowl-harnack", "bowl-harnack", 7)
    scn, _, x = _identity_target("bowl-harnack")
    fd = settings.fd("identity")
    rep.add("residual", [_identity_residual("simons", scn, p, x, fd) for p in _BOWL_NODES[:2]],
            settings.tol["identity.curved"])
    return rep


# --------------------------------------------------------------------------
# criterion 8: conjugate heat equation
# --------------------------------------------------------------------------


def check_conjugate_heat_closed(settings: Settings, scenario: str = "warped-closed"
                                ) -> CheckReport:
    rep = CheckReport("conjugate-heat-closed", scenario, 8)
    W = sc.build_scenario(sc.builtin_spec(scenario)).warped
    T = settings.res["conjugate-heat.window"]
    dt = settings.res["conjugate-heat.dt"]
    traj, unpack = fl.evolve_warped(W, 0.0, T, dt, kind="extended")
    if traj.truncated:
        raise fl.NumericalAbort("warped flow blew up")
    states = [unpack(y)[0] for y in traj.states]
    hist = fl.warped_history(states, traj.times)
    r = W.a.grid
    u_b = np.exp(np.cos(r))
    ch = fl.conjugate_heat_solve_backward(r, hist, u_b, 0.0, T, dt)
    h = W.a.period / W.a.N
    mass_b = float(np.sum(ch.states[0] * states[-1].volume_density(r)) * h)
    mass_a = float(np.sum(ch.states[-1] * states[0].volume_density(r)) * h)
    rep.add("mass_drift_per_t", abs(mass_a - mass_b) / abs(mass_b) / T,
            settings.tol["conjugate-heat.drift"])
    rep.values.update(mass_start=mass_a, mass_end=mass_b)
    return rep


def slab_conjugate_heat(nodes: int, t_b: float, dt: float):
    """Flat slab with fbar = x + t: u = e^{-fbar} under Robin ends e0 u = kappa u."""
    r = np.linspace(0.0, 1.0, nodes)
    c = fl.Coefficients(a=np.ones_like(r), drift=np.zeros_like(r),
                        potential=np.zeros_like(r), a_r=np.zeros_like(r))
    hist = fl.CoefficientHistory([0.0], [c])
    exact = lambda t: np.exp(-r - t)  # noqa: E731
    bcs = (fl.BoundaryCondition("robin", coef=lambda t: -1.0, sigma=1.0),
           fl.BoundaryCondition("robin", coef=lambda t: 1.0, sigma=-1.0))
    tr = fl.conjugate_heat_solve_backward(r, hist, exact(t_b), 0.0, t_b, dt, periodic=False,
                                          bcs=bcs)
    return r, tr, exact


def check_conjugate_heat_soliton(settings: Settings) -> CheckReport:
    rep = CheckReport("conjugate-heat-soliton", "flat-slab-translator", 8)
    T = settings.res["conjugate-heat.window"]
    r, tr, exact = slab_conjugate_heat(int(settings.res["conjugate-heat.nodes"]), T, 1e-4)
    errs = [np.max(np.abs(u / exact(t) - 1)) for t, u in zip(tr.times, tr.states)]
    rep.add("rel_err", errs, settings.tol["conjugate-heat.soliton"])
    return rep


# --------------------------------------------------------------------------
# criterion 9: reductions
# --------------------------------------------------------------------------


def check_reduction_w_const(settings: Settings) -> CheckReport:
    rep = CheckReport("reduction-w-const", "warped-boundary", 9)
    tol = settings.tol["reduction.exact"]
    W = replace(sc.build_scenario(sc.builtin_spec("warped-boundary")).warped,
                w=ConstantProfile(0.7))
    act = fn.action_I(W)
    rep.add("action_minus_lott", act.value - act.decomposition["lott"], tol)
    rep.add("action_alpha_term", act.decomposition["alpha_term"], tol)
    dI = fn.dI_dt_integrands(W, "A")
    rep.add("dIdt_alpha_terms", list(dI.decomposition.values()), tol)
    rep.add("modified_w_rate", W.modified_rates(W.nodes(32)[0])["w"], tol)
    # generic path: extended flow with constant w against the bare Ricci flow
    sph = sc.build_scenario(sc.builtin_spec("latitude-s3"))
    st = fl.AmbientState(g=sph.g, w=lambda x, t=0.0: 0.7, n=3)
    x = sph.immersion.point(_SPHERE_NODES[0], 0.0)
    cp = tensor.curvature_package(sph.g, x, 0.0)
    rep.add("extended_vs_ricci", fl.extended_ricci_rhs(st, x)["g"] + 2 * cp.ric, tol)
    # boundary evolution with and without the coupling constant
    imm = hs.coordinate_slice(lambda t: 1.0, W.n, W.fiber_period, 1.0)
    args = (imm, W.metric_field(), np.array([1.0, 2.0]))
    kw = dict(w=W.scalar_field(W.w), f=W.scalar_field(W.f))
    gap = [hs.evolution_rhs(q, "mcf-in-background", *args, alpha=W.alpha, **kw)
           - hs.evolution_rhs(q, "mcf-in-background", *args, alpha=0.0, **kw)
           for q in ("g_ij", "dA")]
    rep.add("evolution_alpha_terms", np.concatenate([np.ravel(v) for v in gap]), tol)
    return rep


def check_reduction_f_zero(settings: Settings) -> CheckReport:
    rep = CheckReport("reduction-f-zero", "warped-boundary", 9)
    tol = settings.tol["reduction.exact"]
    W = replace(sc.build_scenario(sc.builtin_spec("warped-boundary")).warped,
                f=ConstantProfile(0.0))
    r = W.nodes(32)[0]
    side = W.boundary_sides()[0]
    wq = fn.weighted_quantities(W, r, p=side)
    rep.add("R_inf_minus_R", wq.R_inf - W.geometry(r)["R"], tol)
    rep.add("H_inf_minus_H", wq.H_inf - W.slice_geometry(*side)["H"], tol)
    sph = sc.build_scenario(sc.builtin_spec("latitude-s3"))
    st = fl.AmbientState(g=sph.g, w=sph.w, n=3, f=lambda x, t=0.0: 0.0)
    p = _SPHERE_NODES[0]
    x = sph.immersion.point(p, 0.0)
    gq = fn.weighted_quantities(st, x, imm=sph.immersion, p=p)
    cp = tensor.curvature_package(sph.g, x, 0.0)
    H = hs.induced_package(sph.immersion, sph.g, p, 0.0).H
    rep.add("generic_R_inf_minus_R", gq.R_inf - cp.scalar, tol)
    rep.add("generic_H_inf_minus_H", gq.H_inf - H, tol)
    return rep


# --------------------------------------------------------------------------
# criterion 10: entropy
# --------------------------------------------------------------------------


def ecker_state(spec: sc.ScenarioSpec, t: float):
    """Flat ball bounded by the MCF sphere with the matched backward Gaussian."""
    pot = spec.section("potential")
    n = spec.n
    sig = float(pot["sigma0"]) - t
    tau = sig + float(pot["shift"])
    R = np.sqrt(2 * (n - 1) * sig)
    st = flat_ball(n, R)
    f = ChebProfile.from_function(lambda r: r ** 2 / (4 * sig) + 0.5 * n * np.log(sig / tau),
                                  0.0, R, 48)
    return replace(st, f=f, tau=tau), tau, R


def check_entropy_ecker(settings: Settings, scenario: str = "ecker-ball") -> CheckReport:
    rep = CheckReport("entropy-ecker", scenario, 10)
    spec = sc.builtin_spec(scenario)
    n = spec.n
    t = 0.5 * sum(spec.time_window)
    d0 = settings.res["entropy.delta"]
    D = []
    for d in (d0, d0 / 2, d0 / 4):
        Wp = fn.entropy_W(*ecker_state(spec, t + d)[:2]).value
        Wm = fn.entropy_W(*ecker_state(spec, t - d)[:2]).value
        D.append((Wp - Wm) / (2 * d))
    fd_rich = (4 * D[2] - D[1]) / 3
    st, tau, R = ecker_state(spec, t)
    dH = (n - 1) ** 2 / R ** 3     # dH/dt of the shrinking sphere
    form = fn.ecker_dW_dt(st, tau, [dH])
    rep.add("fd_vs_formula", abs(fd_rich - form.value) / abs(form.value),
            settings.tol["entropy.rel_err"])
    rep.set_order(ladder_order([D[0] - D[1], D[1] - D[2]]), 1.8)
    # Gaussian soliton: with f = r^2/(4 tau) the interior integrand vanishes
    ball = flat_ball(n, R)
    gauss = replace(ball, f=ChebProfile.from_function(lambda r: r ** 2 / (4 * tau), 0.0, R, 48))
    soliton = fn.ecker_dW_dt(gauss, tau, [dH])
    rep.add("soliton_interior", soliton.interior_integrand, settings.tol["entropy.negativity"])
    rep.values.update(fd=D, fd_richardson=fd_rich, formula=form.value,
                      interior=form.interior_total, boundary=form.boundary_total)
    return rep


def check_entropy_list(settings: Settings, scenario: str = "warped-closed") -> CheckReport:
    rep = CheckReport("entropy-list", scenario, 10)
    tau0 = settings.res["entropy.tau0"]
    W = replace(sc.build_scenario(sc.builtin_spec(scenario)).warped, tau=tau0)
    rates = lambda r: W.modified_rates(r, tau_term=True)  # noqa: E731
    d0 = settings.res["entropy.delta"]
    D = []
    for d in (d0, d0 / 2, d0 / 4):
        p, m = W.advanced(rates, d), W.advanced(rates, -d)
        D.append((fn.entropy_W(p, p.tau, "extended").value
                  - fn.entropy_W(m, m.tau, "extended").value) / (2 * d))
    fd_rich = (4 * D[2] - D[1]) / 3
    form = fn.list_dW_dt_integrand(W, tau0)
    rep.add("fd_vs_formula", abs(fd_rich - form.value) / abs(form.value),
            settings.tol["entropy.rel_err"])
    rep.add("integrand_negativity", -form.interior_integrand, settings.tol["entropy.negativity"],
            signed=True)
    rep.set_order(ladder_order([D[0] - D[1], D[1] - D[2]]), 1.8)
    rep.values.update(fd=D, fd_richardson=fd_rich, formula=form.value)
    return rep


# --------------------------------------------------------------------------
# dispatch by case / variant
# --------------------------------------------------------------------------


def check_huisken(case: str, scenario: str, settings: Settings | None = None) -> CheckReport:
    """Steady case on the bowl; shrinking case on the shrinker or its perturbation."""
    settings = settings or Settings()
    scn = sc.build_scenario(sc.builtin_spec(scenario))
    if not (scn.soliton.is_soliton or scenario == "perturbed-shrinker"):
        raise ConfigError(f"scenario '{scenario}' has no soliton ambient")
    if case == "steady" and scn.soliton.case == "steady":
        return check_huisken_bowl(settings, scenario)
    if case == "shrinking" and scenario == "perturbed-shrinker":
        return check_huisken_perturbed(settings, scenario)
    if case == "shrinking" and scn.soliton.case == "shrinking" and scn.extra.get("tau"):
        return check_huisken_shrinker(settings, scenario)
    raise ConfigError(f"case '{case}' does not match scenario '{scenario}'")


def check_harnack(scenario: str = "bowl-harnack", settings: Settings | None = None
                  ) -> CheckReport:
    return check_harnack_bowl(settings or Settings(), scenario)


def check_identities(scenario: str, which: str, settings: Settings | None = None
                     ) -> CheckReport:
    settings = settings or Settings()
    if which == "weighted-reduction":
        return check_reduction_f_zero(settings)
    if scenario == "shrinking-sphere":
        return check_identities_flat(settings)
    for w, s, order, h0 in IDENTITY_LADDERS:
        if (w, s) == (which, scenario):
            return check_identity(which, scenario, settings, order, h0)
    return check_identity(which, scenario, settings)


def check_entropy(scenario: str, variant: str, settings: Settings | None = None
                  ) -> CheckReport:
    settings = settings or Settings()
    if variant == "ecker":
        return check_entropy_ecker(settings, scenario)
    if variant == "extended-closed":
        return check_entropy_list(settings, scenario)
    raise ConfigError(f"unknown entropy variant '{variant}'")


# --------------------------------------------------------------------------
# suite
# --------------------------------------------------------------------------

CRITERIA = {
    1: "Exact flow reproduction",
    2: "Evolution equations of boundary quantities",
    3: "First variation of the weighted action",
    4: "Time derivative of the weighted action",
    5: "Huisken monotonicity",
    6: "Harnack expression on mean curvature solitons",
    7: "Simons, Codazzi and contracted Bianchi identities",
    8: "Conjugate heat equation",
    9: "Reductions",
    10: "Entropy functionals",
}


@dataclass
class CheckSpec:
    check_id: str
    criterion: int
    scenario_id: str
    run: Callable


def default_suite() -> list:
    """All checks in a fixed order."""
    S = [CheckSpec("exact-flow-sphere", 1, "shrinking-sphere", check_exact_flow)]
    for scen, regime, qs in EVOLUTION_MATRIX:
        for q in qs:
            S.append(CheckSpec(f"evolution-{_SHORT[q]}-{scen}", 2, scen,
                               lambda st, q=q, regime=regime, scen=scen:
                               check_evolution(q, regime, scen, st)))
    S += [CheckSpec("variation-ball", 3, "flat-ball", check_variation),
          CheckSpec("dI-monotonicity", 4, "warped-boundary", check_dI_monotonicity),
          CheckSpec("huisken-shrinker", 5, "self-shrinker", check_huisken_shrinker),
          CheckSpec("huisken-perturbed", 5, "perturbed-shrinker", check_huisken_perturbed),
          CheckSpec("huisken-bowl", 5, "bowl-harnack", check_huisken_bowl),
          CheckSpec("harnack-bowl", 6, "bowl-harnack", check_harnack_bowl),
          CheckSpec("harnack-control", 6, "shrinking-sphere", check_harnack_control),
          CheckSpec("translator-pair", 6, "bowl-harnack", check_translator_pair),
          CheckSpec("identities-flat-sphere", 7, "shrinking-sphere", check_identities_flat)]
    for which, scen, order, h0 in IDENTITY_LADDERS:
        S.append(CheckSpec(f"{which}-{scen}", 7, scen,
                           lambda st, w=which, s=scen, o=order, h=h0:
                           check_identity(w, s, st, o, h)))
    S += [CheckSpec("simons-bowl-harnack", 7, "bowl-harnack", check_simons_bowl),
          CheckSpec("conjugate-heat-closed", 8, "warped-closed", check_conjugate_heat_closed),
          CheckSpec("conjugate-heat-soliton", 8, "flat-slab-translator",
                    check_conjugate_heat_soliton),
          CheckSpec("reduction-w-const", 9, "warped-boundary", check_reduction_w_const),
          CheckSpec("reduction-f-zero", 9, "warped-boundary", check_reduction_f_zero),
          CheckSpec("entropy-ecker", 10, "ecker-ball", check_entropy_ecker),
          CheckSpec("entropy-list", 10, "warped-closed", check_entropy_list)]
    return S


def select_checks(only=None) -> list:
    suite = default_suite()
    if not only:
        return suite
    wanted = []
    for token in only:
        token = token.strip()
        if not token:
            continue
        hits = [c for c in suite if c.check_id == token or c.check_id.startswith(token + "-")
                or (token.isdigit() and c.criterion == int(token))]
        if not hits:
            raise ConfigError(f"unknown check id '{token}'")
        wanted += [c for c in hits if c not in wanted]
    return [c for c in suite if c in wanted]


def run_check(spec: CheckSpec, settings: Settings) -> CheckReport:
    t0 = time.perf_counter()
    rep = spec.run(settings)
    rep.check_id, rep.criterion = spec.check_id, spec.criterion
    rep.finalize()
    rep.runtime = time.perf_counter() - t0
    log.info("%s: %s (%.2fs)", rep.check_id, rep.verdict, rep.runtime)
    return rep


def run_suite(only=None, overrides: dict | None = None) -> list:
    settings = Settings(overrides)
    return [run_check(c, settings) for c in select_checks(only)]


# --------------------------------------------------------------------------
# results file and reports
# --------------------------------------------------------------------------

RESULTS_VERSION = 1


def write_results(path, reports: list, overrides: dict | None = None) -> None:
    doc = {"version": RESULTS_VERSION, "overrides": dict(overrides or {}),
           "checks": [r.to_record() for r in reports]}
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")


def read_results(path) -> list:
    """Records of a results file; raises ConfigError when malformed or empty."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read results file: {exc}") from None
    if not isinstance(doc, dict) or not isinstance(doc.get("checks"), list) or not doc["checks"]:
        raise ConfigError("results file has no check records")
    need = ("check_id", "scenario_id", "criterion", "residual_norms", "verdict")
    for rec in doc["checks"]:
        if not isinstance(rec, dict) or any(k not in rec for k in need):
            raise ConfigError("malformed check record in results file")
    return doc["checks"]


def _order_text(rec) -> str:
    status = rec.get("order_status", "n/a")
    if status == "measured" and rec.get("convergence_order") is not None:
        return format(rec["convergence_order"], ".3g")
    return status


def _worst(rec) -> tuple:
    """(residual name, sup, tolerance) with the largest sup/tolerance ratio."""
    best, ratio = ("", float("nan"), float("nan")), None
    for name, norms in sorted(rec["residual_norms"].items()):
        sup = norms.get("sup")
        tol = rec.get("tolerances", {}).get(name)
        if sup is None:
            return name, float("nan"), tol
        # zero tolerances belong to signed margins: rank by the margin itself
        q = sup / tol if tol else sup
        if ratio is None or q > ratio:
            ratio, best = q, (name, sup, tol)
    return best


def report_rows(records) -> list:
    rows = []
    for rec in sorted(records, key=lambda r: (r["criterion"], r["check_id"])):
        name, sup, tol = _worst(rec)
        rows.append({"criterion": rec["criterion"], "check_id": rec["check_id"],
                     "scenario_id": rec["scenario_id"], "worst_residual": name,
                     "sup": sup, "tolerance": tol, "order": _order_text(rec),
                     "verdict": rec["verdict"]})
    return rows


def _num(x) -> str:
    return "" if x is None or (isinstance(x, float) and math.isnan(x)) else fmt(x)


def markdown_report(records) -> str:
    out = ["# flowlab verification report", ""]
    n_pass = sum(r["verdict"] != "fail" for r in records)
    out.append(f"{n_pass} of {len(records)} checks pass.")
    rows = report_rows(records)
    for crit in sorted({r["criterion"] for r in rows}):
        out += ["", f"## {crit}. {CRITERIA.get(crit, '')}".rstrip(), "",
                "| check | scenario | worst residual | sup | tolerance | order | verdict |",
                "|---|---|---|---|---|---|---|"]
        for r in rows:
            if r["criterion"] == crit:
                out.append(f"| {r['check_id']} | {r['scenario_id']} | {r['worst_residual']} | "
                           f"{_num(r['sup'])} | {_num(r['tolerance'])} | {r['order']} | "
                           f"{r['verdict']} |")
    out += ["", "Not checked: the general moving-boundary form of the action derivative "
            "(only its static-domain and soliton reductions are verified).", ""]
    return "\n".join(out)


def csv_report(records) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    cols = ["criterion", "check_id", "scenario_id", "worst_residual", "sup", "tolerance",
            "order", "verdict"]
    wr.writerow(cols)
    for r in report_rows(records):
        wr.writerow([r["criterion"], r["check_id"], r["scenario_id"], r["worst_residual"],
                     _num(r["sup"]), _num(r["tolerance"]), r["order"], r["verdict"]])
    return buf.getvalue()
