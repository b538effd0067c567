"""Scenario catalog: analytic ambients, potentials, dilatons and surfaces.

A :class:`ScenarioSpec` is a declarative description that round-trips
through YAML with strict key checking. :func:`build_scenario` turns it into
time-indexed analytic fields plus an immersion family and soliton metadata.
"""

from __future__ import annotations

import copy
import functools
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import yaml
from numpy.polynomial import Chebyshev
from scipy.integrate import solve_ivp

from . import hypersurface as hs
from .flows import AmbientState
from .profiles import ChebProfile, FourierProfile
from .tensor import alpha_n
from .warped import WarpedState


class ConfigError(ValueError):
    """Invalid or inconsistent scenario configuration."""


# --------------------------------------------------------------------------
# schema
# --------------------------------------------------------------------------

PROFILE = {"c": [0.0], "s": []}

SCHEMA = {
    "ambient": {
        "flat-euclidean": {},
        "shrinking-round-sphere": {"t0": 0.0},
        "warped-interval-torus": {"a": {"c": [1.0]}, "b": {"c": [2.0], "s": [1.0]},
                                  "domain": [0.5, 2.5], "periodic": False, "grid": 64,
                                  "fiber_period": 2 * np.pi},
        "flat-torus-cross-interval": {"period": 2 * np.pi},
    },
    "potential": {
        "zero": {},
        "gaussian-shrinker": {"tau0": 1.0},
        "linear-translator": {"L": [0.0, 0.0, -1.0]},
        "custom-profile": {"profile": PROFILE, "boundary_fit": True},
        "ecker-gaussian": {"sigma0": 1.0, "shift": 0.5},
    },
    "dilaton": {
        "constant": {"value": 0.0},
        "linear-periodic": {"a": 0.3},
        "graph-neutral": {"a": 0.3},
        "profile-on-interval": {"profile": PROFILE, "boundary_fit": True},
    },
    "surface": {
        "none": {},
        "round-sphere": {"r0": 1.0},
        "perturbed-sphere": {"r0": 1.0, "eps": 0.0, "mode": 2},
        "bowl-translator": {"radius": 1.0},
        "torus-graph": {"u0": {"c1": 0.1, "s2": 0.05}},
        "latitude-sphere": {"psi0": 1.0},
        "boundary-slice": {"r": None},
    },
}

TOP_KEYS = {"name", "n", "ambient", "potential", "dilaton", "surface", "time_window",
            "resolution", "huisken_exponent", "description"}
RESOLUTION_KEYS = {"grid": 256, "dt": 1e-5, "h_fd": None, "order": 4, "quad": 64}


@dataclass
class ScenarioSpec:
    name: str
    n: int = 3
    ambient: dict = field(default_factory=lambda: {"kind": "flat-euclidean"})
    potential: dict = field(default_factory=lambda: {"kind": "zero"})
    dilaton: dict = field(default_factory=lambda: {"kind": "constant"})
    surface: dict = field(default_factory=lambda: {"kind": "none"})
    time_window: list = field(default_factory=lambda: [0.0, 0.1])
    resolution: dict = field(default_factory=dict)
    huisken_exponent: float | None = None
    description: str = ""

    def section(self, name: str) -> dict:
        """Section with defaults filled in."""
        sec = dict(getattr(self, name))
        kind = sec.pop("kind")
        out = copy.deepcopy(SCHEMA[name][kind])
        out.update(sec)
        out["kind"] = kind
        return out

    def res(self) -> dict:
        out = dict(RESOLUTION_KEYS)
        out.update(self.resolution)
        return out

    def validate(self) -> "ScenarioSpec":
        if not isinstance(self.n, int) or self.n < 3:
            raise ConfigError("n must be an integer >= 3")
        for sec in ("ambient", "potential", "dilaton", "surface"):
            d = getattr(self, sec)
            if not isinstance(d, dict) or "kind" not in d:
                raise ConfigError(f"section '{sec}' needs a 'kind'")
            if d["kind"] not in SCHEMA[sec]:
                raise ConfigError(f"unknown {sec} kind '{d['kind']}'")
            allowed = set(SCHEMA[sec][d["kind"]]) | {"kind"}
            for key in d:
                if key not in allowed:
                    raise ConfigError(f"unknown key '{sec}.{key}'")
        for key in self.resolution:
            if key not in RESOLUTION_KEYS:
                raise ConfigError(f"unknown key 'resolution.{key}'")
        ta, tb = self.time_window
        if not ta < tb:
            raise ConfigError("time_window must be increasing")
        self._check_compatibility()
        return self

    def _check_compatibility(self):
        amb, surf = self.ambient["kind"], self.surface["kind"]
        need = {"bowl-translator": {"flat-euclidean"}, "latitude-sphere": {"shrinking-round-sphere"},
                "boundary-slice": {"warped-interval-torus"},
                "torus-graph": {"flat-torus-cross-interval"},
                "round-sphere": {"flat-euclidean"}, "perturbed-sphere": {"flat-euclidean"}}
        if surf in need and amb not in need[surf]:
            raise ConfigError(f"surface '{surf}' is incompatible with ambient '{amb}'")
        pot = self.potential["kind"]
        if pot in ("gaussian-shrinker", "linear-translator", "ecker-gaussian") \
                and amb != "flat-euclidean":
            raise ConfigError(f"potential '{pot}' requires a flat-euclidean ambient")
        if self.surface["kind"] in ("round-sphere", "perturbed-sphere"):
            r0 = self.section("surface")["r0"]
            if pot != "gaussian-shrinker" and pot != "ecker-gaussian":
                t_sing = self.time_window[0] + r0 ** 2 / (2 * (self.n - 1))
                if self.time_window[1] >= t_sing:
                    raise ConfigError("time window reaches the sphere's singular time")

    # ---- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        d = {"name": self.name, "n": self.n, "ambient": self.ambient,
             "potential": self.potential, "dilaton": self.dilaton, "surface": self.surface,
             "time_window": list(self.time_window), "resolution": self.resolution}
        if self.huisken_exponent is not None:
            d["huisken_exponent"] = self.huisken_exponent
        if self.description:
            d["description"] = self.description
        return copy.deepcopy(d)

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False)

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioSpec":
        if not isinstance(d, dict):
            raise ConfigError("scenario config must be a mapping")
        for key in d:
            if key not in TOP_KEYS:
                raise ConfigError(f"unknown key '{key}'")
        if "name" not in d:
            raise ConfigError("missing key 'name'")
        kw = {k: copy.deepcopy(v) for k, v in d.items()}
        if "time_window" in kw:
            kw["time_window"] = [float(x) for x in kw["time_window"]]
        return cls(**kw).validate()

    @classmethod
    def from_yaml(cls, text: str) -> "ScenarioSpec":
        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise ConfigError(f"malformed config: {exc}") from exc
        return cls.from_dict(data)


@dataclass
class SolitonMeta:
    is_soliton: bool = False
    case: str | None = None
    c: int | None = None
    closed_form: bool = False
    time_offset: float = 0.0


@dataclass
class Scenario:
    """Built scenario: analytic fields in time, immersion family, metadata."""

    spec: ScenarioSpec
    n: int
    g: Callable
    w: Callable
    f: Callable | None
    immersion: hs.Immersion | None
    soliton: SolitonMeta
    warped: WarpedState | None = None
    extra: dict = field(default_factory=dict)

    def state(self, t: float, tau: float | None = None) -> AmbientState:
        return AmbientState(g=self.g, w=self.w, n=self.n, f=self.f, t=t, tau=tau)

    @property
    def alpha(self) -> float:
        return alpha_n(self.n)


# --------------------------------------------------------------------------
# building blocks
# --------------------------------------------------------------------------


def trig_profile(spec: dict) -> Callable:
    """c0 + sum_k c_k cos(k r) + s_k sin(k r) (k from 1)."""
    c = np.asarray(spec.get("c", [0.0]), dtype=float)
    s = np.asarray(spec.get("s", []), dtype=float)

    def prof(r):
        r = np.asarray(r, dtype=float)
        out = np.full(r.shape, c[0] if c.size else 0.0)
        for k, ck in enumerate(c[1:], start=1):
            out = out + ck * np.cos(k * r)
        for k, sk in enumerate(s, start=1):
            out = out + sk * np.sin(k * r)
        return out
    return prof


def _endpoint_bumps(lo: float, hi: float):
    L = hi - lo
    phi_lo = lambda r: (r - lo) * ((hi - r) / L) ** 2  # noqa: E731  slope 1 at lo, 0 at hi
    phi_hi = lambda r: (r - hi) * ((r - lo) / L) ** 2  # noqa: E731
    return phi_lo, phi_hi


def fit_endpoint_slopes(base: Callable, lo: float, hi: float, targets: Callable,
                        deg: int = 64, tol: float = 1e-13, maxit: int = 20,
                        margin: float = 0.0) -> ChebProfile:
    """Newton iteration on endpoint-derivative corrections.

    Returns base + c_lo phi_lo + c_hi phi_hi with the r-derivatives at the two
    ends matching ``targets(profile) -> (target_lo, target_hi)``. The series
    is interpolated on ``[lo - margin, hi + margin]``.
    """
    phi_lo, phi_hi = _endpoint_bumps(lo, hi)
    c = np.zeros(2)

    def build(c):
        return ChebProfile.from_function(lambda r: base(r) + c[0] * phi_lo(r) + c[1] * phi_hi(r),
                                         lo - margin, hi + margin, deg)

    def residual(c):
        p = build(c)
        tl, th = targets(p)
        return np.array([p(lo, 1) - tl, p(hi, 1) - th])

    for _ in range(maxit):
        F = residual(c)
        if np.max(np.abs(F)) < tol:
            break
        J = np.empty((2, 2))
        for j in range(2):
            e = np.zeros(2)
            e[j] = 1e-6
            J[:, j] = (residual(c + e) - F) / 1e-6
        c = c - np.linalg.solve(J, F)
    else:
        raise ConfigError("endpoint compatibility conditions did not converge")
    return build(c)


@functools.lru_cache(maxsize=8)
def bowl_profile(n: int, radius: float = 2.0, deg: int = 80) -> tuple:
    """Slope p = u' and height u of the rotational translator in R^n.

    Solves p' = (1 + p^2)(1 - (n - 2) p / r) from the axis (series start)
    with DOP853 at rtol 1e-13 and stores odd/even Chebyshev series on
    [-radius, radius].
    """
    a1 = 1.0 / (n - 1)
    a3 = a1 ** 3 / (n + 1)
    r0 = 1e-3

    def rhs(r, p):
        return (1 + p ** 2) * (1 - (n - 2) * p / r)

    sol = solve_ivp(rhs, (r0, radius * 1.01), [a1 * r0 + a3 * r0 ** 3], method="DOP853",
                    rtol=1e-13, atol=1e-15, dense_output=True)

    def p_of(r):
        r = np.asarray(r, dtype=float)
        ar = np.abs(r)
        small = a1 * ar + a3 * ar ** 3
        big = sol.sol(np.maximum(ar, r0))[0]
        return np.sign(r) * np.where(ar < r0, small, big)

    p = Chebyshev.interpolate(p_of, deg, domain=[-radius, radius])
    coef = p.coef.copy()
    coef[0::2] = 0.0  # exact oddness
    p = Chebyshev(coef, domain=[-radius, radius])
    u = p.integ(lbnd=0.0)
    return ChebProfile(p), ChebProfile(u)


def _stereo_metric(n: int, scale: Callable):
    def g(x, t=0.0):
        x = np.asarray(x, dtype=float)
        return np.eye(n) * scale(t) * 4.0 / (1.0 + x @ x) ** 2
    return g


# --------------------------------------------------------------------------
# builder
# --------------------------------------------------------------------------


def build_scenario(spec: ScenarioSpec) -> Scenario:
    spec.validate()
    n = spec.n
    amb = spec.section("ambient")
    pot = spec.section("potential")
    dil = spec.section("dilaton")
    surf = spec.section("surface")
    meta = SolitonMeta()
    extra: dict = {}
    warped = None
    imm = None

    const_w = (lambda x, t=0.0: float(dil["value"])) if dil["kind"] == "constant" else None

    # ---- ambient ----------------------------------------------------------
    if amb["kind"] == "flat-euclidean":
        def g(x, t=0.0):
            return np.eye(n)
    elif amb["kind"] == "shrinking-round-sphere":
        t0 = float(amb["t0"])
        scale = lambda t: 1.0 - 2 * (n - 1) * (t - t0)  # noqa: E731
        g = _stereo_metric(n, scale)
        extra["scale"] = scale
        extra["singular_time"] = t0 + 1.0 / (2 * (n - 1))
        if spec.time_window[1] >= extra["singular_time"]:
            raise ConfigError("time window reaches the ambient singular time")
        meta = SolitonMeta(True, "shrinking", -1, True, time_offset=extra["singular_time"])
    elif amb["kind"] == "flat-torus-cross-interval":
        def g(x, t=0.0):
            return np.eye(n)
        extra["period"] = float(amb["period"])
    else:
        warped = _build_warped(n, amb, pot, dil, surf)
        g = warped.metric_field()
        extra["r_slice"] = surf.get("r")

    # ---- dilaton ----------------------------------------------------------
    if warped is not None:
        w = warped.scalar_field(warped.w)
    elif const_w is not None:
        w = const_w
    elif dil["kind"] == "linear-periodic":
        a_w = float(dil["a"])
        def w(x, t=0.0):
            return a_w * np.sin(x[0])
    elif dil["kind"] == "graph-neutral":
        w = _graph_neutral_dilaton(n, float(dil["a"]), surf)
    else:
        raise ConfigError(f"dilaton '{dil['kind']}' needs a warped ambient")

    # ---- potential --------------------------------------------------------
    f = None
    if warped is not None:
        f = warped.scalar_field(warped.f)
    elif pot["kind"] == "zero":
        f = lambda x, t=0.0: 0.0  # noqa: E731
    elif pot["kind"] == "gaussian-shrinker":
        def f(x, t=0.0):
            x = np.asarray(x, dtype=float)
            return float(x @ x) / (4 * (-t))
        extra["tau"] = lambda t: -t
        meta = SolitonMeta(True, "shrinking", -1, True)
        if spec.time_window[1] >= 0:
            raise ConfigError("gaussian-shrinker needs t < 0 (tau = -t)")
    elif pot["kind"] == "linear-translator":
        L = np.asarray(pot["L"], dtype=float)
        if L.size != n:
            raise ConfigError("linear-translator L must have n components")
        def f(x, t=0.0):
            return float(L @ np.asarray(x, dtype=float) + t * (L @ L))
        extra["L"] = L
        meta = SolitonMeta(True, "steady", 0, True)
    elif pot["kind"] == "ecker-gaussian":
        s0, shift = float(pot["sigma0"]), float(pot["shift"])
        sig = lambda t: s0 - t  # noqa: E731
        extra["sigma"] = sig
        extra["tau"] = lambda t: sig(t) + shift
        def f(x, t=0.0):
            x = np.asarray(x, dtype=float)
            return float(x @ x) / (4 * sig(t)) + 0.5 * n * np.log(sig(t) / (sig(t) + shift))
    else:
        raise ConfigError(f"potential '{pot['kind']}' needs a warped ambient")

    # ---- surface ----------------------------------------------------------
    kind = surf["kind"]
    if kind in ("round-sphere", "perturbed-sphere"):
        r0 = float(surf["r0"])
        eps = float(surf.get("eps", 0.0))
        mode = int(surf.get("mode", 2))
        if pot["kind"] == "gaussian-shrinker":
            t_a = spec.time_window[0]
            radius = lambda t: np.sqrt(r0 ** 2 - 2 * (n - 1) * (t - t_a))  # noqa: E731
        elif pot["kind"] == "ecker-gaussian":
            radius = lambda t: np.sqrt(2 * (n - 1) * extra["sigma"](t))  # noqa: E731
            r0 = radius(spec.time_window[0])
        else:
            t_a = spec.time_window[0]
            radius = lambda t: np.sqrt(r0 ** 2 - 2 * (n - 1) * (t - t_a))  # noqa: E731
        extra["radius"] = radius
        if kind == "round-sphere" or eps == 0.0:
            imm = hs.round_sphere(radius, n)
            imm.meta["closed_form"] = True
        else:
            if eps * r0 >= r0:
                raise ConfigError("perturbation too large: immersion failure")
            prof = lambda th, t: (r0 * (1 + eps * np.cos(mode * th)) * np.sin(th),  # noqa: E731
                                  r0 * (1 + eps * np.cos(mode * th)) * np.cos(th))
            imm = hs.revolution_immersion(prof, n, meta={"surface": "perturbed-sphere",
                                                         "eps": eps, "mode": mode, "r0": r0})
            imm.meta["closed_form"] = False
        if pot["kind"] == "gaussian-shrinker" and meta.is_soliton:
            tau0 = float(pot["tau0"])
            if abs(spec.time_window[0] + tau0) > 1e-12:
                raise ConfigError("gaussian-shrinker: time_window must start at -tau0")
    elif kind == "bowl-translator":
        R = float(surf["radius"])
        p_prof, u_prof = bowl_profile(n, max(2.0, 1.5 * R))
        L = extra.get("L", np.eye(n)[-1] * -1)
        speed = -float(L[-1])

        def height(p, t):
            rr = np.sqrt(float(np.sum(np.asarray(p) ** 2)))
            return float(u_prof(rr)) + speed * t

        imm = hs.graph_immersion(height, n, radius=R, up=True,
                                 meta={"surface": "bowl", "closed_form": True})
        extra["bowl"] = (p_prof, u_prof)
    elif kind == "latitude-sphere":
        psi0 = float(surf["psi0"])
        scale = extra["scale"]
        t_a = spec.time_window[0]
        c0 = np.cos(psi0)

        def psi(t):
            c = c0 * (scale(t) / scale(t_a)) ** -0.5
            if abs(c) >= 1:
                raise ConfigError("latitude sphere collapsed inside the time window")
            return np.arccos(c)

        extra["psi"] = psi
        imm = hs.round_sphere(lambda t: np.tan(psi(t) / 2), n)
        imm.meta.update(surface="latitude-sphere", closed_form=True)
    elif kind == "torus-graph":
        u0 = _torus_graph_height(surf["u0"])
        imm = hs.graph_immersion(lambda p, t: u0(p), n, period=extra["period"], up=True,
                                 meta={"surface": "torus-graph"})
        extra["u0"] = u0
    elif kind == "boundary-slice":
        if warped is None:
            raise ConfigError("boundary-slice needs a warped ambient")
        r_s = surf.get("r")
        if r_s is None:
            r_s = warped.domain[0]
        sigma = 1.0
        if not warped.periodic and abs(r_s - warped.domain[1]) < 1e-14:
            sigma = -1.0
        imm = hs.coordinate_slice(lambda t, r=float(r_s): r, n, warped.fiber_period,
                                  inward_sign=sigma, meta={"r": float(r_s), "sigma": sigma})
        extra["r_slice"] = float(r_s)

    return Scenario(spec=spec, n=n, g=g, w=w, f=f, immersion=imm, soliton=meta,
                    warped=warped, extra=extra)


def _torus_graph_height(coefs: dict) -> Callable:
    c1 = float(coefs.get("c1", 0.0))
    s2 = float(coefs.get("s2", 0.0))
    c0 = float(coefs.get("c0", 0.0))

    def u0(p):
        p = np.asarray(p, dtype=float)
        out = c0 + c1 * np.cos(p[0])
        if p.size > 1:
            out = out + s2 * np.sin(p[1])
        return float(out)
    return u0


def _graph_neutral_dilaton(n: int, a: float, surf: dict) -> Callable:
    """Dilaton with vanishing normal derivative on the initial torus graph.

    w = F(y) + (x_n - u0(y)) G(y) with G = <grad u0, grad F> / (1 + |grad u0|^2),
    F = a (sin y1 + cos y2 / 2), in a flat ambient.
    """
    if surf["kind"] != "torus-graph":
        raise ConfigError("graph-neutral dilaton needs a torus-graph surface")
    co = surf["u0"]
    c1, s2 = float(co.get("c1", 0.0)), float(co.get("s2", 0.0))

    def w(x, t=0.0):
        y1 = x[0]
        y2 = x[1] if n > 2 else 0.0
        u = float(co.get("c0", 0.0)) + c1 * np.cos(y1) + s2 * np.sin(y2)
        du = np.array([-c1 * np.sin(y1), s2 * np.cos(y2)])
        F = a * (np.sin(y1) + 0.5 * np.cos(y2))
        dF = a * np.array([np.cos(y1), -0.5 * np.sin(y2)])
        G = float(du @ dF) / (1.0 + float(du @ du))
        return F + (x[-1] - u) * G
    return w


INTERVAL_MARGIN = 0.1


def _build_warped(n, amb, pot, dil, surf) -> WarpedState:
    lo, hi = (float(v) for v in amb["domain"])
    periodic = bool(amb["periodic"])
    m = n - 1
    a_fn, b_fn = trig_profile(amb["a"]), trig_profile(amb["b"])
    w_fn = trig_profile(dil["profile"]) if dil["kind"] == "profile-on-interval" \
        else (lambda r: np.full(np.shape(r), float(dil.get("value", 0.0))))
    f_fn = trig_profile(pot["profile"]) if pot["kind"] == "custom-profile" \
        else (lambda r: np.zeros(np.shape(r)))
    if periodic:
        N = int(amb["grid"])
        mk = lambda fn: FourierProfile.from_function(fn, N, hi - lo, lo)  # noqa: E731
        a, b, w, f = mk(a_fn), mk(b_fn), mk(w_fn), mk(f_fn)
        if np.min(b.values) <= 0 or np.min(a.values) <= 0:
            raise ConfigError("warped profiles must be positive")
        return WarpedState(a, b, w, f, n=n, domain=(lo, hi), periodic=True,
                           fiber_period=float(amb["fiber_period"]))
    # profiles extend a little past the ends so that stencils centred on a
    # boundary slice never extrapolate the series
    pad = INTERVAL_MARGIN * (hi - lo)
    mk = lambda fn: ChebProfile.from_function(fn, lo - pad, hi + pad, 64)  # noqa: E731
    a, b = mk(a_fn), mk(b_fn)
    rr = np.linspace(lo - pad, hi + pad, 257)
    if np.min(a(rr)) <= 0 or np.min(b(rr)) <= 0:
        raise ConfigError("warped profiles must be positive")
    if dil["kind"] == "profile-on-interval" and dil.get("boundary_fit", True):
        w = fit_endpoint_slopes(w_fn, lo, hi, lambda p: (0.0, 0.0), margin=pad)
    else:
        w = mk(w_fn)
    if pot["kind"] == "custom-profile" and pot.get("boundary_fit", True):
        # H + e0 f = 0 on both boundary slices  <=>  f_r = m b_r / b there
        tl, th = m * b(lo, 1) / b(lo), m * b(hi, 1) / b(hi)
        f = fit_endpoint_slopes(f_fn, lo, hi, lambda p: (tl, th), margin=pad)
    else:
        f = mk(f_fn)
    return WarpedState(a, b, w, f, n=n, domain=(lo, hi), periodic=False,
                       fiber_period=float(amb["fiber_period"]))


def perturb_scenario(spec: ScenarioSpec, eps: float, mode: int = 2) -> ScenarioSpec:
    """Deterministic low-mode perturbation of the surface or warped metric."""
    new = copy.deepcopy(spec)
    new.name = f"{spec.name}-perturbed"
    kind = spec.surface["kind"]
    if kind in ("round-sphere", "perturbed-sphere"):
        new.surface = {"kind": "perturbed-sphere", "r0": spec.section("surface")["r0"],
                       "eps": float(eps), "mode": int(mode)}
    elif kind == "torus-graph":
        u0 = dict(spec.section("surface")["u0"])
        u0["c1"] = float(u0.get("c1", 0.0)) + eps
        new.surface = {"kind": "torus-graph", "u0": u0}
    elif spec.ambient["kind"] == "warped-interval-torus":
        amb = spec.section("ambient")
        b = copy.deepcopy(amb["b"])
        c = list(b.get("c", [0.0]))
        c += [0.0] * (mode + 1 - len(c))
        c[mode] += eps
        b["c"] = c
        new.ambient = dict(spec.ambient, b=b)
    else:
        raise ConfigError(f"no perturbation defined for surface '{kind}'")
    return new.validate()


# --------------------------------------------------------------------------
# built-in scenarios
# --------------------------------------------------------------------------

_WARPED_CLOSED = {"kind": "warped-interval-torus", "a": {"c": [1.0, 0.1]},
                  "b": {"c": [2.0], "s": [1.0]}, "domain": [0.0, float(2 * np.pi)],
                  "periodic": True, "grid": 64}

BUILTIN = {
    "shrinking-sphere": dict(
        description="round sphere under MCF in flat R^3",
        surface={"kind": "round-sphere", "r0": 1.0}, time_window=[0.0, 0.05],
        resolution={"grid": 256, "dt": 1e-5}),
    "self-shrinker": dict(
        description="self-shrinking sphere in the Gaussian shrinker background",
        potential={"kind": "gaussian-shrinker", "tau0": 1.0},
        surface={"kind": "round-sphere", "r0": 2.0}, time_window=[-1.0, -0.1]),
    "perturbed-shrinker": dict(
        description="mode-2 perturbed sphere in the Gaussian shrinker background",
        potential={"kind": "gaussian-shrinker", "tau0": 1.0},
        surface={"kind": "perturbed-sphere", "r0": 2.0, "eps": 1e-2, "mode": 2},
        time_window=[-1.0, -0.9], resolution={"grid": 128, "dt": 2e-5}),
    "bowl-harnack": dict(
        description="bowl translator with linear potential (steady soliton)",
        potential={"kind": "linear-translator", "L": [0.0, 0.0, -1.0]},
        surface={"kind": "bowl-translator", "radius": 1.0}, time_window=[0.0, 0.1]),
    "latitude-s3": dict(
        description="latitude sphere in the shrinking round S^3",
        ambient={"kind": "shrinking-round-sphere"},
        surface={"kind": "latitude-sphere", "psi0": 1.0}, time_window=[0.0, 0.05]),
    "warped-slice": dict(
        description="MCF of a coordinate slice in a closed warped torus under the extended flow",
        ambient=_WARPED_CLOSED,
        dilaton={"kind": "profile-on-interval", "profile": {"c": [0.0, 0.3], "s": [0.0, 0.1]}},
        surface={"kind": "boundary-slice", "r": 1.0}, time_window=[0.0, 0.02]),
    "warped-slice-neutral": dict(
        description="as warped-slice with dilaton symmetric about the slice (e0 w = 0)",
        ambient=_WARPED_CLOSED,
        dilaton={"kind": "profile-on-interval",
                 "profile": {"c": [0.0, float(0.3 * np.cos(0.3)), float(0.1 * np.cos(0.6))],
                             "s": [float(0.3 * np.sin(0.3)), float(0.1 * np.sin(0.6))]}},
        surface={"kind": "boundary-slice", "r": 0.3}, time_window=[-0.02, 0.02]),
    "warped-boundary": dict(
        description="interval x torus with H + e0 f = 0 and e0 w = 0 on both ends",
        ambient={"kind": "warped-interval-torus", "a": {"c": [1.0], "s": [0.1]},
                 "b": {"c": [2.0], "s": [1.0]}, "domain": [0.5, 2.5]},
        dilaton={"kind": "profile-on-interval", "profile": {"c": [0.1, 0.3], "s": [0.0, 0.2]}},
        potential={"kind": "custom-profile", "profile": {"c": [0.0, 0.2], "s": [0.3]}},
        surface={"kind": "boundary-slice", "r": 0.5}, time_window=[0.0, 0.01]),
    "warped-closed": dict(
        description="closed warped torus with active dilaton",
        ambient=_WARPED_CLOSED,
        dilaton={"kind": "profile-on-interval", "profile": {"c": [0.0, 0.3], "s": [0.0, 0.1]}},
        potential={"kind": "custom-profile", "profile": {"c": [0.0, 0.2], "s": [0.1]}},
        time_window=[0.0, 0.1]),
    "ecker-ball": dict(
        description="shrinking ball with a matched backward Gaussian (Robin boundary)",
        potential={"kind": "ecker-gaussian", "sigma0": 1.0, "shift": 0.5},
        surface={"kind": "round-sphere", "r0": 2.0}, time_window=[0.0, 0.2]),
    "torus-graph": dict(
        description="torus graph in flat torus x interval with a graph-neutral dilaton",
        ambient={"kind": "flat-torus-cross-interval"},
        dilaton={"kind": "graph-neutral", "a": 0.3},
        surface={"kind": "torus-graph", "u0": {"c1": 0.1, "s2": 0.05}},
        time_window=[0.0, 0.01]),
}


def builtin_spec(name: str) -> ScenarioSpec:
    if name not in BUILTIN:
        raise ConfigError(f"unknown scenario '{name}'")
    d = copy.deepcopy(BUILTIN[name])
    d["name"] = name
    return ScenarioSpec.from_dict(d)


def list_scenarios() -> list:
    return [(k, v.get("description", "")) for k, v in BUILTIN.items()]
