"""Weighted action, its variation and time derivative, Huisken and entropy functionals.

Every evaluator exists in two flavours sharing the same formulas:

* reduced: the ambient is a :class:`~flowlab.warped.WarpedState`, fields are
  radial and boundary slices are homogeneous, so integrals are 1D quadratures;
* generic: an :class:`~flowlab.flows.AmbientState` on a box chart (or any
  immersion for the surface functionals), evaluated with the finite
  difference tensor machinery.

Reports keep per-node integrands; ``value`` is always their quadrature.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import hypersurface as hs
from . import tensor
from .flows import AmbientState, fmt
from .tensor import DEFAULT_FD, FD, Chart, alpha_n
from .warped import WarpedState

log = logging.getLogger(__name__)


class TraceConditionError(ValueError):
    """Variation does not preserve the weighted measure (v/2 - h != 0)."""


# --------------------------------------------------------------------------
# reports
# --------------------------------------------------------------------------


@dataclass
class WeightedQuantities:
    R_inf: np.ndarray | float
    H_inf: np.ndarray | float | None = None


@dataclass
class FunctionalReport:
    """Value of a functional with its per-node integrands.

    ``interior_weights`` / ``boundary_weights`` already contain the volume or
    area density, so ``value == interior_weights @ interior_integrand +
    boundary_weights @ boundary_integrand``.
    """

    value: float
    interior_integrand: np.ndarray
    boundary_integrand: np.ndarray
    interior_nodes: np.ndarray
    boundary_nodes: np.ndarray
    interior_weights: np.ndarray
    boundary_weights: np.ndarray
    decomposition: dict = field(default_factory=dict)
    terms: dict = field(default_factory=dict)

    @property
    def interior_total(self) -> float:
        return float(self.interior_weights @ self.interior_integrand)

    @property
    def boundary_total(self) -> float:
        return float(self.boundary_weights @ self.boundary_integrand)

    def resum(self) -> float:
        return self.interior_total + self.boundary_total

    def to_csv(self, path) -> None:
        """One row per node: region, coordinates, weight, integrand, named terms."""
        def width(nodes, vals):
            return np.asarray(nodes, dtype=float).reshape(len(vals), -1).shape[1] if len(vals) \
                else 1

        dim = max(width(self.interior_nodes, self.interior_integrand),
                  width(self.boundary_nodes, self.boundary_integrand))
        term_names = sorted(self.terms)
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(["region"] + [f"x{i}" for i in range(dim)] + ["weight", "integrand"]
                        + term_names)
            for region, nodes, wts, vals in (
                    ("interior", self.interior_nodes, self.interior_weights,
                     self.interior_integrand),
                    ("boundary", self.boundary_nodes, self.boundary_weights,
                     self.boundary_integrand)):
                nodes = np.asarray(nodes, dtype=float).reshape(len(vals), -1) if len(vals) \
                    else np.zeros((0, dim))
                for k in range(len(vals)):
                    coords = list(nodes[k]) + [np.nan] * (dim - nodes.shape[1])
                    extra = []
                    for nm in term_names:
                        arr = self.terms[nm]
                        key_ok = nm.startswith(region + ".")
                        extra.append(fmt(arr[k]) if key_ok and k < len(arr) else "")
                    wr.writerow([region] + [fmt(c) for c in coords]
                                + [fmt(wts[k]), fmt(vals[k])] + extra)


def _report(interior, iw, inodes, boundary, bw, bnodes, decomposition=None, terms=None):
    interior = np.asarray(interior, dtype=float)
    boundary = np.asarray(boundary, dtype=float)
    iw = np.asarray(iw, dtype=float)
    bw = np.asarray(bw, dtype=float)
    value = float(iw @ interior + bw @ boundary) if boundary.size else float(iw @ interior)
    return FunctionalReport(value=value, interior_integrand=interior, boundary_integrand=boundary,
                            interior_nodes=np.asarray(inodes, dtype=float),
                            boundary_nodes=np.asarray(bnodes, dtype=float),
                            interior_weights=iw, boundary_weights=bw,
                            decomposition=dict(decomposition or {}), terms=dict(terms or {}))


# --------------------------------------------------------------------------
# generic chart domains
# --------------------------------------------------------------------------


@dataclass
class ChartDomain:
    """Box-shaped chart domain with tensor-product quadrature.

    Non-periodic axes use Gauss-Legendre nodes, periodic axes the uniform
    rule. ``boundary_axis`` (if any) has boundary faces at both ends.
    """

    chart: Chart
    resolution: int | Sequence[int] = 12

    def nodes(self):
        dim = self.chart.dim
        res = [self.resolution] * dim if np.isscalar(self.resolution) else list(self.resolution)
        axes, wts = [], []
        for ax in range(dim):
            lo, hi = self.chart.coord_ranges[ax]
            N = int(res[ax])
            if self.chart.periodic[ax]:
                axes.append(lo + (hi - lo) * (np.arange(N) + 0.5) / N)
                wts.append(np.full(N, (hi - lo) / N))
            else:
                x, w = np.polynomial.legendre.leggauss(N)
                axes.append(0.5 * (hi - lo) * x + 0.5 * (hi + lo))
                wts.append(0.5 * (hi - lo) * w)
        mesh = np.meshgrid(*axes, indexing="ij")
        wmesh = np.meshgrid(*wts, indexing="ij")
        nodes = np.stack([m.ravel() for m in mesh], axis=1)
        w = np.prod(np.stack([m.ravel() for m in wmesh], axis=1), axis=1)
        return nodes, w

    def boundary_faces(self) -> list:
        """Immersions of the two faces of ``boundary_axis`` (inward oriented)."""
        ax = self.chart.boundary_axis
        if ax is None:
            return []
        dim = self.chart.dim
        others = [k for k in range(dim) if k != ax]
        faces = []
        res = self.resolution if np.isscalar(self.resolution) else self.resolution[others[0]]
        for value, sign in ((self.chart.coord_ranges[ax][0], 1.0),
                            (self.chart.coord_ranges[ax][1], -1.0)):
            faces.append(_box_face(self.chart, ax, value, sign, others, int(res)))
        return faces


def _box_face(chart: Chart, ax: int, value: float, sign: float, others, res: int):
    n = chart.dim

    def embed(p, t):
        x = np.empty(n)
        x[ax] = value
        x[others] = p
        return x

    def inward(x, t):
        e = np.zeros(n)
        e[ax] = sign
        return e

    sub = Chart(dim=n - 1, coord_ranges=[chart.coord_ranges[k] for k in others],
                periodic=[chart.periodic[k] for k in others])

    def quad(N=None):
        nodes, w = ChartDomain(sub, N or res).nodes()
        return list(nodes), w

    return hs.Immersion(embed=embed, param_dim=n - 1, kind="face", inward=inward, quad=quad,
                        meta={"axis": ax, "value": value})


def _volume_eval(state: AmbientState, domain: ChartDomain, fn: Callable):
    nodes, w = domain.nodes()
    vals, dens = [], []
    for x in nodes:
        gx = np.asarray(state.g(x, state.t), dtype=float)
        dens.append(np.sqrt(np.linalg.det(gx)))
        vals.append(fn(x))
    return nodes, w * np.array(dens), vals


# --------------------------------------------------------------------------
# weighted curvature
# --------------------------------------------------------------------------


def weighted_quantities(state, x=None, imm=None, p=None, fd: FD = DEFAULT_FD):
    """R_inf (and H_inf when a boundary node is given).

    For a :class:`WarpedState` ``x`` is an array of radii and ``p`` a
    ``(r, sigma)`` slice; otherwise ``x`` is a chart point and ``(imm, p)`` a
    surface node.
    """
    if isinstance(state, WarpedState):
        r = np.asarray(x, dtype=float)
        geo = state.geometry(r)
        fo = state.scalar_ops(state.f, r)
        R_inf = geo["R"] + 2 * fo["lap"] - fo["grad_sq"]
        H_inf = None
        if p is not None:
            sg = state.slice_geometry(*p)
            H_inf = sg["H"] + sg["e0f"]
        return WeightedQuantities(R_inf, H_inf)
    cp = tensor.curvature_package(state.g, x, state.t, fd)
    f = state.f or (lambda y, s=0.0: 0.0)
    fo = tensor.differential_ops(f, state.g, x, state.t, fd)
    R_inf = cp.scalar + 2 * fo.lap - fo.grad_sq
    H_inf = None
    if imm is not None:
        pkg = hs.induced_package(imm, state.g, p, state.t, fd)
        df = tensor.jet(f, pkg.x, state.t, fd.step(1), fd.order, nd=1)[1]
        H_inf = pkg.H + float(df @ pkg.e0)
    return WeightedQuantities(R_inf, H_inf)


def _f_or_zero(state):
    return state.f if state.f is not None else (lambda y, s=0.0: 0.0)


# --------------------------------------------------------------------------
# the weighted extended action
# --------------------------------------------------------------------------


def action_I(state, boundary=None, domain: ChartDomain | None = None, resolution: int = 96,
             fd: FD = DEFAULT_FD, boundary_resolution: int | None = None) -> FunctionalReport:
    """Bulk (R_inf - alpha |grad w|^2) e^-f dV plus twice boundary H_inf e^-f dA.

    ``decomposition`` holds the w-free action (``lott``) and the coupling
    term ``alpha_term = -alpha int |grad w|^2 e^-f dV`` with
    ``value = lott + alpha_term``.
    """
    if isinstance(state, WarpedState):
        return _action_warped(state, resolution)
    if domain is None:
        raise ValueError("generic action needs a ChartDomain")
    if boundary is None:
        boundary = domain.boundary_faces()
        if domain.chart.boundary_axis is not None and not boundary:
            raise ValueError("missing boundary immersion")
    al = alpha_n(state.n)
    f = _f_or_zero(state)

    def bulk(x):
        wq = weighted_quantities(state, x, fd=fd)
        wo = tensor.differential_ops(state.w, state.g, x, state.t, fd)
        return float(wq.R_inf), float(wo.grad_sq) * np.exp(-f(x, state.t)), \
            np.exp(-f(x, state.t))

    nodes, iw, vals = _volume_eval(state, domain, bulk)
    Rpart = np.array([v[0] * v[2] for v in vals])
    wpart = np.array([v[1] for v in vals])
    interior = Rpart - al * wpart
    b_int, b_w, b_nodes = _boundary_eval(state, boundary, fd, boundary_resolution,
                                         lambda pkg, df, dw: 2 * (pkg.H + df @ pkg.e0))
    lott = float(iw @ Rpart + b_w @ b_int) if b_int.size else float(iw @ Rpart)
    alpha_term = -al * float(iw @ wpart)
    return _report(interior, iw, nodes, b_int, b_w, b_nodes,
                   {"lott": lott, "alpha_term": alpha_term},
                   {"interior.R_inf_weighted": Rpart, "interior.grad_w_sq_weighted": wpart})


def _boundary_eval(state: AmbientState, boundary, fd, res, fn):
    """Per-node ``fn(pkg, df, dw) * e^-f`` and area weights over all immersions."""
    f = _f_or_zero(state)
    vals, wts, nodes = [], [], []
    for imm in boundary or []:
        qn, qw = imm.quad(res) if res is not None else imm.quad(None)
        for q, wq in zip(qn, qw):
            pkg = hs.induced_package(imm, state.g, q, state.t, fd)
            df = tensor.jet(f, pkg.x, state.t, fd.step(1), fd.order, nd=1)[1]
            dw = tensor.jet(state.w, pkg.x, state.t, fd.step(1), fd.order, nd=1)[1]
            vals.append(fn(pkg, df, dw) * np.exp(-f(pkg.x, state.t)))
            wts.append(wq * pkg.area_weight)
            nodes.append(pkg.x)
    return np.array(vals, dtype=float), np.array(wts, dtype=float), np.array(nodes, dtype=float)


def _action_warped(state: WarpedState, N: int) -> FunctionalReport:
    r, wq = state.nodes(N)
    vol = state.fiber_volume * wq * state.volume_density(r)
    wq_ = weighted_quantities(state, r)
    ef = np.exp(-state.f(r))
    ws = state.scalar_ops(state.w, r)
    Rpart = wq_.R_inf * ef
    wpart = ws["grad_sq"] * ef
    interior = Rpart - state.alpha * wpart
    b_vals, b_w, b_nodes = [], [], []
    for rb, sg in state.boundary_sides():
        geo = state.slice_geometry(rb, sg)
        b_vals.append(2 * (geo["H"] + geo["e0f"]) * np.exp(-float(state.f(rb))))
        b_w.append(float(geo["area"]))
        b_nodes.append(rb)
    b_vals, b_w = np.array(b_vals, dtype=float), np.array(b_w, dtype=float)
    lott = float(vol @ Rpart + b_w @ b_vals) if b_vals.size else float(vol @ Rpart)
    alpha_term = -state.alpha * float(vol @ wpart)
    return _report(interior, vol, r, b_vals, b_w, np.array(b_nodes, dtype=float),
                   {"lott": lott, "alpha_term": alpha_term},
                   {"interior.R_inf_weighted": Rpart, "interior.grad_w_sq_weighted": wpart})


def perturbed_warped(state: WarpedState, eps: float, v_ss, v_ff, h, theta) -> WarpedState:
    """(a^2 (1 + eps v_ss), b^2 (1 + eps v_ff), f + eps h, w + eps theta) on the same grid.

    ``v_ss``, ``v_ff`` are orthonormal-frame components of the metric
    variation as functions of r.
    """
    from .warped import _resample

    base = state.a
    a = _resample(base, lambda r: state.a(r) * np.sqrt(1 + eps * v_ss(r)))
    b = _resample(base, lambda r: state.b(r) * np.sqrt(1 + eps * v_ff(r)))
    f = _resample(base, lambda r: state.f(r) + eps * h(r))
    w = _resample(base, lambda r: state.w(r) + eps * theta(r))
    return WarpedState(a=a, b=b, w=w, f=f, n=state.n, k=state.k, domain=state.domain,
                       periodic=state.periodic, fiber_period=state.fiber_period, tau=state.tau)


def variation_delta_I(state, v, h, theta, boundary=None, domain: ChartDomain | None = None,
                      resolution: int = 96, fd: FD = DEFAULT_FD, trace_tol: float = 1e-10,
                      boundary_resolution: int | None = None) -> FunctionalReport:
    """First variation of the action for measure-preserving data.

    Reduced form: ``v = (v_ss, v_ff)`` callables of r in the orthonormal
    frame, ``h`` and ``theta`` callables of r. Generic form: ``v(x)`` a
    covariant matrix, ``h(x)``, ``theta(x)`` chart functions.
    """
    if isinstance(state, WarpedState):
        return _variation_warped(state, v, h, theta, resolution, trace_tol)
    if domain is None:
        raise ValueError("generic variation needs a ChartDomain")
    boundary = boundary if boundary is not None else domain.boundary_faces()
    al = alpha_n(state.n)
    f = _f_or_zero(state)
    t = state.t

    def bulk(x):
        gx = np.asarray(state.g(x, t), dtype=float)
        ginv = np.linalg.inv(gx)
        vx = np.asarray(v(x), dtype=float)
        tr = float(np.einsum("ab,ab->", ginv, vx))
        if abs(tr / 2 - h(x)) > trace_tol * max(1.0, abs(tr)):
            raise TraceConditionError("measure not preserved: v/2 - h != 0")
        cp = tensor.curvature_package(state.g, x, t, fd)
        fo = tensor.differential_ops(f, state.g, x, t, fd)
        wo = tensor.differential_ops(state.w, state.g, x, t, fd)
        S = al * np.outer(wo.df, wo.df) - cp.ric - fo.hess
        vup = ginv @ vx @ ginv
        weq = wo.lap - fo.df @ wo.grad
        return (float(np.einsum("ab,ab->", vup, S)) + 2 * al * theta(x) * weq) * np.exp(-f(x, t))

    nodes, iw, vals = _volume_eval(state, domain, bulk)

    def bnd(pkg, df, dw):
        vx = np.asarray(v(pkg.x), dtype=float)
        X = pkg.tangents
        vij = pkg.ghat_inv @ (X @ vx @ X.T) @ pkg.ghat_inv
        v00 = float(pkg.e0 @ vx @ pkg.e0)
        return (-(float(np.einsum("ij,ij->", vij, pkg.A)) + v00 * (pkg.H + df @ pkg.e0))
                + 2 * al * theta(pkg.x) * float(dw @ pkg.e0))

    b_int, b_w, b_nodes = _boundary_eval(state, boundary, fd, boundary_resolution, bnd)
    return _report(np.array(vals), iw, nodes, b_int, b_w, b_nodes)


def _variation_warped(state: WarpedState, v, h, theta, N: int, trace_tol: float):
    v_ss, v_ff = v
    r, wq = state.nodes(N)
    m, al = state.m, state.alpha
    tr = v_ss(r) + m * v_ff(r)
    if np.max(np.abs(tr / 2 - h(r))) > trace_tol * max(1.0, float(np.max(np.abs(tr)))):
        raise TraceConditionError("measure not preserved: v/2 - h != 0")
    vol = state.fiber_volume * wq * state.volume_density(r)
    geo = state.geometry(r)
    fo = state.scalar_ops(state.f, r)
    wo = state.scalar_ops(state.w, r)
    ef = np.exp(-state.f(r))
    S_ss = al * wo["s"] ** 2 - geo["ric_ss"] - fo["ss"]
    S_ff = -geo["ric_ff"] - fo["ff"]
    weq = wo["lap"] - fo["s"] * wo["s"]
    interior = (v_ss(r) * S_ss + m * v_ff(r) * S_ff + 2 * al * theta(r) * weq) * ef
    b_vals, b_w, b_nodes = [], [], []
    for rb, sg in state.boundary_sides():
        sgeo = state.slice_geometry(rb, sg)
        val = (-(m * float(v_ff(rb)) * sgeo["A"] + float(v_ss(rb)) * (sgeo["H"] + sgeo["e0f"]))
               + 2 * al * float(theta(rb)) * sgeo["e0w"])
        b_vals.append(val * np.exp(-float(state.f(rb))))
        b_w.append(float(sgeo["area"]))
        b_nodes.append(rb)
    return _report(interior, vol, r, np.array(b_vals, dtype=float), np.array(b_w, dtype=float),
                   np.array(b_nodes, dtype=float))


# --------------------------------------------------------------------------
# time derivative of the action
# --------------------------------------------------------------------------


def boundary_terms(state: AmbientState, imm: hs.Immersion, p, fd: FD = DEFAULT_FD,
                   need_laplacian: bool = True) -> dict:
    """Pointwise boundary quantities entering the dI/dt integrands."""
    t = state.t
    f = _f_or_zero(state)
    amb = hs.ambient_along(imm, state.g, p, t, fd, derivatives=True)
    pkg = amb.pkg
    gi = pkg.ghat_inv
    X = pkg.tangents
    df = tensor.jet(f, pkg.x, t, fd.step(1), fd.order, nd=1)[1]
    dw = tensor.jet(state.w, pkg.x, t, fd.step(1), fd.order, nd=1)[1]
    grad_f = gi @ (X @ df)
    grad_w = gi @ (X @ dw)
    Hfun = hs.mean_curvature(imm, state.g, fd)
    if need_laplacian:
        ops = hs.surface_differential_ops(Hfun, imm, state.g, p, t, fd)
        dH, lapH = ops.dphi, ops.lap
    else:
        dH = tensor.jet(Hfun, np.asarray(p, dtype=float), t, fd.outer().step(1), fd.order,
                        nd=1)[1]
        lapH = np.nan

    def ric_0i(q, s):
        return hs.ambient_along(imm, state.g, q, s, fd, derivatives=False).ric[0, 1:]

    if need_laplacian:
        nr = hs.surface_covariant_derivative(ric_0i, imm, state.g, p, t, fd)
        div_r0 = float(np.einsum("ij,ij->", gi, nr))
    else:
        div_r0 = np.nan
    Aup = gi @ pkg.A @ gi
    ric = amb.ric
    return {
        "H": pkg.H, "A": pkg.A, "lap_H": lapH, "dH": dH,
        "grad_f_dot_grad_H": float(grad_f @ dH),
        "A_grad_f": float(grad_f @ pkg.A @ grad_f),
        "A_grad_w": float(grad_w @ pkg.A @ grad_w),
        "A_sq_H": pkg.A_sq * pkg.H,
        "A_ric": float(np.einsum("ij,ij->", Aup, ric[1:, 1:])),
        "R0i_grad_f": float(ric[0, 1:] @ grad_f),
        "div_R0i": div_r0,
        "nabla0_R": float(amb.dR[0]),
        "R00": float(ric[0, 0]),
        "e0f": float(df @ pkg.e0), "e0w": float(dw @ pkg.e0),
        "f": float(f(pkg.x, t)), "area_weight": pkg.area_weight, "x": pkg.x,
        "grad_f": grad_f, "grad_w": grad_w,
    }


def boundary_integrand(terms: dict, form: str, alpha: float, dHdt: float | None = None) -> float:
    """Boundary integrand (without e^-f) of the chosen form.

    A: Lap H - 2 <grad f, grad H> + A(grad f, grad f) + |A|^2 H + A^ij R_ij
       + 2 R^0i f_i - div R^0i - alpha A(grad w, grad w)
    B: dH/dt - <grad f, grad H> + A(grad f, grad f) + 2 R^0i f_i - nabla_0 R / 2
       - H R_00 + alpha A(grad w, grad w)    (modified-flow gauge)
    C: as B with -2 <grad f, grad H>          (MCF gauge)
    """
    T = terms
    if form == "A":
        return (T["lap_H"] - 2 * T["grad_f_dot_grad_H"] + T["A_grad_f"] + T["A_sq_H"]
                + T["A_ric"] + 2 * T["R0i_grad_f"] - T["div_R0i"] - alpha * T["A_grad_w"])
    if form not in ("B", "C"):
        raise ValueError(f"unknown form '{form}'")
    if dHdt is None:
        raise ValueError(f"form {form} needs dH/dt from a trajectory")
    cross = 1.0 if form == "B" else 2.0
    return (dHdt - cross * T["grad_f_dot_grad_H"] + T["A_grad_f"] + 2 * T["R0i_grad_f"]
            - 0.5 * T["nabla0_R"] - T["H"] * T["R00"] + alpha * T["A_grad_w"])


def warped_boundary_terms(state: WarpedState, r: float, sigma: float) -> dict:
    """Same keys as :func:`boundary_terms` for a homogeneous slice."""
    geo = state.geometry(r)
    sg = state.slice_geometry(r, sigma)
    m, A = state.m, float(sg["A"])
    dR = _dR_ds(state, r)
    return {
        "H": float(sg["H"]), "lap_H": 0.0, "grad_f_dot_grad_H": 0.0, "A_grad_f": 0.0,
        "A_grad_w": 0.0, "A_sq_H": m * A ** 2 * float(sg["H"]),
        "A_ric": m * A * float(geo["ric_ff"]), "R0i_grad_f": 0.0, "div_R0i": 0.0,
        "nabla0_R": sigma * dR, "R00": float(geo["ric_ss"]),
        "e0f": float(sg["e0f"]), "e0w": float(sg["e0w"]), "f": float(state.f(r)),
        "area": float(sg["area"]),
    }


def _dR_ds(state: WarpedState, r: float, h: float = 1e-4) -> float:
    """d/ds of scalar curvature (6th-order central difference in r)."""
    c = np.array([-1, 9, -45, 0, 45, -9, 1]) / 60.0
    rr = r + h * np.arange(-3, 4)
    return float(c @ state.geometry(rr)["R"] / h / state.a(r))


def dI_dt_integrands(state, form: str = "A", boundary=None, domain: ChartDomain | None = None,
                     dHdt=None, resolution: int = 96, fd: FD = DEFAULT_FD,
                     bc_tol: float = 1e-6, boundary_resolution: int | None = None
                     ) -> FunctionalReport:
    """Interior and boundary integrands of dI/dt under the modified flow.

    Interior: 2 (|Ric + Hess f - alpha dw dw|^2 + alpha (Lap w - <grad w, grad f>)^2) e^-f.
    Boundary: 2 x (form integrand) e^-f; ``dHdt`` (per boundary node, in the
    gauge matching the form) is required for forms B and C.
    """
    if isinstance(state, WarpedState):
        return _dI_dt_warped(state, form, dHdt, resolution, bc_tol)
    if domain is None:
        raise ValueError("generic dI/dt needs a ChartDomain")
    boundary = boundary if boundary is not None else domain.boundary_faces()
    al = alpha_n(state.n)
    f = _f_or_zero(state)
    t = state.t

    def bulk(x):
        gx = np.asarray(state.g(x, t), dtype=float)
        ginv = np.linalg.inv(gx)
        cp = tensor.curvature_package(state.g, x, t, fd)
        fo = tensor.differential_ops(f, state.g, x, t, fd)
        wo = tensor.differential_ops(state.w, state.g, x, t, fd)
        T = cp.ric + fo.hess - al * np.outer(wo.df, wo.df)
        nsq = float(np.einsum("ab,bc,cd,da->", ginv, T, ginv, T))
        weq = wo.lap - fo.df @ wo.grad
        return 2 * (nsq + al * weq ** 2) * np.exp(-f(x, t))

    nodes, iw, vals = _volume_eval(state, domain, bulk)
    b_vals, b_w, b_nodes = [], [], []
    k = 0
    for imm in boundary:
        qn, qw = imm.quad(boundary_resolution)
        for q, wq in zip(qn, qw):
            T = boundary_terms(state, imm, q, fd, need_laplacian=(form == "A"))
            _check_bc(T["H"] + T["e0f"], T["e0w"], bc_tol)
            dh = None if dHdt is None else float(np.ravel(dHdt)[k])
            b_vals.append(2 * boundary_integrand(T, form, al, dh) * np.exp(-T["f"]))
            b_w.append(wq * T["area_weight"])
            b_nodes.append(T["x"])
            k += 1
    return _report(np.array(vals), iw, nodes, np.array(b_vals), np.array(b_w),
                   np.array(b_nodes))


def _check_bc(h_inf, e0w, tol):
    if abs(h_inf) > tol or abs(e0w) > tol:
        log.warning("boundary conditions violated: H + e0 f = %.3g, e0 w = %.3g", h_inf, e0w)


def _dI_dt_warped(state: WarpedState, form: str, dHdt, N: int, bc_tol: float):
    r, wq = state.nodes(N)
    vol = state.fiber_volume * wq * state.volume_density(r)
    sol = state.soliton_tensor(r)
    ef = np.exp(-state.f(r))
    interior = 2 * (sol["norm_sq"] + state.alpha * sol["w_eq"] ** 2) * ef
    ws = state.scalar_ops(state.w, r)
    b_vals, b_w, b_nodes, b_alpha = [], [], [], []
    for k, (rb, sg) in enumerate(state.boundary_sides()):
        T = warped_boundary_terms(state, rb, sg)
        _check_bc(T["H"] + T["e0f"], T["e0w"], bc_tol)
        dh = None if dHdt is None else float(np.ravel(dHdt)[k])
        b_vals.append(2 * boundary_integrand(T, form, state.alpha, dh) * np.exp(-T["f"]))
        b_w.append(T["area"])
        b_nodes.append(rb)
        b_alpha.append(2 * state.alpha * T["A_grad_w"] * np.exp(-T["f"]) * T["area"])
    # every alpha-weighted contribution, for the constant-dilaton reduction
    alpha_terms = {
        "alpha_w_eq": float(vol @ (2 * state.alpha * sol["w_eq"] ** 2 * ef)),
        "alpha_dw_dw": float(np.max(np.abs(state.alpha * ws["s"] ** 2), initial=0.0)),
        "alpha_boundary": float(np.sum(np.abs(b_alpha))),
    }
    return _report(interior, vol, r, np.array(b_vals, dtype=float),
                   np.array(b_w, dtype=float), np.array(b_nodes, dtype=float),
                   decomposition=alpha_terms,
                   terms={"interior.norm_sq": sol["norm_sq"], "interior.w_eq": sol["w_eq"]})


def warped_slice_dHdt(state: WarpedState, r: float, sigma: float, delta: float = 1e-3,
                      gauge: str = "modified", tau_term: bool = False) -> float:
    """dH/dt of the slice r along the flow tangent (centered, O(delta^2)).

    ``gauge="modified"`` keeps the slice fixed in r and advances the fields
    by the modified flow; ``gauge="mcf"`` uses the extended flow and moves
    the slice with its mean curvature speed.
    """
    if gauge == "modified":
        rates = lambda rr: state.modified_rates(rr, tau_term)  # noqa: E731
        plus, minus = state.advanced(rates, delta), state.advanced(rates, -delta)
        return float((plus.slice_geometry(r, sigma)["H"] - minus.slice_geometry(r, sigma)["H"])
                     / (2 * delta))
    rates = state.extended_ricci_rates
    v = float(state.mcf_slice_speed(r))
    plus, minus = state.advanced(rates, delta), state.advanced(rates, -delta)
    return float((plus.slice_geometry(r + delta * v, sigma)["H"]
                  - minus.slice_geometry(r - delta * v, sigma)["H"]) / (2 * delta))


# --------------------------------------------------------------------------
# Harnack expression
# --------------------------------------------------------------------------


def normal_dHdt(imm: hs.Immersion, g, p, t: float, dt: float = 1e-3, fd: FD = DEFAULT_FD):
    """Normal-gauge dH/dt from a time-parametrized immersion family."""
    return hs.normal_time_derivative(hs.mean_curvature(imm, g, fd), imm, g, p, t, dt, fd)


def harnack_Z(imm: hs.Immersion, state: AmbientState, p, V: Callable | None = None,
              extended: bool = True, dHdt: float | None = None, dt: float = 1e-3,
              fd: FD = DEFAULT_FD) -> float:
    """Z(V) = dH/dt + 2 <V, grad H> + A(V, V), plus the background terms if extended.

    ``V(pkg) -> parameter-basis components``; default ``V = -grad f``.
    ``dHdt`` defaults to centered differencing of the immersion family.
    """
    T = boundary_terms(state, imm, p, fd, need_laplacian=False)
    if V is None:
        Vc = -T["grad_f"]
    else:
        Vc = np.asarray(V(hs.induced_package(imm, state.g, p, state.t, fd)), dtype=float)
    if dHdt is None:
        dHdt = normal_dHdt(imm, state.g, p, state.t, dt, fd)
    Z = dHdt + 2 * float(Vc @ T["dH"]) + float(Vc @ T["A"] @ Vc)
    if extended:
        al = alpha_n(state.n)
        Z += (2 * T["R0i_grad_f"] - 0.5 * T["nabla0_R"] - T["H"] * T["R00"]
              + al * T["A_grad_w"])
    return float(Z)


# --------------------------------------------------------------------------
# Huisken quantity
# --------------------------------------------------------------------------


def huisken_scale(case: str, n: int, tau: float | None, exponent: float | None = None) -> float:
    if case == "steady":
        return 1.0
    if case not in ("shrinking", "expanding"):
        raise ValueError(f"unknown case '{case}'")
    if tau is None or tau <= 0:
        raise ValueError("scaled Huisken quantity needs tau > 0")
    e = -(n - 1) / 2 if exponent is None else exponent
    return float(tau ** e)


def huisken_quantity(imm: hs.Immersion, g, fbar: Callable, t: float, case: str = "steady",
                     tau: float | None = None, n: int | None = None, resolution=64,
                     exponent: float | None = None, fd: FD = DEFAULT_FD) -> float:
    """(scaled) int e^-fbar dA over the immersion at time t."""
    n = n or imm.meta.get("n")
    scale = huisken_scale(case, n, tau, exponent)
    val = hs.integrate_surface(lambda pk, q: 1.0, imm, g, t,
                               weight=lambda x, s: np.exp(-fbar(x, s)),
                               resolution=resolution, fd=fd)
    return scale * val


def huisken_dissipation(imm: hs.Immersion, g, fbar: Callable, t: float, case: str = "steady",
                        tau: float | None = None, n: int | None = None, resolution=64,
                        exponent: float | None = None, fd: FD = DEFAULT_FD) -> float:
    """-(scale) int (H + e0 fbar)^2 e^-fbar dA."""
    n = n or imm.meta.get("n")
    scale = huisken_scale(case, n, tau, exponent)

    def integrand(pk, q):
        df = tensor.jet(fbar, pk.x, t, fd.step(1), fd.order, nd=1)[1]
        return (pk.H + float(df @ pk.e0)) ** 2

    return -scale * hs.integrate_surface(integrand, imm, g, t,
                                         weight=lambda x, s: np.exp(-fbar(x, s)),
                                         resolution=resolution, fd=fd)


def gaussian_huisken_revolution(rho, z, n: int, tau: float, deriv: str = "spectral") -> tuple:
    """Shrinking-case quantity and dissipation for a revolution profile, fbar = |x|^2/4tau."""
    from .flows import revolution_geometry, revolution_integral

    geo = revolution_geometry(rho, z, n, deriv)
    fbar = (rho ** 2 + z ** 2) / (4 * tau)
    e0f = (rho * geo["Nr"] + z * geo["Nz"]) / (2 * tau)
    scale = tau ** (-(n - 1) / 2)
    Q = scale * revolution_integral(np.exp(-fbar), rho, z, n, deriv)
    D = -scale * revolution_integral((geo["H"] + e0f) ** 2 * np.exp(-fbar), rho, z, n, deriv)
    return Q, D


# --------------------------------------------------------------------------
# soliton residuals
# --------------------------------------------------------------------------


def soliton_residuals(state: AmbientState, c: int, t: float, points=(), imm=None,
                      surface_nodes=(), fd: FD = DEFAULT_FD, t_shift: float = 0.0) -> dict:
    """Residuals of the gradient-soliton system and its restriction to a surface.

    ``t_shift`` converts the scenario clock to soliton time (``t - t_shift``)
    in the ``c / 2t`` term. Surface entries are omitted without ``imm``.
    """
    al = alpha_n(state.n)
    f = _f_or_zero(state)
    ts = t - t_shift
    lam = 0.0 if c == 0 else c / (2 * ts)
    eq1, eq2 = [], []
    for x in points:
        cp = tensor.curvature_package(state.g, x, t, fd)
        fo = tensor.differential_ops(f, state.g, x, t, fd)
        wo = tensor.differential_ops(state.w, state.g, x, t, fd)
        gx = np.asarray(state.g(x, t), dtype=float)
        eq1.append(np.max(np.abs(cp.ric + fo.hess - al * np.outer(wo.df, wo.df) - lam * gx)))
        eq2.append(abs(wo.lap - fo.df @ wo.grad))
    out = {"ambient_eq1": np.array(eq1), "ambient_eq2": np.array(eq2)}
    if imm is None:
        return out
    st = AmbientState(g=state.g, w=state.w, n=state.n, f=f, t=t, tau=state.tau)
    sH, r1, r2, th, tg = [], [], [], [], []
    for q in surface_nodes:
        T = boundary_terms(st, imm, q, fd, need_laplacian=False)
        amb = hs.ambient_along(imm, state.g, q, t, fd, derivatives=False)
        pkg = amb.pkg
        hf = hs.surface_differential_ops(lambda qq, s: f(imm.point(qq, s), s), imm,
                                         state.g, q, t, fd, h=fd.step(2)).hess
        X = pkg.tangents
        dw = tensor.jet(state.w, pkg.x, t, fd.step(1), fd.order, nd=1)[1]
        wi = X @ dw
        Am = pkg.A_mixed  # [k, i]
        sH.append(T["H"] + T["e0f"])
        r1.append(np.max(np.abs(amb.ric[1:, 1:] + hf + T["H"] * pkg.A - al * np.outer(wi, wi)
                                - lam * pkg.ghat)))
        fi = X @ tensor.jet(f, pkg.x, t, fd.step(1), fd.order, nd=1)[1]
        r2.append(np.max(np.abs(amb.ric[0, 1:] - T["dH"] + Am.T @ fi - al * T["e0w"] * wi)))
        # translator pair for the reversed potential f = -fbar in a flat background
        th.append(np.max(np.abs(-hf - T["H"] * pkg.A)))
        tg.append(np.max(np.abs(T["dH"] + pkg.A @ (pkg.ghat_inv @ (-fi)))))
    out.update(surface_H_residual=np.array(sH), restricted_eq1=np.array(r1),
               restricted_eq2=np.array(r2), translator_hess=np.array(th),
               translator_grad=np.array(tg))
    return out


# --------------------------------------------------------------------------
# entropy functionals
# --------------------------------------------------------------------------


def _gauss_v(state: WarpedState, r, tau):
    return (4 * np.pi * tau) ** (-state.n / 2) * np.exp(-state.f(r))


def entropy_W(state: WarpedState, tau: float, variant: str = "ecker",
              resolution: int = 96) -> FunctionalReport:
    """Ecker's W or the extended weighted entropy on a reduced domain.

    ecker:    int (tau |grad f|^2 + f - n) v dV + 2 int tau H v dA
    extended: int [tau (R_inf - alpha |grad w|^2) + f - n] v dV + 2 int H_inf v dA
    with v = (4 pi tau)^(-n/2) e^-f.
    """
    if tau is None or tau <= 0:
        raise ValueError("entropy needs tau > 0")
    r, wq = state.nodes(resolution)
    vol = state.fiber_volume * wq * state.volume_density(r)
    v = _gauss_v(state, r, tau)
    fo = state.scalar_ops(state.f, r)
    n = state.n
    if variant == "ecker":
        interior = (tau * fo["grad_sq"] + state.f(r) - n) * v
    elif variant == "extended":
        R_inf = weighted_quantities(state, r).R_inf
        ws = state.scalar_ops(state.w, r)
        interior = (tau * (R_inf - state.alpha * ws["grad_sq"]) + state.f(r) - n) * v
    else:
        raise ValueError(f"unknown variant '{variant}'")
    b_vals, b_w, b_nodes = [], [], []
    for rb, sg in state.boundary_sides():
        sgeo = state.slice_geometry(rb, sg)
        vb = float(_gauss_v(state, np.array(rb), tau))
        if variant == "ecker":
            b_vals.append(2 * tau * sgeo["H"] * vb)
        else:
            b_vals.append(2 * (sgeo["H"] + sgeo["e0f"]) * vb)
        b_w.append(float(sgeo["area"]))
        b_nodes.append(rb)
    return _report(interior, vol, r, np.array(b_vals, dtype=float), np.array(b_w, dtype=float),
                   np.array(b_nodes, dtype=float))


def ecker_dW_dt(state: WarpedState, tau: float, dHdt: Sequence[float], resolution: int = 96,
                interior_factor: str = "2tau") -> FunctionalReport:
    """Ecker's derivative formula on a reduced flat domain.

    interior |Hess f - g/2tau|^2 v (times 2 tau with ``interior_factor="2tau"``),
    boundary 2 tau (dH/dt - 2 <grad H, grad f> + A(grad f, grad f) - H/2tau) v.
    """
    r, wq = state.nodes(resolution)
    vol = state.fiber_volume * wq * state.volume_density(r)
    fo = state.scalar_ops(state.f, r)
    s = 1.0 / (2 * tau)
    nsq = (fo["ss"] - s) ** 2 + state.m * (fo["ff"] - s) ** 2
    factor = 2 * tau if interior_factor == "2tau" else 1.0
    interior = factor * nsq * _gauss_v(state, r, tau)
    b_vals, b_w, b_nodes = [], [], []
    for k, (rb, sg) in enumerate(state.boundary_sides()):
        sgeo = state.slice_geometry(rb, sg)
        vb = float(_gauss_v(state, np.array(rb), tau))
        b_vals.append(2 * tau * (float(np.ravel(dHdt)[k]) - sgeo["H"] / (2 * tau)) * vb)
        b_w.append(float(sgeo["area"]))
        b_nodes.append(rb)
    return _report(interior, vol, r, np.array(b_vals, dtype=float), np.array(b_w, dtype=float),
                   np.array(b_nodes, dtype=float))


def list_dW_dt_integrand(state: WarpedState, tau: float, resolution: int = 96
                         ) -> FunctionalReport:
    """2 tau (|Ric + Hess f - alpha dw dw - g/2tau|^2 + alpha (Lap w - <grad w, grad f>)^2) v."""
    r, wq = state.nodes(resolution)
    vol = state.fiber_volume * wq * state.volume_density(r)
    sol = state.soliton_tensor(r, tau)
    interior = 2 * tau * (sol["norm_sq"] + state.alpha * sol["w_eq"] ** 2) \
        * _gauss_v(state, r, tau)
    return _report(interior, vol, r, np.zeros(0), np.zeros(0), np.zeros(0),
                   terms={"interior.norm_sq": sol["norm_sq"], "interior.w_eq": sol["w_eq"]})
