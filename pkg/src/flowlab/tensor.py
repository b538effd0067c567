"""Coordinate-chart tensor calculus on analytic callables.

Fields are plain callables ``field(x, t) -> ndarray`` on a coordinate chart.
All derivatives are taken with central finite-difference stencils applied to
the callable itself, so no interpolation error enters the identity checks.

Curvature sign convention::

    R(d_a, d_b) d_c = nabla_b nabla_a d_c - nabla_a nabla_b d_c
    R_{abcx} = g(R(d_a, d_b) d_c, d_x)
    Ric_{bx} = g^{ac} R_{abcx}

With this convention the unit round sphere has ``R_{0i0j} = g_ij`` and
``Ric = (n - 1) g``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from math import factorial
from typing import Callable, Sequence

import numpy as np

EPS = np.finfo(float).eps

Field = Callable[[np.ndarray, float], np.ndarray]


class DegenerateMetricError(ValueError):
    """Raised when a metric is singular or not positive definite."""


def alpha_n(n: int) -> float:
    """Coupling constant (n - 1) / (n - 2) of the extended flow."""
    if n < 3:
        raise ValueError("dimension must be at least 3")
    return (n - 1) / (n - 2)


# --------------------------------------------------------------------------
# charts and stencils
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Chart:
    """A coordinate chart.

    ``coord_ranges`` holds one ``(lo, hi)`` interval per axis; ``periodic``
    flags the axes that wrap. ``boundary_axis`` optionally names the axis
    whose lower endpoint is a boundary of the manifold with inward
    direction ``+x^0``.
    """

    dim: int
    coord_ranges: tuple = ()
    periodic: tuple = ()
    boundary_axis: int | None = None

    def __post_init__(self):
        if self.dim < 3:
            raise ValueError("chart dimension must be >= 3")
        if not self.coord_ranges:
            object.__setattr__(self, "coord_ranges", ((-np.inf, np.inf),) * self.dim)
        if not self.periodic:
            object.__setattr__(self, "periodic", (False,) * self.dim)
        if len(self.coord_ranges) != self.dim or len(self.periodic) != self.dim:
            raise ValueError("coord_ranges/periodic must have one entry per axis")
        if self.boundary_axis is not None and self.periodic[self.boundary_axis]:
            raise ValueError("boundary axis cannot be periodic")

    def scale(self, axis: int) -> float:
        lo, hi = self.coord_ranges[axis]
        width = hi - lo
        return float(width) if np.isfinite(width) and width > 0 else 1.0


@dataclass(frozen=True)
class FD:
    """Finite-difference settings.

    ``h=None`` picks ``eps**(1/(order+d))`` for a d-th derivative, which
    balances truncation against roundoff for a single differentiation.
    Derivatives of quantities that are themselves finite-difference outputs
    use ``h_outer``.
    """

    h: float | None = None
    order: int = 4
    h_outer: float = 1e-2

    def __post_init__(self):
        if self.order not in (2, 4, 6):
            raise ValueError("stencil order must be 2, 4 or 6")

    def step(self, deriv: int, scale: float = 1.0) -> float:
        if self.h is not None:
            return self.h * scale
        return EPS ** (1.0 / (self.order + deriv)) * scale

    def outer(self) -> "FD":
        """Settings for a derivative applied on top of another FD result."""
        return FD(h=self.h_outer if self.h is None else max(self.h, self.h_outer),
                  order=self.order, h_outer=self.h_outer)


DEFAULT_FD = FD()


@lru_cache(maxsize=None)
def stencil_weights(offsets: tuple, deriv: int) -> np.ndarray:
    """Weights w with sum_k w_k u(x + o_k h) ~ h^deriv u^(deriv)(x)."""
    o = np.asarray(offsets, dtype=float)
    m = len(o)
    if m <= deriv:
        raise ValueError("not enough stencil points")
    V = np.vander(o, m, increasing=True).T / np.array([factorial(j) for j in range(m)])[:, None]
    rhs = np.zeros(m)
    rhs[deriv] = 1.0
    return np.linalg.solve(V, rhs)


def central_offsets(deriv: int, order: int) -> tuple:
    npts = 2 * ((deriv + 1) // 2) - 1 + order
    half = (npts - 1) // 2
    return tuple(range(-half, half + 1))


def one_sided_offsets(deriv: int, order: int, room_lo: float, room_hi: float) -> tuple:
    """Shifted stencil of the same accuracy that stays inside the range."""
    npts = deriv + order
    lo = max(-int(np.floor(room_lo)), -(npts - 1))
    lo = min(lo, 0)
    if lo + npts - 1 > room_hi:
        lo = int(np.floor(room_hi)) - (npts - 1)
    return tuple(range(lo, lo + npts))


def fd_derivative(func: Field, multi_index: Sequence[int], x, t: float = 0.0,
                  fd: FD = DEFAULT_FD, chart: Chart | None = None,
                  return_info: bool = False):
    """Partial derivative of ``func`` at ``x`` with orders ``multi_index``.

    Central stencils are used unless a non-periodic chart range would be
    exited, in which case a one-sided stencil of the same order is used and
    the axis is reported in the info dict.
    """
    x = np.asarray(x, dtype=float)
    multi_index = tuple(int(k) for k in multi_index)
    if len(multi_index) != x.size:
        raise ValueError("multi_index length must match point dimension")
    if sum(multi_index) > 3:
        raise ValueError("total derivative order is limited to 3")
    total = sum(multi_index)
    axes, stencils, one_sided = [], [], []
    for ax, k in enumerate(multi_index):
        if k == 0:
            continue
        scale = chart.scale(ax) if chart is not None and chart.boundary_axis is None else 1.0
        h = fd.step(total, scale)
        offs = central_offsets(k, fd.order)
        if chart is not None and not chart.periodic[ax]:
            lo, hi = chart.coord_ranges[ax]
            if x[ax] + offs[0] * h < lo or x[ax] + offs[-1] * h > hi:
                offs = one_sided_offsets(k, fd.order, (x[ax] - lo) / h, (hi - x[ax]) / h)
                one_sided.append(ax)
        axes.append(ax)
        stencils.append((np.array(offs) * h, stencil_weights(offs, k) / h ** k))
    if not axes:
        val = np.asarray(func(x, t), dtype=float)
        return (val, {"one_sided_axes": []}) if return_info else val
    acc = None
    for combo in product(*[range(len(s[0])) for s in stencils]):
        w = 1.0
        shift = np.zeros_like(x)
        for (offs, wts), ax, j in zip(stencils, axes, combo):
            w *= wts[j]
            shift[ax] += offs[j]
        if w == 0.0:
            continue
        term = w * np.asarray(func(x + shift, t), dtype=float)
        acc = term if acc is None else acc + term
    return (acc, {"one_sided_axes": one_sided}) if return_info else acc


def jet(func: Field, x, t: float = 0.0, h: float = 1e-3, order: int = 4, nd: int = 2):
    """Value, gradient and Hessian (when ``nd == 2``) of a field by stencils.

    Returns arrays with derivative axes first: ``d1[k]`` is d_k func and
    ``d2[k, l]`` is d_k d_l func.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    cache: dict = {}

    def at(offs):
        if offs not in cache:
            cache[offs] = np.asarray(func(x + h * np.asarray(offs, dtype=float), t), dtype=float)
        return cache[offs]

    zero = (0,) * n
    v0 = at(zero)
    o1 = central_offsets(1, order)
    w1 = stencil_weights(o1, 1) / h
    d1 = np.zeros((n,) + v0.shape)
    for k in range(n):
        for o, w in zip(o1, w1):
            if w != 0.0:
                e = list(zero)
                e[k] = o
                d1[k] += w * at(tuple(e))
    if nd < 2:
        return v0, d1
    o2 = central_offsets(2, order)
    w2 = stencil_weights(o2, 2) / h ** 2
    d2 = np.zeros((n, n) + v0.shape)
    for k in range(n):
        for o, w in zip(o2, w2):
            e = list(zero)
            e[k] = o
            d2[k, k] += w * at(tuple(e))
        for l in range(k + 1, n):
            acc = np.zeros_like(v0)
            for (oa, wa), (ob, wb) in product(zip(o1, w1), zip(o1, w1)):
                if wa == 0.0 or wb == 0.0:
                    continue
                e = list(zero)
                e[k] = oa
                e[l] = ob
                acc += wa * wb * at(tuple(e))
            d2[k, l] = acc
            d2[l, k] = acc
    return v0, d1, d2


# --------------------------------------------------------------------------
# curvature
# --------------------------------------------------------------------------


@dataclass
class CurvaturePackage:
    """Metric data and curvature at one point (riem[a,b,c,d] = R_abcd)."""

    g: np.ndarray
    ginv: np.ndarray
    dg: np.ndarray
    gamma: np.ndarray  # gamma[c, a, b] = Gamma^c_{ab}
    riem: np.ndarray   # riem[a, b, c, x] = R_{abcx}
    ric: np.ndarray
    scalar: float
    extra: dict = field(default_factory=dict)


def invert_metric(g: np.ndarray) -> np.ndarray:
    g = np.asarray(g, dtype=float)
    try:
        L = np.linalg.cholesky(0.5 * (g + g.T))
    except np.linalg.LinAlgError as exc:
        raise DegenerateMetricError("degenerate metric") from exc
    if np.min(np.abs(np.diag(L))) < 1e-14 * max(1.0, np.max(np.abs(g))):
        raise DegenerateMetricError("degenerate metric")
    return np.linalg.inv(g)


def christoffel(ginv: np.ndarray, dg: np.ndarray) -> np.ndarray:
    """Gamma^c_{ab} from dg[k, i, j] = d_k g_ij."""
    low = 0.5 * (np.einsum("adb->dab", dg) + np.einsum("bda->dab", dg) - dg)
    return np.einsum("cd,dab->cab", ginv, low)


def curvature_from_jet(g: np.ndarray, dg: np.ndarray, ddg: np.ndarray) -> CurvaturePackage:
    ginv = invert_metric(g)
    gam = christoffel(ginv, dg)
    # lowered Christoffel L[d, b, c] = Gamma_{d, bc} and its derivative
    low = 0.5 * (np.einsum("bdc->dbc", dg) + np.einsum("cdb->dbc", dg) - dg)
    dlow = 0.5 * (np.einsum("abdc->adbc", ddg) + np.einsum("acdb->adbc", ddg)
                  - ddg)
    dginv = -np.einsum("cp,apq,qd->acd", ginv, dg, ginv)
    dgam = np.einsum("ade,ebc->adbc", dginv, low) + np.einsum("de,aebc->adbc", ginv, dlow)
    # textbook R^d_{cab} = (R(d_a, d_b) d_c)^d with R(X,Y) = [nabla_X, nabla_Y] - nabla_[X,Y]
    rtb = (np.einsum("adbc->dcab", dgam) - np.einsum("bdac->dcab", dgam)
           + np.einsum("dae,ebc->dcab", gam, gam) - np.einsum("dbe,eac->dcab", gam, gam))
    riem = -np.einsum("xd,dcab->abcx", g, rtb)
    ric = np.einsum("ac,abcx->bx", ginv, riem)
    ric = 0.5 * (ric + ric.T)
    scalar = float(np.einsum("bx,bx->", ginv, ric))
    return CurvaturePackage(g=g, ginv=ginv, dg=dg, gamma=gam, riem=riem, ric=ric, scalar=scalar)


def metric_jet(g: Field, x, t: float = 0.0, fd: FD = DEFAULT_FD):
    g0, dg, ddg = jet(g, x, t, h=fd.step(2), order=fd.order)
    g0 = 0.5 * (g0 + np.swapaxes(g0, -1, -2))
    return g0, dg, ddg


def curvature_package(g: Field, x, t: float = 0.0, fd: FD = DEFAULT_FD) -> CurvaturePackage:
    """Christoffel symbols, Riemann, Ricci and scalar curvature at ``x``."""
    g0, dg, ddg = metric_jet(g, x, t, fd)
    return curvature_from_jet(g0, dg, ddg)


def connection(g: Field, x, t: float = 0.0, fd: FD = DEFAULT_FD):
    """Metric, inverse and Christoffel symbols (first derivatives only)."""
    g0, dg = jet(g, x, t, h=fd.step(1), order=fd.order, nd=1)
    g0 = 0.5 * (g0 + g0.T)
    ginv = invert_metric(g0)
    return g0, ginv, christoffel(ginv, dg)


@dataclass
class ScalarOps:
    value: float
    df: np.ndarray
    grad: np.ndarray
    hess: np.ndarray
    lap: float
    grad_sq: float


def differential_ops(f: Field, g: Field, x, t: float = 0.0, fd: FD = DEFAULT_FD) -> ScalarOps:
    """Gradient, differential, Hessian, Laplacian and |grad f|^2 of a scalar."""
    _, ginv, gam = connection(g, x, t, fd)
    f0, df, ddf = jet(f, x, t, h=fd.step(2), order=fd.order)
    hess = ddf - np.einsum("cab,c->ab", gam, df)
    hess = 0.5 * (hess + hess.T)
    grad = ginv @ df
    return ScalarOps(value=float(f0), df=df, grad=grad, hess=hess,
                     lap=float(np.einsum("ab,ab->", ginv, hess)), grad_sq=float(df @ grad))


def covariant_derivative(T: Field, g: Field, x, t: float = 0.0, fd: FD = DEFAULT_FD) -> np.ndarray:
    """nabla T for an all-covariant tensor field; new index comes first."""
    _, _, gam = connection(g, x, t, fd)
    T0, dT = jet(T, x, t, h=fd.outer().step(1), order=fd.order, nd=1)
    out = dT.copy()
    rank = T0.ndim
    for s in range(rank):
        # subtract Gamma^l_{k a_s} T_{... l ...}
        moved = np.moveaxis(T0, s, 0)
        corr = np.einsum("lka,l...->ka...", gam, moved)
        out -= np.moveaxis(corr, 1, s + 1)
    return out


def lie_derivative_metric(g: Field, X: Field, x, t: float = 0.0, fd: FD = DEFAULT_FD) -> np.ndarray:
    """(L_X g)_{ab} = nabla_a X_b + nabla_b X_a."""
    def lowered(y, s):
        return np.asarray(g(y, s), dtype=float) @ np.asarray(X(y, s), dtype=float)

    _, ginv, gam = connection(g, x, t, fd)
    X0, dX = jet(lowered, x, t, h=fd.step(1), order=fd.order, nd=1)
    nab = dX - np.einsum("cab,c->ab", gam, X0)
    return nab + nab.T


def bianchi_residual(g: Field, x, t: float = 0.0, fd: FD = DEFAULT_FD) -> np.ndarray:
    """div Ric - dR / 2, which vanishes by the contracted Bianchi identity."""
    def ric(y, s):
        return curvature_package(g, y, s, fd).ric

    def scal(y, s):
        return curvature_package(g, y, s, fd).scalar

    ginv = invert_metric(np.asarray(g(np.asarray(x, float), t), dtype=float))
    nric = covariant_derivative(ric, g, x, t, fd)
    _, dR = jet(scal, x, t, h=fd.outer().step(1), order=fd.order, nd=1)
    return np.einsum("ca,cab->b", ginv, nric) - 0.5 * dR


def nabla_ricci(g: Field, x, t: float = 0.0, fd: FD = DEFAULT_FD) -> np.ndarray:
    return covariant_derivative(lambda y, s: curvature_package(g, y, s, fd).ric, g, x, t, fd)


def nabla_riemann(g: Field, x, t: float = 0.0, fd: FD = DEFAULT_FD) -> np.ndarray:
    return covariant_derivative(lambda y, s: curvature_package(g, y, s, fd).riem, g, x, t, fd)


def scalar_gradient(g: Field, x, t: float = 0.0, fd: FD = DEFAULT_FD) -> np.ndarray:
    """d R as a covector."""
    _, dR = jet(lambda y, s: curvature_package(g, y, s, fd).scalar, x, t,
                h=fd.outer().step(1), order=fd.order, nd=1)
    return dR


# --------------------------------------------------------------------------
# checks on the algebraic structure
# --------------------------------------------------------------------------


def riemann_symmetry_residuals(pkg: CurvaturePackage) -> dict:
    """Relative residuals of the algebraic Riemann symmetries."""
    R = pkg.riem
    scale = max(np.max(np.abs(R)), 1e-300)
    return {
        "antisym_ab": float(np.max(np.abs(R + np.einsum("abcx->bacx", R))) / scale),
        "antisym_cx": float(np.max(np.abs(R + np.einsum("abcx->abxc", R))) / scale),
        "pair_swap": float(np.max(np.abs(R - np.einsum("abcx->cxab", R))) / scale),
        "first_bianchi": float(np.max(np.abs(
            R + np.einsum("abcx->bcax", R) + np.einsum("abcx->cabx", R))) / scale),
    }
