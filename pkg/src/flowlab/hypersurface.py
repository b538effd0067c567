"""Immersed hypersurfaces in a coordinate chart.

An :class:`Immersion` maps parameters ``p`` (dimension n-1) and time to chart
points. Everything on the hypersurface is computed pointwise by stencils in
parameter space: the induced metric, the inward unit normal ``e0``, the
second fundamental form ``A_ij = g(nabla_{d_i} d_j, e0)``, its trace ``H``,
intrinsic derivatives, and the Codazzi and Simons residuals.

Ambient tensors restricted to the hypersurface are expressed in the adapted
frame ``(e0, d_1 x, ..., d_{n-1} x)`` so that index 0 is normal and
``1..n-1`` are tangential.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gamma as gamma_fn
from typing import Callable

import numpy as np

from . import tensor
from .profiles import fejer_weights, gauss_legendre
from .tensor import FD, DEFAULT_FD, christoffel, invert_metric, jet


class ImmersionError(ValueError):
    """Raised when the induced metric degenerates at a node."""


def sphere_area(k: int) -> float:
    """Area of the unit k-sphere."""
    return 2 * np.pi ** ((k + 1) / 2) / gamma_fn((k + 1) / 2)


@dataclass
class Immersion:
    """A parametrized hypersurface ``x = embed(p, t)``.

    ``inward(x, t)`` returns a reference direction; the unit normal is
    oriented so that it has positive component along it. ``quad`` returns
    parameter nodes and weights with ``int F dA ~ sum w_k F(p_k) area(p_k)``.
    """

    embed: Callable
    param_dim: int
    kind: str
    inward: Callable
    quad: Callable | None = None
    meta: dict = field(default_factory=dict)

    def point(self, p, t: float = 0.0) -> np.ndarray:
        return np.asarray(self.embed(np.asarray(p, dtype=float), t), dtype=float)


@dataclass
class InducedPackage:
    x: np.ndarray
    tangents: np.ndarray      # (n-1, n)
    g: np.ndarray             # ambient metric at x
    ginv: np.ndarray
    gamma: np.ndarray         # ambient Christoffel at x
    ghat: np.ndarray
    ghat_inv: np.ndarray
    e0: np.ndarray
    A: np.ndarray
    H: float
    area_weight: float

    @property
    def frame(self) -> np.ndarray:
        """Columns e0, d_1 x, ..., d_{n-1} x."""
        return np.column_stack([self.e0, self.tangents.T])

    @property
    def A_mixed(self) -> np.ndarray:
        """A^k_i stored as [k, i]."""
        return self.ghat_inv @ self.A

    @property
    def A_sq(self) -> float:
        Aup = self.ghat_inv @ self.A @ self.ghat_inv
        return float(np.einsum("ij,ij->", Aup, self.A))


def frame_components(T: np.ndarray, E: np.ndarray) -> np.ndarray:
    """Contract every covariant slot of ``T`` with the frame columns ``E``."""
    out = T
    for s in range(T.ndim):
        out = np.moveaxis(np.tensordot(out, E, axes=([s], [0])), -1, s)
    return out


def induced_package(imm: Immersion, g: tensor.Field, p, t: float = 0.0,
                    fd: FD = DEFAULT_FD) -> InducedPackage:
    """Induced metric, inward normal, second fundamental form and H."""
    p = np.asarray(p, dtype=float)
    x, X, Xpp = jet(imm.embed, p, t, h=fd.step(2), order=fd.order)
    gx, ginv, gam = tensor.connection(g, x, t, fd)
    ghat = X @ gx @ X.T
    try:
        ghat_inv = invert_metric(ghat)
    except tensor.DegenerateMetricError as exc:
        raise ImmersionError(f"immersion failure at node {p.tolist()}") from exc
    # normal covector annihilates all tangents
    _, _, vt = np.linalg.svd(X)
    nu = vt[-1]
    e0 = ginv @ nu
    e0 = e0 / np.sqrt(e0 @ gx @ e0)
    ref = np.asarray(imm.inward(x, t), dtype=float)
    if e0 @ gx @ ref < 0:
        e0 = -e0
    acc = Xpp + np.einsum("cab,ia,jb->ijc", gam, X, X)
    A = np.einsum("ijc,cd,d->ij", acc, gx, e0)
    A = 0.5 * (A + A.T)
    H = float(np.einsum("ij,ij->", ghat_inv, A))
    return InducedPackage(x=x, tangents=X, g=gx, ginv=ginv, gamma=gam, ghat=ghat,
                          ghat_inv=ghat_inv, e0=e0, A=A, H=H,
                          area_weight=float(np.sqrt(np.linalg.det(ghat))))


# --------------------------------------------------------------------------
# intrinsic calculus
# --------------------------------------------------------------------------


def surface_christoffel(imm: Immersion, g, p, t: float = 0.0, fd: FD = DEFAULT_FD):
    def ghat(q, s):
        return induced_package(imm, g, q, s, fd).ghat

    g0, dg = jet(ghat, p, t, h=fd.outer().step(1), order=fd.order, nd=1)
    g0 = 0.5 * (g0 + g0.T)
    ginv = invert_metric(g0)
    return g0, ginv, christoffel(ginv, dg)


@dataclass
class SurfaceScalarOps:
    value: float
    grad: np.ndarray   # contravariant components in parameter basis
    dphi: np.ndarray
    hess: np.ndarray
    lap: float
    grad_sq: float


def surface_differential_ops(phi: Callable, imm: Immersion, g, p, t: float = 0.0,
                             fd: FD = DEFAULT_FD, h: float | None = None) -> SurfaceScalarOps:
    """Intrinsic gradient, Hessian and Laplace-Beltrami of ``phi(p, t)``.

    ``h`` overrides the parameter step (use the outer step for derived
    quantities such as H).
    """
    p = np.asarray(p, dtype=float)
    _, ginv, gam = surface_christoffel(imm, g, p, t, fd)
    step = h if h is not None else fd.outer().step(2)
    v0, d1, d2 = jet(phi, p, t, h=step, order=fd.order)
    hess = d2 - np.einsum("kij,k->ij", gam, d1)
    hess = 0.5 * (hess + hess.T)
    grad = ginv @ d1
    return SurfaceScalarOps(value=float(v0), grad=grad, dphi=d1, hess=hess,
                            lap=float(np.einsum("ij,ij->", ginv, hess)),
                            grad_sq=float(d1 @ grad))


def surface_covariant_derivative(T: Callable, imm: Immersion, g, p, t: float = 0.0,
                                 fd: FD = DEFAULT_FD, h: float | None = None) -> np.ndarray:
    """nabla-hat of a covariant tensor field on the surface; new index first."""
    _, _, gam = surface_christoffel(imm, g, p, t, fd)
    step = h if h is not None else fd.outer().step(1)
    T0, dT = jet(T, p, t, h=step, order=fd.order, nd=1)
    out = dT.copy()
    for s in range(T0.ndim):
        moved = np.moveaxis(T0, s, 0)
        corr = np.einsum("lka,l...->ka...", gam, moved)
        out -= np.moveaxis(corr, 1, s + 1)
    return out


def surface_laplacian_tensor(T: Callable, imm: Immersion, g, p, t: float = 0.0,
                             fd: FD = DEFAULT_FD) -> np.ndarray:
    """Rough Laplacian g^{kl} nabla_k nabla_l T of a covariant tensor field."""
    def nabla_T(q, s):
        return surface_covariant_derivative(T, imm, g, q, s, fd)

    nn = surface_covariant_derivative(nabla_T, imm, g, p, t, fd)
    _, ginv, _ = surface_christoffel(imm, g, p, t, fd)
    return np.einsum("kl,kl...->...", ginv, nn)


# --------------------------------------------------------------------------
# ambient curvature along the surface
# --------------------------------------------------------------------------


@dataclass
class AmbientAlongSurface:
    """Ambient curvature and its derivatives in the adapted frame."""

    pkg: InducedPackage
    riem: np.ndarray      # R_{abcd} frame components
    ric: np.ndarray
    scalar: float
    nabla_ric: np.ndarray | None = None   # [c, a, b] frame components
    nabla_riem: np.ndarray | None = None
    dR: np.ndarray | None = None


def ambient_along(imm: Immersion, g, p, t: float = 0.0, fd: FD = DEFAULT_FD,
                  derivatives: bool = True) -> AmbientAlongSurface:
    pkg = induced_package(imm, g, p, t, fd)
    cp = tensor.curvature_package(g, pkg.x, t, fd)
    E = pkg.frame
    out = AmbientAlongSurface(pkg=pkg, riem=frame_components(cp.riem, E),
                              ric=frame_components(cp.ric, E), scalar=cp.scalar)
    if derivatives:
        out.nabla_ric = frame_components(tensor.nabla_ricci(g, pkg.x, t, fd), E)
        out.nabla_riem = frame_components(tensor.nabla_riemann(g, pkg.x, t, fd), E)
        out.dR = tensor.scalar_gradient(g, pkg.x, t, fd) @ E
    return out


def second_fundamental_form(imm, g, fd=DEFAULT_FD):
    return lambda q, s: induced_package(imm, g, q, s, fd).A


def mean_curvature(imm, g, fd=DEFAULT_FD):
    return lambda q, s: induced_package(imm, g, q, s, fd).H


def codazzi_residual(imm: Immersion, g, p, t: float = 0.0, fd: FD = DEFAULT_FD) -> np.ndarray:
    """R_{0jik} - (nabla_i A_jk - nabla_k A_ij), stored as [i, j, k]."""
    amb = ambient_along(imm, g, p, t, fd, derivatives=False)
    nA = surface_covariant_derivative(second_fundamental_form(imm, g, fd), imm, g, p, t, fd)
    m = nA.shape[0]
    R = amb.riem
    res = np.empty((m, m, m))
    for i in range(m):
        for j in range(m):
            for k in range(m):
                res[i, j, k] = R[0, j + 1, i + 1, k + 1] - (nA[i, j, k] - nA[k, i, j])
    return res


def simons_terms(imm: Immersion, g, p, t: float = 0.0, fd: FD = DEFAULT_FD) -> dict:
    """Both sides of the Simons-type identity for the Hessian of H."""
    amb = ambient_along(imm, g, p, t, fd)
    pkg = amb.pkg
    m = pkg.A.shape[0]
    Rm, Ric = amb.riem, amb.ric
    hessH = surface_differential_ops(mean_curvature(imm, g, fd), imm, g, p, t, fd).hess
    lapA = surface_laplacian_tensor(second_fundamental_form(imm, g, fd), imm, g, p, t, fd)

    def ric_j0(q, s):
        a = ambient_along(imm, g, q, s, fd, derivatives=False)
        return a.ric[1:, 0]

    n_ric_j0 = surface_covariant_derivative(ric_j0, imm, g, p, t, fd)  # [i, j]
    A, Am = pkg.A, pkg.A_mixed
    Aup = pkg.ghat_inv @ A @ pkg.ghat_inv
    H = pkg.H
    T = slice(1, None)
    R0k0j = Rm[0, T, 0, T]          # [k, j]
    R00 = Ric[0, 0]
    Rkilj = Rm[T, T, T, T]          # [k, i, l, j]
    n0Rij = amb.nabla_ric[0, T, T]
    n0R0i0j = amb.nabla_riem[0, 0, T, 0, T]
    rhs = (lapA + n_ric_j0 + n_ric_j0.T - n0Rij
           + Am.T @ R0k0j + (Am.T @ R0k0j).T - A * R00
           + 2 * np.einsum("kl,kilj->ij", Aup, Rkilj)
           - H * Rm[0, T, 0, T] - H * Am.T @ A + pkg.A_sq * A + n0R0i0j)
    return {"lhs": hessH, "rhs": rhs, "residual": hessH - rhs, "package": pkg, "m": m}


def simons_residual(imm: Immersion, g, p, t: float = 0.0, fd: FD = DEFAULT_FD) -> np.ndarray:
    return simons_terms(imm, g, p, t, fd)["residual"]


# --------------------------------------------------------------------------
# integration
# --------------------------------------------------------------------------


def integrate_surface(integrand, imm: Immersion, g, t: float = 0.0, weight=None,
                      resolution: int | tuple = 64, fd: FD = DEFAULT_FD,
                      packages=None) -> float:
    """Quadrature of ``integrand`` over the hypersurface.

    ``integrand`` is an array of node values or a callable
    ``integrand(pkg, p)``; ``weight`` optionally multiplies by a chart
    function such as ``exp(-f)`` evaluated at the embedded point.
    """
    nodes, w = imm.quad(resolution)
    if packages is None:
        packages = [induced_package(imm, g, q, t, fd) for q in nodes]
    vals = np.array([integrand(pk, q) if callable(integrand) else 0.0
                     for pk, q in zip(packages, nodes)]) if callable(integrand) \
        else np.broadcast_to(np.asarray(integrand, dtype=float), (len(nodes),))
    if np.any(~np.isfinite(vals)):
        bad = int(np.flatnonzero(~np.isfinite(vals))[0])
        raise ValueError(f"non-finite integrand at node {np.asarray(nodes[bad]).tolist()}")
    area = np.array([pk.area_weight for pk in packages])
    if weight is not None:
        area = area * np.array([weight(pk.x, t) for pk in packages])
    return float(np.sum(w * vals * area))


# --------------------------------------------------------------------------
# immersion families
# --------------------------------------------------------------------------


def hyperspherical(angles: np.ndarray) -> np.ndarray:
    """Unit vector in R^{k+1} from k hyperspherical angles (last is azimuth)."""
    k = angles.size
    out = np.ones(k + 1)
    s = 1.0
    for i in range(k - 1):
        out[i] = s * np.cos(angles[i])
        s = s * np.sin(angles[i])
    out[k - 1] = s * np.cos(angles[-1])
    out[k] = s * np.sin(angles[-1])
    return out


def revolution_weights(N: int, n: int) -> tuple:
    """Midpoint nodes in theta and weights for a hypersurface of revolution.

    The area integrand ``F rho^{n-2} |x_theta|`` extends evenly across the
    poles when n is even (plain midpoint rule is spectral) and oddly when n
    is odd (Fejer rule applied to the integrand divided by sin).
    """
    theta = (np.arange(N) + 0.5) * np.pi / N
    if n % 2 == 0:
        w = np.full(N, np.pi / N)
    else:
        w = fejer_weights(N) / np.sin(theta)
    return theta, w * sphere_area(n - 2)


def revolution_immersion(profile: Callable, n: int, inward=None, meta=None) -> Immersion:
    """Hypersurface of revolution about the x_n axis.

    ``profile(theta, t) -> (rho, z)`` for theta in (0, pi), with rho = 0 at
    the poles. Parameters are (theta, angles on S^{n-2}); quadrature nodes sit
    on the meridian where the angular parametrization is regular.
    """
    def embed(p, t):
        rho, z = profile(p[0], t)
        omega = hyperspherical(np.asarray(p[1:], dtype=float))
        return np.concatenate([rho * omega, [z]])

    mer = np.full(n - 2, np.pi / 2)
    mer[-1] = 0.0

    def quad(N):
        N = N if np.isscalar(N) else N[0]
        theta, w = revolution_weights(int(N), n)
        return [np.concatenate([[th], mer]) for th in theta], w

    if inward is None:
        def inward(x, t):
            return -np.asarray(x, dtype=float)
    return Immersion(embed=embed, param_dim=n - 1, kind="revolution", inward=inward,
                     quad=quad, meta=dict(meta or {}, n=n, meridian=mer))


def round_sphere(radius, n: int) -> Immersion:
    """Round sphere of radius ``radius`` (number or function of t) about 0."""
    rad = radius if callable(radius) else (lambda t, r=float(radius): r)
    return revolution_immersion(lambda th, t: (rad(t) * np.sin(th), rad(t) * np.cos(th)), n,
                                meta={"surface": "round-sphere"})


def graph_immersion(height: Callable, n: int, radius: float | None = None,
                    period: float | None = None, up: bool = True, meta=None) -> Immersion:
    """Graph ``x_n = height(p, t)`` over a disk of ``radius`` or a torus of ``period``."""
    def embed(p, t):
        return np.concatenate([p, [height(p, t)]])

    sgn = 1.0 if up else -1.0

    def inward(x, t):
        e = np.zeros(n)
        e[-1] = sgn
        return e

    def quad(N):
        if period is not None:
            N = (N,) * (n - 1) if np.isscalar(N) else N
            axes = [period * (np.arange(k) + 0.5) / k for k in N]
            mesh = np.meshgrid(*axes, indexing="ij")
            nodes = np.stack([m.ravel() for m in mesh], axis=1)
            w = np.full(len(nodes), np.prod([period / k for k in N]))
            return list(nodes), w
        if n != 3:
            raise NotImplementedError("disk quadrature implemented for surfaces in R^3")
        Nr, Nphi = (N, 2 * N) if np.isscalar(N) else N
        r, wr = gauss_legendre(0.0, radius, Nr)
        phi = 2 * np.pi * np.arange(Nphi) / Nphi
        nodes = [np.array([ri * np.cos(ph), ri * np.sin(ph)]) for ri in r for ph in phi]
        w = np.array([wi * ri * 2 * np.pi / Nphi for ri, wi in zip(r, wr) for _ in phi])
        return nodes, w

    return Immersion(embed=embed, param_dim=n - 1, kind="graph", inward=inward, quad=quad,
                     meta=dict(meta or {}, n=n, radius=radius, period=period))


def coordinate_slice(position: Callable, n: int, fiber_period: float = 2 * np.pi,
                     inward_sign: float = 1.0, meta=None) -> Immersion:
    """Level set ``x^0 = position(t)`` with fiber coordinates as parameters."""
    def embed(p, t):
        return np.concatenate([[position(t)], p])

    def inward(x, t):
        e = np.zeros(n)
        e[0] = inward_sign
        return e

    def quad(N):
        return [np.full(n - 1, 0.5 * fiber_period)], np.array([fiber_period ** (n - 1)])

    return Immersion(embed=embed, param_dim=n - 1, kind="slice", inward=inward, quad=quad,
                     meta=dict(meta or {}, n=n, homogeneous=True))


def normal_time_derivative(quantity: Callable, imm: Immersion, g, p, t: float,
                           dt: float, fd: FD = DEFAULT_FD) -> float:
    """d/dt of a scalar surface quantity following the normal motion.

    ``quantity(p, t)`` is sampled at fixed parameter; the tangential part of
    the parametrization velocity is removed with the intrinsic gradient.
    """
    q_plus, q_minus = quantity(p, t + dt), quantity(p, t - dt)
    q_p2, q_m2 = quantity(p, t + 2 * dt), quantity(p, t - 2 * dt)
    dq = (8 * (q_plus - q_minus) - (q_p2 - q_m2)) / (12 * dt)
    xp = imm.point(p, t + dt) - imm.point(p, t - dt)
    xp2 = imm.point(p, t + 2 * dt) - imm.point(p, t - 2 * dt)
    vel = (8 * xp - xp2) / (12 * dt)
    pkg = induced_package(imm, g, p, t, fd)
    # tangential velocity components in the parameter basis
    vt = pkg.ghat_inv @ (pkg.tangents @ pkg.g @ vel)
    ops = surface_differential_ops(lambda q, s: quantity(q, s), imm, g, p, t, fd)
    return float(dq - vt @ ops.dphi)


# --------------------------------------------------------------------------
# evolution of boundary quantities
# --------------------------------------------------------------------------

EVOLUTION_QUANTITIES = ("g_ij", "w", "A_ij", "H", "dA")
EVOLUTION_REGIMES = ("mcf-in-background", "modified-flow-boundary")


def evolution_rhs(quantity: str, regime: str, imm: Immersion, g, p, t: float = 0.0,
                  w=None, f=None, alpha: float = 0.0, fd: FD = DEFAULT_FD,
                  contraction: str = "tangential"):
    """Right-hand side of the evolution equation of a boundary quantity.

    ``mcf-in-background``: the ambient moves by the extended Ricci flow and
    the surface by mean curvature. ``modified-flow-boundary``: the ambient
    moves by the modified flow with the boundary fixed in coordinates; this
    adds the ``-L_{grad f}`` transport terms. ``dA`` returns the rate of the
    area density (not its logarithm).

    ``contraction`` fixes the Ricci-type contraction ``R^l_{klj}`` in the
    A-equation: ``tangential`` sums l over the surface only
    (``Ric_kj - R_0k0j``), ``ambient`` uses the full ``Ric_kj``.
    """
    if quantity not in EVOLUTION_QUANTITIES:
        raise ValueError(f"unknown quantity '{quantity}'")
    if regime not in EVOLUTION_REGIMES:
        raise ValueError(f"unknown regime '{regime}'")
    p = np.asarray(p, dtype=float)
    deriv = quantity in ("A_ij", "H")
    amb = ambient_along(imm, g, p, t, fd, derivatives=deriv)
    pk = amb.pkg
    T = slice(1, None)
    Rij = amb.ric[T, T]
    gi = pk.ghat_inv
    A, H = pk.A, pk.H
    Aup = gi @ A @ gi
    if w is None:
        dw, ddw_00 = np.zeros(pk.A.shape[0]), 0.0
    else:
        wo = tensor.differential_ops(w, g, pk.x, t, fd)
        dw = pk.tangents @ wo.df
        ddw_00 = float(pk.e0 @ wo.hess @ pk.e0)
    grad_w = gi @ dw
    mod = regime == "modified-flow-boundary"
    fops = None
    if mod:
        if f is None:
            raise ValueError("modified-flow-boundary needs a potential")
        fops = surface_differential_ops(lambda q, s: f(imm.point(q, s), s), imm, g, p, t, fd)

    if quantity == "g_ij":
        out = -2 * (Rij - alpha * np.outer(dw, dw)) - 2 * H * A
        if mod:
            out = out - 2 * fops.hess
        return out
    if quantity == "dA":
        rate = -(float(np.einsum("ij,ij->", gi, Rij)) + H ** 2 - alpha * float(dw @ grad_w))
        if mod:
            rate -= fops.lap
        return rate * pk.area_weight
    if quantity == "w":
        if w is None:
            return 0.0
        lap_w = surface_differential_ops(lambda q, s: w(imm.point(q, s), s), imm, g, p, t,
                                         fd).lap
        out = lap_w + ddw_00
        if mod:
            out -= float(fops.grad @ dw)
        return out
    if quantity == "H":
        ops = surface_differential_ops(mean_curvature(imm, g, fd), imm, g, p, t, fd,
                                       h=fd.outer().step(2))
        out = (ops.lap + 2 * float(np.einsum("ij,ij->", Aup, Rij)) + pk.A_sq * H
               + amb.nabla_ric[0, 0, 0] - 2 * alpha * float(grad_w @ A @ grad_w))
        if mod:
            out -= float(fops.grad @ ops.dphi)
        return out
    # A_ij
    Rm = amb.riem
    C = Rij - Rm[0, T, 0, T] if contraction == "tangential" else Rij
    AmC = pk.A_mixed.T @ C
    lapA = surface_laplacian_tensor(second_fundamental_form(imm, g, fd), imm, g, p, t, fd)
    out = (lapA - AmC - AmC.T + 2 * np.einsum("kl,kilj->ij", Aup, Rm[T, T, T, T])
           - 2 * H * A @ gi @ A + pk.A_sq * A + amb.nabla_riem[0, 0, T, 0, T])
    if mod:
        nA = surface_covariant_derivative(second_fundamental_form(imm, g, fd), imm, g, p, t, fd)
        M = gi @ fops.hess        # nabla_i nabla^k f stored as [k, i]
        MA = M.T @ A
        out = out - np.einsum("k,kij->ij", fops.grad, nA) - MA - MA.T
    return out


def surface_quantity(quantity: str, imm: Immersion, g, p, t: float = 0.0, w=None,
                     fd: FD = DEFAULT_FD):
    """Instantaneous value of an evolving boundary quantity at parameter ``p``."""
    pk = induced_package(imm, g, p, t, fd)
    if quantity == "g_ij":
        return pk.ghat
    if quantity == "A_ij":
        return pk.A
    if quantity == "H":
        return pk.H
    if quantity == "dA":
        return pk.area_weight
    if quantity == "w":
        return 0.0 if w is None else float(w(pk.x, t))
    raise ValueError(f"unknown quantity '{quantity}'")
