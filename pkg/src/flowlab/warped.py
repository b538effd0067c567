"""Reduced geometry of warped products ``a(r)^2 dr^2 + b(r)^2 g_F``.

The fiber ``F`` is a flat torus (``k = 0``) or a round sphere (``k = 1``) of
dimension ``m = n - 1``. All fields (dilaton ``w``, potential ``f``) depend on
``r`` only, so every curvature quantity, operator and flow reduces to
one-dimensional profile calculus. Components are given in the orthonormal
frame ``e_s = a^{-1} d_r`` and unit fiber vectors.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from math import gamma as gamma_fn

import numpy as np

from .profiles import ChebProfile, FourierProfile, gauss_legendre
from .tensor import Chart, alpha_n


def _resample(prof, func):
    """A profile of the same kind and resolution as ``prof`` holding ``func``."""
    if isinstance(prof, FourierProfile):
        return FourierProfile.from_function(func, prof.N, prof.period, prof.r0)
    lo, hi = prof.domain
    return ChebProfile.from_function(func, lo, hi, len(prof.series.coef) - 1)


class ConstantProfile:
    """Profile that is constant in r (used for absent fields)."""

    def __init__(self, value: float = 0.0):
        self.value = float(value)

    def __call__(self, r, k: int = 0):
        r = np.asarray(r, dtype=float)
        return np.full(r.shape, self.value if k == 0 else 0.0)


@dataclass
class WarpedState:
    """Warped metric with dilaton and potential at one instant.

    ``periodic`` marks the closed case (r on a circle); otherwise ``domain``
    is an interval whose endpoints are boundary slices, or ``(0, R)`` with a
    regular axis at 0 when ``k == 1``.
    """

    a: object
    b: object
    w: object
    f: object
    n: int
    k: int = 0
    domain: tuple = (0.0, 2 * np.pi)
    periodic: bool = False
    fiber_period: float = 2 * np.pi
    tau: float | None = None

    @property
    def m(self) -> int:
        return self.n - 1

    @property
    def alpha(self) -> float:
        return alpha_n(self.n)

    @property
    def fiber_volume(self) -> float:
        if self.k == 0:
            return self.fiber_period ** self.m
        return 2 * np.pi ** ((self.m + 1) / 2) / gamma_fn((self.m + 1) / 2)

    # ---- unit-speed derivatives -------------------------------------------

    def ds(self, prof, r):
        """(u_s, u_ss) for a profile u, with d/ds = a^{-1} d/dr."""
        a, a1 = self.a(r), self.a(r, 1)
        u1, u2 = prof(r, 1), prof(r, 2)
        return u1 / a, u2 / a ** 2 - a1 * u1 / a ** 3

    def geometry(self, r) -> dict:
        """Curvature and warping data at radii ``r``."""
        r = np.asarray(r, dtype=float)
        b = self.b(r)
        bs, bss = self.ds(self.b, r)
        m, k = self.m, self.k
        ric_ss = -m * bss / b
        ric_ff = -bss / b + (m - 1) * (k - bs ** 2) / b ** 2
        return {"a": self.a(r), "b": b, "bs": bs, "bss": bss, "ric_ss": ric_ss,
                "ric_ff": ric_ff, "R": ric_ss + m * ric_ff}

    def scalar_ops(self, prof, r) -> dict:
        """Hessian (ss, ff), Laplacian and |grad|^2 of a radial function."""
        us, uss = self.ds(prof, r)
        bs_b = self.ds(self.b, r)[0] / self.b(r)
        return {"s": us, "ss": uss, "ff": bs_b * us, "lap": uss + self.m * bs_b * us,
                "grad_sq": us ** 2}

    def volume_density(self, r):
        """dV = a b^m dr (times the fiber volume)."""
        return self.a(r) * self.b(r) ** self.m

    # ---- quadrature ---------------------------------------------------------

    def nodes(self, N: int = 96):
        lo, hi = self.domain
        if self.periodic:
            r = lo + (hi - lo) * np.arange(N) / N
            return r, np.full(N, (hi - lo) / N)
        return gauss_legendre(lo, hi, N)

    def integrate(self, values_fn, N: int = 96) -> float:
        r, wq = self.nodes(N)
        return float(self.fiber_volume * np.sum(wq * values_fn(r) * self.volume_density(r)))

    # ---- boundary slices ----------------------------------------------------

    def boundary_sides(self):
        """(r, sigma) for every boundary slice; sigma = +1 if inward is +r."""
        if self.periodic:
            return []
        lo, hi = self.domain
        sides = [(hi, -1.0)]
        if not (self.k == 1 and lo == 0.0):
            sides.insert(0, (lo, 1.0))
        return sides

    def slice_geometry(self, r, sigma: float) -> dict:
        """A (orthonormal, umbilic), H, e0 of scalar fields on the slice r."""
        g = self.geometry(r)
        A = -sigma * g["bs"] / g["b"]
        return {"A": A, "H": self.m * A, "area": self.fiber_volume * g["b"] ** self.m,
                "e0f": sigma * self.ds(self.f, r)[0], "e0w": sigma * self.ds(self.w, r)[0]}

    def mcf_slice_speed(self, r):
        """dr/dt of a coordinate slice moving by mean curvature."""
        return -self.m * self.b(r, 1) / (self.a(r) ** 2 * self.b(r))

    # ---- flows --------------------------------------------------------------

    def extended_ricci_rates(self, r) -> dict:
        """Rates of a^2, b^2, w under the extended Ricci flow."""
        g = self.geometry(r)
        ws = self.scalar_ops(self.w, r)
        al = self.alpha
        return {"a2": g["a"] ** 2 * (-2 * g["ric_ss"] + 2 * al * ws["s"] ** 2),
                "b2": g["b"] ** 2 * (-2 * g["ric_ff"]),
                "w": ws["lap"], "f": np.zeros_like(np.asarray(r, dtype=float))}

    def modified_rates(self, r, tau_term: bool = False) -> dict:
        """Rates under the modified flow, including the potential equation.

        With ``tau_term`` the potential picks up ``+ n/(2 tau)`` (the entropy
        normalization, with ``d tau/dt = -1``).
        """
        g = self.geometry(r)
        ws = self.scalar_ops(self.w, r)
        fs = self.scalar_ops(self.f, r)
        al = self.alpha
        rate_f = -fs["lap"] - g["R"] + al * ws["s"] ** 2
        if tau_term:
            rate_f = rate_f + self.n / (2 * self.tau)
        return {"a2": -2 * g["a"] ** 2 * (g["ric_ss"] + fs["ss"] - al * ws["s"] ** 2),
                "b2": -2 * g["b"] ** 2 * (g["ric_ff"] + fs["ff"]),
                "w": ws["lap"] - fs["s"] * ws["s"], "f": rate_f}

    def advanced(self, rates_fn, delta: float) -> "WarpedState":
        """State ``S + delta * rates(S)`` along the flow's tangent direction."""
        def a_new(r):
            return np.sqrt(self.a(r) ** 2 + delta * rates_fn(r)["a2"])

        def b_new(r):
            return np.sqrt(self.b(r) ** 2 + delta * rates_fn(r)["b2"])

        def w_new(r):
            return self.w(r) + delta * rates_fn(r)["w"]

        def f_new(r):
            return self.f(r) + delta * rates_fn(r)["f"]

        base = self.a if not isinstance(self.a, ConstantProfile) else self.b
        tau = None if self.tau is None else self.tau - delta
        return replace(self, a=_resample(base, a_new), b=_resample(base, b_new),
                       w=_resample(base, w_new), f=_resample(base, f_new), tau=tau)

    # ---- soliton quantities ---------------------------------------------------

    def soliton_tensor(self, r, tau: float | None = None) -> dict:
        """Ric + Hess f - alpha dw dw (- g/2tau) and the w-equation residual."""
        g = self.geometry(r)
        ws = self.scalar_ops(self.w, r)
        fs = self.scalar_ops(self.f, r)
        shift = 0.0 if tau is None else 1.0 / (2 * tau)
        Tss = g["ric_ss"] + fs["ss"] - self.alpha * ws["s"] ** 2 - shift
        Tff = g["ric_ff"] + fs["ff"] - shift
        return {"ss": Tss, "ff": Tff, "norm_sq": Tss ** 2 + self.m * Tff ** 2,
                "w_eq": ws["lap"] - fs["s"] * ws["s"]}

    # ---- chart representation (torus fiber) ---------------------------------

    def chart(self) -> Chart:
        lo, hi = self.domain
        ranges = [(lo, hi)] + [(0.0, self.fiber_period)] * self.m
        return Chart(dim=self.n, coord_ranges=ranges,
                     periodic=[self.periodic] + [True] * self.m,
                     boundary_axis=None if self.periodic else 0)

    def metric_field(self):
        """g(x, t) on the chart (r, y_1, ..., y_m); only for a flat fiber."""
        if self.k != 0:
            raise ValueError("chart metric only available for a flat torus fiber")

        def g(x, t=0.0):
            r = x[0]
            return np.diag([float(self.a(r)) ** 2] + [float(self.b(r)) ** 2] * self.m)

        return g

    def scalar_field(self, prof):
        return lambda x, t=0.0: float(prof(x[0]))


def flat_ball(n: int, radius: float, deg: int = 48) -> WarpedState:
    """Flat ball in polar form: a = 1, b = r, round fiber."""
    a = ChebProfile.from_function(lambda r: np.ones_like(r), 0.0, radius, deg)
    b = ChebProfile.from_function(lambda r: r, 0.0, radius, deg)
    zero = ChebProfile.from_function(lambda r: np.zeros_like(r), 0.0, radius, deg)
    return WarpedState(a=a, b=b, w=zero, f=zero, n=n, k=1, domain=(0.0, radius))
