"""Spectrally accurate one-dimensional profiles.

Warped-product ambients and revolution hypersurfaces are described by
functions of a single variable. Periodic profiles are stored as samples on a
uniform grid and differentiated/evaluated through their trigonometric
interpolant; interval profiles use Chebyshev series.
"""

from __future__ import annotations

import numpy as np
from numpy.polynomial import Chebyshev


class FourierProfile:
    """Periodic function on ``[r0, r0 + period)`` sampled at ``N`` points."""

    def __init__(self, values, period: float = 2 * np.pi, r0: float = 0.0):
        self.values = np.asarray(values, dtype=float)
        self.N = self.values.size
        self.period = float(period)
        self.r0 = float(r0)
        self._coef = np.fft.rfft(self.values) / self.N
        self._k = np.fft.rfftfreq(self.N, d=1.0 / self.N) * 2 * np.pi / self.period

    @classmethod
    def from_function(cls, func, N: int, period: float = 2 * np.pi, r0: float = 0.0):
        return cls(func(cls.grid_for(N, period, r0)), period, r0)

    @staticmethod
    def grid_for(N: int, period: float = 2 * np.pi, r0: float = 0.0) -> np.ndarray:
        return r0 + period * np.arange(N) / N

    @property
    def grid(self) -> np.ndarray:
        return self.grid_for(self.N, self.period, self.r0)

    def grid_derivative(self, k: int = 1) -> np.ndarray:
        """k-th derivative sampled on the grid."""
        if k == 0:
            return self.values.copy()
        spec = np.fft.rfft(self.values) * (1j * self._k) ** k
        if self.N % 2 == 0 and k % 2 == 1:
            spec[-1] = 0.0
        return np.fft.irfft(spec, n=self.N)

    def __call__(self, r, k: int = 0):
        r = np.asarray(r, dtype=float)
        phase = np.multiply.outer(r - self.r0, self._k)
        factor = (1j * self._k) ** k
        c = self._coef * factor
        weights = np.full(self._k.size, 2.0)
        weights[0] = 1.0
        if self.N % 2 == 0:
            weights[-1] = 1.0
            if k % 2 == 1:
                c = c.copy()
                c[-1] = 0.0
        out = np.real(np.exp(1j * phase) @ (c * weights))
        return out

    def with_values(self, values) -> "FourierProfile":
        return FourierProfile(values, self.period, self.r0)


class ChebProfile:
    """Smooth function on ``[lo, hi]`` held as a Chebyshev series."""

    def __init__(self, series: Chebyshev):
        self.series = series
        self._derivs = {0: series}

    @classmethod
    def from_function(cls, func, lo: float, hi: float, deg: int = 64):
        return cls(Chebyshev.interpolate(func, deg, domain=[lo, hi]))

    @property
    def domain(self):
        return tuple(self.series.domain)

    def deriv(self, k: int) -> Chebyshev:
        if k not in self._derivs:
            self._derivs[k] = self.series.deriv(k)
        return self._derivs[k]

    def __call__(self, r, k: int = 0):
        return self.deriv(k)(np.asarray(r, dtype=float))

    def map(self, func, deg: int | None = None) -> "ChebProfile":
        """Re-interpolate ``func(values)`` pointwise."""
        deg = deg or len(self.series.coef) - 1
        lo, hi = self.domain
        return ChebProfile.from_function(lambda r: func(self(r)), lo, hi, deg)


def gauss_legendre(lo: float, hi: float, n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (hi - lo) * x + 0.5 * (hi + lo), 0.5 * (hi - lo) * w


def fejer_weights(N: int) -> np.ndarray:
    """Fejer's first rule on the midpoints theta_j = (j + 1/2) pi / N.

    Integrates ``int_0^pi G(theta) sin(theta) dtheta`` spectrally for ``G``
    smooth in ``cos(theta)``; returned weights already include ``sin``.
    """
    theta = (np.arange(N) + 0.5) * np.pi / N
    k = np.arange(1, N // 2 + 1)
    s = np.cos(2 * np.outer(theta, k)) / (4 * k ** 2 - 1)
    return 2.0 / N * (1.0 - 2.0 * s.sum(axis=1))
