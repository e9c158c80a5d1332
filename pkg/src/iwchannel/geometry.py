"""Channel geometry: characteristic coordinates, subcriticality, coordinate maps.

The channel is Omega = {G(x1) - pi < x2 < 0} with constant depth pi in the
ends.  The stationary operator P(omega) = (1-omega^2) d2_{x2} - omega^2 d2_{x1}
has characteristic coordinates ell^{+-} whose level sets carry the wave beams
of slope +-c_lambda = +-sqrt(1-lambda^2)/lambda.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .topography import Topography, flat

__all__ = [
    "ChannelSpec",
    "SpectralParameter",
    "ReferenceMap",
    "c_slope",
    "c_omega",
    "ell",
    "char_deriv",
    "subcriticality_margin",
]

DEPTH = np.pi


@dataclass(frozen=True)
class ChannelSpec:
    """Channel topography plus its effective-support metadata.

    ``support_radius`` is the half-width beyond which |G| and |G'| fall
    below ``eta_supp``; the channel is exactly flat only in the limit, so
    outside that radius we treat it as flat up to the declared threshold.
    """

    topography: Topography = field(default_factory=flat)
    eta_supp: float = 1e-12
    support_radius: float = None  # type: ignore[assignment]
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.support_radius is None:
            object.__setattr__(
                self, "support_radius", self.topography.support_radius(self.eta_supp)
            )
        xs = np.linspace(-self.support_radius - 1, self.support_radius + 1, 2001)
        if not (np.real(self.topography.value(xs)) < DEPTH).all():
            raise ValueError("topography must satisfy G < pi")

    def G(self, x1):
        return self.topography.value(x1)

    def dG(self, x1):
        return self.topography.deriv(x1)

    def d2G(self, x1):
        return self.topography.deriv2(x1)

    def depth_at(self, x1):
        """Local channel depth pi - G(x1)."""
        return DEPTH - self.G(x1)

    def bottom(self, x1):
        """Bottom elevation x2 = G(x1) - pi."""
        return self.G(x1) - DEPTH

    def max_slope(self) -> float:
        """max |G'| over the support, grid scan plus local refinement."""
        if "max_slope" in self._cache:
            return self._cache["max_slope"]
        r = max(self.support_radius, 1e-6)
        xs = np.linspace(-r, r, 10001)
        g = np.abs(self.dG(xs))
        j = int(np.argmax(g))
        lo, hi = xs[max(j - 1, 0)], xs[min(j + 1, len(xs) - 1)]
        res = minimize_scalar(
            lambda t: -abs(self.dG(t)), bounds=(lo, hi), method="bounded",
            options={"xatol": 1e-12},
        )
        out = max(float(g[j]), float(-res.fun))
        self._cache["max_slope"] = out
        return out

    def min_G(self) -> float:
        """min(0, min G) over the support; the ends contribute G = 0."""
        if "min_G" not in self._cache:
            r = max(self.support_radius, 1e-6)
            xs = np.linspace(-r - 1, r + 1, 4097)
            self._cache["min_G"] = min(0.0, float(np.min(np.real(self.G(xs)))))
        return self._cache["min_G"]


@dataclass(frozen=True)
class SpectralParameter:
    """omega = lambda + i*epsilon with 0 < lambda < 1."""

    omega: complex
    eps_max: float = 1.0

    def __post_init__(self):
        lam, eps = self.lam, self.eps
        if not 0.0 < lam < 1.0:
            raise ValueError(f"Re omega = {lam} outside (0, 1)")
        if abs(eps) > self.eps_max:
            raise ValueError(f"|Im omega| = {abs(eps)} exceeds eps_max")

    @property
    def lam(self) -> float:
        return float(np.real(self.omega))

    @property
    def eps(self) -> float:
        return float(np.imag(self.omega))

    @property
    def c(self) -> complex:
        return c_omega(self.omega)


def c_slope(lam: float) -> float:
    """Characteristic slope sqrt(1 - lam^2)/lam for lam in (0, 1)."""
    if not 0.0 < lam < 1.0:
        raise ValueError(f"lambda = {lam} outside (0, 1)")
    return float(np.sqrt(1.0 - lam ** 2) / lam)


def c_omega(omega: complex) -> complex:
    """Complex slope sqrt(1 - omega^2)/omega, principal branch."""
    _check_regular(omega)
    return np.sqrt(1.0 + 0j - omega ** 2) / omega


def _check_regular(omega):
    if omega == 0 or omega == 1 or omega == -1:
        raise ValueError(f"omega = {omega} is a singular spectral parameter")


def ell(x1, x2, omega: complex, sign: int):
    """Characteristic coordinate +-x1/omega + x2/sqrt(1 - omega^2)."""
    _check_regular(omega)
    if sign not in (+1, -1):
        raise ValueError("sign must be +1 or -1")
    return sign * np.asarray(x1) / omega + np.asarray(x2) / np.sqrt(1.0 + 0j - omega ** 2)


def char_deriv(u_x1, u_x2, omega: complex, sign: int):
    """Dual derivative L^{+-} u = (+-omega u_x1 + sqrt(1-omega^2) u_x2)/2."""
    _check_regular(omega)
    return 0.5 * (sign * omega * np.asarray(u_x1)
                  + np.sqrt(1.0 + 0j - omega ** 2) * np.asarray(u_x2))


def subcriticality_margin(chan: ChannelSpec, lam: float) -> float:
    """c_lambda - max|G'|; positive iff the channel is lambda-subcritical."""
    return c_slope(lam) - chan.max_slope()


@dataclass(frozen=True)
class ReferenceMap:
    """Map between the truncated physical channel and the reference square.

    Forward: (x1, x2) -> (y1, y2) = (x1/L, 1 + 2 x2/(pi - G(x1))); the top
    boundary goes to y2 = 1 and the bottom to y2 = -1.
    """

    chan: ChannelSpec
    half_length: float

    def forward(self, x1, x2):
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        depth = np.real(self.chan.depth_at(x1))
        if np.any(np.abs(x1) > self.half_length * (1 + 1e-12)):
            raise ValueError("x1 outside the truncated channel")
        if np.any(x2 > 1e-12) or np.any(x2 < -depth - 1e-12):
            raise ValueError("x2 outside the channel")
        return x1 / self.half_length, 1.0 + 2.0 * x2 / depth

    def inverse(self, y1, y2):
        y1 = np.asarray(y1, dtype=float)
        y2 = np.asarray(y2, dtype=float)
        if np.any(np.abs(y1) > 1 + 1e-12) or np.any(np.abs(y2) > 1 + 1e-12):
            raise ValueError("reference point outside [-1, 1]^2")
        x1 = self.half_length * y1
        depth = np.real(self.chan.depth_at(x1))
        return x1, 0.5 * (y2 - 1.0) * depth
