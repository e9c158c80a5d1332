"""Closed-form bottom topography descriptors.

The channel bottom is x2 = G(x1) - pi with 0 <= G < pi.  Descriptors are
named builtins with parameters so that G, G', G'' are all analytic and,
crucially, G extends holomorphically to complex argument (needed when the
horizontal coordinate is deformed into the complex plane).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["Topography", "gaussian", "bump_poly", "flat", "from_dict"]


@dataclass(frozen=True)
class Topography:
    """A closed-form height profile with analytic derivatives.

    ``value``/``deriv``/``deriv2`` accept complex argument; the builtin
    kinds are entire (gaussian, flat) or polynomial-windowed (bump_poly).
    """

    kind: str
    params: dict = field(default_factory=dict)

    def value(self, x1):
        return _EVAL[self.kind][0](np.asarray(x1), self.params)

    def deriv(self, x1):
        return _EVAL[self.kind][1](np.asarray(x1), self.params)

    def deriv2(self, x1):
        return _EVAL[self.kind][2](np.asarray(x1), self.params)

    def support_radius(self, eta: float = 1e-12) -> float:
        """Half-width beyond which |G| and |G'| stay below ``eta``."""
        if self.kind == "flat":
            return 0.0
        r = 1.0
        while r < 1e4:
            xs = np.linspace(r, r + 1.0, 64)
            if (np.abs(self.value(xs)) < eta).all() and (
                np.abs(self.deriv(xs)) < eta
            ).all():
                # bisect down inside [r-1, r] for a tight radius
                lo, hi = max(r - 1.0, 0.0), r
                for _ in range(60):
                    mid = 0.5 * (lo + hi)
                    if abs(self.value(mid)) < eta and abs(self.deriv(mid)) < eta:
                        hi = mid
                    else:
                        lo = mid
                return hi
            r *= 1.5
        raise ValueError(f"no effective support radius found for {self.kind}")

    def to_dict(self) -> dict:
        return {"kind": self.kind, **self.params}


def gaussian(amp: float = 1.0, width: float = 10.0) -> Topography:
    """G(x1) = amp * exp(-x1^2 / width).  Figure-style bump: amp=1, width=10."""
    return Topography("gaussian", {"amp": float(amp), "width": float(width)})


def bump_poly(amp: float = 1.0, half_width: float = 4.0) -> Topography:
    """C^2 polynomial bump amp*(1 - (x1/half_width)^2)^3 on |x1| < half_width."""
    return Topography("bump_poly", {"amp": float(amp), "half_width": float(half_width)})


def flat() -> Topography:
    return Topography("flat", {})


def from_dict(d: dict) -> Topography:
    d = dict(d)
    kind = d.pop("kind")
    if kind not in _EVAL:
        raise ValueError(f"unknown topography kind {kind!r}")
    return Topography(kind, {k: float(v) for k, v in d.items()})


def _gauss_val(x, p):
    return p["amp"] * np.exp(-(x ** 2) / p["width"])


def _gauss_d1(x, p):
    return p["amp"] * (-2.0 * x / p["width"]) * np.exp(-(x ** 2) / p["width"])


def _gauss_d2(x, p):
    w = p["width"]
    return p["amp"] * (4.0 * x ** 2 / w ** 2 - 2.0 / w) * np.exp(-(x ** 2) / w)


def _bump_s(x, p):
    return x / p["half_width"]


def _bump_val(x, p):
    s = _bump_s(x, p)
    out = p["amp"] * (1.0 - s ** 2) ** 3
    return np.where(np.abs(np.real(s)) < 1.0, out, 0.0 * out)


def _bump_d1(x, p):
    s = _bump_s(x, p)
    out = p["amp"] * (-6.0 * s / p["half_width"]) * (1.0 - s ** 2) ** 2
    return np.where(np.abs(np.real(s)) < 1.0, out, 0.0 * out)


def _bump_d2(x, p):
    s = _bump_s(x, p)
    h = p["half_width"]
    out = p["amp"] * (6.0 / h ** 2) * (1.0 - s ** 2) * (5.0 * s ** 2 - 1.0)
    return np.where(np.abs(np.real(s)) < 1.0, out, 0.0 * out)


def _flat_val(x, p):
    return np.zeros_like(np.asarray(x, dtype=np.result_type(x, float)))


_EVAL = {
    "gaussian": (_gauss_val, _gauss_d1, _gauss_d2),
    "bump_poly": (_bump_val, _bump_d1, _bump_d2),
    "flat": (_flat_val, _flat_val, _flat_val),
}
