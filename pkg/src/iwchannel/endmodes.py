"""Flat-end Fourier-sine analysis and incoming/outgoing classification.

In a flat stretch of the channel a solution of the stationary problem is a
superposition of the separated modes

    sin(k x2) * exp(+- i c_omega k (x1 - x_ref)),     k = 1, 2, ...

with c_omega = sqrt(1 - omega^2) / omega.  Fitting both phase families per
mode on a window inside an end classifies the solution: an outgoing field
carries only e^{+} content in the right end and e^{-} content in the left
end, an incoming field the opposite pairing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chebyshev import cheb_nodes, clenshaw_curtis_weights
from .geometry import DEPTH, c_omega
from .solver import StationarySolution, physical_gradient

__all__ = [
    "EndModeFit",
    "IOReport",
    "fit_end_modes",
    "freq_project",
    "classify_io",
    "weighted_norm",
]


@dataclass(frozen=True)
class EndModeFit:
    """Two-exponential fit of each sine mode on an end window."""

    end: str
    omega: complex
    x_ref: float
    alpha_plus: np.ndarray
    alpha_minus: np.ndarray
    fit_residual: float
    mode_cond: np.ndarray

    @property
    def K(self):
        return len(self.alpha_plus)


@dataclass(frozen=True)
class IOReport:
    outgoing_energy: float
    incoming_energy: float
    ratio: float
    verdict: str
    threshold: float
    per_end: dict


def _sine_profiles(sample, x1, n_quad=96):
    """Project u(x1, .) onto sin(k x2) on (-pi, 0) by Chebyshev quadrature.

    ``sample(x1_array, x2_array)`` returns values on the tensor product.
    Returns (profiles[k-1, j], quad nodes) for k = 1..K implied by caller.
    """
    g = cheb_nodes(n_quad)
    x2 = 0.5 * DEPTH * (g.nodes - 1.0)  # map [-1, 1] -> [-pi, 0]
    w = clenshaw_curtis_weights(n_quad) * 0.5 * DEPTH
    U = sample(x1, x2)
    return U, x2, w


def fit_end_modes(sol: StationarySolution, end: str, K: int | None = None,
                  x_window=None, n_cols: int = 48,
                  n_quad: int = 96, flat_eta: float = 1e-5) -> EndModeFit:
    """Fit sine-mode amplitudes on a rectangular window in one flat end.

    The window must lie where the bottom is flat (beyond the topography's
    effective support at tolerance ``flat_eta``) and inside the trusted
    region of the solve.  Each mode's horizontal profile is least-squares
    fitted to alpha^- e^{-i c k (x1 - x_ref)} + alpha^+ e^{+i c k (x1 -
    x_ref)} with x_ref the window edge closer to the channel center.
    """
    if end not in ("left", "right"):
        raise ValueError("end must be 'left' or 'right'")
    if K is None:
        K = max(1, sol.grid.g2.n // 3)
    if 2 * K > sol.grid.g2.n:
        raise ValueError("K exceeds half the vertical resolution")
    mask = sol.trusted_mask()
    y_ok = sol.grid.g1.nodes[mask]
    x_max = sol.L * np.max(np.abs(y_ok))
    r = sol.chan.topography.support_radius(flat_eta)
    if x_window is None:
        lo = r + 0.05 * (x_max - r)
        hi = x_max
        if lo >= hi:
            raise ValueError("no flat window inside the trusted region")
        x_window = (-hi, -lo) if end == "left" else (lo, hi)
    a, b = map(float, x_window)
    if not a < b:
        raise ValueError("empty window")
    if min(abs(a), abs(b)) < r:
        raise ValueError("window overlaps the topography support")
    if max(abs(a), abs(b)) > sol.L:
        raise ValueError("window outside the computational domain")
    x_ref = b if end == "left" else a
    x1 = np.linspace(a, b, n_cols)
    U, x2, w = _sine_profiles(lambda xa, xb: sol.resample_grid(xa, xb),
                              x1, n_quad)
    k = np.arange(1, K + 1)
    S = np.sin(np.outer(x2, k))  # (n_quad+1, K)
    profiles = (U * w[None, :]) @ S * (2.0 / DEPTH)  # (n_cols, K)
    c = c_omega(sol.omega)
    alpha_p = np.empty(K, dtype=complex)
    alpha_m = np.empty(K, dtype=complex)
    conds = np.empty(K)
    for i, kk in enumerate(k):
        # note: c is complex for Im omega != 0, so the minus family is
        # e^{-ick...} with the same c, not the conjugate of the plus family
        ph_p = np.exp(+1j * c * kk * (x1 - x_ref))
        ph_m = np.exp(-1j * c * kk * (x1 - x_ref))
        Adm = np.stack([ph_m, ph_p], axis=1)
        coef, *_ = np.linalg.lstsq(Adm, profiles[:, i], rcond=None)
        alpha_m[i], alpha_p[i] = coef
        conds[i] = np.linalg.cond(Adm)
    # window misfit of the reconstruction, relative L2
    recon = np.zeros_like(U)
    for i, kk in enumerate(k):
        prof = (alpha_m[i] * np.exp(-1j * c * kk * (x1 - x_ref))
                + alpha_p[i] * np.exp(+1j * c * kk * (x1 - x_ref)))
        recon += np.outer(prof, np.sin(kk * x2))
    scale = np.sqrt(np.sum(w[None, :] * np.abs(U) ** 2)) or 1.0
    resid = np.sqrt(np.sum(w[None, :] * np.abs(U - recon) ** 2)) / scale
    return EndModeFit(end=end, omega=complex(sol.omega), x_ref=x_ref,
                      alpha_plus=alpha_p, alpha_minus=alpha_m,
                      fit_residual=float(resid), mode_cond=conds)


def _raised_cosine(xi, c_lam):
    """Smooth cutoff: 0 below c/2, 1 above c, half-cosine ramp between."""
    xi = np.asarray(xi, dtype=float)
    t = np.clip((xi - 0.5 * c_lam) / (0.5 * c_lam), 0.0, 1.0)
    return 0.5 * (1.0 - np.cos(np.pi * t))


def freq_project(samples, sign: int, c_lam: float, dx: float):
    """One-sided smooth frequency projection of uniform samples.

    Multiplies the DFT by h_+(xi) (sign=+1) or h_+(-xi) (sign=-1), where
    h_+ vanishes below c_lam/2, equals 1 above c_lam, and ramps with a
    raised cosine in between.  Sample count must be a power of two.
    """
    v = np.asarray(samples, dtype=complex)
    n = v.shape[-1]
    if n & (n - 1):
        raise ValueError("sample count must be a power of two")
    xi = 2.0 * np.pi * np.fft.fftfreq(n, d=dx)
    h = _raised_cosine(sign * xi, c_lam)
    return np.fft.ifft(np.fft.fft(v) * h)


def classify_io(fit_left: EndModeFit, fit_right: EndModeFit,
                threshold: float = 1e-2) -> IOReport:
    """Energy-ratio verdict from the two end fits.

    Outgoing content is e^{+} in the right end and e^{-} in the left end;
    incoming is the mirrored pairing.  verdict = outgoing when
    incoming/outgoing < threshold, incoming when > 1/threshold, else mixed.
    """
    if fit_left.end != "left" or fit_right.end != "right":
        raise ValueError("pass (left fit, right fit)")
    if fit_left.K != fit_right.K:
        raise ValueError("fits must share K")
    e_out = float(np.sum(np.abs(fit_right.alpha_plus) ** 2)
                  + np.sum(np.abs(fit_left.alpha_minus) ** 2))
    e_in = float(np.sum(np.abs(fit_right.alpha_minus) ** 2)
                 + np.sum(np.abs(fit_left.alpha_plus) ** 2))
    ratio = np.inf if e_out == 0 else e_in / e_out
    if ratio < threshold:
        verdict = "outgoing"
    elif ratio > 1.0 / threshold:
        verdict = "incoming"
    else:
        verdict = "mixed"
    per_end = {
        "left": {"outgoing": float(np.sum(np.abs(fit_left.alpha_minus) ** 2)),
                 "incoming": float(np.sum(np.abs(fit_left.alpha_plus) ** 2))},
        "right": {"outgoing": float(np.sum(np.abs(fit_right.alpha_plus) ** 2)),
                  "incoming": float(np.sum(np.abs(fit_right.alpha_minus) ** 2))},
    }
    return IOReport(outgoing_energy=e_out, incoming_energy=e_in,
                    ratio=float(ratio), verdict=verdict,
                    threshold=threshold, per_end=per_end)


def weighted_norm(sol: StationarySolution, s: int = 0, beta: float = -0.6,
                  field=None, delta: float = 0.0) -> float:
    """Discrete weighted Sobolev norm on the truncated channel.

    Clenshaw-Curtis quadrature of <x1>^{2 beta} (|u|^2 + sum |d^a u|^2,
    |a| <= s) over the part of the channel with |x1| <= (1 - delta) L,
    with spectral derivatives in the mapped coordinates.
    """
    if s not in (0, 1, 2):
        raise ValueError("s must be 0, 1 or 2")
    tg = sol.grid
    v = sol.values if field is None else np.asarray(field).reshape(tg.shape)
    terms = [v]
    if s >= 1:
        ux1, ux2 = physical_gradient(tg, sol.chan, sol.L, v)
        terms += [ux1, ux2]
        if s == 2:
            u11, u12 = physical_gradient(tg, sol.chan, sol.L, ux1)
            _, u22 = physical_gradient(tg, sol.chan, sol.L, ux2)
            terms += [u11, u12, u22]
    x1 = sol.L * tg.g1.nodes
    G = sol.chan.G(x1)
    # area element: dx1 dx2 = (L dy1) * ((pi - G)/2 dy2)
    jac = sol.L * 0.5 * (DEPTH - G)
    w1 = clenshaw_curtis_weights(tg.g1.n)
    w2 = clenshaw_curtis_weights(tg.g2.n)
    cut = np.abs(x1) <= (1.0 - delta) * sol.L
    wgt = (1.0 + x1 ** 2) ** beta * jac * w1 * cut
    W = np.outer(wgt, w2)
    total = sum(np.sum(W * np.abs(t) ** 2) for t in terms)
    return float(np.sqrt(total))
