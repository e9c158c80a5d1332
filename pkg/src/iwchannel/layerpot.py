"""Fundamental solution, single-layer potential, and boundary kernels.

The free stationary operator has the explicit fundamental solution
E(x) = kappa log[l+(x) l-(x)] with kappa = i sgn(Im omega)/(4 pi omega
sqrt(1 - omega^2)) and principal log.  Cutting a solution by a compactly
supported chi_b and convolving with E yields the reconstruction identity

    1_Omega chi_b u = E * (1_Omega [P, chi_b] u) + E * f - S(chi_b v)

with v the scaled Neumann data, and its differentiated boundary trace

    r + g = dC (chi_b v),

whose Schwartz kernel splits into four cases by boundary component.  Both
identities hold for any admissible cutoff and serve as solver-independent
consistency checks.

Boundary components are parameterized by theta = x1: "up" is the top
{x2 = 0}, "down" the bottom {x2 = G(theta) - pi}.
"""

from __future__ import annotations

import numpy as np

from .dynamics import BoundaryPoint, gamma
from .geometry import DEPTH, ChannelSpec, ell

__all__ = [
    "kappa_omega",
    "eval_E",
    "BranchCutError",
    "ChiB",
    "boundary_point_coords",
    "dtheta_ell",
    "F_quotient",
    "psi_omega",
    "z_invol",
    "dC_kernel",
    "dC_kernel_defining",
    "integrate_linear",
    "apply_dC",
    "single_layer",
    "convolve_E",
    "commutator_field",
    "g_omega",
    "neumann_interpolant",
    "boundary_equation_residual",
    "reconstruction_residual",
    "kernel_spectral_mass",
]


class BranchCutError(ValueError):
    pass


def kappa_omega(omega) -> complex:
    s = np.sign(np.imag(omega))
    if s == 0:
        raise ValueError("kappa is defined for Im omega != 0")
    return 1j * s / (4.0 * np.pi * omega * np.sqrt(1.0 - omega ** 2))


def eval_E(x1, x2, omega):
    """Fundamental solution kappa log[l+ l-], principal log."""
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    prod = ell(x1, x2, omega, +1) * ell(x1, x2, omega, -1)
    bad = (np.imag(prod) == 0.0) & (np.real(prod) <= 0.0)
    if np.any(bad):
        idx = np.argwhere(np.atleast_1d(bad))[0]
        raise BranchCutError(f"log branch cut hit at sample index {idx}")
    return kappa_omega(omega) * np.log(prod)


class ChiB:
    """Even C^2 cutoff: 1 on |x| <= 2 L, 0 beyond 2 L + 1, quintic ramp."""

    def __init__(self, L: float):
        self.L = float(L)
        self.lo = 2.0 * self.L
        self.hi = 2.0 * self.L + 1.0

    def _t(self, x):
        return np.clip(np.abs(x) - self.lo, 0.0, 1.0)

    def value(self, x):
        t = self._t(x)
        return 1.0 - t ** 3 * (10.0 - 15.0 * t + 6.0 * t ** 2)

    def d1(self, x):
        x = np.asarray(x, dtype=float)
        t = self._t(x)
        ramp = (np.abs(x) > self.lo) & (np.abs(x) < self.hi)
        return np.where(ramp, -np.sign(x) * 30.0 * t ** 2 * (1.0 - t) ** 2, 0.0)

    def d2(self, x):
        x = np.asarray(x, dtype=float)
        t = self._t(x)
        ramp = (np.abs(x) > self.lo) & (np.abs(x) < self.hi)
        return np.where(ramp, -60.0 * t * (1.0 - t) * (1.0 - 2.0 * t), 0.0)


def boundary_point_coords(chan: ChannelSpec, theta, side: str):
    theta = np.asarray(theta, dtype=float)
    if side == "up":
        return theta, np.zeros_like(theta)
    if side == "down":
        return theta, chan.G(theta) - DEPTH
    raise ValueError("side must be 'up' or 'down'")


def dtheta_ell(chan: ChannelSpec, theta, side: str, omega, sign: int):
    """d/dtheta of l^sign along a boundary component."""
    theta = np.asarray(theta, dtype=float)
    base = sign / omega * np.ones_like(theta)
    if side == "down":
        base = base + chan.dG(theta) / np.sqrt(1.0 - omega ** 2)
    return base


def F_quotient(chan: ChannelSpec, theta, thetap):
    """Difference quotient F with G(t) - G(t') = (t - t') F(t, t')."""
    theta = np.asarray(theta, dtype=float)
    thetap = np.asarray(thetap, dtype=float)
    d = theta - thetap
    small = np.abs(d) < 1e-9
    safe = np.where(small, 1.0, d)
    F = (chan.G(theta) - chan.G(thetap)) / safe
    return np.where(small, chan.dG(0.5 * (theta + thetap)), F)


def psi_omega(chan: ChannelSpec, omega, sign: int, theta, thetap):
    """(sign/omega + F/sqrt(1-omega^2)) / (sign/omega + G'/sqrt(1-omega^2))."""
    s = np.sqrt(1.0 - omega ** 2)
    num = sign / omega + F_quotient(chan, theta, thetap) / s
    den = sign / omega + chan.dG(np.asarray(theta, dtype=float)) / s
    return num / den


def z_invol(chan: ChannelSpec, omega, sign: int, side: str, theta):
    """Involution error z with l(x) - l(gamma x) = (+-) i eps z on each side.

    The sign convention follows the component: the difference equals
    +i eps z on the top and -i eps z on the bottom, eps = Im omega.
    """
    eps = np.imag(omega)
    if eps == 0:
        raise ValueError("z is defined for Im omega != 0")
    lam = float(np.real(omega))
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    out = np.empty(theta.shape, dtype=complex)
    for i, th in enumerate(theta):
        p = BoundaryPoint(side, float(th))
        q = gamma(p, chan, lam, sign)
        x1, x2 = boundary_point_coords(chan, p.theta, p.side)
        y1, y2 = boundary_point_coords(chan, q.theta, q.side)
        diff = ell(x1, x2, omega, sign) - ell(y1, y2, omega, sign)
        out[i] = diff / (1j * eps) if side == "up" else diff / (-1j * eps)
    return out if out.size > 1 else out[0]


def _gamma_theta(chan, lam, sign, side, theta):
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    out = np.array([gamma(BoundaryPoint(side, float(t)), chan, lam, sign).theta
                    for t in theta])
    return out


def dC_kernel(case: int, theta, thetap, chan: ChannelSpec, omega,
              sign: int, i0: float = 0.0):
    """Closed-form kernel K^sign(theta, theta') for one of the four cases.

    Case 1: both on top; Case 2: target top, source bottom; Case 3: both
    on bottom; Case 4: target bottom, source top.  ``i0`` adds the case's
    i0-prescription as a finite imaginary offset (used at real omega or on
    the diagonal); at genuinely complex omega the epsilon terms already
    regularize cases 2 and 4.
    """
    kap = kappa_omega(omega)
    eps = np.imag(omega)
    lam = float(np.real(omega))
    theta = np.asarray(theta, dtype=float)
    thetap = np.asarray(thetap, dtype=float)
    if case == 1:
        return kap / (theta - thetap - sign * 1j * i0)
    if case == 2:
        gth = _gamma_theta(chan, lam, sign, "down", thetap)
        z = z_invol(chan, omega, sign, "down", thetap)
        den = theta - gth + sign * (1j * eps * omega * z + 1j * i0)
        return kap / den
    if case == 3:
        psi = psi_omega(chan, omega, sign, theta, thetap)
        return kap / (psi * (theta - thetap) + sign * 1j * i0)
    if case == 4:
        gth = _gamma_theta(chan, lam, sign, "up", thetap)
        z = z_invol(chan, omega, sign, "up", thetap)
        s = np.sqrt(1.0 - omega ** 2)
        ntheta = sign / omega + chan.dG(theta) / s
        zt = sign * z / ntheta
        psi = psi_omega(chan, omega, sign, theta, gth)
        den = psi * (theta - gth) - sign * (1j * eps * zt + 1j * i0)
        return kap / den
    raise ValueError("case must be 1..4")


def dC_kernel_defining(theta, side, thetap, sidep, chan: ChannelSpec,
                       omega, sign: int, delta: float = 0.0):
    """Defining limit form: kappa d_theta l / l(x(th) - x(th') + delta v).

    ``delta`` shifts the target along the inward vertical v: (0, -1) on
    the top, (0, +1) on the bottom.  All four cases collapse to this one
    expression; the closed forms are its delta -> 0 limits.
    """
    x1, x2 = boundary_point_coords(chan, theta, side)
    y1, y2 = boundary_point_coords(chan, thetap, sidep)
    vshift = -delta if side == "up" else delta
    num = dtheta_ell(chan, theta, side, omega, sign)
    den = ell(x1 - y1, x2 + vshift - y2, omega, sign)
    return kappa_omega(omega) * num / den


def integrate_linear(t, num, den):
    """Integral of num(t)/den(t) with both piecewise linear on the nodes.

    Exact per-interval antiderivative with principal log; robust for
    near-pole denominators as long as the linear chord stays off zero.
    """
    t = np.asarray(t, dtype=float)
    num = np.asarray(num, dtype=complex)
    den = np.asarray(den, dtype=complex)
    h = np.diff(t)
    n0, n1 = num[:-1], num[1:]
    d0, d1 = den[:-1], den[1:]
    qd = (d1 - d0) / h
    qn = (n1 - n0) / h
    flat = np.abs(d1 - d0) < 1e-13 * np.maximum(np.abs(d0), np.abs(d1))
    qd_safe = np.where(flat, 1.0, qd)
    seg = qn / qd_safe * h + (n0 - qn * d0 / qd_safe) / qd_safe * np.log(d1 / d0)
    seg_flat = 0.5 * (n0 + n1) * h / np.where(np.abs(d0) > 0, d0, 1.0)
    return np.sum(np.where(flat, seg_flat, seg))


def apply_dC(chan: ChannelSpec, omega, src_theta, v_up, v_dn,
             tgt_up, tgt_dn, delta=None):
    """Apply the boundary operator dC to the one-form (v_up, v_dn) d theta.

    Sources are sampled on the common grid ``src_theta`` for both boundary
    components; targets are given per component.  The kernel is evaluated
    by the defining formula with an inward offset ``delta`` (default: one
    source spacing), and the theta' integral uses the exact linear-chord
    quadrature, which realizes the principal value plus the i0 jump as
    delta -> 0.  Returns (values at tgt_up, values at tgt_dn).
    """
    src = np.asarray(src_theta, dtype=float)
    if delta is None:
        delta = src[1] - src[0]
    out = []
    for side, tgts in (("up", tgt_up), ("down", tgt_dn)):
        vals = np.zeros(len(tgts), dtype=complex)
        for i, th in enumerate(np.asarray(tgts, dtype=float)):
            acc = 0.0 + 0.0j
            for sign in (+1, -1):
                num = dtheta_ell(chan, th, side, omega, sign)
                for sidep, v in (("up", v_up), ("down", v_dn)):
                    x1, x2 = boundary_point_coords(chan, th, side)
                    y1, y2 = boundary_point_coords(chan, src, sidep)
                    vshift = -delta if side == "up" else delta
                    den = ell(x1 - y1, x2 + vshift - y2, omega, sign)
                    acc += kappa_omega(omega) * num * integrate_linear(
                        src, np.asarray(v, dtype=complex), den)
            vals[i] = acc
        out.append(vals)
    return out[0], out[1]


def single_layer(chan: ChannelSpec, omega, src_theta, v_up, v_dn,
                 targets_x1, targets_x2):
    """S(v) at interior targets: trapezoid quadrature of E against v d theta."""
    src = np.asarray(src_theta, dtype=float)
    w = np.gradient(src)
    tx1 = np.atleast_1d(np.asarray(targets_x1, dtype=float))
    tx2 = np.atleast_1d(np.asarray(targets_x2, dtype=float))
    vals = np.zeros(tx1.shape, dtype=complex)
    for sidep, v in (("up", v_up), ("down", v_dn)):
        y1, y2 = boundary_point_coords(chan, src, sidep)
        for i in range(tx1.size):
            E = eval_E(tx1.flat[i] - y1, tx2.flat[i] - y2, omega)
            vals.flat[i] += np.sum(E * np.asarray(v) * w)
    return vals


def convolve_E(omega, q_x1, q_x2, q_w, q_vals, targets_x1, targets_x2):
    """(E * w)(targets) for a source described by quadrature nodes/weights."""
    tx1 = np.atleast_1d(np.asarray(targets_x1, dtype=float))
    tx2 = np.atleast_1d(np.asarray(targets_x2, dtype=float))
    out = np.zeros(tx1.shape, dtype=complex)
    for i in range(tx1.size):
        E = eval_E(tx1.flat[i] - q_x1, tx2.flat[i] - q_x2, omega)
        out.flat[i] = np.sum(E * q_w * q_vals)
    return out


def commutator_field(sol, chi: ChiB):
    """[P(omega), chi_b] u = -omega^2 (chi'' u + 2 chi' du/dx1) on the grid."""
    from .solver import physical_gradient
    x1 = sol.L * sol.grid.g1.nodes
    ux1, _ = physical_gradient(sol.grid, sol.chan, sol.L, sol.values)
    c1 = chi.d1(x1)[:, None]
    c2 = chi.d2(x1)[:, None]
    return -sol.omega ** 2 * (c2 * sol.values + 2.0 * c1 * ux1)


def commutator_at(sol, chi: ChiB, x1, x2):
    """[P(omega), chi_b] u at arbitrary interior points.

    The cutoff derivatives are only piecewise smooth, so interpolating the
    product from the collocation grid loses accuracy; instead the smooth
    fields u and du/dx1 are resampled and the exact chi derivatives are
    applied pointwise.
    """
    from .solver import physical_gradient
    ux1_grid, _ = physical_gradient(sol.grid, sol.chan, sol.L, sol.values)
    u = sol.resample(x1, x2)
    ux1 = sol.resample(x1, x2, field=ux1_grid)
    return -sol.omega ** 2 * (chi.d2(x1) * u + 2.0 * chi.d1(x1) * ux1)


def _interior_quadrature(chan: ChannelSpec, x1_lo, x1_hi, n1, n2):
    """Tensor trapezoid rule over the channel between two abscissae."""
    x1 = np.linspace(x1_lo, x1_hi, n1)
    w1 = np.gradient(x1)
    s = (np.arange(n2) + 0.5) / n2  # midpoint fractions of depth
    depth = DEPTH - chan.G(x1)
    X1 = np.repeat(x1, s.size)
    X2 = (-(1.0 - s)[None, :] * depth[:, None]).ravel()
    W = (w1[:, None] * (depth / n2)[:, None]
         * np.ones_like(s)[None, :]).ravel()
    return X1, X2, W


def g_omega(chan: ChannelSpec, omega, f_func, thetas, support_box,
            n_quad=(160, 120)):
    """One-form g = d((E * f)|_boundary) on both components.

    ``f_func(x1, x2)`` is the forcing, ``support_box`` = (x1_lo, x1_hi)
    bounds its effective support.  Values of E * f are computed on the
    ``thetas`` grid of each component and differentiated in theta by
    centered differences.  Returns (g_up, g_dn, trace_up, trace_dn).
    """
    X1, X2, W = _interior_quadrature(chan, support_box[0], support_box[1],
                                     n_quad[0], n_quad[1])
    F = f_func(X1, X2)
    traces = []
    for side in ("up", "down"):
        b1, b2 = boundary_point_coords(chan, np.asarray(thetas, float), side)
        vals = np.array([np.sum(eval_E(t1 - X1, t2 - X2, omega) * W * F)
                         for t1, t2 in zip(b1, b2)])
        traces.append(vals)
    g_up = np.gradient(traces[0], thetas)
    g_dn = np.gradient(traces[1], thetas)
    return g_up, g_dn, traces[0], traces[1]


def neumann_interpolant(sol):
    """Callables (up, down): theta -> scaled Neumann data, from the solve."""
    from .chebyshev import barycentric_matrix
    from .solver import neumann_trace
    nodes = sol.grid.g1.nodes
    out = {}
    for side in ("up", "down"):
        _, vals = neumann_trace(sol, side)
        def interp(theta, vals=vals):
            P = barycentric_matrix(nodes, np.asarray(theta, float) / sol.L)
            return P @ vals
        out[side] = interp
    return out["up"], out["down"]


def boundary_equation_residual(sol, cutoff_L: float, f_func, support_box,
                               n_src: int = 800, n_tgt: int = 120,
                               n_quad=(160, 120)):
    """Relative L2 residual of r + g = dC(chi_b v) over |theta| <= cutoff_L.

    ``cutoff_L`` is the cutoff scale: chi_b = 1 on |x1| <= 2 cutoff_L and
    supported in |x1| <= 2 cutoff_L + 1, which must lie inside the solve's
    trusted region.  Returns a report dict.
    """
    chan, omega = sol.chan, sol.omega
    chi = ChiB(cutoff_L)
    span = chi.hi + 0.5
    src = np.linspace(-span, span, n_src)
    nu_up, nu_dn = neumann_interpolant(sol)
    # Same boundary orientation as in the reconstruction identity: the top
    # component's density enters with a minus sign.
    v_up = -chi.value(src) * nu_up(src)
    v_dn = chi.value(src) * nu_dn(src)
    tgt = np.linspace(-cutoff_L, cutoff_L, n_tgt)
    dc_up, dc_dn = apply_dC(chan, omega, src, v_up, v_dn, tgt, tgt)
    # g term over the forcing support
    g_up, g_dn, _, _ = g_omega(chan, omega, f_func, tgt, support_box, n_quad)
    # r term: commutator supported on the cutoff ramps
    tr = {"up": np.zeros(n_tgt, dtype=complex),
          "down": np.zeros(n_tgt, dtype=complex)}
    for lo, hi in ((-chi.hi, -chi.lo), (chi.lo, chi.hi)):
        X1, X2, W = _interior_quadrature(chan, lo, hi, max(n_quad[0] // 2, 40),
                                         n_quad[1])
        C = commutator_at(sol, chi, X1, X2)
        for side in ("up", "down"):
            b1, b2 = boundary_point_coords(chan, tgt, side)
            tr[side] += np.array([
                np.sum(eval_E(t1 - X1, t2 - X2, omega) * W * C)
                for t1, t2 in zip(b1, b2)])
    r_up = np.gradient(tr["up"], tgt)
    r_dn = np.gradient(tr["down"], tgt)
    num = (np.sum(np.abs(r_up + g_up - dc_up) ** 2)
           + np.sum(np.abs(r_dn + g_dn - dc_dn) ** 2))
    den = np.sum(np.abs(dc_up) ** 2) + np.sum(np.abs(dc_dn) ** 2)
    return {
        "residual": float(np.sqrt(num / den)),
        "theta": tgt,
        "lhs_up": r_up + g_up, "lhs_dn": r_dn + g_dn,
        "rhs_up": dc_up, "rhs_dn": dc_dn,
    }


def reconstruction_residual(sol, cutoff_L: float, f_func, support_box,
                            n_probe: int = 50, seed: int = 0,
                            n_src: int = 800, n_quad=(160, 120)):
    """Check chi_b u = E*[P,chi_b]u + E*f - S(chi_b v) at random probes.

    Probes are seeded uniform points in the plateau of chi_b, away from
    the boundary; the report gives per-probe errors relative to the max
    |u| over the probes.
    """
    chan, omega = sol.chan, sol.omega
    chi = ChiB(cutoff_L)
    rng = np.random.default_rng(seed)
    px1 = rng.uniform(-chi.lo + 0.3, chi.lo - 0.3, n_probe)
    frac = rng.uniform(0.12, 0.88, n_probe)
    px2 = -(1.0 - frac) * (DEPTH - chan.G(px1))
    u_probe = sol.resample(px1, px2)
    # E * f
    X1, X2, W = _interior_quadrature(chan, support_box[0], support_box[1],
                                     n_quad[0], n_quad[1])
    Ef = convolve_E(omega, X1, X2, W, f_func(X1, X2), px1, px2)
    # E * commutator
    Ec = np.zeros(n_probe, dtype=complex)
    for lo, hi in ((-chi.hi, -chi.lo), (chi.lo, chi.hi)):
        Y1, Y2, Wc = _interior_quadrature(chan, lo, hi,
                                          max(n_quad[0] // 2, 40), n_quad[1])
        C = commutator_at(sol, chi, Y1, Y2)
        Ec += convolve_E(omega, Y1, Y2, Wc, C, px1, px2)
    # single layer of chi_b v
    span = chi.hi + 0.5
    src = np.linspace(-span, span, n_src)
    nu_up, nu_dn = neumann_interpolant(sol)
    # Parametrizing both components by increasing theta runs the top one
    # against the positive orientation of the boundary, so its density
    # enters the layer integral with a minus sign.
    Sv = single_layer(chan, omega, src, -chi.value(src) * nu_up(src),
                      chi.value(src) * nu_dn(src), px1, px2)
    rhs = Ec + Ef - Sv
    lhs = chi.value(px1) * u_probe
    scale = np.max(np.abs(u_probe))
    errs = np.abs(lhs - rhs) / scale
    return {
        "max_rel_error": float(np.max(errs)),
        "mean_rel_error": float(np.mean(errs)),
        "errors": errs,
        "probes": (px1, px2),
    }


def kernel_spectral_mass(chan: ChannelSpec, omega, case: int, sign: int,
                         thetap: float = 0.3, span: float = 40.0,
                         n: int = 4096):
    """Single-sided spectral mass of a case-2/4 kernel row.

    Evaluates K^sign(theta, theta') over a uniform theta grid centered at
    the kernel peak gamma^sign(theta') and returns (fraction, side) where
    fraction is the dominant half-line's share of the FFT power (zero
    frequency excluded) and side is +1 or -1 for positive or negative
    frequencies under the e^{+i theta xi} convention.
    """
    if case not in (2, 4):
        raise ValueError("spectral-mass check applies to cases 2 and 4")
    lam = float(np.real(omega))
    src_side = "down" if case == 2 else "up"
    g = _gamma_theta(chan, lam, sign, src_side, thetap)[0]
    theta = g + np.linspace(-span / 2, span / 2, n, endpoint=False)
    K = dC_kernel(case, theta, np.full(n, thetap), chan, omega, sign)
    spec = np.fft.fft(K)
    xi = np.fft.fftfreq(n)
    # a sampled tone e^{+i theta xi0} with xi0 > 0 peaks at positive
    # fftfreq, so the half-lines can be read off directly
    p_pos = np.sum(np.abs(spec[xi > 0]) ** 2)
    p_neg = np.sum(np.abs(spec[xi < 0]) ** 2)
    total = p_pos + p_neg
    if p_pos >= p_neg:
        return float(p_pos / total), +1
    return float(p_neg / total), -1
