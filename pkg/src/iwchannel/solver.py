"""Complex-scaled stationary solver for the internal-wave channel.

The channel {G(x1) - pi < x2 < 0} is mapped onto the reference square
[-1, 1]^2 by y1 = x1 / L, y2 = 1 + 2 x2 / (pi - G(x1)), and the horizontal
coordinate is deformed along gamma_tau(y1) = y1 (1 + i tau rho(y1)), where
rho vanishes on the middle of the square and equals 1 near y1 = +-1.  The
deformed stationary operator splits as

    P_Gamma(omega) = -omega^2 * A + (1 - omega^2) * B,

with A the deformed horizontal second derivative and B the mapped vertical
second derivative; the deformed Laplacian is A + B.  Radiating solutions
u_{omega} with Im(omega) -> 0- become exponentially decaying after the
deformation, so a dense collocation solve on the square captures the
outgoing limit directly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .chebyshev import (TensorGrid, add_kron, barycentric_matrix, cheb_diff,
                        cheb_nodes, clenshaw_curtis_weights, dirichlet_solve)
from .geometry import DEPTH, ChannelSpec

__all__ = [
    "ScalingProfile",
    "scaling_path",
    "profile_support_leak",
    "assemble_scaled_operator",
    "gaussian_forcing",
    "StationarySolution",
    "physical_gradient",
    "solve_stationary",
    "lap_sweep",
    "neumann_trace",
]


@dataclass(frozen=True)
class ScalingProfile:
    """Ramp rho(y1): 0 on the middle of [-1, 1], 1 near the ends.

    kind "tanh" uses 0.5 * (2 + tanh(k (y1 - c)) - tanh(k (y1 + c))) with
    c = center and k = steepness; kind "smoothstep" ramps |y1| from center
    to 1 with the cubic 3 t^2 - 2 t^3 (exactly 0 / 1 outside the ramp).
    """

    kind: str = "tanh"
    center: float = 0.9
    steepness: float = 20.0

    def __post_init__(self):
        if self.kind not in ("tanh", "smoothstep"):
            raise ValueError(f"unknown scaling profile kind {self.kind!r}")
        if not 0.0 < self.center < 1.0:
            raise ValueError("ramp center must lie in (0, 1)")

    def rho(self, y1):
        y1 = np.asarray(y1, dtype=float)
        if self.kind == "tanh":
            k, c = self.steepness, self.center
            return 0.5 * (2.0 + np.tanh(k * (y1 - c)) - np.tanh(k * (y1 + c)))
        t = np.clip((np.abs(y1) - self.center) / (1.0 - self.center), 0.0, 1.0)
        return t * t * (3.0 - 2.0 * t)

    def drho(self, y1):
        y1 = np.asarray(y1, dtype=float)
        if self.kind == "tanh":
            k, c = self.steepness, self.center
            return 0.5 * k * (np.cosh(k * (y1 - c)) ** -2
                              - np.cosh(k * (y1 + c)) ** -2)
        t = (np.abs(y1) - self.center) / (1.0 - self.center)
        inside = (t > 0.0) & (t < 1.0)
        t = np.clip(t, 0.0, 1.0)
        return np.where(inside,
                        6.0 * t * (1.0 - t) * np.sign(y1) / (1.0 - self.center),
                        0.0)


def scaling_path(profile: ScalingProfile, tau: float, y1):
    """Deformation gamma_tau(y1) and its derivative on the reference line."""
    y1 = np.asarray(y1, dtype=float)
    r = profile.rho(y1)
    g = y1 * (1.0 + 1j * tau * r)
    dg = 1.0 + 1j * tau * (r + y1 * profile.drho(y1))
    return g, dg


def profile_support_leak(chan: ChannelSpec, L: float,
                         profile: ScalingProfile) -> float:
    """Largest rho(y1) * (|G| + |G'|) sampled at x1 = L y1.

    The deformation analytically continues G; the continuation is harmless
    only where the topography is already negligible, so this ramp-weighted
    residual should be small (say below 1e-6) for a trustworthy solve.
    """
    y = np.linspace(-1.0, 1.0, 2001)
    x = L * y
    leak = profile.rho(y) * (np.abs(chan.G(x)) + np.abs(chan.dG(x)))
    return float(np.max(leak))


def _scaled_factors(tg: TensorGrid, chan: ChannelSpec, L: float,
                    profile: ScalingProfile, tau: float):
    """1D building blocks for the separable terms of the deformed operator."""
    y1 = tg.g1.nodes
    y2 = tg.g2.nodes
    D1 = cheb_diff(tg.g1)
    D2 = cheb_diff(tg.g2)
    g, dg = scaling_path(profile, tau, y1)
    w = L * g
    G = chan.topography.value(w)
    Gp = chan.topography.deriv(w)
    Gpp = chan.topography.deriv2(w)
    denom = DEPTH - G
    E1 = D1 / dg[:, None]
    M2 = D2 * (y2 - 1.0)[:, None]
    I2 = np.eye(tg.g2.n + 1)
    a_terms = [
        (E1 @ E1 / L ** 2, I2),
        (np.diag((Gpp * denom + Gp ** 2) / denom ** 2), M2),
        ((2.0 / L) * (Gp / denom)[:, None] * E1, M2),
        (np.diag((Gp / denom) ** 2), M2 @ M2),
    ]
    b_terms = [(np.diag(4.0 / denom ** 2), D2 @ D2)]
    return a_terms, b_terms


def assemble_scaled_operator(tg: TensorGrid, chan: ChannelSpec, L: float,
                             profile: ScalingProfile, tau: float,
                             omega=None, weights=None) -> np.ndarray:
    """Dense matrix w_A * A + w_B * B on the flattened tensor grid.

    With ``omega`` given the weights are (-omega^2, 1 - omega^2), i.e. the
    stationary operator; ``weights=(1, 1)`` gives the deformed Laplacian.
    """
    if weights is None:
        if omega is None:
            raise ValueError("need omega or explicit weights")
        weights = (-omega ** 2, 1.0 - omega ** 2)
    wa, wb = weights
    a_terms, b_terms = _scaled_factors(tg, chan, L, profile, tau)
    out = np.zeros((tg.size, tg.size), dtype=complex)
    for A, B in a_terms:
        add_kron(out, wa * np.asarray(A, dtype=complex), np.asarray(B, dtype=complex))
    for A, B in b_terms:
        add_kron(out, wb * np.asarray(A, dtype=complex), np.asarray(B, dtype=complex))
    return out


def gaussian_forcing(tg: TensorGrid, L: float, profile: ScalingProfile,
                     tau: float, center=(0.1, 0.0), width: float = 0.1,
                     amplitude: float = 1.0, wavenumbers=(5.0, -5.0)):
    """Forcing a(y) * sum_k e^{i k x1} sampled at the grid nodes.

    a is an isotropic Gaussian in reference coordinates, amplitude 1 and
    width 0.1 by default, centered at (0.1, 0); the pair (+5, -5) of
    horizontal wavenumbers forces beams in both directions.  The forcing
    is evaluated at real coordinates: it is treated as (numerically)
    compactly supported in the undeformed region, where its tail is below
    1e-20 long before the ramp activates.  Continuing it along the
    deformation instead would let the oscillatory factor's exponential
    growth overtake the Gaussian decay and reintroduce tau dependence.
    """
    y1 = tg.g1.nodes
    y2 = tg.g2.nodes
    Y1 = y1[:, None] + 0.0 * y2[None, :]
    Y2 = 0.0 * y1[:, None] + y2[None, :]
    a = amplitude * np.exp(-((Y1 - center[0]) ** 2 + (Y2 - center[1]) ** 2)
                           / width ** 2)
    ks = np.atleast_1d(np.asarray(wavenumbers, dtype=float))
    if ks.size == 0:
        return a.astype(complex).ravel()
    osc = np.zeros_like(Y1, dtype=complex)
    for k in ks:
        osc += np.exp(1j * k * L * Y1)
    return (a * osc).ravel()


def physical_gradient(tg: TensorGrid, chan: ChannelSpec, L: float, values):
    """(d/dx1, d/dx2) of nodal values on the mapped grid (undeformed map)."""
    values = np.asarray(values).reshape(tg.shape)
    y2 = tg.g2.nodes
    x1 = L * tg.g1.nodes
    G = chan.G(x1)
    Gp = chan.dG(x1)
    denom = DEPTH - G
    u1 = cheb_diff(tg.g1) @ values
    u2 = values @ cheb_diff(tg.g2).T
    # y2 depends on x1 through G: dy2/dx1 = (y2 - 1) G' / (pi - G)
    dy2dx1 = (y2[None, :] - 1.0) * (Gp / denom)[:, None]
    ux1 = u1 / L + dy2dx1 * u2
    ux2 = (2.0 / denom)[:, None] * u2
    return ux1, ux2


@dataclass
class StationarySolution:
    """Solution of the deformed stationary problem on the reference square."""

    grid: TensorGrid
    chan: ChannelSpec
    L: float
    profile: ScalingProfile
    tau: float
    omega: complex
    u: np.ndarray
    forcing: np.ndarray
    residual: float
    cond: float
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def values(self):
        return self.u.reshape(self.grid.shape)

    def _diff(self, axis):
        key = ("D", axis)
        if key not in self._cache:
            g = self.grid.g1 if axis == 1 else self.grid.g2
            self._cache[key] = cheb_diff(g)
        return self._cache[key]

    def du_dy1(self):
        return self._diff(1) @ self.values

    def du_dy2(self):
        return self.values @ self._diff(2).T

    def grad_physical(self):
        """(du/dx1, du/dx2) at the grid nodes, valid where rho = 0."""
        return physical_gradient(self.grid, self.chan, self.L, self.values)

    def trusted_mask(self, margin: float = 1e-8):
        """Columns of the grid where the deformation is inactive."""
        return self.profile.rho(self.grid.g1.nodes) < margin

    def weighted_norm(self, v=None, margin: float = 1e-8):
        """Quadrature L2 norm over the trusted (undeformed) columns."""
        v = self.values if v is None else np.asarray(v).reshape(self.grid.shape)
        w1 = clenshaw_curtis_weights(self.grid.g1.n)
        w2 = clenshaw_curtis_weights(self.grid.g2.n)
        m = self.trusted_mask(margin)
        W = np.outer(w1 * m, w2)
        return float(np.sqrt(np.sum(W * np.abs(v) ** 2)))

    def resample(self, x1, x2, field=None):
        """Interpolate u (or another grid field) at physical points."""
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        vals2d = self.values if field is None else \
            np.asarray(field).reshape(self.grid.shape)
        y1 = x1 / self.L
        y2 = 1.0 + 2.0 * x2 / (DEPTH - self.chan.G(x1))
        P1 = barycentric_matrix(self.grid.g1.nodes, y1.ravel())
        vals = np.empty(y1.size, dtype=complex)
        rows = P1 @ vals2d
        for i, t in enumerate(np.atleast_1d(y2.ravel())):
            P2 = barycentric_matrix(self.grid.g2.nodes, [t])
            vals[i] = (P2 @ rows[i]).item()
        return vals.reshape(x1.shape)

    def resample_grid(self, x1, x2):
        """Interpolate on the tensor product of 1D physical coordinates."""
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        P1 = barycentric_matrix(self.grid.g1.nodes, x1 / self.L)
        out = np.empty((x1.size, x2.size), dtype=complex)
        rows = P1 @ self.values
        for i, xi in enumerate(x1):
            y2 = 1.0 + 2.0 * x2 / (DEPTH - float(self.chan.G(xi)))
            ok = (y2 >= -1.0) & (y2 <= 1.0)
            P2 = barycentric_matrix(self.grid.g2.nodes, y2[ok])
            row = np.zeros(x2.size, dtype=complex)
            row[ok] = P2 @ rows[i]
            out[i] = row
        return out


def solve_stationary(chan: ChannelSpec, omega, L: float, n1: int = 160,
                     n2: int = 60, profile: ScalingProfile | None = None,
                     tau: float = 0.5, forcing=None,
                     cond_limit: float = 1e14) -> StationarySolution:
    """Solve the deformed stationary problem with zero Dirichlet data."""
    if profile is None:
        profile = ScalingProfile()
    tg = TensorGrid(cheb_nodes(n1), cheb_nodes(n2))
    if forcing is None:
        forcing = gaussian_forcing(tg, L, profile, tau)
    forcing = np.asarray(forcing, dtype=complex).ravel()
    P = assemble_scaled_operator(tg, chan, L, profile, tau, omega=omega)
    u, resid, cond = dirichlet_solve(P, forcing, tg.boundary_mask(),
                                     cond_limit=cond_limit)
    del P
    return StationarySolution(grid=tg, chan=chan, L=L, profile=profile,
                              tau=tau, omega=complex(omega), u=u,
                              forcing=forcing, residual=resid, cond=cond)


def lap_sweep(chan: ChannelSpec, lam: float, eps_values, L: float,
              n1: int = 96, n2: int = 40, profile: ScalingProfile | None = None,
              tau: float = 0.5, forcing=None, check_domega: bool = True,
              domega_step: float = 1e-4):
    """Limiting-absorption sweep omega = lam - i eps, eps decreasing.

    Returns (solutions, diffs, domega_residuals): diffs[k] is the trusted
    L2 distance between consecutive solutions; for each eps the identity
    P(omega) du/domega = 2 omega Lap(u) is checked with a centered
    difference in omega, reported relative to |2 omega Lap(u)|.
    """
    if profile is None:
        profile = ScalingProfile()
    eps_values = sorted(float(e) for e in eps_values)[::-1]
    tg = TensorGrid(cheb_nodes(n1), cheb_nodes(n2))
    if forcing is None:
        forcing = gaussian_forcing(tg, L, profile, tau)
    sols = []
    pdu = []
    for eps in eps_values:
        omega = lam - 1j * eps
        sol = solve_stationary(chan, omega, L, n1, n2, profile, tau, forcing)
        sols.append(sol)
        if check_domega:
            h = domega_step
            up = solve_stationary(chan, omega + h, L, n1, n2, profile, tau,
                                  forcing)
            um = solve_stationary(chan, omega - h, L, n1, n2, profile, tau,
                                  forcing)
            du = (up.u - um.u) / (2.0 * h)
            Pm = assemble_scaled_operator(tg, chan, L, profile, tau,
                                          omega=omega)
            lap = assemble_scaled_operator(tg, chan, L, profile, tau,
                                           weights=(1.0, 1.0))
            mask = ~tg.boundary_mask()
            lhs = (Pm @ du)[mask]
            rhs = (2.0 * omega * (lap @ sol.u))[mask]
            pdu.append(float(np.linalg.norm(lhs - rhs)
                             / np.linalg.norm(rhs)))
    diffs = [sols[k + 1].weighted_norm(sols[k + 1].u - sols[k].u)
             for k in range(len(sols) - 1)]
    return sols, diffs, pdu


def neumann_trace(sol: StationarySolution, side: str):
    """Scaled Neumann data of the solution on one horizontal boundary.

    Returns (theta, values) at the grid's horizontal nodes, where theta is
    the x1 coordinate of the boundary point.  The data is
    -2 omega sqrt(1 - omega^2) (L+ u) per unit of the characteristic
    boundary parameter, pulled back to the x1 parametrization; for a flat
    stretch it reduces to -(1 - omega^2) du/dx2.  Only meaningful over the
    trusted columns.
    """
    omega = sol.omega
    s = np.sqrt(1.0 - omega ** 2)
    ux1, ux2 = sol.grad_physical()
    theta = sol.L * sol.grid.g1.nodes
    if side == "up":
        j = 0  # y2 = +1 is the first vertical node (descending order)
        factor = 1.0 / omega
    elif side == "down":
        j = -1
        factor = 1.0 / omega + sol.chan.dG(theta) / s
    else:
        raise ValueError("side must be 'up' or 'down'")
    lplus = 0.5 * (omega * ux1[:, j] + s * ux2[:, j])
    return theta, -2.0 * omega * s * lplus * factor
