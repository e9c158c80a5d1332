"""Chess-billiard boundary dynamics.

Following a +characteristic from one boundary component to the other and
back along a -characteristic generates the billiard map b = gamma^- o gamma^+.
On a subcritical channel each characteristic meets each boundary component
exactly once, so the involutions gamma^{+-} are well defined.  The black-box
scale selection (M, N, L) packages how far orbits must travel before they
escape a neighborhood of the topography.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import ChannelSpec, c_slope, subcriticality_margin

__all__ = ["BoundaryPoint", "BlackBoxScales", "gamma", "billiard_map", "black_box_scales"]

UP = "up"
DOWN = "down"

_MAX_ESCAPE_ITER = 10_000


@dataclass(frozen=True)
class BoundaryPoint:
    side: str  # "up" (x2 = 0) or "down" (x2 = G(x1) - pi)
    theta: float

    def embed(self, chan: ChannelSpec):
        if self.side == UP:
            return self.theta, 0.0
        return self.theta, float(np.real(chan.bottom(self.theta)))


@dataclass(frozen=True)
class BlackBoxScales:
    M: float
    N: int
    L: float
    lambda_interval: tuple


class RootConvergenceError(RuntimeError):
    pass


def _require_subcritical(chan: ChannelSpec, lam: float):
    m = subcriticality_margin(chan, lam)
    if m <= 0:
        raise ValueError(f"channel is not {lam}-subcritical (margin {m:.3g})")


def _solve_top_to_bottom(chan: ChannelSpec, lam: float, theta: float, sign: int) -> float:
    """Solve theta' - sign*(pi - G(theta'))/c = theta for the bottom hit.

    h(t) = t - sign*(pi - G(t))/c - theta is strictly increasing under
    subcriticality, so a marching bracket always exists.
    """
    c = c_slope(lam)
    step = (np.pi - chan.min_G()) / c

    def h(t):
        return t - sign * (np.pi - float(np.real(chan.G(t)))) / c - theta

    # flat-channel guess, then march in the direction of the sign change
    t0 = theta + sign * np.pi / c
    lo = hi = t0
    for _ in range(200):
        if h(lo) <= 0.0:
            break
        lo -= step
    else:
        raise RootConvergenceError(f"no lower bracket near theta={theta}")
    for _ in range(200):
        if h(hi) >= 0.0:
            break
        hi += step
    else:
        raise RootConvergenceError(f"no upper bracket near theta={theta}")

    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if hi - lo < 1e-12 * max(1.0, abs(mid)):
            break
        if h(mid) > 0.0:
            hi = mid
        else:
            lo = mid
    t = 0.5 * (lo + hi)
    # one Newton polish; h' = 1 + sign*G'/c
    hp = 1.0 + sign * float(np.real(chan.dG(t))) / c
    t -= h(t) / hp
    return t


def gamma(p: BoundaryPoint, chan: ChannelSpec, lam: float, sign: int) -> BoundaryPoint:
    """Involution gamma^{+-}: follow the +- characteristic to the other side."""
    if sign not in (+1, -1):
        raise ValueError("sign must be +1 or -1")
    _require_subcritical(chan, lam)
    c = c_slope(lam)
    if p.side == UP:
        t = _solve_top_to_bottom(chan, lam, p.theta, sign)
        return BoundaryPoint(DOWN, t)
    if p.side == DOWN:
        depth = np.pi - float(np.real(chan.G(p.theta)))
        return BoundaryPoint(UP, p.theta - sign * depth / c)
    raise ValueError(f"unknown side {p.side!r}")


def billiard_map(p: BoundaryPoint, chan: ChannelSpec, lam: float,
                 iterates: int = 1) -> BoundaryPoint:
    """Apply b = gamma^- o gamma^+ (iterates > 0) or its inverse (< 0)."""
    q = p
    for _ in range(abs(iterates)):
        if iterates > 0:
            q = gamma(gamma(q, chan, lam, +1), chan, lam, -1)
        else:
            q = gamma(gamma(q, chan, lam, -1), chan, lam, +1)
    return q


def _escape_count(chan, lam, radius, side, direction) -> tuple:
    """Iterates of b^{direction} needed for [-radius, radius] on ``side`` to
    leave [-radius, radius], plus the final extreme |theta| reached."""
    # b is order preserving on each side, so tracking endpoints suffices.
    pts = [BoundaryPoint(side, -radius), BoundaryPoint(side, radius)]
    for n in range(1, _MAX_ESCAPE_ITER + 1):
        pts = [billiard_map(p, chan, lam, direction) for p in pts]
        thetas = sorted(pt.theta for pt in pts)
        if thetas[0] > radius or thetas[1] < -radius:
            return n, max(abs(t) for t in thetas)
    raise RootConvergenceError(
        f"no escape within {_MAX_ESCAPE_ITER} iterates (lambda={lam})")


def black_box_scales(chan: ChannelSpec, f_support_radius: float,
                     lambda_interval) -> BlackBoxScales:
    """Choose cutoff scales (M, N, L): a support scale M bigger than both the
    topography and the forcing, the iterate count N at which billiard orbits
    leave {|x1| <= 4M}, and a cutoff scale L containing the escaped orbits."""
    lam_lo, lam_hi = float(min(lambda_interval)), float(max(lambda_interval))
    for lam in (lam_lo, lam_hi):
        _require_subcritical(chan, lam)
    minG = chan.min_G()
    # c_lambda is decreasing in lambda, so the binding constraint is lam_hi
    m_req = 10.0 * (np.pi - minG) / c_slope(lam_hi)
    M = np.ceil(max(m_req, chan.support_radius, f_support_radius) * 10.0) / 10.0
    if M <= m_req:
        M += 0.1
    M = float(M)

    lams = np.linspace(lam_lo, lam_hi, 32) if lam_lo < lam_hi else [lam_lo]
    N = 0
    reach = 4.0 * M
    for lam in lams:
        for side in (UP, DOWN):
            for direction in (+1, -1):
                n, far = _escape_count(chan, lam, 4.0 * M, side, direction)
                N = max(N, n)
    # orbit reach at the common N, over the sampled lambdas
    for lam in lams:
        for side in (UP, DOWN):
            for direction in (+1, -1):
                for theta0 in (-4.0 * M, 4.0 * M):
                    q = billiard_map(BoundaryPoint(side, theta0), chan, lam,
                                     direction * N)
                    reach = max(reach, abs(q.theta))
    L = float(1.1 * reach)
    return BlackBoxScales(M=M, N=int(N), L=L,
                          lambda_interval=(lam_lo, lam_hi))


def verify_scales(scales: BlackBoxScales, chan: ChannelSpec,
                  n_lambda: int = 64) -> dict:
    """Re-check the scale invariants by re-simulating orbits on a fresh
    lambda grid.  Returns a report dict with boolean verdicts."""
    lam_lo, lam_hi = scales.lambda_interval
    lams = np.linspace(lam_lo, lam_hi, n_lambda) if lam_lo < lam_hi else [lam_lo]
    minG = chan.min_G()
    m_ok = all(scales.M > 10.0 * (np.pi - minG) / c_slope(lam) for lam in lams)
    escape_ok = True
    contain_ok = True
    for lam in lams:
        for side in (UP, DOWN):
            for direction in (+1, -1):
                ths = []
                for theta0 in (-4.0 * scales.M, 4.0 * scales.M):
                    q = billiard_map(BoundaryPoint(side, theta0), chan, lam,
                                     direction * scales.N)
                    ths.append(q.theta)
                lo, hi = min(ths), max(ths)
                if not (lo > 4.0 * scales.M or hi < -4.0 * scales.M):
                    escape_ok = False
                if max(abs(lo), abs(hi)) > scales.L:
                    contain_ok = False
    return {"m_ok": m_ok, "escape_ok": escape_ok, "contain_ok": contain_ok,
            "ok": m_ok and escape_ok and contain_ok}
