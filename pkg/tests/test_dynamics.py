"""Chess-billiard dynamics: involutions, flat closed form, scale selection."""

import numpy as np
import pytest

from iwchannel import topography
from iwchannel.dynamics import (BoundaryPoint, billiard_map, black_box_scales,
                                gamma, verify_scales)
from iwchannel.geometry import ChannelSpec, c_slope


FLAT = ChannelSpec(topography.flat())
GAUSS = ChannelSpec(topography.gaussian(1.0, 10.0))


def test_flat_billiard_closed_form():
    lam = 0.7
    shift = 2.0 * np.pi / c_slope(lam)
    rng = np.random.default_rng(0)
    for theta in rng.uniform(-20, 20, 25):
        q = billiard_map(BoundaryPoint("up", float(theta)), FLAT, lam, 1)
        assert q.side == "up"
        assert abs(q.theta - (theta + shift)) < 1e-12


def test_gamma_is_involution():
    lam = 0.7
    rng = np.random.default_rng(3)
    for _ in range(100):
        side = "up" if rng.uniform() < 0.5 else "down"
        p = BoundaryPoint(side, float(rng.uniform(-12, 12)))
        for sign in (+1, -1):
            q = gamma(gamma(p, GAUSS, lam, sign), GAUSS, lam, sign)
            assert q.side == p.side
            assert abs(q.theta - p.theta) < 1e-10


def test_billiard_inverse():
    lam = 0.55
    p = BoundaryPoint("down", 1.3)
    q = billiard_map(billiard_map(p, GAUSS, lam, 3), GAUSS, lam, -3)
    assert abs(q.theta - p.theta) < 1e-9


def test_billiard_order_preserving_on_top():
    lam = 0.7
    thetas = np.linspace(-8, 8, 60)
    images = [billiard_map(BoundaryPoint("up", float(t)), GAUSS, lam, 1).theta
              for t in thetas]
    assert np.all(np.diff(images) > 0)


def test_supercritical_refused():
    with pytest.raises(ValueError, match="subcritical"):
        gamma(BoundaryPoint("up", 0.0), GAUSS, 0.99, +1)


def test_black_box_scales_invariants():
    scales = black_box_scales(GAUSS, f_support_radius=3.0,
                              lambda_interval=(0.65, 0.75))
    assert scales.M >= 3.0
    assert scales.N >= 1
    assert scales.L > 4.0 * scales.M
    report = verify_scales(scales, GAUSS, n_lambda=16)
    assert report["m_ok"] and report["escape_ok"] and report["contain_ok"]
