"""Geometry, topography, and characteristic-coordinate checks."""

import numpy as np
import pytest

from iwchannel import topography
from iwchannel.geometry import (DEPTH, ChannelSpec, ReferenceMap, c_omega,
                                c_slope, char_deriv, ell,
                                subcriticality_margin)


def test_c_slope_reference_value():
    assert c_slope(0.7) == pytest.approx(np.sqrt(1 - 0.49) / 0.7, abs=0)
    assert c_slope(0.7) == pytest.approx(1.0202040612204071, abs=1e-14)


def test_c_slope_domain():
    for bad in (0.0, 1.0, -0.3, 1.7):
        with pytest.raises(ValueError):
            c_slope(bad)


def test_c_omega_matches_real_slope():
    assert complex(c_omega(0.7 + 0j)) == pytest.approx(c_slope(0.7))
    # analytic in the lower half plane near the real axis
    c1 = c_omega(0.7 - 1e-6j)
    assert abs(c1 - c_slope(0.7)) < 1e-5


def test_ell_characteristic_annihilation():
    # L^+- annihilates the opposite characteristic coordinate
    omega = 0.7 - 1e-3j
    for sign in (+1, -1):
        # d ell^sign = (sign/omega, 1/sqrt(1-omega^2))
        u_x1 = sign / omega
        u_x2 = 1.0 / np.sqrt(1 + 0j - omega ** 2)
        assert abs(char_deriv(u_x1, u_x2, omega, -sign)) < 1e-14
        assert abs(char_deriv(u_x1, u_x2, omega, sign) - 1.0) < 1e-14


def test_ell_values():
    omega = 0.6
    v = ell(1.2, -0.5, omega, +1)
    assert v == pytest.approx(1.2 / 0.6 - 0.5 / np.sqrt(1 - 0.36))


def test_gaussian_topography_derivatives():
    topo = topography.gaussian(1.0, 10.0)
    xs = np.linspace(-4, 4, 41)
    h = 1e-6
    fd = (topo.value(xs + h) - topo.value(xs - h)) / (2 * h)
    assert np.max(np.abs(fd - topo.deriv(xs))) < 1e-8
    fd2 = (topo.deriv(xs + h) - topo.deriv(xs - h)) / (2 * h)
    assert np.max(np.abs(fd2 - topo.deriv2(xs))) < 1e-7


def test_bump_poly_compact_support():
    topo = topography.bump_poly(0.5, 2.0)
    assert topo.value(2.0) == 0.0
    assert topo.value(2.5) == 0.0
    assert topo.deriv(2.0 + 1e-9) == 0.0
    assert topo.value(0.0) == pytest.approx(0.5)


def test_topography_complex_argument():
    topo = topography.gaussian(1.0, 10.0)
    z = 1.3 + 0.2j
    assert topo.value(z) == pytest.approx(np.exp(-z ** 2 / 10.0))
    h = 1e-6
    fd = (topo.value(z + h) - topo.value(z - h)) / (2 * h)
    assert abs(fd - topo.deriv(z)) < 1e-8


def test_from_dict_roundtrip():
    topo = topography.from_dict({"kind": "gaussian", "amp": 0.5, "width": 4.0})
    assert topo.value(0.0) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        topography.from_dict({"kind": "volcano"})


def test_support_radius_monotone_in_eta():
    topo = topography.gaussian(1.0, 10.0)
    r8 = topo.support_radius(1e-8)
    r4 = topo.support_radius(1e-4)
    assert r4 < r8
    assert abs(float(topo.value(r8 + 0.1))) < 1e-8


def test_subcriticality_margin_flat_and_gaussian():
    flat = ChannelSpec(topography.flat())
    assert subcriticality_margin(flat, 0.7) == pytest.approx(c_slope(0.7))
    gauss = ChannelSpec(topography.gaussian(1.0, 10.0))
    # max |G'| = sqrt(2/width) * exp(-1/2) at x = sqrt(width/2)
    expect = c_slope(0.7) - np.sqrt(2.0 / 10.0) * np.exp(-0.5)
    assert subcriticality_margin(gauss, 0.7) == pytest.approx(expect, rel=1e-6)
    # the figure channel turns supercritical near lambda = 1
    assert subcriticality_margin(gauss, 0.99) < 0


def test_reference_map_roundtrip():
    chan = ChannelSpec(topography.gaussian(1.0, 10.0))
    rm = ReferenceMap(chan, 15.0)
    rng = np.random.default_rng(1)
    x1 = rng.uniform(-15, 15, 50)
    depth = np.pi - np.real(chan.G(x1))
    x2 = rng.uniform(0, 1, 50) * (-depth)
    y1, y2 = rm.forward(x1, x2)
    assert np.all(np.abs(y1) <= 1) and np.all(np.abs(y2) <= 1)
    b1, b2 = rm.inverse(y1, y2)
    assert np.max(np.abs(b1 - x1)) < 1e-12
    assert np.max(np.abs(b2 - x2)) < 1e-12
    top = rm.forward(np.array([3.0]), np.array([0.0]))
    assert top[1][0] == pytest.approx(1.0)
    bot = rm.forward(np.array([3.0]), np.array([float(np.real(chan.bottom(3.0)))]))
    assert bot[1][0] == pytest.approx(-1.0)


def test_depth_constant():
    assert DEPTH == pytest.approx(np.pi)
