"""Fundamental solution, boundary kernels, and the reconstruction identity."""

import numpy as np
import pytest

from iwchannel import topography
from iwchannel.chebyshev import TensorGrid, cheb_nodes
from iwchannel.geometry import ChannelSpec, c_slope, ell
from iwchannel.layerpot import (BranchCutError, ChiB, apply_dC, convolve_E,
                                dC_kernel, dC_kernel_defining, eval_E,
                                integrate_linear, kappa_omega,
                                kernel_spectral_mass, psi_omega, single_layer,
                                z_invol)
from iwchannel.solver import assemble_scaled_operator

FLAT = ChannelSpec(topography.flat())
GAUSS = ChannelSpec(topography.gaussian(1.0, 10.0))
OMEGA = 0.7 - 1e-3j


def test_kappa_value_and_sign_flip():
    # kappa = i sgn(Im omega) / (4 pi omega sqrt(1 - omega^2))
    k_dn = kappa_omega(0.7 - 1e-6j)
    k_up = kappa_omega(0.7 + 1e-6j)
    ref = 1.0 / (4.0 * np.pi * 0.7 * np.sqrt(1 - 0.49))
    assert k_dn == pytest.approx(-1j * ref, rel=1e-5)
    # the two half-plane limits differ by the full jump 2 i |kappa|
    assert abs(k_up + k_dn) < 1e-5 * abs(ref)
    with pytest.raises(ValueError, match="Im omega"):
        kappa_omega(0.7)


def test_eval_E_branch_cut_detection():
    # at real omega the product l+ l- is real and can cross the cut
    lam = 0.7
    c = c_slope(lam)
    # along x2 = 0: product = -x1^2 / (lam^2 ... ) < 0 -> cut
    with pytest.raises(BranchCutError):
        eval_E(np.array([1.0]), np.array([0.0]), lam)
    # complex omega moves the product off the negative axis
    v = eval_E(np.array([1.0]), np.array([0.0]), OMEGA)
    assert np.all(np.isfinite(v))


def test_E_inverts_operator_on_smooth_bump():
    # E * (P w) = w for compactly supported w, checked at a few points
    omega = 0.7 - 1e-2j
    s2 = 1.0 - omega ** 2

    def w(x1, x2):
        return np.exp(-(x1 ** 2 + x2 ** 2) / 0.5)

    def Pw(x1, x2):
        g = w(x1, x2)
        w11 = g * (4 * x1 ** 2 / 0.25 - 2 / 0.5)
        w22 = g * (4 * x2 ** 2 / 0.25 - 2 / 0.5)
        return s2 * w22 - omega ** 2 * w11

    n = 480
    q = np.linspace(-4.0, 4.0, n)
    h = q[1] - q[0]
    X1, X2 = np.meshgrid(q, q, indexing="ij")
    tx1 = np.array([0.0, 0.4, -0.7])
    tx2 = np.array([0.1, -0.3, 0.5])
    got = convolve_E(omega, X1.ravel(), X2.ravel(),
                     np.full(n * n, h * h), Pw(X1, X2).ravel(), tx1, tx2)
    assert np.max(np.abs(got - w(tx1, tx2))) < 2e-3


def test_chi_cutoff_shape_and_derivatives():
    chi = ChiB(2.2)
    assert chi.value(0.0) == 1.0
    assert chi.value(chi.lo) == 1.0
    assert chi.value(chi.hi) == 0.0
    assert chi.value(-chi.hi - 3.0) == 0.0
    x = np.linspace(-chi.hi - 1, chi.hi + 1, 2001)
    h = 1e-6
    d1_fd = (chi.value(x + h) - chi.value(x - h)) / (2 * h)
    assert np.max(np.abs(chi.d1(x) - d1_fd)) < 1e-7
    d2_fd = (chi.d1(x + h) - chi.d1(x - h)) / (2 * h)
    assert np.max(np.abs(chi.d2(x) - d2_fd)) < 1e-5


def test_psi_diagonal_is_one():
    th = np.linspace(-5, 5, 11)
    for sign in (+1, -1):
        psi = psi_omega(GAUSS, OMEGA, sign, th, th)
        assert np.max(np.abs(psi - 1.0)) < 1e-6


def test_case3_flat_reduces_to_case1():
    th = np.linspace(-3, 3, 7) + 4.0
    thp = 0.3
    k1 = dC_kernel(1, th, np.full_like(th, thp), FLAT, OMEGA, +1)
    k3 = dC_kernel(3, th, np.full_like(th, thp), FLAT, OMEGA, +1)
    assert np.max(np.abs(k1 - k3)) < 1e-12 * np.max(np.abs(k1))


def test_case2_peak_at_billiard_image():
    # the case-2 kernel row peaks where theta hits gamma^sign(theta')
    from iwchannel.dynamics import BoundaryPoint, gamma
    thp = 0.3
    lam = float(np.real(OMEGA))
    for sign in (+1, -1):
        g = gamma(BoundaryPoint("down", thp), GAUSS, lam, sign).theta
        th = np.linspace(g - 10, g + 10, 4001)
        K = dC_kernel(2, th, np.full_like(th, thp), GAUSS, OMEGA, sign)
        peak = th[np.argmax(np.abs(K))]
        assert abs(peak - g) < 0.02


def test_defining_kernel_delta_limit():
    # closed-form case 1 is the delta -> 0 limit of the defining formula
    th, thp = 1.7, 0.3
    exact = dC_kernel(1, np.array([th]), np.array([thp]), FLAT, OMEGA, +1)[0]
    errs = []
    for delta in (1e-2, 1e-3, 1e-4):
        approx = dC_kernel_defining(th, "up", thp, "up", FLAT, OMEGA, +1,
                                    delta=delta)
        errs.append(abs(approx - exact))
    errs = np.array(errs)
    assert errs[-1] < 1e-3 * abs(exact)
    # first-order convergence in delta
    assert errs[1] < 0.2 * errs[0]
    assert errs[2] < 0.2 * errs[1]


def test_z_involution_error_is_order_one():
    # z stays bounded away from 0 and infinity on the topography
    for side in ("up", "down"):
        for sign in (+1, -1):
            z = z_invol(GAUSS, OMEGA, sign, side, np.linspace(-6, 6, 25))
            assert np.all(np.abs(z) > 1e-2)
            assert np.all(np.abs(z) < 1e2)


def test_kernel_spectral_mass_sides():
    expected = {(2, +1): -1, (2, -1): +1, (4, +1): +1, (4, -1): -1}
    for (case, sign), side in expected.items():
        frac, got = kernel_spectral_mass(GAUSS, OMEGA, case, sign)
        assert got == side, (case, sign)
        assert frac > 0.95, (case, sign)


def test_apply_dC_zero_density():
    src = np.linspace(-8, 8, 41)
    z = np.zeros_like(src)
    up, dn = apply_dC(FLAT, OMEGA, src, z, z, [0.3], [0.5])
    assert up[0] == 0.0 and dn[0] == 0.0


def test_single_layer_flat_even_symmetry():
    # even density on a flat channel gives an even potential in x1
    src = np.linspace(-10, 10, 201)
    v = np.exp(-src ** 2)
    p = single_layer(FLAT, OMEGA, src, v, v, np.array([1.3, -1.3]),
                     np.array([-1.0, -1.0]))
    assert abs(p[0] - p[1]) < 1e-12 * abs(p[0])


def test_integrate_linear_exact_cases():
    t = np.linspace(0.0, 1.0, 11)
    # num/den constant: integral of 2/(1) = 2
    val = integrate_linear(t, np.full(11, 2.0 + 0j), np.full(11, 1.0 + 0j))
    assert val == pytest.approx(2.0)
    # linear den crossing nowhere: int_0^1 1/(t + 1j) dt = log(1 + 1j) - log(1j)
    val = integrate_linear(t, np.ones(11, complex), t + 1j)
    exact = np.log(1.0 + 1j) - np.log(1j)
    assert abs(val - exact) < 1e-12
    # linear num over linear den: int_0^1 t/(t + 2) dt = 1 - 2 log(3/2)
    val = integrate_linear(t, t.astype(complex), t + 2.0 + 0j)
    assert abs(val - (1.0 - 2.0 * np.log(1.5))) < 1e-12
