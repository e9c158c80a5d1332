"""Spectral collocation building blocks."""

import numpy as np
import pytest

from iwchannel.chebyshev import (TensorGrid, add_kron, barycentric_matrix,
                                 cheb_diff, cheb_nodes, clenshaw_curtis_weights,
                                 dirichlet_solve)


def test_nodes_descending_endpoints():
    g = cheb_nodes(16)
    assert g.nodes[0] == pytest.approx(1.0)
    assert g.nodes[-1] == pytest.approx(-1.0)
    assert np.all(np.diff(g.nodes) < 0)


def test_diff_exact_on_polynomials():
    g = cheb_nodes(12)
    D = cheb_diff(g)
    for p in range(12):
        f = g.nodes ** p
        df = p * g.nodes ** (p - 1) if p else np.zeros_like(g.nodes)
        assert np.max(np.abs(D @ f - df)) < 1e-9


def test_diff_spectral_accuracy():
    g = cheb_nodes(40)
    D = cheb_diff(g)
    f = np.exp(np.sin(3 * g.nodes))
    df = 3 * np.cos(3 * g.nodes) * f
    assert np.max(np.abs(D @ f - df)) < 1e-10


def test_clenshaw_curtis_integrates():
    n = 32
    w = clenshaw_curtis_weights(n)
    x = cheb_nodes(n).nodes
    assert np.sum(w) == pytest.approx(2.0)
    assert np.sum(w * x ** 4) == pytest.approx(2.0 / 5.0)
    assert np.sum(w * np.cos(2 * x)) == pytest.approx(np.sin(2.0), abs=1e-12)


def test_barycentric_interpolates():
    g = cheb_nodes(30)
    f = np.tanh(2 * g.nodes)
    t = np.linspace(-1, 1, 101)
    P = barycentric_matrix(g.nodes, t)
    assert np.max(np.abs(P @ f - np.tanh(2 * t))) < 1e-9
    # exact reproduction at the nodes themselves
    Pn = barycentric_matrix(g.nodes, g.nodes[3:5])
    assert np.max(np.abs(Pn @ f - f[3:5])) < 1e-14


def test_add_kron_matches_numpy():
    rng = np.random.default_rng(2)
    A = rng.standard_normal((5, 5))
    B = rng.standard_normal((4, 4))
    out = np.zeros((20, 20))
    add_kron(out, A, B)
    assert np.array_equal(out, np.kron(A, B))


def test_tensor_grid_layout():
    tg = TensorGrid(cheb_nodes(6), cheb_nodes(4))
    assert tg.shape == (7, 5)
    mask = tg.boundary_mask().reshape(tg.shape)
    assert mask[0].all() and mask[-1].all()
    assert mask[:, 0].all() and mask[:, -1].all()
    assert not mask[1:-1, 1:-1].any()


def test_dirichlet_poisson_manufactured():
    # Laplacian u = f on [-1,1]^2 with u = sin(pi x) sin(pi y)
    tg = TensorGrid(cheb_nodes(24), cheb_nodes(24))
    D1 = cheb_diff(tg.g1)
    D2 = cheb_diff(tg.g2)
    I1 = np.eye(tg.g1.n + 1)
    I2 = np.eye(tg.g2.n + 1)
    A = np.kron(D1 @ D1, I2) + np.kron(I1, D2 @ D2)
    X, Y = np.meshgrid(tg.g1.nodes, tg.g2.nodes, indexing="ij")
    exact = np.sin(np.pi * X) * np.sin(np.pi * Y)
    rhs = (-2 * np.pi ** 2 * exact).ravel().astype(complex)
    u, resid, cond = dirichlet_solve(A.astype(complex), rhs,
                                     tg.boundary_mask())
    assert np.max(np.abs(u - exact.ravel())) < 1e-9
    assert resid < 1e-10
    assert 1.0 < cond < 1e8


def test_dirichlet_solve_cond_limit():
    tg = TensorGrid(cheb_nodes(10), cheb_nodes(10))
    A = np.zeros((tg.size, tg.size), dtype=complex)  # singular interior
    rhs = np.ones(tg.size, dtype=complex)
    with pytest.raises(Exception):
        dirichlet_solve(A, rhs, tg.boundary_mask(), cond_limit=1e14)
