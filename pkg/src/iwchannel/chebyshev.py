"""Chebyshev collocation machinery on [-1, 1] and tensor grids.

Nodes are Chebyshev-Gauss-Lobatto points x_j = cos(j pi / n), descending, so
the first node is +1 and the last is -1.  The flattened tensor index is
row-major in (y1 index, y2 index): flat = i1 * (n2 + 1) + i2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

__all__ = [
    "ChebGrid",
    "cheb_nodes",
    "cheb_diff",
    "clenshaw_curtis_weights",
    "barycentric_weights",
    "barycentric_matrix",
    "TensorGrid",
    "add_kron",
    "assemble_separable",
    "assemble_tensor_operator",
    "dirichlet_solve",
]


@dataclass(frozen=True)
class ChebGrid:
    n: int
    nodes: np.ndarray

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("polynomial degree must be >= 1")


def cheb_nodes(n: int) -> ChebGrid:
    if n < 1:
        raise ValueError("n must be >= 1")
    j = np.arange(n + 1)
    x = np.cos(j * np.pi / n)
    x[0], x[-1] = 1.0, -1.0
    return ChebGrid(n=n, nodes=x)


def cheb_diff(grid: ChebGrid) -> np.ndarray:
    """Collocation differentiation matrix, negative-sum-trick diagonal."""
    n, x = grid.n, grid.nodes
    c = np.ones(n + 1)
    c[0] = c[-1] = 2.0
    c *= (-1.0) ** np.arange(n + 1)
    X = np.tile(x, (n + 1, 1)).T
    dX = X - X.T
    D = np.outer(c, 1.0 / c) / (dX + np.eye(n + 1))
    D -= np.diag(D.sum(axis=1))
    return D


def clenshaw_curtis_weights(n: int) -> np.ndarray:
    """Quadrature weights on the Gauss-Lobatto nodes, exact through degree n."""
    if n == 1:
        return np.array([1.0, 1.0])
    j = np.arange(n + 1)
    w = np.zeros(n + 1)
    v = np.ones(n - 1)
    for k in range(1, n // 2 + 1):
        factor = 2.0 if 2 * k < n else 1.0
        v -= factor * np.cos(2.0 * k * j[1:-1] * np.pi / n) / (4.0 * k * k - 1.0)
    w[1:-1] = 2.0 * v / n
    w[0] = w[-1] = 1.0 / (n * n - (n % 2 == 0))
    return w


def barycentric_weights(nodes: np.ndarray) -> np.ndarray:
    n = len(nodes) - 1
    w = (-1.0) ** np.arange(n + 1)
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


def barycentric_matrix(nodes: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """Interpolation matrix from nodal values to target points."""
    w = barycentric_weights(nodes)
    t = np.atleast_1d(np.asarray(targets, dtype=float))
    diff = t[:, None] - nodes[None, :]
    exact = np.isclose(diff, 0.0, atol=1e-14)
    diff = np.where(exact, 1.0, diff)
    num = w[None, :] / diff
    P = num / num.sum(axis=1)[:, None]
    hit = exact.any(axis=1)
    P[hit] = 0.0
    P[hit, np.argmax(exact[hit], axis=1)] = 1.0
    return P


@dataclass(frozen=True)
class TensorGrid:
    """Tensor product of two Gauss-Lobatto grids; flat index row-major in y1."""

    g1: ChebGrid
    g2: ChebGrid

    @property
    def shape(self):
        return (self.g1.n + 1, self.g2.n + 1)

    @property
    def size(self):
        return (self.g1.n + 1) * (self.g2.n + 1)

    def meshgrid(self):
        return np.meshgrid(self.g1.nodes, self.g2.nodes, indexing="ij")

    def boundary_mask(self) -> np.ndarray:
        m = np.zeros(self.shape, dtype=bool)
        m[0, :] = m[-1, :] = True
        m[:, 0] = m[:, -1] = True
        return m.ravel()


def add_kron(out: np.ndarray, A: np.ndarray, B: np.ndarray):
    """out += kron(A, B) without allocating the full Kronecker product."""
    n1 = A.shape[0]
    n2 = B.shape[0]
    o4 = out.reshape(n1, n2, n1, n2)
    for i in range(n1):
        o4[i] += A[i][None, :, None] * B[:, None, :]
    return out


def assemble_separable(terms, dtype=complex) -> np.ndarray:
    """Sum of kron(A_i, B_i) for 1D factor pairs (A_i, B_i)."""
    terms = list(terms)
    if not terms:
        raise ValueError("empty term list")
    n1 = terms[0][0].shape[0]
    n2 = terms[0][1].shape[0]
    out = np.zeros((n1 * n2, n1 * n2), dtype=dtype)
    for A, B in terms:
        if A.shape[0] != n1 or B.shape[0] != n2:
            raise ValueError("factor shape mismatch")
        add_kron(out, np.asarray(A, dtype=dtype), np.asarray(B, dtype=dtype))
    return out


def assemble_tensor_operator(grid: TensorGrid, terms) -> np.ndarray:
    """Ordered products of diagonal-coefficient and derivative factors.

    Each term is a list of factors applied right-to-left (operator order);
    a factor is ("coeff", field) with ``field`` on the flattened grid, or
    ("d1", k) / ("d2", k) for the k-th derivative in y1 / y2.  An empty
    term list yields the zero operator.
    """
    N = grid.size
    D1 = cheb_diff(grid.g1)
    D2 = cheb_diff(grid.g2)
    I1 = np.eye(grid.g1.n + 1)
    I2 = np.eye(grid.g2.n + 1)
    out = np.zeros((N, N), dtype=complex)
    for factors in terms:
        term = np.eye(N, dtype=complex)
        for kind, val in reversed(factors):
            if kind == "coeff":
                f = np.asarray(val).ravel()
                if f.size != N:
                    raise ValueError("coefficient field shape mismatch")
                term = f[:, None] * term
            elif kind == "d1":
                M = np.linalg.matrix_power(D1, int(val))
                term = assemble_separable([(M, I2)]) @ term
            elif kind == "d2":
                M = np.linalg.matrix_power(D2, int(val))
                term = assemble_separable([(I1, M)]) @ term
            else:
                raise ValueError(f"unknown factor kind {kind!r}")
        out += term
    return out


def dirichlet_solve(A: np.ndarray, rhs: np.ndarray, boundary_mask: np.ndarray,
                    cond_limit: float = 1e14):
    """Solve A u = rhs with homogeneous Dirichlet rows.

    Masked rows are replaced by identity rows with zero data; A is modified
    in place to keep the peak footprint at two matrix copies.  Returns
    (u, interior_residual, condition_estimate); the residual is the max norm
    of A u - rhs over interior rows, relative to the max of |rhs|.
    """
    if A.dtype != np.complex128:
        A = np.asarray(A, dtype=complex)
    b = np.array(rhs, dtype=complex).ravel().copy()
    mask = np.asarray(boundary_mask, dtype=bool).ravel()
    idx = np.flatnonzero(mask)
    A[idx, :] = 0.0
    A[idx, idx] = 1.0
    b[idx] = 0.0
    anorm = np.linalg.norm(A, 1)
    lu, piv = sla.lu_factor(A, overwrite_a=False)
    gecon = sla.get_lapack_funcs(("gecon",), (lu,))[0]
    rcond, _ = gecon(lu, anorm)
    cond = np.inf if rcond == 0 else 1.0 / rcond
    if cond > cond_limit:
        raise np.linalg.LinAlgError(
            f"system too ill conditioned (estimate {cond:.3g})")
    u = sla.lu_solve((lu, piv), b)
    del lu
    scale = np.max(np.abs(b)) or 1.0
    resid = np.max(np.abs((A @ u - b)[~mask])) / scale
    return u, float(resid), float(cond)
