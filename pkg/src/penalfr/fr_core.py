"""One-dimensional flux reconstruction building blocks.

Nodal Lagrange basis on Gauss-Legendre points, gradients of the DG-recovering
(Radau) correction functions, and the per-element advection operators L, C, R
that couple an element to its left neighbour, itself and its right neighbour.
"""
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import legendre

# Above this order Gauss node clustering makes the dense operators poorly
# conditioned; nothing stops larger orders, but none are tested.
MAX_TESTED_ORDER = 10


def gauss_legendre(n, tol=1e-14, maxiter=100):
    """Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.

    Returns nodes sorted ascending and the matching quadrature weights.
    """
    if n < 1:
        raise ValueError("need at least one quadrature point")
    i = np.arange(1, n + 1)
    x = -np.cos(np.pi * (i - 0.25) / (n + 0.5))
    for _ in range(maxiter):
        p, dp = _legendre_and_derivative(n, x)
        dx = p / dp
        x = x - dx
        if np.max(np.abs(dx)) < tol:
            break
    _, dp = _legendre_and_derivative(n, x)
    w = 2.0 / ((1.0 - x**2) * dp**2)
    return x, w


def _legendre_and_derivative(n, x):
    # three-term recurrence; derivative from the standard identity
    p0 = np.ones_like(x)
    p1 = x.copy()
    if n == 0:
        return p0, np.zeros_like(x)
    for k in range(2, n + 1):
        p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
    dp = n * (x * p1 - p0) / (x**2 - 1.0)
    return p1, dp


def barycentric_weights(nodes):
    nodes = np.asarray(nodes, dtype=float)
    diff = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(diff, 1.0)
    return 1.0 / np.prod(diff, axis=1)


def lagrange_matrix(nodes, x, weights=None):
    """Values l_j(x_i) of the Lagrange basis on ``nodes`` at points ``x``.

    Uses the second barycentric form; rows for points that coincide with a
    node are replaced by the exact cardinal row.
    """
    nodes = np.asarray(nodes, dtype=float)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if weights is None:
        weights = barycentric_weights(nodes)
    diff = x[:, None] - nodes[None, :]
    exact = np.isclose(diff, 0.0, rtol=0.0, atol=1e-15)
    diff[exact] = 1.0
    terms = weights[None, :] / diff
    out = terms / terms.sum(axis=1, keepdims=True)
    hit = exact.any(axis=1)
    out[hit] = exact[hit].astype(float)
    return out


def differentiation_matrix(nodes, weights=None):
    """D[i, j] = l_j'(r_i) from the barycentric formula."""
    nodes = np.asarray(nodes, dtype=float)
    if weights is None:
        weights = barycentric_weights(nodes)
    diff = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(diff, 1.0)
    D = (weights[None, :] / weights[:, None]) / diff
    np.fill_diagonal(D, 0.0)
    # negative-sum trick keeps D @ 1 = 0 to round-off
    np.fill_diagonal(D, -D.sum(axis=1))
    return D


@dataclass(frozen=True)
class NodalBasis:
    order: int
    nodes: np.ndarray
    quad_weights: np.ndarray
    bary_weights: np.ndarray
    diff_matrix: np.ndarray
    boundary_interp_left: np.ndarray
    boundary_interp_right: np.ndarray

    @property
    def n(self):
        return self.order + 1

    def interpolate(self, x):
        """Interpolation matrix from nodal values to points ``x``."""
        return lagrange_matrix(self.nodes, x, self.bary_weights)


def build_nodal_basis(P):
    if P < 0:
        raise ValueError(f"polynomial order must be >= 0, got {P}")
    nodes, w = gauss_legendre(P + 1)
    bw = barycentric_weights(nodes)
    return NodalBasis(
        order=P,
        nodes=nodes,
        quad_weights=w,
        bary_weights=bw,
        diff_matrix=differentiation_matrix(nodes, bw),
        boundary_interp_left=lagrange_matrix(nodes, -1.0, bw)[0],
        boundary_interp_right=lagrange_matrix(nodes, 1.0, bw)[0],
    )


def correction_function(P, side):
    """Degree P+1 correction polynomial recovering nodal DG (Radau family).

    ``side='left'`` gives g with g(-1) = 1, g(1) = 0; ``'right'`` the mirror.
    Returned as a :class:`numpy.polynomial.Legendre` series.
    """
    c = np.zeros(P + 2)
    if side == "left":
        c[P] = 0.5 * (-1) ** P
        c[P + 1] = -0.5 * (-1) ** P
    elif side == "right":
        c[P] = 0.5
        c[P + 1] = 0.5
    else:
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    return legendre.Legendre(c)


@dataclass(frozen=True)
class CorrectionGradients:
    g_left: np.ndarray
    g_right: np.ndarray


def build_correction_gradients(P, nodes=None):
    if nodes is None:
        nodes, _ = gauss_legendre(P + 1)
    gl = correction_function(P, "left").deriv()(nodes)
    gr = correction_function(P, "right").deriv()(nodes)
    return CorrectionGradients(g_left=np.asarray(gl), g_right=np.asarray(gr))


@dataclass(frozen=True)
class ElementOperators:
    L: np.ndarray
    C: np.ndarray
    R: np.ndarray
    h: float
    c: float
    lam: float
    order: int


def build_element_operators(basis, corr, h, c=1.0, lam=1.0):
    """FR matrices for du_n/dt = L u_{n-1} + C u_n + R u_{n+1}.

    ``lam`` is the upwind parameter of the Lax-Friedrichs interface flux
    (1 = fully upwind, 0 = central).
    """
    if not h > 0:
        raise ValueError(f"element width must be positive, got {h}")
    D = basis.diff_matrix
    lm = basis.boundary_interp_left
    lp = basis.boundary_interp_right
    gl, gr = corr.g_left, corr.g_right
    up = c + lam * abs(c)
    down = c - lam * abs(c)
    L = -(1.0 / h) * np.outer(gl, up * lp)
    C = -(2.0 / h) * (c * D - 0.5 * np.outer(gl, up * lm) - 0.5 * np.outer(gr, down * lp))
    R = -(1.0 / h) * np.outer(gr, down * lm)
    return ElementOperators(L=L, C=C, R=R, h=float(h), c=float(c), lam=float(lam), order=basis.order)


def element_operators(P, h, c=1.0, lam=1.0):
    """Shortcut: basis, correction gradients and L/C/R in one call."""
    basis = build_nodal_basis(P)
    corr = build_correction_gradients(P, basis.nodes)
    return build_element_operators(basis, corr, h, c, lam)
