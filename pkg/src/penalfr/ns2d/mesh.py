"""Structured Cartesian meshes: uniform core, geometric stretching outward."""
from dataclasses import dataclass, field
import hashlib

import numpy as np
from scipy.optimize import brentq

from ..fr_core import build_nodal_basis

STRETCH_RANGE = (1.05, 1.3)


def _core_cells(core, size):
    a, b = core
    width = b - a
    if not width > 0:
        raise ValueError(f"core extent must be increasing, got {core}")
    if not size > 0:
        raise ValueError(f"core size must be positive, got {size}")
    n = max(1, int(round(width / size)))
    return n, width / n


def _stretched_sizes(h, length, ratio):
    """Element sizes h r^k, k = 1..m, with the ratio re-solved to land exactly on ``length``."""
    if length <= 1e-12 * max(1.0, h):
        return np.zeros(0)
    m = 1
    total = h * ratio
    while total < length:
        m += 1
        total += h * ratio**m
    if m * h >= length:
        return np.full(m, length / m)

    def excess(r):
        return h * np.sum(r ** np.arange(1, m + 1)) - length

    r = brentq(excess, 1.0 + 1e-14, ratio, xtol=1e-15, rtol=1e-15)
    sizes = h * r ** np.arange(1, m + 1)
    sizes *= length / sizes.sum()
    return sizes


def edges_1d(core, size, domain, ratio):
    """Element edges along one axis."""
    lo, hi = domain
    a, b = core
    if not (lo <= a < b <= hi):
        raise ValueError(f"core {core} must lie inside domain {domain}")
    if not ratio > 1:
        raise ValueError(f"stretch ratio must exceed 1, got {ratio}")
    n, h = _core_cells(core, size)
    core_edges = a + h * np.arange(n + 1)
    core_edges[-1] = b
    left = _stretched_sizes(h, a - lo, ratio)
    right = _stretched_sizes(h, hi - b, ratio)
    left_edges = a - np.cumsum(left)[::-1]
    right_edges = b + np.cumsum(right)
    edges = np.concatenate([left_edges, core_edges, right_edges])
    edges[0], edges[-1] = lo, hi
    return edges


def count_1d(core, size, domain, ratio):
    return len(edges_1d(core, size, domain, ratio)) - 1


def stretch_for_count(core, size, domain, target, bounds=STRETCH_RANGE, samples=2601):
    """Stretch ratio within ``bounds`` whose element count is closest to ``target``."""
    best = None
    for r in np.linspace(bounds[0], bounds[1], samples):
        miss = abs(count_1d(core, size, domain, r) - target)
        if best is None or miss < best[0]:
            best = (miss, float(r))
        if miss == 0:
            break
    return best[1]


@dataclass(frozen=True)
class CartesianMesh:
    x_edges: np.ndarray
    y_edges: np.ndarray
    P: int
    periodic: bool = False
    basis: object = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        for name in ("x_edges", "y_edges"):
            e = np.asarray(getattr(self, name), dtype=float)
            if e.ndim != 1 or len(e) < 2 or np.any(np.diff(e) <= 0):
                raise ValueError(f"{name} must be strictly increasing with at least two entries")
            object.__setattr__(self, name, e)
        if self.basis is None:
            object.__setattr__(self, "basis", build_nodal_basis(self.P))

    @property
    def nex(self):
        return len(self.x_edges) - 1

    @property
    def ney(self):
        return len(self.y_edges) - 1

    @property
    def n(self):
        return self.P + 1

    @property
    def shape(self):
        return (self.ney, self.nex, self.n, self.n)

    @property
    def dx(self):
        return np.diff(self.x_edges)

    @property
    def dy(self):
        return np.diff(self.y_edges)

    @property
    def jacobian(self):
        """Determinant of the reference-to-physical map per element, shape (ney, nex)."""
        return 0.25 * np.outer(self.dy, self.dx)

    def points(self):
        r = self.basis.nodes
        x = self.x_edges[:-1, None] + 0.5 * (r[None, :] + 1.0) * self.dx[:, None]
        y = self.y_edges[:-1, None] + 0.5 * (r[None, :] + 1.0) * self.dy[:, None]
        X = np.broadcast_to(x[None, :, None, :], self.shape)
        Y = np.broadcast_to(y[:, None, :, None], self.shape)
        return X.copy(), Y.copy()

    def quadrature_weights(self):
        """Per-point volume weights w_i w_j |J|, shape ``self.shape``."""
        w = self.basis.quad_weights
        return self.jacobian[:, :, None, None] * np.outer(w, w)[None, None]

    def neighbors(self):
        """(ney, nex, 4) table of flat neighbor indices, order W, E, S, N; -1 on a boundary."""
        ney, nex = self.ney, self.nex
        idx = np.arange(ney * nex).reshape(ney, nex)
        nb = np.full((ney, nex, 4), -1, dtype=np.int64)
        nb[:, 1:, 0] = idx[:, :-1]
        nb[:, :-1, 1] = idx[:, 1:]
        nb[1:, :, 2] = idx[:-1, :]
        nb[:-1, :, 3] = idx[1:, :]
        if self.periodic:
            nb[:, 0, 0] = idx[:, -1]
            nb[:, -1, 1] = idx[:, 0]
            nb[0, :, 2] = idx[-1, :]
            nb[-1, :, 3] = idx[0, :]
        return nb

    def contains(self, x, y):
        return (self.x_edges[0] <= x <= self.x_edges[-1]) and (self.y_edges[0] <= y <= self.y_edges[-1])

    def mesh_hash(self):
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.x_edges).tobytes())
        h.update(np.ascontiguousarray(self.y_edges).tobytes())
        h.update(f"P={self.P};periodic={self.periodic}".encode())
        return h.hexdigest()


def build_mesh(core_x, core_y, size, domain_x, domain_y, stretch=(1.1, 1.1), P=2):
    """Uniform core of the given size, geometric stretching out to the domain edges."""
    rx, ry = (stretch, stretch) if np.ndim(stretch) == 0 else stretch
    return CartesianMesh(
        x_edges=edges_1d(core_x, size, domain_x, rx),
        y_edges=edges_1d(core_y, size, domain_y, ry),
        P=P,
    )


def uniform_mesh(domain_x, domain_y, nex, ney, P, periodic=False):
    return CartesianMesh(
        x_edges=np.linspace(domain_x[0], domain_x[1], nex + 1),
        y_edges=np.linspace(domain_y[0], domain_y[1], ney + 1),
        P=P,
        periodic=periodic,
    )
