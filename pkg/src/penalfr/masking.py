"""Sharp mask functions and volume-penalization source terms."""
from dataclasses import dataclass, field

import numpy as np

GEOMETRIES = ("none", "slab", "circle", "naca0012")

# four-digit NACA thickness coefficients, closed trailing edge variant
_NACA_COEFFS = (0.2969, -0.1260, -0.3516, 0.2843, -0.1036)


@dataclass(frozen=True)
class MaskField:
    """Binary solid indicator sampled at solution points.

    ``values`` keeps whatever shape the caller's point array has.
    """
    values: np.ndarray
    geometry_tag: str

    def __post_init__(self):
        v = np.asarray(self.values)
        if not np.all((v == 0) | (v == 1)):
            raise ValueError("mask values must be exactly 0 or 1")
        if self.geometry_tag not in GEOMETRIES:
            raise ValueError(f"unknown geometry {self.geometry_tag!r}")
        object.__setattr__(self, "values", v.astype(np.int8))

    @property
    def solid_ratio(self):
        return float(self.values.sum()) / self.values.size

    @property
    def solid_count(self):
        return int(self.values.sum())

    @property
    def indices(self):
        """Flat indices of solid points in C order; fixes the ordering of q."""
        return np.flatnonzero(self.values.ravel())


@dataclass(frozen=True)
class PenalizationParams:
    """Penalization strength ``eta`` and target solid velocity.

    ``eta=None`` means penalization is switched off (the eta -> infinity
    limit); there is no numeric sentinel for it.
    """
    eta: float | None = None
    u_s: tuple = field(default=(0.0, 0.0))

    def __post_init__(self):
        if self.eta is not None and not self.eta > 0:
            raise ValueError(f"eta must be positive, got {self.eta}")

    @property
    def enabled(self):
        return self.eta is not None

    @classmethod
    def disabled(cls, u_s=(0.0, 0.0)):
        return cls(eta=None, u_s=u_s)


def mask_slab(x, delta):
    if not delta > 0:
        raise ValueError("slab width must be positive")
    x = np.asarray(x, dtype=float)
    return ((x > 0.0) & (x < delta)).astype(np.int8)


def mask_circle(x, y, center=(0.0, 0.0), diameter=1.0):
    if not diameter > 0:
        raise ValueError("diameter must be positive")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    r2 = (x - center[0]) ** 2 + (y - center[1]) ** 2
    return (r2 < (0.5 * diameter) ** 2).astype(np.int8)


def naca0012_thickness(xhat, thickness=0.12):
    """Half thickness y_t at chordwise position xhat in [0, 1]."""
    xhat = np.clip(np.asarray(xhat, dtype=float), 0.0, 1.0)
    a0, a1, a2, a3, a4 = _NACA_COEFFS
    return 5.0 * thickness * (a0 * np.sqrt(xhat) + a1 * xhat + a2 * xhat**2 + a3 * xhat**3 + a4 * xhat**4)


def mask_naca0012(x, y, leading_edge=-0.5, chord=1.0):
    """Airfoil at zero incidence with the chord spanning [leading_edge, leading_edge + chord]."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    xhat = (x - leading_edge) / chord
    inside = (xhat >= 0.0) & (xhat <= 1.0)
    yt = naca0012_thickness(xhat) * chord
    return (inside & (np.abs(y) < yt)).astype(np.int8)


def penalize_advection(u, chi, params):
    """Source -(chi/eta)(u - u_s) for the scalar advection equation."""
    if not params.enabled:
        raise ValueError("penalization is disabled")
    u_s = params.u_s[0] if np.ndim(params.u_s) else params.u_s
    return -(np.asarray(chi) / params.eta) * (np.asarray(u) - u_s)


def penalize_ns(U, chi, params):
    """Penalization source for the 2D conserved variables (rho, rho u, rho v, E).

    ``U`` has the variable on the first axis; ``chi`` broadcasts against the
    remaining axes.
    """
    if not params.enabled:
        raise ValueError("penalization is disabled")
    U = np.asarray(U, dtype=float)
    rho = U[0]
    solid = np.broadcast_to(np.asarray(chi) != 0, rho.shape)
    if np.any(rho[solid] <= 0):
        raise ValueError("nonpositive density in penalized region")
    us, vs = params.u_s[0], params.u_s[1]
    u = U[1] / rho
    v = U[2] / rho
    k = chi / params.eta
    S = np.empty_like(U)
    S[0] = 0.0
    S[1] = k * (rho * us - U[1])
    S[2] = k * (rho * vs - U[2])
    S[3] = k * 0.5 * rho * ((us**2 + vs**2) - (u**2 + v**2))
    return S


def effective_wavenumber(k, r):
    """Wavenumber seen in the fluid when a fraction r of the domain is solid."""
    if not 0.0 <= r < 1.0:
        raise ValueError(f"solid ratio must lie in [0, 1), got {r}")
    return k / (1.0 - r)
