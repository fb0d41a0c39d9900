"""Ideal-gas closure and physical fluxes for 2D compressible flow.

Conserved variables are stacked on axis 0 as (rho, rho u, rho v, E). Free
stream is rho = 1, |u| = 1 and p = 1 / (gamma M^2), so the reference sound
speed is 1/M and the viscosity is 1/Re.
"""
from dataclasses import dataclass
import math

import numpy as np


class PositivityError(ArithmeticError):
    """Density or pressure dropped to zero or below."""

    def __init__(self, msg, location=None):
        super().__init__(msg)
        self.location = location


@dataclass(frozen=True)
class GasModel:
    gamma: float = 1.4
    Re: float = math.inf
    Pr: float = 0.72
    M: float = 0.2
    alpha: float = 0.0

    def __post_init__(self):
        if not self.gamma > 1:
            raise ValueError(f"gamma must exceed 1, got {self.gamma}")
        if not self.Re > 0:
            raise ValueError(f"Re must be positive, got {self.Re}")
        if not self.M > 0:
            raise ValueError(f"M must be positive, got {self.M}")
        if not self.Pr > 0:
            raise ValueError(f"Pr must be positive, got {self.Pr}")

    @property
    def mu(self):
        return 0.0 if math.isinf(self.Re) else 1.0 / self.Re

    @property
    def viscous(self):
        return self.mu > 0

    @property
    def conductivity_factor(self):
        """kappa/R: multiplies grad(p/rho) in the heat flux."""
        return self.mu * self.gamma / ((self.gamma - 1.0) * self.Pr)

    @property
    def p_inf(self):
        return 1.0 / (self.gamma * self.M**2)

    @property
    def velocity_inf(self):
        a = math.radians(self.alpha)
        return math.cos(a), math.sin(a)

    def freestream(self):
        u, v = self.velocity_inf
        return conserved(1.0, u, v, self.p_inf, self.gamma)

    def dynamic_pressure(self):
        return 0.5


def conserved(rho, u, v, p, gamma):
    rho, u, v, p = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (rho, u, v, p)))
    E = p / (gamma - 1.0) + 0.5 * rho * (u * u + v * v)
    return np.stack([rho, rho * u, rho * v, E])


def primitives(U, gamma):
    """(rho, u, v, p) from conserved variables."""
    rho = U[0]
    u = U[1] / rho
    v = U[2] / rho
    p = (gamma - 1.0) * (U[3] - 0.5 * rho * (u * u + v * v))
    return rho, u, v, p


def pressure(U, gamma):
    return (gamma - 1.0) * (U[3] - 0.5 * (U[1] ** 2 + U[2] ** 2) / U[0])


def sound_speed(rho, p, gamma):
    return np.sqrt(gamma * p / rho)


def check_admissible(U, gamma, where=""):
    """Raise PositivityError at the first point with rho <= 0 or p <= 0."""
    rho = U[0]
    p = pressure(U, gamma)
    bad = ~((rho > 0) & (p > 0))
    if bad.any():
        idx = tuple(int(i) for i in np.argwhere(bad)[0])
        raise PositivityError(
            f"inadmissible state{(' ' + where) if where else ''} at index {idx}: "
            f"rho={float(rho[idx]):.6g}, p={float(p[idx]):.6g}",
            location=idx,
        )


def inviscid_flux(U, nx, ny, gamma):
    """Physical Euler flux projected on the direction (nx, ny)."""
    rho, u, v, p = primitives(U, gamma)
    un = u * nx + v * ny
    return np.stack([rho * un, U[1] * un + p * nx, U[2] * un + p * ny, (U[3] + p) * un])


def velocity_gradients(U, Ux, Uy):
    """(u, v) and their x/y derivatives from conserved values and gradients."""
    rho = U[0]
    u = U[1] / rho
    v = U[2] / rho
    ux = (Ux[1] - u * Ux[0]) / rho
    uy = (Uy[1] - u * Uy[0]) / rho
    vx = (Ux[2] - v * Ux[0]) / rho
    vy = (Uy[2] - v * Uy[0]) / rho
    return u, v, ux, uy, vx, vy


def viscous_flux(U, Ux, Uy, nx, ny, gas):
    """Viscous flux (0, tau.n, (u.tau + kappa grad T).n), i.e. the part subtracted from the Euler flux."""
    out = np.zeros_like(U)
    if not gas.viscous:
        return out
    mu = gas.mu
    g = gas.gamma
    rho = U[0]
    u, v, ux, uy, vx, vy = velocity_gradients(U, Ux, Uy)
    div = ux + vy
    txx = mu * (2.0 * ux - (2.0 / 3.0) * div)
    tyy = mu * (2.0 * vy - (2.0 / 3.0) * div)
    txy = mu * (uy + vx)
    # p/rho = (g-1)(E/rho - |u|^2/2); differentiate through the conserved gradients
    e = U[3] / rho
    ex = (Ux[3] - e * Ux[0]) / rho
    ey = (Uy[3] - e * Uy[0]) / rho
    Tx = (g - 1.0) * (ex - (u * ux + v * vx))
    Ty = (g - 1.0) * (ey - (u * uy + v * vy))
    k = gas.conductivity_factor
    out[1] = txx * nx + txy * ny
    out[2] = txy * nx + tyy * ny
    out[3] = (u * txx + v * txy + k * Tx) * nx + (u * txy + v * tyy + k * Ty) * ny
    return out
