"""Encapsulated selective frequency damping restricted to solid points.

The damping subsystem

    dq/dt    = -chi_f (q - qbar)
    dqbar/dt = (q - qbar) / delta

is linear with a 2x2 block structure, so one step of it is applied exactly
through its matrix exponential. The stepper that produced ``Phi(q)`` is never
touched; it only hands over its result.
"""
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SfdParams:
    chi_f: float = 0.0
    delta: float = 1.0
    enabled: bool = True

    def __post_init__(self):
        if self.enabled:
            if self.chi_f < 0:
                raise ValueError(f"chi_f must be >= 0, got {self.chi_f}")
            if not self.delta > 0:
                raise ValueError(f"filter width must be positive, got {self.delta}")

    @property
    def cutoff_frequency(self):
        return 1.0 / self.delta

    @classmethod
    def off(cls):
        return cls(chi_f=0.0, delta=1.0, enabled=False)


@dataclass
class SfdState:
    q: np.ndarray
    q_bar: np.ndarray

    def __post_init__(self):
        self.q = np.asarray(self.q, dtype=float)
        self.q_bar = np.asarray(self.q_bar, dtype=float)
        if self.q.shape != self.q_bar.shape:
            raise ValueError(f"q {self.q.shape} and q_bar {self.q_bar.shape} differ in shape")

    def residual(self):
        return float(np.linalg.norm(self.q - self.q_bar))


@dataclass(frozen=True)
class SfdPropagator:
    a11: float
    a12: float
    a21: float
    a22: float
    dt: float

    def as_matrix(self):
        return np.array([[self.a11, self.a12], [self.a21, self.a22]])

    def apply(self, q, q_bar):
        return self.a11 * q + self.a12 * q_bar, self.a21 * q + self.a22 * q_bar


def build_propagator(params, dt):
    """Exact exp(L dt) of the damping subsystem, one scalar per block."""
    if dt < 0:
        raise ValueError("dt must be >= 0")
    if not params.delta > 0:
        raise ValueError("filter width must be positive")
    chi, delta = params.chi_f, params.delta
    cd = chi * delta
    decay = np.exp(-(chi + 1.0 / delta) * dt)
    f = 1.0 / (1.0 + cd)
    return SfdPropagator(
        a11=f * (1.0 + cd * decay),
        a12=f * cd * (1.0 - decay),
        a21=f * (1.0 - decay),
        a22=f * (cd + decay),
        dt=float(dt),
    )


def system_matrix(params):
    """The 2x2 generator acting on (q, qbar) per point."""
    chi, delta = params.chi_f, params.delta
    return np.array([[-chi, chi], [1.0 / delta, -1.0 / delta]])


def select_velocities(U, mask):
    """Velocities at solid points, ordered by (point, component).

    ``U`` is either a conserved field with variables on axis 0 (rho, rho u,
    rho v, ...) or, for scalar advection, the transported unknown itself with
    the same shape as the mask.
    """
    solid = np.asarray(mask.values, dtype=bool)
    U = np.asarray(U, dtype=float)
    if U.shape == solid.shape:
        return U[solid].copy()
    rho = U[0][solid]
    if np.any(rho <= 0):
        raise ValueError("nonpositive density at a solid point")
    mom = np.stack([U[1][solid], U[2][solid]], axis=-1)
    return (mom / rho[:, None]).ravel()


def scatter_velocities(q, U, mask):
    """Write solid-point velocities back into a copy of ``U``.

    For conserved fields, momentum becomes rho*q and total energy changes by
    the kinetic energy difference only, so pressure is left unchanged.
    """
    solid = np.asarray(mask.values, dtype=bool)
    U = np.array(U, dtype=float)
    q = np.asarray(q, dtype=float)
    ns = int(solid.sum())
    if U.shape == solid.shape:
        if q.shape != (ns,):
            raise ValueError(f"expected {ns} solid values, got shape {q.shape}")
        U[solid] = q
        return U
    if q.size != 2 * ns:
        raise ValueError(f"expected {2 * ns} velocity entries, got {q.size}")
    if ns == 0:
        return U
    q = q.reshape(ns, 2)
    rho = U[0][solid]
    ke_old = 0.5 * (U[1][solid] ** 2 + U[2][solid] ** 2) / rho
    ke_new = 0.5 * rho * (q[:, 0] ** 2 + q[:, 1] ** 2)
    U[1][solid] = rho * q[:, 0]
    U[2][solid] = rho * q[:, 1]
    U[3][solid] = U[3][solid] - ke_old + ke_new
    return U


def init_filtered(mask, u_s=(0.0, 0.0), scalar=False):
    """Initial filtered vector: the target solid velocity at every solid point."""
    ns = mask.solid_count
    if scalar:
        u0 = u_s[0] if np.ndim(u_s) else u_s
        return np.full(ns, float(u0))
    return np.tile(np.asarray(u_s, dtype=float), ns)


def sfd_step(state, phi_of_q, prop):
    """Advance (q, qbar) given the stepper output Phi(q)."""
    phi_of_q = np.asarray(phi_of_q, dtype=float)
    if phi_of_q.shape != state.q_bar.shape:
        raise ValueError(f"Phi(q) shape {phi_of_q.shape} does not match q_bar {state.q_bar.shape}")
    q, q_bar = prop.apply(phi_of_q, state.q_bar)
    return SfdState(q=q, q_bar=q_bar)
