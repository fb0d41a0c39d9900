"""Tensor-product flux reconstruction for the 2D compressible Navier-Stokes equations.

Arrays are laid out as ``(4, ney, nex, n, n)``: variable, element row,
element column, then the y and x solution-point indices. Each direction is
handled by one routine written for the x axis; the y axis reuses it on a
transposed view.

Interface conventions (LDG with zero penalty):

* the common solution for the gradient is taken from the lower-coordinate
  side of an interface (west for x faces, south for y faces);
* the common viscous flux is taken from the opposite, upper side;
* on a physical boundary the common solution is the boundary (ghost) state
  and the viscous flux is the interior one.
"""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..fr_core import build_correction_gradients, build_nodal_basis
from ..sfd import SfdState, build_propagator, scatter_velocities, select_velocities
from ..masking import penalize_ns
from .gas import (
    PositivityError,
    check_admissible,
    inviscid_flux,
    primitives,
    sound_speed,
    conserved,
    viscous_flux,
)


@dataclass
class FlowField:
    U: np.ndarray
    t: float = 0.0
    step: int = 0

    def copy(self):
        return FlowField(self.U.copy(), self.t, self.step)


@dataclass(frozen=True)
class _Ops:
    D: np.ndarray
    DT: np.ndarray
    lL: np.ndarray
    lR: np.ndarray
    gL: np.ndarray
    gR: np.ndarray


@lru_cache(maxsize=None)
def _ops(P):
    b = build_nodal_basis(P)
    c = build_correction_gradients(P, b.nodes)
    return _Ops(
        D=b.diff_matrix,
        DT=np.ascontiguousarray(b.diff_matrix.T),
        lL=b.boundary_interp_left,
        lR=b.boundary_interp_right,
        gL=c.g_left,
        gR=c.g_right,
    )


def _swap(A):
    """x <-> y view of a volume array (..., ney, nex, n, n)."""
    return A.swapaxes(-4, -3).swapaxes(-2, -1)


def _swap_face(A):
    """x <-> y view of a face array (..., e_row, e_along, n)."""
    return A.swapaxes(-3, -2)


# ----- boundary states ---------------------------------------------------------

class FarField:
    """One-dimensional Riemann-invariant far field normal to the boundary."""

    def __init__(self, gas):
        self.gas = gas
        self.U_inf = gas.freestream()

    def ghost(self, Ui, nx, ny):
        g = self.gas.gamma
        rho_i, u_i, v_i, p_i = primitives(Ui, g)
        c_i = sound_speed(rho_i, p_i, g)
        rho_o, u_o, v_o, p_o = (float(a) for a in primitives(self.U_inf, g))
        c_o = float(np.sqrt(g * p_o / rho_o))
        un_i = u_i * nx + v_i * ny
        un_o = u_o * nx + v_o * ny
        k = 2.0 / (g - 1.0)
        r_out = np.where(un_o <= -c_o, un_o + k * c_o, un_i + k * c_i)
        r_in = np.where(un_i >= c_i, un_i - k * c_i, un_o - k * c_o)
        un_b = 0.5 * (r_out + r_in)
        c_b = 0.25 * (g - 1.0) * (r_out - r_in)
        out = un_b > 0
        s = np.where(out, p_i / rho_i**g, p_o / rho_o**g)
        ut = np.where(out, -u_i * ny + v_i * nx, -u_o * ny + v_o * nx)
        rho_b = (c_b * c_b / (g * s)) ** (1.0 / (g - 1.0))
        p_b = rho_b * c_b * c_b / g
        u_b = un_b * nx - ut * ny
        v_b = un_b * ny + ut * nx
        return conserved(rho_b, u_b, v_b, p_b, g)


class Periodic:
    """Marker: wrap both directions."""


def _boundary_for(mesh, bc):
    if mesh.periodic or isinstance(bc, Periodic):
        return None
    if bc is None:
        raise ValueError("a non-periodic mesh needs a boundary treatment")
    return bc


# ----- interface fluxes --------------------------------------------------------

def rusanov_flux(UL, UR, normal, gamma):
    """Local Lax-Friedrichs flux across a face with unit normal pointing from L to R."""
    nx, ny = normal
    rl, ul, vl, pl = primitives(UL, gamma)
    rr, ur, vr, pr = primitives(UR, gamma)
    if np.any(rl <= 0) or np.any(pl <= 0) or np.any(rr <= 0) or np.any(pr <= 0):
        raise PositivityError("inadmissible state entering the Riemann solver")
    sl = np.abs(ul * nx + vl * ny) + sound_speed(rl, pl, gamma)
    sr = np.abs(ur * nx + vr * ny) + sound_speed(rr, pr, gamma)
    smax = np.maximum(sl, sr)
    return 0.5 * (inviscid_flux(UL, nx, ny, gamma) + inviscid_flux(UR, nx, ny, gamma)) - 0.5 * smax * (UR - UL)


def ldg_viscous_flux(minus, plus, normal, gas):
    """Common viscous flux: the upper-side (``plus``) trace, zero penalty.

    ``minus``/``plus`` are tuples (U, Ux, Uy) on each side of the face; the
    minus side is only consulted for its shape, which keeps the call symmetric
    with the inviscid solver.
    """
    U, Ux, Uy = plus
    return viscous_flux(U, Ux, Uy, normal[0], normal[1], gas)


def ldg_solution_trace(U_minus, U_plus):
    """Common solution for the gradient: lower-side trace."""
    return U_minus


# ----- one-directional FR machinery --------------------------------------------

def _faces(A, ops):
    return A @ ops.lL, A @ ops.lR


def _pair(left_faces, right_faces, periodic):
    """Interface arrays (..., rows, e+1, n) of the lower and upper traces.

    Boundary slots without a neighbour are filled with the interior trace and
    overwritten by the caller.
    """
    lower = np.concatenate([right_faces[..., -1:, :], right_faces], axis=-2)
    upper = np.concatenate([left_faces, left_faces[..., :1, :]], axis=-2)
    if not periodic:
        lower[..., 0, :] = left_faces[..., 0, :]
        upper[..., -1, :] = right_faces[..., -1, :]
    return lower, upper


def _reconstruct(A, common, ops, h):
    """d/dx of the corrected polynomial given common values at all interfaces."""
    aL, aR = _faces(A, ops)
    jumpL = common[..., :-1, :] - aL
    jumpR = common[..., 1:, :] - aR
    dA = A @ ops.DT + jumpL[..., None] * ops.gL + jumpR[..., None] * ops.gR
    return dA * (2.0 / h)[:, None, None]


class _Direction:
    """Interface data of one direction, stored in x-like (possibly swapped) layout."""

    def __init__(self, U, ops, h, normal, periodic, boundary):
        self.ops = ops
        self.h = h
        self.normal = normal
        self.periodic = periodic
        self.boundary = boundary
        uL, uR = _faces(U, ops)
        self.lower, self.upper = _pair(uL, uR, periodic)
        if boundary is not None:
            nx, ny = normal
            self.interior_hi = self.lower[..., -1, :].copy()
            self.ghost_lo = boundary.ghost(self.upper[..., 0, :], -nx, -ny)
            self.ghost_hi = boundary.ghost(self.interior_hi, nx, ny)
            self.lower[..., 0, :] = self.ghost_lo
            self.upper[..., -1, :] = self.ghost_hi

    def gradient(self, U):
        common = ldg_solution_trace(self.lower, self.upper)
        if self.boundary is not None:
            common = common.copy()
            common[..., -1, :] = self.ghost_hi
        return _reconstruct(U, common, self.ops, self.h)

    def common_flux(self, gas, grads=None):
        F = rusanov_flux(self.lower, self.upper, self.normal, gas.gamma)
        if grads is None:
            return F
        Qx, Qy = grads
        qx_lo, qx_hi = _pair(*_faces(Qx, self.ops), self.periodic)
        qy_lo, qy_hi = _pair(*_faces(Qy, self.ops), self.periodic)
        u_hi = self.upper
        if self.boundary is not None:
            u_hi = u_hi.copy()
            u_hi[..., -1, :] = self.interior_hi
        Fv = ldg_viscous_flux((self.lower, qx_lo, qy_lo), (u_hi, qx_hi, qy_hi), self.normal, gas)
        return F - Fv

    def divergence(self, F, Fcommon):
        return _reconstruct(F, Fcommon, self.ops, self.h)


# ----- spatial operator --------------------------------------------------------

def _directions(U, mesh, bc):
    ops = _ops(mesh.P)
    boundary = _boundary_for(mesh, bc)
    dirx = _Direction(U, ops, mesh.dx, (1.0, 0.0), mesh.periodic, boundary)
    diry = _Direction(_swap(U), ops, mesh.dy, (0.0, 1.0), mesh.periodic, boundary)
    return dirx, diry


def fr_gradient(U, mesh, bc=None):
    """Corrected physical gradients (Qx, Qy) of every conserved variable."""
    dirx, diry = _directions(U, mesh, bc)
    return dirx.gradient(U), _swap(diry.gradient(_swap(U)))


def rhs_eval(U, mesh, gas, bc=None, check=True):
    """dU/dt = -div F for the unpenalized equations."""
    if check:
        check_admissible(U, gas.gamma, "before flux evaluation")
    dirx, diry = _directions(U, mesh, bc)
    Fx = inviscid_flux(U, 1.0, 0.0, gas.gamma)
    Fy = inviscid_flux(U, 0.0, 1.0, gas.gamma)
    if gas.viscous:
        Qx = dirx.gradient(U)
        Qy = _swap(diry.gradient(_swap(U)))
        Fx -= viscous_flux(U, Qx, Qy, 1.0, 0.0, gas)
        Fy -= viscous_flux(U, Qx, Qy, 0.0, 1.0, gas)
        Fcx = dirx.common_flux(gas, (Qx, Qy))
        Fcy = diry.common_flux(gas, (_swap(Qx), _swap(Qy)))
    else:
        Fcx = dirx.common_flux(gas)
        Fcy = diry.common_flux(gas)
    div = dirx.divergence(Fx, Fcx)
    div += _swap(diry.divergence(_swap(Fy), Fcy))
    return -div


# ----- time integration --------------------------------------------------------

# Carpenter & Kennedy (1994) five-stage fourth-order 2N-storage coefficients
LSERK_A = (
    0.0,
    -567301805773.0 / 1357537059087.0,
    -2404267990393.0 / 2016746695238.0,
    -3550918686646.0 / 2091501179385.0,
    -1275806237668.0 / 842570457699.0,
)
LSERK_B = (
    1432997174477.0 / 9575080441755.0,
    5161836677717.0 / 13612068292357.0,
    1720146321549.0 / 2090206949498.0,
    3134564353537.0 / 4481467310338.0,
    2277821191437.0 / 14882151754819.0,
)
SCHEMES = ("rk3", "lserk")


def rk_step(U, dt, rhs, scheme="rk3"):
    """One explicit step of dU/dt = rhs(U)."""
    if scheme == "rk3":
        U1 = U + dt * rhs(U)
        U2 = 0.75 * U + 0.25 * (U1 + dt * rhs(U1))
        return U / 3.0 + (2.0 / 3.0) * (U2 + dt * rhs(U2))
    if scheme == "lserk":
        V = np.array(U, dtype=np.result_type(U, float), copy=True)
        K = np.zeros_like(V)
        for a, b in zip(LSERK_A, LSERK_B):
            K = a * K + dt * rhs(V)
            V = V + b * K
        return V
    raise ValueError(f"unknown scheme {scheme!r}; choose from {SCHEMES}")


def stability_polynomial(z, scheme):
    """Amplification factor of ``scheme`` for dU/dt = lambda U, z = lambda dt."""
    if scheme == "rk3":
        return 1 + z + z**2 / 2 + z**3 / 6
    if scheme == "lserk":
        return rk_step(np.asarray(1.0 + 0j), 1.0, lambda u: z * u, "lserk")
    raise ValueError(f"unknown scheme {scheme!r}")


# ----- penalization and SFD wrapper --------------------------------------------

@dataclass
class StepInfo:
    """Momentum removed by the SFD wrapper during the last step (rate, per point)."""
    sfd_rate: np.ndarray | None = None


def penalty_half_step(U, dt, chi, pen):
    """Explicit half-step U + (dt/2) S(U); identity when penalization is off."""
    if pen is None or not pen.enabled:
        return U
    return U + 0.5 * dt * penalize_ns(U, chi, pen)


def strang_step(U, dt, rhs, chi=None, pen=None, scheme="rk3", sfd=None, sfd_state=None,
                mask=None, gamma=1.4, info=None):
    """Half penalty, full RK transport, half penalty, then the SFD wrapper.

    Returns ``(U_next, sfd_state)``. ``mask`` (a MaskField) is needed only
    when SFD is enabled. ``info``, if given, receives the SFD momentum rate.
    """
    U1 = penalty_half_step(U, dt, chi, pen)
    if U1 is not U:
        check_admissible(U1, gamma, "after first penalty half-step")
    U2 = rk_step(U1, dt, rhs, scheme)
    check_admissible(U2, gamma, "after transport step")
    U3 = penalty_half_step(U2, dt, chi, pen)
    if U3 is not U2:
        check_admissible(U3, gamma, "after second penalty half-step")
    if sfd is None or not sfd.enabled:
        if info is not None:
            info.sfd_rate = None
        return U3, sfd_state
    if mask is None or sfd_state is None:
        raise ValueError("SFD needs the solid mask and a filter state")
    prop = build_propagator(sfd, dt)
    phi = select_velocities(U3, mask)
    q, q_bar = prop.apply(phi, sfd_state.q_bar)
    U4 = scatter_velocities(q, U3, mask)
    if info is not None:
        rate = np.zeros((2,) + U.shape[1:])
        rate[0] = (U4[1] - U3[1]) / dt
        rate[1] = (U4[2] - U3[2]) / dt
        info.sfd_rate = rate
    return U4, SfdState(q=q, q_bar=q_bar)
