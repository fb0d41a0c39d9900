"""Force, probe, spectrum and surface-pressure post-processing."""
from dataclasses import dataclass

import numpy as np

from ..masking import penalize_ns
from .gas import inviscid_flux, pressure, viscous_flux
from .solver import FarField, _ops, fr_gradient


@dataclass(frozen=True)
class Forces:
    cl: float
    cd: float
    fx: float
    fy: float


def compute_forces(U, mesh, chi, pen, sfd_contribution=None, length=1.0, q_inf=0.5, alpha=0.0):
    """Lift and drag from the momentum the immersed-boundary terms remove.

    The body force is minus the quadrature of the momentum source over the
    solid points; ``sfd_contribution`` is the SFD momentum rate (2, ...) when
    the filter is active. Drag is positive along the free stream.
    """
    chi = np.asarray(chi)
    if not np.any(chi):
        raise ValueError("empty mask: no solid points to integrate")
    w = mesh.quadrature_weights()
    src = np.zeros((2,) + chi.shape)
    if pen is not None and pen.enabled:
        src += penalize_ns(U, chi, pen)[1:3]
    if sfd_contribution is not None:
        src += sfd_contribution
    fx = -float(np.sum(w * src[0]))
    fy = -float(np.sum(w * src[1]))
    return _coefficients(fx, fy, alpha, q_inf * length)


def _coefficients(fx, fy, alpha, scale):
    a = np.radians(alpha)
    drag = fx * np.cos(a) + fy * np.sin(a)
    lift = -fx * np.sin(a) + fy * np.cos(a)
    return Forces(cl=lift / scale, cd=drag / scale, fx=fx, fy=fy)


def control_volume_forces(U_now, U_prev, dt, mesh, gas, box, length=1.0, q_inf=0.5, alpha=0.0):
    """Momentum-balance alternative: body force from a rectangular control volume.

    ``box`` = (i0, i1, j0, j1) element index bounds (half-open) enclosing the
    body. F = -d/dt(int rho u) - (surface flux of rho u u + p n - tau n).
    Inviscid surface terms are evaluated from element-interior traces on the
    box faces; viscous stresses use the corrected gradients.
    """
    i0, i1, j0, j1 = box
    if not (0 <= i0 < i1 <= mesh.nex and 0 <= j0 < j1 <= mesh.ney):
        raise ValueError(f"control box {box} outside the mesh")
    ops = _ops(mesh.P)
    wq = mesh.basis.quad_weights
    wv = mesh.quadrature_weights()
    sl = (slice(None), slice(j0, j1), slice(i0, i1))
    dmom = (U_now[1:3][sl] - U_prev[1:3][sl]) / dt
    unsteady = np.array([np.sum(wv[j0:j1, i0:i1] * dmom[0]), np.sum(wv[j0:j1, i0:i1] * dmom[1])])
    bc = None if mesh.periodic else FarField(gas)
    Qx, Qy = fr_gradient(U_now, mesh, bc) if gas.viscous else (np.zeros_like(U_now),) * 2

    def face_flux(A, Ax, Ay, nx, ny):
        return inviscid_flux(A, nx, ny, gas.gamma) - viscous_flux(A, Ax, Ay, nx, ny, gas)

    flux = np.zeros(2)
    # east/west faces: traces in x, integrate along y with dy/2 weights
    for i, side, sgn in ((i1 - 1, ops.lR, 1.0), (i0, ops.lL, -1.0)):
        A = U_now[:, j0:j1, i] @ side
        Ax = Qx[:, j0:j1, i] @ side
        Ay = Qy[:, j0:j1, i] @ side
        F = face_flux(A, Ax, Ay, sgn, 0.0)
        jac = 0.5 * mesh.dy[j0:j1, None] * wq[None, :]
        flux += np.array([np.sum(jac * F[1]), np.sum(jac * F[2])])
    for j, side, sgn in ((j1 - 1, ops.lR, 1.0), (j0, ops.lL, -1.0)):
        A = np.einsum("j,vejx->vex", side, U_now[:, j, i0:i1])
        Ax = np.einsum("j,vejx->vex", side, Qx[:, j, i0:i1])
        Ay = np.einsum("j,vejx->vex", side, Qy[:, j, i0:i1])
        F = face_flux(A, Ax, Ay, 0.0, sgn)
        jac = 0.5 * mesh.dx[i0:i1, None] * wq[None, :]
        flux += np.array([np.sum(jac * F[1]), np.sum(jac * F[2])])
    fx, fy = (float(f) for f in -(unsteady + flux))
    return _coefficients(fx, fy, alpha, q_inf * length)


@dataclass(frozen=True)
class Probe:
    requested: tuple
    snapped: tuple
    index: tuple


def locate_probe(mesh, x, y):
    """Nearest solution point to (x, y); no interpolation."""
    if not mesh.contains(x, y):
        raise ValueError(f"probe ({x}, {y}) lies outside the domain")
    X, Y = mesh.points()
    d2 = (X - x) ** 2 + (Y - y) ** 2
    idx = np.unravel_index(int(np.argmin(d2)), d2.shape)
    return Probe(requested=(float(x), float(y)), snapped=(float(X[idx]), float(Y[idx])),
                 index=tuple(int(i) for i in idx))


def probe_sample(U, probe):
    """(u, v) at the probe's snapped point."""
    i = probe.index
    rho = U[(0,) + i]
    return float(U[(1,) + i] / rho), float(U[(2,) + i] / rho)


def strouhal(signal, dt, length=1.0, speed=1.0, trim=0.5, noise_ratio=10.0):
    """Dominant frequency of ``signal`` as a Strouhal number f L / V.

    The first ``trim`` fraction is discarded, the mean removed and a Hann
    window applied; the spectral peak is refined by a parabola through the
    log-magnitudes of its neighbours.
    """
    s = np.asarray(signal, dtype=float)
    s = s[int(trim * len(s)):]
    if len(s) < 8:
        raise ValueError("signal too short for a spectrum")
    s = s - s.mean()
    n = len(s)
    pad = 1 << int(np.ceil(np.log2(n)) + 2)
    spec = np.abs(np.fft.rfft(s * np.hanning(n), pad))
    freqs = np.fft.rfftfreq(pad, dt)
    k = int(np.argmax(spec[1:])) + 1
    floor = np.median(spec[1:])
    if not spec[k] > noise_ratio * floor:
        raise ValueError("no dominant spectral peak above the noise floor")
    shift = 0.0
    if 1 <= k < len(spec) - 1:
        a, b, c = np.log(spec[k - 1:k + 2] + 1e-300)
        den = a - 2 * b + c
        if den != 0:
            shift = 0.5 * (a - c) / den
    f = (k + shift) * (freqs[1] - freqs[0])
    return f * length / speed


def lattice(A):
    """Global point lattice of a volume array (..., ney, nex, n, n) -> (..., ney*n, nex*n)."""
    s = A.shape
    B = np.moveaxis(A, -3, -2)
    return B.reshape(s[:-4] + (s[-4] * s[-2], s[-3] * s[-1]))


def surface_cp(U, mesh, chi, gas, q_inf=0.5):
    """Pressure coefficient at fluid points with a solid 4-neighbour on the point lattice.

    Returns arrays (x, y, cp) sorted by x.
    """
    solid = lattice(np.asarray(chi)).astype(bool)
    X, Y = mesh.points()
    X, Y = lattice(X), lattice(Y)
    p = lattice(pressure(U, gas.gamma))
    nb = np.zeros_like(solid)
    nb[1:, :] |= solid[:-1, :]
    nb[:-1, :] |= solid[1:, :]
    nb[:, 1:] |= solid[:, :-1]
    nb[:, :-1] |= solid[:, 1:]
    sel = nb & ~solid
    x, y = X[sel], Y[sel]
    cp = (p[sel] - gas.p_inf) / q_inf
    order = np.lexsort((y, x))
    return x[order], y[order], cp[order]


def amplitude(signal, trim=0.5):
    """Half peak-to-peak of the trimmed signal."""
    s = np.asarray(signal, dtype=float)[int(trim * len(signal)):]
    return 0.5 * float(s.max() - s.min())


def trimmed_mean(signal, trim=0.5):
    s = np.asarray(signal, dtype=float)
    return float(s[int(trim * len(s)):].mean())


def trimmed_rms(signal, trim=0.75):
    """RMS about zero of the final ``1 - trim`` fraction."""
    s = np.asarray(signal, dtype=float)[int(trim * len(signal)):]
    return float(np.sqrt(np.mean(s * s)))
