"""Ready-made setups: NACA0012 airfoil, circular cylinder, isentropic vortex."""
from dataclasses import dataclass, field

import numpy as np

from ..masking import MaskField, PenalizationParams, mask_circle, mask_naca0012
from ..sfd import SfdParams
from .diagnostics import locate_probe
from .gas import GasModel, conserved
from .mesh import CartesianMesh, build_mesh, stretch_for_count, uniform_mesh
from .solver import FarField, Periodic


@dataclass
class CaseSetup:
    name: str
    mesh: CartesianMesh
    gas: GasModel
    mask: MaskField
    pen: PenalizationParams
    sfd: SfdParams
    scheme: str
    dt: float
    length: float
    bc: object
    U0: np.ndarray
    probes: list = field(default_factory=list)

    @property
    def chi(self):
        return self.mask.values


def stretched_mesh(core_x, core_y, size, domain_x, domain_y, P, stretch=None, counts=None):
    """Mesh with either explicit stretch ratios or ratios tuned to hit element counts."""
    if stretch is None:
        if counts is None:
            raise ValueError("give either stretch ratios or target element counts")
        stretch = (
            stretch_for_count(core_x, size, domain_x, counts[0]),
            stretch_for_count(core_y, size, domain_y, counts[1]),
        )
    return build_mesh(core_x, core_y, size, domain_x, domain_y, stretch, P)


def _params(eta, chi_f, sfd_delta):
    pen = PenalizationParams(eta=eta) if eta is not None else PenalizationParams.disabled()
    sfd = SfdParams(chi_f=chi_f, delta=sfd_delta) if chi_f else SfdParams.off()
    return pen, sfd


def freestream_field(mesh, gas):
    return np.broadcast_to(gas.freestream()[:, None, None, None, None], (4,) + mesh.shape).copy()


NACA_MESHES = {
    # core extents, core size, domain, target element counts
    "coarse": ((-0.51, 0.51), (-0.07, 0.07), 0.01, (-20.0, 40.0), (-20.0, 20.0), (174, 68)),
    "fine": ((-0.51, 0.51), (-0.07, 0.07), 0.003, (-20.0, 40.0), (-20.0, 20.0), (453, 124)),
}
NACA_DT = {"coarse": 5e-4, "fine": 7.5e-5}
NACA_PROBES = ((0.0225, 0.015), (0.555, 0.015))


def naca_case(mesh="coarse", P=2, eta=1e-2, chi_f=None, sfd_delta=100.0, dt=None,
              scheme="lserk", Re=5000.0, M=0.5, alpha=0.0, stretch=None, mesh_spec=None):
    """Airfoil spanning x in [-0.5, 0.5], chord 1.

    Default steps are 5e-4 (coarse) and 7.5e-5 (fine). With P=2 the coarse
    step is only stable under LSERK, hence the default scheme.
    """
    if dt is None:
        dt = NACA_DT[mesh] if mesh_spec is None else 5e-4
    cx, cy, size, dx, dy, counts = NACA_MESHES[mesh] if mesh_spec is None else mesh_spec
    m = stretched_mesh(cx, cy, size, dx, dy, P, stretch, counts)
    gas = GasModel(Re=Re, M=M, alpha=alpha)
    X, Y = m.points()
    mask = MaskField(mask_naca0012(X, Y, leading_edge=-0.5, chord=1.0), "naca0012")
    pen, sfd = _params(eta, chi_f, sfd_delta)
    return CaseSetup(
        name="naca0012", mesh=m, gas=gas, mask=mask, pen=pen, sfd=sfd, scheme=scheme, dt=dt,
        length=1.0, bc=FarField(gas), U0=freestream_field(m, gas),
        probes=[locate_probe(m, x, y) for x, y in NACA_PROBES],
    )


CYLINDER_DOMAINS = {
    "full": ((-30.0, 50.0), (-30.0, 30.0), (184, 178)),
    "reduced": ((-10.0, 20.0), (-10.0, 10.0), None),
}
CYLINDER_PROBES = ((0.36, 0.23), (0.75, 0.23))


def wake_kick(mesh, gas, amplitude, center=(1.5, 0.0), radius=0.5):
    """Cross-stream velocity bump behind the body; breaks top-bottom symmetry to seed shedding."""
    X, Y = mesh.points()
    r2 = ((X - center[0]) ** 2 + (Y - center[1]) ** 2) / radius**2
    return amplitude * np.exp(-r2)


def cylinder_case(domain="full", P=2, eta=5e-4, chi_f=2e3, sfd_delta=100.0, dt=4e-4,
                  scheme="lserk", Re=100.0, M=0.2, core_size=0.03, stretch=None, kick=0.05):
    """Unit-diameter cylinder centred at the origin.

    As for the airfoil, TVD RK3 is not stable at the default step once the
    impulsive start reaches the body, so LSERK is the default.
    """
    dx, dy, counts = CYLINDER_DOMAINS[domain]
    if counts is None and stretch is None:
        # same core and, by default, the ratios tuned for the full domain
        fx, fy, fc = CYLINDER_DOMAINS["full"]
        stretch = (
            stretch_for_count((-1.0, 1.0), core_size, fx, fc[0]),
            stretch_for_count((-1.0, 1.0), core_size, fy, fc[1]),
        )
    m = stretched_mesh((-1.0, 1.0), (-1.0, 1.0), core_size, dx, dy, P, stretch, counts)
    gas = GasModel(Re=Re, M=M)
    X, Y = m.points()
    mask = MaskField(mask_circle(X, Y, (0.0, 0.0), 1.0), "circle")
    pen, sfd = _params(eta, chi_f, sfd_delta)
    U0 = freestream_field(m, gas)
    if kick:
        U0[2] += U0[0] * wake_kick(m, gas, kick)
        U0[3] = conserved(U0[0], U0[1] / U0[0], U0[2] / U0[0], gas.p_inf, gas.gamma)[3]
    return CaseSetup(
        name="cylinder", mesh=m, gas=gas, mask=mask, pen=pen, sfd=sfd, scheme=scheme, dt=dt,
        length=1.0, bc=FarField(gas), U0=U0,
        probes=[locate_probe(m, x, y) for x, y in CYLINDER_PROBES],
    )


def isentropic_vortex(X, Y, t, gamma=1.4, L=10.0, beta=5.0, speed=1.0):
    """Exact vortex translating in x on the periodic square [-L/2, L/2]^2."""
    x = X - speed * t
    x = (x + 0.5 * L) % L - 0.5 * L
    f = np.exp(0.5 * (1.0 - x * x - Y * Y))
    u = speed - beta / (2 * np.pi) * f * Y
    v = beta / (2 * np.pi) * f * x
    T = 1.0 - (gamma - 1.0) * beta**2 / (8 * gamma * np.pi**2) * f * f
    rho = T ** (1.0 / (gamma - 1.0))
    return conserved(rho, u, v, rho**gamma, gamma)


def vortex_case(P=2, ne=16, L=10.0, dt=None, cfl=0.1, scheme="lserk", gamma=1.4):
    """Inviscid isentropic vortex; M is set so that p_inf = 1/gamma matches the vortex."""
    m = uniform_mesh((-0.5 * L, 0.5 * L), (-0.5 * L, 0.5 * L), ne, ne, P, periodic=True)
    gas = GasModel(gamma=gamma, M=1.0)
    X, Y = m.points()
    if dt is None:
        dt = cfl * (L / ne) / (2 * P + 1)
    return CaseSetup(
        name="vortex", mesh=m, gas=gas, mask=MaskField(np.zeros(m.shape, np.int8), "none"),
        pen=PenalizationParams.disabled(), sfd=SfdParams.off(), scheme=scheme, dt=dt,
        length=1.0, bc=Periodic(), U0=isentropic_vortex(X, Y, 0.0, gamma, L),
    )
