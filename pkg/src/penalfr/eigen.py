"""Eigensolution analysis of the penalized / SFD advection discretization.

Convention used throughout: the semi-discrete system is du/dt = M u and a
Bloch wave exp(i k x) evolves as exp(lambda t). Dispersion is -Im(lambda)/c,
dissipation is Re(lambda); both are reported against the nondimensional
wavenumber k h / (P + 1). Positive dissipation means growth.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .fr_core import build_correction_gradients, build_element_operators, build_nodal_basis
from .masking import MaskField, PenalizationParams, mask_slab
from .sfd import SfdParams

SOLID_MODE_RTOL = 1e-8
# ln|g| below this counts as neutral; filter modes sit at |g| = 1 - O(dt/delta)
# and eigenvalue round-off alone moves ln|g| by ~1e-15
GROWTH_TOL = 1e-12
AMBIGUITY_FRACTION = 0.01


class AmbiguousModeError(RuntimeError):
    pass


@dataclass
class GlobalOperator:
    matrix: np.ndarray
    N: int
    P: int
    k: float
    r: float = 0.0
    T: float = 1.0
    n_filter: int = 0
    solid_points: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))

    @property
    def bloch_phase(self):
        return np.exp(-2j * self.k * self.T), np.exp(2j * self.k * self.T)

    @property
    def n_flow(self):
        return self.N * (self.P + 1)


@dataclass
class ModeSpectrum:
    k_nondim: np.ndarray
    eigenvalues: list
    physical_mode: np.ndarray
    ambiguous: np.ndarray
    solid_modes: np.ndarray
    h: float
    P: int
    c: float = 1.0

    @property
    def dispersion(self):
        """Nondimensional numerical wavenumber of the physical mode."""
        return -self.physical_mode.imag / self.c * self.h / (self.P + 1)

    @property
    def dissipation(self):
        """Nondimensional damping rate of the physical mode (<= 0 is stable)."""
        return self.physical_mode.real / self.c * self.h / (self.P + 1)


def _block(e, n):
    return slice(e * n, (e + 1) * n)


def assemble_periodic(ops, N, k, T=1.0):
    """Block-circulant FR advection matrix with Bloch phase factors on the wrap."""
    if N < 2:
        raise ValueError(f"need at least two elements, got N={N}")
    n = ops.order + 1
    M = np.zeros((N * n, N * n), dtype=complex)
    for e in range(N):
        M[_block(e, n), _block(e, n)] = ops.C
        if e > 0:
            M[_block(e, n), _block(e - 1, n)] += ops.L
        if e < N - 1:
            M[_block(e, n), _block(e + 1, n)] += ops.R
    M[_block(0, n), _block(N - 1, n)] += np.exp(-2j * k * T) * ops.L
    M[_block(N - 1, n), _block(0, n)] += np.exp(2j * k * T) * ops.R
    return GlobalOperator(matrix=M, N=N, P=ops.order, k=float(k), T=T)


def _solid_elements(mask, N, n):
    vals = np.asarray(mask.values).reshape(N, n)
    full = vals.all(axis=1)
    partial = vals.any(axis=1) & ~full
    if partial.any():
        raise ValueError(f"mask cuts through elements {np.flatnonzero(partial).tolist()}")
    return np.flatnonzero(full)


def assemble_ibm_sfd(ops, N, k, mask, pen, sfd=None, T=1.0):
    """Periodic matrix plus penalization on solid points and, optionally, the
    filtered-velocity block of SFD appended after the flow unknowns."""
    G = assemble_periodic(ops, N, k, T)
    n = ops.order + 1
    _solid_elements(mask, N, n)
    solid = np.flatnonzero(np.asarray(mask.values).ravel())
    M = G.matrix
    if pen is not None and pen.enabled:
        M[solid, solid] -= 1.0 / pen.eta
    n_filter = 0
    if sfd is not None and sfd.enabled:
        n_filter = solid.size
        nf = G.n_flow
        big = np.zeros((nf + n_filter, nf + n_filter), dtype=complex)
        big[:nf, :nf] = M
        fb = np.arange(nf, nf + n_filter)
        big[solid, solid] -= sfd.chi_f
        big[solid, fb] += sfd.chi_f
        big[fb, solid] += 1.0 / sfd.delta
        big[fb, fb] -= 1.0 / sfd.delta
        M = big
    return GlobalOperator(matrix=M, N=N, P=ops.order, k=float(k), r=mask.solid_ratio,
                          T=T, n_filter=n_filter, solid_points=solid)


def eigensystem(M, vectors=True):
    if vectors:
        return linalg.eig(M, check_finite=False)
    return linalg.eigvals(M, check_finite=False), None


def plane_wave_projection(vecs, lam, x, fluid, k, c=1.0):
    """Normalized overlap of each eigenvector with exp(i k x) on fluid points.

    Each eigenvector's exponential envelope exp(-Re(lambda) x / c) is divided
    out first; without that, strongly damped modes concentrate all their weight
    in the last few elements and the projection cannot tell branches apart.
    """
    xf = x[fluid]
    wave = np.exp(1j * k * xf)
    V = vecs[: x.size][fluid]
    log_env = np.outer(xf, lam.real) / c
    env = np.exp(log_env - log_env.max(axis=0, keepdims=True))
    W = V * env
    num = np.abs(np.conj(wave) @ W)
    den = np.linalg.norm(W, axis=0) * np.linalg.norm(wave)
    return num / np.where(den > 0, den, 1.0)


def extract_physical_mode(eigvals, eigvecs, x, fluid, khat, c=1.0, previous=None):
    """Select the physical eigenvalue at each wavenumber.

    The candidate set holds every eigenvector whose plane-wave overlap is
    within 1% of the best one. A single candidate wins outright; with several,
    the one nearest the previous sample's choice is taken and the sample is
    flagged as ambiguous.

    Returns (values, ambiguous_flags).
    """
    values = np.empty(len(khat), dtype=complex)
    flags = np.zeros(len(khat), dtype=bool)
    prev = previous
    for j, (lam, vec, kk) in enumerate(zip(eigvals, eigvecs, khat)):
        proj = plane_wave_projection(vec, lam, x, fluid, kk, c)
        best = proj.max()
        cand = np.flatnonzero(proj >= (1.0 - AMBIGUITY_FRACTION) * best)
        if cand.size > 1:
            flags[j] = True
            ref = prev if prev is not None else -1j * c * kk
            pick = cand[np.argmin(np.abs(lam[cand] - ref))]
        else:
            pick = cand[0]
        values[j] = lam[pick]
        prev = values[j]
    return values, flags


def find_solid_modes(eigvals, rtol=SOLID_MODE_RTOL):
    """Eigenvalues present, to relative tolerance ``rtol``, at every wavenumber."""
    if len(eigvals) < 3:
        raise ValueError("need at least three wavenumber samples")
    ref = np.asarray(eigvals[0])
    keep = []
    for lam in ref:
        scale = max(abs(lam), 1e-300)
        if all(np.min(np.abs(np.asarray(other) - lam)) <= rtol * scale for other in eigvals[1:]):
            keep.append(lam)
    return np.array(keep, dtype=complex)


def rk3_amplification(M, dt):
    """A = I + dt M + (dt M)^2/2 + (dt M)^3/6, the RK3 update for du/dt = M u."""
    Z = dt * np.asarray(M)
    Z2 = Z @ Z
    return np.eye(Z.shape[0]) + Z + Z2 / 2.0 + Z2 @ Z / 6.0


def rk3_polynomial(z):
    return 1.0 + z + z**2 / 2.0 + z**3 / 6.0


@dataclass
class FullyDiscreteResult:
    g: np.ndarray
    dt: float
    vectors: np.ndarray | None = None

    @property
    def dissipation(self):
        with np.errstate(divide="ignore"):
            return np.log(np.abs(self.g)) / self.dt

    @property
    def unstable(self):
        return bool(np.any(np.log(np.abs(self.g)) > GROWTH_TOL))


def fully_discrete_spectrum(M, dt, vectors=False):
    if not dt > 0:
        raise ValueError("dt must be positive")
    mat = M.matrix if isinstance(M, GlobalOperator) else M
    g, v = eigensystem(rk3_amplification(mat, dt), vectors=vectors)
    return FullyDiscreteResult(g=g, dt=float(dt), vectors=v)


# ---------------------------------------------------------------------------
# advection test problem: domain [-1, 1], slab (0, delta) of Z whole elements


@dataclass(frozen=True)
class AdvectionProblem:
    N: int = 40
    P: int = 3
    c: float = 1.0
    lam: float = 1.0
    Z: int = 1

    @property
    def h(self):
        return 2.0 / self.N

    @property
    def delta(self):
        return self.Z * self.h

    @property
    def r(self):
        return self.Z / self.N

    def operators(self):
        basis = build_nodal_basis(self.P)
        corr = build_correction_gradients(self.P, basis.nodes)
        return basis, build_element_operators(basis, corr, self.h, self.c, self.lam)

    def points(self):
        basis = build_nodal_basis(self.P)
        left = -1.0 + self.h * np.arange(self.N)
        return (left[:, None] + 0.5 * self.h * (basis.nodes[None, :] + 1.0)).ravel()

    def mask(self):
        if self.Z == 0:
            return MaskField(np.zeros(self.N * (self.P + 1), dtype=np.int8), "slab")
        return MaskField(mask_slab(self.points(), self.delta), "slab")

    def khat_from_nondim(self, K):
        return np.asarray(K) * (self.P + 1) / self.h

    def global_operator(self, khat, pen=None, sfd=None):
        _, ops = self.operators()
        k_bloch = khat * (1.0 - self.r)
        if self.Z == 0 and (pen is None or not pen.enabled) and (sfd is None or not sfd.enabled):
            return assemble_periodic(ops, self.N, k_bloch)
        return assemble_ibm_sfd(ops, self.N, k_bloch, self.mask(), pen, sfd)


def default_k_grid(n=64):
    """Uniform nondimensional wavenumbers in (0, pi]."""
    return np.linspace(np.pi / n, np.pi, n)


def semi_discrete(problem, pen=None, sfd=None, k_nondim=None, solid_rtol=SOLID_MODE_RTOL):
    """Semi-discrete sweep over wavenumbers; returns a :class:`ModeSpectrum`."""
    K = default_k_grid() if k_nondim is None else np.asarray(k_nondim, dtype=float)
    khat = problem.khat_from_nondim(K)
    x = problem.points()
    fluid = problem.mask().values == 0
    vals, vecs = [], []
    for kk in khat:
        lam, v = eigensystem(problem.global_operator(kk, pen, sfd).matrix)
        vals.append(lam)
        vecs.append(v)
    phys, flags = extract_physical_mode(vals, vecs, x, fluid, khat, problem.c)
    solid = find_solid_modes(vals, solid_rtol) if len(K) >= 3 else np.zeros(0, complex)
    return ModeSpectrum(k_nondim=K, eigenvalues=vals, physical_mode=phys, ambiguous=flags,
                        solid_modes=solid, h=problem.h, P=problem.P, c=problem.c)


@dataclass
class FullySpectrum:
    k_nondim: np.ndarray
    g: list
    physical_g: np.ndarray
    ambiguous: np.ndarray
    solid_g: np.ndarray
    dt: float
    h: float
    P: int
    c: float = 1.0

    @property
    def dissipation(self):
        return np.log(np.abs(self.physical_g)) / self.dt * self.h / ((self.P + 1) * self.c)

    @property
    def dispersion(self):
        return -np.angle(self.physical_g) / self.dt * self.h / ((self.P + 1) * self.c)

    @property
    def solid_dissipation(self):
        return np.log(np.abs(self.solid_g)) / self.dt * self.h / ((self.P + 1) * self.c)


def fully_discrete(problem, dt, pen=None, sfd=None, k_nondim=None, solid_rtol=SOLID_MODE_RTOL):
    """RK3 fully-discrete sweep; physical mode picked on eigenvectors of A."""
    K = default_k_grid() if k_nondim is None else np.asarray(k_nondim, dtype=float)
    khat = problem.khat_from_nondim(K)
    x = problem.points()
    fluid = problem.mask().values == 0
    gs, lams, vecs = [], [], []
    for kk in khat:
        res = fully_discrete_spectrum(problem.global_operator(kk, pen, sfd), dt, vectors=True)
        gs.append(res.g)
        # log g / dt plays the role of lambda for the envelope in the projection
        with np.errstate(divide="ignore"):
            lams.append(np.log(res.g.astype(complex)) / dt)
        vecs.append(res.vectors)
    picked, flags = extract_physical_mode(lams, vecs, x, fluid, khat, problem.c)
    phys = np.exp(picked * dt)
    solid = find_solid_modes(gs, solid_rtol) if len(K) >= 3 else np.zeros(0, complex)
    return FullySpectrum(k_nondim=K, g=gs, physical_g=phys, ambiguous=flags, solid_g=solid,
                         dt=float(dt), h=problem.h, P=problem.P, c=problem.c)


def max_solid_dissipation(problem, dt, pen, sfd, k_nondim=(0.25, 1.5, 2.75), solid_rtol=1e-6):
    """Largest growth rate ln|g|/dt among wavenumber-constant modes."""
    khat = problem.khat_from_nondim(np.asarray(k_nondim))
    gs = [fully_discrete_spectrum(problem.global_operator(kk, pen, sfd), dt).g for kk in khat]
    solid = find_solid_modes(gs, solid_rtol)
    if solid.size == 0:
        raise RuntimeError("no wavenumber-constant modes found")
    return float(np.max(np.log(np.abs(solid)) / dt))


@dataclass
class CriticalResult:
    dt: float
    scheme: str
    eta_critical: float
    sfd_delta: float | None

    @property
    def ratio(self):
        return self.eta_critical / self.dt


def _scheme_params(scheme, eta, sfd_delta):
    if scheme == "penalty":
        return PenalizationParams(eta=eta), None
    if scheme == "sfd":
        return PenalizationParams.disabled(), SfdParams(chi_f=1.0 / eta, delta=sfd_delta)
    if scheme == "combined":
        return PenalizationParams(eta=eta), SfdParams(chi_f=1.0 / eta, delta=sfd_delta)
    raise ValueError(f"unknown scheme {scheme!r}")


def critical_parameter_search(dt, scheme="penalty", sfd_delta=100.0, problem=None,
                              bracket=(0.2, 2.0), tol=1e-3):
    """Smallest stable eta (or 1/chi_f) at fixed dt, by bisection.

    ``scheme`` is ``'penalty'`` or ``'sfd'`` (the single methods) or
    ``'combined'`` with chi_f = 1/eta. ``bracket`` and ``tol`` are in units of dt.
    """
    problem = problem or AdvectionProblem()

    def unstable(ratio):
        pen, sfd = _scheme_params(scheme, ratio * dt, sfd_delta)
        return max_solid_dissipation(problem, dt, pen, sfd) * dt > GROWTH_TOL

    lo, hi = bracket
    if not (unstable(lo) and not unstable(hi)):
        raise ValueError(f"no sign change of solid-mode dissipation in eta/dt in {bracket}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if unstable(mid):
            lo = mid
        else:
            hi = mid
    return CriticalResult(dt=dt, scheme=scheme, eta_critical=hi * dt,
                          sfd_delta=None if scheme == "penalty" else sfd_delta)


# ---------------------------------------------------------------------------
# tabular export

MODE_TABLE_COLUMNS = ("k_nondim", "mode_id", "class", "dispersion", "dissipation")


def _classify(lam, physical, solid, rtol):
    cls = np.full(len(lam), "other", dtype=object)
    for s in solid:
        hit = np.abs(lam - s) <= rtol * max(abs(s), 1e-300)
        cls[hit] = "solid"
    cls[int(np.argmin(np.abs(lam - physical)))] = "physical"
    return cls


def mode_table(spectrum, solid_rtol=1e-6):
    """Rows (k_nondim, mode_id, class, dispersion, dissipation) for every eigenvalue.

    Works for both semi-discrete (:class:`ModeSpectrum`) and RK3 fully
    discrete (:class:`FullySpectrum`) sweeps; fully discrete values use
    log(g)/dt as the equivalent continuous eigenvalue. Modes are ordered by
    real part, then imaginary part, at each wavenumber.
    """
    scale = spectrum.h / ((spectrum.P + 1) * spectrum.c)
    if isinstance(spectrum, FullySpectrum):
        with np.errstate(divide="ignore"):
            lams = [np.log(np.asarray(g, dtype=complex)) / spectrum.dt for g in spectrum.g]
            phys = np.log(spectrum.physical_g) / spectrum.dt
            solid = np.log(spectrum.solid_g) / spectrum.dt if len(spectrum.solid_g) else spectrum.solid_g
    else:
        lams, phys, solid = spectrum.eigenvalues, spectrum.physical_mode, spectrum.solid_modes
    rows = []
    for K, lam, p in zip(spectrum.k_nondim, lams, phys):
        lam = np.asarray(lam, dtype=complex)
        order = np.lexsort((lam.imag, lam.real))
        lam = lam[order]
        cls = _classify(lam, p, solid, solid_rtol)
        for i, (z, c) in enumerate(zip(lam, cls)):
            rows.append((float(K), i, c, float(-z.imag * scale), float(z.real * scale)))
    return rows
