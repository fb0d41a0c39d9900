"""Time-domain runs of the penalized 1D advection problem.

Domain [-1, 1], periodic, N equal elements, a solid slab (0, delta) of Z whole
elements. Penalization enters the RK3 stages directly; SFD, when enabled, is
applied once per step through the exact propagator.
"""
import logging
import math
import statistics
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .eigen import AdvectionProblem, rk3_amplification
from .masking import PenalizationParams
from .sfd import SfdParams, SfdState, build_propagator

log = logging.getLogger(__name__)

BLOWUP = 1e6


class NumericalInstability(RuntimeError):
    def __init__(self, step, msg="solution blew up"):
        super().__init__(f"{msg} at step {step}")
        self.step = step


@dataclass(frozen=True)
class AdvectionRun:
    N: int = 40
    P: int = 3
    c: float = 1.0
    lam: float = 1.0
    Z: int = 1
    k_nondim: float = 0.3223
    dt: float = 1e-5
    t_final: float = 1.1
    pen: PenalizationParams = field(default_factory=PenalizationParams.disabled)
    sfd: SfdParams = field(default_factory=SfdParams.off)
    snapshot_every: int | None = None

    @property
    def h(self):
        return 2.0 / self.N

    @property
    def delta(self):
        return self.Z * self.h

    @property
    def khat(self):
        return self.k_nondim * (self.P + 1) / self.h

    def problem(self):
        return AdvectionProblem(N=self.N, P=self.P, c=self.c, lam=self.lam, Z=self.Z)


@dataclass
class AdvectionResult:
    x: np.ndarray
    u: np.ndarray
    t: float
    steps: int
    delta: float
    sfd_state: SfdState | None = None
    history: list = field(default_factory=list)

    @property
    def flow_error(self):
        return flow_error(self.x, self.u, self.delta)

    @property
    def solid_error(self):
        return solid_error(self.x, self.u, self.delta)


def initial_condition(run, x):
    """Sine wave of the effective wavenumber laid over the fluid only.

    The phase runs along the fluid coordinate (the slab removed), so with the
    default wavenumber the fluid holds a whole number of wavelengths and the
    periodic wrap is continuous. Solid points start at zero.
    """
    xi = np.where(x <= 0.0, x + 1.0, x + 1.0 - run.delta)
    u = np.sin(run.khat * xi)
    if run.Z > 0:
        u[(x > 0.0) & (x < run.delta)] = 0.0
    return u


def penalized_matrix(run):
    problem = run.problem()
    _, ops = problem.operators()
    from .eigen import assemble_periodic

    M = assemble_periodic(ops, run.N, 0.0).matrix.real.copy()
    if run.pen.enabled and run.Z > 0:
        solid = np.flatnonzero(problem.mask().values)
        M[solid, solid] -= 1.0 / run.pen.eta
    return M


def step_matrix(run, dt=None):
    """Linear map of one full step on the augmented state (u, qbar)."""
    dt = run.dt if dt is None else dt
    M = penalized_matrix(run)
    A = rk3_amplification(M, dt)
    if not run.sfd.enabled or run.Z == 0:
        return A
    solid = np.flatnonzero(run.problem().mask().values)
    n, ns = A.shape[0], solid.size
    prop = build_propagator(run.sfd, dt)
    G = np.zeros((n + ns, n + ns))
    G[:n, :n] = A
    G[solid, :n] = prop.a11 * A[solid]
    G[solid, n + np.arange(ns)] = prop.a12
    G[n:, :n] = prop.a21 * A[solid]
    G[n + np.arange(ns), n + np.arange(ns)] = prop.a22
    return G


def spectral_radius(G):
    return float(np.max(np.abs(np.linalg.eigvals(G))))


def is_stable(run, dt, tol=1e-10):
    return spectral_radius(step_matrix(run, dt)) <= 1.0 + tol


def _stiffest_scale(run):
    scales = [run.h / (abs(run.c) * (run.P + 1) ** 2)]
    if run.pen.enabled:
        scales.append(run.pen.eta)
    if run.sfd.enabled and run.sfd.chi_f > 0:
        scales.append(1.0 / run.sfd.chi_f)
    return min(scales)


def max_stable_dt(run, dt0=None, rtol=1e-3, dt_cap=1.0):
    """Largest stable step by doubling then bisection on the step-matrix spectral radius."""
    if dt0 is None:
        dt0 = 0.1 * _stiffest_scale(run)
    if not is_stable(run, dt0):
        raise ValueError(f"unstable already at dt={dt0}")
    lo = dt0
    hi = 2 * dt0
    while is_stable(run, hi):
        lo, hi = hi, 2 * hi
        if hi > dt_cap:
            return dt_cap
    while (hi - lo) > rtol * lo:
        mid = 0.5 * (lo + hi)
        if is_stable(run, mid):
            lo = mid
        else:
            hi = mid
    return lo


def run(config):
    """March the penalized advection problem to ``config.t_final``."""
    problem = config.problem()
    x = problem.points()
    u = initial_condition(config, x)
    M = penalized_matrix(config)
    nfull = int(math.floor(config.t_final / config.dt + 1e-9))
    rest = config.t_final - nfull * config.dt
    schedule = [(config.dt, nfull)]
    if rest > 1e-12 * max(config.t_final, 1.0):
        schedule.append((rest, 1))

    use_sfd = config.sfd.enabled and config.Z > 0
    solid = np.flatnonzero(problem.mask().values) if use_sfd else None
    q_bar = np.zeros(solid.size) if use_sfd else None
    history = []
    step = 0
    t = 0.0
    for dt, count in schedule:
        A = rk3_amplification(M, dt)
        if use_sfd:
            p = build_propagator(config.sfd, dt)
            a11, a12, a21, a22 = p.a11, p.a12, p.a21, p.a22
        for _ in range(count):
            u = A @ u
            if use_sfd:
                phi = u[solid]
                u[solid] = a11 * phi + a12 * q_bar
                q_bar = a21 * phi + a22 * q_bar
            step += 1
            t += dt
            if step % 1000 == 0 and not (np.all(np.isfinite(u)) and np.max(np.abs(u)) < BLOWUP):
                raise NumericalInstability(step)
            if config.snapshot_every and step % config.snapshot_every == 0:
                history.append((t, u.copy()))
    if not (np.all(np.isfinite(u)) and np.max(np.abs(u)) < BLOWUP):
        raise NumericalInstability(step)
    state = SfdState(q=u[solid].copy(), q_bar=q_bar) if use_sfd else None
    return AdvectionResult(x=x, u=u, t=t, steps=step, delta=config.delta, sfd_state=state, history=history)


def flow_error(x, u, delta):
    """RMS of u over fluid points in [delta, 1]; the exact solution there is zero."""
    sel = (x >= delta) & (x <= 1.0)
    return float(np.sqrt(np.mean(np.asarray(u)[sel] ** 2)))


def solid_error(x, u, delta):
    """RMS of u over points of the slab (0, delta)."""
    sel = (x >= 0.0) & (x <= delta)
    return float(np.sqrt(np.mean(np.asarray(u)[sel] ** 2)))


@dataclass
class SweepRow:
    eta: float | None
    chi_f: float | None
    delta: float | None
    dt: float
    flow_error: float = math.nan
    solid_error: float = math.nan
    max_stable_dt: float = math.nan
    wall_time: float = math.nan
    status: str = "ok"

    def as_dict(self):
        return dict(self.__dict__)


def configure(base, eta=None, chi_f=None, delta=None):
    pen = PenalizationParams(eta=eta)
    sfd = SfdParams(chi_f=chi_f, delta=delta) if chi_f is not None else SfdParams.off()
    return replace(base, pen=pen, sfd=sfd)


def timed_run(config, repeats=1):
    times = []
    res = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        res = run(config)
        times.append(time.perf_counter() - t0)
    return res, statistics.median(times)


def sweep(combos, base=None, repeats=1, calibrate_dt=True):
    """One run per (eta, chi_f, delta) combination; failures are recorded per row.

    With ``calibrate_dt`` each run uses min(base.dt, max_stable_dt / 2).
    """
    base = base or AdvectionRun()
    rows = []
    for eta, chi_f, delta in combos:
        cfg = configure(base, eta, chi_f, delta)
        row = SweepRow(eta=eta, chi_f=chi_f, delta=delta, dt=cfg.dt)
        try:
            row.max_stable_dt = max_stable_dt(cfg)
            if calibrate_dt:
                cfg = replace(cfg, dt=min(cfg.dt, 0.5 * row.max_stable_dt))
                row.dt = cfg.dt
            res, row.wall_time = timed_run(cfg, repeats)
            row.flow_error = res.flow_error
            row.solid_error = res.solid_error
        except (NumericalInstability, ValueError) as exc:
            row.status = f"failed: {exc}"
            log.warning("sweep row eta=%s chi_f=%s delta=%s failed: %s", eta, chi_f, delta, exc)
        rows.append(row)
    return rows


def _match_parameter(target, error_of, lo, hi, rtol=1e-3, maxiter=60):
    """Geometric bisection for p in [lo, hi] with error_of(p) = target, error increasing in p."""
    elo, ehi = error_of(lo), error_of(hi)
    if not (elo <= target <= ehi):
        raise ValueError(f"target error {target:.3e} outside [{elo:.3e}, {ehi:.3e}]")
    for _ in range(maxiter):
        mid = math.sqrt(lo * hi)
        if error_of(mid) > target:
            hi = mid
        else:
            lo = mid
        if hi / lo - 1.0 < rtol:
            break
    return math.sqrt(lo * hi)


@dataclass
class CostRow:
    method: str
    eta: float | None
    chi_f: float | None
    flow_error: float
    max_stable_dt: float
    wall_time: float


def cost_study(eta, base=None, sfd_delta=100.0, repeats=3):
    """Same-error comparison of combined, penalty-only and SFD-only schemes.

    The combined scheme (chi_f = 1/eta) sets the target flow error; the single
    methods are tuned to reach it, and each reports its largest stable step and
    the wall time of a run at half that step.
    """
    base = base or AdvectionRun()

    def measure(cfg):
        dt_max = max_stable_dt(cfg)
        cfg = replace(cfg, dt=min(base.dt, 0.5 * dt_max))
        res = run(cfg)
        return res.flow_error, dt_max, cfg

    comb_cfg = configure(base, eta, 1.0 / eta, sfd_delta)
    target, dt_comb, cfg = measure(comb_cfg)
    _, wt_comb = timed_run(cfg, repeats)
    rows = [CostRow("combined", eta, 1.0 / eta, target, dt_comb, wt_comb)]

    eta_pen = _match_parameter(target, lambda e: measure(configure(base, e))[0], eta / 20, eta)
    err, dt_pen, cfg = measure(configure(base, eta_pen))
    _, wt = timed_run(cfg, repeats)
    rows.append(CostRow("penalty", eta_pen, None, err, dt_pen, wt))

    inv_chi = _match_parameter(target, lambda s: measure(configure(base, None, 1.0 / s, sfd_delta))[0],
                               eta / 20, eta)
    err, dt_sfd, cfg = measure(configure(base, None, 1.0 / inv_chi, sfd_delta))
    _, wt = timed_run(cfg, repeats)
    rows.append(CostRow("sfd", None, 1.0 / inv_chi, err, dt_sfd, wt))
    return rows
