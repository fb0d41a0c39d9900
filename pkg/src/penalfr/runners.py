"""Config-driven runs for each mode, writing their tables into an output directory."""
import dataclasses
import itertools
import os

import numpy as np

from . import advect1d, eigen
from .config import emit_config
from .io import checkpoint, restore, write_csv, write_snapshot
from .masking import PenalizationParams
from .sfd import SfdParams


def _pen(eta):
    return PenalizationParams(eta=eta) if eta is not None else PenalizationParams.disabled()


def _sfd(chi_f, delta):
    return SfdParams(chi_f=chi_f, delta=delta) if chi_f is not None else SfdParams.off()


def prepare_output(cfg, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "config.resolved.yaml"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(emit_config(cfg))
    return out_dir


# ----- eigenanalysis -------------------------------------------------------

CRITICAL_COLUMNS = ("dt", "scheme", "eta_critical", "ratio")


def run_eigen(cfg, out_dir, kind):
    e = cfg.eigen
    problem = eigen.AdvectionProblem(N=e.N, P=e.P, c=e.c, lam=e.lam, Z=e.Z)
    K = eigen.default_k_grid(e.k_points)
    pen, sfd = _pen(e.eta), _sfd(e.chi_f, e.sfd_delta)
    if kind == "semi":
        spec = eigen.semi_discrete(problem, pen, sfd, K)
    elif kind == "full":
        spec = eigen.fully_discrete(problem, e.dt, pen, sfd, K)
    else:
        raise ValueError(f"unknown analysis {kind!r}")
    path = os.path.join(out_dir, f"eigen_{kind}.csv")
    write_csv(path, eigen.MODE_TABLE_COLUMNS, eigen.mode_table(spec))
    write_csv(
        os.path.join(out_dir, f"eigen_{kind}_physical.csv"),
        ("k_nondim", "dispersion", "dissipation", "ambiguous"),
        zip(spec.k_nondim, spec.dispersion, spec.dissipation, spec.ambiguous),
    )
    if kind == "full" and e.search_dt:
        rows = []
        for dt in e.search_dt:
            for scheme in e.search_schemes:
                r = eigen.critical_parameter_search(dt, scheme, sfd_delta=e.sfd_delta, problem=problem)
                rows.append((r.dt, r.scheme, r.eta_critical, r.ratio))
        write_csv(os.path.join(out_dir, "critical.csv"), CRITICAL_COLUMNS, rows)
    return spec


# ----- advection -----------------------------------------------------------

def advect_run_config(a):
    return advect1d.AdvectionRun(
        N=a.N, P=a.P, c=a.c, lam=a.lam, Z=a.Z, k_nondim=a.k_nondim, dt=a.dt, t_final=a.t_final,
        pen=_pen(a.eta), sfd=_sfd(a.chi_f, a.sfd_delta), snapshot_every=a.snapshot_every or None,
    )


def run_advect(cfg, out_dir, sweep=None):
    base = advect_run_config(cfg.advect)
    if sweep is not None:
        combos = list(itertools.product(sweep.eta, sweep.chi_f, sweep.sfd_delta))
        rows = advect1d.sweep(combos, base, repeats=sweep.repeats, calibrate_dt=sweep.calibrate_dt)
        cols = [f.name for f in dataclasses.fields(advect1d.SweepRow)]
        write_csv(os.path.join(out_dir, "sweep.csv"), cols, [[r.as_dict()[c] for c in cols] for r in rows])
        return rows
    res = advect1d.run(base)
    write_csv(os.path.join(out_dir, "solution.csv"), ("x", "u"), zip(res.x, res.u))
    write_csv(os.path.join(out_dir, "errors.csv"), ("t", "flow_error", "solid_error"),
              [(res.t, res.flow_error, res.solid_error)])
    for t, u in res.history:
        write_csv(os.path.join(out_dir, f"snapshot_t{t:.6f}.csv"), ("x", "u"), zip(res.x, u))
    return res


# ----- Navier-Stokes -------------------------------------------------------

CASE_DEFAULTS = {
    "naca0012": {"Re": 5000.0, "M": 0.5, "preset": "coarse"},
    "cylinder": {"Re": 100.0, "M": 0.2, "preset": "full"},
    "vortex": {"Re": None, "M": 1.0, "preset": None},
}


def build_case(ns):
    """CaseSetup from an :class:`~penalfr.config.Ns2dConfig`."""
    from .ns2d import cases
    from .ns2d.diagnostics import locate_probe

    d = CASE_DEFAULTS[ns.case]
    Re = ns.gas.Re if ns.gas.Re is not None else d["Re"]
    M = ns.gas.M if ns.gas.M is not None else d["M"]
    m = ns.mesh
    custom = m.core_x is not None
    preset = m.preset or d["preset"]
    stretch = tuple(m.stretch) if m.stretch is not None else None
    if ns.case == "naca0012":
        spec = None
        if custom:
            spec = (tuple(m.core_x), tuple(m.core_y), m.size, tuple(m.domain_x), tuple(m.domain_y),
                    tuple(m.counts) if m.counts else None)
        setup = cases.naca_case(
            mesh=preset, P=ns.P, eta=ns.ibm.eta, chi_f=ns.ibm.chi_f, sfd_delta=ns.ibm.sfd_delta,
            dt=ns.dt, scheme=ns.scheme, Re=Re, M=M, alpha=ns.gas.alpha, stretch=stretch, mesh_spec=spec,
        )
    elif ns.case == "cylinder":
        kw = {} if ns.dt is None else {"dt": ns.dt}
        setup = cases.cylinder_case(
            domain=preset, P=ns.P, eta=ns.ibm.eta, chi_f=ns.ibm.chi_f, sfd_delta=ns.ibm.sfd_delta,
            scheme=ns.scheme, Re=Re, M=M, stretch=stretch, kick=ns.kick,
            core_size=m.size or 0.03, **kw,
        )
    else:
        setup = cases.vortex_case(P=ns.P, ne=m.elements or 16, dt=ns.dt, scheme=ns.scheme, gamma=ns.gas.gamma)
    if ns.probes is not None:
        setup.probes = [locate_probe(setup.mesh, x, y) for x, y in ns.probes]
    return setup


def _write_ns2d_tables(sim, out_dir):
    from .ns2d.diagnostics import amplitude, strouhal, surface_cp, trimmed_mean

    h = sim.history
    s = sim.setup
    n_probes = len(s.probes)
    write_csv(os.path.join(out_dir, "history.csv"), list(h), h)
    write_csv(os.path.join(out_dir, "forces.csv"), ("t", "cl", "cd"), zip(h["t"], h["cl"], h["cd"]))
    pcols = ["t"] + [f"{c}{k}" for k in range(n_probes) for c in ("u", "v")]
    write_csv(os.path.join(out_dir, "probes.csv"), pcols, {c: h[c] for c in pcols})
    write_csv(
        os.path.join(out_dir, "probe_locations.csv"),
        ("probe", "x_requested", "y_requested", "x", "y"),
        [(k, *p.requested, *p.snapped) for k, p in enumerate(s.probes)],
    )
    summary = {"t_end": sim.t, "steps": sim.step}
    if s.mask.solid_count and len(h["cl"]) >= 8:
        summary["cl_mean"] = trimmed_mean(h["cl"])
        summary["cd_mean"] = trimmed_mean(h["cd"])
        summary["cl_amplitude"] = amplitude(h["cl"])
        try:
            dt_rec = h["t"][1] - h["t"][0]
            summary["strouhal"] = strouhal(h["cl"], dt_rec, s.length)
        except (ValueError, IndexError):
            summary["strouhal"] = float("nan")
    write_csv(os.path.join(out_dir, "summary.csv"), list(summary), [list(summary.values())])
    if s.mask.solid_count:
        x, y, cp = surface_cp(sim.U, s.mesh, s.chi, s.gas)
        xc = x + 0.5 if s.name == "naca0012" else x
        write_csv(os.path.join(out_dir, "cp.csv"), ("x_c", "y", "cp"), zip(xc, y, cp))
    return summary


def run_ns2d(cfg, out_dir, resume=None, progress=None):
    from .ns2d.simulation import Simulation

    ns = cfg.ns2d
    setup = build_case(ns)
    mesh_hash = setup.mesh.mesh_hash()
    if resume is not None:
        st = restore(resume, expected_mesh_hash=mesh_hash)
        sim = Simulation(setup, U=st["U"], t=st["t"], step=st["step"], sfd_state=st["sfd_state"],
                         history=st["history"])
    else:
        sim = Simulation(setup)
    out = ns.output

    def after_step(s):
        if out.snapshot_every and s.step % out.snapshot_every == 0:
            write_snapshot(os.path.join(out_dir, f"snapshot_{s.step:08d}.npz"), setup.mesh, s.U, s.t)
        if out.checkpoint_every and s.step % out.checkpoint_every == 0:
            checkpoint(os.path.join(out_dir, f"checkpoint_{s.step:08d}.npz"), s.U, s.sfd_state,
                       s.step, s.t, mesh_hash, s.history)
        if progress is not None:
            progress(s)

    sim.run(t_final=ns.t_final, record_every=out.record_every, callback=after_step)
    checkpoint(os.path.join(out_dir, "checkpoint_final.npz"), sim.U, sim.sfd_state, sim.step, sim.t,
               mesh_hash, sim.history)
    _write_ns2d_tables(sim, out_dir)
    return sim


def mesh_report(setup):
    m = setup.mesh
    return {"nex": m.nex, "ney": m.ney, "points": int(np.prod(m.shape)), "solid_points": setup.mask.solid_count}
