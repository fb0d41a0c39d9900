"""Data generators for each reproduced figure and table.

Each ``fig*`` / case function writes its CSV tables into ``out_dir``.
``quick=True`` shrinks grids and run lengths so the whole pipeline can be
exercised in seconds; the numbers it produces are not meant to be compared.
"""
import dataclasses
import itertools
import logging
import os

import numpy as np

from . import advect1d, eigen
from .config import Ns2dConfig, RunConfig, IbmConfig, MeshConfig, OutputConfig
from .io import write_csv
from .masking import PenalizationParams
from .sfd import SfdParams

log = logging.getLogger(__name__)

SWEEP_COLUMNS = [f.name for f in dataclasses.fields(advect1d.SweepRow)]


def _advect_base(quick, t_quick=0.05):
    base = advect1d.AdvectionRun()
    return dataclasses.replace(base, t_final=t_quick) if quick else base


def fig3(out_dir, quick=False):
    """Solution profiles at t_final for penalty-only and combined runs."""
    base = _advect_base(quick)
    cases = {
        "none": (None, None, None),
        "eta1e-3": (1e-3, None, None),
        "eta1e-4": (1e-4, None, None),
        "eta1e-3_chi1e5_delta1e-2": (1e-3, 1e5, 1e-2),
        "eta1e-3_chi1e5_delta1": (1e-3, 1e5, 1.0),
    }
    rows = []
    for name, (eta, chi_f, delta) in cases.items():
        cfg = advect1d.configure(base, eta, chi_f, delta)
        res = advect1d.run(cfg)
        write_csv(os.path.join(out_dir, f"fig3_{name}.csv"), ("x", "u"), zip(res.x, res.u))
        rows.append((name, eta, chi_f, delta, res.flow_error, res.solid_error))
    write_csv(os.path.join(out_dir, "fig3_errors.csv"),
              ("case", "eta", "chi_f", "delta", "flow_error", "solid_error"), rows)
    return rows


FIG4_CHI = (1e2, 1e3, 1e4, 1e5)
FIG4_DELTA = (1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0, 1e3)
FIG4_GROUPS = {"sfd_only": None, "eta1e-3": 1e-3, "eta1e-5": 1e-5}


def fig4(out_dir, quick=False):
    """Flow and solid error over (chi_f, delta) for three penalization levels."""
    base = _advect_base(quick)
    chis = FIG4_CHI[::3] if quick else FIG4_CHI
    deltas = FIG4_DELTA[::4] if quick else FIG4_DELTA
    out = {}
    for group, eta in FIG4_GROUPS.items():
        combos = list(itertools.product([eta], chis, deltas))
        rows = advect1d.sweep(combos, base)
        write_csv(os.path.join(out_dir, f"fig4_{group}.csv"), SWEEP_COLUMNS,
                  [[r.as_dict()[c] for c in SWEEP_COLUMNS] for r in rows])
        out[group] = rows
    return out


FIG5_DELTAS = (0.01, 0.1, 1.0, 10.0)


def fig5(out_dir, quick=False):
    """Semi-discrete physical-mode curves, eta=1e-3, chi_f=1e3, several filter widths."""
    problem = eigen.AdvectionProblem()
    K = eigen.default_k_grid(16 if quick else 64)
    pen = PenalizationParams(eta=1e-3)
    variants = [("no_sfd", None)] + [(f"delta{d:g}", SfdParams(chi_f=1e3, delta=d)) for d in FIG5_DELTAS]
    cols = ["k_nondim"]
    data = {}
    for name, sfd in variants:
        spec = eigen.semi_discrete(problem, pen, sfd, K)
        data[f"dispersion_{name}"] = spec.dispersion
        data[f"dissipation_{name}"] = spec.dissipation
        cols += [f"dispersion_{name}", f"dissipation_{name}"]
    data["k_nondim"] = K
    write_csv(os.path.join(out_dir, "fig5.csv"), cols, data)
    return data


FIG6_RATIOS = (0.6, 0.65, 0.7, 0.703, 0.71, 0.75, 0.8, 1.0)


def fig6(out_dir, quick=False):
    """Fully discrete combined scheme at delta = dt = 1e-3 for eta around the stability limit."""
    dt, delta = 1e-3, 1e-3
    problem = eigen.AdvectionProblem()
    K = eigen.default_k_grid(16 if quick else 64)
    rows = []
    for ratio in FIG6_RATIOS[::2] if quick else FIG6_RATIOS:
        eta = ratio * dt
        spec = eigen.fully_discrete(problem, dt, PenalizationParams(eta=eta), SfdParams(1.0 / eta, delta), K)
        solid = float(np.max(spec.solid_dissipation)) if np.size(spec.solid_dissipation) else float("nan")
        for k, disp, diss in zip(spec.k_nondim, spec.dispersion, spec.dissipation):
            rows.append((ratio, eta, k, disp, diss, solid))
    write_csv(os.path.join(out_dir, "fig6.csv"),
              ("ratio", "eta", "k_nondim", "dispersion", "dissipation", "solid_dissipation"), rows)
    crit = eigen.critical_parameter_search(dt, "combined", sfd_delta=delta, problem=problem)
    write_csv(os.path.join(out_dir, "fig6_critical.csv"), ("dt", "scheme", "eta_critical", "ratio"),
              [(crit.dt, crit.scheme, crit.eta_critical, crit.ratio)])
    return rows, crit


FIG7_DTS = (1e-3, 1e-4, 1e-5)
FIG7_SCHEMES = ("penalty", "sfd", "combined")


def fig7(out_dir, quick=False):
    """Critical eta/dt per step size and the solid-mode growth rate against eta/dt."""
    problem = eigen.AdvectionProblem()
    dts = FIG7_DTS[:1] if quick else FIG7_DTS
    crit_rows, curve_rows = [], []
    ratios = np.linspace(0.3, 1.0, 5 if quick else 36)
    for dt in dts:
        for scheme in FIG7_SCHEMES:
            r = eigen.critical_parameter_search(dt, scheme, sfd_delta=100.0, problem=problem)
            crit_rows.append((r.dt, r.scheme, r.eta_critical, r.ratio))
            for ratio in ratios:
                pen, sfd = eigen._scheme_params(scheme, ratio * dt, 100.0)
                g = eigen.max_solid_dissipation(problem, dt, pen, sfd)
                curve_rows.append((dt, scheme, ratio, g * dt))
    write_csv(os.path.join(out_dir, "fig7_critical.csv"), ("dt", "scheme", "eta_critical", "ratio"), crit_rows)
    write_csv(os.path.join(out_dir, "fig7_curves.csv"), ("dt", "scheme", "ratio", "solid_growth_per_step"),
              curve_rows)
    return crit_rows


FIG8_ETAS = (1e-3, 1e-4, 1e-5)


def fig8(out_dir, quick=False):
    """Largest stable step and wall time at matched error for the three schemes."""
    # shorter runs leave too little error spread to match against
    base = _advect_base(quick, t_quick=0.3)
    rows = []
    for eta in FIG8_ETAS[:1] if quick else FIG8_ETAS:
        for r in advect1d.cost_study(eta, base, repeats=1 if quick else 3):
            rows.append((eta, r.method, r.eta, r.chi_f, r.flow_error, r.max_stable_dt, r.wall_time))
    write_csv(os.path.join(out_dir, "fig8.csv"),
              ("target_eta", "method", "eta", "chi_f", "flow_error", "max_stable_dt", "wall_time"), rows)
    return rows


# ----- Navier-Stokes cases -------------------------------------------------

def _ns_run(out_dir, ns, quick):
    from .runners import prepare_output, run_ns2d

    if quick:
        ns = dataclasses.replace(ns, output=OutputConfig(record_every=1))
    cfg = RunConfig(mode="ns2d", output_dir=out_dir, ns2d=ns)
    prepare_output(cfg, out_dir)
    sim = run_ns2d(cfg, out_dir, progress=_progress_logger())
    return sim


def _progress_logger(every=1000):
    def report(sim):
        if sim.step % every == 0:
            log.info("step %d t=%.4f", sim.step, sim.t)
    return report


QUICK_STEPS = 5
NACA_VARIANTS = {
    "eta1e-2": IbmConfig(eta=1e-2),
    "eta5e-3": IbmConfig(eta=5e-3),
    "eta1e-2_sfd": IbmConfig(eta=1e-2, chi_f=1e2, sfd_delta=100.0),
}


def naca(out_dir, quick=False, t_final=20.0):
    """Airfoil at Re=5000, M=0.5 on the coarse mesh, with and without SFD."""
    sims = {}
    for name, ibm in NACA_VARIANTS.items():
        ns = Ns2dConfig(case="naca0012", P=2, scheme="lserk", ibm=ibm, t_final=t_final,
                        mesh=MeshConfig(preset="coarse"), output=OutputConfig(record_every=20))
        if quick:
            ns = dataclasses.replace(ns, t_final=QUICK_STEPS * 5e-4)
        sims[name] = _ns_run(os.path.join(out_dir, name), ns, quick)
    return sims


def cylinder(out_dir, quick=False, t_final=200.0):
    """Cylinder at Re=100, M=0.2, P=2 on the full (or, with quick, reduced) domain."""
    ns = Ns2dConfig(case="cylinder", P=2, dt=4e-4, t_final=t_final,
                    ibm=IbmConfig(eta=5e-4, chi_f=2e3, sfd_delta=100.0),
                    mesh=MeshConfig(preset="reduced" if quick else "full"),
                    output=OutputConfig(record_every=25))
    if quick:
        ns = dataclasses.replace(ns, t_final=QUICK_STEPS * 4e-4)
    return _ns_run(out_dir, ns, quick)


TABLE1_DT = {1: 6e-4, 2: 4e-4, 3: 1.5e-4, 4: 5e-5}


def table1(out_dir, quick=False, t_final=200.0):
    """Cylinder drag, lift amplitude and Strouhal number for P = 1..4, eta = dt."""
    from .io import read_csv

    rows = []
    for P, dt in TABLE1_DT.items():
        ns = Ns2dConfig(case="cylinder", P=P, dt=dt, t_final=QUICK_STEPS * dt if quick else t_final,
                        ibm=IbmConfig(eta=dt, chi_f=1.0 / dt, sfd_delta=100.0),
                        mesh=MeshConfig(preset="reduced" if quick else "full"),
                        output=OutputConfig(record_every=25))
        sub = os.path.join(out_dir, f"P{P}")
        _ns_run(sub, ns, quick)
        cols, vals = read_csv(os.path.join(sub, "summary.csv"))
        s = dict(zip(cols, vals[0]))
        rows.append((P, dt, s.get("cd_mean", float("nan")), s.get("cl_amplitude", float("nan")),
                     s.get("strouhal", float("nan"))))
    write_csv(os.path.join(out_dir, "table1.csv"), ("P", "dt", "cd_mean", "cl_amplitude", "strouhal"), rows)
    return rows


FIGURES = {
    "fig3": fig3, "fig4": fig4, "fig5": fig5, "fig6": fig6, "fig7": fig7, "fig8": fig8,
    "naca": naca, "cylinder": cylinder, "table1": table1,
}


def run_repro(figure, out_dir, quick=False):
    from .config import ConfigError

    if figure not in FIGURES:
        raise ConfigError(f"unknown figure id '{figure}' (choose from {', '.join(FIGURES)})", "figure")
    os.makedirs(out_dir, exist_ok=True)
    return FIGURES[figure](out_dir, quick=quick)
