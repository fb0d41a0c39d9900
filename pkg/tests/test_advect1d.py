import dataclasses

import numpy as np
import pytest

from penalfr import advect1d
from penalfr.masking import PenalizationParams
from penalfr.sfd import SfdParams

BASE = advect1d.AdvectionRun(N=10, P=2, dt=1e-3, t_final=0.05)


def test_initial_condition_zero_in_slab_and_periodic():
    run = advect1d.AdvectionRun()
    x = run.problem().points()
    u = advect1d.initial_condition(run, x)
    assert np.all(u[(x > 0) & (x < run.delta)] == 0)
    # whole number of wavelengths over the fluid length, up to the rounding of 0.3223
    n_waves = run.khat * (2.0 - run.delta) / (2 * np.pi)
    assert n_waves == pytest.approx(round(n_waves), abs=5e-3)


def test_unpenalized_run_translates_wave():
    run = advect1d.AdvectionRun(Z=1, dt=1e-4, t_final=0.1, k_nondim=0.1)
    res = advect1d.run(dataclasses.replace(run, pen=PenalizationParams.disabled()))
    # no slab treatment: the exact solution is the initial profile shifted by c t
    x = res.x
    shifted = (x - res.t + 1.0) % 2.0 - 1.0
    exact = advect1d.initial_condition(run, shifted)
    # away from the ripple left by the slab edges
    fluid = (x > 0.4) & (x < 0.9)
    assert np.max(np.abs(res.u[fluid] - exact[fluid])) < 1e-3
    assert res.steps == 1000 and res.t == pytest.approx(0.1)


def test_run_matches_step_matrix_powers():
    cfg = advect1d.configure(BASE, 1e-2, 50.0, 0.5)
    res = advect1d.run(cfg)
    G = advect1d.step_matrix(cfg)
    x = cfg.problem().points()
    z = np.concatenate([advect1d.initial_condition(cfg, x), np.zeros(cfg.P + 1)])
    for _ in range(res.steps):
        z = G @ z
    np.testing.assert_allclose(res.u, z[: x.size], atol=1e-12)
    np.testing.assert_allclose(res.sfd_state.q_bar, z[x.size:], atol=1e-12)


def test_partial_final_step_lands_on_t_final():
    res = advect1d.run(dataclasses.replace(BASE, t_final=0.0105))
    assert res.t == pytest.approx(0.0105, rel=1e-12)
    assert res.steps == 11


def test_max_stable_dt_is_sharp():
    cfg = advect1d.configure(BASE, 1e-3)
    dt = advect1d.max_stable_dt(cfg)
    assert advect1d.is_stable(cfg, dt)
    assert not advect1d.is_stable(cfg, 1.01 * dt)


def test_stable_step_grows_with_weaker_penalization():
    a = advect1d.max_stable_dt(advect1d.configure(BASE, 1e-4))
    b = advect1d.max_stable_dt(advect1d.configure(BASE, 1e-3))
    assert b > 5 * a


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_instability_raised():
    cfg = dataclasses.replace(advect1d.configure(BASE, 1e-4), dt=1e-3, t_final=0.5)
    with pytest.raises(advect1d.NumericalInstability):
        advect1d.run(cfg)


def test_snapshots_recorded():
    res = advect1d.run(dataclasses.replace(BASE, snapshot_every=10))
    assert [round(t, 12) for t, _ in res.history] == [0.01, 0.02, 0.03, 0.04, 0.05]


def test_sweep_reports_each_row():
    rows = advect1d.sweep([(1e-2, None, None), (1e-2, 10.0, 1.0)], BASE)
    assert [r.status for r in rows] == ["ok", "ok"]
    assert all(r.dt <= 0.5 * r.max_stable_dt + 1e-15 for r in rows)
    assert set(rows[0].as_dict()) == {f.name for f in dataclasses.fields(advect1d.SweepRow)}


def test_errors_measure_expected_regions():
    x = np.array([-0.5, 0.01, 0.02, 0.5, 1.0])
    u = np.array([9.0, 3.0, 4.0, 1.0, 1.0])
    assert advect1d.flow_error(x, u, 0.05) == pytest.approx(1.0)
    assert advect1d.solid_error(x, u, 0.05) == pytest.approx(np.sqrt(12.5))
