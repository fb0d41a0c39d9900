"""Time loop: Strang-split penalization, SFD wrapper, force and probe histories."""
import numpy as np

from ..sfd import SfdState, init_filtered
from .diagnostics import compute_forces, probe_sample
from .gas import check_admissible
from .solver import StepInfo, rhs_eval, strang_step


class NumericalFailure(RuntimeError):
    def __init__(self, step, msg):
        super().__init__(f"step {step}: {msg}")
        self.step = step


class Simulation:
    """Advance a :class:`CaseSetup` and keep its time series in memory."""

    def __init__(self, setup, U=None, t=0.0, step=0, sfd_state=None, history=None):
        self.setup = setup
        self.U = np.array(setup.U0 if U is None else U, dtype=float)
        self.t = float(t)
        self.step = int(step)
        if sfd_state is None and setup.sfd.enabled:
            sfd_state = SfdState(q=init_filtered(setup.mask, setup.pen.u_s),
                                 q_bar=init_filtered(setup.mask, setup.pen.u_s))
        self.sfd_state = sfd_state
        self.history = history if history is not None else self._empty_history()
        self._info = StepInfo()
        check_admissible(self.U, setup.gas.gamma, "in the initial field")

    def _empty_history(self):
        cols = ["step", "t", "cl", "cd", "residual"]
        for k in range(len(self.setup.probes)):
            cols += [f"u{k}", f"v{k}"]
        return {c: [] for c in cols}

    def rhs(self, U):
        s = self.setup
        return rhs_eval(U, s.mesh, s.gas, s.bc, check=False)

    def advance(self):
        s = self.setup
        try:
            U_new, self.sfd_state = strang_step(
                self.U, s.dt, self.rhs, s.chi, s.pen, s.scheme, s.sfd, self.sfd_state,
                s.mask, s.gas.gamma, self._info,
            )
        except ArithmeticError as exc:
            raise NumericalFailure(self.step + 1, str(exc)) from exc
        if not np.all(np.isfinite(U_new)):
            raise NumericalFailure(self.step + 1, "non-finite state")
        residual = float(np.sqrt(np.mean((U_new - self.U) ** 2))) / s.dt
        self.U = U_new
        self.step += 1
        self.t = self.step * s.dt
        return residual

    def record(self, residual):
        s = self.setup
        h = self.history
        h["step"].append(self.step)
        h["t"].append(self.t)
        if s.mask.solid_count:
            f = compute_forces(self.U, s.mesh, s.chi, s.pen, self._info.sfd_rate, s.length,
                               alpha=s.gas.alpha)
            h["cl"].append(f.cl)
            h["cd"].append(f.cd)
        else:
            h["cl"].append(0.0)
            h["cd"].append(0.0)
        h["residual"].append(residual)
        for k, p in enumerate(s.probes):
            u, v = probe_sample(self.U, p)
            h[f"u{k}"].append(u)
            h[f"v{k}"].append(v)

    def run(self, t_final=None, nsteps=None, record_every=1, callback=None):
        """Advance to ``t_final`` or by ``nsteps``; ``callback(sim)`` runs after each step."""
        if (t_final is None) == (nsteps is None):
            raise ValueError("give exactly one of t_final and nsteps")
        if nsteps is None:
            nsteps = max(0, int(round(t_final / self.setup.dt)) - self.step)
        for _ in range(nsteps):
            res = self.advance()
            if self.step % record_every == 0:
                self.record(res)
            if callback is not None:
                callback(self)
        return self
