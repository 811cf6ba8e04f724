"""Gradient-flow engine in Coulomb gauge.

The force is the exact gradient of the discrete energy (diagnostics.energy)
with respect to the inner products

    <phi, phi'> = sum Re(conj(phi) phi') exp(2 rho) h1 h2
    <A, A'>     = sum (A . A') h1 h2

so the semi-discrete dissipation identity dE/dt = -||G||^2 is exact. The
temporal potential a0 solves the matched five-point Poisson equation
lap_fd a0 = -div_fd J at every stage and enters through the forward
difference d a0, which is an exact gauge direction of the discrete energy:
the gauge terms change neither the energy nor the backward divergence of A.
Consequently fd_div(A) is a constant of the time-discrete flow up to
rounding, and a0 vanishes at discrete stationary points.
"""

from dataclasses import dataclass

import numpy as np

from . import backend, calculus, diagnostics
from .errors import BlowUpError, ConfigurationError
from .state import FlowState

COULOMB_TOL = 1e-8


@dataclass
class StepPolicy:
    scheme: str = "euler"
    dt: float | None = None          # None selects the automatic bound
    safety: float = 0.8
    t_max: float = 200.0
    grad_tol: float = 1e-8
    record_every: int = 20


@dataclass
class RunResult:
    final: FlowState
    records: list
    status: str                      # "converged" or "t_max"
    steps: int = 0
    repairs: int = 0
    dt: float = 0.0


def auto_dt(policy, geom):
    """Explicit stability bound c * min(h)^2 * exp(-2 max rho) / 4."""
    hmin = min(geom.h1, geom.h2)
    return policy.safety * hmin * hmin * float(np.exp(-2.0 * np.max(geom.rho))) / 4.0


class _Forces:
    """Everything derived from one state evaluation, shared between the
    stepper and the diagnostics record."""

    __slots__ = ("v1", "v2", "bfld", "ga1", "ga2", "gphi", "a0", "gn2", "_geom")

    def __init__(self, state, geom, bundle):
        self._geom = geom
        self.v1, self.v2 = calculus.links(state.A, bundle, geom)
        inv_hw = geom.em2rho / (geom.h1 * geom.h2)
        self.bfld, _ = backend.plaquette_field(self.v1, self.v2, inv_hw)
        self.ga1, self.ga2, self.gphi, a0_rhs = backend.gradient_forces(
            state.phi, self.v1, self.v2, self.bfld,
            geom.em2rho, geom.h1, geom.h2)
        a0 = calculus.fd_poisson_flat(a0_rhs, geom)
        a0 = a0 - float(np.sum(a0 * geom.weights)) / geom.area
        self.a0 = a0
        ha = geom.h1 * geom.h2
        with np.errstate(over="ignore", invalid="ignore"):
            # overflow here is the blow-up signal the caller checks for
            self.gn2 = float(np.sum(self.ga1 ** 2 + self.ga2 ** 2) * ha
                             + np.sum(np.abs(self.gphi) ** 2 * geom.weights))

    def velocity(self, state):
        """(da1/dt, da2/dt, dphi/dt) for the gauge-fixed flow."""
        da0 = calculus.fd_grad(self.a0, self._geom)
        va1 = da0[0] - self.ga1
        va2 = da0[1] - self.ga2
        vphi = 1j * (self.a0 * state.phi) - self.gphi
        return va1, va2, vphi


def solve_a0(state, geom, bundle):
    """Temporal potential: lap a0 = -div <i phi, D_A phi> with the matched
    backward-difference divergence of the site current, metric mean zero."""
    d1, d2 = calculus.covariant_derivative(state.phi, state.A, bundle, geom)
    j1 = (np.conj(state.phi) * d1).imag
    j2 = (np.conj(state.phi) * d2).imag
    rhs = -calculus.fd_div_flat((j1, j2), geom)
    a0 = calculus.fd_poisson_flat(rhs, geom)
    return a0 - float(np.sum(a0 * geom.weights)) / geom.area


def energy_gradient(state, geom, bundle):
    """Exact gradient of the discrete energy: ((G_A1, G_A2), G_phi)."""
    f = _Forces(state, geom, bundle)
    return (f.ga1, f.ga2), f.gphi


def grad_norm(state, geom, bundle):
    """Weighted L2 norm of the energy gradient (the stopping criterion)."""
    return float(np.sqrt(_Forces(state, geom, bundle).gn2))


def _advance(state, forces, dt, policy, geom, bundle):
    if policy.scheme == "euler":
        na1, na2, nphi = backend.euler_update(
            state.a1, state.a2, state.phi, forces.ga1, forces.ga2,
            forces.gphi, forces.a0, dt, geom.h1, geom.h2)
        return FlowState(state.t + dt, na1, na2, nphi)
    if policy.scheme == "rk4":
        k1 = forces.velocity(state)
        s2 = FlowState(state.t, state.a1 + 0.5 * dt * k1[0],
                       state.a2 + 0.5 * dt * k1[1], state.phi + 0.5 * dt * k1[2])
        k2 = _Forces(s2, geom, bundle).velocity(s2)
        s3 = FlowState(state.t, state.a1 + 0.5 * dt * k2[0],
                       state.a2 + 0.5 * dt * k2[1], state.phi + 0.5 * dt * k2[2])
        k3 = _Forces(s3, geom, bundle).velocity(s3)
        s4 = FlowState(state.t, state.a1 + dt * k3[0],
                       state.a2 + dt * k3[1], state.phi + dt * k3[2])
        k4 = _Forces(s4, geom, bundle).velocity(s4)
        c = dt / 6.0
        return FlowState(state.t + dt,
                         state.a1 + c * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]),
                         state.a2 + c * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]),
                         state.phi + c * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2]))
    raise ConfigurationError(f"unknown scheme '{policy.scheme}'")


def coulomb_residual(state, geom):
    """Sup norm of the maintained (backward-difference, metric) divergence."""
    return float(np.max(np.abs(calculus.fd_div(state.A, geom))))


def coulomb_repair(state, geom):
    """Exact gauge transformation restoring fd_div(A) = 0.

    Uses chi solving the matched Poisson problem, so the repair changes no
    gauge-invariant quantity (in particular the energy) beyond rounding.
    """
    dv = calculus.fd_div_flat(state.A, geom)
    chi = calculus.fd_poisson_flat(-dv, geom)
    g1, g2 = calculus.fd_grad(chi, geom)
    return FlowState(state.t, state.a1 + g1, state.a2 + g2,
                     np.exp(1j * chi) * state.phi, state.a0)


def step(state, policy, geom, bundle):
    """Advance one step of the gauge-fixed gradient flow.

    a0 is re-solved from the current (A, phi) at every stage; after the
    update the Coulomb residual is checked and repaired if it drifted above
    COULOMB_TOL (it should not: the scheme conserves it to rounding).
    """
    dt = policy.dt if policy.dt is not None else auto_dt(policy, geom)
    forces = _Forces(state, geom, bundle)
    if not np.isfinite(forces.gn2):
        raise BlowUpError("non-finite gradient before step", t=state.t)
    new = _advance(state, forces, dt, policy, geom, bundle)
    if coulomb_residual(new, geom) > COULOMB_TOL:
        new = coulomb_repair(new, geom)
    new.a0 = forces.a0
    return new


def run(init, policy, geom, bundle, on_record=None):
    """Flow until the gradient norm drops below policy.grad_tol or t reaches
    policy.t_max. Records diagnostics every policy.record_every steps plus
    the final state; on_record(state, record, index) is invoked for each.
    Raises BlowUpError on non-finite values; hitting t_max is a status, not
    an error."""
    dt = policy.dt if policy.dt is not None else auto_dt(policy, geom)
    state = init.copy()
    records = []
    steps = 0
    repairs = 0
    while True:
        forces = _Forces(state, geom, bundle)
        gn = np.sqrt(forces.gn2) if forces.gn2 >= 0 else np.nan
        if not np.isfinite(gn):
            raise BlowUpError(
                f"non-finite state at step {steps} (t = {state.t:.6g})",
                step_index=steps, t=state.t)
        state.a0 = forces.a0
        converged = gn <= policy.grad_tol
        timed_out = state.t >= policy.t_max - 1e-14 * max(1.0, policy.t_max)
        due = (steps % policy.record_every == 0)
        if due or converged or timed_out:
            # the scheme conserves the Coulomb residual between checks, so
            # monitoring at record cadence loses nothing
            if coulomb_residual(state, geom) > COULOMB_TOL:
                state = coulomb_repair(state, geom)
                repairs += 1
                forces = _Forces(state, geom, bundle)
            rec = diagnostics.record_from_forces(
                state, forces, geom, bundle, float(gn))
            records.append(rec)
            if on_record is not None:
                on_record(state, rec, len(records) - 1)
        if converged:
            return RunResult(state, records, "converged", steps, repairs, dt)
        if timed_out:
            return RunResult(state, records, "t_max", steps, repairs, dt)
        state = _advance(state, forces, dt, policy, geom, bundle)
        steps += 1
