"""Gauge-invariant observables: energies, self-dual residuals, subcritical
residuals, vortex windings, and exponential-rate fits."""

from dataclasses import dataclass

import numpy as np

from . import backend, calculus
from .errors import InsufficientDataError

CSV_FIELDS = ("t", "energy", "energy_bogomolny", "eta_l2", "v_l2", "y_l2",
              "phi_l2", "a0_l2", "grad_norm", "flux", "vortex_total")


@dataclass
class DiagnosticsRecord:
    t: float
    energy: float
    energy_bogomolny: float
    eta_l2: float
    v_l2: float
    y_l2: float
    phi_l2: float
    a0_l2: float
    grad_norm: float
    flux: float
    vortex_total: int
    q_eta: float | None = None
    q_v: float | None = None


@dataclass
class RateFit:
    delta: float
    r2: float
    t_start: float
    t_end: float
    n_samples: int


@dataclass
class VortexReport:
    plaquettes: list          # (i1, i2, winding) for nonzero windings
    total: int
    degenerate: bool          # a site with |phi| below 1e-12 * max|phi|


def norm_dmu(f, geom):
    """L2 norm against the metric area element."""
    return float(np.sqrt(np.sum(np.abs(f) ** 2 * geom.weights)))


def energy(state, geom, bundle):
    """Discrete energy: kinetic + magnetic + potential.

    E = 1/2 sum (|D1 phi|^2 + |D2 phi|^2) h1 h2
      + 1/2 sum B^2 w + 1/8 sum (1 - |phi|^2)^2 w

    with B the plaquette field and w = exp(2 rho) h1 h2.
    """
    d1, d2 = calculus.covariant_derivative(state.phi, state.A, bundle, geom)
    b = calculus.magnetic_field(state.A, bundle, geom)
    ha = geom.h1 * geom.h2
    kin = 0.5 * float(np.sum((np.abs(d1) ** 2 + np.abs(d2) ** 2))) * ha
    mag = 0.5 * float(np.sum(b * b * geom.weights))
    pot = 0.125 * float(np.sum((1.0 - np.abs(state.phi) ** 2) ** 2 * geom.weights))
    return kin + mag + pot


def bogomolny_vars(state, geom, bundle):
    """Self-dual residual pair: eta = dbar_A phi, v = B - (1 - |phi|^2)/2."""
    eta = calculus.dbar(state.phi, state.A, bundle, geom)
    b = calculus.magnetic_field(state.A, bundle, geom)
    v = b - 0.5 * (1.0 - np.abs(state.phi) ** 2)
    return eta, v


def energy_bogomolny(state, geom, bundle):
    """Energy evaluated through the sum-of-squares decomposition:
    2 ||eta||^2_flat + 1/2 ||v||^2_dmu + pi N."""
    eta, v = bogomolny_vars(state, geom, bundle)
    ha = geom.h1 * geom.h2
    return (2.0 * float(np.sum(np.abs(eta) ** 2)) * ha
            + 0.5 * float(np.sum(v * v * geom.weights))
            + np.pi * bundle.N)


def subcritical_residual(state, geom, bundle):
    """(||phi||, ||y||) with y = v - l/|area| and l = 2 pi N - area/2.

    The constant shift makes y vanish identically at the constant-curvature
    minimizer below the threshold.
    """
    _, v = bogomolny_vars(state, geom, bundle)
    ell = 2.0 * np.pi * bundle.N - 0.5 * geom.area
    y = v - ell / geom.area
    return norm_dmu(state.phi, geom), norm_dmu(y, geom)


def quadratic_forms(state, eta, v, geom, bundle):
    """Energy-type quadratic forms attached to the eta and v evolutions.

    Q_eta treats eta as a section (same twist and forward stencil as phi);
    Q_v treats v as a periodic scalar with spectral gradient.
    """
    deta = calculus.dholo(eta, state.A, bundle, geom)
    ha = geom.h1 * geom.h2
    absphi2 = np.abs(state.phi) ** 2
    q_eta = float(np.sum(4.0 * np.abs(deta) ** 2 * geom.em2rho) * ha
                  + np.sum(absphi2 * np.abs(eta) ** 2) * ha)
    g1, g2 = calculus.grad(v, geom)
    q_v = float(np.sum((g1 ** 2 + g2 ** 2)) * ha
                + np.sum(absphi2 * v * v * geom.weights))
    return q_eta, q_v


def locate_vortices(state, geom, bundle):
    """Per-plaquette winding of phi through the connection links.

    Edge phases are gauge invariant, so the windings are too, and their sum
    is the bundle degree for any nowhere-vanishing section.
    """
    v1, v2 = calculus.links(state.A, bundle, geom)
    inv_hw = geom.em2rho / (geom.h1 * geom.h2)
    bfld, _ = backend.plaquette_field(v1, v2, inv_hw)
    arg_w = -bfld / inv_hw
    wind = backend.plaquette_windings(state.phi, v1, v2, arg_w)
    absphi = np.abs(state.phi)
    degenerate = bool(np.min(absphi) < 1e-12 * np.max(absphi))
    nz = np.argwhere(wind != 0)
    plaquettes = [(int(i1), int(i2), int(wind[i2, i1])) for i2, i1 in nz]
    return VortexReport(plaquettes, int(np.sum(wind)), degenerate)


def record_from_forces(state, forces, geom, bundle, gn):
    """Assemble the per-step record reusing the stepper's force evaluation."""
    d1, d2 = backend.covariant_diffs(state.phi, forces.v1, forces.v2,
                                     geom.h1, geom.h2)
    eta = 0.5 * (d1 + 1j * d2)
    b = forces.bfld
    absphi2 = np.abs(state.phi) ** 2
    v = b - 0.5 * (1.0 - absphi2)
    ha = geom.h1 * geom.h2
    kin = 0.5 * float(np.sum(np.abs(d1) ** 2 + np.abs(d2) ** 2)) * ha
    mag = 0.5 * float(np.sum(b * b * geom.weights))
    pot = 0.125 * float(np.sum((1.0 - absphi2) ** 2 * geom.weights))
    e_bog = (2.0 * float(np.sum(np.abs(eta) ** 2)) * ha
             + 0.5 * float(np.sum(v * v * geom.weights)) + np.pi * bundle.N)
    ell = 2.0 * np.pi * bundle.N - 0.5 * geom.area
    y = v - ell / geom.area
    arg_w = -b * (geom.h1 * geom.h2) * geom.e2rho
    wind = backend.plaquette_windings(state.phi, forces.v1, forces.v2, arg_w)
    return DiagnosticsRecord(
        t=state.t,
        energy=kin + mag + pot,
        energy_bogomolny=e_bog,
        eta_l2=norm_dmu(eta, geom),
        v_l2=norm_dmu(v, geom),
        y_l2=norm_dmu(y, geom),
        phi_l2=norm_dmu(state.phi, geom),
        a0_l2=norm_dmu(forces.a0, geom),
        grad_norm=gn,
        flux=calculus.flux(b, geom),
        vortex_total=int(np.sum(wind)),
    )


def record_from_state(state, geom, bundle):
    """Full record recomputed from (A, phi) alone; a0 is re-solved."""
    from . import flow
    forces = flow._Forces(state, geom, bundle)
    return record_from_forces(state, forces, geom, bundle,
                              float(np.sqrt(forces.gn2)))


def fit_rate(t, values, floor=None):
    """Least-squares exponential-rate fit on the log of a positive series.

    The window runs from the first sample at or below half the series
    maximum (start of the decay proper) through the last sample above the
    floor (default 1e-12 * max, the rounding plateau). Requires at least 10
    usable samples. Returns RateFit(delta, r2, window).
    """
    t = np.asarray(t, dtype=float)
    values = np.asarray(values, dtype=float)
    if t.size != values.size:
        raise ValueError("time and value arrays differ in length")
    if values.size == 0 or not np.any(values > 0):
        raise InsufficientDataError("no positive samples to fit")
    vmax = float(np.max(values))
    if floor is None:
        floor = 1e-12 * vmax
    below = np.nonzero(values <= 0.5 * vmax)[0]
    start = int(below[0]) if below.size else 0
    above = np.nonzero(values > floor)[0]
    if above.size == 0:
        raise InsufficientDataError("all samples at or below the floor")
    end = int(above[-1])
    sel = np.arange(start, end + 1)
    sel = sel[values[sel] > max(floor, 0.0)]
    if sel.size < 10:
        raise InsufficientDataError(
            f"only {sel.size} samples in the fit window (need 10)")
    x = t[sel]
    y = np.log(values[sel])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_res = float(np.sum(resid ** 2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    r2 = 1.0 if ss_tot < 1e-300 else 1.0 - ss_res / ss_tot
    return RateFit(delta=float(-slope), r2=r2,
                   t_start=float(x[0]), t_end=float(x[-1]),
                   n_samples=int(sel.size))
