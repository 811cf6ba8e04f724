"""Initial-data recipes: exact constant-curvature state, seeded random data,
and perturbed-minimizer data with energy-excess targeting.

Above the area threshold there is no closed-form minimizer, so the
perturbed_minimizer recipe first finds the minimizer with an internal
gradient-flow solve (bootstrap). For grids of 256 and larger the bootstrap
solves on the half-resolution grid first and prolongates, which is much
cheaper than flowing from noise at full resolution. Everything here is a
pure function of (seed, parameters): reruns are bit-identical.

Seed layout: phi perturbation uses `seed`, the one-form perturbation
`seed + 1`, the bootstrap `seed + 2`.
"""

import numpy as np

from . import calculus, diagnostics, geometry
from .bundle import make_bundle, random_divfree_oneform, random_section
from .errors import ConfigurationError
from .flow import StepPolicy, run
from .state import FlowState

BOOTSTRAP_TOL = 1e-6
BOOTSTRAP_SMOOTHING = 40
# multi-vortex minimizers keep creeping along nearly flat moduli directions,
# so the bootstrap stops on a time cap as well as on the gradient tolerance;
# the residual energy excess is far below any epsilon0 of interest
BOOTSTRAP_T_MAX = 80.0
BISECT_MAX_ITERS = 40
BISECT_RTOL = 1e-3


def constant_curvature_state(geom):
    """A = 0, phi = 0: uniform plaquette curvature from the background alone.
    This is the exact discrete minimizer below the threshold and an exact
    stationary point in every regime."""
    z = np.zeros(geom.shape)
    return FlowState(0.0, z, z.copy(), np.zeros(geom.shape, dtype=complex))


def fd_coulomb_fix(A, geom):
    """Remove the gradient part in the backward-difference sense, so the flow
    starts with exactly zero maintained Coulomb residual."""
    chi = calculus.fd_poisson_flat(-calculus.fd_div_flat(A, geom), geom)
    g1, g2 = calculus.fd_grad(chi, geom)
    return A[0] + g1, A[1] + g2


def _prolong_periodic(coarse):
    """Double a periodic real field: injection at even indices, midpoint
    averages at odd ones."""
    n2, n1 = coarse.shape
    fine = np.empty((2 * n2, 2 * n1))
    right = np.roll(coarse, -1, axis=1)
    up = np.roll(coarse, -1, axis=0)
    diag = np.roll(right, -1, axis=0)
    fine[::2, ::2] = coarse
    fine[::2, 1::2] = 0.5 * (coarse + right)
    fine[1::2, ::2] = 0.5 * (coarse + up)
    fine[1::2, 1::2] = 0.25 * (coarse + right + up + diag)
    return fine


def _prolong_section(coarse, coarse_bundle):
    """Double a section: like _prolong_periodic, but values wrapped through
    the x1 seam pick up the transition phase."""
    n2, n1 = coarse.shape
    twist = coarse_bundle.twist[:, None]
    right = np.roll(coarse, -1, axis=1)
    right[:, -1] *= twist[:, 0]
    up = np.roll(coarse, -1, axis=0)
    diag = np.roll(right, -1, axis=0)
    fine = np.empty((2 * n2, 2 * n1), dtype=complex)
    fine[::2, ::2] = coarse
    fine[::2, 1::2] = 0.5 * (coarse + right)
    fine[1::2, ::2] = 0.5 * (coarse + up)
    fine[1::2, 1::2] = 0.25 * (coarse + right + up + diag)
    return fine


def minimizer_state(geom, bundle, seed, tol=BOOTSTRAP_TOL, t_max=BOOTSTRAP_T_MAX):
    """Energy minimizer for the given geometry and degree.

    Below (or at) the threshold this is the exact constant-curvature state.
    Above it, flow a smoothed random section down to gradient norm `tol`,
    recursing through half-resolution grids when both dimensions are even
    and at least 256.
    """
    if bundle.N == 0:
        z = np.zeros(geom.shape)
        return FlowState(0.0, z, z.copy(), np.ones(geom.shape, dtype=complex))
    reg = geometry.regime(bundle.N, geom)
    if not reg.supercritical:
        return constant_curvature_state(geom)
    n1, n2 = geom.n1, geom.n2
    if n1 >= 256 and n2 >= 256 and n1 % 2 == 0 and n2 % 2 == 0:
        cgeom = geometry.make_geometry(geom.L1, geom.L2, n1 // 2, n2 // 2)
        cbundle = make_bundle(bundle.N, cgeom)
        cstate = minimizer_state(cgeom, cbundle, seed, tol=tol, t_max=t_max)
        a = (_prolong_periodic(cstate.a1), _prolong_periodic(cstate.a2))
        a = fd_coulomb_fix(a, geom)
        phi = _prolong_section(cstate.phi, cbundle)
        init = FlowState(0.0, a[0], a[1], phi)
    else:
        phi = random_section(bundle, geom, seed + 2,
                             smoothing_steps=BOOTSTRAP_SMOOTHING)
        phi = phi / np.max(np.abs(phi))
        z = np.zeros(geom.shape)
        init = FlowState(0.0, z, z.copy(), phi)
    policy = StepPolicy(grad_tol=tol, t_max=t_max, record_every=10 ** 9)
    result = run(init, policy, geom, bundle)
    final = result.final
    return FlowState(0.0, final.a1, final.a2, final.phi)


def _perturbation(geom, bundle, seed, smoothing):
    dphi = random_section(bundle, geom, seed, smoothing_steps=smoothing)
    dphi = dphi / diagnostics.norm_dmu(dphi, geom)
    da = random_divfree_oneform(geom, seed + 1, 1.0)
    da = fd_coulomb_fix(da, geom)
    return dphi, da


def bisect_to_energy(base, dphi, da, target_excess, geom, bundle,
                     reference=None):
    """Scale the perturbation so the energy exceeds the reference minimum by
    target_excess (relative tolerance BISECT_RTOL, at most BISECT_MAX_ITERS
    bisection steps after bracketing)."""
    if reference is None:
        reference = geometry.v_min(bundle.N, geom)

    def energy_at(s):
        st = FlowState(0.0, base.a1 + s * da[0], base.a2 + s * da[1],
                       base.phi + s * dphi)
        return diagnostics.energy(st, geom, bundle), st

    e0, _ = energy_at(0.0)
    if e0 - reference > target_excess:
        raise ConfigurationError(
            f"base state already exceeds the energy target: "
            f"V - V_min = {e0 - reference:.3e} > {target_excess:.3e}")
    s_hi = 1.0
    for _ in range(60):
        e_hi, st_hi = energy_at(s_hi)
        if e_hi - reference >= target_excess:
            break
        s_hi *= 2.0
    else:
        raise ConfigurationError("could not bracket the energy target")
    s_lo = 0.0
    s, st = s_hi, st_hi
    for _ in range(BISECT_MAX_ITERS):
        e, st = energy_at(s)
        excess = e - reference
        if abs(excess - target_excess) <= BISECT_RTOL * target_excess:
            break
        if excess > target_excess:
            s_hi = s
        else:
            s_lo = s
        s = 0.5 * (s_lo + s_hi)
    return st, s


def build_initial_state(recipe, geom, bundle, seed, phi_amplitude=0.5,
                        a_amplitude=0.1, smoothing=20, target_epsilon0=None):
    """Assemble the initial FlowState for a run.

    recipe: 'minimizer', 'perturbed_minimizer', or 'random'. When
    target_epsilon0 is set, a single overall perturbation scale is bisected
    until V - V_min matches it.
    """
    if recipe == "minimizer":
        return minimizer_state(geom, bundle, seed)
    if recipe == "perturbed_minimizer":
        base = minimizer_state(geom, bundle, seed)
    elif recipe == "random":
        base = constant_curvature_state(geom)
    else:
        raise ConfigurationError(f"unknown init recipe '{recipe}'")
    dphi, da = _perturbation(geom, bundle, seed, smoothing)
    dphi = phi_amplitude * dphi
    da = (a_amplitude * da[0], a_amplitude * da[1])
    if target_epsilon0 is not None:
        state, _ = bisect_to_energy(base, dphi, da, target_epsilon0,
                                    geom, bundle)
        return state
    return FlowState(0.0, base.a1 + da[0], base.a2 + da[1], base.phi + dphi)
