"""Degree-N line bundle over the torus: constant-curvature background links,
boundary transition phases, gauge transformations, and seeded generators for
initial data.

Background gauge choice: a = (0, b_flat * x1) with transition
T(x2) = exp(i * b_flat * L1 * x2) applied on the x1 wrap; the x2 direction is
strictly periodic. Consistency b_flat * L1 * L2 = 2*pi*N is automatic because
b_flat is constructed from N.
"""

import numpy as np

from . import backend, calculus
from .errors import ConfigurationError
from .state import FlowState


class BundleConnection:
    def __init__(self, N, geom):
        self.N = int(N)
        # curvature measured against the metric area element
        self.b = 2.0 * np.pi * N / geom.area
        # flat-coordinate flux density entering link and twist phases
        self.b_flat = 2.0 * np.pi * N / (geom.L1 * geom.L2)
        x1 = geom.x1()
        x2 = geom.x2()
        self.twist = np.exp(1j * self.b_flat * geom.L1 * x2[:, 0])
        u1 = np.ones(geom.shape, dtype=np.complex128)
        u1[:, -1] = self.twist
        u2 = np.exp(-1j * geom.h2 * self.b_flat * x1) * np.ones(geom.shape)
        self.u1 = u1
        self.u2 = np.ascontiguousarray(u2, dtype=np.complex128)
        self.u1.setflags(write=False)
        self.u2.setflags(write=False)

    def __repr__(self):
        return f"BundleConnection(N={self.N}, b={self.b:.6g})"


def make_bundle(N, geom):
    """Background connection of uniform plaquette curvature with total flux
    2*pi*N. Requires a constant conformal factor when N > 0 (the explicit
    constant-curvature potential is only available in that case)."""
    if N < 0:
        raise ConfigurationError("bundle degree N must be non-negative")
    if N > 0 and not geom.rho_is_constant():
        raise ConfigurationError(
            "N > 0 requires a constant conformal factor; nonconstant rho is "
            "supported only for N = 0")
    return BundleConnection(N, geom)


def apply_gauge(state, chi, geom):
    """Gauge transform (A, phi) -> (A + d chi, exp(i chi) phi).

    d chi is the forward difference matching the covariant stencil, so all
    gauge-invariant observables are preserved to machine precision.
    """
    g1, g2 = calculus.fd_grad(chi, geom)
    return FlowState(state.t, state.a1 + g1, state.a2 + g2,
                     np.exp(1j * chi) * state.phi,
                     None if state.a0 is None else state.a0.copy())


def random_section(bundle, geom, seed, smoothing_steps=0):
    """Seeded complex Gaussian section, optionally smoothed by explicit
    covariant heat steps (background connection only, A = 0).

    Deterministic: a pure function of (seed, parameters). Uses numpy's PCG64
    generator.
    """
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal((2, geom.n2, geom.n1))
    phi = noise[0] + 1j * noise[1]
    if smoothing_steps:
        dt_s = 0.2 * min(geom.h1, geom.h2) ** 2
        for _ in range(int(smoothing_steps)):
            phi = phi + dt_s * backend.covariant_laplacian(
                phi, bundle.u1, bundle.u2, geom.em2rho, geom.h1, geom.h2)
    return phi


def random_divfree_oneform(geom, seed, amplitude, band=4):
    """Seeded band-limited periodic one-form, Coulomb-projected, zero harmonic
    part, rescaled to the requested flat L2 amplitude."""
    if amplitude == 0.0:
        return np.zeros(geom.shape), np.zeros(geom.shape)
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal((2, geom.n2, geom.n1))
    mask = _band_mask(geom, band)
    a1 = np.real(np.fft.ifft2(np.fft.fft2(noise[0]) * mask))
    a2 = np.real(np.fft.ifft2(np.fft.fft2(noise[1]) * mask))
    a1, a2 = calculus.coulomb_project((a1, a2), geom)
    a1 = a1 - np.mean(a1)
    a2 = a2 - np.mean(a2)
    nrm = np.sqrt(np.sum((a1 ** 2 + a2 ** 2)) * geom.h1 * geom.h2)
    if nrm == 0.0:
        return a1, a2
    s = amplitude / nrm
    return s * a1, s * a2


def _band_mask(geom, band):
    m1 = np.fft.fftfreq(geom.n1, d=1.0 / geom.n1)
    m2 = np.fft.fftfreq(geom.n2, d=1.0 / geom.n2)
    return ((np.abs(m1)[None, :] <= band) & (np.abs(m2)[:, None] <= band)).astype(float)


def holomorphic_section(bundle, geom, weights=None):
    """Smooth reference section with exactly N zeros: kernel element of the
    continuum antiholomorphic operator for the background connection.

    Built as a Gaussian-dressed theta sum; useful as resolution-independent
    smooth test data and for seeding near-vacuum configurations. Returns the
    constant section for N = 0.
    """
    N = bundle.N
    if N == 0:
        return np.ones(geom.shape, dtype=np.complex128)
    if weights is None:
        weights = np.ones(N)
    bf = bundle.b_flat
    x1 = geom.x1()
    x2 = geom.x2()
    # image count: Gaussian factor decays over length 1/sqrt(bf)
    kmax = int(np.ceil((8.0 / np.sqrt(bf)) / geom.L1)) + 1
    phi = np.zeros(geom.shape, dtype=np.complex128)
    for j in range(N):
        cj = j * geom.L1 / N
        for k in range(-kmax, kmax + 1):
            shift = k * geom.L1 + cj
            phi += weights[j] * np.exp(-0.5 * bf * (x1 + shift) ** 2
                                       - 1j * bf * shift * x2)
    return phi
