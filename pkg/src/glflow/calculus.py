"""Discrete differential operators on the torus.

Two families coexist, used for different jobs:

- Spectral (Fourier) derivatives for periodic real fields: div, curl,
  poisson_solve, coulomb_project. Exact on band-limited data.
- Matched forward/backward finite differences: fd_grad (forward), fd_div
  (backward, the exact adjoint of fd_grad), and the five-point Poisson solve
  fd_poisson_flat built from that pair. The gradient flow uses this family
  for its gauge plumbing so that its conservation identities hold exactly;
  see flow.py.

Sections (twisted fields) only ever see gauge-covariant finite differences
through the bundle link phases; Fourier methods never touch them.

One-forms are passed around as plain (a1, a2) tuples of real (n2, n1) arrays.
"""

import numpy as np

from . import backend
from .errors import ResolutionError, SolvabilityError

_PLAQUETTE_SATURATION = np.pi * (1.0 - 1e-12)


def _spectral(geom):
    """Per-geometry cache of Fourier multipliers."""
    cache = geom.__dict__.get("_spectral_cache")
    if cache is None:
        k1 = 2.0 * np.pi * np.fft.fftfreq(geom.n1, d=geom.h1)
        k2 = 2.0 * np.pi * np.fft.fftfreq(geom.n2, d=geom.h2)
        ik1 = (1j * k1)[None, :].copy()
        ik2 = (1j * k2)[:, None].copy()
        # first derivatives zero the unpaired Nyquist mode of even grids
        if geom.n1 % 2 == 0:
            ik1[0, geom.n1 // 2] = 0.0
        if geom.n2 % 2 == 0:
            ik2[geom.n2 // 2, 0] = 0.0
        ksq = k1[None, :] ** 2 + k2[:, None] ** 2
        inv_ksq = np.zeros_like(ksq)
        nz = ksq > 0
        inv_ksq[nz] = 1.0 / ksq[nz]
        # the Laplacian that div o grad actually composes to (Nyquist lines
        # zeroed like the first derivatives); the Coulomb projection must
        # invert this one or modes with Nyquist content in a single
        # direction survive the projection
        ktsq = -(ik1 ** 2 + ik2 ** 2).real
        inv_ktsq = np.zeros_like(ktsq)
        nz = ktsq > 0
        inv_ktsq[nz] = 1.0 / ktsq[nz]
        # five-point stencil eigenvalues -4 sin^2(k h / 2) / h^2
        lam1 = -4.0 * np.sin(0.5 * k1 * geom.h1) ** 2 / geom.h1 ** 2
        lam2 = -4.0 * np.sin(0.5 * k2 * geom.h2) ** 2 / geom.h2 ** 2
        lam_fd = lam1[None, :] + lam2[:, None]
        inv_lam_fd = np.zeros_like(lam_fd)
        nz = lam_fd != 0.0
        inv_lam_fd[nz] = 1.0 / lam_fd[nz]
        cache = {"ik1": ik1, "ik2": ik2, "inv_ksq": inv_ksq,
                 "ksq": ksq, "inv_ktsq": inv_ktsq, "inv_lam_fd": inv_lam_fd,
                 "inv_lam_fd_half": np.ascontiguousarray(
                     inv_lam_fd[:, :geom.n1 // 2 + 1])}
        geom.__dict__["_spectral_cache"] = cache
    return cache


def spectral_d1(f, geom):
    """Spectral x1 derivative of a periodic real field."""
    sp = _spectral(geom)
    return np.real(np.fft.ifft2(np.fft.fft2(f) * sp["ik1"]))


def spectral_d2(f, geom):
    sp = _spectral(geom)
    return np.real(np.fft.ifft2(np.fft.fft2(f) * sp["ik2"]))


def div(A, geom):
    """Metric divergence exp(-2 rho) (d1 A1 + d2 A2), spectral derivatives."""
    a1, a2 = A
    return geom.em2rho * (spectral_d1(a1, geom) + spectral_d2(a2, geom))


def curl(A, geom):
    """Metric curl exp(-2 rho) (d1 A2 - d2 A1), spectral derivatives."""
    a1, a2 = A
    return geom.em2rho * (spectral_d1(a2, geom) - spectral_d2(a1, geom))


def grad(s, geom):
    """Spectral gradient of a periodic real scalar, as a one-form."""
    return spectral_d1(s, geom), spectral_d2(s, geom)


def laplacian(f, geom):
    """Forward metric Laplacian exp(-2 rho) * flat spectral Laplacian."""
    sp = _spectral(geom)
    return geom.em2rho * np.real(np.fft.ifft2(np.fft.fft2(f) * (-sp["ksq"])))


def poisson_solve(f, geom, rtol=1e-8):
    """Solve lap u = f on the torus (flat lap u = exp(2 rho) f, spectrally).

    Requires the metric mean of f to vanish: integral of f dmu = 0 within
    rtol * ||f||_L2(dmu). The solution has zero flat mean.
    """
    norm = np.sqrt(float(np.sum(np.abs(f) ** 2 * geom.weights)))
    mean = abs(float(np.sum(f * geom.weights)))
    # absolute allowance keeps the check meaningful when f itself sits at
    # the rounding floor (e.g. re-projecting an already projected field)
    atol = 1e-13 * (1.0 + float(np.sum(np.abs(f) * geom.weights)))
    if mean > rtol * norm + atol:
        raise SolvabilityError(
            f"poisson right-hand side has metric mean {mean:.3e} "
            f"(tolerance {rtol:.1e} * ||f|| = {rtol * norm:.3e})")
    sp = _spectral(geom)
    rhs_hat = np.fft.fft2(geom.e2rho * f)
    u_hat = -rhs_hat * sp["inv_ksq"]
    u_hat[0, 0] = 0.0
    return np.real(np.fft.ifft2(u_hat))


def coulomb_project(A, geom):
    """Remove the non-harmonic gradient part: A - grad(lap^-1 div A).

    Preserves curl and the harmonic (mean) component; idempotent; the
    divergence of the result vanishes to rounding. The inverse Laplacian is
    the one composed by the div/grad pair, so the postconditions hold for
    arbitrary periodic input including Nyquist content.
    """
    sp = _spectral(geom)
    dv = geom.e2rho * div(A, geom)   # flat divergence
    psi_hat = -np.fft.fft2(dv) * sp["inv_ktsq"]
    psi = np.real(np.fft.ifft2(psi_hat))
    g1, g2 = grad(psi, geom)
    return A[0] - g1, A[1] - g2


# ---- matched forward/backward difference family ----

def fd_grad(s, geom):
    """Forward-difference gradient, the discrete analog of d chi in the
    gauge transformation convention of the covariant stencil."""
    g1 = (np.roll(s, -1, axis=1) - s) / geom.h1
    g2 = (np.roll(s, -1, axis=0) - s) / geom.h2
    return g1, g2


def fd_div_flat(A, geom):
    """Backward-difference divergence (flat), exact adjoint of -fd_grad."""
    a1, a2 = A
    return ((a1 - np.roll(a1, 1, axis=1)) / geom.h1
            + (a2 - np.roll(a2, 1, axis=0)) / geom.h2)


def fd_div(A, geom):
    """Metric backward-difference divergence."""
    return geom.em2rho * fd_div_flat(A, geom)


def fd_laplacian_flat(s, geom):
    return fd_div_flat(fd_grad(s, geom), geom)


def fd_poisson_flat(rhs, geom):
    """Solve the five-point Laplacian (flat) lap_fd u = rhs, zero-mean u.

    lap_fd = fd_div_flat o fd_grad, diagonal in Fourier space, so the
    inversion is exact: applying fd_laplacian_flat to the result reproduces
    the mean-free part of rhs to rounding. Callers feed exact discrete
    divergences, whose mean telescopes to zero; the k = 0 mode is projected
    out rather than checked, because near stationary points the whole
    right-hand side sits at the rounding floor where a relative mean test
    is meaningless.
    """
    sp = _spectral(geom)
    u_hat = np.fft.rfft2(rhs) * sp["inv_lam_fd_half"]
    u_hat[0, 0] = 0.0
    return np.fft.irfft2(u_hat, s=rhs.shape)


# ---- gauge-covariant operators on sections ----

def links(A, bundle, geom):
    """Full forward-link phases for background + dynamic connection."""
    if A is None:
        return bundle.u1, bundle.u2
    return backend.link_phases(A[0], A[1], bundle.u1, bundle.u2,
                               geom.h1, geom.h2)


def covariant_derivative(phi, A, bundle, geom):
    """Forward covariant difference (D1 phi, D2 phi) with the bundle twist."""
    v1, v2 = links(A, bundle, geom)
    return backend.covariant_diffs(phi, v1, v2, geom.h1, geom.h2)


def dbar(phi, A, bundle, geom):
    """Antiholomorphic covariant operator (D1 + i D2) phi / 2."""
    d1, d2 = covariant_derivative(phi, A, bundle, geom)
    return 0.5 * (d1 + 1j * d2)


def dholo(phi, A, bundle, geom):
    """Holomorphic covariant operator (D1 - i D2) phi / 2."""
    d1, d2 = covariant_derivative(phi, A, bundle, geom)
    return 0.5 * (d1 - 1j * d2)


def magnetic_field(A, bundle, geom):
    """Plaquette magnetic field; equals b + curl A to second order.

    Raises ResolutionError when any plaquette phase saturates the principal
    branch, which is when the flux sum stops being trustworthy.
    """
    v1, v2 = links(A, bundle, geom)
    inv_hw = geom.em2rho / (geom.h1 * geom.h2)
    b, max_arg = backend.plaquette_field(v1, v2, inv_hw)
    if max_arg >= _PLAQUETTE_SATURATION:
        raise ResolutionError(
            f"plaquette phase reached {max_arg:.6f} (principal branch "
            "saturated): field too rough for this grid")
    return b


def flux(B, geom):
    """Total magnetic flux, the integral of B against the area element."""
    return float(np.sum(B * geom.weights))
