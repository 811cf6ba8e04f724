"""Pure-numpy reference kernels for the lattice gauge operations.

Conventions shared with the numba twins in kernels_numba.py:

- arrays are (n2, n1), axis 0 along x2, axis 1 along x1
- V1, V2 are full forward-link phases exp(-i*h_j*(a_j + A_j)) including the
  background and the boundary transition on the x1 wrap column
- forward covariant difference: D_j phi (x) = (V_j(x) phi(x+e_j) - phi(x)) / h_j
- plaquette holonomy anchored at x:
      W(x) = V1(x) V2(x+e1) conj(V1(x+e2)) conj(V2(x))
  whose principal argument is -B * h1 * h2 * exp(2*rho); the sign makes the
  total flux sum to +2*pi*N
"""

import numpy as np


def link_phases(a1, a2, ubg1, ubg2, h1, h2):
    v1 = ubg1 * np.exp(-1j * h1 * a1)
    v2 = ubg2 * np.exp(-1j * h2 * a2)
    return v1, v2


def covariant_diffs(phi, v1, v2, h1, h2):
    d1 = (v1 * np.roll(phi, -1, axis=1) - phi) / h1
    d2 = (v2 * np.roll(phi, -1, axis=0) - phi) / h2
    return d1, d2


def plaquette_field(v1, v2, inv_hw):
    """Magnetic field from plaquette phases; also returns max |principal arg|."""
    w = v1 * np.roll(v2, -1, axis=1) * np.conj(np.roll(v1, -1, axis=0)) * np.conj(v2)
    arg = np.arctan2(w.imag, w.real)
    return -arg * inv_hw, float(np.max(np.abs(arg)))


def gradient_forces(phi, v1, v2, bfld, em2rho, h1, h2):
    """Exact gradient of the discrete energy plus the temporal-solve source.

    Returns (ga1, ga2, gphi, a0_rhs) where

        ga_j   = (backward curl of B)_j - j_j    with j_j = Im(conj(phi) D_j phi)
        gphi   = -lap_A phi - (1 - |phi|^2) phi / 2
        a0_rhs = -(backward divergence of j)     (flat weights)

    The B part uses backward differences because B depends on A through
    forward differences inside the plaquette; the pair is adjoint, which is
    what makes this the exact gradient of the plaquette energy.
    """
    phi_p1 = np.roll(phi, -1, axis=1)
    phi_p2 = np.roll(phi, -1, axis=0)
    d1 = (v1 * phi_p1 - phi) / h1
    d2 = (v2 * phi_p2 - phi) / h2
    j1 = (np.conj(phi) * d1).imag
    j2 = (np.conj(phi) * d2).imag
    ga1 = (bfld - np.roll(bfld, 1, axis=0)) / h2 - j1
    ga2 = -(bfld - np.roll(bfld, 1, axis=1)) / h1 - j2
    lap = ((v1 * phi_p1 - 2.0 * phi + np.roll(np.conj(v1) * phi, 1, axis=1)) / (h1 * h1)
           + (v2 * phi_p2 - 2.0 * phi + np.roll(np.conj(v2) * phi, 1, axis=0)) / (h2 * h2))
    gphi = -em2rho * lap - 0.5 * (1.0 - np.abs(phi) ** 2) * phi
    a0_rhs = -((j1 - np.roll(j1, 1, axis=1)) / h1
               + (j2 - np.roll(j2, 1, axis=0)) / h2)
    return ga1, ga2, gphi, a0_rhs


def covariant_laplacian(phi, v1, v2, em2rho, h1, h2):
    lap = ((v1 * np.roll(phi, -1, axis=1) - 2.0 * phi
            + np.roll(np.conj(v1) * phi, 1, axis=1)) / (h1 * h1)
           + (v2 * np.roll(phi, -1, axis=0) - 2.0 * phi
              + np.roll(np.conj(v2) * phi, 1, axis=0)) / (h2 * h2))
    return em2rho * lap


def euler_update(a1, a2, phi, ga1, ga2, gphi, a0, dt, h1, h2):
    """One explicit step dA = dt (d a0 - G_A), dphi = dt (i a0 phi - G_phi),
    with d a0 the forward difference matching the gauge convention."""
    da0_1 = (np.roll(a0, -1, axis=1) - a0) / h1
    da0_2 = (np.roll(a0, -1, axis=0) - a0) / h2
    na1 = a1 + dt * (da0_1 - ga1)
    na2 = a2 + dt * (da0_2 - ga2)
    nphi = phi + dt * (1j * (a0 * phi) - gphi)
    return na1, na2, nphi


def plaquette_windings(phi, v1, v2, arg_w):
    """Integer winding per plaquette from gauge-invariant edge phases.

    Each edge phase is arg(conj(phi(x)) V_j(x) phi(x+e_j)); summed around the
    plaquette, the result differs from arg W by exactly 2*pi*(winding).
    """
    z1 = np.conj(phi) * v1 * np.roll(phi, -1, axis=1)
    z2 = np.conj(phi) * v2 * np.roll(phi, -1, axis=0)
    a1 = np.arctan2(z1.imag, z1.real)
    a2 = np.arctan2(z2.imag, z2.real)
    s = a1 + np.roll(a2, -1, axis=1) - np.roll(a1, -1, axis=0) - a2
    return np.rint((s - arg_w) / (2.0 * np.pi)).astype(np.int64)
