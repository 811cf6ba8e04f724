"""Numba-jitted twins of kernels_numpy. Same signatures, fused loops.

Summation-free kernels only: reductions stay in numpy so that each backend
is individually deterministic. fastmath is off on purpose.
"""

import cmath
import math

import numpy as np
from numba import njit


@njit(cache=True)
def link_phases(a1, a2, ubg1, ubg2, h1, h2):
    n2, n1 = a1.shape
    v1 = np.empty((n2, n1), dtype=np.complex128)
    v2 = np.empty((n2, n1), dtype=np.complex128)
    for i2 in range(n2):
        for i1 in range(n1):
            v1[i2, i1] = ubg1[i2, i1] * cmath.exp(-1j * h1 * a1[i2, i1])
            v2[i2, i1] = ubg2[i2, i1] * cmath.exp(-1j * h2 * a2[i2, i1])
    return v1, v2


@njit(cache=True)
def covariant_diffs(phi, v1, v2, h1, h2):
    n2, n1 = phi.shape
    d1 = np.empty((n2, n1), dtype=np.complex128)
    d2 = np.empty((n2, n1), dtype=np.complex128)
    for i2 in range(n2):
        i2p = i2 + 1 if i2 + 1 < n2 else 0
        for i1 in range(n1):
            i1p = i1 + 1 if i1 + 1 < n1 else 0
            d1[i2, i1] = (v1[i2, i1] * phi[i2, i1p] - phi[i2, i1]) / h1
            d2[i2, i1] = (v2[i2, i1] * phi[i2p, i1] - phi[i2, i1]) / h2
    return d1, d2


@njit(cache=True)
def plaquette_field(v1, v2, inv_hw):
    n2, n1 = v1.shape
    b = np.empty((n2, n1), dtype=np.float64)
    max_arg = 0.0
    for i2 in range(n2):
        i2p = i2 + 1 if i2 + 1 < n2 else 0
        for i1 in range(n1):
            i1p = i1 + 1 if i1 + 1 < n1 else 0
            w = (v1[i2, i1] * v2[i2, i1p]
                 * v1[i2p, i1].conjugate() * v2[i2, i1].conjugate())
            arg = math.atan2(w.imag, w.real)
            if abs(arg) > max_arg:
                max_arg = abs(arg)
            b[i2, i1] = -arg * inv_hw[i2, i1]
    return b, max_arg


@njit(cache=True)
def gradient_forces(phi, v1, v2, bfld, em2rho, h1, h2):
    n2, n1 = phi.shape
    ga1 = np.empty((n2, n1), dtype=np.float64)
    ga2 = np.empty((n2, n1), dtype=np.float64)
    gphi = np.empty((n2, n1), dtype=np.complex128)
    j1 = np.empty((n2, n1), dtype=np.float64)
    j2 = np.empty((n2, n1), dtype=np.float64)
    a0_rhs = np.empty((n2, n1), dtype=np.float64)
    ih1 = 1.0 / h1
    ih2 = 1.0 / h2
    ih1sq = ih1 * ih1
    ih2sq = ih2 * ih2
    for i2 in range(n2):
        i2p = i2 + 1 if i2 + 1 < n2 else 0
        i2m = i2 - 1 if i2 > 0 else n2 - 1
        for i1 in range(n1):
            i1p = i1 + 1 if i1 + 1 < n1 else 0
            i1m = i1 - 1 if i1 > 0 else n1 - 1
            p = phi[i2, i1]
            d1 = (v1[i2, i1] * phi[i2, i1p] - p) * ih1
            d2 = (v2[i2, i1] * phi[i2p, i1] - p) * ih2
            cj1 = (p.conjugate() * d1).imag
            cj2 = (p.conjugate() * d2).imag
            j1[i2, i1] = cj1
            j2[i2, i1] = cj2
            ga1[i2, i1] = (bfld[i2, i1] - bfld[i2m, i1]) * ih2 - cj1
            ga2[i2, i1] = -(bfld[i2, i1] - bfld[i2, i1m]) * ih1 - cj2
            lap = ((v1[i2, i1] * phi[i2, i1p] - 2.0 * p
                    + v1[i2, i1m].conjugate() * phi[i2, i1m]) * ih1sq
                   + (v2[i2, i1] * phi[i2p, i1] - 2.0 * p
                      + v2[i2m, i1].conjugate() * phi[i2m, i1]) * ih2sq)
            asq = p.real * p.real + p.imag * p.imag
            gphi[i2, i1] = -em2rho[i2, i1] * lap - 0.5 * (1.0 - asq) * p
    for i2 in range(n2):
        i2m = i2 - 1 if i2 > 0 else n2 - 1
        for i1 in range(n1):
            i1m = i1 - 1 if i1 > 0 else n1 - 1
            a0_rhs[i2, i1] = -((j1[i2, i1] - j1[i2, i1m]) * ih1
                               + (j2[i2, i1] - j2[i2m, i1]) * ih2)
    return ga1, ga2, gphi, a0_rhs


@njit(cache=True)
def covariant_laplacian(phi, v1, v2, em2rho, h1, h2):
    n2, n1 = phi.shape
    out = np.empty((n2, n1), dtype=np.complex128)
    ih1sq = 1.0 / (h1 * h1)
    ih2sq = 1.0 / (h2 * h2)
    for i2 in range(n2):
        i2p = i2 + 1 if i2 + 1 < n2 else 0
        i2m = i2 - 1 if i2 > 0 else n2 - 1
        for i1 in range(n1):
            i1p = i1 + 1 if i1 + 1 < n1 else 0
            i1m = i1 - 1 if i1 > 0 else n1 - 1
            p = phi[i2, i1]
            lap = ((v1[i2, i1] * phi[i2, i1p] - 2.0 * p
                    + v1[i2, i1m].conjugate() * phi[i2, i1m]) * ih1sq
                   + (v2[i2, i1] * phi[i2p, i1] - 2.0 * p
                      + v2[i2m, i1].conjugate() * phi[i2m, i1]) * ih2sq)
            out[i2, i1] = em2rho[i2, i1] * lap
    return out


@njit(cache=True)
def euler_update(a1, a2, phi, ga1, ga2, gphi, a0, dt, h1, h2):
    n2, n1 = a1.shape
    na1 = np.empty((n2, n1), dtype=np.float64)
    na2 = np.empty((n2, n1), dtype=np.float64)
    nphi = np.empty((n2, n1), dtype=np.complex128)
    ih1 = 1.0 / h1
    ih2 = 1.0 / h2
    for i2 in range(n2):
        i2p = i2 + 1 if i2 + 1 < n2 else 0
        for i1 in range(n1):
            i1p = i1 + 1 if i1 + 1 < n1 else 0
            c = a0[i2, i1]
            na1[i2, i1] = a1[i2, i1] + dt * ((a0[i2, i1p] - c) * ih1 - ga1[i2, i1])
            na2[i2, i1] = a2[i2, i1] + dt * ((a0[i2p, i1] - c) * ih2 - ga2[i2, i1])
            p = phi[i2, i1]
            nphi[i2, i1] = p + dt * (1j * (c * p) - gphi[i2, i1])
    return na1, na2, nphi


@njit(cache=True)
def plaquette_windings(phi, v1, v2, arg_w):
    n2, n1 = phi.shape
    wind = np.empty((n2, n1), dtype=np.int64)
    two_pi = 2.0 * math.pi
    # edge phases arg(conj(phi(x)) V_j(x) phi(x+e_j)) precomputed per site
    a1 = np.empty((n2, n1), dtype=np.float64)
    a2 = np.empty((n2, n1), dtype=np.float64)
    for i2 in range(n2):
        i2p = i2 + 1 if i2 + 1 < n2 else 0
        for i1 in range(n1):
            i1p = i1 + 1 if i1 + 1 < n1 else 0
            pc = phi[i2, i1].conjugate()
            z1 = pc * v1[i2, i1] * phi[i2, i1p]
            z2 = pc * v2[i2, i1] * phi[i2p, i1]
            a1[i2, i1] = math.atan2(z1.imag, z1.real)
            a2[i2, i1] = math.atan2(z2.imag, z2.real)
    for i2 in range(n2):
        i2p = i2 + 1 if i2 + 1 < n2 else 0
        for i1 in range(n1):
            i1p = i1 + 1 if i1 + 1 < n1 else 0
            s = a1[i2, i1] + a2[i2, i1p] - a1[i2p, i1] - a2[i2, i1]
            wind[i2, i1] = int(round((s - arg_w[i2, i1]) / two_pi))
    return wind
