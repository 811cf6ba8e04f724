"""Flat torus geometry: grid, conformal factor, area, Bradlow regime."""

import numpy as np

from .errors import ConfigurationError

SUPERCRITICAL = "supercritical"
CRITICAL = "critical"
SUBCRITICAL = "subcritical"

# Relative tolerance for classifying the degenerate area = 4*pi*N case.
CRITICAL_RTOL = 1e-12


class TorusGeometry:
    """Periodic rectangle [0,L1) x [0,L2) with metric exp(2*rho) * flat.

    Fields live on an n2 x n1 grid, axis 0 along x2 and axis 1 along x1,
    so a C-order flattening runs through x1 fastest.
    """

    def __init__(self, L1, L2, n1, n2, rho):
        self.L1 = float(L1)
        self.L2 = float(L2)
        self.n1 = int(n1)
        self.n2 = int(n2)
        self.h1 = self.L1 / self.n1
        self.h2 = self.L2 / self.n2
        self.rho = rho
        self.e2rho = np.exp(2.0 * rho)
        self.em2rho = np.exp(-2.0 * rho)
        # quadrature weights for integrals against the metric area element
        self.weights = self.e2rho * (self.h1 * self.h2)
        self.area = float(np.sum(self.weights))
        for arr in (self.rho, self.e2rho, self.em2rho, self.weights):
            arr.setflags(write=False)

    @property
    def shape(self):
        return (self.n2, self.n1)

    def x1(self):
        """Site coordinates along axis 1, shape (1, n1)."""
        return (self.h1 * np.arange(self.n1))[None, :]

    def x2(self):
        """Site coordinates along axis 0, shape (n2, 1)."""
        return (self.h2 * np.arange(self.n2))[:, None]

    def rho_is_constant(self):
        return float(np.ptp(self.rho)) == 0.0

    def __repr__(self):
        return (f"TorusGeometry(L1={self.L1}, L2={self.L2}, "
                f"n1={self.n1}, n2={self.n2}, area={self.area:.6g})")


class Regime:
    """Classification of the torus area against the 4*pi*N threshold."""

    def __init__(self, kind, gap):
        self.kind = kind
        self.gap = float(gap)

    @property
    def supercritical(self):
        return self.kind == SUPERCRITICAL

    @property
    def critical(self):
        return self.kind == CRITICAL

    @property
    def subcritical(self):
        return self.kind == SUBCRITICAL

    def __repr__(self):
        return f"Regime({self.kind}, gap={self.gap:.6g})"


def make_geometry(L1, L2, n1, n2, rho=None):
    """Build a TorusGeometry; rho is an optional (n2*n1)-sample array."""
    if not (L1 > 0 and L2 > 0):
        raise ConfigurationError("torus side lengths must be positive")
    if n1 < 8 or n2 < 8:
        raise ConfigurationError("grid resolution must be at least 8 per direction")
    if rho is None:
        rho_arr = np.zeros((n2, n1))
    else:
        rho_arr = np.asarray(rho, dtype=float)
        if rho_arr.size != n1 * n2:
            raise ConfigurationError(
                f"rho has {rho_arr.size} samples, expected n1*n2 = {n1 * n2}")
        rho_arr = rho_arr.reshape(n2, n1).copy()
    return TorusGeometry(L1, L2, n1, n2, rho_arr)


def area(geom):
    """Total metric area, sum of exp(2*rho)*h1*h2 over sites."""
    return geom.area


def background_field_strength(N, geom):
    """Constant curvature 2*pi*N / area carried by the degree-N background."""
    if N < 0:
        raise ConfigurationError("bundle degree N must be non-negative")
    return 2.0 * np.pi * N / geom.area


def regime(N, geom):
    """Classify against the vortex-existence threshold area = 4*pi*N."""
    if N < 0:
        raise ConfigurationError("bundle degree N must be non-negative")
    gap = geom.area - 4.0 * np.pi * N
    if abs(gap) <= CRITICAL_RTOL * geom.area:
        kind = CRITICAL
    elif gap > 0:
        kind = SUPERCRITICAL
    else:
        kind = SUBCRITICAL
    return Regime(kind, gap)


def v_min(N, geom):
    """Minimum energy: pi*N above threshold, pi*N + (4*pi*N - area)^2 / (8*area) below."""
    if N < 0:
        raise ConfigurationError("bundle degree N must be non-negative")
    a = geom.area
    if a > 4.0 * np.pi * N:
        return np.pi * N
    return np.pi * N + (4.0 * np.pi * N - a) ** 2 / (8.0 * a)
