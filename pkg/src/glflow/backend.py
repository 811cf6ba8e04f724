"""Kernel backend selection: numba when available, numpy otherwise.

Set GLFLOW_DISABLE_NUMBA=1 to force the pure-numpy path. The two backends
agree to rounding (not bit-exact: summation orders differ), and each one is
individually deterministic.
"""

import os

from . import kernels_numpy

_disabled = os.environ.get("GLFLOW_DISABLE_NUMBA", "0") not in ("0", "", "false")

if _disabled:
    _impl = kernels_numpy
    ACTIVE = "numpy"
else:
    try:
        from . import kernels_numba as _impl
        ACTIVE = "numba"
    except ImportError:
        _impl = kernels_numpy
        ACTIVE = "numpy"


def active():
    """Name of the kernel backend in use: 'numba' or 'numpy'."""
    return ACTIVE


link_phases = _impl.link_phases
covariant_diffs = _impl.covariant_diffs
plaquette_field = _impl.plaquette_field
gradient_forces = _impl.gradient_forces
covariant_laplacian = _impl.covariant_laplacian
euler_update = _impl.euler_update
plaquette_windings = _impl.plaquette_windings
