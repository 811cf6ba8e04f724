"""Flow state container."""

from dataclasses import dataclass

import numpy as np


@dataclass
class FlowState:
    """Dynamical variables at one instant: time, connection one-form (a1, a2),
    Higgs section phi, and the cached temporal potential a0 (None before the
    first solve)."""

    t: float
    a1: np.ndarray
    a2: np.ndarray
    phi: np.ndarray
    a0: np.ndarray | None = None

    @property
    def A(self):
        return self.a1, self.a2

    def copy(self):
        return FlowState(self.t, self.a1.copy(), self.a2.copy(),
                         self.phi.copy(),
                         None if self.a0 is None else self.a0.copy())
