"""Count responses with the log link, b(eta) = e^eta."""
from typing import Optional

import numpy as np

from core.exceptions import SaturationError
from . import BaseFamily, FamilyRegistry


@FamilyRegistry.register("poisson")
class PoissonFamily(BaseFamily):
    c_dev = float(np.exp(0.5))
    theta_norm_cap = 30.0
    max_eta = 700.0

    def _exp(self, eta) -> np.ndarray:
        eta = np.asarray(eta, dtype=float)
        if np.any(eta > self.max_eta):
            raise SaturationError(
                f"linear predictor {float(np.max(eta)):.6g} exceeds {self.max_eta:g}; exp() saturates"
            )
        return np.exp(eta)

    # b = b' = b'' = b''' for the Poisson family
    def b(self, eta):
        return self._exp(eta)

    def b1(self, eta):
        return self._exp(eta)

    def b2(self, eta):
        return self._exp(eta)

    def b3(self, eta):
        return self._exp(eta)

    def first_invalid(self, y) -> Optional[int]:
        y = np.asarray(y, dtype=float)
        bad = np.flatnonzero((y < 0) | (y != np.floor(y)))
        return int(bad[0]) if bad.size else None

    def sample(self, eta, rng: np.random.Generator) -> np.ndarray:
        return rng.poisson(self._exp(eta)).astype(float)
