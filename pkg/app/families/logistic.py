"""Bernoulli responses with the logit link, b(eta) = log(1 + e^eta)."""
from typing import Optional

import numpy as np
from scipy.special import expit

from . import BaseFamily, FamilyRegistry


@FamilyRegistry.register("logistic")
class LogisticFamily(BaseFamily):
    c_dev = float(np.exp(1.5))
    theta_norm_cap = 50.0

    def b(self, eta):
        eta = np.asarray(eta, dtype=float)
        return np.maximum(eta, 0.0) + np.log1p(np.exp(-np.abs(eta)))

    def b1(self, eta):
        return expit(np.asarray(eta, dtype=float))

    def b2(self, eta):
        e = np.exp(-np.abs(np.asarray(eta, dtype=float)))
        return e / (1.0 + e) ** 2

    def b3(self, eta):
        eta = np.asarray(eta, dtype=float)
        # b''' = b''(1 - 2b'), so |b'''| <= b''
        return self.b2(eta) * (1.0 - 2.0 * self.b1(eta))

    def first_invalid(self, y) -> Optional[int]:
        bad = np.flatnonzero(~np.isin(np.asarray(y, dtype=float), (0.0, 1.0)))
        return int(bad[0]) if bad.size else None

    def perfectly_fitted(self, y, eta) -> bool:
        y = np.asarray(y, dtype=float)
        # pseudo-responses in (0, 1) can be fitted exactly without separation
        if not np.all(np.isin(y, (0.0, 1.0))):
            return False
        return bool(np.all(np.abs(y - self.b1(eta)) < 1e-6))

    def sample(self, eta, rng: np.random.Generator) -> np.ndarray:
        return rng.binomial(1, self.b1(eta)).astype(float)
