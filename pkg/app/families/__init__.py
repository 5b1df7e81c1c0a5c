"""
GLM Family Package
Exports the FamilyRegistry and BaseFamily.
Automatically discovers and registers families in this directory.

To add a new family:
  1. Create a new .py file in this folder.
  2. Subclass BaseFamily and decorate it with @FamilyRegistry.register("name").
  3. It is picked up on import of this package.

Every family uses its canonical link, so the natural parameter is the
linear predictor eta = x'theta and the density is exp{y*eta - b(eta) + k(y)}.
The k(y) term is never evaluated: every quantity computed downstream is a
likelihood ratio or a ratio of marginals in which it cancels.
"""
from abc import ABC, abstractmethod
from typing import Dict, Optional, Sequence, Tuple
import importlib
import logging
import os
import pkgutil

import numpy as np

from core.exceptions import DataValidationError

logger = logging.getLogger(__name__)


class BaseFamily(ABC):
    """Base class for canonical-link exponential families"""

    name: str = ""
    # sup_{|y| <= 1/2} b''(x + y) <= c_dev * b''(x)
    c_dev: float = 1.0
    # ||theta||_2 above this during a fit means the MLE does not exist
    theta_norm_cap: float = 50.0
    # largest linear predictor the family evaluates
    max_eta: float = np.inf

    @abstractmethod
    def b(self, eta: np.ndarray) -> np.ndarray:
        """Cumulant function b(eta)"""

    @abstractmethod
    def b1(self, eta: np.ndarray) -> np.ndarray:
        """Mean function b'(eta)"""

    @abstractmethod
    def b2(self, eta: np.ndarray) -> np.ndarray:
        """Variance function b''(eta)"""

    @abstractmethod
    def b3(self, eta: np.ndarray) -> np.ndarray:
        """Third derivative b'''(eta)"""

    @abstractmethod
    def first_invalid(self, y: np.ndarray) -> Optional[int]:
        """0-based index of the first response outside the support, or None"""

    def validate_response(
        self, y: np.ndarray, lines: Optional[Sequence[int]] = None, column: Optional[str] = None
    ) -> np.ndarray:
        """
        Raise DataValidationError at the first response outside the support,
        naming lines[row] when file lines are given and the 1-based row otherwise.
        """
        bad = self.first_invalid(y)
        if bad is not None:
            line = lines[bad] if lines is not None else bad + 1
            raise DataValidationError(
                f"value {y[bad]:g} is invalid for the {self.name} family", line=line, column=column
            )
        return y

    def perfectly_fitted(self, y: np.ndarray, eta: np.ndarray) -> bool:
        """True when the fitted means reproduce y exactly (MLE at infinity)."""
        return False

    @abstractmethod
    def sample(self, eta: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        """Draw responses with natural parameters eta"""

    def link_values(self, eta) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        return self.b(eta), self.b1(eta), self.b2(eta), self.b3(eta)

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}()"


class FamilyRegistry:
    """Registry for GLM families"""
    _families: Dict[str, BaseFamily] = {}

    @classmethod
    def register(cls, family_name: str):
        """Decorator to register a family class"""
        def decorator(family_class):
            try:
                instance = family_class()
                instance.name = family_name.lower()
                cls._families[family_name.lower()] = instance
                logger.debug(f"Registered family: {family_name} (c_dev={instance.c_dev:.4f})")
            except Exception as e:
                logger.error(f"Failed to register family {family_name}: {e}")
            return family_class
        return decorator

    @classmethod
    def get(cls, family_name: str) -> Optional[BaseFamily]:
        return cls._families.get(family_name.lower())

    @classmethod
    def list_families(cls) -> list:
        return sorted(cls._families.keys())

    @classmethod
    def get_all(cls) -> Dict[str, BaseFamily]:
        return cls._families


def get_family(family) -> BaseFamily:
    """Resolve a family name (or pass an instance through)."""
    if isinstance(family, BaseFamily):
        return family
    found = FamilyRegistry.get(str(getattr(family, "value", family)))
    if found is None:
        valid = ", ".join(FamilyRegistry.list_families())
        raise ValueError(f"Unknown family: {family!r}. Valid families: {valid}")
    return found


# ==================== Automatic Family Discovery ====================

def load_families():
    """Import every module in this package so the decorators run."""
    package_dir = os.path.dirname(__file__)
    for module_info in pkgutil.iter_modules([package_dir]):
        try:
            importlib.import_module(f".{module_info.name}", package=__name__)
        except Exception as e:
            logger.error(f"Failed to load family module {module_info.name}: {e}")


load_families()
