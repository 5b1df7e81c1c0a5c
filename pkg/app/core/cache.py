"""
Fit Cache
Bounded least-recently-used cache of per-model fits, keyed by the canonical
support. One cache belongs to one (dataset, family, fit options) triple.

Safe under concurrent readers and writers: the fit itself runs outside the
lock, so two threads may fit the same support; fits are deterministic, and
the last write wins.
"""
import logging
import threading
from collections import OrderedDict
from typing import Optional

from core.config import get_settings
from core.mle import fit_mle
from families import get_family
from models.data import Dataset, FitResult, ModelSupport
from models.schemas import FitOptions

logger = logging.getLogger(__name__)


class FitCache:
    def __init__(
        self,
        data: Dataset,
        family,
        options: Optional[FitOptions] = None,
        capacity: Optional[int] = None,
    ):
        self.data = data
        self.family = get_family(family)
        self.options = options or FitOptions()
        self.capacity = capacity or get_settings().cache_capacity
        self._fits: "OrderedDict[ModelSupport, FitResult]" = OrderedDict()
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    def __len__(self) -> int:
        return len(self._fits)

    def __contains__(self, support: ModelSupport) -> bool:
        return support in self._fits

    def get(self, support: ModelSupport) -> Optional[FitResult]:
        with self._lock:
            fit = self._fits.get(support)
            if fit is not None:
                self._fits.move_to_end(support)
                self.hits += 1
            return fit

    def put(self, fit: FitResult):
        with self._lock:
            self._fits[fit.support] = fit
            self._fits.move_to_end(fit.support)
            while len(self._fits) > self.capacity:
                evicted, _ = self._fits.popitem(last=False)
                logger.debug(f"Evicted fit for {evicted}")

    def fit(self, support: ModelSupport) -> FitResult:
        """Cached fit_mle for this cache's dataset and family."""
        fit = self.get(support)
        if fit is not None:
            return fit
        fit = fit_mle(self.family, self.data, support, self.options)
        with self._lock:
            self.misses += 1
        self.put(fit)
        return fit

    def stats(self) -> dict:
        return {"size": len(self._fits), "hits": self.hits, "misses": self.misses}
