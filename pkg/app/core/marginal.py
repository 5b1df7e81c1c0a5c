"""
Marginal Likelihood
Laplace approximation of the alpha-fractional marginal likelihood, a
Monte-Carlo oracle for the exact integral, and composed log posterior weights.
All computations stay in log space.
"""
import logging
import math
from typing import Optional, Tuple

import numpy as np
from scipy.special import logsumexp

from core.cache import FitCache
from core.exceptions import InvalidFitError
from core.prior import log_model_prior, slab_sample
from families import get_family
from models.data import Dataset, FitResult, LogWeight, ModelSupport
from models.schemas import Hyperparams

logger = logging.getLogger(__name__)


def log_size_penalty(size: int, h: Hyperparams) -> float:
    """(|S|/2) log(1 + alpha/lambda)."""
    return 0.5 * size * math.log1p(h.alpha / h.lam)


def log_laplace_marginal(fit: FitResult, h: Hyperparams, size: Optional[int] = None) -> float:
    """alpha L(theta_hat) - (|S|/2) log(1 + alpha/lambda); -inf for invalid fits."""
    if not fit.converged:
        return -np.inf
    size = fit.size if size is None else size
    return h.alpha * fit.loglik_at_mle - log_size_penalty(size, h)


def log_marginal_mc(
    family,
    data: Dataset,
    s: ModelSupport,
    fit: FitResult,
    h: Hyperparams,
    n_draws: int,
    rng: np.random.Generator,
) -> Tuple[float, float]:
    """
    Importance-sampling estimate of log int exp(alpha L) g_S dtheta with
    draws from g_S itself, centered at the MLE:
        alpha L(theta_hat) + log mean_k exp(alpha (L(theta_k) - L(theta_hat))).
    Returns (estimate, delta-method standard error of the log).
    """
    family = get_family(family)
    if not fit.converged:
        raise InvalidFitError(f"Monte-Carlo marginal for {s} needs a converged fit")
    if n_draws < 1000:
        raise ValueError("n_draws must be at least 1000")
    if s.size == 0:
        return h.alpha * fit.loglik_at_mle, 0.0

    xs = data.columns(s)
    draws = slab_sample(fit, h.lam, rng, size=n_draws)
    eta = xs @ draws.T                                     # n x n_draws
    log_ratio = np.full(n_draws, -np.inf)
    ok = np.all(eta <= family.max_eta, axis=0)
    if np.any(ok):
        loglik = data.y @ eta[:, ok] - np.sum(family.b(eta[:, ok]), axis=0)
        log_ratio[ok] = h.alpha * (loglik - fit.loglik_at_mle)
    if not np.all(ok):
        logger.debug(f"{int(np.sum(~ok))} saturated draws dropped for {s}")

    log_mean = float(logsumexp(log_ratio) - math.log(n_draws))
    w = np.exp(log_ratio - np.max(log_ratio))
    mean_w = float(np.mean(w))
    std_err = float(np.std(w, ddof=1) / math.sqrt(n_draws) / mean_w)
    return h.alpha * fit.loglik_at_mle + log_mean, std_err


def log_posterior_weight(
    s: ModelSupport,
    data: Dataset,
    family,
    h: Hyperparams,
    cache: Optional[FitCache] = None,
) -> LogWeight:
    """log pi_n(S) + log M_hat(S) with audit components; invalid models get -inf."""
    log_prior = log_model_prior(s, data.p, h)
    if not np.isfinite(log_prior):
        return LogWeight(-np.inf, log_prior, -np.inf, None)
    if cache is None:
        cache = FitCache(data, family)
    fit = cache.fit(s)
    log_laplace = log_laplace_marginal(fit, h)
    value = log_prior + log_laplace if np.isfinite(log_laplace) else -np.inf
    return LogWeight(value, log_prior, log_laplace, fit.status)
