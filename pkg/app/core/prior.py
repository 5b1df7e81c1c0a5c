"""
Prior
Complexity prior over supports and the empirical Gaussian slab centered at
the per-model MLE.

Size weights are geometric, w_n(s) proportional to p^(-A4 s) on {0..s_max},
normalized over sizes; within a size the prior is uniform over the C(p, s)
supports. The empty model is part of the prior support.
"""
import logging
import math
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy import linalg
from scipy.special import gammaln, logsumexp

from core.exceptions import InvalidFitError
from models.data import FitResult, ModelSupport
from models.schemas import HyperparamReport, Hyperparams

logger = logging.getLogger(__name__)


# ==================== Complexity prior ====================

@lru_cache(maxsize=256)
def log_size_weights(p: int, a4: float, s_max: int) -> np.ndarray:
    """log w_n(s) for s = 0..s_max."""
    sizes = np.arange(s_max + 1, dtype=float)
    raw = -a4 * sizes * math.log(p) if p > 1 else np.zeros_like(sizes)
    out = raw - logsumexp(raw)
    out.setflags(write=False)
    return out


def log_binom(p: int, s: int) -> float:
    return float(gammaln(p + 1) - gammaln(s + 1) - gammaln(p - s + 1))


def log_model_prior(s: ModelSupport, p: int, h: Hyperparams) -> float:
    """log pi_n(S) = log w_n(|S|) - log C(p, |S|); -inf beyond s_max."""
    if s.size > h.s_max or s.size > p:
        return -np.inf
    return float(log_size_weights(p, h.a4, h.s_max)[s.size]) - log_binom(p, s.size)


# ==================== Empirical slab ====================

def _require_converged(fit: FitResult):
    if not fit.converged:
        raise InvalidFitError(f"slab for {fit.support} needs a converged fit, got {fit.status.value}")


def slab_logpdf(theta, fit: FitResult, lam: float) -> float:
    """log N(theta | theta_hat, (lam F)^-1), F = fisher_chol fisher_chol'."""
    _require_converged(fit)
    k = fit.size
    d = np.asarray(theta, dtype=float).reshape(-1) - fit.theta_hat
    quad = lam * float(np.sum((fit.fisher_chol.T @ d) ** 2))
    return 0.5 * (k * math.log(lam) + fit.logdet_fisher - k * math.log(2.0 * math.pi) - quad)


def slab_sample(fit: FitResult, lam: float, rng: np.random.Generator, size: Optional[int] = None) -> np.ndarray:
    """
    Exact draws theta_hat + lam^-1/2 L^-T z. Returns shape (|S|,) or (size, |S|).
    """
    _require_converged(fit)
    k = fit.size
    m = 1 if size is None else size
    z = rng.standard_normal((k, m))
    draws = fit.theta_hat[:, None] + linalg.solve_triangular(fit.fisher_chol, z, lower=True, trans="T") / math.sqrt(lam)
    return draws[:, 0] if size is None else draws.T


# ==================== Hyperparameter constraint ====================

def hyperparam_slack(
    alpha: float,
    lam: float,
    a4: float,
    a7: float,
    c_dev: float,
    p: int,
    s0: int = 1,
    delta1: float = 0.0,
) -> HyperparamReport:
    """
    Evaluate A4 > A6 p^-A7 and A4 + A7/2 > alpha (16 C_dev) + log_p(s0) + delta1,
    with A6 = lam p^A7 so that the first reads A4 > lam.
    """
    log_p_s0 = math.log(s0) / math.log(p) if p > 1 and s0 > 0 else 0.0
    a6 = lam * p ** a7
    bound_second = alpha * 16.0 * c_dev + log_p_s0 + delta1
    slack_first = a4 - a6 * p ** (-a7)
    slack_second = a4 + a7 / 2.0 - bound_second
    return HyperparamReport(
        alpha=alpha, lam=lam, a4=a4, a6=a6, a7=a7, delta1=delta1, c_dev=c_dev, p=p, s0=s0,
        slack_first=slack_first,
        slack_second=slack_second,
        satisfied_first=slack_first > 0,
        satisfied_second=slack_second > 0,
        min_a4=max(lam, bound_second - a7 / 2.0),
    )


def check_hyperparams(
    h: Hyperparams,
    p: int,
    s0_hint: Optional[int] = None,
    c_dev: Optional[float] = None,
) -> HyperparamReport:
    """Advisory only: reports the slack, never blocks a run."""
    c_dev = c_dev if c_dev is not None else h.c_dev
    if c_dev is None:
        raise ValueError("c_dev is required (pass it or set Hyperparams.c_dev)")
    report = hyperparam_slack(h.alpha, h.lam, h.a4, h.a7, c_dev, p, s0_hint or 1, h.delta1)
    if not report.satisfied:
        logger.warning(
            f"Hyperparameters outside the consistency region: slack {report.slack_first:.4g} / "
            f"{report.slack_second:.4g}; A4 >= {report.min_a4:.4g} would be needed"
        )
    return report
