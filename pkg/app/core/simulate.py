"""
Simulation
Random-design data generation and the replicated selection experiment.

Replication seeds are spawned from the master seed with numpy's
SeedSequence, so replications can run on any number of threads and still
produce identical metrics.
"""
import logging
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, Optional, Tuple

import numpy as np
from scipy import linalg

from core.cache import FitCache
from core.config import get_settings
from core.exceptions import ConfigError
from core.sampler import count_supports, enumerate_exact, modal_model, sample_chain
from families import get_family
from models.data import Dataset, ModelSupport
from models.schemas import (
    CovarianceKind, CovarianceSpec, DesignKind, ReplicationSummary, SelectionMethod,
    SelectionMetrics, SimConfig,
)

logger = logging.getLogger(__name__)


# ==================== Design ====================

def covariance_matrix(cov: CovarianceSpec, p: int) -> np.ndarray:
    idx = np.arange(p)
    if cov.kind == CovarianceKind.AR1:
        return cov.rho ** np.abs(idx[:, None] - idx[None, :])
    sigma = np.full((p, p), cov.rho)
    np.fill_diagonal(sigma, 1.0)
    return sigma


def design_band(sigma: np.ndarray) -> Tuple[float, float, float]:
    """(lambda_min, lambda_max, ||Sigma^-1||_inf) of a design covariance."""
    w = linalg.eigvalsh(sigma)
    inverse = linalg.inv(sigma)
    return float(w[0]), float(w[-1]), float(np.max(np.sum(np.abs(inverse), axis=1)))


def gen_design(cfg: SimConfig, rng: np.random.Generator) -> np.ndarray:
    """i.i.d. N(0, 1) entries, or rows N(0, Sigma) through a Cholesky factor of Sigma."""
    z = rng.standard_normal((cfg.n, cfg.p))
    if cfg.design == DesignKind.IID_GAUSSIAN:
        return z
    sigma = covariance_matrix(cfg.covariance, cfg.p)
    try:
        chol = linalg.cholesky(sigma, lower=True)
    except linalg.LinAlgError as e:
        raise ConfigError(f"design covariance is not positive definite: {e}") from e
    return z @ chol.T


def gen_theta0(cfg: SimConfig, rng: np.random.Generator) -> Tuple[np.ndarray, ModelSupport]:
    """True parameter: uniform random support, random signs, configured magnitudes."""
    theta0 = np.zeros(cfg.p)
    if cfg.s0 == 0:
        return theta0, ModelSupport.empty()
    support = ModelSupport.of(rng.choice(cfg.p, size=cfg.s0, replace=False))
    if cfg.signal_values is not None:
        magnitudes = np.asarray(cfg.signal_values, dtype=float)
    elif cfg.signal_range is not None:
        magnitudes = rng.uniform(cfg.signal_range[0], cfg.signal_range[1], size=cfg.s0)
    else:
        magnitudes = np.ones(cfg.s0)
    signs = rng.choice((-1.0, 1.0), size=cfg.s0)
    theta0[list(support.indices)] = signs * magnitudes
    return theta0, support


def gen_response(family, x: np.ndarray, theta0, rng: np.random.Generator) -> np.ndarray:
    """Bernoulli(logistic(x_i'theta0)) or Poisson(exp(x_i'theta0)) draws."""
    return get_family(family).sample(np.asarray(x) @ np.asarray(theta0, dtype=float), rng)


# ==================== Experiment ====================

def _use_enumeration(cfg: SimConfig) -> bool:
    if cfg.method == SelectionMethod.EXACT:
        return True
    if cfg.method == SelectionMethod.CHAIN:
        return False
    return count_supports(cfg.p, cfg.hyperparams.s_max) <= get_settings().enumeration_limit


def posterior_over_models(
    cfg: SimConfig,
    data: Dataset,
    seed: np.random.SeedSequence,
) -> Tuple[Dict[ModelSupport, float], SelectionMethod]:
    """Exact posterior when enumerable, else chain visit frequencies."""
    family = get_family(cfg.family)
    cache = FitCache(data, family)
    if _use_enumeration(cfg):
        return enumerate_exact(data, family, cfg.hyperparams, cache), SelectionMethod.EXACT

    visits: Counter = Counter()
    for chain_seed in seed.spawn(cfg.chain.n_chains):
        run = sample_chain(
            data, family, cfg.hyperparams, cfg.chain.n_iter, cfg.chain.burnin,
            ModelSupport.of(cfg.chain.init), chain_seed, cache,
        )
        visits.update(run.visits)
    total = sum(visits.values())
    return {s: c / total for s, c in visits.items()}, SelectionMethod.CHAIN


def run_replication(cfg: SimConfig, index: int, seed: np.random.SeedSequence) -> ReplicationSummary:
    family = get_family(cfg.family)
    data_seed, chain_seed = seed.spawn(2)
    rng = np.random.default_rng(data_seed)
    x = gen_design(cfg, rng)
    theta0, truth = gen_theta0(cfg, rng)
    y = gen_response(family, x, theta0, rng)
    data = Dataset(x, y)

    probs, method = posterior_over_models(cfg, data, chain_seed)
    modal = modal_model(probs)
    summary = ReplicationSummary(
        replication=index,
        method=method,
        true_support=list(truth.indices),
        modal_model=list(modal.indices),
        mass_on_true=min(1.0, probs.get(truth, 0.0)),
        false_positives=len(set(modal.indices) - set(truth.indices)),
        false_negatives=len(set(truth.indices) - set(modal.indices)),
    )
    logger.info(
        f"Replication {index}: truth {truth}, modal {modal}, mass on truth {summary.mass_on_true:.3f} ({method.value})"
    )
    return summary


def run_experiment(cfg: SimConfig, threads: Optional[int] = None) -> SelectionMetrics:
    threads = threads or cfg.threads or get_settings().threads
    seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.replications)
    if cfg.design == DesignKind.GAUSSIAN_WITH_COVARIANCE:
        lo, hi, inv_norm = design_band(covariance_matrix(cfg.covariance, cfg.p))
        logger.info(f"Design covariance band: [{lo:.4g}, {hi:.4g}], ||Sigma^-1||_inf = {inv_norm:.4g}")

    with ThreadPoolExecutor(max_workers=max(1, threads)) as executor:
        results = list(executor.map(lambda args: run_replication(cfg, *args), enumerate(seeds)))

    count = len(results)
    return SelectionMetrics(
        exact_recovery_rate=sum(r.modal_model == r.true_support for r in results) / count,
        mean_mass_on_true=sum(r.mass_on_true for r in results) / count,
        mean_false_positives=sum(r.false_positives for r in results) / count,
        mean_false_negatives=sum(r.false_negatives for r in results) / count,
        config=cfg.model_dump(mode="json", by_alias=True),
        replications=results,
    )
