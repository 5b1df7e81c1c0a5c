"""
Maximum Likelihood
Per-model MLE by Newton iterations with step halving, and the population
optimizer theta*_S obtained from pseudo-responses b'(x_i'theta0).
"""
import logging
from typing import Optional

import numpy as np
from scipy import linalg

from core.exceptions import DimensionMismatchError, InvalidFitError, SaturationError
from core.glm import fisher_block, loglik_block, restrict, score_block, true_predictor
from families import BaseFamily, get_family
from models.data import Dataset, FitResult, ModelSupport
from models.schemas import FitOptions, FitStatus

logger = logging.getLogger(__name__)

# pivot of the equilibrated factor below which F is treated as rank deficient
_PIVOT_RATIO = 1e-7
# loglik drop within roundoff that still counts as an accepted step
_LOGLIK_SLACK = 1e-13
# population optimizer tolerance (superset identities hold to 1e-8)
_POPULATION_OPTIONS = FitOptions(grad_tol=1e-11)


def _factor(fisher: np.ndarray) -> Optional[np.ndarray]:
    """
    Lower Cholesky factor, or None if F is not numerically positive definite.
    The rank test runs on D^-1/2 F D^-1/2 with D = diag(F), so rescaling a
    column never changes the verdict.
    """
    scale = np.sqrt(np.diag(fisher))
    if not np.all(np.isfinite(scale)) or np.any(scale <= 0.0):
        return None
    try:
        unit = linalg.cholesky(fisher / np.outer(scale, scale), lower=True)
    except linalg.LinAlgError:
        return None
    pivots = np.diag(unit)
    if not np.all(np.isfinite(pivots)) or pivots.min() <= _PIVOT_RATIO:
        return None
    return scale[:, None] * unit


def _loglik_or_inf(family: BaseFamily, xs, y, theta) -> float:
    try:
        return loglik_block(family, xs, y, theta)
    except SaturationError:
        return -np.inf


def _failed(support, theta, loglik, status, iterations, grad_norm, path) -> FitResult:
    k = support.size
    return FitResult(
        support=support,
        theta_hat=theta,
        loglik_at_mle=loglik,
        fisher_chol=np.full((k, k), np.nan),
        logdet_fisher=np.nan,
        status=status,
        iterations=iterations,
        grad_norm=grad_norm,
        loglik_path=tuple(path),
    )


def newton_fit(
    family: BaseFamily,
    xs: np.ndarray,
    y: np.ndarray,
    support: ModelSupport,
    opts: FitOptions,
    theta_init: Optional[np.ndarray] = None,
) -> FitResult:
    """Maximize sum_i y_i eta_i - b(eta_i) over theta for the block xs."""
    n, k = xs.shape
    cap = opts.theta_norm_cap or family.theta_norm_cap
    # the cap applies to theta in units of unit-RMS columns
    col_rms = np.sqrt(np.mean(xs * xs, axis=0))

    if k == 0:
        loglik = float(-np.sum(family.b(np.zeros(n))))
        return FitResult(support, np.zeros(0), loglik, np.zeros((0, 0)), 0.0,
                         FitStatus.CONVERGED, 0, 0.0, (loglik,))
    if k > n:
        return _failed(support, np.zeros(k), -np.inf, FitStatus.SINGULAR, 0, np.inf, ())

    theta = np.zeros(k) if theta_init is None else np.asarray(theta_init, dtype=float).copy()
    if theta.shape != (k,):
        raise DimensionMismatchError(f"theta_init has shape {theta.shape}, expected ({k},)")
    loglik = _loglik_or_inf(family, xs, y, theta)
    if not np.isfinite(loglik):
        return _failed(support, theta, loglik, FitStatus.SEPARATED, 0, np.inf, ())
    path = [loglik]
    grad_norm = np.inf

    for iteration in range(opts.max_iter + 1):
        grad = score_block(family, xs, y, theta)
        grad_norm = float(np.linalg.norm(grad))
        chol = _factor(fisher_block(family, xs, theta))
        if chol is None:
            logger.debug(f"Singular Fisher information for support {support}")
            return _failed(support, theta, loglik, FitStatus.SINGULAR, iteration, grad_norm, path)

        # Newton decrement g'F^-1 g is unchanged by rescaling columns
        half = linalg.solve_triangular(chol, grad, lower=True)
        tol = opts.grad_tol * (1.0 + abs(loglik))
        if grad_norm <= tol and float(half @ half) <= tol:
            if family.perfectly_fitted(y, xs @ theta):
                logger.debug(f"Support {support}: responses perfectly separated")
                return _failed(support, theta, loglik, FitStatus.SEPARATED, iteration, grad_norm, path)
            return FitResult(
                support=support,
                theta_hat=theta,
                loglik_at_mle=loglik,
                fisher_chol=chol,
                logdet_fisher=float(2.0 * np.sum(np.log(np.diag(chol)))),
                status=FitStatus.CONVERGED,
                iterations=iteration,
                grad_norm=grad_norm,
                loglik_path=tuple(path),
            )
        if iteration == opts.max_iter:
            break

        step = linalg.solve_triangular(chol, half, lower=True, trans="T")
        t = 1.0
        for _ in range(opts.step_halvings + 1):
            candidate = theta + t * step
            cand_loglik = _loglik_or_inf(family, xs, y, candidate)
            if cand_loglik >= loglik - _LOGLIK_SLACK * (1.0 + abs(loglik)):
                break
            t *= 0.5
        else:
            logger.warning(f"Support {support}: step halving exhausted at iteration {iteration}")
            return _failed(support, theta, loglik, FitStatus.MAX_ITER, iteration, grad_norm, path)

        theta, loglik = candidate, cand_loglik
        path.append(loglik)
        if np.linalg.norm(theta * col_rms) > cap:
            logger.debug(f"Support {support}: ||theta|| exceeded {cap:g}, MLE does not exist")
            return _failed(support, theta, loglik, FitStatus.SEPARATED, iteration + 1, grad_norm, path)

    logger.warning(f"Support {support}: no convergence after {opts.max_iter} iterations")
    return _failed(support, theta, loglik, FitStatus.MAX_ITER, opts.max_iter, grad_norm, path)


def fit_mle(
    family,
    data: Dataset,
    s: ModelSupport,
    opts: Optional[FitOptions] = None,
    theta_init: Optional[np.ndarray] = None,
) -> FitResult:
    """theta_hat_S = argmax L_{n,theta_S}, started at 0 unless theta_init is given."""
    family = get_family(family)
    s.check_bounds(data.p)
    return newton_fit(family, data.columns(s), data.y, s, opts or FitOptions(), theta_init)


def theta_star(family, data: Dataset, s: ModelSupport, theta0, opts: Optional[FitOptions] = None) -> np.ndarray:
    """
    Population optimizer argmax E L_{n,theta_S}: solves
    sum_i (b'(x_i'theta0) - b'(x_iS'theta_S)) x_iS = 0, starting from theta0
    restricted to S (the exact answer when S contains the true support).
    """
    family = get_family(family)
    s.check_bounds(data.p)
    theta0 = np.asarray(theta0, dtype=float).reshape(-1)
    if theta0.shape[0] != data.p:
        raise DimensionMismatchError(f"theta0 must have p={data.p} entries")
    mu0 = family.b1(true_predictor(data, theta0))
    fit = newton_fit(family, data.columns(s), mu0, s, opts or _POPULATION_OPTIONS, restrict(theta0, s))
    if not fit.converged:
        raise InvalidFitError(f"population optimizer for {s} failed: {fit.status.value}")
    return fit.theta_hat
