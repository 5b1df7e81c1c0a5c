"""
GLM Core
Log-likelihood, score, Fisher information, variance matrices and the mean
Hellinger distance for fixed-design GLMs with canonical links.

L omits the k(y) term of the density. Everything built on top of it is a
likelihood ratio or a ratio of marginals, where k(y) cancels; absolute
densities would need k added per family.

All functions are pure and thread-safe.
"""
from typing import Optional, Sequence, Tuple

import numpy as np

from core.exceptions import DimensionMismatchError
from families import BaseFamily, get_family
from models.data import Dataset, ModelSupport, support_of


def link_values(family, eta) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """b(eta), b'(eta), b''(eta), b'''(eta)."""
    return get_family(family).link_values(eta)


# ==================== Design-level kernels ====================
# Work on a column block xs (n x k) and any response vector, so the MLE
# solver can reuse them with pseudo-responses.

def _as_theta(xs: np.ndarray, theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float).reshape(-1)
    if theta.shape[0] != xs.shape[1]:
        raise DimensionMismatchError(
            f"parameter has {theta.shape[0]} entries, support has {xs.shape[1]} columns"
        )
    return theta


def loglik_block(family: BaseFamily, xs: np.ndarray, y: np.ndarray, theta) -> float:
    eta = xs @ _as_theta(xs, theta)
    return float(y @ eta - np.sum(family.b(eta)))


def score_block(family: BaseFamily, xs: np.ndarray, y: np.ndarray, theta) -> np.ndarray:
    eta = xs @ _as_theta(xs, theta)
    return xs.T @ (y - family.b1(eta))


def weighted_gram(xs: np.ndarray, w: np.ndarray) -> np.ndarray:
    """X' diag(w) X, symmetrized."""
    g = xs.T @ (w[:, None] * xs)
    return 0.5 * (g + g.T)


def fisher_block(family: BaseFamily, xs: np.ndarray, theta) -> np.ndarray:
    eta = xs @ _as_theta(xs, theta)
    return weighted_gram(xs, family.b2(eta))


# ==================== Public operations ====================

def _block(data: Dataset, s: ModelSupport) -> np.ndarray:
    s.check_bounds(data.p)
    return data.columns(s)


def _as_full(data: Dataset, theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float).reshape(-1)
    if theta.shape[0] != data.p:
        raise DimensionMismatchError(f"full parameter must have p={data.p} entries, got {theta.shape[0]}")
    return theta


def linear_predictor(data: Dataset, s: ModelSupport, theta) -> np.ndarray:
    xs = _block(data, s)
    return xs @ _as_theta(xs, theta)


def true_predictor(data: Dataset, theta0) -> np.ndarray:
    """x_i'theta0 for a full-dimensional theta0, computed on its support only."""
    theta0 = _as_full(data, theta0)
    s0 = support_of(theta0)
    return linear_predictor(data, s0, theta0[list(s0.indices)])


def log_likelihood(family, data: Dataset, s: ModelSupport, theta) -> float:
    """sum_i y_i x_iS'theta - b(x_iS'theta); the k(y) term is omitted."""
    return loglik_block(get_family(family), _block(data, s), data.y, theta)


def score(family, data: Dataset, s: ModelSupport, theta) -> np.ndarray:
    return score_block(get_family(family), _block(data, s), data.y, theta)


def fisher_info(family, data: Dataset, s: ModelSupport, theta) -> np.ndarray:
    """X_S' W_theta X_S with W = diag(b''(x_iS'theta))."""
    return fisher_block(get_family(family), _block(data, s), theta)


def v_matrix(family, data: Dataset, s: ModelSupport, theta0) -> np.ndarray:
    """X_S' W_0 X_S with the true-parameter weights b''(x_i'theta0)."""
    family = get_family(family)
    w0 = family.b2(true_predictor(data, theta0))
    return weighted_gram(_block(data, s), w0)


def hellinger_n(family, data: Dataset, theta1, theta2) -> float:
    """sqrt(mean_i H^2) with H^2 = 1 - exp{b((eta1+eta2)/2) - (b(eta1)+b(eta2))/2}."""
    family = get_family(family)
    eta1 = true_predictor(data, theta1)
    eta2 = true_predictor(data, theta2)
    log_affinity = family.b(0.5 * (eta1 + eta2)) - 0.5 * (family.b(eta1) + family.b(eta2))
    h2 = -np.expm1(np.minimum(log_affinity, 0.0))
    return float(np.sqrt(np.mean(h2)))


def restrict(theta0, s: ModelSupport) -> np.ndarray:
    """theta0 restricted to the coordinates in S."""
    return np.asarray(theta0, dtype=float)[list(s.indices)]


def empirical_c_dev(family, grid: Optional[Sequence[float]] = None, shifts: int = 41) -> float:
    """max over the grid of sup_{|y| <= 1/2} b''(x + y) / b''(x)."""
    family = get_family(family)
    x = np.linspace(-30.0, 30.0, 601) if grid is None else np.asarray(grid, dtype=float)
    y = np.linspace(-0.5, 0.5, shifts)
    ratio = family.b2(x[:, None] + y[None, :]) / family.b2(x)[:, None]
    return float(np.max(ratio))
