"""
Diagnostics
Theoretical quantities evaluated on concrete instances: normalized score,
misspecification magnitude, design regularity, compatibility numbers,
variance extremes, kappa_n, the beta-min threshold and the remainder of the
local quadratic expansion.

Every function takes the true parameter theta0 explicitly; these are
simulation and verification tools, never part of a fit.
"""
import logging
import math
from itertools import combinations, product
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from core.config import get_settings
from core.exceptions import EnumerationTooLargeError, SingularMatrixError
from core.glm import fisher_block, fisher_info, log_likelihood, restrict, score, true_predictor, v_matrix
from core.mle import theta_star
from families import get_family
from models.data import Dataset, ModelSupport, support_of
from models.schemas import (
    DiagnosticsReport, FitOptions, QuadResidualSample, SparsityDiagnostics, SupportDiagnostics,
)

logger = logging.getLogger(__name__)

# largest support for which sign-orthant enumeration is attempted
PHI1_MAX_SUPPORT = 12


# ==================== Matrix helpers ====================

def _eigh_checked(m: np.ndarray, what: str) -> Tuple[np.ndarray, np.ndarray]:
    w, v = linalg.eigh(m)
    if w.size and w[0] <= 1e-12 * max(w[-1], 1e-300):
        raise SingularMatrixError(f"{what} is not positive definite (lambda_min={w[0]:.3g})")
    return w, v


def inv_sqrt(m: np.ndarray, what: str = "matrix") -> np.ndarray:
    """Symmetric inverse square root via eigendecomposition."""
    w, v = _eigh_checked(m, what)
    return (v / np.sqrt(w)) @ v.T


def population_fisher(family, data: Dataset, s: ModelSupport, theta0, opts: Optional[FitOptions] = None):
    """(theta*_S, F_{n, theta*_S})."""
    family = get_family(family)
    best = theta_star(family, data, s, theta0, opts)
    return best, fisher_block(family, data.columns(s), best)


def fisher_extremes(fisher: np.ndarray) -> Tuple[float, float]:
    """(rho_min, rho_max)."""
    w = linalg.eigvalsh(fisher)
    return float(w[0]), float(w[-1])


def local_radius(theta, best, fisher: np.ndarray) -> float:
    """||F^1/2 (theta - theta*)||_2: the r for which theta lies on the boundary of Theta_S(r)."""
    d = np.asarray(theta, dtype=float) - np.asarray(best, dtype=float)
    return float(math.sqrt(max(d @ fisher @ d, 0.0)))


# ==================== Per-support quantities ====================

def normalized_score(family, data: Dataset, s: ModelSupport, theta0, opts: Optional[FitOptions] = None) -> np.ndarray:
    """xi_{n,S} = F^-1/2 score(theta*_S)."""
    best, fisher = population_fisher(family, data, s, theta0, opts)
    return inv_sqrt(fisher, "F") @ score(family, data, s, best)


def delta_mis(family, data: Dataset, s: ModelSupport, theta0, opts: Optional[FitOptions] = None) -> Tuple[float, float]:
    """(lambda_max(F^-1/2 V F^-1/2), lambda_max(V^-1/2 F V^-1/2))."""
    _, fisher = population_fisher(family, data, s, theta0, opts)
    v = v_matrix(family, data, s, theta0)
    f_root = inv_sqrt(fisher, "F")
    v_root = inv_sqrt(v, "V")
    delta = linalg.eigvalsh(f_root @ v @ f_root)[-1]
    delta_tilde = linalg.eigvalsh(v_root @ fisher @ v_root)[-1]
    return float(delta), float(delta_tilde)


def design_regularity_from(xs: np.ndarray, fisher: np.ndarray) -> float:
    """max_i ||F^-1/2 x_i||_2 = max_i ||L^-1 x_i||_2 with F = L L'."""
    try:
        chol = linalg.cholesky(fisher, lower=True)
    except linalg.LinAlgError as e:
        raise SingularMatrixError(f"F is not positive definite: {e}") from e
    whitened = linalg.solve_triangular(chol, xs.T, lower=True)
    return float(np.sqrt(np.max(np.sum(whitened ** 2, axis=0))))


def design_regularity(family, data: Dataset, s: ModelSupport, theta0, opts: Optional[FitOptions] = None) -> float:
    """zeta_{n,S}."""
    _, fisher = population_fisher(family, data, s, theta0, opts)
    return design_regularity_from(data.columns(s), fisher)


def kappa_from_fisher(fisher: np.ndarray, n: int) -> float:
    """n ||F^-1||_inf (max absolute row sum)."""
    try:
        inverse = linalg.inv(fisher)
    except linalg.LinAlgError as e:
        raise SingularMatrixError(f"F is singular: {e}") from e
    return float(n * np.max(np.sum(np.abs(inverse), axis=1)))


def kappa_n(family, data: Dataset, s: ModelSupport, theta0, opts: Optional[FitOptions] = None) -> float:
    _, fisher = population_fisher(family, data, s, theta0, opts)
    _eigh_checked(fisher, "F")
    return kappa_from_fisher(fisher, data.n)


def cubic_moment_lower(
    xs: np.ndarray,
    rng: np.random.Generator,
    n_directions: int = 256,
    ascent_steps: int = 25,
) -> float:
    """
    Lower bound on sup_{||u||=1} n^-1 sum_i |x_iS'u|^3: best of random unit
    directions, each refined by projected gradient ascent on the sphere.
    """
    k = xs.shape[1]
    if k == 0:
        return 0.0

    def value(u):
        return float(np.mean(np.abs(xs @ u) ** 3))

    best = 0.0
    for _ in range(n_directions):
        u = rng.standard_normal(k)
        u /= np.linalg.norm(u)
        current, step = value(u), 0.5
        for _ in range(ascent_steps):
            z = xs @ u
            grad = 3.0 * (np.abs(z) * z) @ xs / xs.shape[0]
            grad -= (grad @ u) * u
            norm = np.linalg.norm(grad)
            if norm < 1e-12:
                break
            candidate = u + step * grad / norm
            candidate /= np.linalg.norm(candidate)
            cand_value = value(candidate)
            if cand_value > current:
                u, current = candidate, cand_value
            else:
                step *= 0.5
        best = max(best, current)
    return best


# ==================== Compatibility numbers ====================

def _count_supports(p: int, s: int) -> int:
    return sum(math.comb(p, k) for k in range(1, s + 1))


def _phi1_sq_on(sigma_tt: np.ndarray) -> float:
    """
    min over sign patterns of |T| / (sigma' Sigma_TT^-1 sigma), keeping only
    stationary points strictly inside their orthant (zeros belong to smaller T).
    """
    k = sigma_tt.shape[0]
    w = linalg.eigvalsh(sigma_tt)
    if w[0] <= 1e-12 * max(w[-1], 1e-300):
        return 0.0
    factor = linalg.cho_factor(sigma_tt)
    best = np.inf
    for tail in product((1.0, -1.0), repeat=k - 1):
        signs = np.array((1.0,) + tail)
        v = linalg.cho_solve(factor, signs)
        c = float(signs @ v)
        if c > 0 and np.all(signs * v > 0):
            best = min(best, k / c)
    return best


def compat_numbers(x: np.ndarray, w_diag: np.ndarray, s_level: int, limit: Optional[int] = None) -> Tuple[float, float]:
    """
    (phi1, phi2) at sparsity s_level for Sigma = n^-1 X' W X.

    phi2^2 = min over |S| = s of lambda_min(Sigma_SS); phi1^2 enumerates every
    support of size <= s and every sign orthant.
    """
    x = np.asarray(x, dtype=float)
    n, p = x.shape
    s_level = min(s_level, p)
    limit = limit or get_settings().enumeration_limit
    if _count_supports(p, s_level) > limit:
        raise EnumerationTooLargeError(f"compatibility numbers at s={s_level}, p={p} exceed {limit} supports")
    if s_level > PHI1_MAX_SUPPORT:
        raise EnumerationTooLargeError(f"sign-orthant enumeration is limited to |S| <= {PHI1_MAX_SUPPORT}")

    sigma = x.T @ (np.asarray(w_diag, dtype=float)[:, None] * x) / n
    sigma = 0.5 * (sigma + sigma.T)

    phi2_sq = min(
        float(linalg.eigvalsh(sigma[np.ix_(t, t)])[0])
        for t in combinations(range(p), s_level)
    )
    phi1_sq = min(
        _phi1_sq_on(sigma[np.ix_(t, t)])
        for k in range(1, s_level + 1)
        for t in combinations(range(p), k)
    )
    return math.sqrt(max(phi1_sq, 0.0)), math.sqrt(max(phi2_sq, 0.0))


# ==================== Global quantities ====================

NU_CONSTANT = 1.0 + 2.0 / (math.e * math.log(2.0))


def scalar_diags(family, data: Dataset, theta0) -> Tuple[float, float, float, Optional[float]]:
    """(sigma_min^2, sigma_max^2, nu_n, vartheta_{n,p}); vartheta is None without signals."""
    family = get_family(family)
    theta0 = np.asarray(theta0, dtype=float)
    weights = family.b2(true_predictor(data, theta0))
    sigma_min_sq, sigma_max_sq = float(np.min(weights)), float(np.max(weights))
    nu = NU_CONSTANT * (1.0 + sigma_max_sq / math.log(2.0))
    signals = np.abs(theta0[theta0 != 0])
    beta_min = float(np.min(signals)) if signals.size else None
    return sigma_min_sq, sigma_max_sq, nu, beta_min


def beta_min_threshold(nu: float, kappa: float, phi2: float, s0: int, n: int, p: int) -> Optional[float]:
    """(nu kappa sqrt(log p / n)) ^ (phi2^-1 sqrt(s0 log p / n)), i.e. K_min = 1."""
    if s0 == 0 or p < 2:
        return None
    first = nu * kappa * math.sqrt(math.log(p) / n)
    second = math.sqrt(s0 * math.log(p) / n) / phi2 if phi2 > 0 else math.inf
    return min(first, second)


def quad_residual(family, data: Dataset, theta, theta0) -> float:
    """
    r_n(theta) = L(theta) - L(theta0) - (theta - theta0)' Ldot(theta0)
                 + (1/2) (theta - theta0)' F(theta0) (theta - theta0),
    evaluated on the union of both supports.
    """
    family = get_family(family)
    theta = np.asarray(theta, dtype=float)
    theta0 = np.asarray(theta0, dtype=float)
    union = ModelSupport.of(support_of(theta).indices + support_of(theta0).indices)
    if union.size == 0:
        return 0.0
    t, t0 = restrict(theta, union), restrict(theta0, union)
    d = t - t0
    return (
        log_likelihood(family, data, union, t)
        - log_likelihood(family, data, union, t0)
        - d @ score(family, data, union, t0)
        + 0.5 * d @ fisher_info(family, data, union, t0) @ d
    )


# ==================== Report ====================

def support_diagnostics(
    family,
    data: Dataset,
    s: ModelSupport,
    theta0,
    rng: np.random.Generator,
    opts: Optional[FitOptions] = None,
) -> SupportDiagnostics:
    family = get_family(family)
    best, fisher = population_fisher(family, data, s, theta0, opts)
    xi = inv_sqrt(fisher, "F") @ score(family, data, s, best)
    delta, delta_tilde = delta_mis(family, data, s, theta0, opts)
    rho_min, rho_max = fisher_extremes(fisher)
    return SupportDiagnostics(
        indices=list(s.indices),
        xi_norm=float(np.linalg.norm(xi)),
        delta_mis=delta,
        delta_mis_tilde=delta_tilde,
        zeta=design_regularity_from(data.columns(s), fisher),
        rho_min=rho_min,
        rho_max=rho_max,
        kappa_n=kappa_from_fisher(fisher, data.n),
        k_cubic_lower=cubic_moment_lower(data.columns(s), rng),
    )


def build_report(
    family,
    data: Dataset,
    theta0,
    supports: Iterable[ModelSupport],
    s_levels: Sequence[int] = (),
    rng: Optional[np.random.Generator] = None,
    quad_directions: int = 0,
    epsilons: Sequence[float] = (0.1, 0.05, 0.025),
    opts: Optional[FitOptions] = None,
) -> DiagnosticsReport:
    """Compose every diagnostic for the given supports and sparsity levels."""
    family = get_family(family)
    rng = rng or np.random.default_rng(0)
    theta0 = np.asarray(theta0, dtype=float)

    records: List[SupportDiagnostics] = []
    for s in supports:
        try:
            records.append(support_diagnostics(family, data, s, theta0, rng, opts))
        except SingularMatrixError as e:
            logger.warning(f"Skipping support {s}: {e}")

    w0 = family.b2(true_predictor(data, theta0))
    sparsity = []
    for level in s_levels:
        phi1, phi2 = compat_numbers(data.x, w0, level)
        sparsity.append(SparsityDiagnostics(s_level=level, phi1=phi1, phi2=phi2))

    sigma_min_sq, sigma_max_sq, nu, beta_min = scalar_diags(family, data, theta0)
    kappa = max((r.kappa_n for r in records), default=None)

    s0 = support_of(theta0).size
    threshold = None
    if kappa is not None and sparsity:
        threshold = beta_min_threshold(nu, kappa, min(r.phi2 for r in sparsity), s0, data.n, data.p)

    residuals = []
    for _ in range(quad_directions):
        u = rng.standard_normal(data.p)
        u /= np.linalg.norm(u)
        for eps in epsilons:
            residuals.append(QuadResidualSample(
                epsilon=eps, residual=float(quad_residual(family, data, theta0 + eps * u, theta0)),
            ))

    return DiagnosticsReport(
        family=family.name,
        n=data.n,
        p=data.p,
        supports=records,
        sparsity=sparsity,
        sigma_min_sq=sigma_min_sq,
        sigma_max_sq=sigma_max_sq,
        nu_n=nu,
        kappa_n=kappa,
        beta_min=beta_min,
        beta_min_threshold=threshold,
        quad_residual=residuals,
    )
