import math
from itertools import combinations

import numpy as np
import pytest

from core.diagnostics import (
    NU_CONSTANT, beta_min_threshold, build_report, compat_numbers, cubic_moment_lower, delta_mis,
    design_regularity, fisher_extremes, inv_sqrt, kappa_from_fisher, kappa_n, local_radius,
    normalized_score, population_fisher, quad_residual, scalar_diags,
)
from core.exceptions import EnumerationTooLargeError, SingularMatrixError
from core.glm import score, v_matrix
from families import get_family
from core.simulate import gen_design, gen_theta0
from models.data import Dataset, ModelSupport
from models.schemas import Hyperparams, SimConfig


@pytest.mark.parametrize("name, data_fixture, theta_fixture", [
    ("logistic", "logistic_data", "logistic_theta0"),
    ("poisson", "poisson_data", "poisson_theta0"),
])
@pytest.mark.parametrize("support", [[0, 1], [0, 1, 2], [0, 1, 3, 5], [0, 1, 2, 3, 4, 5]])
def test_superset_identities(name, data_fixture, theta_fixture, support, request):
    data = request.getfixturevalue(data_fixture)
    theta0 = request.getfixturevalue(theta_fixture)
    s = ModelSupport.of(support)
    delta, delta_tilde = delta_mis(name, data, s, theta0)
    assert delta == pytest.approx(1.0, abs=1e-8)
    assert delta_tilde == pytest.approx(1.0, abs=1e-8)
    _, fisher = population_fisher(name, data, s, theta0)
    np.testing.assert_allclose(fisher, v_matrix(name, data, s, theta0), rtol=1e-8)


def test_misspecified_model_moves_delta_away_from_one(logistic_data, logistic_theta0):
    delta, delta_tilde = delta_mis("logistic", logistic_data, ModelSupport.of([0, 2]), logistic_theta0)
    assert np.isfinite(delta) and delta > 0.0
    assert np.isfinite(delta_tilde) and delta_tilde > 0.0
    assert abs(delta - 1.0) > 1e-6


def test_normalized_score_is_whitened_score(logistic_data, logistic_theta0):
    s = ModelSupport.of([0, 1, 4])
    best, fisher = population_fisher("logistic", logistic_data, s, logistic_theta0)
    xi = normalized_score("logistic", logistic_data, s, logistic_theta0)
    raw = score("logistic", logistic_data, s, best)
    assert xi @ xi == pytest.approx(raw @ np.linalg.solve(fisher, raw), rel=1e-9)


def test_design_regularity_matches_brute_force(poisson_data, poisson_theta0):
    s = ModelSupport.of([0, 1, 2])
    best, fisher = population_fisher("poisson", poisson_data, s, poisson_theta0)
    xs = poisson_data.columns(s)
    inverse = np.linalg.inv(fisher)
    expected = max(math.sqrt(row @ inverse @ row) for row in xs)
    assert design_regularity("poisson", poisson_data, s, poisson_theta0) == pytest.approx(expected, rel=1e-10)


def test_kappa_and_fisher_extremes(logistic_data, logistic_theta0):
    s = ModelSupport.of([0, 1])
    _, fisher = population_fisher("logistic", logistic_data, s, logistic_theta0)
    expected = logistic_data.n * np.abs(np.linalg.inv(fisher)).sum(axis=1).max()
    assert kappa_from_fisher(fisher, logistic_data.n) == pytest.approx(expected)
    assert kappa_n("logistic", logistic_data, s, logistic_theta0) == pytest.approx(expected)
    rho_min, rho_max = fisher_extremes(fisher)
    assert 0 < rho_min <= rho_max
    assert rho_min + rho_max == pytest.approx(np.trace(fisher))


def test_inverse_square_root():
    m = np.array([[4.0, 1.0], [1.0, 3.0]])
    root = inv_sqrt(m)
    np.testing.assert_allclose(root @ m @ root, np.eye(2), atol=1e-12)
    with pytest.raises(SingularMatrixError):
        inv_sqrt(np.array([[1.0, 1.0], [1.0, 1.0]]))


def test_local_radius():
    assert local_radius([3.0, 4.0], [0.0, 0.0], np.eye(2)) == pytest.approx(5.0)
    assert local_radius([1.0], [0.0], np.array([[4.0]])) == pytest.approx(2.0)


def test_cubic_moment_single_column_is_exact():
    x = np.random.default_rng(0).standard_normal((100, 1))
    assert cubic_moment_lower(x, np.random.default_rng(1)) == pytest.approx(np.mean(np.abs(x[:, 0]) ** 3))


def test_cubic_moment_finds_a_dominant_direction():
    x = np.random.default_rng(2).standard_normal((200, 3))
    x[:, 0] *= 5.0
    bound = cubic_moment_lower(x, np.random.default_rng(3))
    assert bound >= 0.99 * np.mean(np.abs(x[:, 0]) ** 3)


def _phi1_grid(sigma, s_level, points=20_001):
    """Brute-force minimum of |T| theta' Sigma theta over the l1 unit sphere on supports |T| <= 2."""
    p = sigma.shape[0]
    best = min(sigma[j, j] for j in range(p))
    if s_level >= 2:
        t = np.linspace(0.0, 1.0, points)[1:-1]
        for i, j in combinations(range(p), 2):
            for sign in (1.0, -1.0):
                a, b = t, sign * (1.0 - t)
                quad = sigma[i, i] * a * a + 2 * sigma[i, j] * a * b + sigma[j, j] * b * b
                best = min(best, 2.0 * quad.min())
    return math.sqrt(best)


@pytest.mark.parametrize("seed", range(20))
def test_compatibility_numbers_match_brute_force(seed):
    rng = np.random.default_rng(seed)
    n, p = 40, 5
    x = rng.standard_normal((n, p))
    x[:, 1] += 0.8 * x[:, 0]
    w = rng.uniform(0.05, 0.25, size=n)
    phi1, phi2 = compat_numbers(x, w, 2)

    sigma = x.T @ (w[:, None] * x) / n
    phi2_sq = min(np.linalg.eigvalsh(sigma[np.ix_(t, t)])[0] for t in combinations(range(p), 2))
    assert phi2 == pytest.approx(math.sqrt(phi2_sq), rel=1e-10)
    assert phi1 == pytest.approx(_phi1_grid(sigma, 2), abs=1e-3)
    assert phi1 >= phi2 - 1e-12


def test_compatibility_guard():
    x = np.random.default_rng(0).standard_normal((10, 30))
    with pytest.raises(EnumerationTooLargeError):
        compat_numbers(x, np.ones(10), 4, limit=1000)


def test_scalar_diagnostics_at_zero_parameter(logistic_data):
    sigma_min_sq, sigma_max_sq, nu, beta_min = scalar_diags("logistic", logistic_data, np.zeros(logistic_data.p))
    assert sigma_min_sq == sigma_max_sq == 0.25
    assert nu == pytest.approx((1 + 2 / (math.e * math.log(2))) * (1 + 0.25 / math.log(2)))
    assert beta_min is None


def test_scalar_diagnostics_beta_min(logistic_data, logistic_theta0):
    *_, beta_min = scalar_diags("logistic", logistic_data, logistic_theta0)
    assert beta_min == 1.0


def test_beta_min_threshold():
    nu, kappa, phi2, s0, n, p = NU_CONSTANT, 2.0, 0.5, 3, 400, 100
    first = nu * kappa * math.sqrt(math.log(p) / n)
    second = math.sqrt(s0 * math.log(p) / n) / phi2
    assert beta_min_threshold(nu, kappa, phi2, s0, n, p) == pytest.approx(min(first, second))
    assert beta_min_threshold(nu, kappa, phi2, 0, n, p) is None


@pytest.mark.parametrize("name, data_fixture", [("logistic", "logistic_data"), ("poisson", "poisson_data")])
def test_quadratic_residual_is_cubic_in_the_step(name, data_fixture, request):
    data = request.getfixturevalue(data_fixture)
    family = get_family(name)
    theta0 = np.array([0.5, -0.5, 0.3, 0.0, 0.0, 0.0])
    rng = np.random.default_rng(7)
    eta0 = data.x @ theta0
    tested = 0
    for _ in range(1000):
        if tested == 20:
            break
        # tilted toward theta0 so the cubic term does not cancel
        u = theta0 / np.linalg.norm(theta0) + 0.4 * rng.standard_normal(data.p) / math.sqrt(data.p)
        u /= np.linalg.norm(u)
        z = data.x @ u
        cubic = np.sum(family.b3(eta0) * z ** 3)
        if abs(cubic) < 0.1 * np.sum(np.abs(family.b3(eta0) * z ** 3)):
            continue
        first = quad_residual(name, data, theta0 + 0.02 * u, theta0)
        second = quad_residual(name, data, theta0 + 0.01 * u, theta0)
        assert 6.0 <= first / second <= 10.0
        tested += 1
    assert tested == 20


def test_quadratic_residual_vanishes_at_the_truth(logistic_data, logistic_theta0):
    assert quad_residual("logistic", logistic_data, logistic_theta0, logistic_theta0) == 0.0
    assert quad_residual("logistic", logistic_data, np.zeros(6), np.zeros(6)) == 0.0


def test_build_report(logistic_data, logistic_theta0):
    supports = [ModelSupport.of([0, 1]), ModelSupport.of([0, 2]), ModelSupport.of([0, 1, 5])]
    report = build_report(
        "logistic", logistic_data, logistic_theta0, supports,
        s_levels=[1, 2], rng=np.random.default_rng(0), quad_directions=2,
    )
    assert [r.indices for r in report.supports] == [[0, 1], [0, 2], [0, 1, 5]]
    assert report.supports[0].delta_mis == pytest.approx(1.0, abs=1e-8)
    assert [r.s_level for r in report.sparsity] == [1, 2]
    assert report.kappa_n == max(r.kappa_n for r in report.supports)
    assert report.beta_min == 1.0
    assert report.beta_min_threshold is not None
    assert len(report.quad_residual) == 6
    assert report.family.value == "logistic"


def test_kappa_of_scaled_identity_and_diagonal():
    assert kappa_from_fisher(50 * np.eye(3), 50) == pytest.approx(1.0)
    assert kappa_from_fisher(np.diag([10.0, 4.0, 8.0]), 20) == pytest.approx(20 / 4.0)


def test_rho_min_is_bounded_by_restricted_eigenvalue(poisson_data, poisson_theta0):
    w0 = get_family("poisson").b2(poisson_data.x @ poisson_theta0)
    for support in ([0, 1], [0, 1, 2], [0, 1, 3, 4]):
        s = ModelSupport.of(support)
        _, fisher = population_fisher("poisson", poisson_data, s, poisson_theta0)
        _, phi2 = compat_numbers(poisson_data.x, w0, s.size)
        assert fisher_extremes(fisher)[0] >= poisson_data.n * phi2 ** 2 * (1 - 1e-9)


def test_normalized_score_has_identity_covariance_for_supersets(dataset_factory):
    theta0 = np.array([0.8, -0.8, 0.0, 0.0])
    base = dataset_factory("logistic", 300, theta0, seed=30)
    family = get_family("logistic")
    s = ModelSupport.of([0, 1, 2])
    rng = np.random.default_rng(31)
    norms = [
        float(np.sum(normalized_score(family, base.with_response(family.sample(base.x @ theta0, rng)), s, theta0) ** 2))
        for _ in range(400)
    ]
    assert np.mean(norms) == pytest.approx(3.0, abs=0.45)


@pytest.mark.slow
def test_design_regularity_of_supersets_under_a_strong_signal():
    n, p, s0, s_max = 2000, 200, 3, 5
    # ||theta0||_2 >= 2 sqrt(2) log(4 s_max log(np)) with 4 s_max log p <= n
    norm = 1.01 * 2.0 * math.sqrt(2.0) * math.log(4 * s_max * math.log(n * p))
    cfg = SimConfig(
        family="poisson", n=n, p=p, s0=s0, signal_values=[norm / math.sqrt(s0)] * s0,
        hyperparams=Hyperparams(s_max=s_max),
    )
    bound = 6.0 * math.sqrt(2.0) / math.sqrt(n)
    rng = np.random.default_rng(31)
    held = 0
    for _ in range(40):
        x = gen_design(cfg, rng)
        theta0, truth = gen_theta0(cfg, rng)
        data = Dataset(x, np.zeros(n))
        others = np.setdiff1d(np.arange(p), truth.as_array())
        zetas = []
        for extra in (0, 1, 1, 2, 2):
            s = ModelSupport.of([*truth.indices, *rng.choice(others, size=extra, replace=False)])
            zetas.append(design_regularity("poisson", data, s, theta0))
        held += max(zetas) <= bound
    assert held >= 38
