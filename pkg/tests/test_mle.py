import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize
from scipy.special import logit

import core.mle as mle
from core.exceptions import DimensionMismatchError, InvalidFitError, SaturationError
from core.glm import log_likelihood, restrict, score
from core.mle import fit_mle, theta_star
from families import get_family
from models.data import Dataset, ModelSupport
from models.schemas import FitOptions, FitStatus


def ascent_oracle(name, data, s):
    """MLE by a method independent of Newton: fixed-step gradient ascent for
    the logistic family (b'' <= 1/4), BFGS on the mean deviance otherwise."""
    xs = data.x[:, list(s.indices)]
    if name == "logistic":
        step = 4.0 / np.linalg.eigvalsh(xs.T @ xs)[-1]
        theta = np.zeros(s.size)
        for _ in range(20000):
            grad = xs.T @ (data.y - get_family(name).b1(xs @ theta))
            if np.linalg.norm(grad) <= 1e-10:
                break
            theta = theta + step * grad
        return theta

    def objective(theta):
        try:
            return -log_likelihood(name, data, s, theta) / data.n
        except SaturationError:
            return np.inf

    res = minimize(objective, np.zeros(s.size), jac=lambda t: -score(name, data, s, t) / data.n,
                   method="BFGS", options={"gtol": 1e-12, "maxiter": 10000})
    return res.x


@pytest.mark.parametrize("name, fixture", [("logistic", "logistic_data"), ("poisson", "poisson_data")])
def test_fit_converges_to_a_stationary_point(name, fixture, request):
    data = request.getfixturevalue(fixture)
    s = ModelSupport.of([0, 1, 3])
    fit = fit_mle(name, data, s)
    assert fit.status == FitStatus.CONVERGED
    assert np.linalg.norm(score(name, data, s, fit.theta_hat)) <= 1e-8 * (1 + abs(fit.loglik_at_mle))
    assert all(b >= a - 1e-10 for a, b in zip(fit.loglik_path, fit.loglik_path[1:]))
    np.testing.assert_allclose(fit.fisher, fit.fisher.T)
    assert fit.logdet_fisher == pytest.approx(np.linalg.slogdet(fit.fisher)[1])


def test_refit_from_the_mle_is_idempotent(logistic_data):
    s = ModelSupport.of([0, 1])
    fit = fit_mle("logistic", logistic_data, s)
    again = fit_mle("logistic", logistic_data, s, theta_init=fit.theta_hat)
    assert again.converged
    assert again.iterations == 0
    np.testing.assert_array_equal(again.theta_hat, fit.theta_hat)


def test_intercept_only_fits_have_closed_forms():
    rng = np.random.default_rng(0)
    ones = np.ones((400, 1))
    y_bin = (rng.random(400) < 0.3).astype(float)
    y_cnt = rng.poisson(2.5, size=400).astype(float)
    s = ModelSupport.of([0])
    assert fit_mle("logistic", Dataset(ones, y_bin), s).theta_hat[0] == pytest.approx(logit(y_bin.mean()), abs=1e-6)
    assert fit_mle("poisson", Dataset(ones, y_cnt), s).theta_hat[0] == pytest.approx(np.log(y_cnt.mean()), abs=1e-6)


def test_empty_support_is_trivially_converged(logistic_data):
    fit = fit_mle("logistic", logistic_data, ModelSupport.empty())
    assert fit.converged
    assert fit.theta_hat.shape == (0,)
    assert fit.logdet_fisher == 0.0
    assert fit.loglik_at_mle == pytest.approx(-logistic_data.n * np.log(2.0))


def test_separated_logistic_data_has_no_mle():
    x = np.array([[-2.0], [-1.0], [-0.5], [0.5], [1.0], [2.0]])
    y = np.array([0.0, 0.0, 0.0, 1.0, 1.0, 1.0])
    fit = fit_mle("logistic", Dataset(x, y), ModelSupport.of([0]))
    assert fit.status == FitStatus.SEPARATED
    assert not fit.converged


def test_collinear_columns_are_singular(logistic_data):
    x = np.column_stack([logistic_data.x[:, 0], logistic_data.x[:, 0], logistic_data.x[:, 1]])
    fit = fit_mle("logistic", Dataset(x, logistic_data.y), ModelSupport.of([0, 1]))
    assert fit.status == FitStatus.SINGULAR
    assert np.isnan(fit.logdet_fisher)


def test_more_columns_than_rows_is_singular():
    rng = np.random.default_rng(0)
    data = Dataset(rng.standard_normal((3, 5)), np.array([0.0, 1.0, 1.0]))
    assert fit_mle("logistic", data, ModelSupport.of([0, 1, 2, 3])).status == FitStatus.SINGULAR


def test_iteration_cap_reports_max_iter(poisson_data):
    fit = fit_mle("poisson", poisson_data, ModelSupport.of([0, 1]), FitOptions(max_iter=1, grad_tol=1e-14))
    assert fit.status == FitStatus.MAX_ITER


def test_theta_init_shape_is_checked(logistic_data):
    with pytest.raises(DimensionMismatchError):
        fit_mle("logistic", logistic_data, ModelSupport.of([0, 1]), theta_init=np.zeros(3))


@pytest.mark.parametrize("support", [[0, 1], [0, 1, 2], [0, 1, 4, 5]])
def test_population_optimizer_of_a_superset_is_the_truth(support, logistic_data, logistic_theta0):
    s = ModelSupport.of(support)
    best = theta_star("logistic", logistic_data, s, logistic_theta0)
    np.testing.assert_allclose(best, restrict(logistic_theta0, s), atol=1e-8)


def test_population_optimizer_of_a_misspecified_model(poisson_data, poisson_theta0):
    best = theta_star("poisson", poisson_data, ModelSupport.of([0, 2]), poisson_theta0)
    assert best.shape == (2,)
    assert np.all(np.isfinite(best))


def test_population_optimizer_requires_a_converged_fit():
    x = np.column_stack([np.ones(4), np.ones(4)])
    data = Dataset(x, np.array([0.0, 1.0, 0.0, 1.0]))
    with pytest.raises(InvalidFitError):
        theta_star("logistic", data, ModelSupport.of([0, 1]), [0.2, 0.1])


@pytest.mark.parametrize("name, fixture", [("logistic", "logistic_data"), ("poisson", "poisson_data")])
def test_fit_agrees_with_an_independent_optimizer(name, fixture, request):
    data = request.getfixturevalue(fixture)
    s = ModelSupport.of([0, 1, 3])
    fit = fit_mle(name, data, s)
    assert fit.converged
    assert np.max(np.abs(fit.theta_hat - ascent_oracle(name, data, s))) <= 1e-6


@pytest.mark.parametrize("name, fixture, support", [
    ("logistic", "logistic_data", [0, 3]),
    ("poisson", "poisson_data", [0, 2]),
])
def test_population_optimizer_of_a_misspecified_model_agrees_with_an_independent_optimizer(
    name, fixture, support, request
):
    data = request.getfixturevalue(fixture)
    theta0 = request.getfixturevalue(f"{name}_theta0")
    s = ModelSupport.of(support)
    pseudo = data.with_response(get_family(name).b1(data.x @ theta0))
    best = theta_star(name, data, s, theta0)
    np.testing.assert_allclose(best, ascent_oracle(name, pseudo, s), atol=1e-6)


@pytest.mark.parametrize("scale", [1e-8, 1e-3, 1e5])
def test_rescaling_a_column_leaves_the_fit_unchanged(scale):
    rng = np.random.default_rng(11)
    x = rng.standard_normal((400, 2))
    y = get_family("logistic").sample(x @ np.array([1.0, -1.0]), rng)
    s = ModelSupport.of([0, 1])
    fit = fit_mle("logistic", Dataset(x, y), s)
    scaled = fit_mle("logistic", Dataset(x * np.array([1.0, scale]), y), s)
    assert fit.status == FitStatus.CONVERGED
    assert scaled.status == FitStatus.CONVERGED
    assert scaled.loglik_at_mle == pytest.approx(fit.loglik_at_mle, rel=1e-8)
    np.testing.assert_allclose(scaled.theta_hat * np.array([1.0, scale]), fit.theta_hat, atol=1e-5)


def test_exhausted_step_halving_reports_the_stopping_iteration(logistic_data, monkeypatch):
    real = mle._loglik_or_inf
    calls = []

    def only_the_start(family, xs, y, theta):
        calls.append(1)
        return real(family, xs, y, theta) if len(calls) == 1 else -np.inf

    monkeypatch.setattr(mle, "_loglik_or_inf", only_the_start)
    fit = fit_mle("logistic", logistic_data, ModelSupport.of([0, 1]))
    assert fit.status == FitStatus.MAX_ITER
    assert fit.iterations == 0
    assert fit.loglik_path == (fit.loglik_at_mle,)
    assert len(calls) == 1 + FitOptions().step_halvings + 1


_PERM_DATA = Dataset(
    np.random.default_rng(5).standard_normal((250, 3)),
    np.random.default_rng(6).poisson(1.5, size=250).astype(float),
)
_PERM_FIT = fit_mle("poisson", _PERM_DATA, ModelSupport.of([0, 1, 2]))


@settings(deadline=None, max_examples=6)
@given(st.permutations([0, 1, 2]))
def test_fit_is_equivariant_under_column_permutation(perm):
    permuted = Dataset(_PERM_DATA.x[:, perm], _PERM_DATA.y)
    fit = fit_mle("poisson", permuted, ModelSupport.of([0, 1, 2]))
    assert fit.converged
    np.testing.assert_allclose(fit.theta_hat, _PERM_FIT.theta_hat[list(perm)], atol=1e-8)
    assert fit.loglik_at_mle == pytest.approx(_PERM_FIT.loglik_at_mle, rel=1e-12)
