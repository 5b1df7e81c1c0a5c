import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from core.exceptions import DataValidationError, SaturationError
from core.glm import empirical_c_dev, link_values
from families import FamilyRegistry, get_family
from models.schemas import FamilyName

finite_eta = st.floats(min_value=-700, max_value=700, allow_nan=False)


def test_registry_lists_both_families():
    assert FamilyRegistry.list_families() == ["logistic", "poisson"]


@pytest.mark.parametrize("key", ["logistic", "LOGISTIC", FamilyName.LOGISTIC])
def test_get_family_resolves_names_and_enums(key):
    assert get_family(key).name == "logistic"


def test_get_family_passes_instances_through(poisson):
    assert get_family(poisson) is poisson


def test_unknown_family_is_rejected():
    with pytest.raises(ValueError, match="Unknown family"):
        get_family("gamma")


def test_logistic_cumulant_is_stable_at_extremes(logistic):
    b = logistic.b(np.array([-800.0, 0.0, 800.0]))
    assert np.all(np.isfinite(b))
    assert b[0] == pytest.approx(0.0, abs=1e-300)
    assert b[1] == pytest.approx(np.log(2.0))
    assert b[2] == pytest.approx(800.0)


@given(finite_eta)
def test_logistic_variance_bounds(eta):
    fam = get_family("logistic")
    b2, b3 = fam.b2(eta), fam.b3(eta)
    assert 0.0 <= b2 <= 0.25
    assert abs(b3) <= b2 + 1e-15


@given(st.floats(min_value=-20, max_value=20, allow_nan=False))
def test_logistic_mean_in_unit_interval(eta):
    mu = get_family("logistic").b1(eta)
    assert 0.0 < mu < 1.0


@pytest.mark.parametrize("name", ["logistic", "poisson"])
def test_derivatives_match_finite_differences(name):
    fam = get_family(name)
    eta = np.linspace(-3.0, 3.0, 13)
    h = 1e-5
    for lower, upper in ((fam.b, fam.b1), (fam.b1, fam.b2), (fam.b2, fam.b3)):
        fd = (lower(eta + h) - lower(eta - h)) / (2 * h)
        np.testing.assert_allclose(fd, upper(eta), rtol=1e-6, atol=1e-9)


def test_poisson_saturates_above_700(poisson):
    assert np.isfinite(poisson.b(700.0))
    with pytest.raises(SaturationError):
        poisson.b(np.array([0.0, 700.5]))


def test_first_invalid_response(logistic, poisson):
    assert logistic.first_invalid(np.array([0.0, 1.0, 1.0])) is None
    assert logistic.first_invalid(np.array([0.0, 1.0, 0.5, 2.0])) == 2
    assert poisson.first_invalid(np.array([0.0, 3.0, 12.0])) is None
    assert poisson.first_invalid(np.array([1.0, -1.0])) == 1
    assert poisson.first_invalid(np.array([1.0, 2.0, 2.5])) == 2


def test_validate_response_names_the_row(logistic):
    with pytest.raises(DataValidationError) as err:
        logistic.validate_response(np.array([0.0, 1.0, 2.0]))
    assert err.value.line == 3
    assert "line 3" in str(err.value)


def test_sampled_responses_lie_in_the_support(logistic, poisson):
    rng = np.random.default_rng(0)
    eta = rng.standard_normal(500)
    assert logistic.first_invalid(logistic.sample(eta, rng)) is None
    assert poisson.first_invalid(poisson.sample(eta, rng)) is None


def test_deviation_constants_dominate_the_grid(logistic, poisson):
    assert empirical_c_dev(logistic) <= logistic.c_dev
    assert empirical_c_dev(poisson) == pytest.approx(poisson.c_dev, rel=1e-12)


def test_link_values_at_known_points():
    b, b1, b2, b3 = link_values("logistic", 0.0)
    assert b == pytest.approx(np.log(2.0), rel=1e-15)
    assert (b1, b2, b3) == (0.5, 0.25, 0.0)
    assert tuple(link_values("poisson", 0.0)) == (1.0, 1.0, 1.0, 1.0)

    h = 1e-5
    _, b1_plus, _, _ = link_values("logistic", 3.7 + h)
    _, b1_minus, _, _ = link_values("logistic", 3.7 - h)
    assert link_values("logistic", 3.7)[2] == pytest.approx((b1_plus - b1_minus) / (2 * h), rel=1e-6)


@pytest.mark.parametrize("name", ["logistic", "poisson"])
@given(eta1=st.floats(min_value=-30, max_value=30), eta2=st.floats(min_value=-30, max_value=30))
def test_variance_ratio_is_bounded_by_the_predictor_gap(name, eta1, eta2):
    fam = get_family(name)
    v1, v2 = fam.b2(eta1), fam.b2(eta2)
    assert v1 > 0.0 and v2 > 0.0
    assert v1 / v2 <= np.exp(3.0 * abs(eta1 - eta2)) * (1.0 + 1e-12)


def test_validate_response_names_the_file_line(logistic):
    with pytest.raises(DataValidationError) as err:
        logistic.validate_response(np.array([0.0, 1.0, 2.0]), lines=[2, 4, 7], column="y")
    assert err.value.line == 7
    assert err.value.column == "y"
