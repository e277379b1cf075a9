import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq

from neurofuzzy.errors import ConfigurationError, ParameterError
from neurofuzzy.membership import (
    ARITY,
    Family,
    FuzzyVariable,
    MembershipFunction,
    eval_mf,
    init_grid,
    mf_param_gradients,
    repair_params,
)

ALL_FAMILIES = list(Family)


def central_difference(mf, x, step=1e-6):
    """Independent oracle: numerical d(mu)/d(param) from eval_mf alone."""
    out = []
    for i, p in enumerate(mf.params):
        h = step * max(1.0, abs(p))
        up = list(mf.params)
        dn = list(mf.params)
        up[i] += h
        dn[i] -= h
        out.append((eval_mf(MembershipFunction(mf.family, up), x)
                    - eval_mf(MembershipFunction(mf.family, dn), x)) / (2 * h))
    return np.array(out)


def random_mf(family, rng):
    """Valid random parameters for each family, on roughly unit scale."""
    if family is Family.GAUSSIAN:
        p = (rng.uniform(-2, 2), rng.uniform(0.3, 2))
    elif family is Family.TRIANGULAR:
        p = tuple(np.sort(rng.uniform(-3, 3, 3)))
    elif family in (Family.TRAPEZOIDAL, Family.PI_SHAPED):
        p = tuple(np.sort(rng.uniform(-3, 3, 4)))
    elif family is Family.GENERALIZED_BELL:
        p = (rng.uniform(0.5, 2), rng.uniform(1, 3), rng.uniform(-2, 2))
    elif family is Family.SIGMOID_DIFFERENCE:
        c1, c2 = np.sort(rng.uniform(-2, 2, 2))
        p = (rng.uniform(1, 4), c1, rng.uniform(1, 4), c2)
    elif family is Family.SIGMOID_PRODUCT:
        c1, c2 = np.sort(rng.uniform(-2, 2, 2))
        p = (rng.uniform(1, 4), c1, -rng.uniform(1, 4), c2)
    else:
        p = (rng.uniform(-2, 0), rng.uniform(0.3, 2), rng.uniform(0, 2), rng.uniform(0.3, 2))
    return MembershipFunction(family, p)


def breakpoints(mf):
    if mf.family in (Family.TRIANGULAR, Family.TRAPEZOIDAL):
        return list(mf.params)
    if mf.family is Family.PI_SHAPED:
        a, b, c, d = mf.params
        return [a, b, c, d, (a + b) / 2, (c + d) / 2]
    if mf.family is Family.TWO_SIDED_GAUSSIAN:
        return [mf.params[0], mf.params[2]]
    if mf.family is Family.GENERALIZED_BELL:
        return [mf.params[2]]
    if mf.family is Family.SIGMOID_DIFFERENCE:
        # |s1 - s2| has a kink where the sigmoids cross
        a1, c1, a2, c2 = mf.params
        if a1 == a2:
            return []
        return [(a1 * c1 - a2 * c2) / (a1 - a2)]
    return []


class TestEvaluation:
    def test_gaussian_peak(self):
        assert eval_mf(MembershipFunction(Family.GAUSSIAN, (5, 2)), 5) == 1.0

    def test_gaussian_half_height(self):
        x = math.sqrt(2 * math.log(2))
        assert eval_mf(MembershipFunction(Family.GAUSSIAN, (0, 1)), x) == pytest.approx(0.5, abs=1e-15)

    def test_triangular_ramp_midpoint(self):
        assert eval_mf(MembershipFunction(Family.TRIANGULAR, (0, 1, 2)), 0.5) == 0.5

    def test_vectorized(self):
        mf = MembershipFunction(Family.TRIANGULAR, (0, 1, 2))
        np.testing.assert_array_equal(mf(np.array([-1, 0, 0.5, 1, 1.5, 2, 3])),
                                      [0, 0, 0.5, 1, 0.5, 0, 0])

    def test_trapezoid_plateau(self):
        mf = MembershipFunction(Family.TRAPEZOIDAL, (0, 1, 2, 4))
        np.testing.assert_allclose(mf(np.array([0.5, 1, 1.5, 2, 3, 4])), [0.5, 1, 1, 1, 0.5, 0])

    def test_bell_half_width(self):
        mf = MembershipFunction(Family.GENERALIZED_BELL, (2, 3, 1))
        assert mf(3.0) == pytest.approx(0.5)
        assert mf(1.0) == 1.0

    def test_pi_shape(self):
        mf = MembershipFunction(Family.PI_SHAPED, (0, 2, 4, 6))
        np.testing.assert_allclose(mf(np.array([0, 1, 2, 3, 4, 5, 6])), [0, 0.5, 1, 1, 1, 0.5, 0])

    def test_sigmoid_product_and_difference(self):
        psig = MembershipFunction(Family.SIGMOID_PRODUCT, (2, -1, -2, 1))
        dsig = MembershipFunction(Family.SIGMOID_DIFFERENCE, (2, -1, 2, 1))
        s = lambda z: 1 / (1 + math.exp(-z))
        assert psig(0.3) == pytest.approx(s(2 * 1.3) * s(-2 * -0.7))
        assert dsig(0.3) == pytest.approx(s(2 * 1.3) - s(2 * -0.7))

    @pytest.mark.parametrize("family", [Family.TRIANGULAR, Family.TRAPEZOIDAL, Family.PI_SHAPED])
    def test_ordering_enforced(self, family):
        params = list(range(ARITY[family]))[::-1]
        with pytest.raises(ParameterError, match="non-decreasing"):
            MembershipFunction(family, params)

    @pytest.mark.parametrize("family", ALL_FAMILIES)
    def test_arity_enforced(self, family):
        with pytest.raises(ParameterError, match="exactly"):
            MembershipFunction(family, [1.0] * (ARITY[family] + 1))

    def test_nonpositive_sigma_rejected(self):
        with pytest.raises(ParameterError):
            MembershipFunction(Family.GAUSSIAN, (0, 0))

    def test_unknown_family(self):
        with pytest.raises(ConfigurationError):
            Family.parse("sinemf")

    def test_two_sided_equals_gaussian_when_sides_match(self):
        x = np.linspace(-10, 10, 2001)
        g = MembershipFunction(Family.GAUSSIAN, (0.7, 1.3))(x)
        g2 = MembershipFunction(Family.TWO_SIDED_GAUSSIAN, (0.7, 1.3, 0.7, 1.3))(x)
        assert np.max(np.abs(g - g2)) < 1e-12

    @pytest.mark.parametrize("family", ALL_FAMILIES)
    def test_continuity(self, family):
        mf = random_mf(family, np.random.default_rng(3))
        x = np.linspace(-6, 6, 200001)
        assert np.max(np.abs(np.diff(mf(x)))) < 1e-2


@settings(max_examples=60, deadline=None)
@given(family=st.sampled_from(ALL_FAMILIES), seed=st.integers(0, 2**32 - 1),
       xs=st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=1, max_size=20))
def test_degree_in_unit_interval(family, seed, xs):
    mf = random_mf(family, np.random.default_rng(seed))
    mu = mf(np.array(xs))
    assert np.all(mu >= 0) and np.all(mu <= 1)


class TestGradients:
    def test_gaussian_at_peak(self):
        g = mf_param_gradients(MembershipFunction(Family.GAUSSIAN, (0, 1)), 0.0)
        np.testing.assert_array_equal(g, [0.0, 0.0])

    def test_gaussian_one_sigma_out(self):
        mf = MembershipFunction(Family.GAUSSIAN, (0, 1))
        g = mf_param_gradients(mf, 1.0)
        np.testing.assert_allclose(g, [math.exp(-0.5)] * 2, rtol=1e-14)
        np.testing.assert_allclose(central_difference(mf, 1.0), g, rtol=1e-8)

    def test_triangle_peak_subgradient(self):
        g = mf_param_gradients(MembershipFunction(Family.TRIANGULAR, (0, 1, 2)), 1.0)
        np.testing.assert_array_equal(g, [0.0, 0.0, 0.0])

    @pytest.mark.parametrize("x", [0.0, 1.0, 2.0, 3.0])
    def test_trapezoid_corner_subgradient(self, x):
        g = mf_param_gradients(MembershipFunction(Family.TRAPEZOIDAL, (0, 1, 2, 3)), x)
        np.testing.assert_array_equal(g, np.zeros(4))

    @pytest.mark.parametrize("family", ALL_FAMILIES)
    def test_match_finite_differences(self, family):
        rng = np.random.default_rng(ALL_FAMILIES.index(family))
        checked = 0
        while checked < 100:
            mf = random_mf(family, rng)
            x = rng.uniform(-4, 4)
            if any(abs(x - b) < 1e-3 for b in breakpoints(mf)):
                continue
            analytic = mf_param_gradients(mf, x)
            numeric = central_difference(mf, x)
            scale = max(np.max(np.abs(numeric)), 1e-3)
            assert np.max(np.abs(analytic - numeric)) / scale < 1e-5, (mf, x, analytic, numeric)
            checked += 1

    def test_gradient_shape_follows_input(self):
        mf = MembershipFunction(Family.GENERALIZED_BELL, (1, 2, 0))
        assert mf_param_gradients(mf, np.zeros((4, 5))).shape == (4, 5, 3)


class TestGridInit:
    def test_centers_and_sigma(self):
        mfs = init_grid((0, 10), 3, Family.GAUSSIAN)
        assert [m.params[0] for m in mfs] == [0, 5, 10]
        # oracle: solve exp(-(d/2)^2 / (2 s^2)) = 0.5 for s numerically
        sigma = brentq(lambda s: math.exp(-(2.5 ** 2) / (2 * s * s)) - 0.5, 0.1, 10, xtol=1e-14)
        assert sigma == pytest.approx(2.1233, abs=1e-4)
        for m in mfs:
            assert m.params[1] == pytest.approx(sigma, rel=1e-12)

    def test_two_sets_cross_at_half(self):
        a, b = init_grid((0, 1), 2, Family.GAUSSIAN)
        assert a(0.5) == pytest.approx(0.5, abs=1e-14)
        assert b(0.5) == pytest.approx(0.5, abs=1e-14)

    @pytest.mark.parametrize("family", ALL_FAMILIES)
    @pytest.mark.parametrize("count", [2, 3, 5])
    def test_epsilon_completeness(self, family, count):
        lo, hi = -3.0, 17.0
        mfs = init_grid((lo, hi), count, family)
        x = np.linspace(lo, hi, 1000)
        degrees = np.stack([m(x) for m in mfs])
        assert degrees.max(axis=0).min() >= 0.5 - 1e-9
        d = (hi - lo) / (count - 1)
        for k in range(count - 1):
            mid = lo + (k + 0.5) * d
            assert mfs[k](mid) == pytest.approx(0.5, abs=1e-9)
            assert mfs[k + 1](mid) == pytest.approx(0.5, abs=1e-9)

    @pytest.mark.parametrize("count", [0, 1])
    def test_count_too_small(self, count):
        with pytest.raises(ConfigurationError):
            init_grid((0, 1), count)

    def test_fuzzy_variable_range_checked(self):
        with pytest.raises(ConfigurationError):
            FuzzyVariable.grid("T", 5, 5)


def test_repair_clamps_and_sorts():
    assert repair_params(Family.GAUSSIAN, (1.0, -3.0), 0.01) == (1.0, 0.01)
    assert repair_params(Family.TRIANGULAR, (2.0, 1.0, 3.0), 0.01) == (1.0, 2.0, 3.0)
    assert repair_params(Family.TWO_SIDED_GAUSSIAN, (0, 0, 1, -1), 0.5) == (0, 0.5, 1, 0.5)


def test_serialization_names_match_toolbox():
    assert {f.value for f in Family} == {
        "gaussmf", "trimf", "trapmf", "gbellmf", "pimf", "dsigmf", "psigmf", "gauss2mf"}
    mf = MembershipFunction(Family.PI_SHAPED, (0, 1, 2, 3))
    assert MembershipFunction.from_dict(mf.to_dict()) == mf
