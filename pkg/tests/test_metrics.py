import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from neurofuzzy.errors import DomainError, ShapeError
from neurofuzzy.metrics import evaluate, parity_export, r_squared, read_parity, rmse

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)
vectors = st.integers(2, 40).flatmap(
    lambda n: st.tuples(arrays(float, n, elements=finite), arrays(float, n, elements=finite)))


class TestRmse:
    def test_perfect(self):
        y = np.array([1.0, 2.0, 3.0])
        assert rmse(y, y, "eq1") == 0.0 and rmse(y, y, "standard") == 0.0

    def test_unit_errors(self):
        assert rmse([1, 1], [0, 0], "eq1") == pytest.approx(math.sqrt(2 / 4), rel=1e-15)
        assert rmse([1, 1], [0, 0], "standard") == 1.0

    @given(vectors)
    def test_forms_differ_by_sqrt2(self, pair):
        a, b = pair
        std = rmse(a, b, "standard")
        assert rmse(a, b, "eq1") == pytest.approx(std / math.sqrt(2), rel=1e-12, abs=1e-300)

    @given(vectors, st.floats(-1e3, 1e3))
    def test_translation_invariant(self, pair, shift):
        a, b = pair
        assert rmse(a + shift, b + shift) == pytest.approx(rmse(a, b), rel=1e-9, abs=1e-9)

    @given(vectors, st.floats(-100, 100))
    def test_scales_linearly(self, pair, k):
        a, b = pair
        assert rmse(k * a, k * b) == pytest.approx(abs(k) * rmse(a, b), rel=1e-9, abs=1e-9)

    def test_shape_errors(self):
        with pytest.raises(ShapeError):
            rmse([1, 2], [1])
        with pytest.raises(ShapeError):
            rmse([], [])


class TestRSquared:
    def test_perfect(self):
        assert r_squared([1, 2, 4], [1, 2, 4]) == 1.0

    def test_mean_predictor(self):
        y = np.array([1.0, 2.0, 6.0])
        assert r_squared(y, np.full(3, y.mean())) == pytest.approx(0.0, abs=1e-15)

    def test_can_be_negative(self):
        assert r_squared([1, 2, 3], [3, 2, 1]) < 0

    def test_constant_observations(self):
        with pytest.raises(DomainError):
            r_squared([2, 2, 2], [1, 2, 3])

    @settings(max_examples=50)
    @given(vectors, st.floats(0.1, 50), st.floats(-100, 100))
    def test_affine_invariance(self, pair, scale, shift):
        a, b = pair
        if np.ptp(a) < 1e-3:
            return
        assert r_squared(scale * a + shift, scale * b + shift) == pytest.approx(
            r_squared(a, b), rel=1e-6, abs=1e-6)

    def test_at_most_one(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            a, b = rng.normal(size=(2, 20))
            assert r_squared(a, b) <= 1.0


def test_report_fields():
    rep = evaluate([1.0, 2.0, 3.0, 5.0], [1.5, 2.0, 2.5, 5.5])
    assert rep.n == 4
    assert rep.rmse_eq1 == rep.rmse_std / math.sqrt(2)
    assert rep.r_squared == r_squared([1.0, 2.0, 3.0, 5.0], [1.5, 2.0, 2.5, 5.5])


class TestParity:
    def test_rows_and_r2(self, tmp_path):
        obs, pred = [1.0, 2.0, 3.5], [1.1, 1.9, 3.6]
        path = tmp_path / "parity.csv"
        written = parity_export(obs, pred, path)
        lines = path.read_text().splitlines()
        assert lines[0].startswith("# r_squared=")
        assert lines[1] == "observed,predicted"
        assert len(lines) == 2 + 3
        assert written == r_squared(obs, pred)

    def test_round_trip_exact(self, tmp_path):
        rng = np.random.default_rng(1)
        obs, pred = rng.normal(size=(2, 50)) * 1e3
        path = tmp_path / "parity.csv"
        r2 = parity_export(obs, pred, path)
        o, p, r2_back = read_parity(path)
        assert np.array_equal(o, obs) and np.array_equal(p, pred)
        assert r2_back == r2
