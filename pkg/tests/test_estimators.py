import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from iidtest.estimators import (
    Basis,
    CorrelationMode,
    TestFunction,
    TestFunctionSet,
    acf,
    build_stack,
    cross_autocorrelation,
    cross_autocovariance,
    cumulant4_stderr,
    sample_cumulant4,
    transformed_mean,
    transformed_variance,
)
from iidtest.exceptions import DegenerateSeriesError, DegenerateVarianceWarning, ParameterError
from iidtest.rand_models import GAUSSIAN, SeedSpec, draw_innovations

from oracles import acf_direct, cross_corr_direct

ALT = [1.0, -1.0, 1.0, -1.0]


def ident(x):
    return x


series = arrays(
    np.float64,
    st.integers(8, 60),
    elements=st.floats(-50, 50, allow_nan=False).map(lambda v: round(v, 3)),
).filter(lambda a: np.ptp(a) > 0.5 and np.ptp(np.abs(a)) > 0.5)


class TestMoments:
    def test_mean(self):
        assert transformed_mean([1, 2, 3], ident) == 2
        assert transformed_mean([-1, 1], np.abs) == 1
        assert transformed_mean([1, 2, 3, 4], np.square) == 7.5

    def test_variance(self):
        assert transformed_variance([0, 2], ident) == 1
        assert transformed_variance([1, 2, 3, 4], ident) == 1.25

    def test_constant_is_flagged(self):
        with pytest.warns(DegenerateVarianceWarning):
            assert transformed_variance([1, 1, 1], ident) == 0.0
        with pytest.warns(DegenerateVarianceWarning):
            assert transformed_variance([0.1] * 7, ident) == 0.0

    def test_scalar_only_callable(self):
        assert transformed_mean([1.0, -4.0], lambda v: math.fabs(v)) == 2.5


class TestCrossMoments:
    def test_lag_zero_is_variance(self):
        x = draw_innovations(SeedSpec(3), GAUSSIAN, 500)
        assert cross_autocovariance(x, ident, ident, 0) == pytest.approx(transformed_variance(x, ident), rel=1e-12)

    def test_alternating(self):
        assert cross_autocovariance(ALT, ident, ident, 1) == pytest.approx(-1, abs=1e-15)
        assert cross_autocorrelation(ALT, ident, ident, 1) == pytest.approx(-1, abs=1e-15)

    def test_self_correlation_lag_zero(self):
        x = draw_innovations(SeedSpec(3), GAUSSIAN, 50)
        assert cross_autocorrelation(x, np.abs, np.abs, 0) == 1.0

    def test_independence_id_abs(self):
        n = 100_000
        x = draw_innovations(SeedSpec(4), GAUSSIAN, n)
        assert abs(cross_autocovariance(x, ident, np.abs, 1)) < 3 / math.sqrt(n)

    def test_degenerate_names_function(self):
        f = TestFunction("flat", lambda v: np.ones_like(v))
        with pytest.raises(DegenerateSeriesError, match="flat"):
            cross_autocorrelation([1.0, 2.0, 3.0], ident, f, 1)

    def test_lag_out_of_range(self):
        with pytest.raises(ParameterError):
            cross_autocovariance([1.0, 2.0, 3.0], ident, ident, 2)
        with pytest.raises(ParameterError):
            cross_autocovariance([1.0, 2.0, 3.0], ident, ident, -1)

    def test_matches_direct_formula(self):
        x = draw_innovations(SeedSpec(8), GAUSSIAN, 120).tolist()
        for k in (0, 1, 4):
            got = cross_autocorrelation(x, np.abs, ident, k)
            assert got == pytest.approx(cross_corr_direct(x, abs, lambda v: v, k), abs=1e-12)

    @given(x=series, c=st.floats(0.01, 100))
    @settings(max_examples=40, deadline=None)
    def test_scale_invariance(self, x, c):
        a = cross_autocorrelation(x, ident, ident, 1)
        b = cross_autocorrelation(c * x, ident, ident, 1)
        assert a == pytest.approx(b, abs=1e-12)


class TestStack:
    def test_reduction_to_acf(self):
        x = draw_innovations(SeedSpec(10), GAUSSIAN, 200)
        stack = build_stack(x, TestFunctionSet.identity(), 6)
        ref = [acf_direct(x.tolist(), k) for k in range(1, 7)]
        assert np.allclose(stack.lags[:, 0], ref, atol=1e-12, rtol=0)
        assert np.allclose(acf(x, 6), ref, atol=1e-12, rtol=0)

    def test_hand_example(self):
        stack = build_stack(ALT, TestFunctionSet.identity(), 2)
        assert np.allclose(stack.lags[:, 0], [-1, 1], atol=1e-15)

    def test_layout_is_row_major(self):
        x = draw_innovations(SeedSpec(11), GAUSSIAN, 80)
        funcs = TestFunctionSet.id_abs()
        stack = build_stack(x, funcs, 3)
        fs = [lambda v: v, abs]
        xs = x.tolist()
        for k in range(1, 4):
            for i in range(2):
                for j in range(2):
                    expected = cross_corr_direct(xs, fs[i], fs[j], k)
                    assert stack.lag_vector(k)[2 * i + j] == pytest.approx(expected, abs=1e-12)
                    assert stack.lag_matrix(k)[i, j] == stack.lag_vector(k)[2 * i + j]

    def test_covariance_basis(self):
        x = draw_innovations(SeedSpec(12), GAUSSIAN, 60)
        stack = build_stack(x, TestFunctionSet.id_abs(), 2, Basis.COVARIANCE)
        assert stack.lag_vector(1)[1] == pytest.approx(cross_autocovariance(x, ident, np.abs, 1), rel=1e-12)
        assert np.allclose(np.diag(stack.contemporaneous), stack.stds**2, rtol=1e-12)

    def test_contemporaneous_correlation_matrix(self):
        x = draw_innovations(SeedSpec(13), GAUSSIAN, 100)
        c0 = build_stack(x, TestFunctionSet.id_square(), 2).contemporaneous
        assert np.array_equal(np.diag(c0), [1.0, 1.0])
        assert np.array_equal(c0, c0.T)

    def test_id_abs_contemporaneous_near_zero(self):
        x = draw_innovations(SeedSpec(14), GAUSSIAN, 100_000)
        c0 = build_stack(x, TestFunctionSet.id_abs(), 1).contemporaneous
        assert abs(c0[0, 1]) < 4 / math.sqrt(100_000)

    def test_degenerate_column(self):
        x = np.array([2.0, -2.0, 2.0, -2.0, 2.0])
        with pytest.raises(DegenerateSeriesError, match=r"\|x\|"):
            build_stack(x, TestFunctionSet.id_abs(), 1)
        stack = build_stack(x, TestFunctionSet.id_abs(), 1, Basis.COVARIANCE)
        assert stack.lags[0, 3] == 0.0

    def test_lag_bounds(self):
        with pytest.raises(ParameterError):
            build_stack([1.0, 2.0, 3.0], TestFunctionSet.identity(), 2)
        with pytest.raises(ParameterError):
            build_stack([1.0, 2.0, 3.0], TestFunctionSet.identity(), 0)

    def test_immutable(self):
        stack = build_stack(ALT, TestFunctionSet.identity(), 1)
        with pytest.raises(ValueError):
            stack.lags[0, 0] = 3.0

    def test_to_dict_nested_lists(self):
        d = build_stack(ALT, TestFunctionSet.identity(), 2).to_dict()
        assert d["K"] == 2 and d["m"] == 1
        assert np.allclose(d["lags"], [[-1.0], [1.0]])

    def test_iid_entries_small(self):
        n, hits, reps = 10_000, 0, 50
        for r in range(reps):
            x = draw_innovations(SeedSpec(15, r), GAUSSIAN, n)
            stack = build_stack(x, TestFunctionSet.id_abs(), 5)
            hits += np.all(np.abs(stack.lags) < 4 / math.sqrt(n))
        # each of 20 entries exceeds 4 sd with prob 6e-5
        assert hits >= reps - 1

    @given(x=series)
    @settings(max_examples=40, deadline=None)
    def test_lag_zero_symmetry(self, x):
        stack = build_stack(x, TestFunctionSet.id_abs(), 1, Basis.COVARIANCE)
        q = stack.contemporaneous
        assert q[0, 1] == q[1, 0]

    @given(x=series, c=st.floats(0.01, 100))
    @settings(max_examples=40, deadline=None)
    def test_function_scaling_leaves_correlations(self, x, c):
        base = TestFunctionSet.id_abs()
        scaled = TestFunctionSet(
            (TestFunction("cx", lambda v: c * v), TestFunction("c|x|", lambda v: c * np.abs(v))),
            CorrelationMode.ASSUMED_UNCORRELATED,
        )
        a = build_stack(x, base, 2)
        b = build_stack(x, scaled, 2)
        assert np.allclose(a.lags, b.lags, atol=1e-12, rtol=0)
        assert np.allclose(a.contemporaneous, b.contemporaneous, atol=1e-12, rtol=0)

    @given(x=series, shift=st.floats(-100, 100).map(lambda v: round(v, 2)))
    @settings(max_examples=40, deadline=None)
    def test_shift_invariance_identity(self, x, shift):
        a = build_stack(x, TestFunctionSet.identity(), 3)
        b = build_stack(x + shift, TestFunctionSet.identity(), 3)
        assert np.allclose(a.lags, b.lags, atol=1e-12, rtol=0)


class TestFunctionSets:
    def test_names_unique(self):
        with pytest.raises(ParameterError):
            TestFunctionSet((TestFunction("a", ident), TestFunction("a", np.abs)))

    def test_nonempty(self):
        with pytest.raises(ParameterError):
            TestFunctionSet(())

    def test_from_name(self):
        assert TestFunctionSet.from_name("id-abs").names == ["x", "|x|"]
        fs = TestFunctionSet.from_name("sin-cos", 0.5)
        assert fs.trig_scale == 0.5
        assert np.allclose(fs.transform([0.0, math.pi]), [[0, 1], [1, math.cos(math.pi / 2)]], atol=1e-15)
        with pytest.raises(ParameterError):
            TestFunctionSet.from_name("nope")

    def test_modes(self):
        assert TestFunctionSet.id_abs().correlation_mode is CorrelationMode.ASSUMED_UNCORRELATED
        assert TestFunctionSet.id_square().correlation_mode is CorrelationMode.GENERAL


class TestCumulant:
    def test_constant_columns(self):
        c = np.full(10, 3.0)
        assert sample_cumulant4(c, c, c, c) == 0.0

    def test_length_mismatch(self):
        with pytest.raises(ParameterError):
            sample_cumulant4([1, 2], [1, 2], [1, 2], [1, 2, 3])

    def test_gaussian_fourth_moment(self):
        z = draw_innovations(SeedSpec(21), GAUSSIAN, 10**6)
        val = sample_cumulant4(z, z, z, z)
        assert abs(val) < 5 * cumulant4_stderr(z, z, z, z)

    def test_independent_pairs(self):
        rng_w = draw_innovations(SeedSpec(22, 0), GAUSSIAN, 10**6)
        rng_y = draw_innovations(SeedSpec(22, 1), GAUSSIAN, 10**6)
        w = rng_w
        x = rng_w + 0.5 * draw_innovations(SeedSpec(22, 2), GAUSSIAN, 10**6)
        y = rng_y
        z = rng_y**2
        val = sample_cumulant4(w, x, y, z)
        assert abs(val) < 5 * cumulant4_stderr(w, x, y, z)

    def test_dependent_quadruple_is_nonzero(self):
        # sanity check that the statistic can detect a nonzero cumulant: Exp(1)^4 has kappa_4 = 6
        e = -np.log(1 - np.random.default_rng(0).random(200_000))
        assert sample_cumulant4(e, e, e, e) == pytest.approx(6, abs=0.5)
