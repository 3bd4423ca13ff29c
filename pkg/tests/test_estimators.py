"""Estimator tests: realized variance, leverage correlation, quadratic
covariation, moment-scaling Hurst fits, and the two-sample KS test.

Monte Carlo assertions run on frozen seeds with margins checked against
independent oracles: exact fractional Brownian ensembles for the scaling
regression, scipy's two-sample statistic for the KS distance, and
hand-computed step paths for the grid-refinement covariation.
"""

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from hawkeslim import (
    EstimateWithCI,
    RoughCirParams,
    ScalingRegime,
    hurst_moment_scaling,
    ks_distance,
    leverage_correlation,
    quadratic_covariation,
    realized_variance,
    rescale_light,
    simulate,
    simulate_fbm,
    simulate_rough_cir,
)
from hawkeslim.estimators import KS_CRITICAL_1PCT, estimate_record
from hawkeslim.grids import PathGrid
from hawkeslim.kernels import KernelFunction, build_kernel_matrix

LIGHT = ScalingRegime.light(gap=1.0, base_rate=1.0)


def brownian(seed, n=1000, horizon=1.0):
    g = np.random.default_rng(seed)
    dt = horizon / n
    values = np.concatenate([[0.0], np.cumsum(g.standard_normal(n) * math.sqrt(dt))])
    return PathGrid(np.linspace(0.0, horizon, n + 1), values)


# ---------------------------------------------------------------------------
# estimate container


class TestEstimateWithCI:
    def test_interval_convention(self):
        est = EstimateWithCI(1.0, 0.5, 10)
        assert est.interval(2.0) == (0.0, 2.0)
        lo, hi = est.interval()
        assert hi - 1.0 == pytest.approx(1.96 * 0.5, rel=1e-3)
        assert lo == pytest.approx(2.0 - hi)

    def test_validation(self):
        with pytest.raises(ValueError, match="stderr"):
            EstimateWithCI(0.0, -1.0, 5)
        with pytest.raises(ValueError, match="count"):
            EstimateWithCI(0.0, 1.0, 0)
        with pytest.raises(ValueError, match="finite"):
            EstimateWithCI(math.nan, 1.0, 5)

    def test_record_is_json_ready(self):
        est = EstimateWithCI(-0.4, 0.02, 200)
        record = estimate_record("leverage", {"window": 0.02}, est, {"base": 7})
        text = json.dumps(record)
        back = json.loads(text)
        assert back["estimator"] == "leverage"
        assert back["point"] == -0.4
        assert back["stderr"] == 0.02
        assert back["n"] == 200
        assert back["params"] == {"window": 0.02}
        assert back["seed_manifest"] == {"base": 7}


# ---------------------------------------------------------------------------
# realized variance


class TestRealizedVariance:
    def test_linear_path_exact(self):
        t = np.linspace(0.0, 1.0, 101)
        rv = realized_variance(PathGrid(t, 3.0 * t), 0.1)
        assert rv.times.size == 10
        np.testing.assert_allclose(rv.times, 0.1 * np.arange(10), atol=1e-12)
        # ten increments of 3 * 0.01 per window
        np.testing.assert_allclose(rv.values, 10 * 0.03**2, rtol=1e-12)

    def test_constant_path_is_zero(self):
        t = np.linspace(0.0, 1.0, 51)
        rv = realized_variance(PathGrid(t, np.full(51, 2.0)), 0.2)
        assert np.all(rv.values == 0.0)

    def test_brownian_mean_matches_window(self):
        window = 0.05
        pooled = [realized_variance(brownian([70, s]), window).values for s in range(20)]
        mean = float(np.mean(np.concatenate(pooled)))
        assert abs(mean / window - 1.0) < 0.04

    def test_event_grid_window_assignment(self):
        path = PathGrid(
            np.array([0.0, 0.3, 0.35, 1.2, 2.0]),
            np.array([0.0, 1.0, 3.0, 2.0, 2.0]),
        )
        # increments 1, 2, -1 start inside the first window (the third one
        # spans the boundary but belongs to its left endpoint); the final
        # increment is flat
        rv = realized_variance(path, 1.0)
        np.testing.assert_allclose(rv.values, [6.0, 0.0])

    def test_validation(self):
        t = np.linspace(0.0, 1.0, 11)
        path = PathGrid(t, t)
        with pytest.raises(ValueError, match="window"):
            realized_variance(path, 0.0)
        with pytest.raises(ValueError, match="window"):
            realized_variance(path, 2.0)
        wide = PathGrid(t, np.zeros((11, 2)))
        with pytest.raises(ValueError, match="scalar"):
            realized_variance(wide, 0.5)


# ---------------------------------------------------------------------------
# leverage correlation


def staircase_price(first_step, sign):
    """Price with one jump per unit window sized so window returns equal
    sign times the next realized-variance move exactly."""
    steps = [first_step]
    for _ in range(7):
        s = steps[-1]
        steps.append(-sign * math.sqrt(s * s - sign * s))
    times, values, level = [0.0], [0.0], 0.0
    for i, step in enumerate(steps):
        level += step
        times += [i + 0.5, i + 1.0]
        values += [level, level]
    return PathGrid(np.array(times), np.array(values))


class TestLeverageCorrelation:
    def test_synthetic_perfect_negative(self):
        est = leverage_correlation(staircase_price(-1.0, 1.0), 1.0)
        assert est.point == pytest.approx(-1.0, abs=1e-12)
        assert est.stderr == pytest.approx(0.0, abs=1e-12)
        assert est.n == 7

    def test_synthetic_perfect_positive(self):
        est = leverage_correlation(staircase_price(1.0, -1.0), 1.0)
        assert est.point == pytest.approx(1.0, abs=1e-12)

    def test_default_window_is_fiftieth_of_span(self):
        path = brownian(5, n=2000, horizon=2.0)
        default = leverage_correlation(path)
        explicit = leverage_correlation(path, 2.0 / 50)
        assert default.point == explicit.point
        # fifty windows pair forty-nine returns with the next variance move
        assert default.n == explicit.n == 49

    def test_asymmetric_micro_ensemble_is_negative(self):
        spec = build_kernel_matrix(
            KernelFunction.exponential(0.4, 1.0),
            KernelFunction.exponential(0.2, 1.0),
            3.0,
        )
        points = [
            leverage_correlation(rescale_light(simulate(spec, LIGHT, 200.0, [41, s]))).point
            for s in range(150)
        ]
        points = np.asarray(points)
        stderr = points.std(ddof=1) / math.sqrt(points.size)
        assert points.mean() < -2.0 * stderr

    def test_symmetric_micro_ensemble_is_flat(self):
        spec = build_kernel_matrix(
            KernelFunction.exponential(0.5, 1.0),
            KernelFunction.exponential(0.5, 1.0),
            1.0,
        )
        points = [
            leverage_correlation(rescale_light(simulate(spec, LIGHT, 200.0, [43, s]))).point
            for s in range(150)
        ]
        points = np.asarray(points)
        stderr = points.std(ddof=1) / math.sqrt(points.size)
        assert abs(points.mean()) < 2.0 * stderr

    def test_needs_enough_windows(self):
        t = np.linspace(0.0, 1.0, 11)
        with pytest.raises(ValueError, match="windows"):
            leverage_correlation(PathGrid(t, t), 0.5)

    def test_degenerate_path_raises(self):
        # exact arithmetic: integer times and slope keep every window identical
        t = np.arange(101, dtype=float)
        with pytest.raises(ValueError, match="degenerate"):
            leverage_correlation(PathGrid(t, 3.0 * t), 10.0)


# ---------------------------------------------------------------------------
# quadratic covariation


class TestQuadraticCovariation:
    def test_self_covariation_is_squared_increments(self):
        x = PathGrid(np.array([0.0, 1.0, 2.0]), np.array([0.0, 1.0, 3.0]))
        assert quadratic_covariation(x, x) == pytest.approx(1.0 + 4.0)

    def test_refinement_oracle(self):
        # union grid 0, 0.5, 1, 2; x increments 0, 1, 2; y increments 2, 0, 3
        x = PathGrid(np.array([0.0, 1.0, 2.0]), np.array([0.0, 1.0, 3.0]))
        y = PathGrid(np.array([0.0, 0.5, 2.0]), np.array([0.0, 2.0, 5.0]))
        assert quadratic_covariation(x, y) == pytest.approx(6.0)
        assert quadratic_covariation(y, x) == pytest.approx(6.0)

    def test_disjoint_spans_contribute_nothing(self):
        x = PathGrid(np.array([0.0, 0.5, 1.0]), np.array([0.0, 2.0, -1.0]))
        y = PathGrid(np.array([2.0, 2.5, 3.0]), np.array([0.0, 1.0, 4.0]))
        assert quadratic_covariation(x, y) == 0.0

    def test_independent_brownians_vanish(self):
        values = []
        for s in range(40):
            g = np.random.default_rng([63, s])
            paths = []
            for _ in range(2):
                steps = g.standard_normal(1000) * math.sqrt(1e-3)
                paths.append(
                    PathGrid(
                        np.linspace(0.0, 1.0, 1001),
                        np.concatenate([[0.0], np.cumsum(steps)]),
                    )
                )
            values.append(quadratic_covariation(*paths))
        values = np.asarray(values)
        stderr = values.std(ddof=1) / math.sqrt(values.size)
        assert abs(values.mean()) < 3.0 * stderr

    @given(
        data=st.lists(
            st.floats(-5.0, 5.0), min_size=6, max_size=18
        ),
        seed=st.integers(0, 2**16),
    )
    @settings(max_examples=40, deadline=None)
    def test_symmetry_and_bilinearity(self, data, seed):
        g = np.random.default_rng(seed)
        n = len(data) // 3
        tx = np.sort(g.uniform(0.0, 3.0, n))
        ty = np.sort(g.uniform(0.0, 3.0, n))
        x = PathGrid(tx, np.asarray(data[:n]))
        y = PathGrid(ty, np.asarray(data[n : 2 * n]))
        z = PathGrid(ty, np.asarray(data[2 * n : 3 * n]))
        assert quadratic_covariation(x, y) == quadratic_covariation(y, x)
        combined = PathGrid(ty, 2.0 * y.values - 3.0 * z.values)
        expected = 2.0 * quadratic_covariation(x, y) - 3.0 * quadratic_covariation(x, z)
        assert quadratic_covariation(x, combined) == pytest.approx(
            expected, rel=1e-9, abs=1e-9
        )


# ---------------------------------------------------------------------------
# moment-scaling Hurst regression


@pytest.fixture(scope="module")
def fbm_half():
    return [simulate_fbm(0.5, 512, [17, s]) for s in range(100)]


@pytest.fixture(scope="module")
def fbm_rough():
    return [simulate_fbm(0.1, 512, [17, s]) for s in range(100)]


class TestHurstMomentScaling:
    def test_fbm_standard(self, fbm_half):
        est = hurst_moment_scaling(fbm_half)
        assert 0.45 < est.point < 0.55
        assert est.stderr < 0.02
        assert est.n == 100

    def test_fbm_rough(self, fbm_rough):
        est = hurst_moment_scaling(fbm_rough)
        assert 0.07 < est.point < 0.13

    def test_rough_cir_ensemble(self):
        params = RoughCirParams(
            roughness=0.6,
            rate=0.4508241991944111,
            level=4.0,
            noise_scale=1.5811388300841895,
        )
        ensemble = [
            simulate_rough_cir(params, n_steps=1024, horizon=1.0, seed=[23, s])
            for s in range(100)
        ]
        est = hurst_moment_scaling(ensemble)
        assert 0.05 < est.point < 0.15

    def test_scale_and_permutation_invariance(self, fbm_rough):
        base = hurst_moment_scaling(fbm_rough)
        scaled = [PathGrid(p.times, 7.3 * p.values) for p in fbm_rough]
        assert hurst_moment_scaling(scaled).point == pytest.approx(
            base.point, abs=1e-10
        )
        order = np.random.default_rng(3).permutation(len(fbm_rough))
        shuffled = [fbm_rough[i] for i in order]
        assert hurst_moment_scaling(shuffled).point == pytest.approx(
            base.point, abs=1e-12
        )

    def test_preconditions(self, fbm_half):
        with pytest.raises(ValueError, match="at least 100"):
            hurst_moment_scaling(fbm_half[:50])
        dt = 1.0 / 512
        with pytest.raises(ValueError, match="decade"):
            hurst_moment_scaling(fbm_half, lags=[dt, 2 * dt, 4 * dt])
        with pytest.raises(ValueError, match="multiples"):
            hurst_moment_scaling(fbm_half, lags=[1.37 * dt, 29.1 * dt])
        with pytest.raises(ValueError, match="burn_in"):
            hurst_moment_scaling(fbm_half, burn_in=1.0)
        with pytest.raises(ValueError, match="moment"):
            hurst_moment_scaling(fbm_half, moments=[2.0])
        ragged = [PathGrid(np.array([0.0, 0.1, 0.4]), np.zeros(3))] * 100
        with pytest.raises(ValueError, match="uniformly spaced"):
            hurst_moment_scaling(ragged)
        short = [
            PathGrid(np.linspace(0.0, 1.0, 65), np.zeros(65)) for _ in range(100)
        ]
        with pytest.raises(ValueError, match="too short"):
            hurst_moment_scaling(short)


# ---------------------------------------------------------------------------
# Kolmogorov-Smirnov


class TestKsDistance:
    def test_identical_samples(self):
        res = ks_distance([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
        assert res.statistic == 0.0
        assert not res.reject_at_1pct

    def test_critical_constant(self):
        # sqrt(-log(0.005)/2) to 30 digits via mpmath
        assert KS_CRITICAL_1PCT == pytest.approx(1.62762363071872925505819664628, rel=1e-15)

    def test_matches_reference_statistic(self):
        for s in range(10):
            g = np.random.default_rng([66, s])
            a = g.standard_normal(173)
            b = g.standard_normal(311) + 0.2
            ours = ks_distance(a, b).statistic
            ref = stats.ks_2samp(a, b, method="asymp").statistic
            assert ours == pytest.approx(ref, abs=1e-14)

    def test_null_rarely_rejects(self):
        rejections = 0
        for s in range(40):
            g = np.random.default_rng([61, s])
            res = ks_distance(g.standard_normal(1000), g.standard_normal(1000))
            rejections += res.reject_at_1pct
        assert rejections <= 2

    def test_shifted_alternative_rejects(self):
        g = np.random.default_rng(7)
        res = ks_distance(g.standard_normal(1000), g.standard_normal(1000) + 1.0)
        assert res.reject_at_1pct
        assert res.statistic > 0.3

    def test_validation(self):
        with pytest.raises(ValueError, match="nonempty"):
            ks_distance([], [1.0])
        with pytest.raises(ValueError, match="finite"):
            ks_distance([math.nan], [1.0])
