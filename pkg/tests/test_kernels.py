import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from hawkeslim.kernels import (
    EXPONENTIAL_MIXTURE,
    AssumptionReport,
    KernelFunction,
    KernelMatrixSpec,
    ScalingRegime,
    build_kernel_matrix,
    eigen_structure,
    exponential_resolvent,
    l1_norm,
    resolvent_matrix,
    scalar_resolvent,
    validate_assumptions,
    wiener_hopf_residual,
)


def exp_spec(w1=0.4, w2=0.2, rate=1.0, asymmetry=3.0):
    return build_kernel_matrix(
        KernelFunction.exponential(w1, rate),
        KernelFunction.exponential(w2, rate),
        asymmetry,
    )


def power_spec(w1=0.4, w2=0.2, alpha=0.6, asymmetry=3.0):
    return build_kernel_matrix(
        KernelFunction.power_law(w1, alpha),
        KernelFunction.power_law(w2, alpha),
        asymmetry,
    )


# ---------------------------------------------------------------- kernels


def test_exponential_mass():
    k = KernelFunction.exponential(0.4, 1.0)
    assert l1_norm(k) == pytest.approx(0.4, abs=1e-12)
    assert k(0.0) == pytest.approx(0.4)


def test_power_law_mass():
    k = KernelFunction.power_law(0.2, 0.6)
    assert l1_norm(k) == pytest.approx(0.2, abs=1e-12)


def test_mass_against_quadrature():
    mix = KernelFunction.exponential_mixture([(0.2, 1.0), (0.6, 3.0)])
    assert l1_norm(mix) == pytest.approx(0.4, abs=1e-12)
    assert abs(l1_norm(mix, numerical=True) - l1_norm(mix)) < 1e-8
    pl = KernelFunction.power_law(0.7, 0.8)
    assert abs(l1_norm(pl, numerical=True) - l1_norm(pl)) < 1e-8


def test_pointwise_values_match_formulas():
    xs = np.linspace(0.0, 4.0, 9)
    mix = KernelFunction.exponential_mixture([(0.2, 1.0), (0.6, 3.0)])
    np.testing.assert_allclose(
        mix(xs), 0.2 * np.exp(-xs) + 0.6 * np.exp(-3.0 * xs), rtol=1e-14
    )
    pl = KernelFunction.power_law(0.2, 0.6)
    np.testing.assert_allclose(
        pl(xs), 0.2 * 0.6 * (1.0 + xs) ** (-1.6), rtol=1e-14
    )
    assert np.isscalar(mix(1.0))


def test_first_moment():
    assert KernelFunction.exponential(0.4, 2.0).first_moment == pytest.approx(
        0.4 / 2.0, abs=1e-14
    )
    assert math.isinf(KernelFunction.power_law(0.2, 0.6).first_moment)


def test_tail_integral_matches_quadrature():
    mix = KernelFunction.exponential_mixture([(0.2, 1.0), (0.6, 3.0)])
    pl = KernelFunction.power_law(0.2, 0.6)
    for k in (mix, pl):
        expected, _ = quad(k, 2.0, np.inf, epsabs=1e-12)
        assert k.tail_integral(2.0) == pytest.approx(expected, abs=1e-9)


def test_inconsistent_weight_rejected():
    with pytest.raises(ValueError, match="mass"):
        KernelFunction(EXPONENTIAL_MIXTURE, 0.5, (1.0,), (1.0,))


def test_pointwise_negative_mixture_rejected():
    with pytest.raises(ValueError, match="nonnegative"):
        KernelFunction.exponential_mixture([(1.0, 1.0), (-2.0, 2.0)])


def test_power_law_exponent_range():
    with pytest.raises(ValueError):
        KernelFunction.power_law(0.2, 0.4)
    with pytest.raises(ValueError):
        KernelFunction.power_law(0.2, 1.1)


# ------------------------------------------------------------ kernel matrix


def test_build_accepts_critical_asymmetric():
    spec = exp_spec(0.4, 0.2, asymmetry=3.0)
    assert spec.branching_ratio == pytest.approx(1.0, abs=1e-12)
    integrated = np.array([[0.4, 3.0 * 0.2], [0.2, 0.4 + 2.0 * 0.2]])
    radius = np.max(np.abs(np.linalg.eigvals(integrated)))
    assert radius == pytest.approx(1.0, abs=1e-6)


def test_build_accepts_symmetric():
    spec = exp_spec(0.5, 0.5, asymmetry=1.0)
    assert spec.branching_ratio == pytest.approx(1.0, abs=1e-12)


def test_build_rejects_and_names_residual():
    with pytest.raises(ValueError, match="0.5"):
        build_kernel_matrix(
            KernelFunction.exponential(0.5, 1.0),
            KernelFunction.exponential(0.5, 1.0),
            2.0,
        )


def test_asymmetry_below_one_rejected():
    with pytest.raises(ValueError, match="asymmetry"):
        KernelMatrixSpec(
            KernelFunction.exponential(0.5, 1.0),
            KernelFunction.exponential(0.5, 1.0),
            0.5,
        )


def test_matrix_values_structure():
    spec = exp_spec()
    xs = np.array([0.0, 1.0, 2.5])
    mat = spec.matrix_values(xs)
    k1 = spec.self_kernel(xs)
    k2 = spec.cross_kernel(xs)
    np.testing.assert_allclose(mat[:, 0, 0], k1)
    np.testing.assert_allclose(mat[:, 0, 1], 3.0 * k2)
    np.testing.assert_allclose(mat[:, 1, 0], k2)
    np.testing.assert_allclose(mat[:, 1, 1], k1 + 2.0 * k2)


# ------------------------------------------------------------ eigenstructure


def test_eigen_light_exponential():
    sd = eigen_structure(exp_spec(), ScalingRegime.light(1.0, 1.0))
    xs = np.linspace(0.0, 8.0, 33)
    np.testing.assert_allclose(sd.principal_kernel(xs), np.exp(-xs), atol=1e-14)
    # first moment of the unit-mass principal kernel exp(-x) is exactly 1
    assert sd.first_moment == pytest.approx(1.0, abs=1e-12)
    assert sd.principal_direction == (1.0, 3.0)
    assert sd.secondary_direction == (1.0, -1.0)
    assert np.hypot(*sd.symmetric_unit) == pytest.approx(1.0, abs=1e-14)
    assert sd.tail_constant is None


def test_eigen_symmetric_directions():
    sd = eigen_structure(
        exp_spec(0.5, 0.5, asymmetry=1.0), ScalingRegime.light(1.0, 1.0)
    )
    assert sd.principal_direction == (1.0, 1.0)
    assert sd.secondary_direction == (1.0, -1.0)


def test_eigen_heavy_power_law():
    sd = eigen_structure(power_spec(), ScalingRegime.heavy(0.6, 1.0, 1.0))
    assert sd.tail_constant == pytest.approx(0.6, abs=1e-12)
    assert sd.first_moment is None
    # independent numeric check of the tail constant: a * x^a * tail(x),
    # still ~a/x away from its limit at finite x
    x = 1000.0
    tail, _ = quad(sd.principal_kernel, x, np.inf, epsabs=1e-13)
    assert 0.6 * x**0.6 * tail == pytest.approx(0.6, rel=1e-3)


def test_eigen_family_regime_mismatches():
    with pytest.raises(ValueError, match="tail constant"):
        eigen_structure(exp_spec(), ScalingRegime.heavy(0.6, 1.0, 1.0))
    with pytest.raises(ValueError, match="first moment"):
        eigen_structure(power_spec(), ScalingRegime.light(1.0, 1.0))
    mixed = build_kernel_matrix(
        KernelFunction.power_law(0.4, 0.6),
        KernelFunction.power_law(0.2, 0.7),
        3.0,
    )
    with pytest.raises(ValueError, match="shared tail exponent"):
        eigen_structure(mixed, ScalingRegime.heavy(0.6, 1.0, 1.0))
    with pytest.raises(ValueError, match="regime"):
        eigen_structure(power_spec(alpha=0.7), ScalingRegime.heavy(0.6, 1.0, 1.0))


@settings(max_examples=60, deadline=None)
@given(
    asymmetry=st.floats(1.0, 5.0),
    cross_frac=st.floats(0.0, 0.999),
    r1=st.floats(0.1, 10.0),
    r2=st.floats(0.1, 10.0),
)
def test_eigen_directions_diagonalize_matrix(asymmetry, cross_frac, r1, r2):
    w2 = cross_frac / asymmetry
    w1 = 1.0 - asymmetry * w2
    spec = build_kernel_matrix(
        KernelFunction.exponential(w1, r1),
        KernelFunction.exponential(w2, r2),
        asymmetry,
    )
    sd = eigen_structure(spec, ScalingRegime.light(1.0, 1.0))
    xs = np.linspace(0.0, 10.0, 100)
    mat = spec.matrix_values(xs)
    for direction, kern in (
        (sd.principal_direction, sd.principal_kernel),
        (sd.secondary_direction, sd.secondary_kernel),
    ):
        v = np.array(direction)
        lhs = np.einsum("i,nij->nj", v, mat)
        rhs = kern(xs)[:, None] * v[None, :]
        assert np.max(np.abs(lhs - rhs)) < 1e-10


# ------------------------------------------------------------ scaling regimes


def test_light_regime_scaling():
    seq = ScalingRegime.light(gap=1.0, base_rate=1.0)
    assert seq.kernel_scale(2000.0) == pytest.approx(1.0 - 1.0 / 2000.0, abs=1e-15)
    assert 2000.0 * (1.0 - seq.kernel_scale(2000.0)) == pytest.approx(1.0, rel=1e-11)
    assert seq.baseline(2000.0) == 1.0
    assert seq.kernel_scale(100.0) < seq.kernel_scale(1000.0)
    # the critical boundary itself is reachable: scale 0 at the minimum horizon
    assert seq.kernel_scale(1.0) == 0.0
    with pytest.raises(ValueError, match="horizon"):
        seq.kernel_scale(0.5)


def test_heavy_regime_scaling():
    seq = ScalingRegime.heavy(tail_exponent=0.6, gap=1.0, base_rate=1.0)
    T = 1e4
    assert T**0.6 * (1.0 - seq.kernel_scale(T)) == pytest.approx(1.0, rel=1e-11)
    assert seq.baseline(T) == pytest.approx(0.025118864315095794, rel=1e-12)
    assert seq.min_horizon == pytest.approx(1.0)


def test_regime_validation():
    with pytest.raises(ValueError):
        ScalingRegime.heavy(0.4, 1.0, 1.0)
    with pytest.raises(ValueError):
        ScalingRegime.light(-1.0, 1.0)
    with pytest.raises(ValueError):
        ScalingRegime.light(1.0, 0.0)
    with pytest.raises(ValueError):
        ScalingRegime("light", 1.0, 1.0, 0.6)


# --------------------------------------------------------------- resolvents


def test_scalar_resolvent_of_zero_kernel():
    grid = np.arange(0.0, 1.0, 1e-2)
    d = scalar_resolvent(np.zeros_like(grid), 1e-2)
    np.testing.assert_array_equal(d, np.zeros_like(grid))


def test_scalar_resolvent_matches_exponential_closed_form():
    h = 1e-3
    grid = np.arange(0.0, 5.0 + h / 2, h)
    d = scalar_resolvent(0.9 * np.exp(-grid), h)
    # geometric-convolution closed form for scale 0.9 of a unit-mass rate-1
    # exponential: 0.9 * exp(-0.1 x)
    oracle = 0.9 * np.exp(-0.1 * grid)
    assert np.max(np.abs(d - oracle)) < 1e-6


def test_exponential_resolvent_helper_matches_formula():
    grid = np.linspace(0.0, 5.0, 11)
    np.testing.assert_allclose(
        exponential_resolvent(0.2, 1.0, 0.9, grid),
        0.18 * np.exp(-0.82 * grid),
        rtol=1e-14,
    )


def test_resolvent_matrix_eigen_actions():
    h = 1e-3
    grid = np.arange(0.0, 5.0 + h / 2, h)
    psi = resolvent_matrix(exp_spec(), 0.9, grid)
    assert psi.shape == (len(grid), 2, 2)
    d1 = 0.9 * np.exp(-0.1 * grid)
    d2 = 0.18 * np.exp(-0.82 * grid)
    # row sums follow the principal scalar resolvent, the signed direction
    # the secondary one
    rowsum = psi @ np.ones(2)
    assert np.max(np.abs(rowsum - d1[:, None])) < 2e-6
    action = np.einsum("i,nij->nj", np.array([1.0, -1.0]), psi)
    assert np.max(np.abs(action - d2[:, None] * np.array([1.0, -1.0]))) < 2e-6


def test_resolvent_rejects_supercritical_scale():
    grid = np.arange(0.0, 1.0, 1e-2)
    with pytest.raises(ValueError, match="scale"):
        resolvent_matrix(exp_spec(), 1.0, grid)
    with pytest.raises(ValueError, match="scale"):
        resolvent_matrix(exp_spec(), 1.5, grid)


def test_resolvent_rejects_bad_grids():
    with pytest.raises(ValueError):
        resolvent_matrix(exp_spec(), 0.5, np.array([0.0, 0.1, 0.3]))
    with pytest.raises(ValueError):
        resolvent_matrix(exp_spec(), 0.5, np.array([0.1, 0.2, 0.3]))


def test_wiener_hopf_residual_on_grid():
    h = 1e-3
    grid = np.arange(0.0, 5.0 + h / 2, h)
    assert wiener_hopf_residual(exp_spec(), 0.9, grid) < 1e-8


def test_resolvent_mass_is_geometric():
    h = 1e-2
    grid = np.arange(0.0, 100.0 + h / 2, h)
    d = scalar_resolvent(0.9 * np.exp(-grid), h)
    mass = np.trapezoid(d, grid)
    assert mass == pytest.approx(0.9 / 0.1, rel=1e-2)


# ---------------------------------------------------------------- validation


def test_validate_light_exponential_passes():
    report = validate_assumptions(exp_spec(), ScalingRegime.light(1.0, 1.0))
    assert isinstance(report, AssumptionReport)
    assert report.passed
    assert "ok" in str(report)


def test_validate_heavy_power_law_passes():
    report = validate_assumptions(power_spec(), ScalingRegime.heavy(0.6, 1.0, 1.0))
    assert report.passed


def test_validate_heavy_exponential_tail_fails():
    report = validate_assumptions(exp_spec(), ScalingRegime.heavy(0.6, 1.0, 1.0))
    failed = {c.name for c in report.checks if not c.passed}
    assert "tail-limit" in failed


def test_validate_flags_criticality_residual():
    # direct construction allows exploring near-violations of criticality
    spec = KernelMatrixSpec(
        KernelFunction.exponential(0.4, 1.0),
        KernelFunction.exponential(0.58 / 3.0, 1.0),
        3.0,
    )
    report = validate_assumptions(spec, ScalingRegime.light(1.0, 1.0))
    assert not report.passed
    assert report.criticality_residual == pytest.approx(0.02, abs=1e-12)
    crit = next(c for c in report.checks if c.name == "criticality")
    assert not crit.passed
    assert "0.02" in crit.detail


# -------------------------------------------------------------- serialization


def test_kernel_json_round_trip():
    for k in (
        KernelFunction.exponential_mixture([(0.2, 1.0), (0.6, 3.0)]),
        KernelFunction.power_law(0.2, 0.6),
    ):
        doc = json.loads(json.dumps(k.to_dict()))
        assert KernelFunction.from_dict(doc) == k
        assert set(doc) == {"family", "weight", "params"}


def test_regime_json_round_trip():
    for seq in (
        ScalingRegime.light(2.0, 0.5),
        ScalingRegime.heavy(0.6, 1.5, 1.0),
    ):
        doc = json.loads(json.dumps(seq.to_dict()))
        assert ScalingRegime.from_dict(doc) == seq
        assert "regime" in doc


def test_matrix_spec_json_round_trip():
    spec = exp_spec()
    doc = json.loads(json.dumps(spec.to_dict()))
    assert KernelMatrixSpec.from_dict(doc) == spec
