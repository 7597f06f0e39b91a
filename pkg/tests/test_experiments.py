import math

import numpy as np
import pytest

from hausdorff_approx import functions as F
from hausdorff_approx import operators as O
from hausdorff_approx.errors import ConfigError, DegenerateZeroError, InvalidGrid, RateFitFailure
from hausdorff_approx.experiments import (
    RateReport,
    approximate_identity_study,
    bellman_divergence_demo,
    convergence_study,
    error_table,
    fejer_convolution,
    fejer_modulus_bound,
    fit_rate,
    recovery_study,
    study_grid,
)
from hausdorff_approx.fourier import truncated_approximant

C = O.cesaro()


def test_fit_rate_exact_power():
    n = [8, 16, 32, 64]
    slope, _, r2 = fit_rate(n, [v ** -0.5 for v in n])
    assert slope == pytest.approx(-0.5, abs=1e-12)
    assert r2 == pytest.approx(1.0, abs=1e-12)


def test_fit_rate_three_decades():
    assert fit_rate([10, 100, 1000], [1, 0.1, 0.01])[0] == pytest.approx(-1.0, abs=1e-12)


def test_fit_rate_noisy():
    rng = np.random.default_rng(0)
    n = np.array([8, 16, 32, 64, 128])
    slope, _, _ = fit_rate(n, 3 * n ** -0.7 * (1 + 0.01 * rng.standard_normal(n.size)))
    assert -0.75 <= slope <= -0.65


def test_fit_rate_failures():
    with pytest.raises(RateFitFailure):
        fit_rate([1, 2], [1, 0.5])
    with pytest.raises(DegenerateZeroError):
        fit_rate([1, 2, 4], [1, 0.5, 0.0])
    with pytest.raises(DegenerateZeroError):
        fit_rate([1, 2, 4], [1, 0.5, 1e-13])


def test_rate_report_invariants():
    with pytest.raises(ConfigError):
        RateReport("op", "f", 2.0, [1, 2], [1.0], math.nan, math.nan, [1.0, 2.0])
    with pytest.raises(InvalidGrid):
        RateReport("op", "f", 2.0, [2, 1], [1.0, 1.0], math.nan, math.nan, [1.0, 2.0])


def test_study_grid_refines_toward_singular_points():
    xs = study_grid(F.tent(), 64)
    assert xs[0] == -4.0 and xs[-1] == 4.0
    assert np.all(np.diff(xs) > 0)
    for c in (-1.0, 0.0, 1.0):
        assert np.min(np.abs(xs - (c + 1 / 256))) < 1e-12


def test_fejer_convolution_examples():
    assert fejer_convolution(F.plateau(1e4), 1.0, 0.0) == pytest.approx(1.0, abs=1e-4)
    assert fejer_convolution(F.constant(1.0), 3.0, 7.0) == 1.0
    assert fejer_convolution(F.tent(), 1e4, 0.0) == pytest.approx(1.0, abs=2e-3)
    assert 0.5 < fejer_convolution(F.tent(), 4.0, 0.0) < 1.0


def test_fejer_convolution_is_translation_covariant():
    f = F.cusp(0.5)
    assert fejer_convolution(f.shifted(0.4), 8.0, 0.1) == pytest.approx(
        fejer_convolution(f, 8.0, 0.5), abs=1e-8)


def test_fejer_modulus_bound_decreases():
    omega = lambda d: np.sqrt(np.minimum(d, 1.0))  # noqa: E731
    values = [fejer_modulus_bound(omega, r) for r in (4, 16, 64)]
    assert values[0] > values[1] > values[2] > 0


def test_approximate_identity_zero_function():
    with pytest.raises(DegenerateZeroError):
        approximate_identity_study(F.zero(), math.inf, [4, 8, 16, 32])


def test_approximate_identity_cusp_rate():
    r = approximate_identity_study(F.cusp(0.5), math.inf, [16, 32, 64, 128, 256])
    assert -0.7 <= r.fitted_slope <= -0.3
    assert r.ladder_name == "r"


def test_convergence_study_zero_function():
    with pytest.raises(DegenerateZeroError) as info:
        convergence_study(C, F.zero(), "adjoint", 2, [8, 16, 32, 64])
    assert info.value.report.errors == [0.0] * 4


def test_convergence_study_needs_four_points_and_valid_target():
    with pytest.raises(InvalidGrid):
        convergence_study(C, F.tent(), "adjoint", 2, [8, 16, 32])
    with pytest.raises(ConfigError):
        convergence_study(C, F.tent(), "sideways", 2, [8, 16, 32, 64])


def test_error_table_reuses_evaluations_across_exponents():
    xs = np.linspace(-2, 2, 41)
    table = error_table(C, F.tent(), [8, 16], (1, 2, math.inf), x_grid=xs)
    direct = truncated_approximant(C, F.tent(), 16, xs).values
    assert np.allclose(table["values"][1], direct)
    e = table["errors"]
    assert e[math.inf][1] == pytest.approx(np.max(np.abs(direct - table["reference"])))
    assert all(e[p][1] < e[p][0] for p in e)


def test_forward_study_on_mollified_indicator():
    f = F.mollified_indicator(1.0, 2.0)
    xs = np.linspace(0.2, 3.0, 15)
    r = convergence_study(C, f, "forward", math.inf, [8, 16, 32, 64], x_grid=xs)
    assert all(math.isnan(b) for b in r.bound_values)
    assert r.errors[-1] < r.errors[0]


def test_recovery_of_constant_is_exact():
    with pytest.raises(DegenerateZeroError):
        recovery_study(C, F.constant(2.0), [8, 16, 32, 64], [-1.0, 0.0, 1.0])


def test_bellman_demo_zero_modulus_and_growth():
    zeros = bellman_divergence_demo([4, 16, 64], lambda d: np.zeros_like(d))
    assert [v for _, v in zeros] == [0.0, 0.0, 0.0]
    grow = bellman_divergence_demo([4, 16, 64, 256], lambda d: 0.5 * np.minimum(d, 1.0))
    values = [v for _, v in grow]
    assert all(b > a for a, b in zip(values, values[1:]))


def test_study_is_independent_of_thread_count(monkeypatch):
    xs = np.linspace(-2, 2, 21)
    runs = []
    for threads in ("1", "4"):
        monkeypatch.setenv("HAUS_THREADS", threads)
        runs.append(convergence_study(C, F.tent(), "adjoint", math.inf, [4, 8, 16, 32], x_grid=xs))
    assert runs[0].errors == runs[1].errors
    assert runs[0].bound_values == runs[1].bound_values
