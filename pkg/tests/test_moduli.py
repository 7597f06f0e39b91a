import math

import numpy as np
import pytest

from hausdorff_approx import functions as F
from hausdorff_approx.errors import ConfigError, DiniDivergent, InvalidGrid
from hausdorff_approx.moduli import (
    dini_integral,
    modulus_analytic,
    modulus_estimate,
    modulus_function,
    modulus_ladder,
    trivial_cap,
)


def test_modulus_estimate_examples():
    assert modulus_estimate(F.constant(2.0), 0.3, math.inf).value == 0.0
    assert modulus_estimate(F.tent(), 0.25, math.inf).value == pytest.approx(0.25, abs=1e-10)
    assert modulus_estimate(F.indicator(0.0, 1.0), 0.1, 1).value == pytest.approx(0.2, abs=1e-8)


def test_modulus_vanishes_at_zero_shift():
    assert modulus_estimate(F.cusp(0.5), 0.0, 2).value == 0.0
    assert modulus_analytic("tent", 0.0, math.inf).value == 0.0
    with pytest.raises(InvalidGrid):
        modulus_estimate(F.tent(), -0.1, 2)


@pytest.mark.parametrize("delta", [0.01, 0.3, 1.0, 3.0])
def test_analytic_tent_sup_modulus(delta):
    assert modulus_analytic("tent", delta, math.inf).value == pytest.approx(min(delta, 1.0))


def test_analytic_cusp_half_order():
    for d in (1e-3, 1e-2, 0.1):
        v = modulus_analytic("cusp", d, math.inf, alpha=0.5).value
        assert 1.0 <= v / math.sqrt(d) <= math.sqrt(2) + 1e-12
    ratio = modulus_analytic("cusp", 1e-4, math.inf, alpha=0.5).value / \
        modulus_analytic("cusp", 1e-2, math.inf, alpha=0.5).value
    assert ratio == pytest.approx(0.1, rel=1e-6)


def test_analytic_indicator_l1():
    for d in (0.01, 0.5, 1.0):
        assert modulus_analytic("indicator", d, 1).value == pytest.approx(2 * d)


def test_analytic_unknown_class():
    with pytest.raises(ConfigError):
        modulus_analytic("sawtooth", 0.1, 2)


@pytest.mark.parametrize("f", [F.tent(), F.cusp(0.25), F.indicator(0.0, 1.0), F.gaussian()],
                         ids=lambda f: f.label)
@pytest.mark.parametrize("p", [1, 2, math.inf])
def test_estimate_agrees_with_analytic(f, p):
    for d in (1e-3, 0.03, 1.0):
        est = modulus_estimate(f, d, p).value
        exact = modulus_analytic(f, d, p).value
        assert est == pytest.approx(exact, rel=0.1)


@pytest.mark.parametrize("p", [1, 2, math.inf])
def test_ladder_is_monotone(p):
    deltas = np.geomspace(1e-3, 2.0, 15)
    values = [e.value for e in modulus_ladder(F.cusp(0.5), deltas, p)]
    assert all(b >= a for a, b in zip(values, values[1:]))


@pytest.mark.parametrize("p", [1, 2, math.inf])
def test_estimate_is_monotone(p):
    f = F.mollified_indicator(1.0, 2.0)
    values = [modulus_estimate(f, d, p).value for d in np.geomspace(1e-3, 1.0, 10)]
    assert all(b >= a for a, b in zip(values, values[1:]))


@pytest.mark.parametrize("p", [1, 2, math.inf])
def test_subadditive(p):
    f = F.cusp(0.5)
    for d1, d2 in [(0.01, 0.02), (0.1, 0.05), (0.3, 0.4)]:
        e1, e2, e12 = (modulus_estimate(f, d, p) for d in (d1, d2, d1 + d2))
        assert e12.value <= e1.value + e2.value + 2 * (e1.error + e2.error + e12.error) + 1e-12


@pytest.mark.parametrize("p", [1, 2, math.inf])
def test_translation_invariant(p):
    f = F.cusp(0.5)
    for d in (0.01, 0.2):
        assert modulus_estimate(f.shifted(0.375), d, p).value == pytest.approx(
            modulus_estimate(f, d, p).value, abs=1e-10)


def test_modulus_function_and_cap():
    f = F.tent()
    cap = trivial_cap(f, math.inf)
    assert cap == pytest.approx(2.0)
    omega = modulus_function(f, math.inf, cap=0.5)
    assert omega(0.1) == pytest.approx(0.1)
    assert omega(3.0) == 0.5
    assert omega(0.0) == 0.0
    assert np.allclose(omega(np.array([0.2, 0.4])), [0.2, 0.4])
    estimated = modulus_function(f, math.inf, source="estimate")
    assert estimated(0.25) == pytest.approx(0.25, abs=1e-10)


def test_dini_examples():
    assert dini_integral(lambda d: d, 1.0) == pytest.approx(1.0, rel=1e-8)
    assert dini_integral(lambda d: np.sqrt(d), 16.0) == pytest.approx(0.5, rel=1e-8)
    with pytest.raises(DiniDivergent):
        dini_integral(lambda d: np.ones_like(d), 1.0)


def test_dini_other_weights():
    # int_0^1 t |log t| / t dt = 1 and int_0^1 t dt = 1/2
    assert dini_integral(lambda d: d, 1.0, "log_over_t") == pytest.approx(1.0, rel=1e-8)
    assert dini_integral(lambda d: d, 1.0, "one") == pytest.approx(0.5, rel=1e-8)
    with pytest.raises(ConfigError):
        dini_integral(lambda d: d, 1.0, "square")


def test_dini_logarithmic_moduli():
    # 1/log^2 is Dini, 1/log is not
    sq = dini_integral(lambda d: np.where(d < 0.5, 1 / np.log(1 / np.maximum(d, 1e-300)) ** 2,
                                          1 / math.log(2) ** 2), 2.0)
    assert math.isfinite(sq)
    with pytest.raises(DiniDivergent):
        dini_integral(lambda d: np.where(d < 0.5, 1 / np.log(1 / np.maximum(d, 1e-300)), 1 / math.log(2)), 2.0)
