import math

import numpy as np
import pytest

from hausdorff_approx.errors import DivergentIntegral
from hausdorff_approx.quadrature import (
    endpoint_divergence,
    gauss_legendre,
    geometric_cuts,
    integrate_many,
    integrate_shared,
    raise_if_divergent,
)


def test_gauss_legendre_exact_for_polynomials():
    x, w = gauss_legendre(6)
    assert np.sum(w * x ** 10) == pytest.approx(2 / 11, rel=1e-14)


def test_many_components_with_different_limits():
    b = np.array([1.0, 2.0, 3.0])
    res = integrate_many(lambda t, i: t ** 2, 0.0, b)
    assert np.allclose(res.value, b ** 3 / 3, rtol=1e-12)
    assert res.converged.all()


def test_component_index_reaches_integrand():
    k = np.array([1.0, 2.0])
    res = integrate_many(lambda t, i: np.cos(k[i] * t), 0.0, math.pi / 4, size=2)
    assert np.allclose(res.value, np.sin(k * math.pi / 4) / k, rtol=1e-12)


@pytest.mark.parametrize("a,b,exact", [
    (0.0, math.inf, 0.5 * math.sqrt(math.pi)),
    (-math.inf, 0.0, 0.5 * math.sqrt(math.pi)),
    (-math.inf, math.inf, math.sqrt(math.pi)),
])
def test_infinite_limits(a, b, exact):
    res = integrate_many(lambda t, i: np.exp(-t * t), a, b, size=1)
    assert res.value[0] == pytest.approx(exact, rel=1e-10)


def test_break_points_handle_kinks():
    res = integrate_many(lambda t, i: np.abs(t - 0.3), 0.0, 1.0, size=1, points=[[0.3]],
                         abs_tol=1e-14, rel_tol=1e-14)
    assert res.value[0] == pytest.approx(0.5 * (0.3 ** 2 + 0.7 ** 2), abs=1e-14)


def test_reversed_limits_flip_sign():
    res = integrate_many(lambda t, i: t, 1.0, 0.0, size=1)
    assert res.value[0] == pytest.approx(-0.5)


def test_integrable_endpoint_singularity():
    res = integrate_many(lambda t, i: t ** -0.5, 0.0, 1.0, size=1, abs_tol=1e-10, rel_tol=1e-10)
    assert res.value[0] == pytest.approx(2.0, rel=1e-8)


def test_shared_partition_vector_integrand():
    res = integrate_shared(lambda t: np.stack([np.sin(t), np.cos(t)], axis=1), 0.0, math.pi)
    assert np.allclose(res.value, [2.0, 0.0], atol=1e-10)


def test_endpoint_divergence_separates_log_from_power():
    cuts = geometric_cuts(0.0, first=1e-1, factor=1e-2, levels=5)
    log_piece = lambda c0, c1: np.array([math.log(c0 / c1)])  # noqa: E731
    sqrt_piece = lambda c0, c1: np.array([2 * (math.sqrt(c0) - math.sqrt(c1))])  # noqa: E731
    assert endpoint_divergence(log_piece, cuts)[0]
    assert not endpoint_divergence(sqrt_piece, cuts)[0]
    with pytest.raises(DivergentIntegral):
        raise_if_divergent(np.array([True]), "lower")
    raise_if_divergent(np.array([False]), "lower")


def test_geometric_cuts_toward_infinity():
    assert geometric_cuts(math.inf, first=2.0, factor=0.5, levels=3) == [2.0, 4.0, 8.0]
    assert geometric_cuts(1.0, first=-0.1, factor=0.1, levels=2) == [0.9, 0.99]
