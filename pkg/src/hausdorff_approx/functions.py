"""Catalog of test functions.

Every entry records its support, singular points and, when known in closed
form, its Fourier transform ``f^(y) = int f(s) exp(-i s y) ds``.
"""

from __future__ import annotations

import math

import numpy as np

from .core import TestFunction
from .errors import ConfigError

INF = math.inf


def _sinc(z):
    """sin(z)/z with the removable singularity filled in."""
    return np.sinc(np.asarray(z, dtype=float) / np.pi)


def tent() -> TestFunction:
    return TestFunction(
        eval=lambda x: np.maximum(0.0, 1.0 - np.abs(x)),
        support=(-1.0, 1.0),
        label="tent",
        breakpoints=(-1.0, 0.0, 1.0),
        analytic_ft=lambda y: _sinc(np.asarray(y) / 2) ** 2 + 0j,
        catalog_id="tent",
        params={"holder": 1.0},
    )


def indicator(a: float = 0.0, b: float = 1.0) -> TestFunction:
    if not b > a:
        raise ConfigError("indicator needs a < b")

    def ft(y):
        y = np.asarray(y, dtype=float)
        # (exp(-i a y) - exp(-i b y)) / (i y), written around the midpoint.
        m, h = 0.5 * (a + b), 0.5 * (b - a)
        return 2 * h * _sinc(h * y) * np.exp(-1j * m * y)

    return TestFunction(
        eval=lambda x: ((x >= a) & (x <= b)).astype(float),
        support=(a, b),
        label=f"indicator[{a:g},{b:g}]",
        lp=frozenset({1.0, 2.0, INF}),
        breakpoints=(a, b),
        analytic_ft=ft,
        catalog_id="indicator" if (a, b) == (0.0, 1.0) else None,
        params={"holder": 0.0, "a": a, "b": b},
        continuous=False,
    )


def cusp(alpha: float) -> TestFunction:
    """(1 - |x|)_+ ** alpha; Hoelder of order alpha at x = +-1."""
    if not 0 < alpha <= 1:
        raise ConfigError("cusp exponent must lie in (0, 1]")
    return TestFunction(
        eval=lambda x: np.maximum(0.0, 1.0 - np.abs(x)) ** alpha,
        support=(-1.0, 1.0),
        label=f"cusp_{alpha:g}",
        breakpoints=(-1.0, 0.0, 1.0),
        catalog_id="cusp",
        params={"alpha": alpha, "holder": alpha},
    )


def origin_cusp(alpha: float) -> TestFunction:
    """(1 - |x| ** alpha)_+; the Hoelder singularity sits at the origin."""
    if not 0 < alpha <= 1:
        raise ConfigError("cusp exponent must lie in (0, 1]")
    return TestFunction(
        eval=lambda x: np.maximum(0.0, 1.0 - np.abs(x) ** alpha),
        support=(-1.0, 1.0),
        label=f"origin_cusp_{alpha:g}",
        breakpoints=(-1.0, 0.0, 1.0),
        catalog_id="origin_cusp",
        params={"alpha": alpha, "holder": alpha},
    )


def gaussian(center: float = 0.0, width: float = 1.0) -> TestFunction:
    """exp(-((x - center) / width) ** 2), truncated where it drops below 1e-16."""
    reach = 6.1 * width
    return TestFunction(
        eval=lambda x: np.exp(-(((x - center) / width) ** 2)),
        support=(center - reach, center + reach),
        label="gaussian" if (center, width) == (0.0, 1.0) else f"gaussian({center:g},{width:g})",
        tail_bound=math.exp(-((reach / width) ** 2)),
        tail_decay=8.0,
        panel_width=0.5 * width,
        analytic_ft=lambda y: (math.sqrt(math.pi) * width
                               * np.exp(-(width * np.asarray(y)) ** 2 / 4 - 1j * center * np.asarray(y))),
        catalog_id="gaussian",
        params={"holder": 1.0, "width": width},
    )


def fejer_kernel(z):
    """(1 - cos z) / (pi z^2), evaluated stably near the origin."""
    return _sinc(np.asarray(z, dtype=float) / 2) ** 2 / (2 * np.pi)


def fejer(r: float = 1.0, reach: float = 400.0) -> TestFunction:
    """Dilated Fejer kernel r F(r x); its transform is the triangle (1 - |y|/r)_+."""
    half = reach / r
    return TestFunction(
        eval=lambda x: r * fejer_kernel(r * x),
        support=(-half, half),
        label=f"fejer_{r:g}" if r != 1 else "fejer",
        tail_bound=2.0 / (math.pi * r * half * half),
        tail_decay=2.0,
        panel_width=4.0 / r,
        analytic_ft=lambda y: np.maximum(0.0, 1.0 - np.abs(np.asarray(y, dtype=float)) / r) + 0j,
        params={"r": r, "holder": 1.0},
    )


def _smoothstep(u):
    u = np.clip(u, 0.0, 1.0)
    return u ** 3 * (10 - 15 * u + 6 * u * u)


def mollified_indicator(a: float = 1.0, b: float = 2.0, ramp: float = 0.1) -> TestFunction:
    """C^2 bump equal to 1 on [a + ramp, b - ramp] and 0 off [a - ramp, b + ramp]."""
    w = 2 * ramp
    return TestFunction(
        eval=lambda x: _smoothstep((x - (a - ramp)) / w) * _smoothstep(((b + ramp) - x) / w),
        support=(a - ramp, b + ramp),
        label=f"mollified[{a:g},{b:g}]",
        breakpoints=(a - ramp, a + ramp, b - ramp, b + ramp),
        params={"holder": 1.0},
    )


def plateau(half_width: float = 1000.0, value: float = 1.0) -> TestFunction:
    """The constant ``value`` on [-half_width, half_width], zero outside."""
    f = indicator(-half_width, half_width)
    return f.scaled(value) if value != 1 else f


def constant(value: float = 1.0) -> TestFunction:
    return TestFunction(
        eval=lambda x: np.full(np.shape(x), float(value)),
        support=(-INF, INF),
        label=f"const{value:g}",
        lp=frozenset({INF}),
        catalog_id="constant",
        params={"holder": 1.0, "value": value},
    )


def zero() -> TestFunction:
    return TestFunction(
        eval=lambda x: np.zeros(np.shape(x)),
        support=(-1.0, 1.0),
        label="zero",
        analytic_ft=lambda y: np.zeros(np.shape(y), dtype=complex),
        catalog_id="constant",
        params={"holder": 1.0, "value": 0.0},
    )


def from_name(spec: str) -> TestFunction:
    """Build a catalog function from ``name`` or ``name:param``.

    >>> from_name("cusp:0.5").label
    'cusp_0.5'
    """
    name, _, arg = spec.strip().partition(":")
    name = name.strip().lower()
    args = [float(v) for v in arg.split(",") if v.strip()] if arg else []
    table = {
        "tent": tent,
        "indicator": indicator,
        "indicator01": lambda: indicator(0.0, 1.0),
        "indicator12": lambda: indicator(1.0, 2.0),
        "cusp": cusp,
        "origin_cusp": origin_cusp,
        "gaussian": gaussian,
        "fejer": fejer,
        "mollified": mollified_indicator,
        "mollified12": lambda: mollified_indicator(1.0, 2.0),
        "plateau": plateau,
        "zero": zero,
        "constant": constant,
        "const": constant,
    }
    if name.startswith("const") and name[5:]:
        args = [float(name[5:])] + args
        name = "const"
    if name.startswith("cusp_") and not args:
        args = [float(name[5:])]
        name = "cusp"
    if name not in table:
        raise ConfigError(f"unknown test function {spec!r}; choose from {sorted(table)}")
    try:
        return table[name](*args)
    except TypeError:
        raise ConfigError(f"bad parameters for test function {spec!r}") from None
