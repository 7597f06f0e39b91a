"""Right-hand sides of the pointwise, Lp and uniform error estimates.

For an operator with kernel ``phi`` and scaling ``a`` the Lp estimate reads

    c_p || H* f - approximant ||_p <= 2 int |phi| |a|^(1/p) w(1 / (|a| N)) dt
                                      + int w(|s| / N) / |s| M(s) ds,

    M(s) = int_{|t| >= T(s)} |phi(t)| |a(t)|^(1/p) dt,   T(s) = a^-1(1 / |s|),

with ``c_p = 1/2`` for p > 1 and ``c_p = 1`` for p = 1.  The uniform
estimate drops the |a|^(1/p) weights and carries ``c = pi``.

Both terms are evaluated with the t-integral outside.  Since |t| >= T(s)
is the same set as |s| <= 1 / |a(t)| the second term becomes

    2 int |phi(t)| |a(t)|^(1/p) D(1 / (|a(t)| N)) dt,   D(u) = int_0^u w(v) / v dv,

and ``D`` is tabulated once per modulus on a logarithmic grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_simpson

from .core import (
    DEFAULT_QUAD,
    QuadratureConfig,
    ScalingSpec,
    TestFunction,
    check_exponent,
    positive_root_inverse,
)
from .errors import ConfigError, DivergentIntegral, InvalidGrid, NonInvertibleScaling, OutOfRange
from .moduli import _vectorise
from .operators import HausdorffOperatorSpec, _t_points, kernel_integral
from .quadrature import integrate_many

DIVERGENT = math.inf

_TAIL_REGIONS = ("inner", "complement")


@dataclass(frozen=True)
class BoundReport:
    """Two-term bound; ``bound = total / normalizer`` bounds the error norm.

    Divergent terms are stored as ``inf``.
    """

    term1: float
    term2: float
    total: float
    normalizer: float
    N: float
    p: float
    cap: float | None = None
    tail_region: str = "inner"

    @property
    def bound(self) -> float:
        return self.total / self.normalizer

    @property
    def divergent(self) -> bool:
        return math.isinf(self.total)


def tail_set_lower_limit(a: ScalingSpec, s: float) -> float:
    """T(s) = a^-1(1/|s|): the tail of the t-integral is |t| >= T(s).

    The explicit inverse is checked against a bracketing root of |a(t)| = 1/|s|.
    """
    s = float(s)
    if s == 0 or not math.isfinite(s):
        raise OutOfRange(f"tail set needs a finite nonzero s, got {s}")
    u = 1.0 / abs(s)
    explicit = float(a.positive_inverse(np.array([u]))[0])
    root = positive_root_inverse(a, u)
    if not math.isfinite(explicit) or not math.isclose(explicit, root, rel_tol=1e-8):
        raise NonInvertibleScaling(
            f"{a.label}: inverse gives {explicit!r} at {u:g} but the root is {root!r}")
    return explicit


class ModulusTable:
    """A modulus sampled on a log grid with its Dini primitive D(u).

    Below the grid the modulus is extended as a power law fitted to the
    first decade, above it as a constant (moduli of bounded functions
    saturate).  The samples are clipped at ``cap`` and made nondecreasing.
    """

    def __init__(self, modulus, cap: float | None = None, *, lo: float = 1e-12,
                 hi: float = 1e12, per_decade: int = 32):
        decades = math.log10(hi / lo)
        n = int(round(decades * per_decade)) + 1
        self.w = np.linspace(math.log(lo), math.log(hi), n)
        v = np.exp(self.w)
        om = np.asarray(_vectorise(modulus)(v), dtype=float)
        if np.any(~np.isfinite(om)) or np.any(om < 0):
            raise ConfigError("modulus must be finite and nonnegative")
        if cap is not None:
            om = np.minimum(om, cap)
        self.omega_values = np.maximum.accumulate(om)
        self.lo, self.hi, self.cap = lo, hi, cap
        first = self.omega_values[0]
        if first > 0:
            ref = self.omega_values[per_decade]
            self.beta = math.log(ref / first) / math.log(v[per_decade] / v[0])
            head = first / self.beta if self.beta > 1e-3 else math.inf
        else:
            self.beta = math.inf
            head = 0.0
        self.head = head
        self.primitive = head + cumulative_simpson(self.omega_values, x=self.w, initial=0.0)

    @property
    def dini_finite(self) -> bool:
        return math.isfinite(self.head)

    def omega(self, u):
        u = np.asarray(u, dtype=float)
        with np.errstate(divide="ignore"):
            lw = np.log(np.maximum(u, 1e-300))
        out = _loglog_interp(lw, self.w, self.omega_values)
        low = u < self.lo
        if np.any(low):
            first = self.omega_values[0]
            out = np.where(low, first * (np.maximum(u, 0) / self.lo) ** min(self.beta, 50.0)
                           if first > 0 else 0.0, out)
        return np.where(u > 0, out, 0.0)

    def dini(self, u):
        """D(u) = int_0^u w(v) / v dv."""
        u = np.asarray(u, dtype=float)
        with np.errstate(divide="ignore"):
            lw = np.log(np.maximum(u, 1e-300))
        out = _loglog_interp(lw, self.w, self.primitive)
        high = u > self.hi
        if np.any(high):
            out = np.where(high, self.primitive[-1] + self.omega_values[-1] * (lw - self.w[-1]), out)
        low = u < self.lo
        if np.any(low):
            out = np.where(low, self.omega(u) / self.beta if self.dini_finite else math.inf, out)
        return np.where(u > 0, out, 0.0)

    def dini_complement(self, u):
        """int_u^inf w(v) / v dv, infinite unless the modulus vanishes at large scales."""
        u = np.asarray(u, dtype=float)
        if self.omega_values[-1] > 0:
            return np.full(u.shape, math.inf)
        return np.maximum(self.primitive[-1] - self.dini(u), 0.0)


def _loglog_interp(lw, grid, values):
    # Exact for power laws; falls back to linear where a sample is zero.
    lin = np.interp(lw, grid, values)
    positive = values > 0
    if not positive.any():
        return lin
    with np.errstate(divide="ignore"):
        logv = np.log(np.where(positive, values, 1.0))
    j = np.clip(np.searchsorted(grid, lw) - 1, 0, grid.size - 2)
    both = positive[j] & positive[j + 1]
    frac = (lw - grid[j]) / (grid[j + 1] - grid[j])
    geo = np.exp(logv[j] + frac * (logv[j + 1] - logv[j]))
    return np.where(both & (lw >= grid[0]) & (lw <= grid[-1]), geo, lin)


_TABLES: dict = {}


def _table(modulus, cap):
    if isinstance(modulus, ModulusTable):
        return modulus
    key = (id(modulus), cap)
    hit = _TABLES.get(key)
    if hit is not None and hit[0] is modulus:
        return hit[1]
    table = ModulusTable(modulus, cap)
    if len(_TABLES) > 64:
        _TABLES.clear()
    _TABLES[key] = (modulus, table)
    return table


def _kernel_term(op, integrand, q, what):
    try:
        val, _ = kernel_integral(op, lambda t, idx: integrand(t), 1, q=q, what=what)
    except DivergentIntegral:
        return DIVERGENT
    v = float(val[0])
    return v if math.isfinite(v) else DIVERGENT


def _two_terms(op, table, N, weight_power, q, tail_region, t_max=None):
    if tail_region not in _TAIL_REGIONS:
        raise ConfigError(f"tail_region must be one of {_TAIL_REGIONS}")
    a, phi = op.scaling, op.kernel

    def weight(t):
        return np.abs(phi(t)) * np.abs(a(t)) ** weight_power

    def scale(t):
        with np.errstate(divide="ignore"):
            return 1.0 / (np.abs(a(t)) * N)

    def cut(t, v):
        if t_max is not None:
            v = np.where(np.abs(t) <= t_max, v, 0.0)
        return np.where(weight(t) == 0, 0.0, v)

    term1 = 2 * _kernel_term(op, lambda t: cut(t, weight(t) * table.omega(scale(t))), q,
                             f"first bound term for {op.name}")
    inner = table.dini if tail_region == "inner" else table.dini_complement
    if tail_region == "complement" and table.omega_values[-1] > 0:
        term2 = DIVERGENT
    elif tail_region == "inner" and not table.dini_finite:
        term2 = DIVERGENT
    else:
        term2 = 2 * _kernel_term(op, lambda t: cut(t, weight(t) * inner(scale(t))), q,
                                 f"second bound term for {op.name}")
    return term1, term2


def _check_N(N):
    N = float(N)
    if not N > 0 or not math.isfinite(N):
        raise InvalidGrid(f"N must be positive and finite, got {N}")
    return N


def theorem1_rhs(op: HausdorffOperatorSpec, modulus, N: float, p, q: QuadratureConfig = DEFAULT_QUAD,
                 *, cap: float | None = None, tail_region: str = "inner") -> BoundReport:
    """Lp bound for ``1 <= p < inf``.

    ``modulus`` maps delta to the Lp modulus of f (see
    :func:`hausdorff_approx.moduli.modulus_function`); ``cap`` clips it,
    normally at ``2 ||f||_p``.  ``tail_region='complement'`` evaluates the
    second term over |t| <= T(s) instead.
    """
    p = check_exponent(p)
    if math.isinf(p):
        raise ConfigError("theorem1_rhs needs a finite exponent; use theorem2_rhs for p = inf")
    N = _check_N(N)
    table = _table(modulus, cap)
    t1, t2 = _two_terms(op, table, N, 1.0 / p, q, tail_region)
    return BoundReport(t1, t2, t1 + t2, 0.5 if p > 1 else 1.0, N, p, cap, tail_region)


def theorem2_rhs(op: HausdorffOperatorSpec, modulus, N: float, q: QuadratureConfig = DEFAULT_QUAD,
                 *, cap: float | None = None, tail_region: str = "inner") -> BoundReport:
    """Uniform bound, normalised by pi."""
    N = _check_N(N)
    table = _table(modulus, cap)
    t1, t2 = _two_terms(op, table, N, 0.0, q, tail_region)
    return BoundReport(t1, t2, t1 + t2, math.pi, N, math.inf, cap, tail_region)


def truncated_second_term(op: HausdorffOperatorSpec, modulus, N: float, S: float,
                          q: QuadratureConfig = DEFAULT_QUAD, *, p=math.inf,
                          cap: float | None = None) -> float:
    """Second uniform (or Lp) bound term with both |s| and |t| cut at ``S``.

    On the tail set |s| <= |t|, so cutting t at S also cuts s; the value is
    finite whenever the modulus satisfies the Dini condition at 0.
    """
    N = _check_N(N)
    p = check_exponent(p)
    table = _table(modulus, cap)
    if not table.dini_finite:
        return DIVERGENT
    _, t2 = _two_terms(op, table, N, 0.0 if math.isinf(p) else 1.0 / p, q, "inner", t_max=float(S))
    return t2


# ---------------------------------------------------------------------------
# Pointwise estimates


def _difference_integral(f: TestFunction, c, h, region, weighted, q):
    """int |f(c - h sig) - f(c)| w(sig) d sig per component.

    ``region`` is ``'inner'`` (|sig| <= 1) or ``'outer'`` (|sig| >= 1);
    ``w`` is 1 or 1/|sig|.
    """
    c = np.asarray(c, dtype=float)
    h = np.asarray(h, dtype=float)
    fc = f.eval(c)
    sing = np.asarray(f.singular_points(), dtype=float)
    if sing.size:
        with np.errstate(divide="ignore", invalid="ignore"):
            pts = (c[:, None] - sing[None, :]) / h[:, None]
        pts = np.concatenate([pts, np.zeros((c.size, 1))], axis=1)
    else:
        pts = np.zeros((c.size, 1))

    def integrand(sig, idx):
        d = np.abs(f.eval(c[idx] - h[idx] * sig) - fc[idx])
        if weighted:
            with np.errstate(divide="ignore", invalid="ignore"):
                d = np.where(sig == 0, 0.0, d / np.abs(sig))
        return d

    tol = dict(abs_tol=q.abs_tol * 1e-1, rel_tol=q.rel_tol, max_intervals=q.max_subdivisions)
    if region == "inner":
        res = integrate_many(integrand, np.full(c.size, -1.0), np.ones(c.size), points=pts, **tol)
        return res.value
    if weighted and _vanishes_at_infinity(f) and np.any(fc != 0):
        # |f(c)| / |sig| survives at large |sig|: logarithmic divergence.
        return np.where(fc != 0, math.inf, 0.0) + _outer(integrand, c.size, pts, tol, fc == 0)
    return _outer(integrand, c.size, pts, tol, np.ones(c.size, dtype=bool))


def _vanishes_at_infinity(f):
    return all(math.isfinite(b) for b in f.support)


def _outer(integrand, size, pts, tol, mask):
    out = np.zeros(size)
    idx = np.nonzero(mask)[0]
    if idx.size == 0:
        return out
    sub = pts[idx]

    def wrapped(sig, j):
        return integrand(sig, idx[j])

    right = integrate_many(wrapped, np.ones(idx.size), np.full(idx.size, math.inf), points=sub, **tol)
    left = integrate_many(wrapped, np.full(idx.size, -math.inf), -np.ones(idx.size), points=sub, **tol)
    out[idx] = right.value + left.value
    return out


def _pointwise(op, f, N, x, q, *, forward, tail_region):
    N = _check_N(N)
    if tail_region not in _TAIL_REGIONS:
        raise ConfigError(f"tail_region must be one of {_TAIL_REGIONS}")
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    a, phi = op.scaling, op.kernel
    sing = np.asarray([b for b in f.singular_points() if b != 0] or [np.nan], dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = (sing[None, :] / xs[:, None]) if forward else (xs[:, None] / sing[None, :])
    pts = _t_points(op, ratios)
    # The adjoint estimate keeps its tail on the inner region by default; the forward estimate's
    # tail is the complement of its inner region.
    outer = forward or tail_region == "complement"

    def integrand(t, idx):
        at = a(t)
        w = np.abs(phi(t))
        with np.errstate(divide="ignore", invalid="ignore"):
            if forward:
                c = at * xs[idx]
                h = np.abs(at) / N
                w = w * np.abs(at)
            else:
                c = xs[idx] / at
                h = 1.0 / (np.abs(at) * N)
        live = (w != 0) & np.isfinite(c) & (h > 0)
        out = np.zeros(t.shape)
        if live.any():
            cl, hl = c[live], h[live]
            first = _difference_integral(f, cl, hl, "inner", False, q)
            second = _difference_integral(f, cl, hl, "outer" if outer else "inner", True, q)
            out[live] = w[live] * (first + second)
        return out

    outer_diverges = outer and _vanishes_at_infinity(f)
    if outer_diverges:
        # Divergent wherever f(c(t)) != 0 on a set of positive t-measure;
        # probe a t-grid before integrating.
        probe = _probe_nonzero(op, f, xs, forward)
        if probe.all():
            return np.full(xs.size, math.inf) if np.ndim(x) else math.inf
    try:
        val, _ = kernel_integral(op, integrand, xs.size, points=pts, q=q, check_divergence=False,
                                 what=f"pointwise bound for {op.name}")
    except DivergentIntegral:
        val = np.full(xs.size, math.inf)
    if outer_diverges:
        val = np.where(probe, math.inf, val)
    val = val / math.pi
    return float(val[0]) if np.ndim(x) == 0 else val


def _probe_nonzero(op, f, xs, forward):
    hit = np.zeros(xs.size, dtype=bool)
    for lo, hi in op.support_parts():
        lo_f = lo if math.isfinite(lo) else math.copysign(1e6, lo)
        hi_f = hi if math.isfinite(hi) else math.copysign(1e6, hi)
        t = np.linspace(lo_f, hi_f, 203)[1:-1]
        t = t[np.abs(op.kernel(t)) > 0]
        if t.size == 0:
            continue
        at = op.scaling(t)
        with np.errstate(divide="ignore", invalid="ignore"):
            c = at[None, :] * xs[:, None] if forward else xs[:, None] / at[None, :]
        vals = np.where(np.isfinite(c), f.eval(np.where(np.isfinite(c), c, 0.0)), 0.0)
        hit |= np.count_nonzero(vals, axis=1) >= 2
    return hit


def lemma1_pointwise_rhs(op: HausdorffOperatorSpec, f: TestFunction, N: float, x,
                         q: QuadratureConfig = DEFAULT_QUAD, *, tail_region: str = "inner"):
    """Pointwise bound on |H* f(x) - approximant(x)| from the actual differences of f.

    Both integrals are written with s = sig / (|a(t)| N); by default the tail
    integral also runs over |s| <= 1/|a(t)|.  ``tail_region='complement'``
    uses |s| >= 1/|a(t)| instead, which is infinite unless f vanishes along
    x / a(t).  Returns a float, or an array for array ``x``.
    """
    return _pointwise(op, f, N, x, q, forward=False, tail_region=tail_region)


def lemma2_pointwise_rhs(op: HausdorffOperatorSpec, f: TestFunction, N: float, x,
                         q: QuadratureConfig = DEFAULT_QUAD):
    """Pointwise bound on |H f(x) - adjoint-variant approximant(x)|.

    The inner integral runs over |s| <= |a(t)| and the tail over the rest;
    the tail is infinite unless f vanishes along a(t) x.
    """
    return _pointwise(op, f, N, x, q, forward=True, tail_region="complement")
