"""Generalised Hausdorff operators, their adjoints and classical closed forms.

For a kernel ``phi`` and an odd decreasing scaling ``a``

    H f(x)  = int phi(t) |a(t)| f(a(t) x) dt
    H* f(x) = int phi(t) f(x / a(t)) dt

and the two are adjoint with respect to the L2 pairing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import special

from .core import (
    DEFAULT_QUAD,
    KernelSpec,
    QuadratureConfig,
    ScalingSpec,
    TestFunction,
    validate_scaling,
)
from .errors import (
    ConfigError,
    InvalidAlpha,
    TailNotIntegrable,
    ZeroArgument,
)
from .quadrature import endpoint_divergence, integrate_many, raise_if_divergent

# Truncation points used to probe kernel-side divergence at 0 and infinity.
_DIVERGENCE_FACTOR = 1e-4
_DIVERGENCE_LEVELS = 4


def reciprocal_scaling() -> ScalingSpec:
    """a(t) = 1/t, its own inverse."""
    return ScalingSpec(positive=lambda t: 1.0 / t, positive_inverse=lambda u: 1.0 / u,
                       label="1/t")


def power_scaling(k: float) -> ScalingSpec:
    """a(t) = t ** -k for t > 0, extended oddly."""
    if not k > 0:
        raise ConfigError("power scaling needs a positive exponent")
    return ScalingSpec(positive=lambda t: t ** -k, positive_inverse=lambda u: u ** (-1.0 / k),
                       label=f"t^-{k:g}")


@dataclass(frozen=True, eq=False)
class HausdorffOperatorSpec:
    kernel: KernelSpec
    scaling: ScalingSpec
    name: str

    def __post_init__(self):
        validate_scaling(self.scaling)
        lo, hi = self.kernel.support
        if not lo < hi:
            raise ConfigError(f"{self.name}: kernel support must be a non-empty interval")
        if (math.isinf(lo) or math.isinf(hi)) and self.kernel.decay_class == "none":
            raise TailNotIntegrable(f"{self.name}: unbounded kernel support without decay")

    def support_parts(self) -> list[tuple[float, float]]:
        """Kernel support split at the origin."""
        lo, hi = self.kernel.support
        if lo < 0 < hi:
            return [(lo, 0.0), (0.0, hi)]
        return [(lo, hi)]

    def t_breakpoints(self) -> tuple[float, ...]:
        return tuple(self.kernel.breakpoints)


@dataclass(frozen=True, eq=False)
class OperatorCatalogEntry:
    spec: HausdorffOperatorSpec
    closed_form_adjoint: Callable | None = None


def classical_operator(kernel_phi: KernelSpec, name: str | None = None) -> HausdorffOperatorSpec:
    """Operator with kernel ``kernel_phi`` and scaling 1/t."""
    return HausdorffOperatorSpec(kernel=kernel_phi, scaling=reciprocal_scaling(),
                                 name=name or f"classical[{kernel_phi.label}]")


def cesaro() -> HausdorffOperatorSpec:
    k = KernelSpec(eval=lambda t: ((t > 0) & (t < 1)).astype(float), support=(0.0, 1.0),
                   label="chi(0,1)", total_mass=1.0)
    return classical_operator(k, "cesaro")


def bellman() -> HausdorffOperatorSpec:
    def phi(t):
        with np.errstate(divide="ignore"):
            return np.where(t > 1, 1.0 / np.where(t > 1, t, 1.0), 0.0)

    k = KernelSpec(eval=phi, support=(1.0, math.inf), label="t^-1 chi(1,inf)",
                   decay_class="power", decay_power=1.0, total_mass=math.inf)
    return classical_operator(k, "bellman")


def riemann_liouville(alpha: float) -> HausdorffOperatorSpec:
    alpha = float(alpha)
    if not alpha > 0:
        raise InvalidAlpha(f"Riemann-Liouville order must be positive, got {alpha}")
    k = KernelSpec(eval=lambda t: np.where((t > 0) & (t < 1), np.abs(1.0 - t) ** alpha, 0.0),
                   support=(0.0, 1.0), label=f"(1-t)^{alpha:g}", total_mass=1.0 / (alpha + 1))
    return classical_operator(k, f"riemann_liouville_{alpha:g}")


# ---------------------------------------------------------------------------
# Kernel-side integration


def _divergence_ends(part):
    lo, hi = part
    ends = []
    if lo == 0 or math.isinf(lo):
        ends.append(lo if lo != 0 else 0.0)
    if hi == 0 or math.isinf(hi):
        ends.append(hi)
    return ends


def _cuts(part, end):
    lo, hi = part
    f = _DIVERGENCE_FACTOR
    if math.isinf(end):
        inner = hi if math.isinf(lo) else lo
        start = 100.0 * max(1.0, abs(inner))
        s = 1.0 if end > 0 else -1.0
        return [s * start / f ** k for k in range(_DIVERGENCE_LEVELS)]
    other = hi if end == lo else lo
    start = min(1e-2, abs(other) / 10) if math.isfinite(other) else 1e-2
    s = 1.0 if other > end else -1.0
    return [end + s * start * f ** k for k in range(_DIVERGENCE_LEVELS)]


def kernel_integral(op: HausdorffOperatorSpec, integrand, size: int, *, points=None,
                    q: QuadratureConfig = DEFAULT_QUAD, check_divergence: bool = True,
                    what: str = "kernel integral"):
    """Integrate ``integrand(t, idx)`` over the kernel support for each component.

    Divergence at t -> 0 and |t| -> inf is detected from the growth of
    truncated integrals and raised as :class:`DivergentIntegral`.
    Returns ``(values, error_estimates)``.
    """
    total = None
    err = np.zeros(size)
    for part in op.support_parts():
        if check_divergence:
            for end in _divergence_ends(part):
                cuts = _cuts(part, end)

                def piece(c0, c1):
                    r = integrate_many(integrand, c0, c1, size=size, abs_tol=q.abs_tol,
                                       rel_tol=q.rel_tol, max_intervals=q.max_subdivisions)
                    return r.value

                mask = endpoint_divergence(piece, cuts, abs_tol=max(q.abs_tol, 1e-12))
                raise_if_divergent(mask, "t=0" if end == 0 else f"t={end}", what)
        res = integrate_many(integrand, part[0], part[1], size=size, points=points,
                             abs_tol=q.abs_tol, rel_tol=q.rel_tol,
                             max_intervals=q.max_subdivisions)
        total = res.value if total is None else total + res.value
        err = err + res.error
    return total, err


def _t_points(op, ratio_values):
    """t with a(t) equal to each given ratio (NaN where no such t exists)."""
    with np.errstate(all="ignore"):
        t = op.scaling.inverse(ratio_values)
    t = np.where(np.isfinite(t), t, np.nan)
    extra = np.asarray(op.t_breakpoints(), dtype=float)
    if extra.size:
        t = np.concatenate([t, np.broadcast_to(extra, t.shape[:-1] + extra.shape)], axis=-1)
    return t


def hausdorff_apply(op: HausdorffOperatorSpec, f: TestFunction, x, q: QuadratureConfig = DEFAULT_QUAD,
                    *, check_divergence: bool = True):
    """H f at ``x`` (scalar or array)."""
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    sing = np.asarray(f.singular_points() or [np.nan], dtype=float)
    sing = sing[sing != 0] if np.any(sing != 0) else np.array([np.nan])
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = sing[None, :] / xs[:, None]
    pts = _t_points(op, ratios)
    a, phi = op.scaling, op.kernel

    def integrand(t, idx):
        at = a(t)
        with np.errstate(invalid="ignore"):
            v = phi(t) * np.abs(at) * f.eval(at * xs[idx])
        return np.where(phi(t) == 0, 0.0, v)

    val, _ = kernel_integral(op, integrand, xs.size, points=pts, q=q,
                             check_divergence=check_divergence, what=f"H f for {op.name}")
    return float(val[0]) if np.ndim(x) == 0 else val


def adjoint_apply(op: HausdorffOperatorSpec, f: TestFunction, x, q: QuadratureConfig = DEFAULT_QUAD,
                  *, check_divergence: bool = True):
    """H* f at ``x`` (scalar or array)."""
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    sing = np.asarray([b for b in f.singular_points() if b != 0] or [np.nan], dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = xs[:, None] / sing[None, :]
    pts = _t_points(op, ratios)
    a, phi = op.scaling, op.kernel

    def integrand(t, idx):
        with np.errstate(divide="ignore", invalid="ignore"):
            v = phi(t) * f.eval(xs[idx] / a(t))
        return np.where(phi(t) == 0, 0.0, v)

    val, _ = kernel_integral(op, integrand, xs.size, points=pts, q=q,
                             check_divergence=check_divergence, what=f"H* f for {op.name}")
    return float(val[0]) if np.ndim(x) == 0 else val


# ---------------------------------------------------------------------------
# Closed forms


def _plain_integral(func, lo, hi, pts, q, size=1):
    res = integrate_many(lambda s, i: func(s), lo, hi, size=size,
                         points=np.asarray([sorted(pts)] if pts else [[np.nan]]),
                         abs_tol=q.abs_tol * 1e-2, rel_tol=q.rel_tol * 1e-2,
                         max_intervals=q.max_subdivisions)
    return float(res.value[0])


def _continuous_at_zero(f: TestFunction) -> bool:
    if not f.continuous and 0.0 in f.breakpoints:
        return False
    v = f.eval(np.array([-1e-9, 0.0, 1e-9]))
    return bool(np.all(np.abs(v - v[1]) <= 1e-6 * max(1.0, abs(v[1]))))


def _zero_limit(f, factor, return_flag):
    if not _continuous_at_zero(f):
        raise ZeroArgument("x = 0 and f is not continuous at 0")
    val = factor * float(f.eval(np.array([0.0]))[0])
    return (val, True) if return_flag else val


def cesaro_closed_form(f: TestFunction, x: float, q: QuadratureConfig = DEFAULT_QUAD,
                       *, return_flag: bool = False):
    """(1/x) int_0^x f; at x = 0 the continuous limit f(0).

    With ``return_flag`` the result is ``(value, is_limit)``.
    """
    x = float(x)
    if x == 0:
        return _zero_limit(f, 1.0, return_flag)
    lo, hi = min(0.0, x), max(0.0, x)
    val = _plain_integral(f.eval, lo, hi, [b for b in f.singular_points() if lo < b < hi], q) / abs(x)
    return (val, False) if return_flag else val


def bellman_closed_form(f: TestFunction, x: float, q: QuadratureConfig = DEFAULT_QUAD) -> float:
    """int_x^inf f(u)/u du for x > 0."""
    x = float(x)
    if x == 0:
        raise ZeroArgument("the Bellman operator has no value at x = 0")
    if x < 0:
        g = TestFunction(eval=lambda s: f.eval(-s), support=(-f.support[1], -f.support[0]),
                         label=f.label, breakpoints=tuple(-b for b in f.breakpoints),
                         tail_bound=f.tail_bound, tail_decay=f.tail_decay)
        return bellman_closed_form(g, -x, q)
    hi = f.support[1]
    if hi <= x:
        return 0.0
    if math.isinf(hi) and f.tail_bound == 0 and f.catalog_id == "constant":
        if float(f.eval(np.array([x]))[0]) == 0:
            return 0.0
        raise TailNotIntegrable("f(u)/u is not integrable at infinity")
    lo = max(x, f.support[0])
    pts = [b for b in f.singular_points() if lo < b < hi]
    # For non-compact f the neglected tail is at most tail_bound / tail_decay.
    return _plain_integral(lambda u: f.eval(u) / u, lo, hi, pts, q)


def riemann_liouville_closed_form(f: TestFunction, alpha: float, x: float,
                                  q: QuadratureConfig = DEFAULT_QUAD, *, return_flag: bool = False):
    """int_0^1 f(t x) (1 - t)^alpha dt, computed in the variable u = t x."""
    alpha = float(alpha)
    if not alpha > 0:
        raise InvalidAlpha(f"Riemann-Liouville order must be positive, got {alpha}")
    x = float(x)
    if x == 0:
        return _zero_limit(f, 1.0 / (alpha + 1), return_flag)
    lo, hi = min(0.0, x), max(0.0, x)
    pts = [b for b in f.singular_points() if lo < b < hi]
    val = _plain_integral(lambda u: f.eval(u) * np.abs(1.0 - u / x) ** alpha, lo, hi, pts, q) / abs(x)
    return (val, False) if return_flag else val


def riemann_liouville_rescaled(f: TestFunction, alpha: float, x: float,
                               q: QuadratureConfig = DEFAULT_QUAD) -> float:
    """Gamma(alpha) x^(-alpha-1) I(x) with I(x) = (1/Gamma(alpha)) int_0^x (x-t)^alpha f(t) dt.

    This is the fractional-integral rescaling of the closed form above; for
    x > 0 the two agree.  Note the weight exponent is alpha, not alpha - 1.
    """
    x = float(x)
    if not x > 0:
        raise ZeroArgument("the rescaled form needs x > 0")
    pts = [b for b in f.singular_points() if 0 < b < x]
    frac = _plain_integral(lambda t: (x - t) ** alpha * f.eval(t), 0.0, x, pts, q) / special.gamma(alpha)
    return special.gamma(alpha) * x ** (-alpha - 1) * frac


def duality_gap(op: HausdorffOperatorSpec, f: TestFunction, g: TestFunction,
                q: QuadratureConfig = DEFAULT_QUAD) -> float:
    """|<H f, g> - <f, H* g>| with both pairings computed by nested quadrature."""
    inner_q = QuadratureConfig(abs_tol=q.abs_tol * 1e-2, rel_tol=q.rel_tol * 1e-2,
                               max_subdivisions=q.max_subdivisions)

    def pairing(apply, u, w):
        lo, hi = w.support
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise TailNotIntegrable("pairing needs a compactly supported weight")
        pts = sorted({0.0, *w.singular_points()} - {lo, hi})
        res = integrate_many(lambda s, i: apply(op, u, s, inner_q, check_divergence=False) * w.eval(s),
                             lo, hi, size=1, points=np.asarray([pts or [np.nan]]),
                             abs_tol=q.abs_tol * 1e-1, rel_tol=q.rel_tol * 1e-1,
                             max_intervals=q.max_subdivisions)
        return float(res.value[0])

    return abs(pairing(hausdorff_apply, f, g) - pairing(adjoint_apply, g, f))


def catalog() -> dict[str, OperatorCatalogEntry]:
    return {
        "cesaro": OperatorCatalogEntry(cesaro(), cesaro_closed_form),
        "bellman": OperatorCatalogEntry(bellman(), bellman_closed_form),
        "riemann_liouville": OperatorCatalogEntry(
            riemann_liouville(1.0), lambda f, x, q=DEFAULT_QUAD: riemann_liouville_closed_form(f, 1.0, x, q)),
    }


def from_name(name: str, alpha: float = 1.0) -> HausdorffOperatorSpec:
    key = name.strip().lower().replace("-", "_")
    if key in ("cesaro", "hardy"):
        return cesaro()
    if key == "bellman":
        return bellman()
    if key in ("riemann_liouville", "rl"):
        return riemann_liouville(alpha)
    raise ConfigError(f"unknown operator {name!r}; choose cesaro, bellman or riemann_liouville")
