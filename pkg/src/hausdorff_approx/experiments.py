"""Convergence studies: truncated-Fourier approximants, Fejér means, recovery."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .bounds import theorem1_rhs, theorem2_rhs, truncated_second_term
from .core import DEFAULT_QUAD, GridSpec, QuadratureConfig, TestFunction, check_exponent, grid_lp_norm
from .errors import ConfigError, DegenerateZeroError, InvalidGrid, RateFitFailure, TailNotIntegrable
from .fourier import adjoint_variant_approximant, function_recovery, truncated_approximant
from .functions import fejer_kernel
from .moduli import modulus_function, trivial_cap
from .operators import HausdorffOperatorSpec, adjoint_apply, bellman, hausdorff_apply
from .quadrature import integrate_many

NUMERICAL_FLOOR = 1e-12
DEFAULT_N_LADDER = (8, 16, 32, 64, 128, 256)


@dataclass
class RateReport:
    operator_name: str
    f_label: str
    p: float
    n_ladder: list
    errors: list
    fitted_slope: float
    predicted_slope: float
    bound_values: list
    log_corrected_ratio: list | None = None
    intercept: float = math.nan
    r_squared: float = math.nan
    ladder_name: str = "N"
    target: str = "adjoint"
    budget: list = field(default_factory=list)

    def __post_init__(self):
        n = len(self.n_ladder)
        if len(self.errors) != n or len(self.bound_values) != n:
            raise ConfigError("errors and bounds need one entry per ladder point")
        if n > 1 and np.any(np.diff(np.asarray(self.n_ladder, dtype=float)) <= 0):
            raise InvalidGrid("ladder must be strictly increasing")


def fit_rate(n_ladder, errors, *, floor: float = NUMERICAL_FLOOR):
    """Least-squares line through (log N, log error): ``(slope, intercept, r_squared)``."""
    n = np.asarray(n_ladder, dtype=float)
    e = np.asarray(errors, dtype=float)
    if n.size != e.size or n.size < 3:
        raise RateFitFailure("a rate fit needs at least three (N, error) pairs")
    if np.any(n <= 0):
        raise RateFitFailure("ladder values must be positive")
    if np.any(~np.isfinite(e)):
        raise RateFitFailure("errors must be finite")
    if np.any(e <= floor):
        raise DegenerateZeroError(f"errors at or below the numerical floor {floor:g}; no rate to fit")
    x, y = np.log(n), np.log(e)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2


def _ladder(values, role) -> np.ndarray:
    grid = values if isinstance(values, GridSpec) else GridSpec(tuple(float(v) for v in values), role)
    if grid.role != role:
        grid = GridSpec(grid.points, role)
    return grid.array


def _thread_count(tasks: int) -> int:
    env = os.environ.get("HAUS_THREADS")
    cap = int(env) if env and env.strip().isdigit() and int(env) > 0 else (os.cpu_count() or 1)
    return max(1, min(cap, tasks))


def _map(func, items):
    """Apply ``func`` to each item, in parallel up to HAUS_THREADS, keeping order."""
    items = list(items)
    workers = _thread_count(len(items))
    if workers == 1:
        return [func(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


def study_grid(f: TestFunction, n_max: float, *, window: float | None = None, base: int = 81,
               extra_points=()) -> np.ndarray:
    """Fixed x-grid for error norms on [-W, W], W = 4 * radius by default.

    A uniform backbone is refined geometrically around 0 and the singular
    points of f down to the scale 1 / (4 n_max), where the approximation
    errors concentrate.
    """
    W = 4.0 * f.radius if window is None else float(window)
    if not W > 0 or not math.isfinite(W):
        raise InvalidGrid("study window must be positive and finite")
    pts = set(np.linspace(-W, W, base).tolist())
    spacing = 2 * W / (base - 1)
    centres = {0.0, *[b for b in f.singular_points() if abs(b) < W], *extra_points}
    h = 1.0 / (4 * n_max)
    offsets = []
    while h < spacing:
        offsets.append(h)
        h *= 2
    for c in centres:
        pts.add(c)
        for o in offsets:
            for v in (c - o, c + o):
                if -W <= v <= W:
                    pts.add(v)
    return np.asarray(sorted(round(v, 15) for v in pts))


def _fit_tail(ladder, values):
    """Fit on the ladder without its first (pre-asymptotic) point."""
    if len(ladder) >= 4:
        return fit_rate(ladder[1:], values[1:])
    return fit_rate(ladder, values)


def _predicted(ladder, bounds):
    b = np.asarray(bounds, dtype=float)
    if np.all(np.isfinite(b)) and np.all(b > 0):
        try:
            return _fit_tail(ladder, b)[0]
        except (RateFitFailure, DegenerateZeroError):
            return math.nan
    return math.nan


def _log_ratio(ladder, errors):
    n = np.asarray(ladder, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return (np.asarray(errors) * n / np.log(n)).tolist()


def _finish(report: RateReport) -> RateReport:
    try:
        slope, icpt, r2 = _fit_tail(report.n_ladder, report.errors)
    except DegenerateZeroError as exc:
        raise DegenerateZeroError(str(exc), report=report) from None
    report.fitted_slope, report.intercept, report.r_squared = slope, icpt, r2
    return report


def error_table(op: HausdorffOperatorSpec, f: TestFunction, n_ladder, ps=(math.inf,),
                q: QuadratureConfig = DEFAULT_QUAD, *, target: str = "adjoint", x_grid=None) -> dict:
    """Approximation errors for several exponents from one set of evaluations.

    Returns a dict with the grid (``x``), the reference values, the
    approximant values per N, ``errors`` mapping each p to its error list
    and ``budget`` (per-N tail error estimates).
    """
    if target not in ("adjoint", "forward"):
        raise ConfigError("target must be 'adjoint' or 'forward'")
    ps = [check_exponent(p) for p in ps]
    ladder = _ladder(n_ladder, "N")
    xs = study_grid(f, ladder[-1]) if x_grid is None else _ladder(x_grid, "x")
    if target == "adjoint":
        reference = adjoint_apply(op, f, xs, q)
        build = truncated_approximant
    else:
        reference = hausdorff_apply(op, f, xs, q)
        build = adjoint_variant_approximant

    def run(N):
        res = build(op, f, N, xs, q)
        return res.values, float(np.max(res.diagnostics["tail_error_estimate"]))

    results = _map(run, ladder)
    values = [v for v, _ in results]
    errors = {p: [grid_lp_norm(xs, np.abs(v - reference), p) for v in values] for p in ps}
    return {"x": xs, "reference": reference, "values": values, "errors": errors,
            "budget": [tail for _, tail in results]}


def convergence_study(op: HausdorffOperatorSpec, f: TestFunction, target: str = "adjoint", p=math.inf,
                      n_ladder=DEFAULT_N_LADDER, q: QuadratureConfig = DEFAULT_QUAD, *,
                      x_grid=None, with_bounds: bool = True) -> RateReport:
    """Errors of the truncated-Fourier approximants along an N-ladder.

    ``target='adjoint'`` compares :func:`truncated_approximant` with H* f,
    ``target='forward'`` compares :func:`adjoint_variant_approximant` with
    H f.  Norms are taken on a fixed x-grid (trapezoid rule, max for p=inf).
    Bounds are the normalised right-hand sides with the modulus capped at
    2 ||f||_p; the forward target has no such bound and reports NaN.
    """
    if target not in ("adjoint", "forward"):
        raise ConfigError("target must be 'adjoint' or 'forward'")
    p = check_exponent(p)
    ladder = _ladder(n_ladder, "N")
    if ladder.size < 4:
        raise InvalidGrid("a convergence study needs at least four ladder entries")
    table = error_table(op, f, ladder, (p,), q, target=target, x_grid=x_grid)
    errors = table["errors"][p]
    budget = table["budget"]
    if target == "adjoint" and with_bounds and f.catalog_id != "constant":
        bounds = _bound_ladder(op, f, p, ladder, q)
    else:
        bounds = [math.nan] * ladder.size
    report = RateReport(op.name, f.label, p, ladder.tolist(), errors, math.nan,
                        _predicted(ladder, bounds), bounds, _log_ratio(ladder, errors),
                        target=target, budget=budget)
    return _finish(report)


def _bound_ladder(op, f, p, ladder, q):
    cap = trivial_cap(f, p, q)
    omega = modulus_function(f, p, q=q, cap=cap)
    if math.isinf(p):
        return [theorem2_rhs(op, omega, N, q, cap=cap).bound for N in ladder]
    return [theorem1_rhs(op, omega, N, p, q, cap=cap).bound for N in ladder]


# ---------------------------------------------------------------------------
# Fejér means


def fejer_convolution(f: TestFunction, r: float, x, q: QuadratureConfig = DEFAULT_QUAD):
    """(F_r * f)(x) with F_r(z) = r F(r z) the Fejér kernel on the line."""
    r = float(r)
    if not r > 0 or not math.isfinite(r):
        raise InvalidGrid("Fejér parameter must be positive")
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if f.catalog_id == "constant":
        val = float(f.eval(np.zeros(1))[0])
        out = np.full(xs.size, val)
        return float(out[0]) if np.ndim(x) == 0 else out
    lo, hi = f.support
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise TailNotIntegrable(f"{f.label}: Fejér means need a bounded effective support")
    sing = np.asarray(f.singular_points(), dtype=float)
    pts = np.concatenate([np.broadcast_to(sing, (xs.size, sing.size)), xs[:, None]], axis=1)

    def integrand(y, idx):
        return r * fejer_kernel(r * (xs[idx] - y)) * f.eval(y)

    res = integrate_many(integrand, np.full(xs.size, lo), np.full(xs.size, hi), points=pts,
                         abs_tol=q.abs_tol, rel_tol=q.rel_tol,
                         max_intervals=max(q.max_subdivisions, int(4 * r * (hi - lo)) + 100))
    return float(res.value[0]) if np.ndim(x) == 0 else res.value


def fejer_modulus_bound(modulus, r: float, q: QuadratureConfig = DEFAULT_QUAD, *,
                        cap: float | None = None) -> float:
    """int F_r(y) w(|y|) dy, the Minkowski bound for ||F_r * f - f||.

    The integral runs to |z| = Z in z = r y; beyond, the non-oscillating part
    of (1 - cos z) / (pi z^2) is added with the modulus frozen at its cap.
    """
    r = float(r)
    Z = 2000.0 * math.pi
    lim = cap if cap is not None else None

    def w(d):
        v = np.asarray(modulus(d), dtype=float)
        return np.minimum(v, lim) if lim is not None else v

    pts = np.array([[2 * math.pi * k for k in range(1, 64)] + [r]])
    res = integrate_many(lambda z, i: 2 * fejer_kernel(z) * w(z / r), 0.0, Z, size=1, points=pts,
                         abs_tol=q.abs_tol * 1e-2, rel_tol=q.rel_tol * 1e-2, max_intervals=20000)
    top = float(w(np.array([Z / r]))[0]) if lim is None else lim
    return float(res.value[0]) + 2 * top / (math.pi * Z)


def approximate_identity_study(f: TestFunction, p=math.inf, r_ladder=DEFAULT_N_LADDER,
                               q: QuadratureConfig = DEFAULT_QUAD, *, x_grid=None) -> RateReport:
    """Errors ||F_r * f - f||_p along an r-ladder, with the Minkowski bound
    and the ratio error * r / log r."""
    p = check_exponent(p)
    ladder = _ladder(r_ladder, "r")
    if ladder.size < 4:
        raise InvalidGrid("a study needs at least four ladder entries")
    xs = study_grid(f, ladder[-1]) if x_grid is None else _ladder(x_grid, "x")
    reference = f.eval(xs)
    values = _map(lambda r: fejer_convolution(f, r, xs, q), ladder)
    errors = [grid_lp_norm(xs, np.abs(v - reference), p) for v in values]
    if f.catalog_id == "constant":
        bounds = [0.0] * ladder.size
    else:
        cap = trivial_cap(f, p, q)
        omega = modulus_function(f, p, q=q, cap=cap)
        bounds = [fejer_modulus_bound(omega, r, q, cap=cap) for r in ladder]
    report = RateReport("fejer", f.label, p, ladder.tolist(), errors, math.nan,
                        _predicted(ladder, bounds), bounds, _log_ratio(ladder, errors),
                        ladder_name="r", target="identity")
    return _finish(report)


# ---------------------------------------------------------------------------


def bellman_divergence_demo(S_ladder, modulus, q: QuadratureConfig = DEFAULT_QUAD, *,
                            op: HausdorffOperatorSpec | None = None, N: float = 1.0,
                            cap: float | None = None) -> list[tuple[float, float]]:
    """Second uniform bound term with |s|, |t| <= S along an S-ladder.

    For the Bellman operator the values grow without bound in S; for a
    kernel supported in (0, 1) they are constant once S >= 1.
    """
    op = bellman() if op is None else op
    ladder = _ladder(S_ladder, "S")
    return [(float(S), truncated_second_term(op, modulus, N, S, q, cap=cap)) for S in ladder]


def recovery_study(op: HausdorffOperatorSpec, f: TestFunction, n_ladder=DEFAULT_N_LADDER,
                   y_grid=None, q: QuadratureConfig = DEFAULT_QUAD) -> RateReport:
    """Sup-errors of :func:`function_recovery` on ``y_grid`` along an N-ladder.

    The predicted slope is fitted to the uniform bound for the same operator.
    """
    ladder = _ladder(n_ladder, "N")
    if ladder.size < 4:
        raise InvalidGrid("a study needs at least four ladder entries")
    ys = study_grid(f, ladder[-1]) if y_grid is None else _ladder(y_grid, "y")
    reference = f.eval(ys)
    values = _map(lambda N: function_recovery(op, f, N, ys, q).values, ladder)
    errors = [float(np.max(np.abs(v - reference))) for v in values]
    if f.catalog_id == "constant":
        bounds = [0.0] * ladder.size
    else:
        bounds = _bound_ladder(op, f, math.inf, ladder, q)
    report = RateReport(op.name, f.label, math.inf, ladder.tolist(), errors, math.nan,
                        _predicted(ladder, bounds), bounds, _log_ratio(ladder, errors),
                        target="recover")
    return _finish(report)
