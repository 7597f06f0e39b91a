"""Moduli of continuity and Dini-type integrals.

``omega_p(f; delta) = sup_{0 < h <= delta} || f(. + h) - f ||_p``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize, special

from .core import DEFAULT_QUAD, QuadratureConfig, TestFunction, check_exponent, lp_norm
from .errors import ConfigError, DiniDivergent, InvalidGrid
from .quadrature import gauss_legendre, integrate_many


@dataclass(frozen=True)
class ModulusEstimate:
    delta: float
    p: float
    value: float
    method: str
    h_grid_size: int = 0
    error: float = 0.0


def _check_delta(delta):
    delta = float(delta)
    if not delta >= 0 or not math.isfinite(delta):
        raise InvalidGrid(f"delta must be non-negative and finite, got {delta}")
    return delta


def _difference_norms(f: TestFunction, hs, p, q):
    """|| f(. + h) - f ||_p for every h in ``hs`` (vectorised over h)."""
    hs = np.asarray(hs, dtype=float)
    lo, hi = f.support
    sing = np.asarray(f.singular_points(), dtype=float)
    if math.isinf(p):
        base = np.linspace(lo - hs.max(), hi, 4001)
        offsets = np.array([-1e-12, 0.0, 1e-12])
        special_pts = np.concatenate([sing, sing[None, :] - hs[:, None]], axis=None) if sing.size else np.empty(0)
        extra = (special_pts[:, None] + offsets[None, :]).ravel() if special_pts.size else np.empty(0)
        x = np.concatenate([base, extra])
        diff = np.abs(f.eval(x[None, :] + hs[:, None]) - f.eval(x[None, :]))
        best = diff.max(axis=1)
        # Polish smooth interior maxima.
        for i, h in enumerate(hs):
            j = int(np.argmax(diff[i]))
            if j >= base.size:
                continue
            a = base[max(j - 1, 0)]
            b = base[min(j + 1, base.size - 1)]
            res = optimize.minimize_scalar(lambda s: -abs(float(f.eval(np.array([s + h]))[0] - f.eval(np.array([s]))[0])),
                                           bounds=(a, b), method="bounded", options={"xatol": 1e-12})
            best[i] = max(best[i], -res.fun)
        return best
    pts = np.concatenate([np.broadcast_to(sing, (hs.size, sing.size)),
                          sing[None, :] - hs[:, None]], axis=1) if sing.size else None
    res = integrate_many(lambda x, i: np.abs(f.eval(x + hs[i]) - f.eval(x)) ** p,
                         lo - hs, np.full(hs.size, hi), points=pts,
                         abs_tol=min(q.abs_tol, 1e-10), rel_tol=min(q.rel_tol, 1e-8),
                         max_intervals=q.max_subdivisions)
    return np.maximum(res.value, 0.0) ** (1.0 / p)


def modulus_estimate(f: TestFunction, delta: float, p, q: QuadratureConfig = DEFAULT_QUAD,
                     h_grid_size: int = 32) -> ModulusEstimate:
    """Grid estimate of the Lp modulus of continuity at ``delta``.

    The supremum over shifts is taken over ``h = delta k / m``, k = 1..m, so
    the grid always contains ``delta``; the grid is doubled once and the
    change is reported as the error estimate.
    """
    delta = _check_delta(delta)
    p = check_exponent(p)
    if h_grid_size < 1:
        raise InvalidGrid("h_grid_size must be positive")
    if f.catalog_id == "constant" or delta == 0:
        return ModulusEstimate(delta, p, 0.0, "exact", h_grid_size, 0.0)
    if not (math.isfinite(f.support[0]) and math.isfinite(f.support[1])):
        raise InvalidGrid(f"{f.label}: modulus estimation needs a bounded support")
    m = h_grid_size
    hs = delta * np.arange(1, 2 * m + 1) / (2 * m)
    norms = _difference_norms(f, hs, p, q)
    coarse = float(norms[1::2].max())
    fine = float(norms.max())
    return ModulusEstimate(delta, p, coarse, "grid", m, abs(fine - coarse))


def modulus_ladder(f: TestFunction, deltas, p, q: QuadratureConfig = DEFAULT_QUAD,
                   h_grid_size: int = 32) -> list[ModulusEstimate]:
    """Estimates on an increasing ladder, made monotone by carrying maxima forward."""
    deltas = np.asarray(deltas, dtype=float)
    if deltas.size > 1 and np.any(np.diff(deltas) <= 0):
        raise InvalidGrid("delta ladder must be strictly increasing")
    out = []
    running = 0.0
    for d in deltas:
        est = modulus_estimate(f, d, p, q, h_grid_size)
        running = max(running, est.value)
        out.append(ModulusEstimate(est.delta, est.p, running, est.method, est.h_grid_size, est.error))
    return out


# ---------------------------------------------------------------------------
# Closed forms

_ANALYTIC = ("constant", "tent", "indicator", "cusp", "origin_cusp", "gaussian")


def _autocorrelation_l2(profile, norm2_sq, support, h):
    """sqrt(2 ||f||^2 - 2 R(h)) with R the autocorrelation, for unimodal even f."""
    lo, hi = support
    res = integrate_many(lambda x, i: profile(x) * profile(x + h), lo - h, hi, size=1,
                         points=np.array([[lo, 0.0, -h, hi - h]]), abs_tol=1e-14, rel_tol=1e-13,
                         max_intervals=4000)
    return math.sqrt(max(2 * norm2_sq - 2 * float(res.value[0]), 0.0))


def modulus_analytic(f_class, delta: float, p, **params) -> ModulusEstimate:
    """Closed-form (or sharp one-dimensional) modulus for the catalog entries.

    ``f_class`` is a catalog id (``constant``, ``tent``, ``indicator``,
    ``cusp``, ``origin_cusp``, ``gaussian``) or a :class:`TestFunction`
    carrying such an id; ``alpha`` is required for the cusps.
    """
    if isinstance(f_class, TestFunction):
        params = {**f_class.params, **params}
        f_class = f_class.catalog_id
    if f_class not in _ANALYTIC:
        raise ConfigError(f"no closed-form modulus for {f_class!r}; available: {_ANALYTIC}")
    d = _check_delta(delta)
    p = check_exponent(p)
    if d == 0:
        return ModulusEstimate(0.0, p, 0.0, "analytic")
    if f_class == "gaussian":
        # exp(-(x/w)^2) has modulus w^(1/p) times that of exp(-x^2) at delta/w.
        width = float(params.get("width", 1.0))
        if width != 1.0:
            unit = modulus_analytic("gaussian", d / width, p).value
            scale = 1.0 if math.isinf(p) else width ** (1 / p)
            return ModulusEstimate(d, p, scale * unit, "analytic")
    m = min(d, 1.0)
    method = "analytic"
    if f_class == "constant":
        val = 0.0
    elif f_class == "tent":
        if math.isinf(p):
            val = m
        elif p == 1:
            val = 2 * d - d * d / 2 if d <= 2 else 2.0
        elif p == 2:
            if d <= 1:
                val = d * math.sqrt(2 - d)
            else:
                val = math.sqrt(4 / 3 - (max(2 - d, 0.0)) ** 3 / 3)
        else:
            val = _autocorrelation_lp(lambda x: np.maximum(0, 1 - np.abs(x)), (-1, 1), d, p)
            method = "semi-analytic"
    elif f_class == "indicator":
        val = {1.0: 2 * m, 2.0: math.sqrt(2 * m)}.get(p, 1.0 if math.isinf(p) else (2 * m) ** (1 / p))
    elif f_class in ("cusp", "origin_cusp"):
        alpha = float(params.get("alpha", 0))
        if not 0 < alpha <= 1:
            raise ConfigError("cusp moduli need alpha in (0, 1]")
        if f_class == "cusp":
            profile = lambda x: np.maximum(0.0, 1.0 - np.abs(x)) ** alpha  # noqa: E731
        else:
            profile = lambda x: np.maximum(0.0, 1.0 - np.abs(x) ** alpha)  # noqa: E731
        if math.isinf(p):
            val = m ** alpha
        elif p == 1:
            h = min(d, 2.0)
            if f_class == "cusp":
                val = 4 * (1 - (1 - h / 2) ** (alpha + 1)) / (alpha + 1)
            else:
                val = 4 * (h / 2 - (h / 2) ** (alpha + 1) / (alpha + 1))
        elif p == 2:
            if f_class == "cusp":
                norm_sq = 2 / (2 * alpha + 1)
            else:
                norm_sq = 2 * (1 - 2 / (alpha + 1) + 1 / (2 * alpha + 1))
            val = _autocorrelation_l2(profile, norm_sq, (-1.0, 1.0), min(d, 2.0))
            method = "semi-analytic"
        else:
            val = _autocorrelation_lp(profile, (-1, 1), d, p)
            method = "semi-analytic"
    else:  # gaussian
        if p == 1:
            val = 2 * math.sqrt(math.pi) * math.erf(d / 2)
        elif p == 2:
            val = math.sqrt(2 * math.sqrt(math.pi / 2) * (1 - math.exp(-d * d / 2)))
        elif math.isinf(p):
            # The difference is antisymmetric about -d/2; maximise on one side.
            g = lambda x: -abs(math.exp(-(x + d) ** 2) - math.exp(-x * x))  # noqa: E731
            res = optimize.minimize_scalar(g, bounds=(-d / 2, 8.0), method="bounded",
                                           options={"xatol": 1e-13})
            val = -float(res.fun)
            method = "semi-analytic"
        else:
            val = _autocorrelation_lp(lambda x: np.exp(-x * x), (-6.5, 6.5), d, p)
            method = "semi-analytic"
    return ModulusEstimate(d, p, float(val), method)


def _autocorrelation_lp(profile, support, h, p):
    lo, hi = support
    res = integrate_many(lambda x, i: np.abs(profile(x + h) - profile(x)) ** p, lo - h, hi, size=1,
                         points=np.array([[lo, 0.0, -h, hi - h]]), abs_tol=1e-13, rel_tol=1e-12)
    return float(res.value[0]) ** (1 / p)


def modulus_function(f: TestFunction, p, *, source: str = "auto", q: QuadratureConfig = DEFAULT_QUAD,
                     cap: float | None = None):
    """Return a callable delta -> omega_p(f; delta).

    ``source`` selects ``'analytic'``, ``'estimate'`` or ``'auto'`` (analytic
    when the catalog has it).  The optional ``cap`` clips the modulus, e.g.
    at the trivial bound ``2 ||f||_p``.
    """
    p = check_exponent(p)
    use_analytic = source == "analytic" or (source == "auto" and f.catalog_id in _ANALYTIC)
    if use_analytic:
        def base(d):
            return modulus_analytic(f, d, p).value
    else:
        def base(d):
            return modulus_estimate(f, d, p, q).value
    cache = {}

    def omega(d):
        if np.ndim(d):
            return np.array([omega(float(v)) for v in np.ravel(d)]).reshape(np.shape(d))
        d = float(d)
        if d <= 0:
            return 0.0
        if d not in cache:
            v = base(d)
            cache[d] = min(v, cap) if cap is not None else v
        return cache[d]

    return omega


def trivial_cap(f: TestFunction, p, q: QuadratureConfig = DEFAULT_QUAD) -> float:
    """2 ||f||_p, the bound every Lp modulus obeys."""
    return 2 * lp_norm(f, p, q)


# ---------------------------------------------------------------------------

_WEIGHTS = {
    "inv_t": lambda t: 1.0 / t,
    "log_over_t": lambda t: np.abs(np.log(t)) / t,
    "one": lambda t: np.ones_like(t),
}


def dini_integral(modulus, N: float, weight: str = "inv_t", q: QuadratureConfig = DEFAULT_QUAD,
                  *, max_levels: int = 1000) -> float:
    """int_0^1 w(t) omega(t / N) dt with w one of 1/t, |log t|/t or 1.

    The integral is summed over dyadic pieces [2^-k-1, 2^-k]; once the piece
    ratio settles below one the remaining tail is added as a geometric series.
    Pieces that fail to shrink raise :class:`DiniDivergent`.
    """
    if weight not in _WEIGHTS:
        raise ConfigError(f"weight must be one of {sorted(_WEIGHTS)}")
    N = float(N)
    if not N > 0:
        raise InvalidGrid("N must be positive")
    w = _WEIGHTS[weight]
    xg, wg = gauss_legendre(20)
    vec = _vectorise(modulus)
    total = 0.0
    pieces = []
    tol = max(q.abs_tol * 1e-2, 1e-14)
    batch = 32
    for start in range(0, max_levels, batch):
        k = np.arange(start, min(start + batch, max_levels))
        a = 2.0 ** (-k - 1)
        b = 2.0 ** (-k)
        mid = 0.5 * (a + b)
        half = 0.5 * (b - a)
        t = mid[:, None] + half[:, None] * xg[None, :]
        vals = w(t) * vec(t / N).reshape(t.shape)
        pieces.extend(((vals @ wg) * half).tolist())
        inc = np.asarray(pieces)
        total = float(inc.sum())
        last = inc[-8:]
        if np.all(last == 0):
            return total
        if inc.size >= 16 and np.all(inc[-16:] > 0):
            ratios = inc[-15:] / inc[-16:-1]
            r = float(ratios.max())
            if r < 0.99:
                tail = float(inc[-1]) * r / (1 - r)
                if tail <= max(tol, q.rel_tol * 1e-2 * abs(total)):
                    return total + tail
    inc = np.asarray(pieces)
    ratios = inc[-15:] / np.where(inc[-16:-1] == 0, 1, inc[-16:-1])
    r = float(np.max(ratios))
    if r < 0.99:
        return total + float(inc[-1]) * r / (1 - r)
    # Logarithmic moduli give pieces decaying like k^-beta; the sum converges
    # iff beta > 1, with tail about inc_K K / (beta - 1).
    K = inc.size
    j = K // 2
    if inc[j - 1] > 0 and inc[-1] > 0:
        beta = math.log(inc[j - 1] / inc[-1]) / math.log(K / j)
        if beta > 1.05:
            return total + float(inc[-1]) * K / (beta - 1)
    raise DiniDivergent(f"Dini integral with weight {weight} diverges (piece ratio {r:.4f})")


def _vectorise(modulus):
    def call(d):
        d = np.asarray(d, dtype=float)
        try:
            out = np.asarray(modulus(d), dtype=float)
            if out.shape == d.shape:
                return out
        except (TypeError, ValueError):
            pass
        return np.array([float(modulus(float(v))) for v in d.ravel()]).reshape(d.shape)
    return call
