"""Fourier transforms, sinc integrals and truncated-Fourier approximants.

Convention: ``f^(y) = int f(s) exp(-i s y) ds`` so that the inversion carries
the factor 1/(2 pi).

The approximants are built on the Dirichlet integral

    J(c, lam) = int f(y) sin(lam (c - y)) / (c - y) dy  =  pi * P_lam f(c),

where ``P_lam`` keeps the frequencies ``|u| <= lam``.  ``J`` is evaluated by
subtracting ``f(c)`` (its contribution is a pair of sine integrals) and
integrating the smooth difference quotient against ``sin`` with Filon-type
weights: the quotient is projected onto Legendre polynomials on each panel of
a mesh graded toward the singular points of ``f``, and the Legendre moments of
``exp(-i w s)`` are spherical Bessel functions.  The cost per evaluation is
independent of ``lam``.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from ._bessel import spherical_jn_all
from .core import DEFAULT_QUAD, GridSpec, QuadratureConfig, TestFunction
from .errors import (
    ConfigError,
    KernelMassNotOne,
    OscillatoryTailNotConverged,
    TailNotIntegrable,
)
from .operators import HausdorffOperatorSpec, hausdorff_apply, adjoint_apply, kernel_integral
from .quadrature import gauss_legendre, integrate_many, integrate_shared


@dataclass
class ApproximantResult:
    x_grid: GridSpec
    values: np.ndarray
    N: float
    representation: str
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.N > 0:
            raise ConfigError("truncation parameter must be positive")
        if len(self.values) != len(self.x_grid.points):
            raise ConfigError("one value per grid point expected")


def _as_grid(x, role="x") -> GridSpec:
    if isinstance(x, GridSpec):
        return x
    return GridSpec(tuple(float(v) for v in np.atleast_1d(np.asarray(x, dtype=float))), role)


def _check_N(N):
    N = float(N)
    if not N > 0 or not math.isfinite(N):
        raise ConfigError(f"truncation parameter must be positive and finite, got {N}")
    return N


# ---------------------------------------------------------------------------
# Sinc integrals by half-period summation


@dataclass(frozen=True)
class SincIntegral:
    value: float
    error: float
    lobes: int

    def __float__(self):
        return self.value


def _wynn_epsilon(partial):
    """Wynn's epsilon extrapolation of a sequence of partial sums."""
    s = np.asarray(partial, dtype=float)
    n = s.size
    prev = np.zeros(n + 1)
    cur = s.copy()
    best = s[-1]
    for k in range(1, n):
        diff = cur[1:] - cur[:-1]
        with np.errstate(divide="ignore", invalid="ignore"):
            nxt = prev[1:cur.size] + 1.0 / diff
        if not np.all(np.isfinite(nxt)):
            break
        prev, cur = cur, nxt
        if k % 2 == 0:
            best = cur[-1]
    return float(best)


def sinc_integral(g, lam: float, q: QuadratureConfig = DEFAULT_QUAD, *, points=()) -> SincIntegral:
    """int g(s) sin(lam s) / s ds over the real line.

    ``g`` is a vectorised callable or a constant.  The line is folded onto
    s > 0, cut into half periods of ``sin(lam s)`` (and at ``points``, the
    places where ``g`` is not smooth), each lobe is integrated adaptively,
    and the alternating sequence of partial sums is accelerated with Wynn's
    epsilon algorithm.
    """
    lam = float(lam)
    if lam == 0 or not math.isfinite(lam):
        raise ConfigError("sinc_integral needs a finite non-zero frequency")
    if callable(g):
        func = g
    else:
        const = float(g)
        func = lambda s: np.full(np.shape(s), const)  # noqa: E731
    sgn = math.copysign(1.0, lam)
    w = abs(lam)

    def folded(sig, _idx):
        s = sig / w
        return (func(s) + func(-s)) * np.sinc(sig / np.pi)

    brk = sorted({abs(p) * w for p in points if p != 0})
    # Acceleration only sees smooth tails, so sum explicitly past every break point.
    n_lobes = max(8, q.acceleration_terms)
    if brk:
        n_lobes += int(math.ceil(brk[-1] / math.pi))
    done = 0
    terms = np.empty(0)
    cap = max(q.oscillatory_truncation, 2 * n_lobes * math.pi)
    history = []
    while True:
        k = np.arange(done, n_lobes)
        lo, hi = k * math.pi, (k + 1) * math.pi
        pts = None
        if brk:
            b = np.asarray(brk)
            pts = np.where((b[None, :] > lo[:, None]) & (b[None, :] < hi[:, None]), b[None, :], np.nan)
        res = integrate_many(folded, lo, hi, size=k.size, points=pts,
                             abs_tol=q.abs_tol * 1e-2 / n_lobes, rel_tol=q.rel_tol * 1e-3,
                             max_intervals=q.max_subdivisions)
        terms = np.concatenate([terms, res.value])
        done = n_lobes
        partial = np.cumsum(terms)
        tail = partial[-q.acceleration_terms:] if partial.size > q.acceleration_terms else partial
        est = _wynn_epsilon(tail)
        err = abs(est - _wynn_epsilon(tail[:-1]))
        history.append(est)
        if len(history) > 1:
            err = max(err, abs(history[-1] - history[-2]))
            if err <= max(q.abs_tol, q.rel_tol * abs(est)):
                return SincIntegral(sgn * est, err, done)
        if n_lobes * math.pi >= cap:
            raise OscillatoryTailNotConverged(
                f"sinc integral not converged after {done} half periods (error {err:.3g})",
                estimate=sgn * est, error=err)
        n_lobes *= 2


# ---------------------------------------------------------------------------
# Dirichlet-integral engine


@dataclass(frozen=True, eq=False)
class _Mesh:
    lo: float
    hi: float
    y: np.ndarray       # (M,) nodes, panel-major
    fy: np.ndarray      # (M,)
    mid: np.ndarray     # (P,)
    half: np.ndarray    # (P,)
    order: int
    moment_re: np.ndarray  # (n, n): Legendre order x node
    moment_im: np.ndarray
    singular: tuple = ()
    constant: float | None = None


def _graded_cuts(a, b, grade_a, grade_b, ratio, depth):
    pts = {a, b}
    L = b - a
    mid = a + 0.5 * L
    pts.add(mid)
    for end, sgn, graded in ((a, 1.0, grade_a), (b, -1.0, grade_b)):
        if not graded:
            continue
        h = 0.5 * L * ratio
        while h > depth * max(L, 1.0):
            pts.add(end + sgn * h)
            h *= ratio
    return sorted(pts)


@functools.lru_cache(maxsize=16)
def _moment_matrices(n):
    """Matrices E with  int_{-1}^{1} p(s) e^{-i w s} ds = sum_j p(s_j) (jn(w) @ E)_j.

    Here p is the degree n-1 interpolant through the Gauss nodes s_j.
    """
    x, w = gauss_legendre(n)
    leg = np.polynomial.legendre.legvander(x, n - 1).T  # (k, j) = P_k(x_j)
    coef = (2 * np.arange(n) + 1)[:, None] * leg * w[None, :]
    phase = (-1j) ** np.arange(n)
    e = phase[:, None] * coef
    return np.ascontiguousarray(e.real), np.ascontiguousarray(e.imag)


def build_mesh(f: TestFunction, q: QuadratureConfig = DEFAULT_QUAD) -> _Mesh:
    """Piecewise Gauss-Legendre mesh for ``f`` over its (truncated) support."""
    n = q.legendre_order
    mre, mim = _moment_matrices(n)
    lo, hi = f.support
    if not (math.isfinite(lo) and math.isfinite(hi)):
        if f.catalog_id == "constant":
            value = float(f.eval(np.array([0.0]))[0])
            empty = np.empty(0)
            return _Mesh(lo, hi, empty, empty, empty, empty, n, mre, mim, constant=value)
        raise TailNotIntegrable(f"{f.label}: unbounded support needs a truncation interval")
    graded = set(f.singular_points())
    cuts = sorted({lo, hi, *[b for b in f.breakpoints if lo < b < hi]})
    edges = []
    for a, b in zip(cuts[:-1], cuts[1:]):
        seg = _graded_cuts(a, b, a in graded, b in graded, q.grading_ratio, q.grading_depth)
        edges.extend(seg if not edges else seg[1:])
    edges = np.asarray(edges)
    if f.panel_width:
        refined = [edges[0]]
        for a, b in zip(edges[:-1], edges[1:]):
            k = int(math.ceil((b - a) / f.panel_width))
            refined.extend(np.linspace(a, b, k + 1)[1:].tolist())
        edges = np.asarray(refined)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    x, _ = gauss_legendre(n)
    y = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    return _Mesh(lo, hi, y, f.eval(y), mid, half, n, mre, mim, tuple(sorted(graded)))


# Pairs processed per vectorised block.
_BLOCK = 1 << 18


def dirichlet_integral(f: TestFunction, c, lam, q: QuadratureConfig = DEFAULT_QUAD, *, mesh=None):
    """J(c, lam) = int f(y) sin(lam (c - y)) / (c - y) dy for paired arrays ``c``, ``lam``.

    ``lam`` must be non-negative.
    """
    mesh = build_mesh(f, q) if mesh is None else mesh
    c = np.asarray(c, dtype=float)
    lam = np.broadcast_to(np.asarray(lam, dtype=float), c.shape)
    shape = c.shape
    c = c.ravel()
    lam = lam.ravel()
    if mesh.constant is not None:
        return np.where(lam > 0, math.pi * mesh.constant, 0.0).reshape(shape)
    out = np.empty(c.size)
    n = mesh.order
    P = mesh.mid.size
    M = mesh.y.size
    step = max(1, _BLOCK // (M + P * n))
    for s in range(0, c.size, step):
        cc = c[s:s + step]
        ll = lam[s:s + step]
        out[s:s + step] = _dirichlet_block(f, mesh, cc, ll)
    return out.reshape(shape)


def _dirichlet_block(f, mesh, c, lam):
    n = mesh.order
    P = mesh.mid.size
    k = c.size
    fc = f.eval(c)
    si = fc * (special.sici(lam * (c - mesh.lo))[0] - special.sici(lam * (c - mesh.hi))[0])

    omega = lam[:, None] * mesh.half[None, :]
    jn = spherical_jn_all(omega, n).reshape(k * P, n)
    wre = (jn @ mesh.moment_re).reshape(k, P, n)
    wim = (jn @ mesh.moment_im).reshape(k, P, n)
    ph = lam[:, None] * mesh.mid[None, :]
    cm, sm = np.cos(ph)[:, :, None], np.sin(ph)[:, :, None]
    r = mesh.half[None, :, None]
    u = (r * (cm * wre + sm * wim)).reshape(k, -1)
    v = (r * (cm * wim - sm * wre)).reshape(k, -1)

    d = c[:, None] - mesh.y[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        g = (mesh.fy[None, :] - fc[:, None]) / d
    # Close to a node the quotient loses digits; where f is smooth around c
    # use its derivative instead.  Near a singular point of f the nodes sit
    # on tiny graded panels and the direct quotient is harmless.
    near = np.abs(d) < 1e-8 * np.maximum(1.0, np.abs(c))[:, None]
    if near.any():
        rows = np.nonzero(near.any(axis=1))[0]
        cr = c[rows]
        smooth = np.ones(rows.size, dtype=bool)
        for b in mesh.singular:
            smooth &= np.abs(cr - b) > 1e-5 * max(1.0, abs(b))
        eta = 1e-6 * np.maximum(1.0, np.abs(cr))
        deriv = (f.eval(cr + eta) - f.eval(cr - eta)) / (2 * eta)
        fallback = np.where(np.isfinite(g[rows]), g[rows], 0.0)
        g[rows] = np.where(near[rows] & smooth[:, None], -deriv[:, None], fallback)
    a_part = np.einsum("km,km->k", g, u)
    b_part = np.einsum("km,km->k", g, v)
    return si + np.sin(lam * c) * a_part + np.cos(lam * c) * b_part


def fourier_transform(f: TestFunction, y, q: QuadratureConfig = DEFAULT_QUAD, *, mesh=None,
                      use_analytic: bool = True):
    """f^(y) = int f(s) exp(-i s y) ds (complex, scalar or array)."""
    if 1.0 not in f.lp:
        raise TailNotIntegrable(f"{f.label} is not declared integrable")
    ys = np.atleast_1d(np.asarray(y, dtype=float))
    if use_analytic and f.analytic_ft is not None:
        out = np.asarray(f.analytic_ft(ys), dtype=complex)
    else:
        mesh = build_mesh(f, q) if mesh is None else mesh
        if mesh.constant is not None:
            raise TailNotIntegrable("the transform of a constant is not a function")
        n = mesh.order
        P = mesh.mid.size
        out = np.empty(ys.size, dtype=complex)
        fy = mesh.fy.reshape(P, n)
        step = max(1, _BLOCK // (P * n))
        for s in range(0, ys.size, step):
            yy = ys[s:s + step]
            k = yy.size
            omega = yy[:, None] * mesh.half[None, :]
            jn = spherical_jn_all(omega, n).reshape(k * P, n)
            w = (jn @ mesh.moment_re + 1j * (jn @ mesh.moment_im)).reshape(k, P, n)
            panel = np.einsum("kpj,pj->kp", w, fy) * mesh.half[None, :]
            out[s:s + step] = np.sum(panel * np.exp(-1j * yy[:, None] * mesh.mid[None, :]), axis=1)
    return complex(out[0]) if np.ndim(y) == 0 else out


# ---------------------------------------------------------------------------
# Approximants


def _resonances(op, x, f, inverse_ratio=False):
    """t at which the inner evaluation point crosses a singular point of f."""
    sing = np.asarray([b for b in f.singular_points() if b != 0 and math.isfinite(b)] or [np.nan])
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = (sing[None, :] / x[:, None]) if inverse_ratio else (x[:, None] / sing[None, :])
        t = op.scaling.inverse(ratio)
    t = np.where(np.isfinite(t), t, np.nan)
    extra = np.asarray(op.kernel.breakpoints, dtype=float)
    if extra.size:
        t = np.concatenate([t, np.broadcast_to(extra, (x.size, extra.size))], axis=1)
    return t


def _kernel_l1_check(op, q):
    """Raise DivergentIntegral when |phi| is not integrable."""
    kernel_integral(op, lambda t, i: np.abs(op.kernel(t)), 1, q=q, what=f"kernel of {op.name}")


def _tail_estimate(f, op, xs, q):
    if f.tail_bound == 0 or f.catalog_id == "constant":
        return np.zeros(xs.size)
    mass, _ = kernel_integral(op, lambda t, i: np.abs(op.kernel(t)), 1, q=q, check_divergence=False)
    R = f.radius
    room = np.maximum(R - np.abs(xs), 0.5 * R)
    return float(mass[0]) * 2 * f.tail_bound * R / (math.pi * f.tail_decay * room)


def _approximant(op, f, N, xs, q, centre, freq, weight, representation, points, divergence=True):
    mesh = build_mesh(f, q)
    a, phi = op.scaling, op.kernel

    def integrand(t, idx):
        at = a(t)
        with np.errstate(divide="ignore", invalid="ignore"):
            cc = centre(xs[idx], at)
            ll = freq(at)
        wt = phi(t) * weight(at) / math.pi
        live = (wt != 0) & np.isfinite(cc) & np.isfinite(ll)
        out = np.zeros(t.size)
        if live.any():
            out[live] = wt[live] * dirichlet_integral(f, cc[live], ll[live], q, mesh=mesh)
        return out

    if divergence:
        _kernel_l1_check(op, q)
    vals, err = kernel_integral(op, integrand, xs.size, points=points, q=q, check_divergence=False)
    diag = {"quadrature_error": err, "tail_error_estimate": _tail_estimate(f, op, xs, q),
            "mesh_panels": int(mesh.mid.size)}
    return ApproximantResult(_as_grid(xs), np.asarray(vals, dtype=float), N, representation, diag)


def truncated_approximant(op: HausdorffOperatorSpec, f: TestFunction, N: float, x_grid,
                          q: QuadratureConfig = DEFAULT_QUAD) -> ApproximantResult:
    """Truncated-Fourier approximant of H* f in the substituted form.

    value(x) = (1/pi) int phi(t) J(x / a(t), N |a(t)|) dt.
    """
    N = _check_N(N)
    grid = _as_grid(x_grid)
    xs = grid.array
    res = _approximant(op, f, N, xs, q,
                       centre=lambda x, at: x / at,
                       freq=lambda at: N * np.abs(at),
                       weight=lambda at: 1.0,
                       representation="substituted",
                       points=_resonances(op, xs, f))
    res.x_grid = grid
    return res


def adjoint_variant_approximant(op: HausdorffOperatorSpec, f: TestFunction, N: float, x_grid,
                                q: QuadratureConfig = DEFAULT_QUAD) -> ApproximantResult:
    """Truncated-Fourier approximant of H f.

    value(x) = (1/pi) int phi(t) |a(t)| J(a(t) x, N / |a(t)|) dt.  The target
    H f is evaluated first; if it diverges at some grid point the
    approximation problem is ill-posed and :class:`DivergentIntegral` is
    raised.
    """
    N = _check_N(N)
    grid = _as_grid(x_grid)
    xs = grid.array
    target = hausdorff_apply(op, f, xs, q)
    res = _approximant(op, f, N, xs, q,
                       centre=lambda x, at: at * x,
                       freq=lambda at: N / np.abs(at),
                       weight=np.abs,
                       representation="substituted",
                       points=_resonances(op, xs, f, inverse_ratio=True),
                       divergence=False)
    res.x_grid = grid
    res.diagnostics["target"] = np.asarray(target)
    return res


def function_recovery(op: HausdorffOperatorSpec, f: TestFunction, N: float, y_grid,
                      q: QuadratureConfig = DEFAULT_QUAD) -> ApproximantResult:
    """Approximation of f(y) by int phi(t) P_{N|a(t)|} f(y) dt (needs unit kernel mass)."""
    N = _check_N(N)
    mass = op.kernel.total_mass
    if mass is None:
        m, _ = kernel_integral(op, lambda t, i: op.kernel(t), 1, q=q)
        mass = float(m[0])
    if not abs(mass - 1.0) <= 1e-10:
        raise KernelMassNotOne(f"{op.name}: kernel mass {mass!r} differs from 1")
    grid = _as_grid(y_grid, "y")
    ys = grid.array
    # The evaluation point never moves, so no resonances in t.
    pts = np.tile(np.asarray(op.kernel.breakpoints or [np.nan], dtype=float), (ys.size, 1))
    res = _approximant(op, f, N, ys, q,
                       centre=lambda y, at: y + 0.0 * at,
                       freq=lambda at: N * np.abs(at),
                       weight=lambda at: 1.0,
                       representation="substituted",
                       points=pts)
    res.x_grid = grid
    return res


def transformed_operator_symbol(op: HausdorffOperatorSpec, f: TestFunction, u,
                                q: QuadratureConfig = DEFAULT_QUAD, *, mesh=None):
    """H applied to f^: int phi(t) |a(t)| f^(a(t) u) dt (complex array)."""
    us = np.atleast_1d(np.asarray(u, dtype=float))
    use_mesh = f.analytic_ft is None
    mesh = build_mesh(f, q) if (use_mesh and mesh is None) else mesh
    a, phi = op.scaling, op.kernel

    def integrand(t, idx):
        at = a(t)
        v = np.zeros(t.size, dtype=complex)
        wt = phi(t) * np.abs(at)
        live = wt != 0
        if live.any():
            v[live] = wt[live] * fourier_transform(f, at[live] * us[idx][live], q, mesh=mesh)
        return v

    vals, _ = kernel_integral(op, integrand, us.size, q=q, check_divergence=False)
    return vals


def truncated_approximant_direct(op: HausdorffOperatorSpec, f: TestFunction, N: float, x,
                                 q: QuadratureConfig = DEFAULT_QUAD):
    """(1/2pi) int_{-N}^{N} (H f^)(u) exp(i u x) du by nested quadrature.

    Returns a real number (or array for array ``x``); the imaginary residue
    is available from :func:`direct_spectral_details`.
    """
    vals, _ = direct_spectral_details(op, f, N, x, q)
    return float(vals[0]) if np.ndim(x) == 0 else vals


def direct_spectral_details(op, f, N, x, q: QuadratureConfig = DEFAULT_QUAD):
    """Real parts and imaginary residues of the direct spectral evaluation."""
    N = float(N)
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if N <= 0:
        return np.zeros(xs.size), np.zeros(xs.size)
    if 1.0 not in f.lp:
        raise TailNotIntegrable(f"{f.label} is not declared integrable")
    inner_q = QuadratureConfig(abs_tol=q.abs_tol * 1e-2, rel_tol=q.rel_tol * 1e-2,
                               max_subdivisions=q.max_subdivisions,
                               legendre_order=q.legendre_order, grading_ratio=q.grading_ratio,
                               grading_depth=q.grading_depth)
    mesh = None if f.analytic_ft is not None else build_mesh(f, q)

    def integrand(u):
        sym = transformed_operator_symbol(op, f, u, inner_q, mesh=mesh)
        return sym[:, None] * np.exp(1j * u[:, None] * xs[None, :])

    res = integrate_shared(integrand, -N, N, points=(0.0,), abs_tol=q.abs_tol,
                           rel_tol=q.rel_tol, max_intervals=q.max_subdivisions)
    val = np.asarray(res.value) / (2 * math.pi)
    return val.real, val.imag
