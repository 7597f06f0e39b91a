"""Vectorised adaptive Gauss-Kronrod quadrature.

Two drivers are provided.  :func:`integrate_shared` integrates a vector-valued
integrand on one interval list shared by all components.  :func:`integrate_many`
integrates a family of scalar integrands, one per component, each with its own
limits, break points and interval list; all pending intervals of all components
are evaluated in a single batched call, which keeps the Python overhead per
interval small.

Infinite limits are handled by rational maps onto bounded intervals.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from .errors import DivergentIntegral, QuadratureNotConverged

_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

# Full 15-point rule on [-1, 1] and the embedded 7-point Gauss weights.
NODES15 = np.concatenate([-_XGK[:-1], _XGK[::-1]])
WK15 = np.concatenate([_WGK[:-1], _WGK[::-1]])
WG15 = np.zeros(15)
WG15[[1, 3, 5, 7, 9, 11, 13]] = np.concatenate([_WG[:-1], _WG[::-1]])


# Intervals narrower than this (relative to their position) are not split.
_MIN_WIDTH = 1e-13


@functools.lru_cache(maxsize=64)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [-1, 1] (read-only arrays)."""
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@dataclass(frozen=True)
class QuadResult:
    value: np.ndarray
    error: np.ndarray
    converged: np.ndarray
    intervals: int


# ---------------------------------------------------------------------------
# Maps for infinite limits.  Each mode maps u in a bounded interval onto t.

_FINITE, _UPPER_INF, _LOWER_INF, _BOTH_INF = 0, 1, 2, 3


def _mode(a, b):
    mode = np.full(np.shape(a), _FINITE, dtype=int)
    mode[np.isfinite(a) & np.isposinf(b)] = _UPPER_INF
    mode[np.isneginf(a) & np.isfinite(b)] = _LOWER_INF
    mode[np.isneginf(a) & np.isposinf(b)] = _BOTH_INF
    return mode


def _u_limits(a, b, mode):
    ua = np.where(mode == _FINITE, a, np.where(mode == _LOWER_INF, 0.0,
                                               np.where(mode == _BOTH_INF, -1.0, 0.0)))
    ub = np.where(mode == _FINITE, b, np.where(mode == _UPPER_INF, 1.0, 1.0))
    return ua.astype(float), ub.astype(float)


def _to_t(u, a, b, mode):
    """Return t(u) and dt/du for the per-point mode arrays."""
    t = np.array(u, dtype=float, copy=True)
    jac = np.ones_like(t)
    m = mode == _UPPER_INF
    if m.any():
        um = u[m]
        t[m] = a[m] + um / (1.0 - um)
        jac[m] = 1.0 / (1.0 - um) ** 2
    m = mode == _LOWER_INF
    if m.any():
        um = u[m]
        t[m] = b[m] - (1.0 - um) / um
        jac[m] = 1.0 / um ** 2
    m = mode == _BOTH_INF
    if m.any():
        um = u[m]
        t[m] = um / (1.0 - um * um)
        jac[m] = (1.0 + um * um) / (1.0 - um * um) ** 2
    return t, jac


def _to_u(t, a, b, mode):
    u = np.array(t, dtype=float, copy=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        m = mode == _UPPER_INF
        u[m] = (t[m] - a[m]) / (1.0 + t[m] - a[m])
        m = mode == _LOWER_INF
        u[m] = 1.0 / (1.0 + b[m] - t[m])
        m = mode == _BOTH_INF
        tm = t[m]
        safe = np.where(tm == 0, 1.0, tm)
        u[m] = np.where(tm == 0, 0.0, (-1.0 + np.sqrt(1.0 + 4.0 * tm * tm)) / (2.0 * safe))
    return u


# ---------------------------------------------------------------------------


def integrate_many(func, a, b, *, size=None, points=None, abs_tol=1e-8, rel_tol=1e-6,
                   max_intervals=2000, raise_on_failure=False) -> QuadResult:
    """Integrate one scalar integrand per component.

    ``func(t, idx)`` receives flat arrays of abscissae and component indices
    and returns the integrand values (real or complex) at those pairs.
    ``a`` and ``b`` broadcast to the number of components ``size`` and may be
    infinite.  ``points`` is an optional ``(C, P)`` array of interior break
    points; NaN entries and points outside ``(a, b)`` are ignored.
    """
    shape = np.broadcast_shapes(np.shape(a), np.shape(b), () if size is None else (size,))
    a, b = (np.broadcast_to(np.asarray(v, dtype=float), shape) for v in (a, b))
    a = a.ravel().copy()
    b = b.ravel().copy()
    n_comp = a.size
    sign = np.where(b < a, -1.0, 1.0)
    a, b = np.minimum(a, b), np.maximum(a, b)
    mode = _mode(a, b)
    ua, ub = _u_limits(a, b, mode)

    # Initial partition in u-space.
    lo_list, hi_list, comp_list = [], [], []
    pts = None if points is None else np.atleast_2d(np.asarray(points, dtype=float))
    for c in range(n_comp):
        if ua[c] == ub[c]:
            continue
        cuts = [ua[c], ub[c]]
        if pts is not None:
            pc = pts[c if pts.shape[0] > 1 else 0]
            pc = pc[np.isfinite(pc)]
            pc = pc[(pc > a[c]) & (pc < b[c])]
            if pc.size:
                uc = _to_u(pc, np.full(pc.shape, a[c]), np.full(pc.shape, b[c]),
                           np.full(pc.shape, mode[c]))
                cuts.extend(uc.tolist())
        cuts = np.unique(np.asarray(cuts))
        cuts = cuts[(cuts >= ua[c]) & (cuts <= ub[c])]
        lo_list.append(cuts[:-1])
        hi_list.append(cuts[1:])
        comp_list.append(np.full(cuts.size - 1, c))
    if not lo_list:
        z = np.zeros(n_comp)
        return QuadResult(z, z.copy(), np.ones(n_comp, bool), 0)
    pend_lo = np.concatenate(lo_list)
    pend_hi = np.concatenate(hi_list)
    pend_c = np.concatenate(comp_list)

    done_lo = np.empty(0)
    done_hi = np.empty(0)
    done_c = np.empty(0, dtype=int)
    done_v = None
    done_e = np.empty(0)
    converged = np.zeros(n_comp, dtype=bool)
    converged[ua == ub] = True
    total = None
    total_err = np.zeros(n_comp)

    while pend_lo.size:
        half = 0.5 * (pend_hi - pend_lo)
        mid = 0.5 * (pend_hi + pend_lo)
        u = mid[:, None] + half[:, None] * NODES15[None, :]
        cidx = np.repeat(pend_c, 15)
        t, jac = _to_t(u.ravel(), a[cidx], b[cidx], mode[cidx])
        vals = np.asarray(func(t, cidx)) * jac
        # Point singularities hit by rounding contribute nothing.
        vals[~np.isfinite(vals)] = 0.0
        vals = vals.reshape(u.shape)
        vk = (vals @ WK15) * half
        vg = (vals @ WG15) * half
        ev = np.abs(vk - vg)
        ev[~np.isfinite(vk)] = np.inf

        if done_v is None:
            done_v = np.empty(0, dtype=vk.dtype)
        elif vk.dtype != done_v.dtype:
            done_v = done_v.astype(np.result_type(done_v, vk))
        done_lo = np.concatenate([done_lo, pend_lo])
        done_hi = np.concatenate([done_hi, pend_hi])
        done_c = np.concatenate([done_c, pend_c])
        done_v = np.concatenate([done_v, vk])
        done_e = np.concatenate([done_e, ev])

        total = np.zeros(n_comp, dtype=done_v.dtype)
        np.add.at(total, done_c, done_v)
        total_err = np.zeros(n_comp)
        np.add.at(total_err, done_c, done_e)
        count = np.bincount(done_c, minlength=n_comp)
        tol = np.maximum(abs_tol, rel_tol * np.abs(total))
        converged = total_err <= tol
        converged |= ua == ub
        stalled = count >= max_intervals
        active = ~converged & ~stalled
        if not active.any():
            break
        share = tol / np.maximum(count, 1)
        width = done_hi - done_lo
        scale = np.maximum(np.abs(done_lo), np.abs(done_hi)) + 1e-300
        split = (active[done_c] & (done_e > share[done_c])
                 & (width > _MIN_WIDTH * scale))
        if not split.any():
            break
        s_lo, s_hi, s_c = done_lo[split], done_hi[split], done_c[split]
        s_mid = 0.5 * (s_lo + s_hi)
        keep = ~split
        done_lo, done_hi, done_c = done_lo[keep], done_hi[keep], done_c[keep]
        done_v, done_e = done_v[keep], done_e[keep]
        pend_lo = np.concatenate([s_lo, s_mid])
        pend_hi = np.concatenate([s_mid, s_hi])
        pend_c = np.concatenate([s_c, s_c])

    value = sign * total
    if raise_on_failure and not converged.all():
        worst = int(np.argmax(total_err - np.maximum(abs_tol, rel_tol * np.abs(total))))
        raise QuadratureNotConverged(
            f"adaptive quadrature did not reach tolerance for component {worst}: "
            f"estimate {value[worst]!r}, error {total_err[worst]:.3g}",
            estimate=value, error=total_err)
    return QuadResult(value, total_err, converged, int(done_lo.size))


def integrate_shared(func, a, b, *, points=(), abs_tol=1e-8, rel_tol=1e-6,
                     max_intervals=2000, raise_on_failure=False) -> QuadResult:
    """Integrate a vector-valued integrand on one adaptive partition.

    ``func(t)`` maps a flat array of abscissae of shape ``(K,)`` to values of
    shape ``(K, ...)``.  The local error of an interval is the largest error
    over all components, and the partition is refined until the summed error
    is below ``max(abs_tol, rel_tol * max|I|)``.
    """
    a = float(a)
    b = float(b)
    sign = 1.0
    if b < a:
        a, b, sign = b, a, -1.0
    mode = int(_mode(np.array([a]), np.array([b]))[0])
    ua, ub = _u_limits(np.array([a]), np.array([b]), np.array([mode]))
    ua, ub = float(ua[0]), float(ub[0])
    pts = np.asarray([p for p in points if a < p < b], dtype=float)
    cuts = [ua, ub]
    if pts.size:
        cuts.extend(_to_u(pts, np.full(pts.shape, a), np.full(pts.shape, b),
                          np.full(pts.shape, mode)).tolist())
    cuts = np.unique(cuts)
    pend_lo, pend_hi = cuts[:-1], cuts[1:]

    done_lo = np.empty(0)
    done_hi = np.empty(0)
    done_v = None
    done_e = np.empty(0)
    total = None
    total_err = 0.0
    converged = ua == ub
    while pend_lo.size:
        half = 0.5 * (pend_hi - pend_lo)
        mid = 0.5 * (pend_hi + pend_lo)
        u = (mid[:, None] + half[:, None] * NODES15[None, :]).ravel()
        n = u.size
        t, jac = _to_t(u, np.full(n, a), np.full(n, b), np.full(n, mode))
        vals = np.asarray(func(t))
        tail_shape = vals.shape[1:]
        vals = vals * jac.reshape((-1,) + (1,) * len(tail_shape))
        vals[~np.isfinite(vals)] = 0.0
        vals = vals.reshape((pend_lo.size, 15) + tail_shape)
        hs = half.reshape((-1,) + (1,) * len(tail_shape))
        vk = np.tensordot(vals, WK15, axes=([1], [0])) * hs
        vg = np.tensordot(vals, WG15, axes=([1], [0])) * hs
        diff = np.abs(vk - vg).reshape(pend_lo.size, -1)
        ev = diff.max(axis=1) if diff.shape[1] else np.zeros(pend_lo.size)
        ev[~np.isfinite(vk.reshape(pend_lo.size, -1)).all(axis=1)] = np.inf
        done_lo = np.concatenate([done_lo, pend_lo])
        done_hi = np.concatenate([done_hi, pend_hi])
        done_v = vk if done_v is None else np.concatenate([done_v, vk])
        done_e = np.concatenate([done_e, ev])
        total = done_v.sum(axis=0)
        total_err = float(done_e.sum())
        tol = max(abs_tol, rel_tol * float(np.max(np.abs(total))) if np.size(total) else 0.0)
        converged = total_err <= tol
        if converged or done_lo.size >= max_intervals:
            break
        width = done_hi - done_lo
        scale = np.maximum(np.abs(done_lo), np.abs(done_hi)) + 1e-300
        split = (done_e > tol / done_lo.size) & (width > _MIN_WIDTH * scale)
        if not split.any():
            break
        s_lo, s_hi = done_lo[split], done_hi[split]
        s_mid = 0.5 * (s_lo + s_hi)
        keep = ~split
        done_lo, done_hi = done_lo[keep], done_hi[keep]
        done_v, done_e = done_v[keep], done_e[keep]
        pend_lo = np.concatenate([s_lo, s_mid])
        pend_hi = np.concatenate([s_mid, s_hi])

    if total is None:
        total = np.zeros(())
    value = sign * total
    if raise_on_failure and not converged:
        raise QuadratureNotConverged(
            f"adaptive quadrature did not reach tolerance (error {total_err:.3g})",
            estimate=value, error=total_err)
    return QuadResult(value, np.asarray(total_err), np.asarray(converged), int(done_lo.size))


def endpoint_divergence(piece, cuts, *, ratio=0.5, abs_tol=1e-12):
    """Flag components whose truncated integrals do not settle.

    ``cuts`` is a sequence of at least four truncation points approaching a
    singular end point; ``piece(c0, c1)`` returns the per-component integral
    between consecutive cuts.  A component is divergent when two successive
    increments both fail to shrink by ``ratio`` while staying above
    ``abs_tol``.  Returns a boolean mask.
    """
    incs = [np.abs(np.asarray(piece(c0, c1))) for c0, c1 in zip(cuts[:-1], cuts[1:])]
    flag = None
    for prev, cur in zip(incs[-3:-1], incs[-2:]):
        step = (cur >= ratio * prev) & (cur > abs_tol)
        flag = step if flag is None else flag & step
    return flag


def raise_if_divergent(mask, where, what="integral"):
    mask = np.asarray(mask)
    if mask.any():
        raise DivergentIntegral(
            f"{what} diverges at the {where} end point "
            f"({int(mask.sum())} of {mask.size} components)",
            where=where)


def geometric_cuts(endpoint, *, first, factor=1e-3, levels=4):
    """Truncation points approaching ``endpoint`` (finite or infinite)."""
    if math.isinf(endpoint):
        s = 1.0 if endpoint > 0 else -1.0
        return [s * first / factor ** k for k in range(levels)]
    return [endpoint + first * factor ** k for k in range(levels)] if first > 0 else \
        [endpoint - abs(first) * factor ** k for k in range(levels)]
