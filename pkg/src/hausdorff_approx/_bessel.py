"""Vectorised spherical Bessel functions j_0 .. j_{n-1} of one argument array."""

from __future__ import annotations

import numpy as np

_SERIES_MAX = 0.5
_MILLER_EXTRA = 24


def spherical_jn_all(omega, n: int) -> np.ndarray:
    """Return an array of shape ``omega.shape + (n,)`` with j_k(omega), k < n.

    Small arguments use the power series, arguments at least ``n`` use the
    (then stable) upward recurrence and the rest use Miller's downward
    recurrence normalised against j_0 or j_1.
    """
    w = np.abs(np.asarray(omega, dtype=float))
    out = np.empty(w.shape + (n,))
    flat_w = w.ravel()
    flat = out.reshape(-1, n)

    small = flat_w < _SERIES_MAX
    large = flat_w >= n
    mid = ~small & ~large

    if small.any():
        flat[small] = _series(flat_w[small], n)
    if large.any():
        flat[large] = _upward(flat_w[large], n)
    if mid.any():
        flat[mid] = _miller(flat_w[mid], n)
    # j_k is even for even k and odd for odd k.
    neg = np.asarray(omega).ravel() < 0
    if neg.any():
        flat[np.ix_(neg, np.arange(1, n, 2))] *= -1
    return out


def _series(w, n):
    # j_k(w) = w^k / (2k+1)!! * sum_m (-w^2/2)^m / (m! (2k+3)(2k+5)...(2k+2m+1))
    k = np.arange(n)
    z = -0.5 * w * w
    acc = np.ones((w.size, n))
    for m in range(7, 0, -1):
        acc = 1.0 + acc * (z[:, None] / (m * (2 * k + 2 * m + 1)))
    lead = np.cumprod(np.concatenate([np.ones((w.size, 1)),
                                      w[:, None] / (2 * k[1:] + 1)[None, :]], axis=1), axis=1)
    return lead * acc


def _upward(w, n):
    res = np.empty((w.size, n))
    s, c = np.sin(w), np.cos(w)
    res[:, 0] = s / w
    if n > 1:
        res[:, 1] = s / (w * w) - c / w
    for k in range(1, n - 1):
        res[:, k + 1] = (2 * k + 1) / w * res[:, k] - res[:, k - 1]
    return res


def _miller(w, n):
    top = n + _MILLER_EXTRA
    vals = np.empty((w.size, top + 1))
    vals[:, top] = 0.0
    vals[:, top - 1] = 1e-30
    for k in range(top - 1, 0, -1):
        vals[:, k - 1] = (2 * k + 1) / w * vals[:, k] - vals[:, k + 1]
        # Rescale to keep the recurrence in range.
        big = np.abs(vals[:, k - 1]) > 1e250
        if big.any():
            vals[big, k - 1:] *= 1e-250
    s, c = np.sin(w), np.cos(w)
    j0 = s / w
    j1 = s / (w * w) - c / w
    use0 = np.abs(j0) >= np.abs(j1)
    scale = np.where(use0, j0 / np.where(use0, vals[:, 0], 1.0),
                     j1 / np.where(use0, 1.0, vals[:, 1]))
    return vals[:, :n] * scale[:, None]
