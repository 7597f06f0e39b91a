"""Core types: test functions, kernels, scalings, grids and Lp machinery."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from scipy import integrate, optimize

from .errors import (
    ConfigError,
    InvalidExponent,
    InvalidGrid,
    NonInvertibleScaling,
    NonMonotoneScaling,
    NonOddScaling,
    OutOfRange,
    TailNotIntegrable,
)
from .quadrature import integrate_many

ArrayFunc = Callable[[np.ndarray], np.ndarray]


def check_exponent(p) -> float:
    """Normalise a Lebesgue exponent; accepts numbers and the string 'inf'."""
    if isinstance(p, str):
        p = p.strip().lower()
        p = math.inf if p in ("inf", "infinity", "oo") else p
    try:
        p = float(p)
    except (TypeError, ValueError):
        raise InvalidExponent(f"not a Lebesgue exponent: {p!r}") from None
    if math.isnan(p) or p < 1:
        raise InvalidExponent(f"Lebesgue exponent must lie in [1, inf], got {p}")
    return p


def conjugate_exponent(p: float) -> float:
    p = check_exponent(p)
    if p == 1:
        return math.inf
    if math.isinf(p):
        return 1.0
    return p / (p - 1)


@dataclass(frozen=True)
class QuadratureConfig:
    """Tolerances shared by every quadrature in the package.

    ``legendre_order``, ``grading_ratio`` and ``grading_depth`` control the
    piecewise-polynomial mesh used by the oscillatory inner integrals.
    """

    abs_tol: float = 1e-8
    rel_tol: float = 1e-6
    max_subdivisions: int = 2000
    oscillatory_truncation: float = 1e4
    acceleration_terms: int = 40
    legendre_order: int = 12
    grading_ratio: float = 0.35
    grading_depth: float = 1e-9

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ConfigError("tolerances must be positive")
        if self.max_subdivisions < 1 or self.legendre_order < 2:
            raise ConfigError("max_subdivisions >= 1 and legendre_order >= 2 required")
        if not 0 < self.grading_ratio < 1:
            raise ConfigError("grading_ratio must lie in (0, 1)")

    @classmethod
    def oscillatory(cls, **kw):
        """Relaxed tolerances for oscillatory integrals."""
        kw.setdefault("abs_tol", 1e-4)
        kw.setdefault("rel_tol", 1e-4)
        return cls(**kw)

    def with_tol(self, tol):
        return replace(self, abs_tol=tol, rel_tol=min(self.rel_tol, max(tol, 1e-14)))


DEFAULT_QUAD = QuadratureConfig()


@dataclass(frozen=True, eq=False)
class TestFunction:
    """A function on the real line together with what quadrature needs to know.

    ``support`` is an interval outside of which the function is either zero
    (``tail_bound == 0``) or bounded by ``tail_bound * (R / |x|) ** tail_decay``
    with ``R = max(|lo|, |hi|)``.  ``breakpoints`` lists points where the
    function or one of its low derivatives is singular; meshes are graded
    toward them.  ``panel_width`` caps mesh panels for smooth functions that
    still oscillate or vary on a fixed scale.
    """

    __test__ = False  # keep pytest from collecting this class

    eval: ArrayFunc
    support: tuple[float, float]
    label: str
    lp: frozenset = frozenset({1.0, 2.0, math.inf})
    breakpoints: tuple[float, ...] = ()
    tail_bound: float = 0.0
    tail_decay: float = 2.0
    panel_width: float | None = None
    analytic_ft: ArrayFunc | None = None
    catalog_id: str | None = None
    params: dict = field(default_factory=dict)
    continuous: bool = True

    def __call__(self, x):
        return self.eval(np.asarray(x, dtype=float))

    @property
    def radius(self) -> float:
        return max(abs(self.support[0]), abs(self.support[1]))

    @property
    def compact(self) -> bool:
        return self.tail_bound == 0 and all(map(math.isfinite, self.support))

    def scaled(self, c: float) -> "TestFunction":
        c = float(c)
        ft = None if self.analytic_ft is None else (lambda y, g=self.analytic_ft: c * g(y))
        return replace(self, eval=lambda x, g=self.eval: c * g(x), label=f"{c:g}*{self.label}",
                       tail_bound=abs(c) * self.tail_bound, analytic_ft=ft, catalog_id=None)

    def shifted(self, y: float) -> "TestFunction":
        """The translate x -> f(x + y)."""
        y = float(y)
        ft = None
        if self.analytic_ft is not None:
            ft = lambda w, g=self.analytic_ft: np.exp(1j * w * y) * g(w)  # noqa: E731
        lo, hi = self.support
        return replace(self, eval=lambda x, g=self.eval: g(x + y), support=(lo - y, hi - y),
                       breakpoints=tuple(b - y for b in self.breakpoints),
                       label=f"{self.label}(.+{y:g})", analytic_ft=ft, catalog_id=None,
                       tail_bound=self.tail_bound)

    def __add__(self, other: "TestFunction") -> "TestFunction":
        ft = None
        if self.analytic_ft is not None and other.analytic_ft is not None:
            ft = lambda y, f=self.analytic_ft, g=other.analytic_ft: f(y) + g(y)  # noqa: E731
        widths = [w for w in (self.panel_width, other.panel_width) if w]
        return TestFunction(
            eval=lambda x, f=self.eval, g=other.eval: f(x) + g(x),
            support=(min(self.support[0], other.support[0]), max(self.support[1], other.support[1])),
            label=f"{self.label}+{other.label}",
            lp=self.lp & other.lp,
            breakpoints=tuple(sorted(set(self.breakpoints) | set(other.breakpoints))),
            tail_bound=self.tail_bound + other.tail_bound,
            tail_decay=min(self.tail_decay, other.tail_decay),
            panel_width=min(widths) if widths else None,
            analytic_ft=ft,
            continuous=self.continuous and other.continuous,
        )

    def singular_points(self) -> list[float]:
        pts = set(self.breakpoints)
        if self.tail_bound == 0:
            pts.update(b for b in self.support if math.isfinite(b))
        return sorted(pts)


@dataclass(frozen=True, eq=False)
class KernelSpec:
    """Kernel of a Hausdorff operator.

    ``decay_class`` is one of ``'compact'``, ``'power'`` or ``'none'``; for
    power decay ``decay_power`` is the exponent of ``|t|^-k``.
    """

    eval: ArrayFunc
    support: tuple[float, float]
    label: str
    decay_class: str = "compact"
    decay_power: float = 0.0
    total_mass: float | None = None
    breakpoints: tuple[float, ...] = ()

    def __call__(self, t):
        return self.eval(np.asarray(t, dtype=float))


@dataclass(frozen=True, eq=False)
class ScalingSpec:
    """Odd scaling function with an explicit inverse on the positive axis.

    ``positive`` evaluates the scaling for t > 0 and ``positive_inverse`` its
    inverse for u > 0.  Both are extended to negative arguments by oddness.
    The positive branch must be decreasing with range (0, inf).
    """

    positive: ArrayFunc
    positive_inverse: ArrayFunc
    label: str
    witness: tuple[float, ...] = (1e-3, 0.01, 0.1, 0.5, 1.0, 2.0, 10.0, 100.0, 1e3)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.sign(t) * self.positive(np.abs(t))

    def inverse(self, u):
        u = np.asarray(u, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.sign(u) * self.positive_inverse(np.abs(u))


@dataclass(frozen=True)
class GridSpec:
    points: tuple[float, ...]
    role: str = "x"

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 1 or pts.size == 0 or not np.all(np.isfinite(pts)):
            raise InvalidGrid(f"{self.role}-grid must be a non-empty finite sequence")
        if pts.size > 1 and np.any(np.diff(pts) <= 0):
            raise InvalidGrid(f"{self.role}-grid must be strictly increasing")
        if self.role in ("N", "r", "S", "delta") and np.any(pts <= 0):
            raise InvalidGrid(f"{self.role}-grid must be positive")

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.points, dtype=float)


def validate_scaling(a: ScalingSpec, *, strict: bool = True) -> ScalingSpec:
    """Check oddness, monotone decrease on (0, inf), and the inverse round trip.

    Raises :class:`NonOddScaling`, :class:`NonMonotoneScaling` or
    :class:`NonInvertibleScaling` carrying a witness point.
    """
    w = np.asarray(sorted(a.witness), dtype=float)
    with np.errstate(all="ignore"):
        pos = np.asarray(a.positive(w), dtype=float)
    if not np.all(np.isfinite(pos)) or np.any(pos <= 0):
        bad = float(w[~(np.isfinite(pos) & (pos > 0))][0])
        raise NonMonotoneScaling(f"{a.label}: scaling must be positive on (0, inf); fails at t={bad:g}",
                                 witness=bad)
    dif = np.diff(pos)
    if np.any(dif >= 0):
        i = int(np.argmax(dif >= 0))
        raise NonMonotoneScaling(
            f"{a.label}: scaling is not decreasing between t={w[i]:g} and t={w[i + 1]:g}",
            witness=(float(w[i]), float(w[i + 1])))
    if strict:
        full_pos = np.asarray(a(w), dtype=float)
        full_neg = np.asarray(a(-w), dtype=float)
        if not np.allclose(full_neg, -full_pos, rtol=1e-12, atol=0):
            i = int(np.argmax(~np.isclose(full_neg, -full_pos, rtol=1e-12, atol=0)))
            raise NonOddScaling(f"{a.label}: a(-t) != -a(t) at t={w[i]:g}", witness=float(w[i]))
    with np.errstate(all="ignore"):
        back = np.asarray(a.positive_inverse(pos), dtype=float)
    if not np.allclose(back, w, rtol=1e-8, atol=0):
        i = int(np.argmax(~np.isclose(back, w, rtol=1e-8, atol=0)))
        raise NonInvertibleScaling(
            f"{a.label}: inverse round trip fails at t={w[i]:g} (got {back[i]!r})")
    return a


def positive_root_inverse(a: ScalingSpec, u: float) -> float:
    """Invert the positive branch of ``a`` by bracketing, without ``positive_inverse``."""
    if not u > 0 or not math.isfinite(u):
        raise OutOfRange(f"{a.label}: {u!r} is not in the range (0, inf) of |a|")
    g = lambda t: math.log(float(a.positive(np.array([t]))[0])) - math.log(u)  # noqa: E731
    lo, hi = 1.0, 1.0
    for _ in range(400):
        if g(lo) > 0:
            break
        lo *= 0.5
    else:
        raise OutOfRange(f"{a.label}: {u!r} is above the range of |a|")
    for _ in range(400):
        if g(hi) < 0:
            break
        hi *= 2.0
    else:
        raise OutOfRange(f"{a.label}: {u!r} is below the range of |a|")
    return optimize.brentq(g, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)


# ---------------------------------------------------------------------------
# Lp machinery


def _cuts_between(lo, hi, pts):
    return np.asarray(sorted({lo, hi, *[p for p in pts if lo < p < hi]}))


def _refine_sup(func, cuts, per_panel=257):
    """Sup of |func| over the union of panels with a local refinement step."""
    xs = []
    for a, b in zip(cuts[:-1], cuts[1:]):
        xs.append(np.linspace(a, b, per_panel))
    x = np.concatenate(xs)
    v = np.abs(func(x))
    best = float(np.max(v))
    # Refine around the three largest samples.
    order = np.argsort(v)[::-1][:3]
    for i in order:
        a = x[max(i - 1, 0)]
        b = x[min(i + 1, x.size - 1)]
        if b <= a:
            continue
        fine = np.linspace(a, b, 513)
        best = max(best, float(np.max(np.abs(func(fine)))))
        res = optimize.minimize_scalar(lambda s: -abs(float(func(np.array([s]))[0])),
                                       bounds=(a, b), method="bounded",
                                       options={"xatol": 1e-13 * max(1.0, abs(a))})
        best = max(best, -float(res.fun))
    return best


def lp_norm(f, p, q: QuadratureConfig = DEFAULT_QUAD, *, support=None, points=()) -> float:
    """Lp norm of a :class:`TestFunction` (or of a plain callable on ``support``).

    For non-compact test functions the integral over the truncation interval
    is supplemented with the analytic tail bound; a tail that is not
    p-integrable raises :class:`TailNotIntegrable`.
    """
    p = check_exponent(p)
    if isinstance(f, TestFunction):
        lo, hi = f.support if support is None else support
        pts = tuple(f.breakpoints) + tuple(points)
        func = f.eval
        tail_bound, decay, radius = f.tail_bound, f.tail_decay, f.radius
    else:
        if support is None:
            raise InvalidGrid("support is required for plain callables")
        lo, hi = support
        pts = tuple(points)
        func = f
        tail_bound, decay, radius = 0.0, 0.0, 0.0
    if not (math.isfinite(lo) and math.isfinite(hi)):
        if math.isinf(p):
            raise TailNotIntegrable("sup norm over an unbounded support needs a truncation")
        raise TailNotIntegrable(f"{getattr(f, 'label', 'f')}: not p-integrable (p={p:g})")
    cuts = _cuts_between(lo, hi, pts)
    if math.isinf(p):
        return max(_refine_sup(func, cuts), tail_bound)
    tail = 0.0
    if tail_bound > 0:
        if decay * p <= 1:
            raise TailNotIntegrable(
                f"{getattr(f, 'label', 'f')}: tail decays like |x|^-{decay:g}, not {p:g}-integrable")
        tail = 2 * tail_bound ** p * radius / (decay * p - 1)
    res = integrate_many(lambda x, i: np.abs(func(x)) ** p, lo, hi, size=1,
                         points=np.asarray([cuts]), abs_tol=q.abs_tol ** 2, rel_tol=q.rel_tol * 1e-2,
                         max_intervals=q.max_subdivisions)
    return float((res.value[0] + tail) ** (1.0 / p))


def inner_product(f, g, q: QuadratureConfig = DEFAULT_QUAD) -> float:
    """Integral of f(x) g(x) over the intersection of the supports."""
    lo = max(f.support[0], g.support[0])
    hi = min(f.support[1], g.support[1])
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise TailNotIntegrable("inner product over an unbounded common support")
    if hi <= lo:
        return 0.0
    pts = sorted(set(f.breakpoints) | set(g.breakpoints))
    cuts = _cuts_between(lo, hi, pts)
    res = integrate_many(lambda x, i: f.eval(x) * g.eval(x), lo, hi, size=1,
                         points=np.asarray([cuts]), abs_tol=q.abs_tol, rel_tol=q.rel_tol,
                         max_intervals=q.max_subdivisions, raise_on_failure=True)
    return float(res.value[0])


def grid_lp_norm(x, values, p) -> float:
    """Discrete Lp norm of samples on a (possibly non-uniform) grid."""
    p = check_exponent(p)
    v = np.abs(np.asarray(values, dtype=float))
    if math.isinf(p):
        return float(np.max(v))
    return float(integrate.trapezoid(v ** p, np.asarray(x, dtype=float)) ** (1.0 / p))
