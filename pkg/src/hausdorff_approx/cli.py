"""Command-line interface: ``haus {apply,approximate,study,modulus,bounds}``.

Every subcommand writes CSV (12 significant digits, header row) to stdout
or ``--out``.  Settings may come from a ``key = value`` file given with
``--config``; flags on the command line override it.  Exit status is 0 on
success, 2 for configuration errors and 3 for numerical failures.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import math
import sys

import numpy as np

from . import functions, operators
from .bounds import theorem1_rhs, theorem2_rhs
from .core import QuadratureConfig, check_exponent
from .errors import ConfigError, NumericalFailure
from .experiments import (
    DEFAULT_N_LADDER,
    approximate_identity_study,
    bellman_divergence_demo,
    convergence_study,
    recovery_study,
)
from .fourier import adjoint_variant_approximant, function_recovery, truncated_approximant
from .moduli import modulus_analytic, modulus_estimate, modulus_function, trivial_cap

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

_QUAD_FIELDS = {f.name: f.type for f in dataclasses.fields(QuadratureConfig)}

_DEFAULTS = {
    "operator": "",
    "function": "tent",
    "alpha": "1",
    "p": "inf",
    "N": ",".join(str(n) for n in DEFAULT_N_LADDER),
    "target": "adjoint",
    "x": "0.5,1,2",
    "delta": "0.001,0.01,0.1,1",
    "S": "4,16,64,256,1024",
    "study": "convergence",
}


def _fmt(v) -> str:
    if v is None or (isinstance(v, str) and v == ""):
        return ""
    if isinstance(v, str):
        return v
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return "%.12g" % v


def _write(rows, header, out):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    text = buf.getvalue()
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def read_config(path: str) -> dict:
    """Parse a flat ``key = value`` file; ``#`` starts a comment."""
    settings = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from None
    for num, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"{path}:{num}: expected 'key = value'")
        settings[key.strip()] = value.strip()
    return settings


def _floats(text: str, what: str) -> list[float]:
    try:
        vals = [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"{what} must be a comma-separated list of numbers, got {text!r}") from None
    if not vals:
        raise ConfigError(f"{what} is empty")
    return vals


def _float(text: str, what: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"{what} must be a number, got {text!r}") from None


def _quadrature(settings: dict) -> QuadratureConfig:
    kw = {}
    for key, typ in _QUAD_FIELDS.items():
        if key in settings:
            cast = int if typ in (int, "int") else float
            try:
                kw[key] = cast(settings[key])
            except ValueError:
                raise ConfigError(f"{key} must be numeric, got {settings[key]!r}") from None
    q = QuadratureConfig(**kw)
    if settings.get("tol") is not None:
        q = q.with_tol(_float(settings["tol"], "tol"))
    return q


def _settings(args) -> dict:
    merged = dict(_DEFAULTS)
    if args.config:
        merged.update(read_config(args.config))
    for key, value in vars(args).items():
        if key in ("command", "config") or value is None:
            continue
        merged[key] = value
    unknown = set(merged) - set(_DEFAULTS) - set(_QUAD_FIELDS) - {"out", "tol"}
    if unknown:
        raise ConfigError(f"unknown settings: {sorted(unknown)}")
    check_exponent(merged["p"])
    _float(merged["alpha"], "alpha")
    return merged


def _operator(s, default="cesaro"):
    return operators.from_name(s["operator"] or default, _float(s["alpha"], "alpha"))


# ---------------------------------------------------------------------------
# Subcommands


def cmd_apply(s: dict) -> int:
    op = _operator(s)
    f = functions.from_name(s["function"])
    q = _quadrature(s)
    xs = np.asarray(_floats(s["x"], "x"))
    if s["target"] == "forward":
        vals = operators.hausdorff_apply(op, f, xs, q)
    elif s["target"] == "adjoint":
        vals = operators.adjoint_apply(op, f, xs, q)
    else:
        raise ConfigError("apply supports --target adjoint or forward")
    _write(zip(xs, vals), ["x", "value"], s.get("out"))
    return 0


def cmd_approximate(s: dict) -> int:
    op = _operator(s)
    f = functions.from_name(s["function"])
    q = _quadrature(s)
    xs = np.asarray(_floats(s["x"], "x"))
    target = s["target"]
    if target == "adjoint":
        ref = operators.adjoint_apply(op, f, xs, q)
        build = truncated_approximant
    elif target == "forward":
        ref = operators.hausdorff_apply(op, f, xs, q)
        build = adjoint_variant_approximant
    elif target == "recover":
        ref = f.eval(xs)
        build = function_recovery
    else:
        raise ConfigError("target must be adjoint, forward or recover")
    rows = []
    for N in _floats(s["N"], "N"):
        res = build(op, f, N, xs, q)
        tails = res.diagnostics["tail_error_estimate"]
        for x, v, r, tail in zip(xs, res.values, ref, tails):
            rows.append((x, N, v, r, abs(v - r), tail))
    _write(rows, ["x", "N", "approximant", "target", "abs_error", "tail_error_estimate"], s.get("out"))
    return 0


def cmd_study(s: dict) -> int:
    f = functions.from_name(s["function"])
    q = _quadrature(s)
    p = check_exponent(s["p"])
    kind = s["study"]
    if kind == "bellman":
        cap = trivial_cap(f, math.inf, q)
        omega = modulus_function(f, math.inf, q=q, cap=cap)
        pairs = bellman_divergence_demo(_floats(s["S"], "S"), omega, q, op=_operator(s, "bellman"),
                                       cap=cap)
        _write([(S, "", b, "", "", "") for S, b in pairs],
               ["S", "error", "bound", "log_ratio", "fitted_slope", "predicted_slope"], s.get("out"))
        return 0
    ladder = _floats(s["N"], "N")
    if kind == "fejer":
        report = approximate_identity_study(f, p, ladder, q)
    elif kind == "convergence":
        op = _operator(s)
        if s["target"] == "recover":
            report = recovery_study(op, f, ladder, None, q)
        else:
            report = convergence_study(op, f, s["target"], p, ladder, q)
    else:
        raise ConfigError("study must be convergence, fejer or bellman")
    ratios = report.log_corrected_ratio or [math.nan] * len(ladder)
    rows = [(n, e, b, r, "", "") for n, e, b, r in
            zip(report.n_ladder, report.errors, report.bound_values, ratios)]
    rows.append(("fit", "", "", "", report.fitted_slope, report.predicted_slope))
    _write(rows, [report.ladder_name, "error", "bound", "log_ratio", "fitted_slope", "predicted_slope"],
           s.get("out"))
    return 0


def cmd_modulus(s: dict) -> int:
    f = functions.from_name(s["function"])
    q = _quadrature(s)
    p = check_exponent(s["p"])
    rows = []
    for d in _floats(s["delta"], "delta"):
        est = modulus_estimate(f, d, p, q)
        try:
            exact = modulus_analytic(f, d, p).value
        except ConfigError:
            exact = math.nan
        rows.append((d, est.value, exact, est.error))
    _write(rows, ["delta", "estimate", "analytic", "grid_error"], s.get("out"))
    return 0


def cmd_bounds(s: dict) -> int:
    op = _operator(s)
    f = functions.from_name(s["function"])
    q = _quadrature(s)
    p = check_exponent(s["p"])
    cap = trivial_cap(f, p, q)
    omega = modulus_function(f, p, q=q, cap=cap)
    rows = []
    for N in _floats(s["N"], "N"):
        rep = theorem2_rhs(op, omega, N, q, cap=cap) if math.isinf(p) else \
            theorem1_rhs(op, omega, N, p, q, cap=cap)
        rows.append((N, rep.term1, rep.term2, rep.total, rep.normalizer, rep.bound))
    _write(rows, ["N", "term1", "term2", "total", "normalizer", "bound"], s.get("out"))
    return 0


COMMANDS = {
    "apply": cmd_apply,
    "approximate": cmd_approximate,
    "study": cmd_study,
    "modulus": cmd_modulus,
    "bounds": cmd_bounds,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="haus", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="key = value settings file")
        sp.add_argument("--operator", help="cesaro, bellman or riemann_liouville")
        sp.add_argument("--function", help="catalog function, e.g. tent or cusp:0.5")
        sp.add_argument("--alpha", help="Riemann-Liouville order")
        sp.add_argument("--p", help="Lebesgue exponent or inf")
        sp.add_argument("--N", help="comma-separated truncation (or r) ladder")
        sp.add_argument("--target", choices=("adjoint", "forward", "recover"))
        sp.add_argument("--x", help="comma-separated evaluation points")
        sp.add_argument("--delta", help="comma-separated moduli arguments")
        sp.add_argument("--S", help="comma-separated truncation ladder for the bellman study")
        sp.add_argument("--study", choices=("convergence", "fejer", "bellman"))
        sp.add_argument("--tol", help="absolute quadrature tolerance")
        sp.add_argument("--out", help="output CSV path (default stdout)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        settings = _settings(args)
        return COMMANDS[args.command](settings)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
