"""Command-line entry point: ``swpv <command> [flags]``.

Exit codes: 0 success, 1 a checked inequality or identity failed, 2 usage
error, 3 corrupt cache file.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from pathlib import Path

import mpmath

from . import asymptotics as asy
from . import verification as ver
from .bracket_engine import (
    BracketKey,
    CacheFormatError,
    MemoStore,
    bracket,
    cache_load,
    cache_save,
    estimate_key_count,
    jt_normalize,
    verify_recursion_I,
    verify_recursion_II,
    volume,
)
from .pi_scalar import pi_eval, rational_to_str

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_CORRUPT = 0, 1, 2, 3
DEFAULT_MAX_KEYS = 3_000_000
SUITES = ("recursions", "bounds", "sandwich", "tau-step", "monotone", "growing-n")


class UsageError(Exception):
    pass


class BudgetError(UsageError):
    pass


def _dump(obj) -> str:
    return json.dumps(obj, separators=(",", ":"), sort_keys=False)


# -- shared plumbing -----------------------------------------------------------------


def _parse_d(text: str | None) -> tuple[int, ...]:
    if text is None or text.strip() == "":
        return ()
    try:
        parts = tuple(int(x) for x in text.split(","))
    except ValueError:
        raise UsageError(f"--d must be a comma list of integers, got {text!r}") from None
    if any(x < 0 for x in parts):
        raise UsageError("--d entries must be nonnegative")
    return parts


class Session:
    """Store plus cache file handling for one command run."""

    def __init__(self, args) -> None:
        self.cache_path = args.cache_path
        self.precision = args.precision_bits
        self.max_keys = args.max_keys
        self.store = MemoStore()
        self._loaded = 0
        if self.cache_path and Path(self.cache_path).exists():
            cache_load(self.cache_path, self.store)
            self._loaded = len(self.store)

    def guard(self, targets) -> None:
        targets = list(targets)
        estimate = estimate_key_count(targets)
        if estimate > self.max_keys:
            raise BudgetError(
                f"refusing: about {estimate} memo keys needed for {max(targets)}, "
                f"budget is {self.max_keys} (raise --max-keys to override)"
            )

    def close(self) -> None:
        if not self.cache_path or len(self.store) == self._loaded:
            return
        target = Path(self.cache_path)
        target.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=".swpv-")
        os.close(fd)
        cache_save(self.store, tmp)
        os.replace(tmp, target)


def _numeric(x, bits: int) -> str:
    with mpmath.workprec(bits):
        return mpmath.nstr(pi_eval(x, bits), max(15, int(bits * math.log10(2)) - 5))


def _emit_rows(rows: list[dict], fmt: str) -> str:
    if fmt == "json":
        return _dump(rows)
    if not rows:
        return ""
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        return buf.getvalue().rstrip("\n")
    widths = {k: max(len(k), *(len(str(r[k])) for r in rows)) for k in rows[0]}
    lines = ["  ".join(k.ljust(widths[k]) for k in rows[0])]
    lines += ["  ".join(str(r[k]).ljust(widths[k]) for k in r) for r in rows]
    return "\n".join(lines)


# -- commands ---------------------------------------------------------------------------


def cmd_bracket(args, session: Session) -> int:
    d = _parse_d(args.d)
    g = args.g
    if g is None or g < 1 or 2 * g - 2 + len(d) <= 0:
        raise UsageError(f"unstable key g={g}, n={len(d)}")
    if not d and g < 2:
        raise UsageError("the empty bracket needs g >= 2")
    session.guard([(g, len(d))])
    value = volume(g, 0, session.store) if not d else bracket(BracketKey(g, d), session.store)
    out = value.to_json()
    if args.numeric:
        out["numeric"] = _numeric(value, session.precision)
    print(_dump(out))
    return EXIT_OK


def cmd_volume_table(args, session: Session) -> int:
    g_max, n_max = args.g_max, args.n_max
    if g_max is None or n_max is None or g_max < 1 or n_max < 0:
        raise UsageError("--g-max >= 1 and --n-max >= 0 are required")
    session.guard([(g_max, n_max)])
    rows = []
    for g in range(1, g_max + 1):
        for n in range(0, n_max + 1):
            if 2 * g - 2 + n <= 0:
                continue
            v = volume(g, n, session.store)
            if args.jt:
                v = jt_normalize(g, n, v)
            row = {"g": g, "n": n, "coefficient": rational_to_str(v.coeff), "pi_exponent": v.pi_exp}
            if args.numeric:
                row["numeric"] = _numeric(v, session.precision)
            rows.append(row)
    print(_emit_rows(rows, args.format))
    return EXIT_OK


def _verify_recursions(args, session: Session) -> ver.CheckReport:
    limit = args.max_complexity
    report = ver.CheckReport("recursions", {"max_complexity": limit})
    store = session.store
    for g in range(1, limit // 2 + 2):
        for n in range(0, limit - (2 * g - 2) + 1):
            if 2 * g - 2 + n <= 0:
                continue
            for d in ver._degree_vectors(n, g - 1):
                if n or g >= 2:
                    report.add((g, "II") + d, verify_recursion_II(g, d, store), mpmath.mpf(0))
                if g >= 2:
                    report.add((g, "I") + d, verify_recursion_I(g, d, store), mpmath.mpf(0))
    return report


def cmd_verify(args, session: Session) -> int:
    suite = args.suite
    store = session.store
    g_max = args.g_max
    reports = []
    if suite == "recursions":
        reports.append(_verify_recursions(args, session))
    elif suite == "bounds":
        g_max = g_max or 6
        session.guard([(g_max + 1, args.n_max + 2)])
        reports.append(ver.check_monotone_bounds(g_max, store))
        reports.append(ver.check_ratio_band(g_max, args.n_max, store))
        reports.append(ver.check_genus_drop(g_max, args.n_max, store))
    elif suite == "sandwich":
        g_max = g_max or 10
        n = args.n or 1
        grid = [float(x) for x in args.lengths.split(",")]
        genera = range(args.g_min, g_max + 1)
        c = args.c_lower
        if c is None:
            c = ver.fit_sandwich_constant(n, genera, grid, store)
        for g in genera:
            reports.append(ver.check_sinh_sandwich(g, n, grid, c, store))
    elif suite == "tau-step":
        reports.append(ver.check_tau_step_bounds(g_max or 8, args.n_max, store))
    elif suite == "monotone":
        reports.append(ver.check_eventual_monotone(args.n or 0, g_max or 20, store))
    elif suite == "growing-n":
        genera = [int(x) for x in args.genera.split(",")]
        n_of_g = _floor_cube_root if args.n is None else (lambda g: args.n)
        reports.append(ver.check_growing_n(genera, n_of_g, None, store))
    if args.format == "json":
        print(_dump([r.to_json() for r in reports]))
    else:
        print("\n".join(r.to_table() for r in reports))
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


def _floor_cube_root(g: int) -> int:
    m = 0
    while (m + 1) ** 3 <= g:
        m += 1
    return m


_CLOSED = {
    ("a", 1): asy.coeff_a1, ("a", 2): asy.coeff_a2,
    ("b", 1): asy.coeff_b1, ("b", 2): asy.coeff_b2,
    ("c", 2): asy.coeff_c2, ("d", 1): asy.coeff_d1,
}
_KIND = {"a": asy.RatioKind.ADD_POINT, "b": asy.RatioKind.GENUS_DROP,
         "e": asy.RatioKind.BRACKET_RATIO, "d": asy.RatioKind.VOLUME_OVER_C}


_CORRECTED = {
    ("a", 2): asy.coeff_a2_corrected, ("b", 2): asy.coeff_b2_corrected,
    ("c", 2): asy.coeff_c2_corrected, ("d", 1): asy.coeff_d1_corrected,
}


def _closed_form(kind: str, n: int, d: tuple[int, ...], order: int, variant: str, corrected: bool = False):
    if kind == "e":
        if order == 1:
            return asy.coeff_e1(n, sum(d))
        if order == 2:
            padded = d + (0,) * (n - len(d))
            if corrected:
                return asy.coeff_e2_corrected(n, sum(d), padded.count(0))
            return asy.coeff_e2(n, sum(d), padded.count(0), variant)
        return None
    fn = (_CORRECTED.get((kind, order)) if corrected else None) or _CLOSED.get((kind, order))
    return fn(n) if fn else None


def cmd_coeffs(args, session: Session) -> int:
    kind, n, order = args.kind, args.n, args.order
    if n is None or n < 0 or order < 1:
        raise UsageError("--n >= 0 and --order >= 1 are required")
    d = _parse_d(args.d)
    if kind == "e" and (len(d) > n or n < 1):
        raise UsageError("e needs 1 <= len(d) <= n")
    g_lo, g_hi = args.g_from, args.g_max or 40
    fit_order = args.fit_order or max(order + 3, 4)
    targets = {"a": [(g_hi, n + 1)], "b": [(g_hi - 1, n + 2), (g_hi, n)], "e": [(g_hi, n)],
               "d": [(g_hi, n)], "c": [(g_hi + 1, n), (g_hi, n + 2)]}[kind]
    session.guard(targets)
    out = {"kind": kind, "n": n, "d": list(d), "order": order, "g_range": [g_lo, g_hi]}
    corrected = args.closed_form == "corrected"
    closed = _closed_form(kind, n, d, order, args.e2_variant, corrected)
    out["closed_form_source"] = args.closed_form
    if closed is not None:
        out["closed_form"] = closed.to_json()
        out["closed_form_numeric"] = _numeric(closed, args.precision_bits)
    if kind == "c":
        out["closed_form_assembled"] = asy.assemble_genus_step(n, corrected=corrected)[2].to_json()
        print(_dump(out))
        return EXIT_OK
    gs = list(range(g_lo, g_hi + 1))
    if kind == "d":
        values = asy.ratio_sequence(_KIND[kind], n, (), g_lo, g_hi, session.store, args.precision_bits)
        fit = asy.fit_inverse_g_expansion(values, gs, fit_order, args.precision_bits)
    else:
        values = asy.ratio_sequence(_KIND[kind], n, d, g_lo, g_hi, session.store, args.precision_bits)
        fit = asy.fit_inverse_g_expansion(values, gs, fit_order, args.precision_bits, constant=1)
    if order > len(fit.coefficients):
        raise UsageError("fit order is below the requested coefficient order")
    fitted = fit.coefficients[order - 1]
    if kind == "d":
        # the sequence tends to C, and d is relative to it
        with mpmath.workprec(args.precision_bits):
            fitted = fitted / fit.constant
    out["fitted"] = mpmath.nstr(fitted, 20)
    out["fit"] = fit.to_json()
    if closed is not None:
        ref = pi_eval(closed, args.precision_bits)
        out["deviation"] = mpmath.nstr(abs(fitted - ref) / abs(ref), 10) if ref else mpmath.nstr(abs(fitted), 10)
    if kind == "e" and order == 2:
        padded = d + (0,) * (n - len(d))
        chosen, errs = asy.select_e2_variant(fitted, n, sum(d), padded.count(0), args.precision_bits)
        out["e2_selected"] = chosen
        out["e2_deviation"] = {k: mpmath.nstr(v, 10) for k, v in errs.items()}
    print(_dump(out))
    return EXIT_OK


def cmd_constant(args, session: Session) -> int:
    n, g_max, order = args.n or 0, args.g_max or 40, args.order
    session.guard([(g_max, n)])
    try:
        est = asy.estimate_constant_C(n, g_max, order, session.store, args.precision_bits, g_min=args.g_from)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    out = est.to_json()
    out["agreeing_digits"] = round(est.agreeing_digits(), 3)
    print(_dump(out))
    return EXIT_OK


# -- argument parsing -----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--precision-bits", type=int, default=256)
    common.add_argument("--cache-path", default=os.environ.get("SWPV_CACHE"))
    common.add_argument("--format", choices=("json", "csv", "text"), default="json")
    common.add_argument("--max-keys", type=int, default=DEFAULT_MAX_KEYS,
                        help="refuse runs whose estimated memo size exceeds this")
    common.add_argument("--numeric", action="store_true", help="add a decimal evaluation")

    parser = argparse.ArgumentParser(prog="swpv", description="Exact super Weil-Petersson volumes.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bracket", parents=[common], help="one exact bracket value")
    p.add_argument("--g", type=int, required=True)
    p.add_argument("--d", default="", help="comma list of exponents; empty for no points")

    p = sub.add_parser("volume-table", parents=[common], help="V_{g,n} for all g, n in range")
    p.add_argument("--g-max", type=int, required=True)
    p.add_argument("--n-max", type=int, required=True)
    p.add_argument("--jt", action="store_true", help="scale by 2^(1-g-n)")

    p = sub.add_parser("verify", parents=[common], help="run an inequality or identity suite")
    p.add_argument("suite")
    p.add_argument("--g-max", type=int)
    p.add_argument("--g-min", type=int, default=4)
    p.add_argument("--n", type=int)
    p.add_argument("--n-max", type=int, default=6)
    p.add_argument("--max-complexity", type=int, default=12)
    p.add_argument("--lengths", default="0,0.5,1,2,4")
    p.add_argument("--c-lower", type=float)
    p.add_argument("--genera", default="16,25,36")

    p = sub.add_parser("coeffs", parents=[common], help="closed-form and fitted 1/g coefficients")
    p.add_argument("kind", choices=("a", "b", "c", "d", "e"))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", default="")
    p.add_argument("--order", type=int, default=1)
    p.add_argument("--fit-order", type=int)
    p.add_argument("--g-from", type=int, default=15)
    p.add_argument("--g-max", type=int)
    p.add_argument("--e2-variant", choices=asy.E2_VARIANTS, default="theorem")
    p.add_argument("--closed-form", choices=("reference", "corrected"), default="reference",
                   help="compare against the reference order-2 forms or the ones the exact tables fit")

    p = sub.add_parser("constant", parents=[common], help="extrapolate the universal constant")
    p.add_argument("--n", type=int, default=0)
    p.add_argument("--g-max", type=int, default=40)
    p.add_argument("--g-from", type=int)
    p.add_argument("--order", type=int, default=2)
    return parser


_COMMANDS = {"bracket": cmd_bracket, "volume-table": cmd_volume_table, "verify": cmd_verify,
             "coeffs": cmd_coeffs, "constant": cmd_constant}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    if args.precision_bits < 64:
        print("error: --precision-bits must be at least 64", file=sys.stderr)
        return EXIT_USAGE
    if args.command == "verify" and args.suite not in SUITES:
        print(f"error: unknown suite {args.suite!r}; choose from {', '.join(SUITES)}", file=sys.stderr)
        return EXIT_USAGE
    try:
        session = Session(args)
    except CacheFormatError as exc:
        print(f"error: corrupt cache {args.cache_path}: {exc}", file=sys.stderr)
        return EXIT_CORRUPT
    try:
        status = _COMMANDS[args.command](args, session)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    session.close()
    return status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
