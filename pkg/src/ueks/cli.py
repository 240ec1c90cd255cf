"""Command-line interface.

Subcommands: ``test``, ``critvals``, ``ldrate``, ``varfun``, ``efficiency``
and ``f0``. Every subcommand takes ``--format {json,csv,pretty}``; machine
formats print numbers with 10 significant digits, so identical invocations
produce identical bytes.

Exit codes: 0 success, 2 input error, 3 tied data, 4 numerical failure.
"""

import argparse
import csv
import io
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .distributions import parse_distribution
from .efficiency import ALTERNATIVES, local_efficiency
from .errors import DomainError, NumericalError, PrecisionError, UEKSError
from .kernels import get_family, grid_interval, variance_at
from .large_deviation import kolmogorov_f0, ld_leading_coeff
from .montecarlo import (NullSimulation, critical_value, empirical_ld_rate, p_value,
                         simulate_null)
from .statistics import SIDES, TEST_IDS, Sample, compute_statistic

DEFAULT_ALPHAS = (0.10, 0.05, 0.01)
REFERENCE_PAIRS = (("desu", "weibull"), ("desu", "makeham"),
               ("symmetry-h", "normal-shift"), ("bh", "normal-shift"))


class ParseError(DomainError):
    """Unreadable data file."""


# --- formatting -------------------------------------------------------------

def num(x):
    """Round to 10 significant digits for machine output."""
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    x = float(x)
    if math.isnan(x):
        return None
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return float(f"{x:.10g}")


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (float, int, np.floating, np.integer, np.bool_)):
        return num(obj)
    return obj


def _cell(v):
    v = num(v) if isinstance(v, (float, int, np.floating, np.integer)) else v
    if v is None:
        return "nan"
    if isinstance(v, float):
        return f"{v:.10g}"
    if isinstance(v, (list, tuple)):
        return ";".join(str(x) for x in v)
    return str(v)


def emit(fmt, record, columns=None, rows=None, out=None):
    """Write ``record`` (json) or ``rows`` under ``columns`` (csv / pretty)."""
    out = out or sys.stdout
    if fmt == "json":
        out.write(json.dumps(_clean(record), indent=2) + "\n")
        return
    if rows is None:
        columns = list(record.keys())
        rows = [record]
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_cell(r.get(c)) for c in columns])
        out.write(buf.getvalue())
        return
    table = [[str(c) for c in columns]]
    for r in rows:
        table.append([_pretty(r.get(c)) for c in columns])
    widths = [max(len(row[i]) for row in table) for i in range(len(columns))]
    for k, row in enumerate(table):
        out.write("  ".join(s.rjust(w) for s, w in zip(row, widths)).rstrip() + "\n")
        if k == 0:
            out.write("  ".join("-" * w for w in widths) + "\n")


def _pretty(v):
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.6g}"
    if isinstance(v, dict):
        return ", ".join(f"{k}={_pretty(x)}" for k, x in v.items())
    if isinstance(v, (list, tuple)):
        return "; ".join(str(x) for x in v) if v else "-"
    return str(v)


# --- data input ---------------------------------------------------------------

def read_data(path, column=None):
    """Observations from a text file: one number per line, or a CSV column.

    ``column`` is a header name or a zero-based index. Blank lines and lines
    starting with ``#`` are skipped.
    """
    try:
        fh = sys.stdin if path == "-" else open(path, newline="")
    except OSError as exc:
        raise ParseError(f"cannot open {path}: {exc.strerror}") from None
    with fh:
        lines = fh.read().splitlines()
    values = []
    if column is None:
        for lineno, line in enumerate(lines, 1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            try:
                values.append(float(s))
            except ValueError:
                raise ParseError(f"{path}, line {lineno}: not a number: {s!r}") from None
        return values
    rows = list(csv.reader(lines))
    idx, start = None, 0
    if column.isdigit():
        idx = int(column)
    else:
        if not rows or column not in rows[0]:
            raise ParseError(f"{path}: no column named {column!r}")
        idx, start = rows[0].index(column), 1
    for lineno, row in enumerate(rows[start:], start + 1):
        if not row or (row[0].startswith("#")):
            continue
        if idx >= len(row):
            raise ParseError(f"{path}, line {lineno}: missing column {column}")
        try:
            values.append(float(row[idx]))
        except ValueError:
            if lineno == 1 and column.isdigit():
                continue  # header line
            raise ParseError(f"{path}, line {lineno}: not a number: {row[idx]!r}") from None
    return values


# --- simulation cache ------------------------------------------------------------

def cached_simulation(test_id, n, reps, seed, cache_dir=None, null=None):
    """``simulate_null`` memoized as ``.npz`` files under ``cache_dir``."""
    if cache_dir is None:
        return simulate_null(test_id, n, reps, seed, null=null)
    tag = (null.descriptor if null is not None else get_family(test_id).null.descriptor)
    safe = tag.replace(":", "_")
    path = os.path.join(cache_dir, f"{test_id}-n{n}-r{reps}-s{seed}-{safe}-v{__version__}.npz")
    if os.path.exists(path):
        with np.load(path) as z:
            plus, minus = z["plus"], z["minus"]
        return NullSimulation(test_id, n, reps, seed, tag, plus, minus,
                              np.sort(np.maximum(plus, minus)))
    sim = simulate_null(test_id, n, reps, seed, null=null)
    os.makedirs(cache_dir, exist_ok=True)
    tmp = path + f".{os.getpid()}.tmp.npz"
    np.savez(tmp, plus=sim.plus, minus=sim.minus)
    os.replace(tmp, path)
    return sim


# --- subcommands -----------------------------------------------------------------

def _criticals(sim, alphas, side):
    out = {}
    for a in alphas:
        try:
            out[f"{a:g}"] = critical_value(sim, a, side)
        except PrecisionError:
            out[f"{a:g}"] = math.nan
    return out


def cmd_test(args):
    values = read_data(args.data, args.column)
    sample = Sample.from_values(values, jitter=args.jitter)
    null = parse_distribution(args.null) if args.null else None
    res = compute_statistic(args.test, sample, args.side, center=args.center, null=null)
    sim = cached_simulation(args.test, sample.n, args.reps, args.seed, args.cache_dir, null)
    crit = _criticals(sim, DEFAULT_ALPHAS, args.side)
    record = {
        "test": args.test, "side": args.side, "n": res.n,
        "statistic": res.value, "argmax_t": res.argmax_t,
        "p_value": p_value(sim, res.value, args.side),
        "critical_values": crit, "reps": args.reps, "seed": args.seed,
    }
    if args.format == "csv":
        flat = {k: v for k, v in record.items() if k != "critical_values"}
        flat.update({f"crit_{k}": v for k, v in crit.items()})
        emit("csv", flat)
    else:
        emit(args.format, record)


def cmd_critvals(args):
    alphas = args.alpha or list(DEFAULT_ALPHAS)
    sim = cached_simulation(args.test, args.n, args.reps, args.seed, args.cache_dir)
    crit = {f"{a:g}": critical_value(sim, a, args.side) for a in alphas}
    record = {"test": args.test, "n": args.n, "reps": args.reps, "seed": args.seed,
              "side": args.side, "criticals": crit}
    rows = [{"alpha": float(a), "critical": v} for a, v in crit.items()]
    emit(args.format, record, ["alpha", "critical"], rows)


def _int_list(text):
    try:
        return [int(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a list of integers: {text!r}") from None


def cmd_ldrate(args):
    est = empirical_ld_rate(args.test, args.a, args.n_grid, args.reps, args.seed, args.side)
    rows = est.rows()
    record = {"test": args.test, "a": est.a, "reps": est.reps, "seed": est.seed,
              "side": args.side, "rate_theory": est.rate_theory, "rows": rows,
              "flags": list(est.flags)}
    if est.f0 is not None:
        record["f0"] = est.f0
    emit(args.format, record, ["n", "exceedances", "p_hat", "rate_hat", "rate_theory"], rows)


def cmd_varfun(args):
    fam = get_family(args.test)
    lo, hi = grid_interval(fam)
    lo = lo if args.lo is None else args.lo
    hi = hi if args.hi is None else args.hi
    t = np.linspace(lo, hi, args.points)
    v = np.asarray(variance_at(fam, t), dtype=float)
    rate = ld_leading_coeff(fam)
    summary = {"t_star": rate.argmax_t, "phi0_sq": rate.phi0_sq,
               "leading_coeff": rate.leading_coeff,
               "grid_argmax": float(t[int(np.argmax(v))]), "grid_max": float(v.max())}
    rows = [{"t": a, "sigma_sq": b} for a, b in zip(t, v)]
    if args.format == "json":
        emit("json", {"test": args.test, "summary": summary,
                      "t": t.tolist(), "sigma_sq": v.tolist()})
    elif args.format == "csv":
        emit("csv", None, ["t", "sigma_sq"], rows)
        if args.summary:
            with open(args.summary, "w") as fh:
                fh.write(json.dumps(_clean({"test": args.test, **summary}), indent=2) + "\n")
    else:
        emit("pretty", None, ["t_star", "phi0_sq", "leading_coeff"], [summary])


def cmd_efficiency(args):
    if args.test or args.alt:
        tests = args.test or ["desu"]
        alts = args.alt or ["weibull"]
        pairs = [(t, a) for t in tests for a in alts]
    else:
        pairs = list(REFERENCE_PAIRS)
    rows = []
    for t, a in pairs:
        r = local_efficiency(t, a)
        rows.append({"test": t, "alternative": a, "slope_coeff": r.slope_coeff,
                     "kl_coeff": r.kl_coeff, "efficiency": r.efficiency,
                     "flags": list(r.flags)})
    emit(args.format, {"rows": rows},
         ["test", "alternative", "slope_coeff", "kl_coeff", "efficiency", "flags"], rows)


def cmd_f0(args):
    if args.grid:
        a_list = [k / (args.grid + 1) for k in range(1, args.grid + 1)]
    else:
        a_list = args.a
    if not a_list:
        raise DomainError("give --a values or --grid N")
    rows = []
    for a in a_list:
        f = kolmogorov_f0(a)
        rows.append({"a": a, "f0": f, "ratio_to_2a2": f / (2 * a * a)})
    emit(args.format, {"rows": rows}, ["a", "f0", "ratio_to_2a2"], rows)


# --- parser ----------------------------------------------------------------------

def _prob(text):
    x = float(text)
    if not 0.0 < x < 1.0:
        raise argparse.ArgumentTypeError(f"must lie in (0, 1): {text}")
    return x


def build_parser():
    p = argparse.ArgumentParser(prog="ueks", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, fmt="json"):
        sp.add_argument("--format", choices=("json", "csv", "pretty"), default=fmt)

    sp = sub.add_parser("test", help="run a test on a data file")
    sp.add_argument("data", help="data file ('-' for stdin)")
    sp.add_argument("--test", required=True, choices=TEST_IDS)
    sp.add_argument("--side", choices=SIDES, default="two-sided")
    sp.add_argument("--reps", type=int, default=10_000)
    sp.add_argument("--seed", type=int, default=1)
    sp.add_argument("--column", help="CSV column name or zero-based index")
    sp.add_argument("--jitter", action="store_true",
                    help="break ties deterministically instead of failing")
    sp.add_argument("--center", action="store_true",
                    help="polya: subtract the sample mean (changes the null distribution)")
    sp.add_argument("--null", help="df for max-kernel/kolmogorov, e.g. unif:0:1")
    sp.add_argument("--cache-dir")
    common(sp)
    sp.set_defaults(func=cmd_test)

    sp = sub.add_parser("critvals", help="simulated critical values")
    sp.add_argument("--test", required=True, choices=TEST_IDS)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--reps", type=int, default=10_000)
    sp.add_argument("--seed", type=int, default=1)
    sp.add_argument("--alpha", type=_prob, action="append")
    sp.add_argument("--side", choices=SIDES, default="two-sided")
    sp.add_argument("--cache-dir")
    common(sp)
    sp.set_defaults(func=cmd_critvals)

    sp = sub.add_parser("ldrate", help="empirical large-deviation rates")
    sp.add_argument("--test", required=True, choices=TEST_IDS)
    sp.add_argument("--a", type=float, required=True)
    sp.add_argument("--n-grid", type=_int_list, required=True, help="e.g. 40,80,160")
    sp.add_argument("--reps", type=int, default=10_000)
    sp.add_argument("--seed", type=int, default=1)
    sp.add_argument("--side", choices=SIDES, default="two-sided")
    common(sp, "csv")
    sp.set_defaults(func=cmd_ldrate)

    sp = sub.add_parser("varfun", help="variance function on a grid")
    sp.add_argument("--test", required=True, choices=TEST_IDS)
    sp.add_argument("--lo", type=float)
    sp.add_argument("--hi", type=float)
    sp.add_argument("--points", type=int, default=601)
    sp.add_argument("--summary", help="with --format csv: also write the JSON summary here")
    common(sp, "csv")
    sp.set_defaults(func=cmd_varfun)

    sp = sub.add_parser("efficiency", help="local Bahadur efficiencies")
    sp.add_argument("--test", action="append", choices=TEST_IDS)
    sp.add_argument("--alt", action="append", choices=sorted(ALTERNATIVES))
    common(sp, "csv")
    sp.set_defaults(func=cmd_efficiency)

    sp = sub.add_parser("f0", help="Kolmogorov's rate f0(a)")
    sp.add_argument("--a", type=float, nargs="+")
    sp.add_argument("--grid", type=int, help="N equally spaced a in (0, 1)")
    common(sp, "csv")
    sp.set_defaults(func=cmd_f0)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except UEKSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ArithmeticError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return NumericalError.exit_code
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
