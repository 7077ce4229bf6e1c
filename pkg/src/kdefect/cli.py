"""Command-line front end.

Exit codes: 0 success, 2 input error, 3 non-unitary factor, 4 disagreement
between two routes (method mismatch or failed verification), 5 size guard.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import bounds
from .checks import run_suite
from .engine import (
    DefectReport,
    FactorList,
    GuardError,
    NonUnitaryError,
    dim_mspace_direct,
    dim_mspace_kron,
    subset_key,
)
from .matrix import fourier, matrix_from_json

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NON_UNITARY = 3
EXIT_DISAGREE = 4
EXIT_GUARD = 5

BENCH_FIELDS = [
    "sizes",
    "seed",
    "dim_direct",
    "dim_decomposed",
    "t_direct",
    "t_decomposed",
    "min_gap_ratio",
    "agree",
]


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_INPUT):
        super().__init__(message)
        self.code = code


def parse_factor_file(path) -> FactorList:
    """Read a JSON matrix object, or an array of them, into a FactorList."""
    try:
        obj = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise CliError(f"{path}: no such file") from None
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"{path}: cannot read JSON ({exc})") from None
    items = obj if isinstance(obj, list) else [obj]
    if not items:
        raise CliError(f"{path}: empty factor list")
    mats = []
    for k, item in enumerate(items, start=1):
        try:
            mats.append(matrix_from_json(item))
        except ValueError as exc:
            raise CliError(f"{path}: factor {k}: {exc}") from None
    try:
        return FactorList(mats)
    except NonUnitaryError as exc:
        raise CliError(f"{path}: {exc}", EXIT_NON_UNITARY) from None
    except ValueError as exc:
        raise CliError(f"{path}: {exc}") from None


def parse_sizes(text: str) -> tuple[int, ...]:
    try:
        sizes = tuple(int(tok) for tok in text.split(",") if tok.strip())
    except ValueError:
        raise CliError(f"bad size list {text!r}") from None
    if not sizes or any(n < 1 for n in sizes):
        raise CliError(f"bad size list {text!r}")
    return sizes


def _factors_from_args(args, seed=None) -> FactorList:
    if args.factors:
        return parse_factor_file(args.factors)
    if not args.sizes:
        raise CliError("give --factors PATH or --sizes LIST")
    sizes = parse_sizes(args.sizes[0] if isinstance(args.sizes, list) else args.sizes)
    if args.haar:
        return FactorList.haar(sizes, args.seed if seed is None else seed)
    if args.fourier:
        return FactorList([fourier(n) for n in sizes])
    raise CliError("--sizes needs --haar or --fourier")


def _jsonable(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return _jsonable(float(obj))
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _dump(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def _text(obj, indent: int = 0) -> str:
    lines = []
    for k, v in obj.items():
        if isinstance(v, dict):
            lines.append(" " * indent + f"{k}:")
            lines.append(_text(v, indent + 2))
        else:
            lines.append(" " * indent + f"{k}: {v}")
    return "\n".join(lines)


def _emit(args, payload: dict) -> None:
    if args.format == "text":
        out = _text(_jsonable(payload)) + "\n"
    elif args.format == "csv":
        buf = io.StringIO()
        flat = {k: v for k, v in _jsonable(payload).items() if not isinstance(v, (dict, list))}
        w = csv.DictWriter(buf, fieldnames=list(flat), lineterminator="\n")
        w.writeheader()
        w.writerow(flat)
        out = buf.getvalue()
    else:
        out = _dump(payload)
    _write(args.out, out)


def _write(path, text: str) -> None:
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def run_defect(args) -> int:
    factors = _factors_from_args(args)
    report: DefectReport
    if args.method == "direct":
        report = dim_mspace_direct(factors, args.tol)
        payload = report.to_dict(timings=args.timings)
    else:
        report = dim_mspace_kron(factors, args.tol, jobs=args.jobs)
        payload = report.to_dict(timings=args.timings)
        if args.method == "both":
            direct = dim_mspace_direct(factors, args.tol)
            agree = direct.dim_mspace == report.dim_mspace
            payload["method"] = "both"
            payload["cross_check"] = {
                "dim_direct": direct.dim_mspace,
                "dim_decomposed": report.dim_mspace,
                "agree": agree,
            }
            if args.timings:
                payload["wall_times"]["direct_total"] = direct.wall_times["total"]
            if not agree:
                _emit(args, payload)
                print(
                    f"method disagreement: direct {direct.dim_mspace} "
                    f"vs decomposed {report.dim_mspace}",
                    file=sys.stderr,
                )
                return EXIT_DISAGREE
    _emit(args, payload)
    return EXIT_OK


def run_bound(args) -> int:
    if not args.sizes:
        raise CliError("bound needs --sizes LIST")
    sizes = parse_sizes(args.sizes[0])
    b = bounds.expanded_lower_bound(sizes)
    cmp = bounds.compare_strategies(sizes)
    payload = {
        "sizes": list(b.sizes),
        "expanded_total": b.expanded_total,
        "closed_form_total": b.closed_form_total,
        "naive_product": b.naive_product,
        "twos_count": b.twos_count,
        "delta": cmp.delta,
        "per_subset_bounds": {
            subset_key(s): v
            for s, v in sorted(b.per_subset_bounds.items(), key=lambda kv: (len(kv[0]), sorted(kv[0])))
        },
    }
    _emit(args, payload)
    return EXIT_OK


def run_verify(args) -> int:
    factors = _factors_from_args(args)
    results = run_suite(factors, args.tol)
    ok = all(r["ok"] for r in results.values())
    _emit(args, {"sizes": list(factors.sizes), "ok": ok, "checks": results})
    return EXIT_OK if ok else EXIT_DISAGREE


def run_sample(args) -> int:
    """Haar campaign: generalized defect against the closed-form bound."""
    if not args.sizes:
        raise CliError("sample needs --sizes LIST")
    sizes = parse_sizes(args.sizes[0])
    base = 0 if args.seed is None else args.seed
    rows = []
    for t in range(args.trials):
        seed = base + t
        rep = dim_mspace_kron(FactorList.haar(sizes, seed), args.tol)
        rows.append(
            {
                "seed": seed,
                "generalized_defect": rep.generalized_defect,
                "defect": rep.defect,
                "lower_bound": rep.lower_bound,
                "attained": rep.generalized_defect == rep.lower_bound,
                "min_gap_ratio": rep.min_gap_ratio,
            }
        )
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=list(rows[0]) if rows else ["seed"], lineterminator="\n")
        w.writeheader()
        w.writerows(_jsonable(rows))
        _write(args.out, buf.getvalue())
    else:
        summary = {
            "sizes": list(sizes),
            "trials": len(rows),
            "lower_bound": bounds.closed_form_lower_bound(sizes),
            "attained": sum(r["attained"] for r in rows),
            "below_bound": sum(r["generalized_defect"] < r["lower_bound"] for r in rows),
            "rows": rows,
        }
        _emit(args, summary)
    return EXIT_OK


def _best_time(fn, repeat: int):
    best, result = math.inf, None
    for _ in range(max(1, repeat)):
        t0 = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - t0)
    return best, result


def bench_trial(sizes, seed, tol=None, repeat: int = 3) -> dict:
    """Time both methods on one Haar product (best of ``repeat``)."""
    factors = FactorList.haar(sizes, seed)
    t_dir, direct = _best_time(lambda: dim_mspace_direct(factors, tol), repeat)
    t_dec, dec = _best_time(lambda: dim_mspace_kron(factors, tol), repeat)
    return {
        "sizes": "x".join(map(str, sizes)),
        "seed": seed,
        "dim_direct": direct.dim_mspace,
        "dim_decomposed": dec.dim_mspace,
        "t_direct": t_dir,
        "t_decomposed": t_dec,
        "min_gap_ratio": min(direct.min_gap_ratio, dec.min_gap_ratio),
        "agree": direct.dim_mspace == dec.dim_mspace,
    }


def run_bench(args) -> int:
    grid = []
    for item in args.sizes or []:
        grid.extend(parse_sizes(part) for part in item.split(";") if part.strip())
    if not grid:
        raise CliError("bench needs a non-empty grid (--sizes LIST, repeatable)")
    base = 0 if args.seed is None else args.seed
    jobs = [(sizes, base + s) for sizes in grid for s in range(args.seeds)]

    def work(job):
        return bench_trial(job[0], job[1], args.tol, args.repeat)

    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(work, jobs))
    else:
        rows = [work(j) for j in jobs]

    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=BENCH_FIELDS, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: ("" if v is None else v) for k, v in _jsonable(row).items()})
    _write(args.out, buf.getvalue())
    bad = [r for r in rows if not r["agree"]]
    for r in bad:
        print(f"disagreement: sizes {r['sizes']} seed {r['seed']}", file=sys.stderr)
    return EXIT_DISAGREE if bad else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kdefect",
        description="Defect of unitary matrices using Kronecker-product structure.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, matrix_input=True):
        if matrix_input:
            p.add_argument("--factors", metavar="PATH", help="JSON matrix or array of matrices")
            p.add_argument("--haar", action="store_true", help="Haar factors of --sizes")
            p.add_argument("--fourier", action="store_true", help="Fourier factors of --sizes")
        p.add_argument("--sizes", metavar="LIST", action="append", help="e.g. 2,2,3")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--tol", type=float, default=None, help="explicit rank tolerance")
        p.add_argument("--format", choices=["json", "csv", "text"], default="json")
        p.add_argument("--jobs", type=int, default=1)
        p.add_argument("--out", metavar="PATH", default=None)

    p = sub.add_parser("defect", help="defect and generalized defect")
    common(p)
    p.add_argument("--method", choices=["direct", "decomposed", "both"], default="decomposed")
    p.add_argument("--timings", action="store_true", help="include wall times (not deterministic)")
    p.set_defaults(func=run_defect)

    p = sub.add_parser("bound", help="closed-form and expanded lower bounds")
    common(p, matrix_input=False)
    p.set_defaults(func=run_bound)

    p = sub.add_parser("verify", help="direct-sum and invariant checks")
    common(p)
    p.set_defaults(func=run_verify)

    p = sub.add_parser("sample", help="Haar bound-attainment campaign")
    common(p, matrix_input=False)
    p.add_argument("--trials", type=int, default=20)
    p.set_defaults(func=run_sample)

    p = sub.add_parser("bench", help="direct vs decomposed timing (CSV)")
    common(p, matrix_input=False)
    p.add_argument("--seeds", type=int, default=5, help="seeds per grid entry")
    p.add_argument("--repeat", type=int, default=3, help="timing repeats (best kept)")
    p.set_defaults(func=run_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except CliError as exc:
        print(f"kdefect: {exc}", file=sys.stderr)
        return exc.code
    except NonUnitaryError as exc:
        print(f"kdefect: {exc}", file=sys.stderr)
        return EXIT_NON_UNITARY
    except (GuardError, OverflowError) as exc:
        print(f"kdefect: {exc}", file=sys.stderr)
        return EXIT_GUARD


if __name__ == "__main__":
    sys.exit(main())
