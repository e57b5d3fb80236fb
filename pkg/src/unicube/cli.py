"""Command-line interface.

Commands: ``test`` scores a CSV data file, ``null`` precomputes a null
reference cache, ``power`` runs power studies, ``diagnose`` exercises the
decomposition and simulation machinery. Exit codes for ``test``: 0 the
sample is not rejected, 1 it is rejected, 2 error. Reruns with identical
flags and inputs produce identical primary outputs.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from . import __version__
from .alternatives import parse_alternative
from .brownian import (KLConfig, asymptotic_norm_draws, default_nu_max,
                       simulate_sheet, truncated_sheet_covariance,
                       truncation_tail_mean)
from .core import MAX_DIMENSION, RandomStream, Sample
from .decompose import GridFunction, decompose, reconstruct
from .inference import (ASYMPTOTIC_MODES, asymptotic_test, build_null_reference,
                        load_reference, load_table, reference_filename,
                        render_report, report_json, run_tests, save_reference,
                        save_table, table_filename)
from .power import TABLE_IDS, rows_to_csv, run_single, run_table

CACHE_ENV = "UNICUBE_CACHE"


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 2


def _read_sample(path: str, skip_header: bool) -> Sample:
    rows: list[list[float]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh):
            if skip_header and lineno == 0:
                continue
            text = line.strip()
            if not text:
                continue
            row_index = len(rows) + 1
            try:
                values = [float(tok) for tok in text.replace(",", " ").split()]
            except ValueError:
                raise ValueError(f"row {row_index}: cannot parse {text!r}")
            if not values:
                continue
            for v in values:
                if math.isnan(v) or not 0.0 <= v <= 1.0:
                    raise ValueError(f"row {row_index}: value {v!r} outside [0, 1]")
            if rows and len(values) != len(rows[0]):
                raise ValueError(
                    f"row {row_index}: {len(values)} columns, expected {len(rows[0])}")
            rows.append(values)
    if not rows:
        raise ValueError(f"{path}: no data rows")
    return Sample(np.array(rows))


def _cache_dir(flag_value: str | None) -> str | None:
    return flag_value if flag_value is not None else os.environ.get(CACHE_ENV)


def cmd_test(args) -> int:
    sample = _read_sample(args.input, args.header)
    h = args.h if args.h is not None else sample.p
    if not 1 <= h <= sample.p:
        raise ValueError(f"h must be in [1, {sample.p}], got {h}")
    modes = ("m", "s") if args.mode == "both" else (args.mode,)
    cache = _cache_dir(args.null_cache)
    reports = []

    if any(m in ASYMPTOTIC_MODES for m in modes):
        tables = {}
        stream = RandomStream(args.seed)
        for k in range(1, sample.p + 1):
            nu = args.nu_max
            path = None
            if cache:
                nu_eff = nu if nu is not None else default_nu_max(k)
                path = os.path.join(cache, table_filename(k, nu_eff, args.asym_draws,
                                                          args.seed))
            if path and os.path.exists(path):
                tables[k] = load_table(path)
            else:
                tables[k] = asymptotic_norm_draws(stream.child(k), k, nu_max=nu,
                                                  draws=args.asym_draws)
                if path:
                    os.makedirs(cache, exist_ok=True)
                    save_table(tables[k], path)
        for mode in modes:
            reports.append(asymptotic_test(sample, tables, args.alpha, mode=mode))
    else:
        reference = None
        path = None
        if cache:
            path = os.path.join(cache, reference_filename(sample.n, sample.p, h,
                                                          args.R, args.seed))
            if os.path.exists(path):
                reference = load_reference(path)
                if (reference.n, reference.p, reference.h, reference.R,
                        reference.seed) != (sample.n, sample.p, h, args.R, args.seed):
                    raise ValueError(f"{path}: cached configuration does not match request")
        if reference is None:
            reference = build_null_reference(RandomStream(args.seed), sample.n,
                                             sample.p, h, args.R, threads=args.threads)
            if path:
                os.makedirs(cache, exist_ok=True)
                save_reference(reference, path)
        by_mode = run_tests(sample, reference, args.alpha, modes=modes)
        reports = [by_mode[m] for m in modes]

    for report in reports:
        sys.stdout.write(render_report(report))
    if args.json:
        with open(args.json, "w", encoding="utf-8", newline="\n") as fh:
            for report in reports:
                fh.write(report_json(report) + "\n")
    return 1 if any(r.reject for r in reports) else 0


def cmd_null(args) -> int:
    if not 1 <= args.p <= MAX_DIMENSION:
        raise ValueError(f"p must be in [1, {MAX_DIMENSION}], got {args.p}")
    if not 1 <= args.h <= args.p:
        raise ValueError(f"h must be in [1, {args.p}], got {args.h}")
    reference = build_null_reference(RandomStream(args.seed), args.n, args.p,
                                     args.h, args.R, threads=args.threads)
    if args.out:
        path = args.out
    else:
        cache = _cache_dir(args.cache_dir) or "."
        os.makedirs(cache, exist_ok=True)
        path = os.path.join(cache, reference_filename(args.n, args.p, args.h,
                                                      args.R, args.seed))
    save_reference(reference, path)
    print(path)
    return 0


def cmd_power(args) -> int:
    modes = tuple(args.modes.split(","))
    for mode in modes:
        if mode not in ("m", "s"):
            raise ValueError(f"unsupported mode {mode!r}; power studies use m and s")
    if args.table:
        rows = run_table(args.table, trials=args.trials, R=args.R, alpha=args.alpha,
                         seed=args.seed, rho=args.rho, modes=modes,
                         threads=args.threads)
    else:
        spec = parse_alternative(args.alternative)
        rows = run_single(spec, n=args.n, h=args.h, trials=args.trials, R=args.R,
                          alpha=args.alpha, seed=args.seed, modes=modes,
                          threads=args.threads)
    text = rows_to_csv(rows)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _check(name: str, ok: bool, detail: str, failures: list[str]) -> None:
    status = "pass" if ok else "FAIL"
    print(f"[{status}] {name}: {detail}")
    if not ok:
        failures.append(name)


def cmd_diagnose(args) -> int:
    if not 1 <= args.p <= 4:
        raise ValueError(f"p must be in [1, 4] for grid diagnostics, got {args.p}")
    if not 3 <= args.grid_m <= 33:
        raise ValueError(f"grid-m must be in [3, 33], got {args.grid_m}")
    root = RandomStream(args.seed)
    failures: list[str] = []

    # Decomposition round trip on random grid functions.
    rng = root.child(0).generator()
    worst = 0.0
    for _ in range(args.functions):
        values = rng.uniform(-1.0, 1.0, size=(args.grid_m,) * args.p)
        for axis in range(args.p):
            index = [slice(None)] * args.p
            index[axis] = 0
            values[tuple(index)] = 0.0
        g = GridFunction(values)
        rebuilt = reconstruct(decompose(g), args.grid_m)
        worst = max(worst, float(np.max(np.abs(rebuilt.values - g.values))))
    _check("decompose-roundtrip", worst <= 1e-12,
           f"max reconstruction error {worst:.3e} over {args.functions} functions "
           f"(p={args.p}, m={args.grid_m})", failures)

    # Sheet covariance at random lattice pairs.
    cfg = KLConfig(nu_max=args.truncation, grid_m=args.grid_m)
    pair_rng = root.child(1).generator()
    t_axis = np.linspace(0.0, 1.0, args.grid_m)
    pairs = []
    for _ in range(args.pairs):
        si = pair_rng.integers(1, args.grid_m, size=args.p)
        ti = pair_rng.integers(1, args.grid_m, size=args.p)
        pairs.append((tuple(si), tuple(ti)))
    draws = np.empty((args.sheets, len(pairs), 2))
    sheet_stream = root.child(2)
    for r in range(args.sheets):
        sheet = simulate_sheet(sheet_stream.child(r), args.p, cfg)
        for q, (si, ti) in enumerate(pairs):
            draws[r, q, 0] = sheet[si]
            draws[r, q, 1] = sheet[ti]
    ok = True
    worst_excess = -np.inf
    for q, (si, ti) in enumerate(pairs):
        s = t_axis[list(si)]
        t = t_axis[list(ti)]
        prods = draws[:, q, 0] * draws[:, q, 1]
        emp = float(prods.mean())
        se = float(prods.std(ddof=1) / np.sqrt(args.sheets))
        target = float(np.prod(np.minimum(s, t)))
        bias = target - truncated_sheet_covariance(s, t, cfg)
        excess = abs(emp - target) - (3.0 * se + abs(bias))
        worst_excess = max(worst_excess, excess)
        ok = ok and excess <= 0.0
    nu_used = cfg.nu_max if cfg.nu_max is not None else "default"
    _check("sheet-covariance", ok,
           f"{len(pairs)} pairs, {args.sheets} sheets, nu_max={nu_used}, "
           f"worst |error| minus allowance {worst_excess:.3e}", failures)

    # Mean of the simulated limiting-norm law.
    ok = True
    details = []
    for k in (1, 2, 3):
        table = asymptotic_norm_draws(root.child(3 + k), k, nu_max=args.truncation,
                                      draws=args.draws)
        mean = float(table.draws.mean())
        se = float(table.draws.std(ddof=1) / np.sqrt(args.draws))
        err = abs(mean - 6.0 ** (-k))
        ok = ok and err <= 3.0 * se
        details.append(f"k={k} mean {mean:.6f} vs {6.0 ** (-k):.6f} (3se {3 * se:.2e})")
    _check("norm-mean", ok, "; ".join(details), failures)

    if args.truncation is not None:
        print(f"note: tail mean left out by truncation at {args.truncation}: "
              + ", ".join(f"k={k}: {truncation_tail_mean(k, args.truncation):.3e}"
                          for k in (1, 2, 3)))
    return 0 if not failures else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="unicube",
        description="Uniformity tests on the unit hypercube with Monte Carlo calibration.")
    parser.add_argument("--version", action="version", version=f"unicube {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    t = sub.add_parser("test", help="test a CSV sample for uniformity")
    t.add_argument("input", help="CSV file, one observation per row, values in [0,1]")
    t.add_argument("--header", action="store_true", help="skip the first line")
    t.add_argument("--mode", default="both",
                   choices=["m", "s", "both", "m-as", "s-as"],
                   help="decision rule(s) to run (default both finite-sample rules)")
    t.add_argument("--h", type=int, default=None,
                   help="max subset cardinality (default: full family)")
    t.add_argument("--R", type=int, default=999,
                   help="null replicates for the Monte Carlo reference (default 999)")
    t.add_argument("--alpha", type=float, default=0.05, help="significance level")
    t.add_argument("--seed", type=int, default=1, help="seed for the null reference")
    t.add_argument("--null-cache", default=None, metavar="DIR",
                   help=f"cache directory (default: ${CACHE_ENV})")
    t.add_argument("--json", default=None, metavar="FILE",
                   help="also write reports as JSON lines")
    t.add_argument("--threads", type=int, default=1)
    t.add_argument("--nu-max", type=int, default=None,
                   help="series truncation for asymptotic modes")
    t.add_argument("--asym-draws", type=int, default=100_000,
                   help="table size for asymptotic modes")
    t.set_defaults(func=cmd_test)

    n = sub.add_parser("null", help="precompute a null reference cache file")
    n.add_argument("--n", type=int, required=True, help="sample size")
    n.add_argument("--p", type=int, required=True, help="dimension")
    n.add_argument("--h", type=int, required=True, help="max subset cardinality")
    n.add_argument("--R", type=int, required=True, help="number of null replicates")
    n.add_argument("--seed", type=int, default=1)
    n.add_argument("--cache-dir", default=None, metavar="DIR",
                   help=f"target directory (default: ${CACHE_ENV} or .)")
    n.add_argument("--out", default=None, metavar="FILE",
                   help="explicit output path (overrides --cache-dir)")
    n.add_argument("--threads", type=int, default=1)
    n.set_defaults(func=cmd_null)

    w = sub.add_parser("power", help="estimate power against alternatives")
    group = w.add_mutually_exclusive_group(required=True)
    group.add_argument("--table", choices=list(TABLE_IDS),
                       help="run a canned experiment grid")
    group.add_argument("--alternative", metavar="SPEC",
                       help="single alternative, e.g. clayton:theta=2 or "
                            "normal-copula:rho=0.3,p=6")
    w.add_argument("--n", type=int, default=50, help="sample size for --alternative")
    w.add_argument("--h", type=int, default=None,
                   help="max subset cardinality for --alternative")
    w.add_argument("--trials", type=int, default=500,
                   help="test repetitions per cell (0 = emit references only)")
    w.add_argument("--R", type=int, default=499)
    w.add_argument("--alpha", type=float, default=0.05)
    w.add_argument("--seed", type=int, default=1)
    w.add_argument("--rho", type=float, default=None,
                   help="restrict the partial grid to one correlation level")
    w.add_argument("--modes", default="m,s", help="comma-separated subset of m,s")
    w.add_argument("--out", default=None, metavar="FILE", help="write CSV here")
    w.add_argument("--threads", type=int, default=1)
    w.set_defaults(func=cmd_power)

    d = sub.add_parser("diagnose", help="self-checks of the simulation machinery")
    d.add_argument("--p", type=int, default=2, help="dimension (max 4)")
    d.add_argument("--grid-m", type=int, default=9, help="lattice points per axis (max 33)")
    d.add_argument("--truncation", type=int, default=None,
                   help="series truncation override")
    d.add_argument("--seed", type=int, default=1)
    d.add_argument("--functions", type=int, default=20,
                   help="random grid functions for the round-trip check")
    d.add_argument("--sheets", type=int, default=4000,
                   help="sheet draws for the covariance check")
    d.add_argument("--pairs", type=int, default=5,
                   help="lattice point pairs for the covariance check")
    d.add_argument("--draws", type=int, default=20_000,
                   help="draws for the norm-mean check")
    d.set_defaults(func=cmd_diagnose)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        return _fail(str(exc))


if __name__ == "__main__":
    sys.exit(main())
