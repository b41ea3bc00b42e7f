"""Command-line front end: single runs and configuration sweeps with CSV output.

Exit codes: 0 success, 1 usage/input error, 2 oracle divergence.
"""

import argparse
import csv
import os
import sys
from concurrent.futures import ProcessPoolExecutor

from bcsim.config import ConfigError, SimConfig, load_config_file, validate_config
from bcsim.controller import OracleDivergence
from bcsim.simulator import Simulation
from bcsim.stats import CSV_COLUMNS, StatsRecord
from bcsim.trace import TraceParseError, write_trace
from bcsim.workloads import KERNELS, MatrixMarketError, build_trace, workload_spec

_HIERARCHY = {"bc": "bicameral", "wc": "white"}


def _base_config(path: str | None) -> SimConfig:
    return load_config_file(path) if path else validate_config({})


def _resolve_workload(value: str, vl_bits: int, size, repeat, seed, matrix):
    if value in KERNELS and value != "file":
        return workload_spec(value, vl_bits, size=size, repeat=repeat,
                             seed=seed, matrix_path=matrix)
    if os.path.exists(value):
        return workload_spec("file", vl_bits, trace_path=value)
    raise ValueError(f"workload {value!r} is neither a kernel {KERNELS[:-1]} "
                     f"nor an existing trace file")


def _with_point(cfg: SimConfig, vl_bits: int, hierarchy: str, prefetch: str) -> SimConfig:
    import dataclasses
    return dataclasses.replace(cfg, vl_bits=vl_bits, hierarchy=hierarchy,
                               prefetch=prefetch)


def write_csv(path, records: list):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for rec in records:
            writer.writerow(rec.csv_row())


def sweep_points(cfg: SimConfig, workloads, vls, hierarchies, modes,
                 resolve=None, **spec_kw) -> list:
    """Cartesian grid in stable order; the baseline hierarchy contributes one
    point per (workload, vl) since it has no prefetcher. Returns
    (name, spec, point_config) tuples."""
    resolve = resolve or (lambda name, vl: _resolve_workload(
        name, vl, spec_kw.get("size"), spec_kw.get("repeat"),
        spec_kw.get("seed", 0), spec_kw.get("matrix")))
    points = []
    for name in workloads:
        for vl in vls:
            spec = resolve(name, vl)
            for h in hierarchies:
                for mode in (["off"] if h == "wc" else list(modes)):
                    points.append((name, spec, _with_point(cfg, vl,
                                                           _HIERARCHY[h], mode)))
    return points


def _run_point(args) -> StatsRecord:
    spec, cfg, oracle = args
    sim = Simulation(cfg, workload=spec.name or spec.kernel, oracle=oracle)
    return sim.run(build_trace(spec))


def _run_point_safe(args):
    try:
        return _run_point(args), None
    except (OracleDivergence, TraceParseError, MatrixMarketError) as exc:
        return None, f"{type(exc).__name__}: {exc}"


def _summary(rec: StatsRecord) -> str:
    return (f"{rec.workload} vl={rec.vl_bits} {rec.hierarchy}/{rec.prefetch}: "
            f"{rec.total_cycles} cycles, {rec.accesses} accesses, "
            f"amat={rec.amat:.3f}, misses={rec.misses}, ras={rec.ras_count}")


def cmd_run(args) -> int:
    cfg = _base_config(args.config)
    cfg = _with_point(cfg, args.vl, _HIERARCHY[args.hierarchy], args.prefetch)
    spec = _resolve_workload(args.workload, args.vl, args.size, args.repeat,
                             args.seed, args.matrix)
    if args.trace_out:
        write_trace(args.trace_out, build_trace(spec))
        spec = workload_spec("file", args.vl, trace_path=args.trace_out)
    try:
        rec = _run_point((spec, cfg, args.oracle == "on"))
    except OracleDivergence as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    rec.workload = args.workload if args.workload in KERNELS else "file"
    print(_summary(rec))
    if args.csv:
        write_csv(args.csv, [rec])
    return 0


def cmd_sweep(args) -> int:
    cfg = _base_config(args.config)
    workloads = args.workloads.split(",")
    vls = [int(v) for v in args.vls.split(",")]
    hierarchies = args.hierarchies.split(",")
    modes = args.prefetch_modes.split(",")
    for h in hierarchies:
        if h not in _HIERARCHY:
            raise ValueError(f"unknown hierarchy {h!r}")
    points = sweep_points(cfg, workloads, vls, hierarchies, modes,
                          size=args.size, repeat=args.repeat,
                          seed=args.seed, matrix=args.matrix)

    jobs = [(spec, pcfg, args.oracle == "on") for _, spec, pcfg in points]
    records: list[StatsRecord | None] = [None] * len(points)
    failures = []
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_run_point_safe, jobs))
    else:
        results = [_run_point_safe(job) for job in jobs]
    for idx, (rec, err) in enumerate(results):
        if err is None:
            records[idx] = rec
        else:
            failures.append((points[idx][0], err))
            print(f"error: point {idx} ({points[idx][0]}): {err}", file=sys.stderr)

    done = [r for r in records if r is not None]
    for (name, _, _), rec in zip(points, records):
        if rec is not None:
            rec.workload = name if name in KERNELS else "file"
            if not args.quiet:
                print(_summary(rec))
    write_csv(args.csv, done)
    print(f"wrote {len(done)} rows to {args.csv}"
          + (f", {len(failures)} failures" if failures else ""))
    return 2 if failures else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bcsim",
        description="Cycle-level split scalar/vector cache hierarchy simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="key = value config file")
        p.add_argument("--size", help="workload size override (kernel-specific)")
        p.add_argument("--repeat", type=int, help="region-of-interest repetitions")
        p.add_argument("--matrix", help="Matrix Market file for spmv")
        p.add_argument("--seed", type=int, default=0, help="workload RNG seed")
        p.add_argument("--oracle", choices=["on", "off"], default="on")

    run_p = sub.add_parser("run", help="simulate one configuration point")
    run_p.add_argument("--workload", required=True,
                       help="kernel name or trace file path")
    run_p.add_argument("--vl", type=int, default=512, help="vector length in bits")
    run_p.add_argument("--hierarchy", choices=["bc", "wc"], default="bc")
    run_p.add_argument("--prefetch", choices=["off", "on", "ideal"], default="off")
    run_p.add_argument("--csv", help="write the single-row CSV here")
    run_p.add_argument("--trace-out", help="save the generated trace")
    common(run_p)
    run_p.set_defaults(func=cmd_run)

    sweep_p = sub.add_parser("sweep", help="run a Cartesian grid of points")
    sweep_p.add_argument("--workloads", required=True, help="comma-separated")
    sweep_p.add_argument("--vls", required=True, help="comma-separated bit widths")
    sweep_p.add_argument("--hierarchies", default="bc,wc")
    sweep_p.add_argument("--prefetch-modes", default="off,on,ideal")
    sweep_p.add_argument("--csv", required=True)
    sweep_p.add_argument("--jobs", type=int, default=1)
    sweep_p.add_argument("--quiet", action="store_true")
    common(sweep_p)
    sweep_p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError, TraceParseError, MatrixMarketError,
            FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
