import dataclasses

import pytest

from bcsim import cli
from bcsim.config import validate_config
from bcsim.simulator import Simulation, run_trace
from bcsim.stats import CSV_COLUMNS, StatsRecord, speedup
from bcsim.trace import Compute, ScalarMem, VectorMem
from bcsim.workloads import build_trace, workload_spec


def test_empty_trace():
    rec = run_trace([], validate_config({}), workload="empty")
    assert rec.total_cycles == 0 and rec.accesses == 0 and rec.amat == 0.0


def test_single_cold_scalar_read_bc():
    rec = run_trace([ScalarMem(False, 0x1000_0000, 8)], validate_config({}))
    assert rec.total_cycles == 42  # lookups + RAS + CAS + bus
    assert rec.amat == 42.0 and rec.misses == 1


def test_single_cold_scalar_read_wc():
    rec = run_trace([ScalarMem(False, 0x1000_0000, 8)],
                    validate_config({"hierarchy": "white"}))
    assert rec.total_cycles == 41  # one lookup fewer, no cross probe


def test_compute_only_trace():
    rec = run_trace([Compute(10), Compute(5)], validate_config({}))
    assert rec.total_cycles == 15 and rec.accesses == 0


def test_total_cycles_at_least_compute_sum():
    events = [Compute(7), VectorMem(False, 8, (0x1000_0000,)), Compute(9)]
    rec = run_trace(events, validate_config({}))
    assert rec.total_cycles >= 16


def test_determinism_identical_records():
    spec = workload_spec("axpy", 512, size="8K")
    cfg = validate_config({"prefetch": "on"})
    a = run_trace(build_trace(spec), cfg, workload="axpy")
    b = run_trace(build_trace(spec), cfg, workload="axpy")
    assert a == b


def test_accesses_partition():
    spec = workload_spec("mv", 512, size="8x64")
    rec = run_trace(build_trace(spec), validate_config({}), workload="mv")
    assert rec.accesses == (rec.native_hits + rec.cross_hits
                            + rec.wb_restores + rec.misses)
    assert rec.accesses_scalar > 0 and rec.accesses_vector > 0


def test_speedup():
    a = StatsRecord(workload="w", vl_bits=512, total_cycles=200)
    b = StatsRecord(workload="w", vl_bits=512, total_cycles=100)
    assert speedup(a, a) == 1.0
    assert speedup(a, b) == 2.0
    with pytest.raises(ValueError):
        speedup(a, StatsRecord(workload="x", vl_bits=512, total_cycles=1))


def test_csv_columns_contract():
    assert CSV_COLUMNS == [
        "workload", "vl_bits", "hierarchy", "prefetch",
        "cycles", "accesses", "native_hits", "cross_hits", "wb_restores",
        "misses", "amat", "ras", "cas", "pre", "writebacks",
        "pf_issued", "pf_filled", "pf_useful",
    ]
    rec = StatsRecord(workload="w", vl_bits=128, hierarchy="bicameral",
                      prefetch="off")
    rec.finalize()
    assert len(rec.csv_row()) == len(CSV_COLUMNS)


def test_sweep_point_enumeration_matches_paper_grid():
    cfg = validate_config({})
    resolve = lambda name, vl: workload_spec(name, vl, size="1K") \
        if name == "axpy" else workload_spec(name, vl, size="8x8", repeat=1)
    points = cli.sweep_points(
        cfg, ["axpy", "mv", "mm", "jacobi2d", "pathfinder", "spmv"],
        [128, 256, 512, 1024, 2048, 4096], ["wc", "bc"],
        ["off", "on", "ideal"], resolve=resolve)
    assert len(points) == 144  # {WC} + {BC}x3 modes per workload/vl


def test_cli_run_writes_csv(tmp_path):
    out = tmp_path / "run.csv"
    code = cli.main(["run", "--workload", "axpy", "--size", "4K",
                     "--vl", "512", "--hierarchy", "bc", "--prefetch", "on",
                     "--csv", str(out)])
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert lines[1].startswith("axpy,512,bicameral,on,")


def test_cli_sweep_deterministic_bytes(tmp_path):
    args = ["sweep", "--workloads", "axpy", "--vls", "128,512",
            "--hierarchies", "bc,wc", "--prefetch-modes", "off,on",
            "--size", "4K", "--quiet"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert cli.main(args + ["--csv", str(a)]) == 0
    assert cli.main(args + ["--csv", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    rows = a.read_text().splitlines()
    assert len(rows) == 1 + 2 * 3  # header + per vl: wc once + bc twice


def test_cli_two_point_sweep(tmp_path):
    out = tmp_path / "two.csv"
    code = cli.main(["sweep", "--workloads", "axpy", "--vls", "512",
                     "--hierarchies", "bc,wc", "--prefetch-modes", "off",
                     "--size", "2K", "--quiet", "--csv", str(out)])
    assert code == 0
    assert len(out.read_text().splitlines()) == 3  # header + 2 rows


def test_cli_usage_error_exit_code():
    assert cli.main(["run", "--workload", "nosuchkernel"]) == 1


def test_cli_trace_out_roundtrip(tmp_path):
    trace_path = tmp_path / "axpy.trace"
    code = cli.main(["run", "--workload", "axpy", "--size", "2K",
                     "--trace-out", str(trace_path)])
    assert code == 0
    code = cli.main(["run", "--workload", str(trace_path)])
    assert code == 0


def test_cli_config_file(tmp_path):
    cfg_path = tmp_path / "sim.cfg"
    cfg_path.write_text("lat_cas = 20\n")
    out = tmp_path / "o.csv"
    code = cli.main(["run", "--workload", "axpy", "--size", "1K",
                     "--config", str(cfg_path), "--csv", str(out)])
    assert code == 0


def test_cli_jobs_parallel_matches_serial(tmp_path):
    base = ["sweep", "--workloads", "axpy", "--vls", "128,512",
            "--hierarchies", "bc", "--prefetch-modes", "off,ideal",
            "--size", "4K", "--quiet"]
    a, b = tmp_path / "serial.csv", tmp_path / "par.csv"
    assert cli.main(base + ["--csv", str(a)]) == 0
    assert cli.main(base + ["--csv", str(b), "--jobs", "2"]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_amat_orders_with_prefetch_modes():
    spec = workload_spec("axpy", 512, size="64K")
    recs = {}
    for pf in ("off", "on", "ideal"):
        cfg = validate_config({"prefetch": pf})
        recs[pf] = run_trace(build_trace(spec), cfg, workload="axpy")
    assert recs["ideal"].amat <= recs["on"].amat <= recs["off"].amat
