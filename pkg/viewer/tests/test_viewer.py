import csv
import importlib.util
import subprocess
import sys

import pytest

from bcview.cli import main
from bcview.data import (FigureSpec, ViewerError, breakdown_table, load_rows,
                         metric_table, speedup_table)
from bcview.plots import render

COLUMNS = ["workload", "vl_bits", "hierarchy", "prefetch", "cycles",
           "accesses", "native_hits", "cross_hits", "wb_restores", "misses",
           "amat", "ras", "cas", "pre", "writebacks", "pf_issued",
           "pf_filled", "pf_useful"]


def write_csv(path, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(COLUMNS)
        writer.writerows(rows)
    return path


def point(workload, vl, hierarchy, prefetch, cycles, accesses=100,
          native=70, cross=10, wb=5, misses=15, amat=3.0, ras=40):
    assert native + cross + wb + misses == accesses
    return [workload, vl, hierarchy, prefetch, cycles, accesses, native,
            cross, wb, misses, amat, ras, 100, 10, 20, 0, 0, 0]


@pytest.fixture
def small_csv(tmp_path):
    return write_csv(tmp_path / "r.csv", [
        point("axpy", 512, "white", "off", cycles=200),
        point("axpy", 512, "bicameral", "off", cycles=100),
    ])


@pytest.fixture
def grid_csv(tmp_path):
    rows = []
    for wl in ("axpy", "jacobi2d"):
        for vl in (128, 512):
            rows.append(point(wl, vl, "white", "off", cycles=1000 + vl))
            for i, pf in enumerate(("off", "on", "ideal")):
                rows.append(point(wl, vl, "bicameral", pf,
                                  cycles=900 - 100 * i + vl, ras=10 - i))
    return write_csv(tmp_path / "grid.csv", rows)


def test_speedup_single_point(small_csv):
    table = speedup_table(load_rows([small_csv]))
    assert table == {"axpy": {512: {"BC W/O": 2.0}}}


def test_speedup_requires_baseline(tmp_path):
    path = write_csv(tmp_path / "nobase.csv",
                     [point("axpy", 512, "bicameral", "off", cycles=100)])
    with pytest.raises(ViewerError):
        speedup_table(load_rows([path]))


def test_breakdown_segments_sum_to_accesses(grid_csv):
    table = breakdown_table(load_rows([grid_csv]))
    for workload, vls in table.items():
        for vl, series in vls.items():
            for segs in series.values():
                assert sum(segs.values()) == 100


def test_metric_table_orders_series(grid_csv):
    table = metric_table(load_rows([grid_csv]), "ras")
    assert list(table["axpy"][128]) == ["WC", "BC W/O", "BC PF", "BC IDL"]


def test_missing_columns_rejected(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("workload,cycles\naxpy,10\n")
    with pytest.raises(ViewerError):
        load_rows([path])


def test_unknown_configuration_rejected(tmp_path):
    path = write_csv(tmp_path / "odd.csv",
                     [point("axpy", 512, "bicameral", "sometimes", cycles=1)])
    with pytest.raises(ViewerError):
        load_rows([path])


def test_render_all_four_kinds(grid_csv, tmp_path):
    for kind in ("speedup", "amat", "breakdown", "row_openings"):
        out = tmp_path / f"{kind}.png"
        got = render(FigureSpec((str(grid_csv),), kind, str(out)))
        assert out.exists() and out.stat().st_size > 0 and got == str(out)


def test_render_is_deterministic(grid_csv, tmp_path):
    a = render(FigureSpec((str(grid_csv),), "speedup", str(tmp_path / "a.png")))
    b = render(FigureSpec((str(grid_csv),), "speedup", str(tmp_path / "b.png")))
    with open(a, "rb") as fa, open(b, "rb") as fb:
        assert fa.read() == fb.read()


def test_render_does_not_mutate_input(grid_csv, tmp_path):
    before = grid_csv.read_bytes()
    render(FigureSpec((str(grid_csv),), "amat", str(tmp_path / "x.png")))
    assert grid_csv.read_bytes() == before


def test_unknown_kind_rejected(tmp_path):
    with pytest.raises(ViewerError):
        FigureSpec(("x.csv",), "pie", str(tmp_path / "p.png"))


def test_cli_plot(small_csv, tmp_path):
    out = tmp_path / "sp.png"
    assert main(["plot", "--csv", str(small_csv), "--kind", "speedup",
                 "--baseline", "wc", "--out", str(out)]) == 0
    assert out.exists()


def test_cli_error_paths(tmp_path):
    assert main(["plot", "--csv", str(tmp_path / "missing.csv"),
                 "--kind", "amat", "--out", str(tmp_path / "o.png")]) == 1


@pytest.mark.skipif(importlib.util.find_spec("bcsim") is None,
                    reason="simulator package not installed")
def test_full_grid_from_simulator(tmp_path):
    """End to end over the real interface: sweep a small grid with the
    simulator CLI, then render every figure kind from its CSV."""
    csv_path = tmp_path / "sweep.csv"
    cmd = [sys.executable, "-m", "bcsim.cli", "sweep",
           "--workloads", "axpy", "--vls", "128,512",
           "--hierarchies", "bc,wc", "--prefetch-modes", "off,on,ideal",
           "--size", "16K", "--quiet", "--csv", str(csv_path)]
    subprocess.run(cmd, check=True)
    rows = load_rows([csv_path])
    table = breakdown_table(rows)  # stacks must sum per bar
    assert table
    for kind in ("speedup", "amat", "breakdown", "row_openings"):
        render(FigureSpec((str(csv_path),), kind, str(tmp_path / f"{kind}.png")))
