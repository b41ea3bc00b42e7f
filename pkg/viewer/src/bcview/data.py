"""CSV loading and table preparation for the figure kinds.

The input contract is the simulator's sweep CSV: columns
workload, vl_bits, hierarchy, prefetch, cycles, accesses, native_hits,
cross_hits, wb_restores, misses, amat, ras, cas, pre, writebacks,
pf_issued, pf_filled, pf_useful. Hierarchy/prefetch pairs map onto the four
plotted series: WC, BC W/O, BC PF, BC IDL.

Everything here is pure: tables are nested dicts keyed workload -> vl ->
series, with deterministic (sorted) iteration orders, so a re-render of the
same CSV produces an identical figure.
"""

import csv
from dataclasses import dataclass

REQUIRED_COLUMNS = [
    "workload", "vl_bits", "hierarchy", "prefetch",
    "cycles", "accesses", "native_hits", "cross_hits", "wb_restores", "misses",
    "amat", "ras", "cas", "pre", "writebacks",
    "pf_issued", "pf_filled", "pf_useful",
]

KINDS = ("speedup", "amat", "breakdown", "row_openings")

SERIES_ORDER = ("WC", "BC W/O", "BC PF", "BC IDL")
BREAKDOWN_SEGMENTS = ("native_hits", "cross_hits", "wb_restores", "misses")

_LABELS = {
    ("white", "off"): "WC",
    ("bicameral", "off"): "BC W/O",
    ("bicameral", "on"): "BC PF",
    ("bicameral", "ideal"): "BC IDL",
}


class ViewerError(ValueError):
    pass


@dataclass(frozen=True)
class FigureSpec:
    csv_paths: tuple
    kind: str
    out: str
    baseline: str = "wc"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ViewerError(f"unknown figure kind {self.kind!r}, "
                              f"expected one of {KINDS}")
        if self.baseline != "wc":
            raise ViewerError("only the conventional cache (wc) baseline is supported")


def series_label(hierarchy: str, prefetch: str) -> str:
    try:
        return _LABELS[(hierarchy, prefetch)]
    except KeyError:
        raise ViewerError(
            f"unrecognized configuration {hierarchy!r}/{prefetch!r}") from None


def load_rows(paths) -> list[dict]:
    rows = []
    for path in paths:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            missing = [c for c in REQUIRED_COLUMNS
                       if c not in (reader.fieldnames or [])]
            if missing:
                raise ViewerError(f"{path}: missing columns {missing}")
            for lineno, raw in enumerate(reader, start=2):
                try:
                    rows.append({
                        "workload": raw["workload"],
                        "vl_bits": int(raw["vl_bits"]),
                        "series": series_label(raw["hierarchy"], raw["prefetch"]),
                        "cycles": int(raw["cycles"]),
                        "accesses": int(raw["accesses"]),
                        "native_hits": int(raw["native_hits"]),
                        "cross_hits": int(raw["cross_hits"]),
                        "wb_restores": int(raw["wb_restores"]),
                        "misses": int(raw["misses"]),
                        "amat": float(raw["amat"]),
                        "ras": int(raw["ras"]),
                    })
                except (KeyError, ValueError) as exc:
                    raise ViewerError(f"{path}:{lineno}: bad row: {exc}") from None
    if not rows:
        raise ViewerError("no data rows found")
    return rows


def _index(rows):
    table: dict = {}
    for row in rows:
        table.setdefault(row["workload"], {}) \
             .setdefault(row["vl_bits"], {})[row["series"]] = row
    return table


def workloads_and_vls(table):
    for workload in sorted(table):
        yield workload, sorted(table[workload])


def speedup_table(rows) -> dict:
    """workload -> vl -> series -> baseline_cycles / cycles, for BC series."""
    table = _index(rows)
    out: dict = {}
    for workload, vls in workloads_and_vls(table):
        for vl in vls:
            cell = table[workload][vl]
            if "WC" not in cell:
                raise ViewerError(
                    f"speedup needs a wc baseline row for {workload} at vl={vl}")
            base = cell["WC"]["cycles"]
            for series in SERIES_ORDER[1:]:
                if series in cell:
                    out.setdefault(workload, {}).setdefault(vl, {})[series] = \
                        base / cell[series]["cycles"]
    return out


def metric_table(rows, field: str) -> dict:
    """workload -> vl -> series -> row[field] for every present series."""
    table = _index(rows)
    out: dict = {}
    for workload, vls in workloads_and_vls(table):
        for vl in vls:
            for series in SERIES_ORDER:
                row = table[workload][vl].get(series)
                if row is not None:
                    out.setdefault(workload, {}).setdefault(vl, {})[series] = \
                        row[field]
    return out


def breakdown_table(rows) -> dict:
    """workload -> vl -> series -> {segment: count}; segments sum to accesses."""
    table = _index(rows)
    out: dict = {}
    for workload, vls in workloads_and_vls(table):
        for vl in vls:
            for series in SERIES_ORDER:
                row = table[workload][vl].get(series)
                if row is None:
                    continue
                segs = {seg: row[seg] for seg in BREAKDOWN_SEGMENTS}
                assert sum(segs.values()) == row["accesses"], \
                    f"{workload}/vl{vl}/{series}: breakdown does not sum"
                out.setdefault(workload, {}).setdefault(vl, {})[series] = segs
    return out
