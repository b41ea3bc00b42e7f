"""Per-run counters and the CSV row contract."""

from dataclasses import dataclass, field

# Fixed CSV column order; the viewer depends on these names.
CSV_COLUMNS = [
    "workload", "vl_bits", "hierarchy", "prefetch",
    "cycles", "accesses", "native_hits", "cross_hits", "wb_restores", "misses",
    "amat", "ras", "cas", "pre", "writebacks",
    "pf_issued", "pf_filled", "pf_useful",
]

NATIVE_HIT = "native_hit"
CROSS_HIT = "cross_hit"
WB_RESTORE = "wb_restore"
MISS = "miss"


@dataclass
class StatsRecord:
    workload: str = ""
    vl_bits: int = 0
    hierarchy: str = ""
    prefetch: str = ""

    total_cycles: int = 0
    accesses_scalar: int = 0
    accesses_vector: int = 0
    native_hits: int = 0
    cross_hits: int = 0
    wb_restores: int = 0
    misses: int = 0
    amat: float = 0.0
    ras_count: int = 0
    cas_count: int = 0
    pre_count: int = 0
    writebacks: int = 0
    pf_issued: int = 0
    pf_filled: int = 0
    pf_rejected: int = 0
    pf_useful: int = 0
    migrations: int = 0

    latency_sum: int = field(default=0, repr=False)

    @property
    def accesses(self) -> int:
        return self.accesses_scalar + self.accesses_vector

    def record_access(self, kind: str, latency: int, vector: bool):
        assert latency >= 1
        if vector:
            self.accesses_vector += 1
        else:
            self.accesses_scalar += 1
        self.latency_sum += latency
        if kind == NATIVE_HIT:
            self.native_hits += 1
        elif kind == CROSS_HIT:
            self.cross_hits += 1
        elif kind == WB_RESTORE:
            self.wb_restores += 1
        elif kind == MISS:
            self.misses += 1
        else:
            raise ValueError(f"unknown access kind {kind!r}")

    def finalize(self):
        self.amat = self.latency_sum / self.accesses if self.accesses else 0.0
        assert self.accesses == (self.native_hits + self.cross_hits
                                 + self.wb_restores + self.misses)
        assert self.pf_useful <= self.pf_filled <= self.pf_issued

    def csv_row(self) -> list:
        return [
            self.workload, self.vl_bits, self.hierarchy, self.prefetch,
            self.total_cycles, self.accesses, self.native_hits, self.cross_hits,
            self.wb_restores, self.misses, f"{self.amat:.6f}",
            self.ras_count, self.cas_count, self.pre_count, self.writebacks,
            self.pf_issued, self.pf_filled, self.pf_useful,
        ]


def speedup(base: StatsRecord, test: StatsRecord) -> float:
    """Cycle ratio base/test for the same workload point."""
    if (base.workload, base.vl_bits) != (test.workload, test.vl_bits):
        raise ValueError(
            f"mismatched workload keys: {(base.workload, base.vl_bits)} "
            f"vs {(test.workload, test.vl_bits)}")
    return base.total_cycles / test.total_cycles
