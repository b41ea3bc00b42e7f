"""Top-level simulation: wire the clock, bus, memory and hierarchy together,
drive a trace through them and produce a StatsRecord.

The core is modelled synchronously: compute events just advance its ready
cycle, memory events are coalesced into sector references and executed one at
a time (in order, one outstanding miss). Before every reference the timing
wheel catches up to the core's cycle so background drains and prefetch fills
land exactly when they should. After the trace, remaining background work
drains, every dirty sector is flushed and the final memory image is compared
against the oracle.
"""

from typing import Iterable

from bcsim.config import SimConfig
from bcsim.controller import BicameralController, Oracle
from bcsim.dram import MemoryController
from bcsim.engine import Bus, TimingWheel
from bcsim.stats import StatsRecord
from bcsim.trace import Compute, TraceEvent, sector_accesses
from bcsim.white_cache import WhiteCacheController


class Simulation:
    def __init__(self, cfg: SimConfig, workload: str = "", oracle: bool = True):
        self.cfg = cfg
        self.engine = TimingWheel()
        self.bus = Bus(cfg.bus_transfer_cycles)
        self.mem_image: dict[int, int] = {}
        self.oracle = Oracle(enabled=oracle)
        self.stats = StatsRecord(workload=workload, vl_bits=cfg.vl_bits,
                                 hierarchy=cfg.hierarchy, prefetch=cfg.prefetch)
        self.addr_map = cfg.address_map()
        self.mem = MemoryController(cfg, self.engine, self.bus, self.addr_map,
                                    self.stats, self.mem_image)
        if cfg.hierarchy == "white":
            self.ctrl = WhiteCacheController(cfg, self.engine, self.mem,
                                             self.oracle, self.stats)
        else:
            self.ctrl = BicameralController(cfg, self.engine, self.mem,
                                            self.oracle, self.stats)

    def run(self, events: Iterable[TraceEvent],
            verify_every: int = 0) -> StatsRecord:
        """Consume the trace to completion, flush and check the oracle.

        verify_every > 0 additionally sweeps the full exclusivity invariant
        every that many sector accesses (slow; meant for test runs).
        """
        engine = self.engine
        ctrl = self.ctrl
        stats = self.stats
        sector_bytes = self.cfg.sector_bytes
        core = 0
        n_accesses = 0
        for event in events:
            if type(event) is Compute:
                core += event.cycles
                continue
            for acc in sector_accesses(event, sector_bytes):
                engine.run_until(core)
                kind, done = ctrl.access(acc, core)
                stats.record_access(kind, done - core, acc.vector)
                core = done
                n_accesses += 1
                if verify_every and n_accesses % verify_every == 0:
                    ctrl.verify_exclusivity()
        stats.total_cycles = core

        # Post-run settlement: let in-flight work finish, then flush for the
        # oracle comparison. None of this counts toward total_cycles.
        engine.run_until_idle()
        ctrl.flush(engine.now)
        engine.run_until_idle()
        if verify_every:
            ctrl.verify_exclusivity()
        self.oracle.check_final(self.mem_image, engine.now)
        stats.finalize()
        return stats


def run_trace(events: Iterable[TraceEvent], cfg: SimConfig,
              workload: str = "", oracle: bool = True) -> StatsRecord:
    return Simulation(cfg, workload=workload, oracle=oracle).run(events)
