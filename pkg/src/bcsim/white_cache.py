"""Conventional baseline cache: one unified 128 KB, 4-way, sector-line cache
with a disjoint 8-entry write buffer. Scalar and vector references are treated
identically (no split, no cross lookup, no prefetching); write misses always
allocate with a fetch. Everything else mirrors the scalar half of the split
hierarchy, including restoration and the eager drain at full occupancy.
"""

from bcsim.address import WhiteIndex
from bcsim.dram import DEST_WHITE, MemoryController
from bcsim.engine import TimingWheel
from bcsim.scalar_cache import DisjointWriteBuffer, SetAssociativeCache
from bcsim.stats import MISS, NATIVE_HIT, WB_RESTORE


class WhiteCacheController:
    hierarchy = "white"

    def __init__(self, cfg, engine: TimingWheel, mem: MemoryController,
                 oracle, stats):
        self.cfg = cfg
        self.engine = engine
        self.mem = mem
        self.oracle = oracle
        self.stats = stats
        self.map = mem.map
        self.wc = SetAssociativeCache(cfg.wc_sets, cfg.wc_ways)
        self.wb = DisjointWriteBuffer(cfg.wb_capacity)
        mem.prefetch_enabled = False

    def access(self, acc, at: int):
        s = acc.sector_base
        tag, set_idx, _ = self.map.white(s)
        t_native = at + self.cfg.lat_lookup

        line = self.wc.find(set_idx, tag)
        if line is not None:
            self.wc.touch(line)
            if acc.write:
                line.version = self.oracle.write(s)
                line.dirty = True
            else:
                self.oracle.check_read(s, line.version, t_native)
            return NATIVE_HIT, t_native

        entry = self.wb.get(s)
        if entry is not None:
            self.wb.remove(s)
            version = self.oracle.write(s) if acc.write else entry.version
            victim = self.wc.install(set_idx, tag, True, version)
            if victim is not None and victim.dirty:
                sector = self.map.compose_white(WhiteIndex(victim.tag, set_idx, 0))
                self.wb.insert(sector, victim.version)
            if not acc.write:
                self.oracle.check_read(s, version, t_native)
            return WB_RESTORE, t_native

        fill = []
        self.mem.demand_read(s, DEST_WHITE,
                             lambda version, cycle: fill.append((version, cycle)),
                             t_native)
        slot_ready = self._make_room(set_idx, t_native)
        if len(self.wb) >= self.cfg.drain_threshold_sc:
            idle = self.wb.oldest_idle()
            if idle is not None:
                self._start_drain(idle, t_native)
        self.engine.run_while(lambda: not fill, "demand fill")
        version, fill_cycle = fill[0]
        done = max(fill_cycle, slot_ready, t_native)
        if acc.write:
            version = self.oracle.write(s)
        placed = self.wc.install(set_idx, tag, acc.write, version)
        assert placed is None, "room was made at request time"
        if not acc.write:
            self.oracle.check_read(s, version, done)
        return MISS, done

    def _make_room(self, set_idx: int, at: int) -> int:
        victim = self.wc.evict_lru(set_idx)
        if victim is None or not victim.dirty:
            return at
        ready = at
        if len(self.wb) >= self.wb.capacity:
            oldest = self.wb.oldest()
            if not oldest.draining:
                self._start_drain(oldest, at)
            self.engine.run_while(lambda: oldest.alive, "write-buffer drain")
            ready = self.engine.now
        sector = self.map.compose_white(WhiteIndex(victim.tag, set_idx, 0))
        self.wb.insert(sector, victim.version)
        return ready

    def _start_drain(self, entry, at: int):
        entry.draining = True

        def on_written(cycle, entry=entry):
            if entry.alive:
                self.wb.remove(entry.sector_base)

        self.mem.write_back(entry.sector_base, entry.version, on_written, at)

    def flush(self, at: int) -> int:
        n = 0
        for set_idx, line in self.wc.lines():
            if line.dirty:
                sector = self.map.compose_white(WhiteIndex(line.tag, set_idx, 0))
                self.mem.write_back(sector, line.version, None, at)
                line.dirty = False
                n += 1
        for entry in self.wb.entries():
            if not entry.draining:
                self._start_drain(entry, at)
                n += 1
        return n

    def verify_exclusivity(self):
        for set_idx, line in self.wc.lines():
            sector = self.map.compose_white(WhiteIndex(line.tag, set_idx, 0))
            assert sector not in self.wb, "sector both in WC and its buffer"
