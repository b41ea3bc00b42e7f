"""Access pipeline for the split hierarchy: native lookup, write-buffer probe,
cross lookup, SC-to-VC migration and the memory demand path, plus the eager
write-buffer drains, the end-of-run flush and the functional-correctness
oracle.

The core is in-order with one outstanding demand miss: `access` blocks (by
driving the timing wheel) until the reference completes, while drains and
prefetches it spawned keep overlapping in the background. Latency pipeline:
native lookup costs one cycle, the cross probe one more, and a full miss then
waits for bank service plus one bus transfer.

Exclusivity between the two halves is structural: vector data never installs
into the scalar cache, scalar fetches go to the scalar cache only after the
vector cache missed, migration removes the scalar copy in the same step, and
prefetch/ideal fills are rejected if the sector is resident scalar-side or has
a write-back in flight. Install points also carry O(1) assertions, and
`verify_exclusivity` does the full sweep for tests.
"""

from bcsim.address import ScalarIndex
from bcsim.dram import DEST_SCALAR, DEST_VECTOR, MemoryController
from bcsim.engine import TimingWheel
from bcsim.scalar_cache import DisjointWriteBuffer, SetAssociativeCache
from bcsim.stats import CROSS_HIT, MISS, NATIVE_HIT, WB_RESTORE
from bcsim.vector_cache import REGULAR, WB_FLAGGED, VectorCache


class OracleDivergence(RuntimeError):
    def __init__(self, sector: int, cycle: int, detail: str):
        self.sector = sector
        self.cycle = cycle
        super().__init__(f"oracle divergence at cycle {cycle}, "
                         f"sector 0x{sector:08x}: {detail}")


class Oracle:
    """Flat shadow store: per sector, the version of the latest core write
    (the truth) and a read-your-writes check against whatever version the
    hierarchy served. Never-written sectors are version 0."""

    def __init__(self, enabled: bool = True):
        self.enabled = enabled
        self.truth: dict[int, int] = {}
        self._counter = 0

    def write(self, sector: int) -> int:
        self._counter += 1
        self.truth[sector] = self._counter
        return self._counter

    def check_read(self, sector: int, version: int, cycle: int):
        if self.enabled:
            expect = self.truth.get(sector, 0)
            if version != expect:
                raise OracleDivergence(
                    sector, cycle, f"read served version {version}, expected {expect}")

    def check_final(self, mem_image: dict, cycle: int):
        """After the flush, main memory must hold the truth for every written
        sector."""
        if not self.enabled:
            return
        for sector in sorted(self.truth):
            got = mem_image.get(sector, 0)
            if got != self.truth[sector]:
                raise OracleDivergence(
                    sector, cycle,
                    f"memory holds version {got}, expected {self.truth[sector]}")


class BicameralController:
    hierarchy = "bicameral"

    def __init__(self, cfg, engine: TimingWheel, mem: MemoryController,
                 oracle: Oracle, stats):
        self.cfg = cfg
        self.engine = engine
        self.mem = mem
        self.oracle = oracle
        self.stats = stats
        self.map = mem.map
        self.sc = SetAssociativeCache(cfg.sc_sets, cfg.sc_ways)
        self.scwb = DisjointWriteBuffer(cfg.wb_capacity)
        self.vc = VectorCache(cfg.vc_lines, cfg.vc_sectors_per_line, cfg.wb_capacity)
        self.ideal = cfg.prefetch == "ideal"
        mem.prefetch_enabled = cfg.prefetch == "on"
        mem.prefetch_fill = self._prefetch_fill

    # -- main entry ----------------------------------------------------------

    def access(self, acc, at: int):
        """Run one sector reference to completion; returns (kind, done_cycle)."""
        if acc.vector:
            return self._vector_access(acc, at)
        return self._scalar_access(acc, at)

    # -- scalar side -----------------------------------------------------------

    def _scalar_access(self, acc, at: int):
        s = acc.sector_base
        lat = self.cfg.lat_lookup
        tag, set_idx, _ = self.map.scalar(s)
        t_native = at + lat

        line = self.sc.find(set_idx, tag)
        if line is not None:
            self.sc.touch(line)
            if acc.write:
                line.version = self.oracle.write(s)
                line.dirty = True
            else:
                self.oracle.check_read(s, line.version, t_native)
            return NATIVE_HIT, t_native

        entry = self.scwb.get(s)
        if entry is not None:
            # Restoration happens within the probe cycle.
            self.scwb.remove(s)
            version = self.oracle.write(s) if acc.write else entry.version
            self._sc_place(set_idx, tag, True, version)
            if not acc.write:
                self.oracle.check_read(s, version, t_native)
            return WB_RESTORE, t_native

        t_cross = t_native + lat
        vtag, vsec, _ = self.map.vector(s)
        vline = self.vc.find(vtag)
        if vline is not None and vline.sector_valid(vsec):
            # Served in place; scalar references never pull data out of the VC.
            if vline.mode == WB_FLAGGED:
                self.vc.restore(vline)
            else:
                self.vc.touch(vline)
            self._consume_pf(vline, vsec)
            if acc.write:
                vline.versions[vsec] = self.oracle.write(s)
                vline.dirty_mask |= 1 << vsec
            else:
                self.oracle.check_read(s, vline.versions[vsec], t_cross)
            return CROSS_HIT, t_cross

        # Full miss. A sector with a prefetch in flight lands in the VC; attach
        # to it rather than fetching twice, and serve vector-side in place.
        if self.mem.has_inflight_prefetch(s):
            fill_cycle = self._wait_for_prefetch(s)
            done = max(fill_cycle, t_cross)
            vline = self.vc.find(vtag)
            assert vline is not None and vline.sector_valid(vsec)
            self._consume_pf(vline, vsec)
            if acc.write:
                vline.versions[vsec] = self.oracle.write(s)
                vline.dirty_mask |= 1 << vsec
            else:
                self.oracle.check_read(s, vline.versions[vsec], done)
            return MISS, done

        fill = self._spawn_demand(s, DEST_SCALAR, t_cross)
        slot_ready = self._sc_make_room(set_idx, t_cross)
        self._eager_drains(t_cross)
        version, fill_cycle = self._await(fill)
        done = max(fill_cycle, slot_ready, t_cross)
        vline = self.vc.find(vtag)
        if vline is not None and vline.sector_valid(vsec):
            # A prefetch issued in the lookup window beat our fetch into the
            # VC; serve there instead of installing a second copy.
            self._consume_pf(vline, vsec)
            if acc.write:
                vline.versions[vsec] = self.oracle.write(s)
                vline.dirty_mask |= 1 << vsec
            else:
                self.oracle.check_read(s, vline.versions[vsec], done)
            return MISS, done
        if acc.write:
            version = self.oracle.write(s)  # fetch-on-write, then dirty
        self._assert_not_in_vc(s)
        placed = self.sc.install(set_idx, tag, acc.write, version)
        assert placed is None, "room was made at request time"
        if not acc.write:
            self.oracle.check_read(s, version, done)
        return MISS, done

    def _sc_place(self, set_idx: int, tag: int, dirty: bool, version: int):
        """Install with guaranteed write-buffer room for any dirty victim
        (used by restoration, which just freed an entry)."""
        victim = self.sc.install(set_idx, tag, dirty, version)
        if victim is not None and victim.dirty:
            sector = self.map.compose_scalar(ScalarIndex(victim.tag, set_idx, 0))
            self.scwb.insert(sector, victim.version)

    def _sc_make_room(self, set_idx: int, at: int) -> int:
        """Evict the LRU line of a full set at request time; returns the cycle
        by which both the way and any write-buffer space are secured."""
        victim = self.sc.evict_lru(set_idx)
        if victim is None or not victim.dirty:
            return at
        ready = at
        if len(self.scwb) >= self.scwb.capacity:
            ready = self._compulsory_drain_sc(at)
        sector = self.map.compose_scalar(ScalarIndex(victim.tag, set_idx, 0))
        self.scwb.insert(sector, victim.version)
        return ready

    def _compulsory_drain_sc(self, at: int) -> int:
        oldest = self.scwb.oldest()
        assert oldest is not None
        if not oldest.draining:
            self._start_sc_drain(oldest, at)
        self.engine.run_while(lambda: oldest.alive, "scalar write-buffer drain")
        return self.engine.now

    def _start_sc_drain(self, entry, at: int):
        entry.draining = True

        def on_written(cycle, entry=entry):
            if entry.alive:  # may have been restored meanwhile
                self.scwb.remove(entry.sector_base)

        self.mem.write_back(entry.sector_base, entry.version, on_written, at)

    # -- vector side -------------------------------------------------------------

    def _vector_access(self, acc, at: int):
        s = acc.sector_base
        lat = self.cfg.lat_lookup
        vtag, vsec, _ = self.map.vector(s)
        t_native = at + lat

        target = None
        line = self.vc.find(vtag)
        if line is not None:
            if line.mode == REGULAR:
                if line.sector_valid(vsec):
                    self.vc.touch(line)
                    self._consume_pf(line, vsec)
                    self._serve_vc(line, vsec, s, acc.write, t_native)
                    return NATIVE_HIT, t_native
                target = line
            else:
                if line.sector_valid(vsec):
                    self.vc.restore(line)
                    self._consume_pf(line, vsec)
                    self._serve_vc(line, vsec, s, acc.write, t_native)
                    return WB_RESTORE, t_native
                # Referencing a buffered tag at a not-yet-valid sector: the
                # line returns to regular duty and the sector miss proceeds.
                self.vc.restore(line)
                target = line

        t_cross = t_native + lat
        stag, sset, _ = self.map.scalar(s)
        scline = self.sc.find(sset, stag)
        if scline is not None:
            self.sc.invalidate(sset, stag)
            version = self.oracle.write(s) if acc.write else scline.version
            target, ready = self._migrate(target, vtag, vsec,
                                          scline.dirty or acc.write, version, t_cross)
            if not acc.write:
                self.oracle.check_read(s, version, max(t_cross, ready))
            self.stats.migrations += 1
            return CROSS_HIT, max(t_cross, ready)

        entry = self.scwb.get(s)
        if entry is not None:
            # Buffered scalar data migrates straight to the VC.
            self.scwb.remove(s)
            version = self.oracle.write(s) if acc.write else entry.version
            target, ready = self._migrate(target, vtag, vsec, True, version, t_cross)
            if not acc.write:
                self.oracle.check_read(s, version, max(t_cross, ready))
            self.stats.migrations += 1
            return CROSS_HIT, max(t_cross, ready)

        # Full miss paths.
        if acc.write and acc.full_sector_write and not self.cfg.fetch_on_full_write:
            # A store covering the whole sector owns it without a fetch.
            ready = t_cross
            if target is None:
                target, ready = self._vc_allocate(vtag, t_cross)
            version = self.oracle.write(s)
            self.vc.install_sector(target, vsec, True, version)
            self.vc.touch(target)
            self._eager_drains(t_cross)
            return MISS, max(t_cross, ready)

        if self.mem.has_inflight_prefetch(s):
            fill_cycle = self._wait_for_prefetch(s)
            done = max(fill_cycle, t_cross)
            line = self.vc.find(vtag)
            assert line is not None and line.sector_valid(vsec)
            self.vc.touch(line)
            self._consume_pf(line, vsec)
            self._serve_vc(line, vsec, s, acc.write, done)
            return MISS, done

        fill = self._spawn_demand(s, DEST_VECTOR, t_cross)
        ready = t_cross
        if target is None:
            target, ready = self._vc_allocate(vtag, t_cross)
        self._eager_drains(t_cross)
        version, fill_cycle = self._await(fill)
        done = max(fill_cycle, ready, t_cross)
        if target.sector_valid(vsec):
            # A same-window prefetch landed first; our fetch was redundant.
            self._consume_pf(target, vsec)
        if acc.write:
            version = self.oracle.write(s)
        self._assert_not_in_sc(s)
        self.vc.install_sector(target, vsec, acc.write, version)
        self.vc.touch(target)
        if not acc.write:
            self.oracle.check_read(s, version, done)
        if self.ideal:
            self._ideal_fill(target)
        return MISS, done

    def _serve_vc(self, line, sector: int, s: int, write: bool, cycle: int):
        if write:
            line.versions[sector] = self.oracle.write(s)
            line.dirty_mask |= 1 << sector
        else:
            self.oracle.check_read(s, line.versions[sector], cycle)

    def _migrate(self, target, vtag: int, vsec: int, dirty: bool, version: int,
                 at: int):
        """Move one sector from the scalar side into the VC (the caller has
        already removed the scalar copy)."""
        ready = at
        if target is None:
            target = self.vc.find(vtag)
            if target is None:
                target, ready = self._vc_allocate(vtag, at)
            else:
                assert target.mode == REGULAR, "native stage restores buffered tags"
        self.vc.install_sector(target, vsec, dirty, version)
        self.vc.touch(target)
        return target, ready

    def _vc_allocate(self, vtag: int, at: int):
        """Claim a line for a new tag, walking regular lines oldest-first:
        dirty ones flip to write-buffer status in place (stalling on the oldest
        buffered line's drain when the buffer is full), the first clean one
        vanishes and donates its slot. Returns (line, ready_cycle)."""
        ready = at
        while True:
            if self.vc.has_free_slot:
                line = self.vc.insert_line(vtag)
                return line, ready
            progressed = False
            for victim in self.vc.lru_regular_lines():
                if victim.dirty_mask & victim.valid_mask:
                    if len(self.vc.wb) >= self.vc.wb_capacity:
                        ready = self._compulsory_drain_vc(ready)
                        self.vc.flag_wb(victim)
                        progressed = True
                        break
                    self.vc.flag_wb(victim)
                else:
                    self.vc.drop_regular(victim)
                    progressed = True
                    break
            if not progressed:
                # Every regular line went to the write buffer without freeing
                # a slot; only a drain can make progress now.
                ready = self._compulsory_drain_vc(ready)

    def _compulsory_drain_vc(self, at: int) -> int:
        line = self.vc.oldest_wb()
        assert line is not None, "allocation stalled with an empty write buffer"
        if not line.draining:
            self._start_vc_drain(line, at)
        self.engine.run_while(lambda: self.vc.wb.get(line.tag) is line,
                              "vector write-buffer drain")
        return self.engine.now

    def _start_vc_drain(self, line, at: int):
        line.draining = True
        todo = line.valid_mask & line.dirty_mask
        if not todo:
            self.vc.drop_wb(line)  # nothing dirty to write
            return

        def on_written(cycle, line=line):
            line.drain_pending -= 1
            if line.drain_pending == 0 and line.mode == WB_FLAGGED and line.draining:
                self.vc.drop_wb(line)

        base = self.map.vector_line_base(line.tag)
        for idx in range(self.vc.sectors_per_line):
            if todo >> idx & 1:
                line.drain_pending += 1
                self.mem.write_back(base + idx * self.map.sector_bytes,
                                    line.versions[idx], on_written, at)

    # -- shared miss plumbing ---------------------------------------------------

    def _spawn_demand(self, s: int, dest: str, at: int):
        cell = []
        self.mem.demand_read(s, dest,
                             lambda version, cycle: cell.append((version, cycle)), at)
        return cell

    def _await(self, cell):
        self.engine.run_while(lambda: not cell, "demand fill")
        return cell[0]

    def _wait_for_prefetch(self, s: int) -> int:
        cell = []
        self.mem.add_prefetch_waiter(s, lambda version, cycle: cell.append(cycle))
        self.engine.run_while(lambda: not cell, "in-flight prefetch")
        return cell[0]

    def _eager_drains(self, at: int):
        """After a demand goes out, keep the buffers moving: kick the oldest
        idle entry/line once occupancy reaches its threshold."""
        if len(self.scwb) >= self.cfg.drain_threshold_sc:
            entry = self.scwb.oldest_idle()
            if entry is not None:
                self._start_sc_drain(entry, at)
        if len(self.vc.wb) >= self.cfg.drain_threshold_vc:
            line = self.vc.oldest_wb_idle()
            if line is not None:
                self._start_vc_drain(line, at)

    # -- prefetch fills -----------------------------------------------------------

    def _consume_pf(self, line, sector: int):
        bit = 1 << sector
        if line.pf_mask & bit:
            line.pf_mask &= ~bit
            self.stats.pf_useful += 1

    def _sc_resident(self, s: int) -> bool:
        tag, set_idx, _ = self.map.scalar(s)
        return self.sc.find(set_idx, tag) is not None or s in self.scwb

    def _prefetch_fill(self, s: int, version: int, cycle: int) -> bool:
        """Cache-side acceptance of a completed prefetch: fills only an invalid
        sector of an existing regular line, and never one that lives scalar-side
        or has a write-back in flight (the fetched data would be stale)."""
        if self._sc_resident(s) or self.mem.wb_in_flight(s):
            self.stats.pf_rejected += 1
            return False
        vtag, vsec, _ = self.map.vector(s)
        if self.vc.prefetch_fill(vtag, vsec, version):
            self.stats.pf_filled += 1
            return True
        self.stats.pf_rejected += 1
        return False

    def _ideal_fill(self, line):
        """Upper-bound prefetching: populate the rest of the line at the cost
        already paid for the demanded sector."""
        base = self.map.vector_line_base(line.tag)
        for idx in range(self.vc.sectors_per_line):
            if line.sector_valid(idx):
                continue
            sector = base + idx * self.map.sector_bytes
            if self._sc_resident(sector) or self.mem.wb_in_flight(sector):
                continue
            self.vc.install_sector(line, idx, False, self.mem.mem_image.get(sector, 0))
            line.pf_mask |= 1 << idx
            self.stats.pf_issued += 1
            self.stats.pf_filled += 1

    # -- end of run ------------------------------------------------------------

    def flush(self, at: int) -> int:
        """Write back every dirty sector still resident; returns the number of
        write-back requests spawned. Caches end clean (but stay populated)."""
        n = 0
        for set_idx, line in self.sc.lines():
            if line.dirty:
                sector = self.map.compose_scalar(ScalarIndex(line.tag, set_idx, 0))
                self.mem.write_back(sector, line.version, None, at)
                line.dirty = False
                n += 1
        for entry in self.scwb.entries():
            if not entry.draining:
                self._start_sc_drain(entry, at)
                n += 1
        for line in list(self.vc.lines()):
            if line.mode == WB_FLAGGED:
                if not line.draining:
                    todo = line.valid_mask & line.dirty_mask
                    self._start_vc_drain(line, at)
                    n += bin(todo).count("1")
                continue
            todo = line.valid_mask & line.dirty_mask
            base = self.map.vector_line_base(line.tag)
            for idx in range(self.vc.sectors_per_line):
                if todo >> idx & 1:
                    self.mem.write_back(base + idx * self.map.sector_bytes,
                                        line.versions[idx], None, at)
                    n += 1
            line.dirty_mask = 0
        return n

    # -- invariants ----------------------------------------------------------------

    def _assert_not_in_vc(self, s: int):
        vtag, vsec, _ = self.map.vector(s)
        line = self.vc.find(vtag)
        assert line is None or not line.sector_valid(vsec), \
            f"sector 0x{s:08x} entering SC while valid in VC"

    def _assert_not_in_sc(self, s: int):
        assert not self._sc_resident(s), \
            f"sector 0x{s:08x} entering VC while resident in SC"

    def verify_exclusivity(self):
        """Full sweep: no sector valid on both sides, plus local mask/count
        invariants. Meant for tests; O(total lines)."""
        assert len(self.vc.wb) <= self.vc.wb_capacity
        assert len(self.scwb) <= self.scwb.capacity
        for line in self.vc.lines():
            assert line.dirty_mask & ~line.valid_mask == 0, "dirty implies valid"
        for set_idx, line in self.sc.lines():
            sector = self.map.compose_scalar(ScalarIndex(line.tag, set_idx, 0))
            self._assert_not_in_vc(sector)
            assert sector not in self.scwb, "sector both in SC and its buffer"
        for sector in self.scwb.sectors():
            self._assert_not_in_vc(sector)
