"""Fully associative vector cache: 64 lines of 16 sectors with an embedded
write buffer.

Lines are keyed by tag; because the cache is fully associative, slot identity
never matters, only the total line count. A line is either regular (subject
to LRU) or WB-flagged (awaiting write-back, FIFO by flag time). Flagging is
in place: no data moves, the line simply stops being allocatable, so the
regular capacity shrinks while the write buffer is occupied. At most
`wb_capacity` lines may be flagged at once.

Per-sector state is kept in bit masks (valid, dirty, prefetched-not-yet-used)
plus a version stamp per sector for the functional oracle.
"""

from collections import OrderedDict

REGULAR = 0
WB_FLAGGED = 1


class VectorLine:
    __slots__ = ("tag", "mode", "valid_mask", "dirty_mask", "pf_mask",
                 "versions", "draining", "drain_pending")

    def __init__(self, tag: int, n_sectors: int):
        self.tag = tag
        self.mode = REGULAR
        self.valid_mask = 0
        self.dirty_mask = 0
        self.pf_mask = 0          # prefetched sectors not yet referenced
        self.versions = [0] * n_sectors
        self.draining = False
        self.drain_pending = 0    # write-backs still in flight for this line

    def sector_valid(self, sector: int) -> bool:
        return bool(self.valid_mask >> sector & 1)

    def sector_dirty(self, sector: int) -> bool:
        return bool(self.dirty_mask >> sector & 1)


class VectorCache:
    def __init__(self, n_lines: int, sectors_per_line: int, wb_capacity: int):
        self.n_lines = n_lines
        self.sectors_per_line = sectors_per_line
        self.wb_capacity = wb_capacity
        # OrderedDicts double as recency (regular, oldest first) and FIFO (wb).
        self.regular: OrderedDict[int, VectorLine] = OrderedDict()
        self.wb: OrderedDict[int, VectorLine] = OrderedDict()

    # -- lookups -----------------------------------------------------------

    def find(self, tag: int) -> VectorLine | None:
        line = self.regular.get(tag)
        if line is None:
            line = self.wb.get(tag)
        return line

    def touch(self, line: VectorLine):
        assert line.mode == REGULAR
        self.regular.move_to_end(line.tag)

    @property
    def slots_used(self) -> int:
        return len(self.regular) + len(self.wb)

    @property
    def has_free_slot(self) -> bool:
        return self.slots_used < self.n_lines

    # -- state transitions ---------------------------------------------------

    def insert_line(self, tag: int) -> VectorLine:
        assert self.has_free_slot, "vector cache has no free line"
        assert self.find(tag) is None, f"duplicate vector tag {tag:#x}"
        line = VectorLine(tag, self.sectors_per_line)
        self.regular[tag] = line
        return line

    def install_sector(self, line: VectorLine, sector: int, dirty: bool, version: int):
        assert self.find(line.tag) is line, "install into a missing tag"
        bit = 1 << sector
        line.valid_mask |= bit
        if dirty:
            line.dirty_mask |= bit
        line.versions[sector] = version

    def flag_wb(self, line: VectorLine):
        """Turn an evicted dirty regular line into a write-buffer line in place."""
        assert line.mode == REGULAR and line.dirty_mask
        assert len(self.wb) < self.wb_capacity, "vector write buffer overflow"
        del self.regular[line.tag]
        line.mode = WB_FLAGGED
        line.draining = False
        self.wb[line.tag] = line

    def restore(self, line: VectorLine):
        """Revert a WB line to a regular MRU line, masks intact."""
        assert line.mode == WB_FLAGGED
        del self.wb[line.tag]
        line.mode = REGULAR
        line.draining = False
        self.regular[line.tag] = line

    def drop_regular(self, line: VectorLine):
        assert line.mode == REGULAR
        del self.regular[line.tag]

    def drop_wb(self, line: VectorLine):
        assert line.mode == WB_FLAGGED
        del self.wb[line.tag]

    def oldest_wb(self) -> VectorLine | None:
        for line in self.wb.values():
            return line
        return None

    def oldest_wb_idle(self) -> VectorLine | None:
        for line in self.wb.values():
            if not line.draining:
                return line
        return None

    def lru_regular_lines(self):
        """Regular lines in LRU-first order (snapshot, safe to mutate during)."""
        return list(self.regular.values())

    def prefetch_fill(self, tag: int, sector: int, version: int) -> bool:
        """Fill one sector of an existing regular line, valid and clean, without
        touching recency. Never allocates, never evicts; anything else is a
        rejection with no state change."""
        line = self.regular.get(tag)
        if line is None or line.sector_valid(sector):
            return False
        bit = 1 << sector
        line.valid_mask |= bit
        line.pf_mask |= bit
        line.versions[sector] = version
        return True

    def lines(self):
        yield from self.regular.values()
        yield from self.wb.values()
