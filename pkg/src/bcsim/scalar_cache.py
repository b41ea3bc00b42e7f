"""Set-associative sector cache with LRU and a disjoint FIFO write buffer.

One line holds one sector. The same structure backs both the scalar half of
the split hierarchy (256 sets x 4 ways) and the conventional baseline cache
(512 sets x 4 ways); only the geometry differs. Lines carry a version stamp
so the functional oracle can track which write each copy reflects; no data
payloads are stored.
"""

from collections import OrderedDict


class SectorLine:
    __slots__ = ("tag", "dirty", "version", "stamp", "pf_pending")

    def __init__(self, tag: int, dirty: bool, version: int, stamp: int):
        self.tag = tag
        self.dirty = dirty
        self.version = version
        self.stamp = stamp       # recency; larger = more recently used
        self.pf_pending = False  # unused here, mirrors the vector side


class SetAssociativeCache:
    def __init__(self, n_sets: int, n_ways: int):
        self.n_sets = n_sets
        self.n_ways = n_ways
        self._sets: list[list[SectorLine]] = [[] for _ in range(n_sets)]
        self._clock = 0

    def _tick(self) -> int:
        self._clock += 1
        return self._clock

    def find(self, set_idx: int, tag: int) -> SectorLine | None:
        for line in self._sets[set_idx]:
            if line.tag == tag:
                return line
        return None

    def touch(self, line: SectorLine):
        line.stamp = self._tick()

    def install(self, set_idx: int, tag: int, dirty: bool, version: int) -> SectorLine | None:
        """Place (tag) as MRU in its set; returns the evicted LRU line if the
        set was full (caller decides what happens to a dirty victim).

        The tag must not already be resident: the controllers enforce
        exclusivity before calling.
        """
        ways = self._sets[set_idx]
        assert self.find(set_idx, tag) is None, f"duplicate install of tag {tag:#x}"
        victim = None
        if len(ways) >= self.n_ways:
            victim = min(ways, key=lambda l: l.stamp)
            ways.remove(victim)
        ways.append(SectorLine(tag, dirty, version, self._tick()))
        return victim

    def set_full(self, set_idx: int) -> bool:
        return len(self._sets[set_idx]) >= self.n_ways

    def evict_lru(self, set_idx: int) -> SectorLine | None:
        """Remove and return the LRU line of a full set; None if a way is free."""
        ways = self._sets[set_idx]
        if len(ways) < self.n_ways:
            return None
        victim = min(ways, key=lambda l: l.stamp)
        ways.remove(victim)
        return victim

    def invalidate(self, set_idx: int, tag: int) -> SectorLine:
        line = self.find(set_idx, tag)
        assert line is not None, f"invalidate of absent tag {tag:#x}"
        self._sets[set_idx].remove(line)
        return line

    def drop_all(self):
        for ways in self._sets:
            ways.clear()

    def lines(self):
        for set_idx, ways in enumerate(self._sets):
            for line in ways:
                yield set_idx, line

    def __len__(self):
        return sum(len(ways) for ways in self._sets)


class WriteBufferEntry:
    __slots__ = ("sector_base", "version", "draining", "alive")

    def __init__(self, sector_base: int, version: int):
        self.sector_base = sector_base
        self.version = version
        self.draining = False
        self.alive = True


class DisjointWriteBuffer:
    """FIFO buffer of evicted dirty sectors awaiting write-back.

    Entries leave either by restoration (re-reference) or when their write-back
    completes; insertion past capacity is a controller bug, the controller must
    drain first.
    """

    def __init__(self, capacity: int):
        self.capacity = capacity
        self._entries: OrderedDict[int, WriteBufferEntry] = OrderedDict()

    def __len__(self):
        return len(self._entries)

    def __contains__(self, sector_base: int) -> bool:
        return sector_base in self._entries

    def get(self, sector_base: int) -> WriteBufferEntry | None:
        return self._entries.get(sector_base)

    def insert(self, sector_base: int, version: int) -> WriteBufferEntry:
        assert len(self._entries) < self.capacity, "write buffer overflow"
        assert sector_base not in self._entries, \
            f"sector {sector_base:#x} already buffered"
        entry = WriteBufferEntry(sector_base, version)
        self._entries[sector_base] = entry
        return entry

    def remove(self, sector_base: int) -> WriteBufferEntry:
        entry = self._entries.pop(sector_base)
        entry.alive = False
        return entry

    def oldest(self) -> WriteBufferEntry | None:
        for entry in self._entries.values():
            return entry
        return None

    def oldest_idle(self) -> WriteBufferEntry | None:
        """Oldest entry whose drain has not started yet."""
        for entry in self._entries.values():
            if not entry.draining:
                return entry
        return None

    def entries(self):
        return list(self._entries.values())

    def sectors(self):
        return list(self._entries.keys())
