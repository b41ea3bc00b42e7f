"""Memory controller: 8 DRAM banks with single open rows, FCFS per-bank
queues, RAS/CAS/PRE timing and the memory-side vector-line prefetcher.

Timing model per request: service starts when the bank is free, costs
CAS on an open-row hit, RAS+CAS on a closed bank, PRE+RAS+CAS on a row
conflict, and completion leaves the row open (open-page policy). Completed
reads occupy the memory-to-cache bus for one transfer slot before the fill
lands; write-backs occupy the cache-to-memory bus for one slot before they
join their bank queue. Read commands themselves travel for free (their cost
is folded into the cache lookup cycles).

The prefetcher runs whenever a bank goes idle with an empty queue: it scans
banks in index order and extends the last vector-line read of the first
eligible bank by one sector, provided that read's row is still open and the
line has sectors left. Prefetches are never cancelled; a stale fill is
rejected at the cache and only bank time is lost. Demands arriving for a
sector with a prefetch already in flight attach to it instead of fetching
twice (see the controller).
"""

from collections import deque
from typing import Callable

from bcsim.engine import Bus, TimingWheel, FROM_MEMORY, TO_MEMORY

DEMAND_READ = "demand_read"
WRITE_BACK = "write_back"
PREFETCH_READ = "prefetch_read"

DEST_SCALAR = "scalar"
DEST_VECTOR = "vector"
DEST_WHITE = "white"

N_BANKS = 8


class MemoryRequest:
    __slots__ = ("kind", "sector_base", "bank", "row", "dest", "on_data",
                 "on_written", "version", "issue_cycle", "ready")

    def __init__(self, kind, sector_base, bank, row, dest=None, on_data=None,
                 on_written=None, version=None, issue_cycle=0, ready=0):
        self.kind = kind
        self.sector_base = sector_base
        self.bank = bank
        self.row = row
        self.dest = dest
        self.on_data = on_data
        self.on_written = on_written
        self.version = version
        self.issue_cycle = issue_cycle
        self.ready = ready  # service cannot start before this (write data arrival)


class BankState:
    __slots__ = ("index", "open_row", "queue", "inflight", "last_read")

    def __init__(self, index: int):
        self.index = index
        self.open_row = None
        self.queue: deque = deque()
        self.inflight: MemoryRequest | None = None
        self.last_read: int | None = None  # sector base of the last VC-bound read

    @property
    def idle(self) -> bool:
        return self.inflight is None and not self.queue


class MemoryController:
    def __init__(self, cfg, engine: TimingWheel, bus: Bus, addr_map, stats,
                 mem_image: dict):
        self.cfg = cfg
        self.engine = engine
        self.bus = bus
        self.map = addr_map
        self.stats = stats
        self.mem_image = mem_image
        self.banks = [BankState(i) for i in range(N_BANKS)]
        self.prefetch_enabled = False
        # Installed by the cache controller: fill(sector, version, cycle) -> bool.
        self.prefetch_fill: Callable | None = None
        self._pf_inflight: dict[int, list] = {}   # sector -> merged-demand waiters
        self._wb_inflight: dict[int, int] = {}    # sector -> outstanding write count

    # -- request entry points ----------------------------------------------

    def demand_read(self, sector_base: int, dest: str, on_data, at: int):
        """Queue a read; FCFS position is the emission order, service starts
        no earlier than `at` (the cycle the lookups finished)."""
        c = self.map.dram(sector_base)
        req = MemoryRequest(DEMAND_READ, sector_base, c.bank, c.row,
                            dest=dest, on_data=on_data, issue_cycle=at, ready=at)
        self._enqueue(req, self.engine.now)

    def write_back(self, sector_base: int, version: int, on_written, at: int):
        """Queue a write in emission order; its data crosses the cache-to-memory
        bus first, so service waits for that transfer."""
        # A drain decided at lookup time may be emitted after a stall resolved;
        # it physically starts no earlier than now.
        at = max(at, self.engine.now)
        c = self.map.dram(sector_base)
        grant = self.bus.acquire(TO_MEMORY, at)
        req = MemoryRequest(WRITE_BACK, sector_base, c.bank, c.row,
                            on_written=on_written, version=version,
                            issue_cycle=at, ready=grant + self.bus.transfer_cycles)
        self._wb_inflight[sector_base] = self._wb_inflight.get(sector_base, 0) + 1
        self._enqueue(req, self.engine.now)

    # -- in-flight visibility (merging and fill guards) ---------------------

    def has_inflight_prefetch(self, sector_base: int) -> bool:
        return sector_base in self._pf_inflight

    def add_prefetch_waiter(self, sector_base: int, waiter):
        self._pf_inflight[sector_base].append(waiter)

    def wb_in_flight(self, sector_base: int) -> bool:
        return self._wb_inflight.get(sector_base, 0) > 0

    # -- bank machinery ------------------------------------------------------

    def _enqueue(self, req: MemoryRequest, cycle: int):
        bank = self.banks[req.bank]
        bank.queue.append(req)
        if bank.inflight is None:
            self._begin(bank, cycle)

    def _service_cycles(self, bank: BankState, row: int) -> int:
        cfg = self.cfg
        self.stats.cas_count += 1
        if bank.open_row == row:
            return cfg.lat_cas
        if bank.open_row is None:
            self.stats.ras_count += 1
            return cfg.lat_ras + cfg.lat_cas
        self.stats.ras_count += 1
        self.stats.pre_count += 1
        return cfg.lat_pre + cfg.lat_ras + cfg.lat_cas

    def _begin(self, bank: BankState, cycle: int):
        req = bank.queue.popleft()
        bank.inflight = req
        start = max(cycle, req.ready)
        latency = self._service_cycles(bank, req.row)
        self.engine.schedule(start + latency,
                             lambda c, bank=bank: self._complete(bank, c),
                             "bank-complete")

    def _complete(self, bank: BankState, cycle: int):
        req = bank.inflight
        bank.inflight = None
        bank.open_row = req.row
        if req.kind == WRITE_BACK:
            self.mem_image[req.sector_base] = req.version
            self.stats.writebacks += 1
            left = self._wb_inflight[req.sector_base] - 1
            if left:
                self._wb_inflight[req.sector_base] = left
            else:
                del self._wb_inflight[req.sector_base]
            if req.on_written is not None:
                req.on_written(cycle)
        else:
            version = self.mem_image.get(req.sector_base, 0)
            if req.dest == DEST_VECTOR:
                bank.last_read = req.sector_base
            grant = self.bus.acquire(FROM_MEMORY, cycle)
            self.engine.schedule(
                grant + self.bus.transfer_cycles,
                lambda c, req=req, v=version: self._deliver(req, v, c),
                "fill-deliver")
        if bank.queue:
            self._begin(bank, cycle)
        else:
            self._maybe_prefetch(cycle)

    def _deliver(self, req: MemoryRequest, version: int, cycle: int):
        if req.kind == DEMAND_READ:
            req.on_data(version, cycle)
            return
        filled = self.prefetch_fill(req.sector_base, version, cycle)
        waiters = self._pf_inflight.pop(req.sector_base)
        if waiters:
            assert filled, "merged demand lost its prefetch fill"
            for waiter in waiters:
                waiter(version, cycle)

    # -- prefetcher ----------------------------------------------------------

    def _maybe_prefetch(self, cycle: int):
        if not self.prefetch_enabled:
            return
        spl = self.map
        line_sectors = 1 << spl.vc_sector_bits
        for bank in self.banks:
            if not bank.idle or bank.last_read is None:
                continue
            _, sector_idx, _ = spl.vector(bank.last_read)
            if sector_idx >= line_sectors - 1:
                continue
            if bank.open_row != spl.row_of(bank.last_read):
                continue
            target = bank.last_read + spl.sector_bytes
            if target in self._pf_inflight:
                continue
            self._pf_inflight[target] = []
            self.stats.pf_issued += 1
            c = spl.dram(target)
            req = MemoryRequest(PREFETCH_READ, target, c.bank, c.row,
                                dest=DEST_VECTOR, issue_cycle=cycle)
            self._enqueue(req, cycle)
            return
