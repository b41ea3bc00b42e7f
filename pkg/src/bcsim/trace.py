"""Instruction-level trace events, sector coalescing and the trace text format.

A trace is a flat stream of three event kinds: compute delays, scalar memory
references and vector memory references with explicit per-element addresses.
The cache hierarchy consumes SectorAccess records instead: consecutive
elements that share a 64 B sector are merged into one access, and a store
whose merged elements cover all 64 bytes is marked full_sector_write (such
stores may skip the read-for-ownership fetch).

Text format, one event per line, `#` comments, LF endings:

    C <cycles>
    SL <hexaddr> <size>          scalar load  (size <= 8)
    SS <hexaddr> <size>          scalar store
    VL <elem_size> <hexaddr>...  vector load  (elem_size 4 or 8)
    VS <elem_size> <hexaddr>...  vector store
"""

from dataclasses import dataclass
from typing import Iterable, Iterator, Union

from bcsim.address import MAX_ADDR


@dataclass(frozen=True, slots=True)
class Compute:
    cycles: int


@dataclass(frozen=True, slots=True)
class ScalarMem:
    write: bool
    addr: int
    size: int


@dataclass(frozen=True, slots=True)
class VectorMem:
    write: bool
    elem_bytes: int
    elem_addrs: tuple


TraceEvent = Union[Compute, ScalarMem, VectorMem]


@dataclass(frozen=True, slots=True)
class SectorAccess:
    """One sector-aligned cache reference, the unit the hierarchy operates on."""
    sector_base: int
    write: bool
    vector: bool
    full_sector_write: bool = False


class TraceParseError(ValueError):
    def __init__(self, source: str, lineno: int, message: str):
        self.lineno = lineno
        super().__init__(f"{source}:{lineno}: {message}")


_FULL_COVER = (1 << 64) - 1


def _pieces(addr: int, size: int, sector_bytes: int) -> Iterator[tuple]:
    """Split one element into (sector_base, start, size) pieces; an element
    straddling a sector boundary yields two."""
    while size > 0:
        base = addr & ~(sector_bytes - 1)
        start = addr - base
        take = min(size, sector_bytes - start)
        yield base, start, take
        addr += take
        size -= take


def sector_accesses(event: TraceEvent, sector_bytes: int = 64) -> list:
    """Coalesce one memory event into ordered SectorAccess records.

    Consecutive elements sharing a sector merge into one access; a sector
    revisited non-consecutively starts a fresh access so program order is
    preserved.
    """
    if isinstance(event, ScalarMem):
        elems = [(event.addr, event.size)]
        write, vector = event.write, False
    elif isinstance(event, VectorMem):
        elems = [(a, event.elem_bytes) for a in event.elem_addrs]
        write, vector = event.write, True
    else:
        raise TypeError(f"not a memory event: {event!r}")

    out: list = []
    cur_base = -1
    cur_cover = 0

    def flush():
        if cur_base >= 0:
            full = write and cur_cover == _FULL_COVER and sector_bytes == 64
            out.append(SectorAccess(cur_base, write, vector, full))

    for addr, size in elems:
        for base, start, take in _pieces(addr, size, sector_bytes):
            if base != cur_base:
                flush()
                cur_base, cur_cover = base, 0
            cur_cover |= ((1 << take) - 1) << start
    flush()
    return out


def trace_bytes(event: TraceEvent) -> int:
    """Bytes moved by one memory event (0 for compute)."""
    if isinstance(event, ScalarMem):
        return event.size
    if isinstance(event, VectorMem):
        return event.elem_bytes * len(event.elem_addrs)
    return 0


# -- text format -----------------------------------------------------------


def format_event(event: TraceEvent) -> str:
    if isinstance(event, Compute):
        return f"C {event.cycles}"
    if isinstance(event, ScalarMem):
        op = "SS" if event.write else "SL"
        return f"{op} 0x{event.addr:x} {event.size}"
    op = "VS" if event.write else "VL"
    addrs = " ".join(f"0x{a:x}" for a in event.elem_addrs)
    return f"{op} {event.elem_bytes} {addrs}"


def write_trace(path, events: Iterable[TraceEvent]):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for ev in events:
            fh.write(format_event(ev) + "\n")


def _check_addr(addr: int, source: str, lineno: int):
    if not 0 <= addr < MAX_ADDR:
        raise TraceParseError(source, lineno, f"address 0x{addr:x} outside the 4 GB space")


def parse_trace_line(line: str, source: str = "<trace>", lineno: int = 0):
    stripped = line.split("#", 1)[0].strip()
    if not stripped:
        return None
    fields = stripped.split()
    op = fields[0]
    try:
        if op == "C":
            if len(fields) != 2:
                raise ValueError("expected `C <cycles>`")
            cycles = int(fields[1])
            if cycles < 0:
                raise ValueError("negative compute latency")
            return Compute(cycles)
        if op in ("SL", "SS"):
            if len(fields) != 3:
                raise ValueError(f"expected `{op} <hexaddr> <size>`")
            addr, size = int(fields[1], 16), int(fields[2])
            _check_addr(addr, source, lineno)
            if not 0 < size <= 8:
                raise ValueError(f"scalar size must be 1..8, got {size}")
            return ScalarMem(op == "SS", addr, size)
        if op in ("VL", "VS"):
            if len(fields) < 3:
                raise ValueError(f"expected `{op} <elem_size> <hexaddr>...`")
            elem = int(fields[1])
            if elem not in (4, 8):
                raise ValueError(f"element size must be 4 or 8, got {elem}")
            addrs = tuple(int(f, 16) for f in fields[2:])
            for a in addrs:
                _check_addr(a, source, lineno)
            return VectorMem(op == "VS", elem, addrs)
        raise ValueError(f"unknown event {op!r}")
    except TraceParseError:
        raise
    except ValueError as exc:
        raise TraceParseError(source, lineno, str(exc)) from None


def read_trace(path) -> Iterator[TraceEvent]:
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            event = parse_trace_line(line, source=str(path), lineno=lineno)
            if event is not None:
                yield event
