"""Physical address layout and the bit-field decompositions used everywhere else.

The simulator models a 4 GB physical space (32-bit byte addresses). The DRAM
side splits an address as row | bank | column | offset (MSB to LSB) so that one
column holds exactly one 64 B sector and the 16 sectors of a vector cache line
share a single bank and row. Cache-side decompositions follow the usual
tag | index | offset shape, with widths derived from the configured geometry.

All decompositions are total functions of the address; recomposing the fields
reproduces the original address exactly.
"""

from typing import NamedTuple

PHYS_ADDR_BITS = 32
MAX_ADDR = 1 << PHYS_ADDR_BITS

DRAM_ROW_BITS = 15   # 32768 rows
DRAM_BANK_BITS = 3   # 8 banks
DRAM_COL_BITS = 8    # 256 columns, one sector each


class DramCoord(NamedTuple):
    row: int
    bank: int
    column: int
    offset: int


class ScalarIndex(NamedTuple):
    tag: int
    set: int
    offset: int


class VectorIndex(NamedTuple):
    tag: int
    sector: int
    offset: int


class WhiteIndex(NamedTuple):
    tag: int
    set: int
    offset: int


def _log2_exact(value: int, name: str) -> int:
    if value <= 0 or value & (value - 1):
        raise ValueError(f"{name} must be a positive power of two, got {value}")
    return value.bit_length() - 1


class AddressMap:
    """Bit-slicing helpers for one cache geometry.

    The DRAM layout is fixed (it tiles the 4 GB space); cache index widths are
    derived from the geometry passed in, which defaults to the standard one:
    64 B sectors, 256-set scalar cache, 16-sector vector lines, 512-set white
    cache.
    """

    def __init__(self, sector_bytes: int = 64, sc_sets: int = 256,
                 vc_sectors_per_line: int = 16, wc_sets: int = 512):
        self.sector_bytes = sector_bytes
        self.offset_bits = _log2_exact(sector_bytes, "sector_bytes")
        self.sc_set_bits = _log2_exact(sc_sets, "sc_sets")
        self.vc_sector_bits = _log2_exact(vc_sectors_per_line, "vc_sectors_per_line")
        self.wc_set_bits = _log2_exact(wc_sets, "wc_sets")
        dram_bits = self.offset_bits + DRAM_COL_BITS + DRAM_BANK_BITS + DRAM_ROW_BITS
        if dram_bits != PHYS_ADDR_BITS:
            raise ValueError(
                f"sector size {sector_bytes} does not tile the 4 GB space "
                f"({dram_bits} != {PHYS_ADDR_BITS} address bits)")
        self.sector_mask = sector_bytes - 1

    # -- DRAM ------------------------------------------------------------

    def dram(self, addr: int) -> DramCoord:
        off = addr & self.sector_mask
        col = (addr >> self.offset_bits) & ((1 << DRAM_COL_BITS) - 1)
        bank = (addr >> (self.offset_bits + DRAM_COL_BITS)) & ((1 << DRAM_BANK_BITS) - 1)
        row = addr >> (self.offset_bits + DRAM_COL_BITS + DRAM_BANK_BITS)
        return DramCoord(row, bank, col, off)

    def compose_dram(self, c: DramCoord) -> int:
        return (((c.row << DRAM_BANK_BITS | c.bank) << DRAM_COL_BITS | c.column)
                << self.offset_bits) | c.offset

    def bank_of(self, addr: int) -> int:
        return (addr >> (self.offset_bits + DRAM_COL_BITS)) & ((1 << DRAM_BANK_BITS) - 1)

    def row_of(self, addr: int) -> int:
        return addr >> (self.offset_bits + DRAM_COL_BITS + DRAM_BANK_BITS)

    # -- scalar cache ----------------------------------------------------

    def scalar(self, addr: int) -> ScalarIndex:
        off = addr & self.sector_mask
        set_ = (addr >> self.offset_bits) & ((1 << self.sc_set_bits) - 1)
        tag = addr >> (self.offset_bits + self.sc_set_bits)
        return ScalarIndex(tag, set_, off)

    def compose_scalar(self, i: ScalarIndex) -> int:
        return ((i.tag << self.sc_set_bits | i.set) << self.offset_bits) | i.offset

    # -- vector cache ----------------------------------------------------

    def vector(self, addr: int) -> VectorIndex:
        off = addr & self.sector_mask
        sector = (addr >> self.offset_bits) & ((1 << self.vc_sector_bits) - 1)
        tag = addr >> (self.offset_bits + self.vc_sector_bits)
        return VectorIndex(tag, sector, off)

    def compose_vector(self, i: VectorIndex) -> int:
        return ((i.tag << self.vc_sector_bits | i.sector) << self.offset_bits) | i.offset

    def vector_line_base(self, tag: int) -> int:
        return tag << (self.vc_sector_bits + self.offset_bits)

    # -- white cache -----------------------------------------------------

    def white(self, addr: int) -> WhiteIndex:
        off = addr & self.sector_mask
        set_ = (addr >> self.offset_bits) & ((1 << self.wc_set_bits) - 1)
        tag = addr >> (self.offset_bits + self.wc_set_bits)
        return WhiteIndex(tag, set_, off)

    def compose_white(self, i: WhiteIndex) -> int:
        return ((i.tag << self.wc_set_bits | i.set) << self.offset_bits) | i.offset

    # -- misc --------------------------------------------------------------

    def sector_base(self, addr: int) -> int:
        return addr & ~self.sector_mask


DEFAULT_MAP = AddressMap()
