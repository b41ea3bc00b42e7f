"""Validated simulation configuration and the flat key=value config file format."""

import dataclasses
from dataclasses import dataclass
from typing import Mapping

from bcsim.address import AddressMap

VL_BITS_ALLOWED = (128, 256, 512, 1024, 2048, 4096)
HIERARCHIES = ("bicameral", "white")
PREFETCH_MODES = ("off", "on", "ideal")


class ConfigError(ValueError):
    """Raised with every violated constraint, not just the first one."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("invalid configuration:\n  " + "\n  ".join(self.problems))


@dataclass(frozen=True)
class SimConfig:
    sector_bytes: int = 64
    sc_sets: int = 256
    sc_ways: int = 4
    vc_lines: int = 64
    vc_sectors_per_line: int = 16
    wb_capacity: int = 8
    wc_sets: int = 512
    wc_ways: int = 4
    drain_threshold_sc: int = 8
    # None derives the default floor(wb_capacity/2)+1.
    drain_threshold_vc: int | None = 5
    lat_lookup: int = 1
    lat_ras: int = 28
    lat_cas: int = 11
    lat_pre: int = 11
    bus_bits: int = 512
    hierarchy: str = "bicameral"
    prefetch: str = "off"
    vl_bits: int = 512
    fetch_on_full_write: bool = False
    rng_seed: int = 0

    @property
    def sc_bytes(self) -> int:
        return self.sc_sets * self.sc_ways * self.sector_bytes

    @property
    def vc_bytes(self) -> int:
        return self.vc_lines * self.vc_sectors_per_line * self.sector_bytes

    @property
    def wc_bytes(self) -> int:
        return self.wc_sets * self.wc_ways * self.sector_bytes

    @property
    def bus_transfer_cycles(self) -> int:
        return max(1, (self.sector_bytes * 8 + self.bus_bits - 1) // self.bus_bits)

    def address_map(self) -> AddressMap:
        return AddressMap(self.sector_bytes, self.sc_sets,
                          self.vc_sectors_per_line, self.wc_sets)


_FIELDS = {f.name: f for f in dataclasses.fields(SimConfig)}
_BOOL_WORDS = {"true": True, "1": True, "yes": True,
               "false": False, "0": False, "no": False}


_BAD = object()


def _coerce(name: str, value, problems: list) -> object:
    ftype = _FIELDS[name].type
    kind = ftype if isinstance(ftype, str) else getattr(ftype, "__name__", str(ftype))
    if kind == "int | None" and (value is None or value == "derive"):
        return None
    if kind in ("int", "int | None"):
        if isinstance(value, bool):
            problems.append(f"{name}: expected an integer, got {value!r}")
            return _BAD
        try:
            return int(value, 0) if isinstance(value, str) else int(value)
        except (TypeError, ValueError):
            problems.append(f"{name}: expected an integer, got {value!r}")
            return _BAD
    if kind == "bool":
        if isinstance(value, bool):
            return value
        if isinstance(value, str) and value.lower() in _BOOL_WORDS:
            return _BOOL_WORDS[value.lower()]
        problems.append(f"{name}: expected a boolean, got {value!r}")
        return _BAD
    return str(value)


def validate_config(raw: Mapping[str, object] | None = None) -> SimConfig:
    """Apply defaults, coerce types and check every structural invariant.

    Raises ConfigError listing all violations; an empty input yields the
    standard configuration.
    """
    raw = dict(raw or {})
    problems: list[str] = []
    values: dict[str, object] = {}
    for key, value in raw.items():
        if key not in _FIELDS:
            problems.append(f"unknown key: {key}")
            continue
        coerced = _coerce(key, value, problems)
        if coerced is not _BAD:
            values[key] = coerced
    if problems:
        raise ConfigError(problems)

    cfg = SimConfig(**values)
    if cfg.drain_threshold_vc is None:
        cfg = dataclasses.replace(cfg, drain_threshold_vc=cfg.wb_capacity // 2 + 1)

    for name in ("sector_bytes", "sc_sets", "sc_ways", "vc_lines",
                 "vc_sectors_per_line", "wb_capacity", "wc_sets", "wc_ways"):
        if getattr(cfg, name) <= 0:
            problems.append(f"{name} must be positive, got {getattr(cfg, name)}")
    for name in ("sector_bytes", "sc_sets", "vc_sectors_per_line", "wc_sets"):
        v = getattr(cfg, name)
        if v > 0 and v & (v - 1):
            problems.append(f"{name} must be a power of two, got {v}")
    if cfg.vl_bits not in VL_BITS_ALLOWED:
        problems.append(f"vl_bits must be one of {VL_BITS_ALLOWED}, got {cfg.vl_bits}")
    if cfg.hierarchy not in HIERARCHIES:
        problems.append(f"hierarchy must be one of {HIERARCHIES}, got {cfg.hierarchy!r}")
    if cfg.prefetch not in PREFETCH_MODES:
        problems.append(f"prefetch must be one of {PREFETCH_MODES}, got {cfg.prefetch!r}")
    if not problems:
        if cfg.sc_bytes != cfg.vc_bytes:
            problems.append(
                f"scalar and vector halves must match: {cfg.sc_bytes} B != {cfg.vc_bytes} B")
        if cfg.sc_bytes + cfg.vc_bytes != cfg.wc_bytes:
            problems.append(
                f"white cache must equal both halves combined: "
                f"{cfg.wc_bytes} B != {cfg.sc_bytes + cfg.vc_bytes} B")
        if not 0 < cfg.drain_threshold_sc <= cfg.wb_capacity:
            problems.append(
                f"drain_threshold_sc must be in 1..{cfg.wb_capacity}, "
                f"got {cfg.drain_threshold_sc}")
        if not 0 < cfg.drain_threshold_vc <= cfg.wb_capacity:
            problems.append(
                f"drain_threshold_vc must be in 1..{cfg.wb_capacity}, "
                f"got {cfg.drain_threshold_vc}")
        for name in ("lat_lookup", "lat_ras", "lat_cas", "lat_pre", "bus_bits"):
            if getattr(cfg, name) <= 0:
                problems.append(f"{name} must be positive, got {getattr(cfg, name)}")
    if problems:
        raise ConfigError(problems)
    return cfg


def parse_config_text(text: str, source: str = "<config>") -> dict:
    """Parse flat `key = value` lines; `#` starts a comment. Unknown or duplicate
    keys are reported by validate_config / here so a bad file fails loudly."""
    values: dict[str, str] = {}
    problems: list[str] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            problems.append(f"{source}:{lineno}: expected `key = value`, got {line.strip()!r}")
            continue
        key, _, value = stripped.partition("=")
        key, value = key.strip(), value.strip()
        if key in values:
            problems.append(f"{source}:{lineno}: duplicate key {key!r}")
            continue
        values[key] = value
    if problems:
        raise ConfigError(problems)
    return values


def load_config_file(path) -> SimConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return validate_config(parse_config_text(fh.read(), source=str(path)))
