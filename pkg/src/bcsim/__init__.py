"""Cycle-level simulator of a split scalar/vector cache hierarchy over a
banked DRAM, with a conventional-cache baseline, memory-side prefetching,
synthetic vector workloads and a CSV metrics pipeline."""

from bcsim.config import ConfigError, SimConfig, load_config_file, validate_config
from bcsim.controller import OracleDivergence
from bcsim.simulator import Simulation, run_trace
from bcsim.stats import CSV_COLUMNS, StatsRecord, speedup
from bcsim.trace import (Compute, ScalarMem, SectorAccess, VectorMem,
                         read_trace, sector_accesses, write_trace)
from bcsim.workloads import (CsrMatrix, WorkloadSpec, build_trace,
                             load_matrix_market, synthetic_csr, workload_spec)

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "SimConfig", "load_config_file", "validate_config",
    "OracleDivergence", "Simulation", "run_trace",
    "CSV_COLUMNS", "StatsRecord", "speedup",
    "Compute", "ScalarMem", "SectorAccess", "VectorMem",
    "read_trace", "sector_accesses", "write_trace",
    "CsrMatrix", "WorkloadSpec", "build_trace", "load_matrix_market",
    "synthetic_csr", "workload_spec",
    "__version__",
]
