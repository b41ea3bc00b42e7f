"""Synthetic vector-kernel trace generation, sparse-matrix inputs and the
deterministic array layout.

Each kernel emits its strip-mined loop structure as trace events: vector
memory events carry exact element addresses, compute events carry the
per-instruction latencies of the modelled in-order vector pipeline (fused
multiply-add 6 cycles, simple vector ALU ops 4, vector min 7, reductions and
slides 8, scalar bookkeeping 1). Generation is address-only and independent of
any cache configuration.

Arrays are placed in declaration order starting at 0x1000_0000, aligned to
1 KiB (one vector line) and separated by a 64 KiB gap, so traces are
reproducible byte for byte. The gap spreads same-index elements of adjacent
arrays four DRAM banks apart (the maximum for an 8-bank space), which keeps
paired streams bank-parallel. Layout phase matters: write-back streams trail
their demand stream by a cache-capacity-dependent lag, and which bank they
land on relative to the demand streams follows from these offsets, so
benchmark figures are only comparable under one placement.
"""

import random
from dataclasses import dataclass, field

from bcsim.address import MAX_ADDR
from bcsim.trace import Compute, ScalarMem, VectorMem, read_trace

LAT_ALU = 4      # adds, moves, multiplies, broadcasts
LAT_FMA = 6
LAT_MIN = 7
LAT_REDUCE = 8
LAT_SLIDE = 8
LAT_SCALAR = 1

KERNELS = ("axpy", "mv", "mm", "jacobi2d", "pathfinder", "spmv", "file")

PLACEMENT_BASE = 0x1000_0000
PLACEMENT_ALIGN = 1024
PLACEMENT_GAP = 64 * 1024


@dataclass(frozen=True)
class CsrMatrix:
    rows: int
    cols: int
    row_ptr: tuple
    col_idx: tuple
    values: tuple

    def __post_init__(self):
        assert len(self.row_ptr) == self.rows + 1
        assert self.row_ptr[0] == 0 and self.row_ptr[-1] == len(self.col_idx)
        assert all(a <= b for a, b in zip(self.row_ptr, self.row_ptr[1:])), \
            "row_ptr must be monotone"
        assert all(0 <= c < self.cols for c in self.col_idx), \
            "column index out of bounds"
        assert len(self.values) == len(self.col_idx)

    @property
    def nnz(self) -> int:
        return len(self.col_idx)


@dataclass(frozen=True)
class WorkloadSpec:
    kernel: str
    vl_bits: int = 512
    elem_bytes: int = 8
    # Dense kernel dimensions (meaning varies per kernel, see workload_spec).
    n: int = 0
    rows: int = 0
    cols: int = 0
    repeat: int = 1
    density: float = 0.0
    matrix_path: str | None = None
    trace_path: str | None = None
    seed: int = 0
    base_addr: int = PLACEMENT_BASE
    name: str = field(default="", compare=False)

    @property
    def vl_elems(self) -> int:
        return max(1, self.vl_bits // (8 * self.elem_bytes))


_TABLE_DEFAULTS = {
    "axpy": dict(n=2048 * 1024 // 8),            # 2048 KB per array
    "mv": dict(rows=4096, cols=4096),
    "mm": dict(rows=256, cols=256),
    "jacobi2d": dict(rows=256, cols=256, repeat=1),
    "pathfinder": dict(rows=4096, cols=4096, repeat=100, elem_bytes=4),
    "spmv": dict(rows=4096, cols=4096, density=0.001, repeat=100),
}


def workload_spec(kernel: str, vl_bits: int = 512, *, size: str | None = None,
                  repeat: int | None = None, seed: int = 0,
                  matrix_path: str | None = None,
                  trace_path: str | None = None) -> WorkloadSpec:
    """Build a spec with the standard input sizes, optionally overridden.

    `size` forms: axpy takes bytes per array ("65536" or "64K"); the matrix
    kernels take "N" or "RxC"; spmv accepts "RxC:density".
    """
    if kernel not in KERNELS:
        raise ValueError(f"unknown kernel {kernel!r}, expected one of {KERNELS}")
    if kernel == "file":
        if not trace_path:
            raise ValueError("file workload needs a trace path")
        return WorkloadSpec("file", vl_bits, trace_path=trace_path, name="file")
    params = dict(_TABLE_DEFAULTS[kernel])
    if size is not None:
        params.update(_parse_size(kernel, size))
    if repeat is not None:
        params["repeat"] = repeat
    spec = WorkloadSpec(kernel, vl_bits, seed=seed, matrix_path=matrix_path,
                        name=kernel, **params)
    _check_footprint(spec)
    return spec


def _parse_size(kernel: str, size: str) -> dict:
    size = size.strip().lower()
    if kernel == "axpy":
        mult = 1
        if size.endswith("k"):
            mult, size = 1024, size[:-1]
        elif size.endswith("m"):
            mult, size = 1024 * 1024, size[:-1]
        return dict(n=int(size) * mult // 8)
    density = None
    if ":" in size:
        size, dens = size.split(":", 1)
        density = float(dens)
    if "x" in size:
        r, c = size.split("x", 1)
        rows, cols = int(r), int(c)
    else:
        rows = cols = int(size)
    out = dict(rows=rows, cols=cols)
    if density is not None:
        if kernel != "spmv":
            raise ValueError("only spmv takes a density")
        out["density"] = density
    return out


def place_arrays(sizes: list, base: int = PLACEMENT_BASE) -> dict:
    """Deterministic layout: declaration order, 1 KiB aligned, 64 KiB gaps."""
    addrs = {}
    cur = base
    for name, nbytes in sizes:
        cur = (cur + PLACEMENT_ALIGN - 1) // PLACEMENT_ALIGN * PLACEMENT_ALIGN
        addrs[name] = cur
        cur += nbytes + PLACEMENT_GAP
    if cur > MAX_ADDR:
        raise ValueError(f"working set exceeds the 4 GB space ({cur} bytes)")
    return addrs


def _check_footprint(spec: WorkloadSpec):
    """Eagerly validate that the dense kernels fit the address space (spmv
    depends on the matrix and is checked when its layout is built)."""
    eb = spec.elem_bytes
    k = spec.kernel
    if k == "axpy":
        place_arrays([("x", spec.n * eb), ("y", spec.n * eb)], spec.base_addr)
    elif k == "mv":
        place_arrays([("A", spec.rows * spec.cols * eb),
                      ("x", spec.cols * eb), ("y", spec.rows * eb)], spec.base_addr)
    elif k == "mm":
        n = spec.rows * spec.cols * eb
        place_arrays([("A", n), ("B", n), ("C", n)], spec.base_addr)
    elif k == "jacobi2d":
        n = spec.rows * spec.cols * eb
        place_arrays([("A", n), ("B", n)], spec.base_addr)
    elif k == "pathfinder":
        place_arrays([("wall", spec.rows * spec.cols * eb),
                      ("prev", spec.cols * eb), ("next", spec.cols * eb)],
                     spec.base_addr)


# -- kernel bodies -----------------------------------------------------------


def _unit(write: bool, eb: int, base: int, count: int) -> VectorMem:
    return VectorMem(write, eb, tuple(base + i * eb for i in range(count)))


def _strips(total: int, vl: int):
    for start in range(0, total, vl):
        yield start, min(vl, total - start)


def _gen_axpy(spec: WorkloadSpec):
    eb = spec.elem_bytes
    a = place_arrays([("x", spec.n * eb), ("y", spec.n * eb)], spec.base_addr)
    for _ in range(spec.repeat):
        for start, w in _strips(spec.n, spec.vl_elems):
            yield _unit(False, eb, a["x"] + start * eb, w)
            yield _unit(False, eb, a["y"] + start * eb, w)
            yield Compute(LAT_FMA)
            yield _unit(True, eb, a["y"] + start * eb, w)


def _gen_mv(spec: WorkloadSpec):
    eb = spec.elem_bytes
    m, n = spec.rows, spec.cols
    a = place_arrays([("A", m * n * eb), ("x", n * eb), ("y", m * eb)],
                     spec.base_addr)
    for _ in range(spec.repeat):
        for i in range(m):
            yield Compute(LAT_ALU)  # clear the accumulator
            row = a["A"] + i * n * eb
            for start, w in _strips(n, spec.vl_elems):
                yield _unit(False, eb, row + start * eb, w)
                yield _unit(False, eb, a["x"] + start * eb, w)
                yield Compute(LAT_FMA)
            yield Compute(LAT_REDUCE)
            yield ScalarMem(True, a["y"] + i * eb, eb)


def _gen_mm(spec: WorkloadSpec):
    eb = spec.elem_bytes
    n = spec.rows
    a = place_arrays([("A", n * n * eb), ("B", n * n * eb), ("C", n * n * eb)],
                     spec.base_addr)
    for _ in range(spec.repeat):
        for i in range(n):
            for start, w in _strips(n, spec.vl_elems):
                yield Compute(LAT_ALU)  # zero the accumulator strip
                for k in range(n):
                    yield ScalarMem(False, a["A"] + (i * n + k) * eb, eb)
                    yield _unit(False, eb, a["B"] + (k * n + start) * eb, w)
                    yield Compute(LAT_FMA)
                yield _unit(True, eb, a["C"] + (i * n + start) * eb, w)


def _gen_jacobi2d(spec: WorkloadSpec):
    eb = spec.elem_bytes
    n, m = spec.rows, spec.cols
    a = place_arrays([("A", n * m * eb), ("B", n * m * eb)], spec.base_addr)
    bufs = (a["A"], a["B"])
    for step in range(spec.repeat):
        src, dst = bufs[step % 2], bufs[(step + 1) % 2]
        for i in range(1, n - 1):
            row = src + i * m * eb
            for start, w in _strips(m - 2, spec.vl_elems):
                j = 1 + start
                yield _unit(False, eb, row + (j - 1) * eb, w)
                yield _unit(False, eb, row + j * eb, w)
                yield _unit(False, eb, row + (j + 1) * eb, w)
                yield _unit(False, eb, src + ((i - 1) * m + j) * eb, w)
                yield _unit(False, eb, src + ((i + 1) * m + j) * eb, w)
                for _ in range(4):
                    yield Compute(LAT_ALU)  # four adds
                yield Compute(LAT_ALU)      # scale by 0.2
                yield _unit(True, eb, dst + (i * m + j) * eb, w)


def _gen_pathfinder(spec: WorkloadSpec):
    eb = spec.elem_bytes  # integer weights
    rows, cols = spec.rows, spec.cols
    a = place_arrays([("wall", rows * cols * eb), ("prev", cols * eb),
                      ("next", cols * eb)], spec.base_addr)
    # Seed the first distance row once, outside the repeated region.
    for start, w in _strips(cols, spec.vl_elems):
        yield _unit(False, eb, a["wall"] + start * eb, w)
        yield _unit(True, eb, a["prev"] + start * eb, w)
    bufs = (a["prev"], a["next"])
    flip = 0
    for _ in range(spec.repeat):
        for i in range(1, rows):
            prev, nxt = bufs[flip % 2], bufs[(flip + 1) % 2]
            flip += 1
            wall_row = a["wall"] + i * cols * eb
            for start, w in _strips(cols, spec.vl_elems):
                yield _unit(False, eb, prev + start * eb, w)
                yield Compute(LAT_SLIDE)   # neighbour on the left
                yield Compute(LAT_SLIDE)   # neighbour on the right
                yield Compute(LAT_MIN)
                yield Compute(LAT_MIN)
                yield _unit(False, eb, wall_row + start * eb, w)
                yield Compute(LAT_ALU)
                yield _unit(True, eb, nxt + start * eb, w)


def synthetic_csr(rows: int, cols: int, density: float, seed: int) -> CsrMatrix:
    """Uniform random pattern matrix with a fixed per-row population."""
    rng = random.Random(seed)
    per_row = max(1, min(cols, round(density * cols)))
    row_ptr = [0]
    col_idx: list[int] = []
    for _ in range(rows):
        col_idx.extend(sorted(rng.sample(range(cols), per_row)))
        row_ptr.append(len(col_idx))
    return CsrMatrix(rows, cols, tuple(row_ptr), tuple(col_idx),
                     (1.0,) * len(col_idx))


def _gen_spmv(spec: WorkloadSpec):
    if spec.matrix_path:
        csr = load_matrix_market(spec.matrix_path)
    else:
        csr = synthetic_csr(spec.rows, spec.cols, spec.density, spec.seed)
    eb = spec.elem_bytes
    ib = 4  # index width
    a = place_arrays([
        ("row_ptr", (csr.rows + 1) * ib),
        ("col_idx", csr.nnz * ib),
        ("values", csr.nnz * eb),
        ("x", csr.cols * eb),
        ("y", csr.rows * eb),
    ], spec.base_addr)
    vl = spec.vl_elems
    for _ in range(spec.repeat):
        for i in range(csr.rows):
            yield ScalarMem(False, a["row_ptr"] + (i + 1) * ib, ib)
            yield Compute(LAT_SCALAR)
            begin, end = csr.row_ptr[i], csr.row_ptr[i + 1]
            for k in range(begin, end, vl):
                w = min(vl, end - k)
                yield VectorMem(False, ib, tuple(
                    a["col_idx"] + (k + j) * ib for j in range(w)))
                yield _unit(False, eb, a["values"] + k * eb, w)
                yield VectorMem(False, eb, tuple(
                    a["x"] + csr.col_idx[k + j] * eb for j in range(w)))
                yield Compute(LAT_FMA)
            yield Compute(LAT_REDUCE)
            yield ScalarMem(True, a["y"] + i * eb, eb)


_GENERATORS = {
    "axpy": _gen_axpy,
    "mv": _gen_mv,
    "mm": _gen_mm,
    "jacobi2d": _gen_jacobi2d,
    "pathfinder": _gen_pathfinder,
    "spmv": _gen_spmv,
}


def build_trace(spec: WorkloadSpec):
    """Trace event stream for a spec (lazy); `file` specs read from disk."""
    if spec.kernel == "file":
        return read_trace(spec.trace_path)
    return _GENERATORS[spec.kernel](spec)


# -- Matrix Market -----------------------------------------------------------


class MatrixMarketError(ValueError):
    pass


def load_matrix_market(path) -> CsrMatrix:
    """Coordinate-format reader: sorted, deduplicated CSR; pattern files get
    unit values; symmetric storage is mirrored."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().split()
        if (len(header) < 4 or header[0] != "%%MatrixMarket"
                or header[1].lower() != "matrix"
                or header[2].lower() != "coordinate"):
            raise MatrixMarketError(
                f"{path}: expected a `%%MatrixMarket matrix coordinate` header")
        fieldkind = header[3].lower()
        symmetry = header[4].lower() if len(header) > 4 else "general"
        if fieldkind not in ("real", "integer", "pattern"):
            raise MatrixMarketError(f"{path}: unsupported field {fieldkind!r}")
        if symmetry not in ("general", "symmetric"):
            raise MatrixMarketError(f"{path}: unsupported symmetry {symmetry!r}")

        dims = None
        entries = []
        for lineno, line in enumerate(fh, start=2):
            stripped = line.strip()
            if not stripped or stripped.startswith("%"):
                continue
            parts = stripped.split()
            if dims is None:
                if len(parts) != 3:
                    raise MatrixMarketError(
                        f"{path}:{lineno}: expected `rows cols nnz`")
                dims = tuple(int(p) for p in parts)
                continue
            want = 2 if fieldkind == "pattern" else 3
            if len(parts) < want:
                raise MatrixMarketError(f"{path}:{lineno}: short entry")
            i, j = int(parts[0]) - 1, int(parts[1]) - 1
            if not (0 <= i < dims[0] and 0 <= j < dims[1]):
                raise MatrixMarketError(
                    f"{path}:{lineno}: entry ({i + 1}, {j + 1}) out of range")
            v = 1.0 if fieldkind == "pattern" else float(parts[2])
            entries.append((i, j, v))
            if symmetry == "symmetric" and i != j:
                entries.append((j, i, v))
        if dims is None:
            raise MatrixMarketError(f"{path}: missing size line")

    rows, cols, _ = dims
    entries.sort(key=lambda e: (e[0], e[1]))
    dedup: list = []
    for e in entries:  # later duplicates win
        if dedup and dedup[-1][0] == e[0] and dedup[-1][1] == e[1]:
            dedup[-1] = e
        else:
            dedup.append(e)
    row_ptr = [0] * (rows + 1)
    for i, _, _ in dedup:
        row_ptr[i + 1] += 1
    for i in range(rows):
        row_ptr[i + 1] += row_ptr[i]
    return CsrMatrix(rows, cols, tuple(row_ptr),
                     tuple(j for _, j, _ in dedup),
                     tuple(v for _, _, v in dedup))
