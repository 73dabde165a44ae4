"""Binary snapshots, diagnostics CSV and spectrum files.

Snapshot layout (little-endian)::

    offset  size  content
    0       4     magic b"CVPL"
    4       4     u32 format version (1)
    8       12    u32 nx, ny, nz
    20      8     f64 time
    28      4     u32 field count (5)
    32      ...   float64 fields rho, rho u, rho v, rho w, rho E, each C-order
                  (nx, ny, nz) with z fastest

Every file is written under a ``.partial`` name and renamed once complete.
"""
from contextlib import contextmanager
import os
from pathlib import Path
import struct

import numpy as np

from .errors import BadMagic, DimensionMismatch, TruncatedFile, VersionMismatch
from .grid import ConservedState, Grid

MAGIC = b"CVPL"
SNAPSHOT_VERSION = 1
_HEADER = struct.Struct("<4sI3IdI")
HEADER_SIZE = _HEADER.size  # 32

CSV_VERSION = 1
PARTIAL = ".partial"


@contextmanager
def atomic_open(path, mode="w", **kwargs):
    """Write to ``path.partial`` and rename onto ``path`` on success.

    On error the partial file is left in place (it is never mistaken for a
    complete output) and the exception propagates.
    """
    path = Path(path)
    tmp = path.with_name(path.name + PARTIAL)
    with open(tmp, mode, **kwargs) as fh:
        yield fh
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)


def write_snapshot(state, path, time=0.0):
    g = state.grid
    header = _HEADER.pack(MAGIC, SNAPSHOT_VERSION, g.nx, g.ny, g.nz, float(time), state.q.shape[0])
    with atomic_open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(state.q, dtype="<f8").tobytes())
    return Path(path)


def read_snapshot_header(path):
    with open(path, "rb") as fh:
        raw = fh.read(HEADER_SIZE)
    return _unpack_header(raw)


def _unpack_header(raw):
    if len(raw) < 4 or raw[:4] != MAGIC:
        raise BadMagic(f"expected {MAGIC!r}, found {raw[:4]!r}")
    if len(raw) < HEADER_SIZE:
        raise TruncatedFile(f"header has {len(raw)} of {HEADER_SIZE} bytes")
    magic, version, nx, ny, nz, time, nfields = _HEADER.unpack(raw[:HEADER_SIZE])
    if version != SNAPSHOT_VERSION:
        raise VersionMismatch(f"format version {version}, expected {SNAPSHOT_VERSION}")
    return {"version": version, "shape": (nx, ny, nz), "time": time, "fields": nfields}


def read_snapshot(path, grid=None):
    """Return ``(ConservedState, time)``.

    ``grid`` (optional) supplies the physical extents and must match the
    stored dimensions; otherwise a unit-spacing grid is attached.
    """
    data = Path(path).read_bytes()
    h = _unpack_header(data[:HEADER_SIZE])
    nx, ny, nz = h["shape"]
    if h["fields"] != 5:
        raise DimensionMismatch(f"{h['fields']} fields stored, expected 5")
    if grid is not None and grid.shape != (nx, ny, nz):
        raise DimensionMismatch(f"file holds {(nx, ny, nz)}, grid is {grid.shape}")
    expected = 5 * nx * ny * nz * 8
    payload = len(data) - HEADER_SIZE
    if payload != expected:
        raise TruncatedFile(f"payload has {payload} bytes, header implies {expected}")
    q = np.frombuffer(data, dtype="<f8", offset=HEADER_SIZE).reshape(5, nx, ny, nz).astype(np.float64)
    if grid is None:
        grid = Grid(nx, ny, nz, float(nx), float(ny), float(nz))
    return ConservedState(grid, q), h["time"]


# ---------------------------------------------------------------------------
# text outputs
# ---------------------------------------------------------------------------


def format_float(x):
    """17 significant digits: exact round trip for float64."""
    return "%.17g" % x


class DiagnosticsWriter:
    """Versioned diagnostics CSV, kept as ``.partial`` until closed."""

    def __init__(self, path, columns):
        self.path = Path(path)
        self.columns = list(columns)
        self._tmp = self.path.with_name(self.path.name + PARTIAL)
        self._fh = open(self._tmp, "w", newline="\n")
        self._fh.write(f"# cvples diagnostics v{CSV_VERSION}\n")
        self._fh.write(",".join(self.columns) + "\n")

    def write(self, values):
        cells = []
        for v in values:
            if isinstance(v, (int, np.integer)):
                cells.append(str(int(v)))
            else:
                cells.append(format_float(float(v)))
        self._fh.write(",".join(cells) + "\n")

    def flush(self):
        self._fh.flush()

    def close(self):
        if self._fh.closed:
            return
        self._fh.flush()
        os.fsync(self._fh.fileno())
        self._fh.close()
        os.replace(self._tmp, self.path)

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
        return False


def read_diagnostics(path):
    """Parse a diagnostics CSV into ``{column: ndarray}``."""
    lines = [ln for ln in Path(path).read_text().splitlines() if ln and not ln.startswith("#")]
    header = lines[0].split(",")
    rows = [[float(c) for c in ln.split(",")] for ln in lines[1:]]
    arr = np.array(rows, dtype=np.float64).reshape(len(rows), len(header))
    return {name: arr[:, i] for i, name in enumerate(header)}


def write_spectrum(path, k, e_k, time=None):
    with atomic_open(path, "w") as fh:
        if time is not None:
            fh.write(f"# t={format_float(time)}\n")
        fh.write("# k E_k\n")
        for kk, ee in zip(k, e_k):
            fh.write(f"{int(kk)} {format_float(ee)}\n")
    return Path(path)


def read_spectrum(path):
    data = np.loadtxt(path, comments="#", ndmin=2)
    return data[:, 0].astype(np.int64), data[:, 1]
