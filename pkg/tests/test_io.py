import struct

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cvples.errors import BadMagic, DimensionMismatch, TruncatedFile, VersionMismatch
from cvples.grid import ConservedState, Grid
from cvples.io import (HEADER_SIZE, DiagnosticsWriter, atomic_open, format_float, read_diagnostics,
                       read_snapshot, read_snapshot_header, read_spectrum, write_snapshot, write_spectrum)


@pytest.fixture
def state(rng):
    g = Grid(10, 12, 8, 1.0, 2.0, 3.0)
    q = rng.normal(size=(5,) + g.shape)
    q[0] = 1.0 + rng.random(g.shape)
    return ConservedState(g, q)


def test_snapshot_roundtrip_bit_exact(state, tmp_path):
    path = write_snapshot(state, tmp_path / "s.cvpl", time=1.25)
    back, t = read_snapshot(path, state.grid)
    assert t == 1.25
    assert back.q.tobytes() == state.q.tobytes()
    assert not (tmp_path / "s.cvpl.partial").exists()


def test_snapshot_header_layout(state, tmp_path):
    path = write_snapshot(state, tmp_path / "s.cvpl", time=0.5)
    raw = path.read_bytes()
    assert HEADER_SIZE == 32
    assert raw[:4] == b"CVPL"
    assert struct.unpack("<I", raw[4:8])[0] == 1
    assert struct.unpack("<3I", raw[8:20]) == (10, 12, 8)
    assert struct.unpack("<d", raw[20:28])[0] == 0.5
    assert struct.unpack("<I", raw[28:32])[0] == 5
    assert len(raw) == 32 + 5 * 10 * 12 * 8 * 8
    # first value is rho at (0, 0, 0), second is rho at (0, 0, 1): z fastest
    assert struct.unpack("<2d", raw[32:48]) == (state.q[0, 0, 0, 0], state.q[0, 0, 0, 1])
    assert read_snapshot_header(path)["shape"] == (10, 12, 8)


def test_bad_magic(state, tmp_path):
    path = write_snapshot(state, tmp_path / "s.cvpl")
    raw = bytearray(path.read_bytes())
    raw[:4] = b"XXXX"
    path.write_bytes(bytes(raw))
    with pytest.raises(BadMagic):
        read_snapshot(path)


def test_version_mismatch(state, tmp_path):
    path = write_snapshot(state, tmp_path / "s.cvpl")
    raw = bytearray(path.read_bytes())
    raw[4:8] = struct.pack("<I", 2)
    path.write_bytes(bytes(raw))
    with pytest.raises(VersionMismatch):
        read_snapshot(path)


def test_truncated_payload_and_header(state, tmp_path):
    path = write_snapshot(state, tmp_path / "s.cvpl")
    raw = path.read_bytes()
    path.write_bytes(raw[:-8])
    with pytest.raises(TruncatedFile):
        read_snapshot(path)
    path.write_bytes(raw[:20])
    with pytest.raises(TruncatedFile):
        read_snapshot(path)


def test_header_dims_disagree_with_payload(state, tmp_path):
    path = write_snapshot(state, tmp_path / "s.cvpl")
    raw = bytearray(path.read_bytes())
    raw[8:12] = struct.pack("<I", 11)
    path.write_bytes(bytes(raw))
    with pytest.raises(TruncatedFile):
        read_snapshot(path)


def test_dimension_mismatch_against_grid(state, tmp_path):
    path = write_snapshot(state, tmp_path / "s.cvpl")
    with pytest.raises(DimensionMismatch):
        read_snapshot(path, Grid.cube(10))


@given(seed=st.integers(0, 2**31))
def test_roundtrip_property(seed, tmp_path_factory):
    r = np.random.default_rng(seed)
    g = Grid(8, 9, 10, 1.0, 1.0, 1.0)
    q = r.normal(size=(5,) + g.shape) * 10.0 ** r.integers(-300, 300, size=(5,) + g.shape)
    q[0] = np.abs(q[0]) + 1.0
    path = tmp_path_factory.mktemp("rt") / "s.cvpl"
    write_snapshot(ConservedState(g, q), path)
    assert read_snapshot(path)[0].q.tobytes() == np.ascontiguousarray(q).tobytes()


def test_atomic_open_leaves_partial_on_error(tmp_path):
    target = tmp_path / "out.txt"
    with pytest.raises(RuntimeError):
        with atomic_open(target) as fh:
            fh.write("half")
            raise RuntimeError("boom")
    assert not target.exists()
    assert (tmp_path / "out.txt.partial").exists()


@given(x=st.floats(allow_nan=False, allow_infinity=False))
def test_format_float_round_trips(x):
    assert float(format_float(x)) == x


def test_diagnostics_csv(tmp_path):
    path = tmp_path / "d.csv"
    w = DiagnosticsWriter(path, ["step", "t", "E"])
    w.write([0, 0.0, 0.125])
    w.write([10, 0.1 + 0.2, 1 / 3])
    assert not path.exists() and (tmp_path / "d.csv.partial").exists()
    w.close()
    text = path.read_text().splitlines()
    assert text[0] == "# cvples diagnostics v1"
    assert text[1] == "step,t,E"
    assert text[3].startswith("10,")
    cols = read_diagnostics(path)
    assert cols["t"][1] == 0.1 + 0.2 and cols["E"][1] == 1 / 3


def test_spectrum_file_roundtrip(tmp_path):
    k = np.arange(5)
    e = np.array([0.0, 0.5, 1 / 3, 1e-20, 2.0])
    path = write_spectrum(tmp_path / "s.txt", k, e, time=2.0)
    kk, ee = read_spectrum(path)
    assert np.array_equal(kk, k) and np.array_equal(ee, e)
    assert path.read_text().startswith("# t=2\n")
