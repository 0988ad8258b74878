import csv
import json

import numpy as np
import pytest

from dampedwave.io import SnapshotFormatError, export_field_csv, read_snapshot, write_snapshot
from dampedwave.spectral import SpectralField, make_grid


def field(grid, seed):
    rng = np.random.default_rng(seed)
    return SpectralField(grid, rng.normal(size=grid.shape) + 1j * rng.normal(size=grid.shape))


@pytest.mark.parametrize("n,N,L", [(1, 16, 3.0), (2, 8, 2.5), (3, 4, 1.0)])
def test_round_trip(tmp_path, n, N, L):
    g = make_grid(n, N, L)
    fields = [field(g, 0), field(g, 1)]
    path = tmp_path / "s.bin"
    write_snapshot(path, fields)
    back = read_snapshot(path)
    assert len(back) == 2
    for a, b in zip(fields, back):
        assert b.grid == g
        np.testing.assert_array_equal(a.values, b.values)


def test_header_is_one_json_line(tmp_path):
    g = make_grid(2, 4, 1.0)
    path = tmp_path / "s.bin"
    write_snapshot(path, field(g, 0))
    raw = path.read_bytes()
    header = json.loads(raw.split(b"\n", 1)[0])
    assert header["format"] == "dampedwave-snapshot"
    assert header["components"] == 1 and header["dtype"] == "complex128"
    assert len(raw.split(b"\n", 1)[1]) == 16 * 16


def test_rejects_bad_files(tmp_path):
    bad = tmp_path / "bad.bin"
    bad.write_bytes(b"not json\n\x00\x01")
    with pytest.raises(SnapshotFormatError):
        read_snapshot(bad)
    g = make_grid(1, 8, 1.0)
    good = tmp_path / "good.bin"
    write_snapshot(good, field(g, 0))
    truncated = tmp_path / "short.bin"
    truncated.write_bytes(good.read_bytes()[:-16])
    with pytest.raises(SnapshotFormatError):
        read_snapshot(truncated)


def test_write_guards(tmp_path):
    with pytest.raises(ValueError):
        write_snapshot(tmp_path / "x.bin", [])
    with pytest.raises(ValueError):
        write_snapshot(tmp_path / "x.bin", [field(make_grid(1, 8, 1.0), 0), field(make_grid(1, 8, 2.0), 0)])


def test_field_csv(tmp_path):
    g = make_grid(2, 4, 2.0)
    v = field(g, 3)
    path = tmp_path / "f.csv"
    export_field_csv(path, v)
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["x0", "x1", "re", "im"]
    assert len(rows) == 17
    assert complex(float(rows[1][2]), float(rows[1][3])) == v.values.ravel()[0]
    with pytest.raises(ValueError):
        export_field_csv(path, field(make_grid(2, 512, 1.0), 0))
