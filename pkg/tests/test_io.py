import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from gsup import io
from gsup.reduce import mpca_fit

finite = st.floats(allow_nan=False, allow_infinity=False, width=64)
matrices = hnp.arrays(np.float64, hnp.array_shapes(min_dims=2, max_dims=2, min_side=1, max_side=8), elements=finite)


@settings(max_examples=60, deadline=None)
@given(matrices)
def test_raw_round_trip_bit_exact(tmp_path_factory, m):
    p = tmp_path_factory.mktemp("raw") / "m.bin"
    io.write_raw(p, m)
    back, shape = io.read_raw(p)
    assert shape is None
    assert back.tobytes() == m.tobytes()


@settings(max_examples=60, deadline=None)
@given(matrices)
def test_csv_round_trip(tmp_path_factory, m):
    p = tmp_path_factory.mktemp("csv") / "m.csv"
    io.write_csv(p, m)
    back = io.read_csv(p)
    assert back.shape == m.shape
    assert np.all(np.abs(back - m) <= 1e-15 * np.abs(m))


def test_raw_layout(tmp_path):
    p = tmp_path / "m.raw"
    m = np.arange(6.0).reshape(2, 3)
    io.write_raw(p, m)
    blob = p.read_bytes()
    assert blob[:4] == b"GSUP"
    assert struct.unpack("<IQQ", blob[4:24]) == (1, 2, 3)
    assert np.frombuffer(blob[24:], "<f8").tolist() == [0, 1, 2, 3, 4, 5]


def test_csv_header(tmp_path):
    p = tmp_path / "m.csv"
    io.write_csv(p, np.zeros((2, 3)))
    assert p.read_text().splitlines()[0] == "f0,f1,f2"


def test_image_stack_round_trip(tmp_path):
    a = np.random.default_rng(0).standard_normal((4, 5, 3))
    p = tmp_path / "imgs.raw"
    io.write_images(p, a)
    assert np.array_equal(io.read_images(p), a)
    io.write_raw(tmp_path / "flat.raw", a.reshape(4, -1))
    with pytest.raises(ValueError):
        io.read_images(tmp_path / "flat.raw")


def test_bad_files(tmp_path):
    p = tmp_path / "bad.raw"
    p.write_bytes(b"XXXX" + bytes(20))
    with pytest.raises(ValueError):
        io.read_raw(p)
    io.write_raw(p, np.zeros((2, 2)))
    p.write_bytes(p.read_bytes()[:-8])
    with pytest.raises(ValueError):
        io.read_raw(p)
    q = tmp_path / "bad.csv"
    q.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError):
        io.read_csv(q)


def test_labels(tmp_path):
    p = tmp_path / "l.txt"
    io.write_labels(p, [3, 1, 2])
    assert io.read_labels(p).tolist() == [3, 1, 2]
    p.write_text("a\nb\n")
    assert io.read_labels(p).tolist() == ["a", "b"]


def test_suffix_dispatch(tmp_path):
    m = np.eye(3)
    for name in ("m.csv", "m.raw", "m.bin"):
        io.write_matrix(tmp_path / name, m)
        assert np.array_equal(io.read_matrix(tmp_path / name), m)


def test_mpca_model_round_trip(tmp_path):
    a = np.random.default_rng(1).standard_normal((20, 6, 5))
    m = mpca_fit(a, 3, 2)
    io.write_mpca(tmp_path / "model.raw", m)
    back = io.read_mpca(tmp_path / "model.raw")
    assert np.array_equal(back.left, m.left)
    assert np.array_equal(back.right, m.right)
    assert np.array_equal(back.mean_image, m.mean_image)
