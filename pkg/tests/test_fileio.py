"""Deterministic serialization helpers."""

import numpy as np
import pytest

from phasesweep import fileio


def test_csv_round_trip_precision(tmp_path):
    path = tmp_path / "t.csv"
    value = 1.0007e-8 / 3.0
    fileio.write_csv(path, ("a", "b"), [(1, value)])
    header, rows = fileio.read_csv(path)
    assert header == ["a", "b"]
    assert float(rows[0][1]) == value


def test_csv_deterministic_bytes(tmp_path):
    rows = [(i, i * 0.1, f"s{i}") for i in range(20)]
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    fileio.write_csv(p1, ("i", "x", "s"), rows)
    fileio.write_csv(p2, ("i", "x", "s"), rows)
    assert p1.read_bytes() == p2.read_bytes()


def test_pgm_round_trip(tmp_path):
    img = np.zeros((4, 6), dtype=bool)
    img[1, 2] = True
    path = tmp_path / "x.pgm"
    fileio.write_pgm(path, img)
    back = fileio.read_pnm(path)
    assert back.shape == (4, 6)
    assert back[1, 2] == 255
    assert back.sum() == 255


def test_pgm_float_scaling(tmp_path):
    img = np.array([[0.0, 0.5, 1.0]])
    path = tmp_path / "y.pgm"
    fileio.write_pgm(path, img)
    back = fileio.read_pnm(path)
    assert back.tolist() == [[0, 128, 255]]


def test_ppm_round_trip(tmp_path):
    rgb = np.zeros((2, 2, 3))
    rgb[0, 0] = [1.0, 0.0, 0.5]
    path = tmp_path / "c.ppm"
    fileio.write_ppm(path, rgb)
    back = fileio.read_pnm(path)
    assert back.shape == (2, 2, 3)
    assert back[0, 0].tolist() == [255, 0, 128]


def test_pgm_rejects_out_of_range_ints(tmp_path):
    with pytest.raises(ValueError):
        fileio.write_pgm(tmp_path / "z.pgm", np.array([[300]]))


def test_keyvalue_parsing():
    text = """
    # comment line
    scene = terraced
    num_sheets = 10   # trailing comment
    noise_sigma = 0.05

    standoff = 0.45
    """
    got = fileio.parse_keyvalue(text)
    assert got == {"scene": "terraced", "num_sheets": "10",
                   "noise_sigma": "0.05", "standoff": "0.45"}


def test_keyvalue_rejects_garbage():
    with pytest.raises(ValueError, match="line 1"):
        fileio.parse_keyvalue("not a key value line")


def test_keyvalue_format_round_trip():
    mapping = {"b": 2, "a": "x", "c": 0.25}
    text = fileio.format_keyvalue(mapping)
    assert text.splitlines() == ["a = x", "b = 2", "c = 0.25"]
    assert fileio.parse_keyvalue(text) == {"a": "x", "b": "2", "c": "0.25"}


def test_sha256_file(tmp_path):
    path = tmp_path / "f.bin"
    path.write_bytes(b"phasesweep")
    assert fileio.sha256_file(path) == __import__("hashlib").sha256(
        b"phasesweep").hexdigest()
