"""Byte-stable model container."""

import numpy as np
import pytest

from diacritizer.serialize import load_container, save_container


def test_round_trip(tmp_path):
    arrays = {
        "w": np.arange(6, dtype=float).reshape(2, 3),
        "ids": np.array([1, 2, 3], dtype=np.int64),
        "scalarish": np.array(3.5),
    }
    meta = {"vocab": ["a", "b"], "c": 10.0}
    path = str(tmp_path / "m.diac")
    save_container(path, "test", meta, arrays)
    kind, meta2, arrays2 = load_container(path)
    assert kind == "test"
    assert meta2 == meta
    assert set(arrays2) == set(arrays)
    for name in arrays:
        assert np.array_equal(arrays2[name], arrays[name])
        assert arrays2[name].dtype == arrays[name].dtype


def test_byte_identical_across_saves(tmp_path):
    arrays = {"w": np.random.default_rng(0).normal(size=(4, 4))}
    a, b = str(tmp_path / "a"), str(tmp_path / "b")
    save_container(a, "test", {"k": 1}, arrays)
    save_container(b, "test", {"k": 1}, arrays)
    assert open(a, "rb").read() == open(b, "rb").read()


def test_rejects_foreign_files(tmp_path):
    path = tmp_path / "junk"
    path.write_bytes(b"not a model at all")
    with pytest.raises(ValueError):
        load_container(str(path))
