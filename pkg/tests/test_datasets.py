import logging

import numpy as np
import pytest

from harmonic_qrc.datasets import DATA_ENV, ingest_santa_fe, min_max_normalize, read_series, santa_fe_path
from harmonic_qrc.errors import ConfigError, InvalidParameter


def test_min_max_example(tmp_path):
    path = tmp_path / "s.txt"
    path.write_text("0\n5\n10\n")
    assert np.array_equal(ingest_santa_fe(path), [0.0, 0.5, 1.0])


def test_constant_rejected(tmp_path):
    path = tmp_path / "s.txt"
    path.write_text("4\n4\n4\n")
    with pytest.raises(InvalidParameter, match="zero range"):
        ingest_santa_fe(path)


def test_empty(tmp_path):
    path = tmp_path / "s.txt"
    path.write_text("\n\n")
    with pytest.raises(InvalidParameter, match="empty"):
        read_series(path)


def test_non_numeric_line(tmp_path):
    path = tmp_path / "s.txt"
    path.write_text("1\n2\nthree\n")
    with pytest.raises(InvalidParameter, match=r"s.txt:3"):
        read_series(path)


def test_packaged_dataset(caplog):
    raw = read_series(santa_fe_path())
    with caplog.at_level(logging.INFO, logger="harmonic_qrc.datasets"):
        series = ingest_santa_fe()
    assert series.size == raw.size == 10093
    assert series.min() == 0.0 and series.max() == 1.0
    assert "length 10093" in caplog.text


def test_env_override(tmp_path, monkeypatch):
    (tmp_path / "santafe_a.txt").write_text("1\n3\n")
    monkeypatch.setenv(DATA_ENV, str(tmp_path))
    assert np.array_equal(ingest_santa_fe(), [0.0, 1.0])


def test_missing_directory(tmp_path):
    with pytest.raises(ConfigError):
        santa_fe_path(str(tmp_path))


def test_normalize_array():
    assert np.allclose(min_max_normalize(np.array([2.0, 4.0, 3.0])), [0, 1, 0.5])
