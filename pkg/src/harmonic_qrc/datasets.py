"""Santa Fe laser series: plain text, one integer sample per line."""

from __future__ import annotations

import logging
import os
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import ConfigError, InvalidParameter

log = logging.getLogger(__name__)

DATA_ENV = "HARMONIC_QRC_DATA"
SANTA_FE_FILE = "santafe_a.txt"


def santa_fe_path(directory: Optional[str] = None) -> Path:
    """Dataset location: ``directory``, then ``$HARMONIC_QRC_DATA``, then the packaged copy."""
    directory = directory or os.environ.get(DATA_ENV)
    if directory:
        path = Path(directory) / SANTA_FE_FILE
        if not path.is_file():
            raise ConfigError(f"{path} does not exist")
        return path
    return Path(str(resources.files("harmonic_qrc") / "data" / SANTA_FE_FILE))


def read_series(path) -> np.ndarray:
    values = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            text = line.strip()
            if not text:
                continue
            try:
                values.append(int(text))
            except ValueError:
                raise InvalidParameter(f"{path}:{lineno}: not an integer sample: {text!r}") from None
    if not values:
        raise InvalidParameter(f"{path}: empty series")
    return np.asarray(values, dtype=float)


def min_max_normalize(series: np.ndarray) -> np.ndarray:
    series = np.asarray(series, dtype=float)
    lo, hi = series.min(), series.max()
    if hi == lo:
        raise InvalidParameter("series has zero range and cannot be normalised")
    return (series - lo) / (hi - lo)


def ingest_santa_fe(path=None) -> np.ndarray:
    """Read the series and rescale it to [0, 1]."""
    path = santa_fe_path() if path is None else path
    raw = read_series(path)
    log.info("santa fe series %s: length %d, min %g, max %g", path, raw.size, raw.min(), raw.max())
    return min_max_normalize(raw)
