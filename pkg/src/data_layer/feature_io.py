"""Readers and writers for precomputed feature files.

VDTF layout (little-endian)::

    b"VDTF" | u32 version=1 | u32 dim | u64 count
    count x ( u16 domain_id | i8 label | dim x f32 features )

CSV layout: UTF-8, header ``domain,label,f0..f{d-1}``, label in {0, 1, -1}.
Both readers hand features to ``Dataset``, which stores float32, so CSV
values carrying more precision than float32 are rounded on load.
"""

import io
import re
import struct
from pathlib import Path
from typing import Dict, Union

import numpy as np
import pandas as pd

from src.core.exceptions import DataError, DataFormatError, DataParseError
from src.core.logging_config import get_logger
from src.core.types import Label
from src.data_layer.dataset import Dataset

logger = get_logger()

PathLike = Union[str, Path]

VDTF_MAGIC = b"VDTF"
VDTF_VERSION = 1
_HEADER = struct.Struct("<4sIIQ")


def _record_dtype(dim: int) -> np.dtype:
    return np.dtype([("domain", "<u2"), ("label", "i1"), ("features", "<f4", (dim,))])


def save_vdtf(dataset: Dataset, path: PathLike) -> Path:
    path = Path(path)
    records = np.empty(len(dataset), dtype=_record_dtype(dataset.dim))
    records["domain"] = dataset.domain_ids
    records["label"] = dataset.labels
    records["features"] = dataset.features

    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as f:
        f.write(_HEADER.pack(VDTF_MAGIC, VDTF_VERSION, dataset.dim, len(dataset)))
        f.write(records.tobytes())

    logger.verbose("VDTF written", path=str(path), samples=len(dataset), dim=dataset.dim)
    return path


def load_vdtf(path: PathLike) -> Dataset:
    path = Path(path)
    if not path.exists():
        raise DataError(f"feature file not found: {path}")
    payload = path.read_bytes()
    return parse_vdtf(payload, source=str(path))


def parse_vdtf(payload: bytes, source: str = "<bytes>") -> Dataset:
    if len(payload) < len(VDTF_MAGIC) or payload[:4] != VDTF_MAGIC:
        raise DataFormatError(f"{source}: bad magic, expected {VDTF_MAGIC!r}", offset=0)
    if len(payload) < _HEADER.size:
        raise DataFormatError(f"{source}: truncated header", offset=len(payload))

    _, version, dim, count = _HEADER.unpack_from(payload, 0)
    if version != VDTF_VERSION:
        raise DataFormatError(f"{source}: unsupported version {version}", offset=4)
    if dim == 0:
        raise DataFormatError(f"{source}: feature dim must be positive", offset=8)
    if count == 0:
        raise DataFormatError(f"{source}: file holds no records", offset=12)

    dtype = _record_dtype(dim)
    body = len(payload) - _HEADER.size
    expected = count * dtype.itemsize
    if body < expected:
        complete = body // dtype.itemsize
        raise DataFormatError(
            f"{source}: truncated after {complete} of {count} records",
            offset=_HEADER.size + complete * dtype.itemsize,
        )
    if body > expected:
        raise DataFormatError(
            f"{source}: {body - expected} trailing bytes", offset=_HEADER.size + expected
        )

    records = np.frombuffer(payload, dtype=dtype, count=count, offset=_HEADER.size)
    bad = ~np.isin(records["label"], (Label.PRISTINE, Label.OUT_OF_CONTEXT, Label.UNKNOWN))
    if bad.any():
        first = int(np.flatnonzero(bad)[0])
        raise DataFormatError(
            f"{source}: invalid label {int(records['label'][first])}",
            offset=_HEADER.size + first * dtype.itemsize + 2,
        )

    return Dataset(
        features=records["features"].copy(),
        domain_ids=records["domain"].astype(np.int64),
        labels=records["label"].astype(np.int8),
    )


def load_csv(path: PathLike) -> Dataset:
    """Read ``domain,label,f0..`` rows; domain strings are interned in order of appearance.

    Feature values are rounded to float32 like every other ``Dataset``.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"feature file not found: {path}")

    payload = path.read_bytes()
    try:
        text = payload.decode("utf-8")
    except UnicodeDecodeError as e:
        line = payload.count(b"\n", 0, e.start) + 1
        raise DataParseError(f"{path}: invalid UTF-8 at byte {e.start}", line=line) from e

    try:
        frame = pd.read_csv(
            io.StringIO(text), dtype=str, keep_default_na=False, skipinitialspace=True
        )
    except pd.errors.EmptyDataError as e:
        raise DataParseError(f"{path}: no header", line=1) from e
    except pd.errors.ParserError as e:
        match = re.search(r"line (\d+)", str(e))
        line = int(match.group(1)) if match else None
        raise DataParseError(f"{path}: ragged row", line=line) from e

    columns = list(frame.columns)
    dim = len(columns) - 2
    expected = ["domain", "label"] + [f"f{i}" for i in range(dim)]
    if dim < 1 or columns != expected:
        raise DataParseError(f"{path}: header must be domain,label,f0..f{{d-1}}", line=1)
    if frame.empty:
        raise DataParseError(f"{path}: no data rows", line=2)

    ragged = frame.isna().any(axis=1)
    if ragged.any():
        raise DataParseError(f"{path}: ragged row", line=int(ragged.idxmax()) + 2)

    numeric = frame[expected[1:]].apply(pd.to_numeric, errors="coerce")
    bad = numeric.isna().any(axis=1)
    if bad.any():
        row = int(bad.idxmax())
        column = str(numeric.columns[numeric.loc[row].isna().argmax()])
        raise DataParseError(
            f"{path}: non-numeric value in column {column!r}", line=row + 2
        )

    labels = numeric["label"].to_numpy()
    valid = np.isin(labels, (0, 1, -1))
    if not valid.all():
        row = int(np.flatnonzero(~valid)[0])
        raise DataParseError(f"{path}: label must be 0, 1 or -1", line=row + 2)

    codes, uniques = pd.factorize(frame["domain"], sort=False)
    domain_names: Dict[int, str] = {i: str(name) for i, name in enumerate(uniques)}

    return Dataset(
        features=numeric[expected[2:]].to_numpy(dtype=np.float64),
        domain_ids=codes.astype(np.int64),
        labels=labels.astype(np.int8),
        domain_names=domain_names,
    )


def save_csv(dataset: Dataset, path: PathLike) -> Path:
    path = Path(path)
    frame = pd.DataFrame(dataset.features, columns=[f"f{i}" for i in range(dataset.dim)])
    frame.insert(0, "label", dataset.labels.astype(int))
    frame.insert(0, "domain", [dataset.domain_names[int(d)] for d in dataset.domain_ids])
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format="%.9g")
    return path


def load_dataset(path: PathLike) -> Dataset:
    """Dispatch on suffix: ``.csv`` or VDTF otherwise."""
    path = Path(path)
    if path.suffix.lower() == ".csv":
        return load_csv(path)
    return load_vdtf(path)
