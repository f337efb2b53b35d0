"""VDTC checkpoint files.

Layout (little-endian)::

    b"VDTC" | u32 version=1 | u32 header_len | header_len bytes of UTF-8 JSON
    parameter arrays as f8, flattened, in declaration order

The JSON header holds the architecture, the config hash and any extra metadata.
"""

import json
import struct
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np

from src.core.exceptions import ContractError, DataError, DataFormatError
from src.core.logging_config import get_logger
from src.ml.models.vdt_model import Architecture, ModelParams

logger = get_logger()

VDTC_MAGIC = b"VDTC"
VDTC_VERSION = 1
_PREFIX = struct.Struct("<4sII")


def save_checkpoint(
    params: ModelParams,
    path: Union[str, Path],
    config_hash: str = "",
    metadata: Optional[Dict[str, Any]] = None,
) -> Path:
    path = Path(path)
    header = {
        "architecture": params.arch.to_dict(),
        "config_hash": config_hash,
        "metadata": metadata or {},
    }
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")

    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as f:
        f.write(_PREFIX.pack(VDTC_MAGIC, VDTC_VERSION, len(header_bytes)))
        f.write(header_bytes)
        for _, tensor in params.items():
            f.write(np.ascontiguousarray(tensor, dtype="<f8").tobytes())

    logger.verbose("Checkpoint saved", path=str(path), parameters=params.num_parameters())
    return path


def load_checkpoint(
    path: Union[str, Path], input_dim: Optional[int] = None
) -> Tuple[ModelParams, Dict[str, Any]]:
    """Return parameters and the decoded header.

    When ``input_dim`` is given, a checkpoint built for another feature width
    is rejected.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"checkpoint not found: {path}")
    payload = path.read_bytes()

    if payload[:4] != VDTC_MAGIC:
        raise DataFormatError(f"{path}: bad magic, expected {VDTC_MAGIC!r}", offset=0)
    if len(payload) < _PREFIX.size:
        raise DataFormatError(f"{path}: truncated header", offset=len(payload))
    _, version, header_len = _PREFIX.unpack_from(payload, 0)
    if version != VDTC_VERSION:
        raise DataFormatError(f"{path}: unsupported version {version}", offset=4)

    start = _PREFIX.size
    try:
        header = json.loads(payload[start : start + header_len].decode("utf-8"))
        arch = Architecture(**header["architecture"])
    except (ValueError, KeyError, TypeError) as e:
        raise DataFormatError(f"{path}: unreadable header ({e})", offset=start) from e

    if input_dim is not None and arch.input_dim != input_dim:
        raise ContractError(
            f"checkpoint expects {arch.input_dim}-dim features, data has {input_dim}"
        )

    offset = start + header_len
    tensors = {}
    for name, shape in arch.tensor_shapes().items():
        count = int(np.prod(shape))
        end = offset + 8 * count
        if end > len(payload):
            raise DataFormatError(f"{path}: truncated at parameter {name}", offset=offset)
        tensors[name] = np.frombuffer(payload, dtype="<f8", count=count, offset=offset).reshape(
            shape
        ).astype(np.float64)
        offset = end
    if offset != len(payload):
        raise DataFormatError(f"{path}: {len(payload) - offset} trailing bytes", offset=offset)

    logger.verbose("Checkpoint loaded", path=str(path), config_hash=header.get("config_hash", ""))
    return ModelParams(arch, tensors), header
