"""JSON report input and output."""

import json
import sys
from pathlib import Path
from typing import Any, Optional, Union

from src.core.exceptions import DataError


def dumps(document: Any) -> str:
    if hasattr(document, "to_dict"):
        document = document.to_dict()
    return json.dumps(document, indent=2, sort_keys=True)


def write_json(document: Any, path: Optional[Union[str, Path]] = None) -> Optional[Path]:
    """Write to ``path``, or to stdout when no path is given."""
    text = dumps(document)
    if path is None:
        sys.stdout.write(text + "\n")
        return None
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text + "\n")
    return path


def read_json(path: Union[str, Path]) -> Any:
    path = Path(path)
    if not path.exists():
        raise DataError(f"report not found: {path}")
    try:
        return json.loads(path.read_text())
    except ValueError as e:
        raise DataError(f"{path}: invalid JSON ({e})") from e
