"""
JSON and CSV writers with byte-stable number formatting
"""

import json
import logging
import math
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Mapping, Sequence

import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)

SIGNIFICANT_DIGITS = 10
FLOAT_FORMAT = f"%.{SIGNIFICANT_DIGITS}g"


def normalize(value: Any) -> Any:
    """Plain JSON types; floats rounded to 10 significant digits, non-finite floats become null"""
    if isinstance(value, Mapping):
        return {str(key): normalize(item) for key, item in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [normalize(item) for item in value]
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if not math.isfinite(value):
            return None
        return float(f"{value:.{SIGNIFICANT_DIGITS}g}")
    if isinstance(value, Path):
        return str(value)
    return value


def dumps(document: Any) -> str:
    return json.dumps(normalize(document), sort_keys=True, indent=2) + "\n"


def write_json(path: Path, document: Any) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(document), encoding='utf-8')
    logger.info(f"Wrote {path}")
    return path


def write_csv(path: Path, rows: Sequence[Dict[str, Any]], columns: Sequence[str]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(list(rows), columns=list(columns))
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, na_rep='')
    logger.info(f"Wrote {path}")
    return path


def write_table(output_dir: Path, name: str, rows: Sequence[Dict[str, Any]],
                columns: Sequence[str], formats: Sequence[str]) -> List[Path]:
    """Write a flat table as <name>.csv and/or <name>.json ({name: [rows]})"""
    written = []
    if 'csv' in formats:
        written.append(write_csv(output_dir / f"{name}.csv", rows, columns))
    if 'json' in formats:
        written.append(write_json(output_dir / f"{name}.json", {name: list(rows)}))
    return written
