"""JSON/CSV codecs for matrices, observables and reports; all writes are atomic."""
import json
import os
import tempfile
from pathlib import Path
from typing import Any, Dict, List, Union

import numpy as np
import pandas as pd

from ..models.observables import DiscreteObservable
from .errors import ValidationError
from .logging import get_logger

logger = get_logger(__name__)


def matrix_to_pairs(M: np.ndarray) -> List[List[List[float]]]:
    """Row-major nested list of [re, im] pairs."""
    A = np.asarray(M, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in A]


def vector_to_pairs(v: np.ndarray) -> List[List[float]]:
    return [[float(z.real), float(z.imag)] for z in np.asarray(v, dtype=complex).ravel()]


def matrix_from_pairs(data: Any) -> np.ndarray:
    """Inverse of matrix_to_pairs; plain real nested lists are accepted too."""
    arr = np.asarray(data, dtype=float)
    if arr.ndim == 3 and arr.shape[-1] == 2:
        return arr[..., 0] + 1j * arr[..., 1]
    if arr.ndim == 2:
        return arr.astype(complex)
    raise ValidationError(f"Cannot read a matrix from an array of shape {arr.shape}")


def vector_from_pairs(data: Any) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.ndim == 2 and arr.shape[-1] == 2:
        return arr[:, 0] + 1j * arr[:, 1]
    if arr.ndim == 1:
        return arr.astype(complex)
    raise ValidationError(f"Cannot read a vector from an array of shape {arr.shape}")


def _label_from_json(label: Any) -> Any:
    # JSON has no tuples; product labels come back as lists
    if isinstance(label, list):
        return tuple(_label_from_json(x) for x in label)
    return label


def povm_to_dict(obs: DiscreteObservable) -> Dict[str, Any]:
    return {
        "dim": obs.dim,
        "labels": [list(x) if isinstance(x, tuple) else x for x in obs.labels],
        "effects": [matrix_to_pairs(e.matrix) for e in obs.effects],
    }


def povm_from_dict(data: Dict[str, Any]) -> DiscreteObservable:
    try:
        dim = int(data["dim"])
        labels = [_label_from_json(x) for x in data["labels"]]
        matrices = [matrix_from_pairs(m) for m in data["effects"]]
    except (KeyError, TypeError) as e:
        raise ValidationError(f"Malformed POVM document: {e!s}")
    if any(m.shape != (dim, dim) for m in matrices):
        raise ValidationError(f"POVM effects must be {dim}x{dim}")
    return DiscreteObservable.from_matrices(labels, matrices)


def povm_to_json(obs: DiscreteObservable) -> str:
    return json.dumps(povm_to_dict(obs))


def povm_from_json(text: str) -> DiscreteObservable:
    return povm_from_dict(json.loads(text))


def write_text_atomic(path: Union[str, Path], text: str) -> Path:
    """Write via a temporary file in the target directory and os.replace."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    logger.debug(f"Wrote {path}")
    return path


def write_csv_atomic(path: Union[str, Path], frame: pd.DataFrame) -> Path:
    return write_text_atomic(path, frame.to_csv(index=False))
