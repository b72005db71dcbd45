import hashlib
import json
from pathlib import Path
from typing import Type, TypeVar

import numpy as np
from pydantic import BaseModel, ValidationError

from qgeo.core.errors import MalformedInput
from qgeo.schemas import MatrixPayload
from qgeo.utils.matrix import as_matrix

Model = TypeVar("Model", bound=BaseModel)


def encode_matrix(m: np.ndarray) -> MatrixPayload:
    arr = as_matrix(m)
    return MatrixPayload(
        rows=arr.shape[0],
        cols=arr.shape[1],
        re=arr.real.tolist(),
        im=arr.imag.tolist(),
    )


def decode_matrix(payload: MatrixPayload | dict, subject: str | None = None) -> np.ndarray:
    if not isinstance(payload, MatrixPayload):
        try:
            payload = MatrixPayload.model_validate(payload)
        except ValidationError as exc:
            raise MalformedInput(f"bad matrix encoding: {exc.errors()[0]['msg']}", subject=subject) from exc
    re = np.asarray(payload.re, dtype=float)
    im = np.zeros_like(re) if payload.im is None else np.asarray(payload.im, dtype=float)
    return as_matrix(re + 1j * im, subject=subject)


def matrix_digest(m: np.ndarray) -> str:
    """SHA-256 of shape plus little-endian complex128 bytes."""
    arr = np.ascontiguousarray(as_matrix(m), dtype="<c16")
    h = hashlib.sha256()
    h.update(f"{arr.shape[0]}x{arr.shape[1]}:".encode())
    h.update(arr.tobytes())
    return h.hexdigest()


def load_model(path: str | Path, model: Type[Model]) -> Model:
    """Parse a JSON file into ``model``; any parse or schema failure is MalformedInput."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except FileNotFoundError as exc:
        raise MalformedInput("file not found", subject=str(path)) from exc
    except json.JSONDecodeError as exc:
        raise MalformedInput(f"invalid JSON ({exc.msg} at line {exc.lineno})", subject=str(path)) from exc
    try:
        return model.model_validate(data)
    except ValidationError as exc:
        first = exc.errors()[0]
        where = ".".join(str(part) for part in first["loc"])
        raise MalformedInput(f"{where}: {first['msg']}", subject=str(path)) from exc


def write_model(path: str | Path, model: BaseModel) -> None:
    Path(path).write_text(model.model_dump_json(indent=2, by_alias=True) + "\n", encoding="utf-8")
