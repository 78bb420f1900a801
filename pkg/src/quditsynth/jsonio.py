"""Shared JSON formats: matrices, state vectors, and circuits.

Matrices serialize as {"rows", "cols", "re", "im"} with flat row-major
real/imaginary arrays; vectors use {"dim", "re", "im"}.  Circuits carry a
(d, n) header plus a gate array of {"word", "v", "level", "primitive"}.
Floats rely on repr round-tripping, so serialization is lossless.
"""

from __future__ import annotations

import json

import numpy as np

from .circuits import Circuit, ControlWord, Gate
from .linalg import as_complex


class FormatError(ValueError):
    pass


FORMAT_VERSION = "1"


def matrix_to_json(m: np.ndarray) -> dict:
    m = as_complex(m)
    if m.ndim != 2:
        raise FormatError("matrix_to_json expects a 2-d array")
    return {
        "rows": int(m.shape[0]),
        "cols": int(m.shape[1]),
        "re": np.real(m).reshape(-1).tolist(),
        "im": np.imag(m).reshape(-1).tolist(),
    }


def vector_to_json(v: np.ndarray) -> dict:
    v = as_complex(v).reshape(-1)
    return {"dim": int(v.shape[0]), "re": np.real(v).tolist(), "im": np.imag(v).tolist()}


def _reim(obj: dict, size: int) -> np.ndarray:
    re = np.asarray(obj.get("re", []), dtype=float)
    im = np.asarray(obj.get("im", np.zeros(len(re))), dtype=float)
    if re.shape != (size,) or im.shape != (size,):
        raise FormatError(f"expected {size} entries, got re={re.shape} im={im.shape}")
    return re + 1j * im


def matrix_from_json(obj: dict) -> np.ndarray:
    if "dim" in obj and "rows" not in obj:
        v = vector_from_json(obj)
        return v.reshape(-1, 1)
    try:
        rows, cols = int(obj["rows"]), int(obj["cols"])
    except KeyError as exc:
        raise FormatError(f"matrix object missing field {exc}") from exc
    return _reim(obj, rows * cols).reshape(rows, cols)


def vector_from_json(obj: dict) -> np.ndarray:
    if "dim" not in obj:
        if "rows" in obj and int(obj.get("cols", 0)) == 1:
            return matrix_from_json(obj).reshape(-1)
        raise FormatError("vector object missing 'dim'")
    return _reim(obj, int(obj["dim"]))


def gate_to_json(g: Gate, d: int) -> dict:
    obj = {
        "word": g.word.to_string(d),
        "v": matrix_to_json(g.v),
        "level": g.level,
    }
    if g.primitive is not None:
        obj["primitive"] = g.primitive
    if g.elidable:
        obj["elidable"] = True
    return obj


def gate_from_json(obj: dict) -> Gate:
    try:
        word = ControlWord.from_string(obj["word"])
        v = matrix_from_json(obj["v"])
        level = obj["level"]
    except KeyError as exc:
        raise FormatError(f"gate object missing field {exc}") from exc
    return Gate(word, v, level, obj.get("primitive"), bool(obj.get("elidable", False)))


def circuit_to_json(circ: Circuit) -> dict:
    return {
        "d": circ.d,
        "n": circ.n,
        "gates": [gate_to_json(g, circ.d) for g in circ.gates],
        "metadata": circ.metadata,
    }


def circuit_from_json(obj: dict) -> Circuit:
    try:
        d, n = int(obj["d"]), int(obj["n"])
    except KeyError as exc:
        raise FormatError(f"circuit object missing field {exc}") from exc
    circ = Circuit(d, n, metadata=dict(obj.get("metadata", {})))
    for gobj in obj.get("gates", []):
        gate = gate_from_json(gobj)
        if len(gate.word) != n:
            raise FormatError("gate word length does not match circuit header")
        circ.append(gate)
    return circ


def dump(obj: dict, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh)
        fh.write("\n")


def load(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)
