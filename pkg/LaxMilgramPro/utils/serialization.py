from __future__ import annotations

import json
from enum import Enum
from typing import Any

import numpy as np

from LaxMilgramPro.Algebra.algebra_models import AlgebraElement, AlgebraShape
from LaxMilgramPro.Module.module_models import ModuleElement, ModuleSpace, Submodule
from LaxMilgramPro.States.state_models import PureState


def encode_complex(value: complex) -> list[float]:
    value = complex(value)
    return [float(value.real), float(value.imag)]


def decode_complex(value: Any) -> complex:
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ValueError(f"complex numbers are [re, im] pairs, got {value!r}")
        return complex(float(value[0]), float(value[1]))
    return complex(value)


def encode_matrix(matrix: np.ndarray) -> list:
    array = np.asarray(matrix, dtype=complex)
    if array.ndim == 1:
        return [encode_complex(v) for v in array]
    return [encode_matrix(row) for row in array]


def decode_matrix(data: Any) -> np.ndarray:
    """A matrix is a list of rows; entries are [re, im] pairs or plain reals."""
    return np.array([[decode_complex(entry) for entry in row] for row in data], dtype=complex)


def encode_element(a: AlgebraElement) -> dict[str, Any]:
    return {"shape": list(a.shape.block_dims), "blocks": [encode_matrix(b) for b in a.blocks]}


def decode_element(data: dict[str, Any], shape: AlgebraShape | None = None) -> AlgebraElement:
    blocks = [decode_matrix(block) for block in data["blocks"]]
    declared = AlgebraShape(tuple(data["shape"])) if "shape" in data else shape
    if declared is None:
        return AlgebraElement.from_blocks(blocks)
    return AlgebraElement(declared, tuple(blocks))


def encode_state(f: PureState) -> dict[str, Any]:
    return {"block": f.block, "vector": [encode_complex(v) for v in f.vector]}


def decode_state(data: dict[str, Any], shape: AlgebraShape) -> PureState:
    return PureState.from_vector(shape, int(data["block"]), [decode_complex(v) for v in data["vector"]])


def encode_module_element(x: ModuleElement) -> dict[str, Any]:
    return {"rank": x.space.rank, "components": [encode_element(c) for c in x.components]}


def decode_module_element(data: dict[str, Any], shape: AlgebraShape) -> ModuleElement:
    components = tuple(decode_element(c, shape) for c in data["components"])
    space = ModuleSpace(shape, int(data.get("rank", len(components))))
    return ModuleElement(space, components)


def encode_submodule(Y: Submodule) -> dict[str, Any]:
    return {"generators": [encode_module_element(g) for g in Y.generators]}


def serialize_output(output: Any) -> Any:
    """Convert results into JSON-serialisable data."""
    if output is None:
        return None
    if hasattr(output, "model_dump"):
        return serialize_output(output.model_dump(mode="python"))
    if isinstance(output, Enum):
        return output.value
    if isinstance(output, AlgebraElement):
        return encode_element(output)
    if isinstance(output, ModuleElement):
        return encode_module_element(output)
    if isinstance(output, PureState):
        return encode_state(output)
    if isinstance(output, dict):
        return {str(key): serialize_output(value) for key, value in output.items()}
    if isinstance(output, (list, tuple)):
        return [serialize_output(value) for value in output]
    if isinstance(output, np.ndarray):
        return serialize_output(output.tolist())
    if isinstance(output, (bool, np.bool_)):
        return bool(output)
    if isinstance(output, (int, np.integer)):
        return int(output)
    if isinstance(output, (float, np.floating)):
        return float(output)
    if isinstance(output, (complex, np.complexfloating)):
        return encode_complex(output)
    if isinstance(output, str):
        return output
    return {"value": repr(output)}


def dumps_report(data: Any, indent: int | None = 2) -> str:
    """UTF-8 JSON with sorted keys."""
    return json.dumps(serialize_output(data), sort_keys=True, ensure_ascii=False, indent=indent)
