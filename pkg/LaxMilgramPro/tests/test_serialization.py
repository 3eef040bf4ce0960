"""Testes para a codificação JSON de elementos, estados e relatórios."""

from __future__ import annotations

import json
import sys
from enum import Enum
from pathlib import Path

# Ensure project and package roots are on sys.path for absolute imports
PROJECT_ROOT = Path(__file__).resolve().parents[2]
if str(PROJECT_ROOT) not in sys.path:
    sys.path.append(str(PROJECT_ROOT))

PACKAGE_ROOT = PROJECT_ROOT / "LaxMilgramPro"
if str(PACKAGE_ROOT) not in sys.path:
    sys.path.append(str(PACKAGE_ROOT))

import numpy as np  # noqa: E402
import pytest  # noqa: E402

from LaxMilgramPro.Algebra.algebra_models import AlgebraElement, AlgebraShape  # noqa: E402
from LaxMilgramPro.Module.module_models import ModuleElement, ModuleSpace  # noqa: E402
from LaxMilgramPro.States.state_models import PureState  # noqa: E402
from LaxMilgramPro.utils.serialization import (  # noqa: E402
    decode_complex,
    decode_element,
    decode_matrix,
    decode_module_element,
    decode_state,
    dumps_report,
    encode_element,
    encode_module_element,
    encode_state,
    serialize_output,
)


class Cor(str, Enum):
    AZUL = "azul"


def test_complex_entries_accept_pairs_and_reals():
    """Testa entradas [re, im] e reais simples."""
    assert decode_complex([1, -2]) == 1 - 2j
    assert decode_complex(3) == 3 + 0j
    with pytest.raises(ValueError):
        decode_complex([1, 2, 3])
    np.testing.assert_array_equal(decode_matrix([[1, [0, 1]], [0, -1]]), [[1, 1j], [0, -1]])


def test_element_encoding_keeps_shape_and_values():
    """Testa a ida e volta de um elemento com blocos mistos."""
    a = AlgebraElement.random(AlgebraShape.of(2, 1), np.random.default_rng(0))
    data = json.loads(json.dumps(encode_element(a)))
    assert data["shape"] == [2, 1]
    assert decode_element(data).allclose(a, atol=0.0)


def test_decode_element_without_shape_infers_blocks():
    """Testa a inferência da forma a partir dos blocos."""
    a = decode_element({"blocks": [[[1, 0], [0, 1]], [[2]]]})
    assert a.shape == AlgebraShape.of(2, 1)


def test_state_and_module_element_encoding():
    """Testa estados puros e elementos de Aᵖ."""
    shape = AlgebraShape.of(2)
    f = PureState.from_vector(shape, 0, [0.6, 0.8j])
    g = decode_state(encode_state(f), shape)
    np.testing.assert_allclose(g.vector, f.vector)
    assert g.block == 0

    x = ModuleElement.random(ModuleSpace(shape, 2), np.random.default_rng(1))
    data = encode_module_element(x)
    assert data["rank"] == 2
    assert decode_module_element(data, shape).allclose(x, atol=0.0)


def test_serialize_output_handles_numpy_and_enums():
    """Testa a conversão de tipos numpy, complexos e enums."""
    data = serialize_output(
        {
            "inteiro": np.int64(3),
            "real": np.float64(0.5),
            "logico": np.bool_(True),
            "complexo": 1 + 2j,
            "vetor": np.array([1.0, 2.0]),
            "cor": Cor.AZUL,
            "tupla": (1, None),
        }
    )
    assert data == {
        "inteiro": 3,
        "real": 0.5,
        "logico": True,
        "complexo": [1.0, 2.0],
        "vetor": [1.0, 2.0],
        "cor": "azul",
        "tupla": [1, None],
    }


def test_dumps_report_sorts_keys_and_keeps_unicode():
    """Testa JSON com chaves ordenadas e texto UTF-8."""
    text = dumps_report({"b": 1, "a": "‖τ‖"}, indent=None)
    assert text == '{"a": "‖τ‖", "b": 1}'
