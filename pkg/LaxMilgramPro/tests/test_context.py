"""Testes para o contexto de execução."""

from __future__ import annotations

import logging
import sys
from pathlib import Path

# Ensure project and package roots are on sys.path for absolute imports
PROJECT_ROOT = Path(__file__).resolve().parents[2]
if str(PROJECT_ROOT) not in sys.path:
    sys.path.append(str(PROJECT_ROOT))

PACKAGE_ROOT = PROJECT_ROOT / "LaxMilgramPro"
if str(PACKAGE_ROOT) not in sys.path:
    sys.path.append(str(PACKAGE_ROOT))

from LaxMilgramPro.context import RunContext  # noqa: E402


def test_run_context_creation():
    """Testa a criação de um RunContext vazio."""
    context = RunContext()
    assert isinstance(context.notes, dict)
    assert len(context.notes) == 0


def test_note_once_records_first_message(caplog):
    """Testa que a primeira nota de um tópico é registrada e logada."""
    context = RunContext()
    with caplog.at_level(logging.INFO, logger="LaxMilgramPro.context"):
        assert context.note_once("topico", "primeira")
    assert context.notes == {"topico": "primeira"}
    assert "primeira" in caplog.text


def test_note_once_ignores_repeats(caplog):
    """Testa que notas repetidas não sobrescrevem nem voltam ao log."""
    context = RunContext()
    context.note_once("topico", "primeira")
    with caplog.at_level(logging.INFO, logger="LaxMilgramPro.context"):
        assert not context.note_once("topico", "segunda")
    assert context.notes["topico"] == "primeira"
    assert "segunda" not in caplog.text


def test_contexts_are_independent():
    """Testa que cada execução tem suas próprias notas."""
    first, second = RunContext(), RunContext()
    first.note_once("a", "x")
    assert "a" not in second.notes
    assert RunContext(notes={"b": "y"}).notes == {"b": "y"}
