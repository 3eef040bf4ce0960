### CONTEXT

from __future__ import annotations

import logging

from pydantic import BaseModel, Field

logger = logging.getLogger(__name__)


class RunContext(BaseModel):
    notes: dict[str, str] = Field(
        default_factory=dict,
        description="Notas registradas durante a execução, indexadas por tópico (uma por tópico).",
    )

    def note_once(self, key: str, message: str) -> bool:
        """Record and log ``message`` the first time ``key`` is seen in this run."""
        if key in self.notes:
            return False
        self.notes[key] = message
        logger.info("%s", message)
        return True
