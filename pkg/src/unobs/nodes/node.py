from __future__ import annotations

from typing import Any

from pydantic import BaseModel


class Node(BaseModel):
    task: Any

    def run(self, data: dict[str, Any]) -> dict[str, Any]:
        raise NotImplementedError
