from __future__ import annotations

from typing import Any, Callable

from pydantic import Field

from .node import Node
from .run import run_step

CheckTask = Callable[..., None | dict]


class Step(Node):
    """A single check of a campaign."""

    task: CheckTask = Field(description="Callable check. Can return a dict")

    @property
    def task_name(self):
        """Name of the check."""
        return self.task.__name__

    def run(self, data: dict[str, Any], item: dict[str, Any] = {}):
        return run_step(self.task, data, item)
