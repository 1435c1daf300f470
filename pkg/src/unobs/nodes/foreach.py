from __future__ import annotations

from typing import Any, Callable

from loguru import logger
from pydantic import Field

from .node import Node
from .run import RESULTS, merge_foreach, run_foreach
from .step import CheckTask, Step

ForeachTask = Callable[..., list[Any]]


class Foreach(Node):
    """
    Run a check once per item, e.g. per support radius ξ.
    """

    task: ForeachTask | list[Any] = Field(
        description="Callable that returns a list or a list to iterate over."
    )
    item_name: str = Field(
        default="item",
        description="Name of the iterating variable. Available to the check by parameter name.",
    )
    _then: Step | None = None
    _prev: str = "foreach"

    def __init__(
        self,
        task: ForeachTask | Callable | list[Any],
        item_name: str = "item",
        **kwargs,
    ):
        super().__init__(task=task, item_name=item_name, **kwargs)

    def then(self, task: CheckTask) -> Foreach:
        """Set the check to run for each item."""
        if self._prev != "foreach":
            raise RuntimeError(".then(...) must follow Foreach(...) ")
        self._then = Step(task=task)
        self._prev = "then"
        return self

    def run(self, data: dict[str, Any]):
        if self._then is None:
            raise RuntimeError("Foreach(...) needs .then(...) before it can run")
        logger.info(f"Running foreach loop over {self.item_name}")

        items = run_foreach(self.task, data) if callable(self.task) else self.task
        previous = list(data.get(RESULTS, []))
        base = {k: v for k, v in data.items() if k != RESULTS}

        results = []
        for i, item in enumerate(items):
            logger.info(f"Processing {self.item_name} {i}: {item}")
            results.append(self._then.run(base, {self.item_name: item}))

        if results:
            data = merge_foreach(results)
            data[RESULTS] = previous + data.get(RESULTS, [])

        logger.info("Foreach loop finished")
        return data
