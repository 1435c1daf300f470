from __future__ import annotations

from copy import deepcopy
from pathlib import Path
from typing import Any, Callable

from loguru import logger
from pydantic import BaseModel, Field

from .nodes.node import Node
from .nodes.run import RESULTS, unobs_path
from .nodes.step import Step
from .serialize import write_json


class CheckResult(BaseModel):
    """Outcome of one acceptance criterion."""

    criterion: str = Field(description="Name of the criterion")
    value: float | None = Field(description="Measured quantity compared with the tolerance")
    tolerance: float | None = Field(description="Threshold the value was checked against")
    passed: bool = Field(description="Whether the criterion holds")
    details: dict[str, Any] = Field(default_factory=dict, description="Supporting numbers")

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "criterion": self.criterion,
            "value": self.value,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "details": self.details,
        }


class Report(BaseModel):
    campaign: str
    results: list[CheckResult] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    @property
    def failed(self) -> list[str]:
        return [r.criterion for r in self.results if not r.passed]

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "campaign": self.campaign,
            "pass": self.passed,
            "criteria": [r.to_json_dict() for r in self.results],
        }


class Campaign(BaseModel):
    """
    Sequence of checks run against shared parameters, ending in a single `report.json`.
    """

    name: str = Field(
        description="Name of the campaign",
        pattern=r"^[A-Za-z0-9]([A-Za-z0-9_-]{0,61}[A-Za-z0-9])?$",
        max_length=63,
    )
    parameters: dict[str, Any] = Field(
        default={},
        description="Named parameters that are available to the checks.",
    )
    _nodes: list[Node] = []

    @classmethod
    def new(cls, name: str, **kwargs) -> Campaign:
        """
        Create a new `Campaign` instance using `Campaign.new(name="paper")`.
        """
        return cls(name=name, **kwargs)

    @property
    def outdir(self) -> Path:
        outdir = Path(self.parameters.get("outdir") or unobs_path() / self.name)
        outdir.mkdir(exist_ok=True, parents=True)
        return outdir

    def next(self, node: Node | Callable) -> Campaign:
        """Add checks or Nodes to the campaign. Callables are wrapped in a Step."""
        if not isinstance(node, Node):
            node = Step(task=node)
        self._nodes.append(node)
        return self

    def run(self, parameters: dict[str, Any] | None = None, write: bool = True) -> Report:
        """Run every check in order and write the report once at the end."""
        logger.info(f"Campaign {self.name} started")
        data = deepcopy(self.parameters)
        if parameters:  # Override default parameters
            data.update((k, parameters[k]) for k in data.keys() & parameters.keys())
        data[RESULTS] = []
        for node in self._nodes:
            data = node.run(data)
        report = Report(campaign=self.name, results=data[RESULTS])
        if write:
            write_json(self.outdir / "report.json", report)
        status = "passed" if report.passed else f"failed: {', '.join(report.failed)}"
        logger.info(f"Campaign {self.name} ended, {status}")
        return report

    def __repr__(self):
        return f"{self.__class__.__name__}<name={self.name}>"
