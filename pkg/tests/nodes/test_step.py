from tests.utils import bounded, double
from unobs.nodes.run import RESULTS
from unobs.nodes.step import Step


def test_step_run():
    """Test that Step.run produce the expected output"""
    node = Step(task=double)
    result = node.run({"x": 3})
    assert result["x"] == 6


def test_step_run_with_item():
    """Items override data entries of the same name."""
    node = Step(task=bounded)
    result = node.run({"x": 3.0, "tol": 1.0}, {"x": 0.5})
    assert result[RESULTS][0].passed


def test_step_task_name():
    """The name of a step is the name of its check."""
    assert Step(task=double).task_name == "double"
