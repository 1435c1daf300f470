import numpy as np
import pytest

from tests import utils
from unobs.campaign import CheckResult
from unobs.nodes.run import RESULTS, merge_foreach, run, run_foreach, run_step, unobs_path


def test_run_injects_by_name():
    """Only parameters named in the signature are passed."""
    assert run(utils.add_item, {"x": 3, "unused": 1}, {"item": 2}) == {"y": 5}


def test_run_step():
    """run_step updates data with the returned dict."""
    result = run_step(utils.double, {"x": 3})
    assert result["x"] == 6
    assert result[RESULTS] == []


def test_run_step_collects_results():
    """CheckResults go to the results list instead of the data."""
    result = run_step(utils.bounded, {"x": 0.5, "tol": 1.0})
    assert "bounded" not in result
    (record,) = result[RESULTS]
    assert isinstance(record, CheckResult)
    assert record.passed


def test_run_step_does_not_mutate_input():
    """Input data is copied before it is updated."""
    data = {"x": 3}
    run_step(utils.double, data)
    assert data == {"x": 3}


@pytest.mark.parametrize("task", [utils.is_multiple_of_three, utils.get_radii])
def test_run_step_task_with_invalid_return_type(task):
    """run_step should return None or dict[str, Any]. Test that it fails for bool and list."""
    with pytest.raises(ValueError, match="must return a dict or None"):
        run_step(task, {"x": 3})


def test_run_step_missing_parameter():
    """Missing inputs surface as TypeError from the check."""
    with pytest.raises(TypeError):
        run_step(utils.double, {})


def test_run_foreach():
    """run_foreach returns the list produced by the task."""
    assert run_foreach(utils.get_radii, {}) == [0.5, 1.0, 2.0]


@pytest.mark.parametrize("task", [utils.double, utils.is_multiple_of_three])
def test_run_foreach_task_with_invalid_return_type(task):
    """run_foreach should return a list. Test that it fails for dict and bool."""
    with pytest.raises(ValueError, match="must return list"):
        run_foreach(task, {"x": 3})


def test_merge_foreach():
    """Identical values collapse and differing values become lists."""
    merged = merge_foreach([{"x": 1, "y": 2}, {"x": 1, "y": 3}])
    assert merged["x"] == 1
    assert sorted(merged["y"]) == [2, 3]
    assert RESULTS not in merged


def test_merge_foreach_concatenates_results():
    """Results of all items are kept in order."""
    a = CheckResult(criterion="a", value=0.0, tolerance=1.0, passed=True)
    b = CheckResult(criterion="b", value=2.0, tolerance=1.0, passed=False)
    merged = merge_foreach([{RESULTS: [a]}, {RESULTS: [b]}])
    assert merged[RESULTS] == [a, b]


def test_merge_foreach_arrays():
    """Arrays that cannot be compared as booleans are kept as lists."""
    merged = merge_foreach([{"v": np.zeros(2)}, {"v": np.ones(2)}])
    assert isinstance(merged["v"], list)


def test_unobs_path(tmp_path):
    """The artifact directory follows UNOBS_DIR."""
    assert unobs_path() == tmp_path / ".unobs"
