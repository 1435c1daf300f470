from loguru import logger

from unobs.campaign import CheckResult


def void():
    logger.info("Checking nothing.")


def double(x: int):
    return {"x": 2 * x}


def triple(x: int):
    return {"x": 3 * x}


def is_multiple_of_three(x: int):
    return x % 3 == 0


def get_radii():
    return [0.5, 1.0, 2.0]


def add_item(item: int, x: int):
    return {"y": item + x}


def bounded(x: float, tol: float):
    """Criterion that passes when x <= tol."""
    return {
        "bounded": CheckResult(criterion="bounded", value=x, tolerance=tol, passed=x <= tol)
    }


def bounded_by_radius(xi: float, tol: float):
    name = f"bounded_xi={xi}"
    return {name: CheckResult(criterion=name, value=xi, tolerance=tol, passed=xi <= tol)}
