from fractions import Fraction
from json import loads
from pathlib import Path

import numpy as np
import pytest

from unobs.campaign import CheckResult
from unobs.harmonics import AngularExpansion, HarmonicIndex
from unobs.serialize import dumps, format_float, to_plain, write_csv, write_json


@pytest.mark.parametrize(
    "value, expected",
    [(1.0, "1.0"), (0.1, "0.10000000000000001"), (1e-20, "9.9999999999999995e-21"), (float("inf"), '"inf"')],
)
def test_format_float(value, expected):
    """17 significant digits, integral floats keep a decimal point."""
    assert format_float(value) == expected


def test_floats_round_trip_exactly():
    """Every float is read back bit for bit."""
    values = list(np.random.default_rng(0).normal(size=20))
    assert loads(dumps(values)) == values


def test_to_plain():
    """Fractions become strings, arrays lists and paths strings."""
    data = {"f": Fraction(1, 3), "a": np.arange(2), "p": Path("x"), "s": {2, 1}, 3: np.float64(0.5)}
    assert to_plain(data) == {"f": "1/3", "a": [0, 1], "p": "x", "s": [1, 2], "3": 0.5}


def test_to_plain_uses_json_layout():
    """Models with a JSON layout are written in that layout."""
    e = AngularExpansion(band_limit=1, coefficients={HarmonicIndex(l=1, m=0): 2.0})
    assert to_plain([e]) == [{"L": 1, "coeffs": [{"l": 1, "m": 0, "c": 2.0}]}]


def test_write_json(tmp_path):
    """Nested output directories are created."""
    result = CheckResult(criterion="c", value=0.5, tolerance=1.0, passed=True)
    path = write_json(tmp_path / "a" / "b.json", {"results": [result]})
    assert loads(path.read_text())["results"][0]["pass"] is True


def test_write_csv(tmp_path):
    """Header, comma separation, LF endings and empty cells for None."""
    path = write_csv(tmp_path / "t.csv", ["N", "value", "ok"], [(1, 0.25, True), (2, None, False)])
    assert path.read_bytes() == b"N,value,ok\n1,0.25,true\n2,,false\n"
