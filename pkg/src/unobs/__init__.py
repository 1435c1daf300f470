"""
.. include:: ../../README.md

---

"""

from .campaign import Campaign as Campaign
from .campaign import CheckResult as CheckResult
from .config import RunConfig as RunConfig
from .control import Control as Control
from .dspace import PolyClassP as PolyClassP
from .fields import HarmonicField as HarmonicField
from .harmonics import AngularExpansion as AngularExpansion
from .harmonics import HarmonicIndex as HarmonicIndex
from .nodes.foreach import Foreach as Foreach

__all__ = [
    "Campaign",
    "CheckResult",
    "Foreach",
    "RunConfig",
    "HarmonicIndex",
    "AngularExpansion",
    "HarmonicField",
    "PolyClassP",
    "Control",
]
