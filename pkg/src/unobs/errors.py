"""Exceptions raised by the numerical modules.

All of them derive from `ValueError`, so callers that only care about bad input can catch that.
"""

from __future__ import annotations

from typing import Any


class DomainError(ValueError):
    """Argument outside the mathematical domain of an operation."""


class BandLimitError(ValueError):
    """Angular band limits of two objects do not fit together."""


class NonSquareIntegrableError(ValueError):
    """Radial profile is not square integrable with weight r^2."""


class NonRadonIntegrableError(ValueError):
    """Plane integrals of a profile do not converge absolutely."""


class DegreeMismatchError(ValueError):
    """Polynomial class and harmonic degree do not agree."""


class UnsupportedProfileError(ValueError):
    """Operation is not available for the given profile representation."""


class ScheduleError(ValueError):
    """Coefficient schedule violates the defining conditions."""


class ConfigError(ValueError):
    """Run configuration file or flag is invalid."""


class CertificateError(ValueError):
    """A membership certificate failed for one term of a field."""

    def __init__(self, message: str, term: int, certificate: str, report: Any = None):
        super().__init__(message)
        self.term = term
        self.certificate = certificate
        self.report = report
