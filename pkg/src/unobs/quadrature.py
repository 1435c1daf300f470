"""Gauss–Legendre helpers shared by the radial, time and angular integrators."""

from __future__ import annotations

from functools import lru_cache
from typing import Callable, Iterable, Sequence

import numpy as np
from loguru import logger
from scipy import integrate

Integrand = Callable[[np.ndarray], np.ndarray]


@lru_cache(maxsize=64)
def _leggauss(n: int) -> tuple[np.ndarray, np.ndarray]:
    nodes, weights = np.polynomial.legendre.leggauss(n)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def gauss_nodes(a: float, b: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss–Legendre nodes and weights mapped to [a, b]."""
    x, w = _leggauss(n)
    half = 0.5 * (b - a)
    return half * x + 0.5 * (a + b), half * w


def geometric_split(a: float, b: float, ratio: float = 1.5) -> list[float]:
    """Points a = p_0 < ... < p_k = b with p_{i+1}/p_i <= ratio (a > 0)."""
    if a <= 0.0 or b <= a:
        return [a, b]
    count = max(1, int(np.ceil(np.log(b / a) / np.log(ratio))))
    return list(np.geomspace(a, b, count + 1))


def integrate_pieces(
    func: Integrand,
    points: Iterable[float],
    n: int = 48,
    ratio: float | None = 1.5,
) -> float:
    """Composite Gauss–Legendre rule over consecutive `points`.

    Intervals away from the origin are refined geometrically so that integrands
    behaving like powers of r stay well resolved.
    """
    pts = sorted(set(float(p) for p in points))
    total = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        sub = geometric_split(a, b, ratio) if ratio else [a, b]
        for lo, hi in zip(sub[:-1], sub[1:]):
            x, w = gauss_nodes(lo, hi, n)
            total += float(np.dot(w, func(x)))
    return total


def integrate_to_infinity(func: Integrand, start: float, n: int = 64) -> float:
    """Integral of func over [start, ∞) through the substitution u = start/r.

    Exact for integrands of the form r^{-2} times a polynomial in 1/r of degree < 2n.
    """
    if start <= 0.0:
        raise ValueError(f"Tail integration needs a positive start, got {start}")
    u, w = gauss_nodes(0.0, 1.0, n)
    r = start / u
    return float(np.dot(w, func(r) * start / u**2))


def adaptive(
    func: Callable[[float], float],
    a: float,
    b: float,
    points: Sequence[float] | None = None,
    epsabs: float = 1e-13,
    epsrel: float = 1e-12,
) -> float:
    """Adaptive quadrature of a scalar integrand (sampled profiles)."""
    if b <= a:
        return 0.0
    inner = [p for p in (points or []) if a < p < b] or None
    value, error = integrate.quad(
        func, a, b, points=inner, limit=400, epsabs=epsabs, epsrel=epsrel
    )
    if error > max(epsabs, epsrel * abs(value)) * 1e3:
        logger.warning(f"Adaptive quadrature on [{a}, {b}] reached error {error:.3e}")
    return float(value)
