"""Clipping function ``p`` and the bandwidth factor ``alpha(s) = c sqrt(p(s / c^2))``."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.polynomial import Polynomial

__all__ = [
    "ClippingSpec",
    "builtin_p",
    "make_clipping",
    "alpha",
    "alpha_prime",
    "alpha_second",
    "alpha_pow_d",
    "alpha_pow_d_prime",
    "auto_clip_constant",
    "CLIPPING_KINDS",
]

CLIPPING_KINDS = ("quintic",)


def _quintic_piece() -> Polynomial:
    # 1 + t^6/64 (1 - 2(t-2) + 9/4 (t-2)^2 - 7/4 (t-2)^3 + 7/8 (t-2)^4), expanded in t
    u = Polynomial([-2.0, 1.0])
    inner = 1 - 2 * u + 2.25 * u**2 - 1.75 * u**3 + 0.875 * u**4
    return 1 + Polynomial([0, 0, 0, 0, 0, 0, 1.0 / 64]) * inner


_P0 = _quintic_piece()
_P1 = _P0.deriv()
_P2 = _P1.deriv()


def _piecewise(poly: Polynomial, low, high):
    def fn(x):
        x = np.asarray(x, dtype=float)
        mid = poly(np.clip(x, 0.0, 2.0))
        return np.where(x <= 0.0, low(x), np.where(x >= 2.0, high(x), mid))

    return fn


@dataclass(frozen=True)
class ClippingSpec:
    """Clipping constant ``c``, threshold ``t0`` and ``p`` with two derivatives."""

    c: float
    t0: float
    p: Callable = field(repr=False)
    p_prime: Callable = field(repr=False)
    p_second: Callable = field(repr=False)
    kind: str = "quintic"

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError(f"clipping constant c must be positive, got {self.c}")
        if not self.t0 >= 1:
            raise ValueError(f"threshold t0 must be >= 1, got {self.t0}")

    @property
    def threshold(self) -> float:
        """Density level ``t0 c^2`` above which ``alpha(s) = sqrt(s)``."""
        return self.t0 * self.c**2


def builtin_p():
    """The quintic-smooth clipping function with ``t0 = 2`` and its first two derivatives.

    Returns ``(p, p_prime, p_second)``, each vectorized over numpy arrays.
    """
    zero = lambda x: np.zeros_like(x)  # noqa: E731
    p = _piecewise(_P0, lambda x: np.ones_like(x), lambda x: x)
    p1 = _piecewise(_P1, zero, lambda x: np.ones_like(x))
    p2 = _piecewise(_P2, zero, zero)
    return p, p1, p2


def make_clipping(c: float, t0: float = 2.0, kind: str = "quintic") -> ClippingSpec:
    if kind != "quintic":
        raise LookupError(f"unknown clipping kind {kind!r}")
    if t0 != 2.0:
        raise ValueError("the quintic clipping function is only defined for t0 = 2")
    p, p1, p2 = builtin_p()
    return ClippingSpec(c=float(c), t0=float(t0), p=p, p_prime=p1, p_second=p2, kind=kind)


def alpha(spec: ClippingSpec, s):
    """``c sqrt(p(s / c^2))``; never below ``c``.

    Above the threshold ``t0 c^2`` this is ``sqrt(s)``, computed directly so the
    square-root law holds bit for bit.
    """
    s = np.asarray(s, dtype=float)
    x = s / spec.c**2
    return np.where(x >= spec.t0, np.sqrt(np.maximum(s, 0.0)), spec.c * np.sqrt(spec.p(x)))


def alpha_prime(spec: ClippingSpec, s):
    x = np.asarray(s, dtype=float) / spec.c**2
    return spec.p_prime(x) / (2.0 * spec.c * np.sqrt(spec.p(x)))


def alpha_second(spec: ClippingSpec, s):
    x = np.asarray(s, dtype=float) / spec.c**2
    p, p1, p2 = spec.p(x), spec.p_prime(x), spec.p_second(x)
    return (2.0 * p * p2 - p1 * p1) / (4.0 * spec.c**3 * p**1.5)


def alpha_pow_d(spec: ClippingSpec, s, d: int):
    return alpha(spec, s) ** d


def alpha_pow_d_prime(spec: ClippingSpec, s, d: int):
    """Derivative of ``alpha(s)**d``: ``d alpha^{d-1}(s) alpha'(s)``."""
    if d < 1:
        raise ValueError("dimension must be >= 1")
    return d * alpha(spec, s) ** (d - 1) * alpha_prime(spec, s)


def auto_clip_constant(pilot_values, t0: float = 2.0, quantile: float = 0.05) -> float:
    """``c = sqrt(q / t0)`` with ``q`` a low quantile of the pilot density values.

    About ``1 - quantile`` of the observations then fall in the square-root-law
    region ``f >= t0 c^2``.
    """
    vals = np.asarray(pilot_values, dtype=float)
    vals = vals[np.isfinite(vals) & (vals > 0)]
    if vals.size == 0:
        raise ValueError("no positive pilot density values to choose c from")
    return float(np.sqrt(np.quantile(vals, quantile) / t0))
