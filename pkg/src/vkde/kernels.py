"""Radial, compactly supported kernels and their moment functionals.

A kernel on R^d is stored through its profile ``phi`` with ``K(t) = phi(|t|^2)``.
Every builtin profile vanishes for ``|t|^2 > support_radius**2``.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import DomainError

__all__ = [
    "Kernel",
    "KernelMoments",
    "eval_kernel",
    "eval_kernel_grad",
    "eval_L",
    "compute_moments",
    "builtin_kernels",
    "get_kernel",
    "KERNEL_NAMES",
]

_GL_ORDER = 64
_GL_PANELS = 4


@dataclass(frozen=True)
class Kernel:
    """A radial kernel ``K(t) = phi(|t|^2)`` with compact support.

    Attributes
    ----------
    name : str
        Lookup name.
    dim : int
        Dimension ``d`` of the argument.
    profile : callable
        ``phi(s)`` for ``0 <= s <= support_radius**2``; callers never see values
        outside the support because :meth:`from_sq` masks them.
    profile_prime : callable
        ``phi'(s)`` on the same range (one-sided from inside at the boundary).
    support_radius : float
        ``sqrt(T)`` where ``[0, T]`` contains the support of ``phi``.
    smooth : bool
        True when ``phi''`` is uniformly bounded (the regularity the asymptotic
        formulas assume).
    """

    name: str
    dim: int
    profile: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    profile_prime: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    support_radius: float = 1.0
    smooth: bool = True

    def from_sq(self, s):
        """Kernel value from squared norms ``s``; exactly zero outside the support."""
        s = np.asarray(s, dtype=float)
        inside = s <= self.support_radius**2
        return np.where(inside, self.profile(np.where(inside, s, 0.0)), 0.0)

    def prime_from_sq(self, s):
        s = np.asarray(s, dtype=float)
        inside = s <= self.support_radius**2
        return np.where(inside, self.profile_prime(np.where(inside, s, 0.0)), 0.0)

    def __call__(self, t):
        return eval_kernel(self, t)


def _sq_norm(k: Kernel, t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if k.dim == 1:
        return t * t
    if t.ndim == 0 or t.shape[-1] != k.dim:
        raise ValueError(
            f"kernel {k.name!r} has dim {k.dim}, got points of shape {t.shape}"
        )
    return np.einsum("...i,...i->...", t, t)


def eval_kernel(k: Kernel, t):
    """Evaluate ``K(t)``.

    For ``d = 1`` every element of ``t`` is a point and the result has the
    shape of ``t``. For ``d > 1`` the last axis of ``t`` holds coordinates.
    """
    return k.from_sq(_sq_norm(k, t))


def eval_kernel_grad(k: Kernel, t):
    """Gradient ``2 phi'(|t|^2) t``, same shape as ``t``."""
    t = np.asarray(t, dtype=float)
    s = _sq_norm(k, t)
    g = 2.0 * k.prime_from_sq(s)
    return g * t if k.dim == 1 else g[..., None] * t


def eval_L(k: Kernel, t):
    """``L(t) = d K(t) + sum_i t_i dK/dt_i``, i.e. ``d phi(s) + 2 s phi'(s)``."""
    s = _sq_norm(k, t)
    return k.dim * k.from_sq(s) + 2.0 * s * k.prime_from_sq(s)


# ---------------------------------------------------------------------------
# builtin profiles


def _sphere_area(d: int) -> float:
    return 2.0 * math.pi ** (d / 2) / math.gamma(d / 2)


def _tricube(d: int) -> Kernel:
    # phi(s) = c (1 - s^{3/2})^3; radial integral of r^{d-1}(1-r^3)^3 by binomial sum
    radial = sum(math.comb(3, j) * (-1) ** j / (3 * j + d) for j in range(4))
    c = 1.0 / (_sphere_area(d) * radial)

    def phi(s):
        r3 = s * np.sqrt(s)
        return c * (1.0 - r3) ** 3

    def dphi(s):
        r = np.sqrt(s)
        return -4.5 * c * r * (1.0 - s * r) ** 2

    return Kernel("tricube", d, phi, dphi, 1.0, smooth=False)


def _epanechnikov(d: int) -> Kernel:
    c = d * (d + 2) / (2.0 * _sphere_area(d))

    def phi(s):
        return c * (1.0 - s)

    def dphi(s):
        return np.full_like(s, -c)

    return Kernel("epanechnikov", d, phi, dphi, 1.0, smooth=False)


def _biweight(d: int) -> Kernel:
    c = d * (d + 2) * (d + 4) / (8.0 * _sphere_area(d))

    def phi(s):
        return c * (1.0 - s) ** 2

    def dphi(s):
        return -2.0 * c * (1.0 - s)

    return Kernel("biweight", d, phi, dphi, 1.0, smooth=True)


_FACTORIES = {
    "tricube": _tricube,
    "epanechnikov": _epanechnikov,
    "biweight": _biweight,
}
KERNEL_NAMES = tuple(_FACTORIES)


def get_kernel(name: str, dim: int = 1) -> Kernel:
    """Look up a builtin kernel by name (case-insensitive)."""
    key = name.strip().lower()
    if key not in _FACTORIES:
        raise LookupError(f"unknown kernel {name!r}; choose from {', '.join(KERNEL_NAMES)}")
    if dim < 1:
        raise ValueError("kernel dimension must be positive")
    return _build(key, int(dim))


@lru_cache(maxsize=None)
def _build(key: str, dim: int) -> Kernel:
    return _FACTORIES[key](dim)


def builtin_kernels(dim: int = 1) -> list[Kernel]:
    return [get_kernel(name, dim) for name in KERNEL_NAMES]


# ---------------------------------------------------------------------------
# moments


@dataclass(frozen=True)
class KernelMoments:
    """Moment functionals of a kernel.

    ``tau[v] = int u^v K(u) du`` and ``mu[v] = int u^v K(u)^2 du`` keyed by the
    exponent tuple ``v``. Only even ``|v|`` is stored; odd entries vanish.
    """

    kernel_name: str
    dim: int
    smooth: bool
    mu0: float
    r_of_L: float
    tau: dict = field(default_factory=dict)
    mu: dict = field(default_factory=dict)

    def tau_of(self, v) -> float:
        v = tuple(v)
        return 0.0 if sum(v) % 2 else self.tau[v]

    def mu_of(self, v) -> float:
        v = tuple(v)
        return 0.0 if sum(v) % 2 else self.mu[v]

    @property
    def tau2(self) -> float:
        return self.tau[(2,) + (0,) * (self.dim - 1)]

    @property
    def tau4(self) -> float:
        return self.tau[(4,) + (0,) * (self.dim - 1)]

    def to_dict(self) -> dict:
        def keyed(m):
            return {",".join(map(str, v)): float(m[v]) for v in sorted(m)}

        return {
            "kernel": self.kernel_name,
            "dim": self.dim,
            "mu0": float(self.mu0),
            "r_of_L": float(self.r_of_L),
            "tau": keyed(self.tau),
            "mu": keyed(self.mu),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def multi_indices(dim: int, order: int):
    """All exponent tuples ``v`` of length ``dim`` with ``|v| == order``."""
    for combo in itertools.combinations_with_replacement(range(dim), order):
        v = [0] * dim
        for axis in combo:
            v[axis] += 1
        yield tuple(v)


def _sphere_monomial(v) -> float:
    """``int_{S^{d-1}} theta^v d sigma``; zero unless every exponent is even."""
    if any(vi % 2 for vi in v):
        return 0.0
    num = math.prod(math.gamma((vi + 1) / 2) for vi in v)
    return 2.0 * num / math.gamma((sum(v) + len(v)) / 2)


def _radial_integral(g, R: float) -> float:
    """Composite Gauss-Legendre integral of ``g(r)`` over ``[0, R]``."""
    x, w = np.polynomial.legendre.leggauss(_GL_ORDER)
    edges = np.linspace(0.0, R, _GL_PANELS + 1)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        r = 0.5 * (b - a) * x + 0.5 * (a + b)
        total += 0.5 * (b - a) * float(np.dot(w, g(r)))
    if not math.isfinite(total):
        raise DomainError("kernel moment integral is not finite")
    return total


def compute_moments(k: Kernel, max_order: int = 4) -> KernelMoments:
    """Compute ``tau_v`` (``|v| <= max_order``), ``mu_v`` (``|v| <= 2``), ``mu0``, ``int L^2``.

    Radial symmetry factors each moment into a sphere monomial integral (closed
    form) times a one dimensional radial integral, evaluated by composite
    Gauss-Legendre on ``[0, R]``. The builtin profiles are polynomial in ``r``,
    so the rule is exact up to rounding.
    """
    if max_order < 4:
        raise ValueError("max_order must be at least 4")
    d, R = k.dim, k.support_radius

    def K_r(r):
        return k.from_sq(r * r)

    def L_r(r):
        s = r * r
        return d * k.from_sq(s) + 2.0 * s * k.prime_from_sq(s)

    tau = {}
    for order in range(0, max_order + 1, 2):
        radial = _radial_integral(lambda r, o=order: r ** (o + d - 1) * K_r(r), R)
        for v in multi_indices(d, order):
            tau[v] = float(_sphere_monomial(v) * radial)
    mu = {}
    for order in (0, 2):
        radial = _radial_integral(lambda r, o=order: r ** (o + d - 1) * K_r(r) ** 2, R)
        for v in multi_indices(d, order):
            mu[v] = float(_sphere_monomial(v) * radial)
    r_of_L = _sphere_area(d) * _radial_integral(lambda r: r ** (d - 1) * L_r(r) ** 2, R)
    return KernelMoments(
        kernel_name=k.name,
        dim=d,
        smooth=k.smooth,
        mu0=float(mu[(0,) * d]),
        r_of_L=float(r_of_L),
        tau=tau,
        mu=mu,
    )
