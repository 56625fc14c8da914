"""Oracle density models: exact pdfs, seeded samplers, and fourth derivatives of 1/f."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import special, stats

from .errors import DomainError
from .kernels import multi_indices

__all__ = [
    "DensityModel",
    "builtin_models",
    "get_model",
    "inv_f_d4",
    "inv_f_d4_numeric",
    "finite_difference",
    "as_generator",
    "replicate_seed",
    "MODEL_NAMES",
]

PDF_FLOOR = 1e-12


def as_generator(seed) -> np.random.Generator:
    """Accept an int, a ``SeedSequence`` or a ``Generator``."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def replicate_seed(root: int, *index: int) -> np.random.SeedSequence:
    """Seed for replicate ``index`` derived from ``root``.

    Uses numpy's ``SeedSequence`` spawn rule: the root entropy and the spawn key
    are hashed together, so distinct indices give independent, non-overlapping
    streams and the mapping does not depend on scheduling.
    """
    return np.random.SeedSequence(entropy=int(root), spawn_key=tuple(int(i) for i in index))


@dataclass(frozen=True)
class DensityModel:
    """A density with a seeded sampler, used as ground truth.

    ``pdf`` takes points shaped like kernel arguments: any shape for ``d = 1``,
    last axis of length ``d`` otherwise.
    """

    name: str
    dim: int
    pdf: Callable = field(repr=False)
    sampler: Callable = field(repr=False)
    cdf: Optional[Callable] = field(default=None, repr=False)
    quantile: Optional[Callable] = field(default=None, repr=False)
    inv_f_deriv4: Optional[Callable] = field(default=None, repr=False)
    support: tuple = (-math.inf, math.inf)
    fmax: float = math.nan

    def sample(self, seed, n: int) -> np.ndarray:
        """``n`` draws; shape ``(n,)`` for ``d = 1`` and ``(n, d)`` otherwise."""
        if n < 1:
            raise ValueError("sample size must be positive")
        return self.sampler(as_generator(seed), int(n))


# ---------------------------------------------------------------------------
# builtin models

_SQRT2PI = math.sqrt(2.0 * math.pi)


def _normal_d4(t):
    t = np.asarray(t, dtype=float)
    t2 = t * t
    return _SQRT2PI * (t2 * t2 + 6.0 * t2 + 3.0) * np.exp(0.5 * t2)


def _normal():
    return DensityModel(
        name="normal",
        dim=1,
        pdf=lambda t: np.exp(-0.5 * np.square(t)) / _SQRT2PI,
        sampler=lambda rng, n: rng.standard_normal(n),
        cdf=special.ndtr,
        quantile=special.ndtri,
        inv_f_deriv4=_normal_d4,
        fmax=1.0 / _SQRT2PI,
    )


def _student_t4():
    def pdf(t):
        return 0.375 * (1.0 + np.square(t) / 4.0) ** -2.5

    def sampler(rng, n):
        z = rng.standard_normal(n)
        chi2 = rng.chisquare(4.0, n)
        return z / np.sqrt(chi2 / 4.0)

    dist = stats.t(4)
    return DensityModel(
        name="t4", dim=1, pdf=pdf, sampler=sampler, cdf=dist.cdf, quantile=dist.ppf, fmax=0.375
    )


def _cauchy():
    return DensityModel(
        name="cauchy",
        dim=1,
        pdf=lambda t: 1.0 / (math.pi * (1.0 + np.square(t))),
        sampler=lambda rng, n: np.tan(math.pi * (rng.random(n) - 0.5)),
        cdf=lambda t: 0.5 + np.arctan(t) / math.pi,
        quantile=lambda q: np.tan(math.pi * (np.asarray(q, dtype=float) - 0.5)),
        inv_f_deriv4=lambda t: np.zeros_like(np.asarray(t, dtype=float)),
        fmax=1.0 / math.pi,
    )


def _lomax():
    # f(x) = 1/(1+x)^2 on x >= 0; 1/f = (1+x)^2 has zero fourth derivative
    def pdf(t):
        t = np.asarray(t, dtype=float)
        return np.where(t >= 0, 1.0 / np.square(1.0 + np.abs(t)), 0.0)

    def sampler(rng, n):
        u = rng.random(n)
        return u / (1.0 - u)

    return DensityModel(
        name="pareto",
        dim=1,
        pdf=pdf,
        sampler=sampler,
        cdf=lambda t: np.where(np.asarray(t) > 0, np.maximum(t, 0) / (1.0 + np.maximum(t, 0)), 0.0),
        quantile=lambda q: np.asarray(q, dtype=float) / (1.0 - np.asarray(q, dtype=float)),
        inv_f_deriv4=lambda t: np.zeros_like(np.asarray(t, dtype=float)),
        support=(0.0, math.inf),
        fmax=1.0,
    )


def _pareto_classical():
    def pdf(t):
        t = np.asarray(t, dtype=float)
        return np.where(t >= 1.0, 1.0 / np.square(np.maximum(t, 1.0)), 0.0)

    return DensityModel(
        name="pareto-classical",
        dim=1,
        pdf=pdf,
        sampler=lambda rng, n: 1.0 / (1.0 - rng.random(n)),
        cdf=lambda t: np.where(np.asarray(t) > 1, 1.0 - 1.0 / np.maximum(t, 1.0), 0.0),
        quantile=lambda q: 1.0 / (1.0 - np.asarray(q, dtype=float)),
        inv_f_deriv4=lambda t: np.zeros_like(np.asarray(t, dtype=float)),
        support=(1.0, math.inf),
        fmax=1.0,
    )


def _hermite_like(order: int, x):
    # d^k/dx^k exp(x^2/2) = P_k(x) exp(x^2/2)
    polys = {
        0: lambda x: np.ones_like(x),
        1: lambda x: x,
        2: lambda x: x * x + 1.0,
        3: lambda x: x**3 + 3.0 * x,
        4: lambda x: x**4 + 6.0 * x * x + 3.0,
    }
    return polys[order](x)


def _normal_2d():
    def pdf(t):
        t = np.asarray(t, dtype=float)
        return np.exp(-0.5 * np.einsum("...i,...i->...", t, t)) / (2.0 * math.pi)

    def d4(t):
        t = np.asarray(t, dtype=float)
        base = 2.0 * math.pi * np.exp(0.5 * np.einsum("...i,...i->...", t, t))
        return {
            v: base * _hermite_like(v[0], t[..., 0]) * _hermite_like(v[1], t[..., 1])
            for v in multi_indices(2, 4)
        }

    return DensityModel(
        name="normal-2d",
        dim=2,
        pdf=pdf,
        sampler=lambda rng, n: rng.standard_normal((n, 2)),
        inv_f_deriv4=d4,
        fmax=1.0 / (2.0 * math.pi),
    )


_FACTORIES = {
    "normal": _normal,
    "t4": _student_t4,
    "cauchy": _cauchy,
    "pareto": _lomax,
    "pareto-classical": _pareto_classical,
    "normal-2d": _normal_2d,
}
_ALIASES = {"student-t4": "t4", "t": "t4", "lomax": "pareto", "gaussian": "normal"}
MODEL_NAMES = tuple(_FACTORIES)
_CACHE: dict = {}


def get_model(name: str) -> DensityModel:
    key = name.strip().lower()
    key = _ALIASES.get(key, key)
    if key not in _FACTORIES:
        raise LookupError(f"unknown model {name!r}; choose from {', '.join(MODEL_NAMES)}")
    if key not in _CACHE:
        _CACHE[key] = _FACTORIES[key]()
    return _CACHE[key]


def builtin_models() -> list[DensityModel]:
    return [get_model(name) for name in MODEL_NAMES]


# ---------------------------------------------------------------------------
# derivatives of 1/f

_STENCILS = {
    # five-point central stencils on offsets -2..2
    0: np.array([0.0, 0.0, 1.0, 0.0, 0.0]),
    1: np.array([1.0 / 12, -2.0 / 3, 0.0, 2.0 / 3, -1.0 / 12]),
    2: np.array([-1.0 / 12, 4.0 / 3, -2.5, 4.0 / 3, -1.0 / 12]),
    3: np.array([-0.5, 1.0, 0.0, -1.0, 0.5]),
    4: np.array([1.0, -4.0, 6.0, -4.0, 1.0]),
}
_OFFSETS = np.arange(-2, 3)


def _stencil_apply(g, pts, v, step):
    """Tensor-product five-point stencil for ``D_v g`` at ``pts`` of shape ``(m, d)``.

    Each offset is paired with its mirror image and the pair is summed first,
    so the result for a point and for its reflection differ only in sign
    (odd ``|v|``) or not at all (even ``|v|``) whenever ``g`` is symmetric.
    """
    axes = [i for i, vi in enumerate(v) if vi]
    sign = -1.0 if sum(v) % 2 else 1.0
    total = np.zeros(pts.shape[0])
    seen = set()

    def shifted(combo):
        out = pts.copy()
        for a, j in zip(axes, combo):
            out[:, a] += _OFFSETS[j] * step
        return out

    for combo in itertools.product(range(5), repeat=len(axes)):
        mirror = tuple(4 - j for j in combo)
        if combo in seen:
            continue
        seen.update((combo, mirror))
        coef = math.prod(_STENCILS[v[a]][j] for a, j in zip(axes, combo))
        if coef == 0.0:
            continue
        if mirror == combo:
            total += coef * g(shifted(combo))
        else:
            total += coef * (g(shifted(combo)) + sign * g(shifted(mirror)))
    return total / step ** sum(v)


def finite_difference(g, pts, v, step, richardson: bool = True):
    """Central finite-difference estimate of ``D_v g`` at points ``pts`` (``(m, d)``).

    ``step`` may be a scalar or one step per point. With ``richardson`` the
    estimates at ``step`` and ``2 step`` are combined to cancel the ``step^2``
    error term.
    """
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    step = np.broadcast_to(np.asarray(step, dtype=float), pts.shape[:1])
    fine = _stencil_apply(g, pts, v, step)
    if not (richardson and sum(v) > 0):
        return fine
    coarse = _stencil_apply(g, pts, v, 2.0 * step)
    return (4.0 * fine - coarse) / 3.0


def _check_floor(model: DensityModel, t):
    f = np.asarray(model.pdf(t), dtype=float)
    if np.any(~(f > PDF_FLOOR)):
        raise DomainError(f"density {model.name!r} is below {PDF_FLOOR} at a requested point")
    return f


def _as_points(model: DensityModel, t):
    t = np.asarray(t, dtype=float)
    if model.dim == 1:
        return t.reshape(-1, 1), t.shape
    if t.shape[-1] != model.dim:
        raise ValueError(f"model {model.name!r} has dim {model.dim}, got shape {t.shape}")
    return t.reshape(-1, model.dim), t.shape[:-1]


def inv_f_d4_numeric(model: DensityModel, t):
    """Finite-difference fourth derivatives of ``1/f``.

    Step ``0.01 max(1, |t|)`` with Richardson-extrapolated five-point stencils.
    Returns an array for ``d = 1`` and a dict keyed by ``v`` otherwise.
    """
    _check_floor(model, t)
    pts, shape = _as_points(model, t)
    step = 0.01 * np.maximum(1.0, np.linalg.norm(pts, axis=1))
    if model.dim == 1:
        g = lambda p: 1.0 / model.pdf(p[:, 0])  # noqa: E731
        return finite_difference(g, pts, (4,), step).reshape(shape)
    g = lambda p: 1.0 / model.pdf(p)  # noqa: E731
    return {
        v: finite_difference(g, pts, v, step).reshape(shape)
        for v in multi_indices(model.dim, 4)
    }


def inv_f_d4(model: DensityModel, t):
    """Fourth derivative(s) of ``1/f`` at ``t``: analytic when known, else numeric."""
    if model.inv_f_deriv4 is None:
        return inv_f_d4_numeric(model, t)
    _check_floor(model, t)
    return model.inv_f_deriv4(t)
