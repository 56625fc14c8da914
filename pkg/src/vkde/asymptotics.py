"""Closed-form asymptotics for the clipped variable bandwidth estimators.

Bias constant, second-moment coefficients of the ideal estimator, the CLT
variance of the plug-in estimator, confidence intervals, the two-term IMSE and
its minimizer, and the pilot rate ``U(h1)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
from scipy import special

from .clipping import ClippingSpec, alpha, alpha_pow_d_prime
from .densities import DensityModel, _check_floor, inv_f_d4
from .errors import DomainError, KernelRegularityWarning
from .kernels import Kernel, KernelMoments, compute_moments, multi_indices

__all__ = [
    "EvaluationRegion",
    "AsymptoticSummary",
    "OptimalBandwidth",
    "bias_constant",
    "ideal_variance_coeffs",
    "sigma_t2",
    "confidence_interval",
    "region_integrals",
    "imse",
    "optimal_bandwidth",
    "rate_diagnostic_U",
    "rate_ratio",
    "summarize",
]


def _moments(k) -> KernelMoments:
    return k if isinstance(k, KernelMoments) else compute_moments(k)


def _warn_regularity(mom: KernelMoments):
    if not mom.smooth:
        warnings.warn(
            f"kernel {mom.kernel_name!r} does not have a bounded second profile derivative; "
            "asymptotic constants are reported anyway",
            KernelRegularityWarning,
            stacklevel=3,
        )


# ---------------------------------------------------------------------------
# region


@dataclass(frozen=True)
class EvaluationRegion:
    """``{t : f(t) > r, |t| < 1/r}`` with ``r`` above the clipping level ``t0 c^2``.

    Inside the region ``alpha(f(t)) = sqrt(f(t))`` exactly.
    """

    model: DensityModel
    spec: ClippingSpec
    r: float

    def __post_init__(self):
        if not self.r > self.spec.threshold:
            raise ValueError(
                f"r = {self.r} must exceed t0 c^2 = {self.spec.threshold} for the region"
            )

    def contains(self, t):
        t = np.asarray(t, dtype=float)
        f = self.model.pdf(t)
        norm = np.abs(t) if self.model.dim == 1 else np.linalg.norm(t, axis=-1)
        return (f > self.r) & (norm < 1.0 / self.r)

    def bounds(self):
        """Bounding interval of the region's box for ``d = 1``."""
        lo, hi = self.model.support
        return max(-1.0 / self.r, lo), min(1.0 / self.r, hi)

    def cells(self, n_cells: int = 2048):
        """Edges ``(a, b)`` of the 1-D grid cells whose endpoints both lie in the region."""
        if self.model.dim != 1:
            raise NotImplementedError("cell decomposition is implemented for d = 1")
        lo, hi = self.bounds()
        edges = np.linspace(lo, hi, n_cells + 1)
        inside = self.contains(edges)
        keep = inside[:-1] & inside[1:]
        return edges[:-1][keep], edges[1:][keep]

    def grid(self, m: int = 201, n_cells: int = 2048):
        """``m`` equispaced points spanning the region's cells (``d = 1``)."""
        a, b = self.cells(n_cells)
        if a.size == 0:
            raise DomainError(f"region with r = {self.r} is empty for model {self.model.name!r}")
        return np.linspace(a.min(), b.max(), m)


# ---------------------------------------------------------------------------
# pointwise constants


def bias_constant(model: DensityModel, k, t):
    """``sum_{|v|=4} tau_v D_v(1/f)(t) / v!``; the ``h^4`` coefficient of the bias.

    For ``d = 1`` this is ``tau_4 (1/f)''''(t) / 24``.
    """
    mom = _moments(k)
    _warn_regularity(mom)
    if mom.dim != model.dim:
        raise ValueError("kernel and model dimensions differ")
    d4 = inv_f_d4(model, t)
    if model.dim == 1:
        return mom.tau4 * np.asarray(d4) / 24.0
    total = 0.0
    for v in multi_indices(model.dim, 4):
        tau = mom.tau_of(v)
        if tau:
            total = total + tau * d4[v] / math.prod(math.factorial(vi) for vi in v)
    return total


def ideal_variance_coeffs(model: DensityModel, k, spec: ClippingSpec, t, order: int = 0):
    """Coefficient ``a_order(t)`` of ``h^{order+d}`` in ``E A^2``.

    ``a_0 = gamma^d f mu_0`` with ``gamma = alpha(f)``; odd orders vanish;
    ``a_2 = sum_{|v|=2} mu_v / v! D_v(f gamma^{d-2})`` by central differences.
    """
    mom = _moments(k)
    d = model.dim
    if order % 2:
        return np.zeros_like(np.asarray(model.pdf(t), dtype=float))
    f = _check_floor(model, t)
    if order == 0:
        return alpha(spec, f) ** d * f * mom.mu0
    if order != 2:
        raise ValueError("only orders 0, 1 and 2 are implemented")

    def g(pts):
        fv = model.pdf(pts[:, 0] if d == 1 else pts)
        return fv * alpha(spec, fv) ** (d - 2)

    pts = np.asarray(t, dtype=float).reshape(-1, d)
    step = 1e-2 * np.maximum(1.0, np.linalg.norm(pts, axis=1))
    total = np.zeros(pts.shape[0])
    for i in range(d):
        v = tuple(2 if j == i else 0 for j in range(d))
        e = np.zeros(d)
        e[i] = 1.0
        shift = step[:, None] * e
        second = (g(pts + shift) - 2.0 * g(pts) + g(pts - shift)) / step**2
        total += mom.mu_of(v) / 2.0 * second
    shape = np.shape(t) if d == 1 else np.shape(t)[:-1]
    return total.reshape(shape)


def sigma_t2(f_value, k, spec: ClippingSpec, d: Optional[int] = None):
    """Asymptotic variance of ``sqrt(n h2^d) (f_hat - E f_hat)`` at a point with density ``f_value``.

    ``alpha^d f mu0 + f^3 [(alpha^d)']^2 / (d^2 alpha^d) int L^2 + f^2 (alpha^d)' mu0``.
    ``f_value`` may be the true density or a plug-in estimate.
    """
    mom = _moments(k)
    _warn_regularity(mom)
    d = mom.dim if d is None else d
    f = np.asarray(f_value, dtype=float)
    if np.any(~(f > 0)):
        raise DomainError("sigma_t^2 needs a positive density value")
    ad = alpha(spec, f) ** d
    dad = alpha_pow_d_prime(spec, f, d)
    return ad * f * mom.mu0 + f**3 * dad**2 / (d**2 * ad) * mom.r_of_L + f**2 * dad * mom.mu0


def confidence_interval(
    estimate, n: int, h2: float, sigma2, level: float = 0.95, d: int = 1, bias=None
):
    """Normal-approximation interval ``estimate -/+ z sqrt(sigma2 / (n h2^d))``.

    Centered on the estimate by default; pass ``bias`` (e.g. ``B(t) h2^4``) to
    shift the center to ``estimate - bias``.
    """
    if not 0.0 < level < 1.0:
        raise ValueError(f"confidence level must lie in (0, 1), got {level}")
    sigma2 = np.asarray(sigma2, dtype=float)
    if np.any(~(sigma2 > 0)):
        raise DomainError("sigma2 must be positive")
    z = special.ndtri(0.5 * (1.0 + level))
    half = z * np.sqrt(sigma2 / (n * h2**d))
    center = np.asarray(estimate, dtype=float)
    if bias is not None:
        center = center - bias
    return center - half, center + half


# ---------------------------------------------------------------------------
# integrated quantities

_CELL_NODES, _CELL_WEIGHTS = np.polynomial.legendre.leggauss(3)


def region_integrals(model: DensityModel, k, spec: ClippingSpec, region: EvaluationRegion,
                     n_cells: int = 2048):
    """``(int_D B(t)^2 dt, int_D sigma_t^2 dt)`` by 3-point Gauss-Legendre per inside cell."""
    mom = _moments(k)
    if model.dim != 1:
        raise NotImplementedError("region quadrature is implemented for d = 1")
    a, b = region.cells(n_cells)
    if a.size == 0:
        raise DomainError(f"region with r = {region.r} is empty for model {model.name!r}")
    half = 0.5 * (b - a)
    nodes = (0.5 * (a + b))[:, None] + half[:, None] * _CELL_NODES[None, :]
    weights = half[:, None] * _CELL_WEIGHTS[None, :]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", KernelRegularityWarning)
        B = bias_constant(model, mom, nodes)
        s2 = sigma_t2(model.pdf(nodes), mom, spec, 1)
    _warn_regularity(mom)
    return float(np.sum(weights * B**2)), float(np.sum(weights * s2))


def imse(model: DensityModel, k, spec: ClippingSpec, region: EvaluationRegion, h2: float, n: int,
         *, integrals=None):
    """Two-term IMSE ``h2^8 int B^2 + int sigma^2 / (n h2^d)`` over the region."""
    ib2, is2 = integrals if integrals is not None else region_integrals(model, k, spec, region)
    h2 = np.asarray(h2, dtype=float)
    return h2**8 * ib2 + is2 / (n * h2**model.dim)


class OptimalBandwidth(NamedTuple):
    h_paper: float
    h_exact: float

    @property
    def ratio(self) -> float:
        return self.h_exact / self.h_paper


def optimal_bandwidth(model: DensityModel, k, spec: ClippingSpec, region: EvaluationRegion, n: int,
                      *, integrals=None) -> OptimalBandwidth:
    """Main bandwidth minimizing the two-term IMSE.

    ``h_paper = (n int B^2 / int sigma^2)^{-1/(8+d)}`` is the published closed
    form; ``h_exact = (d int sigma^2 / (8 n int B^2))^{1/(8+d)}`` is the actual
    minimizer of ``h^8 int B^2 + int sigma^2 / (n h^d)``. They differ by the
    factor ``(d/8)^{1/(8+d)}``.
    """
    d = model.dim
    ib2, is2 = integrals if integrals is not None else region_integrals(model, k, spec, region)
    if not ib2 > 0:
        raise DomainError("integrated squared bias constant is zero: no interior optimum")
    h_paper = (n * ib2 / is2) ** (-1.0 / (8 + d))
    h_exact = (d * is2 / (8.0 * n * ib2)) ** (1.0 / (8 + d))
    return OptimalBandwidth(float(h_paper), float(h_exact))


# ---------------------------------------------------------------------------
# pilot rate


def rate_diagnostic_U(h1: float, n: int, d: int = 1) -> float:
    """``sqrt(log(1/h1) / (n h1^d)) + h1^2``, the uniform pilot error rate."""
    if not 0.0 < h1 < 1.0:
        raise ValueError(f"U(h1) needs 0 < h1 < 1, got {h1}")
    return math.sqrt(math.log(1.0 / h1) / (n * h1**d)) + h1**2


def rate_ratio(h1: float, h2: float, n: int, d: int = 1, *, warn: bool = True) -> float:
    """``U(h1) / h2^2``; the asymptotic results need this to vanish."""
    ratio = rate_diagnostic_U(h1, n, d) / h2**2
    if warn and ratio >= 1.0:
        warnings.warn(f"U(h1)/h2^2 = {ratio:.3g} >= 1: pilot error is not negligible", stacklevel=2)
    return ratio


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AsymptoticSummary:
    at: object
    bias_constant: float
    ideal_variance_coeff: float
    sigma_t2: float
    kernel: str
    clipping: dict
    model: str


def summarize(model: DensityModel, k, spec: ClippingSpec, t) -> AsymptoticSummary:
    mom = _moments(k)
    f = float(_check_floor(model, t))
    return AsymptoticSummary(
        at=t,
        bias_constant=float(bias_constant(model, mom, t)),
        ideal_variance_coeff=float(ideal_variance_coeffs(model, mom, spec, t, 0)),
        sigma_t2=float(sigma_t2(f, mom, spec, model.dim)),
        kernel=mom.kernel_name,
        clipping={"c": spec.c, "t0": spec.t0, "kind": spec.kind},
        model=model.name,
    )
