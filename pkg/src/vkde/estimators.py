"""Fixed and variable bandwidth kernel density estimators.

Every estimator here has the form

    f(t) = 1 / (n h^d) * sum_i a_i^d K(a_i (t - X_i) / h)

for a per-observation scale ``a_i`` (1 for the classical estimator, ``alpha(f(X_i))``
for the ideal estimator, ``alpha(f_pilot(X_i))`` for the plug-in estimator, and so on).
Only observations with ``|t - X_i| <= h R / a_i`` contribute, which the one
dimensional path exploits: observations are grouped by that radius and each
group is sorted, so the contributing range for a block of evaluation points is
found by binary search.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .clipping import ClippingSpec, alpha
from .densities import DensityModel
from .errors import DataError
from .kernels import Kernel, compute_moments

__all__ = [
    "Sample",
    "BandwidthPair",
    "DensityEstimate",
    "ESTIMATOR_KINDS",
    "as_sample",
    "classical_kde",
    "ideal_vkde",
    "plugin_vkde",
    "abramson",
    "hall_marron",
    "hhm",
    "fast_eval_window",
    "pilot_at_sample",
    "default_grid",
    "silverman_bandwidth",
    "auto_bandwidths",
]

ESTIMATOR_KINDS = ("classical", "ideal-vkde", "plugin-vkde", "abramson", "hall-marron", "hhm")

# max elements in one (evaluation points x observations) block
_BLOCK = 1 << 18
# relative padding on window radii so rounding never drops a contributing term
_PAD = 1e-9


@dataclass(frozen=True)
class Sample:
    """Observations in canonical (sorted) order.

    ``data`` has shape ``(n, d)`` and is sorted lexicographically, first
    coordinate first, so every estimate is independent of the input order.
    ``sorted_index`` maps sorted rows back to input rows.
    """

    data: np.ndarray
    sorted_index: np.ndarray

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def dim(self) -> int:
        return self.data.shape[1]

    @property
    def x(self) -> np.ndarray:
        """First coordinate as a 1-D array (the whole sample when ``d = 1``)."""
        return self.data[:, 0]

    def points(self):
        """Observations shaped for ``pdf``/kernel calls: ``(n,)`` or ``(n, d)``."""
        return self.x if self.dim == 1 else self.data

    @classmethod
    def from_array(cls, values, dim: Optional[int] = None) -> "Sample":
        arr = np.asarray(values, dtype=float)
        if arr.ndim == 0:
            arr = arr.reshape(1, 1)
        elif arr.ndim == 1:
            arr = arr.reshape(-1, 1) if dim in (None, 1) else arr.reshape(-1, dim)
        elif arr.ndim != 2:
            raise DataError(f"sample must be 1-D or 2-D, got shape {arr.shape}")
        if dim is not None and arr.shape[1] != dim:
            raise DataError(f"expected {dim} columns, got {arr.shape[1]}")
        if arr.shape[0] == 0:
            raise DataError("empty sample")
        if not np.all(np.isfinite(arr)):
            raise DataError("sample contains non-finite values")
        order = np.lexsort(arr.T[::-1])
        data = np.ascontiguousarray(arr[order])
        data.setflags(write=False)
        return cls(data=data, sorted_index=order)


def as_sample(values) -> Sample:
    return values if isinstance(values, Sample) else Sample.from_array(values)


@dataclass(frozen=True)
class BandwidthPair:
    h1: float
    h2: float

    def __post_init__(self):
        if not (self.h1 > 0 and self.h2 > 0):
            raise ValueError(f"bandwidths must be positive, got h1={self.h1}, h2={self.h2}")


@dataclass
class DensityEstimate:
    grid: np.ndarray
    values: np.ndarray
    kind: str
    bandwidths: dict
    kernel: str
    n: int
    meta: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# summation engine


def fast_eval_window(sorted_x, t, radius):
    """Index range ``[lo, hi)`` of sorted observations with ``|t - x| <= radius``.

    ``t`` and ``radius`` may be arrays (broadcast together).
    """
    sorted_x = np.asarray(sorted_x, dtype=float)
    t = np.asarray(t, dtype=float)
    lo = np.searchsorted(sorted_x, t - radius, side="left")
    hi = np.searchsorted(sorted_x, t + radius, side="right")
    return lo, hi


def _block_terms(kernel, diff, a, d, h, cutoff):
    u2 = diff * diff if diff.ndim == 2 else np.einsum("...i,...i->...", diff, diff)
    vals = kernel.from_sq(u2 * (a / h) ** 2) * a**d
    if cutoff is not None:
        dist = np.abs(diff) if diff.ndim == 2 else np.sqrt(np.einsum("...i,...i->...", diff, diff))
        vals = vals * (dist < cutoff)
    return vals


def _brute_sum(kernel, data, scale, h, pts, floor, cutoff):
    n, d = data.shape
    out = np.zeros(pts.shape[0])
    step = max(1, _BLOCK // max(n, 1))
    for j0 in range(0, pts.shape[0], step):
        j1 = min(j0 + step, pts.shape[0])
        if d == 1:
            diff = pts[j0:j1, :1] - data[None, :, 0]
        else:
            diff = pts[j0:j1, None, :] - data[None, :, :]
        a = np.broadcast_to(scale[None, :], (j1 - j0, n))
        if floor is not None:
            a = np.maximum(a, floor[j0:j1, None])
        out[j0:j1] = _block_terms(kernel, diff, a, d, h, cutoff).sum(axis=1)
    return out


def _radius_groups(radius):
    """Group observation indices by ``ceil(log2(radius / min radius))``."""
    rmin = radius.min()
    keys = np.ceil(np.log2(radius / rmin)).astype(np.int64)
    for key in np.unique(keys):
        idx = np.flatnonzero(keys == key)
        yield idx, radius[idx].max()


def _window_sum(kernel, x, scale, h, t, floor, cutoff):
    R = kernel.support_radius
    order = np.argsort(t, kind="stable")
    ts = t[order]
    fl = None if floor is None else floor[order]
    m = ts.size
    out = np.zeros(m)
    for idx, rmax in _radius_groups(h * R / scale):
        xb, ab = x[idx], scale[idx]
        rb = rmax * (1.0 + _PAD)
        j0, chunk = 0, 64
        while j0 < m:
            j1 = min(j0 + chunk, m)
            r = rb
            if fl is not None:
                fmin = fl[j0:j1].min()
                if fmin > 0:
                    r = min(r, h * R / fmin * (1.0 + _PAD))
            if cutoff is not None:
                r = min(r, cutoff * (1.0 + _PAD))
            lo, hi = fast_eval_window(xb, (ts[j0], ts[j1 - 1]), r)
            lo, hi = int(lo[0]), int(hi[1])
            width = hi - lo
            if chunk > 1 and (j1 - j0) * width > _BLOCK:
                chunk //= 2
                continue
            if width > 0:
                diff = ts[j0:j1, None] - xb[None, lo:hi]
                a = np.broadcast_to(ab[None, lo:hi], diff.shape)
                if fl is not None:
                    a = np.maximum(a, fl[j0:j1, None])
                out[j0:j1] += _block_terms(kernel, diff, a, 1, h, cutoff).sum(axis=1)
            if 2 * chunk * max(width, 1) < _BLOCK // 2:
                chunk = min(chunk * 2, 4096)
            j0 = j1
    result = np.empty(m)
    result[order] = out
    return result


def _variable_sum(kernel, sample, scale, h, pts, *, floor=None, cutoff=None, method="window"):
    """``sum_i a_i^d K(a_i (t - X_i) / h)`` at every row of ``pts`` (shape ``(m, d)``).

    Observations with ``a_i == 0`` contribute nothing and are skipped.
    ``floor`` holds per-evaluation-point lower bounds on ``a`` (Abramson's
    clipping); ``cutoff`` restricts the sum to ``|t - X_i| < cutoff``.
    """
    if method not in ("window", "brute"):
        raise ValueError(f"unknown summation method {method!r}")
    scale = np.asarray(scale, dtype=float)
    live = scale > 0
    data = sample.data
    if not live.all():
        data, scale = data[live], scale[live]
    if data.shape[0] == 0 or (cutoff is not None and cutoff <= 0):
        return np.zeros(pts.shape[0])
    if method == "brute" or sample.dim > 1:
        return _brute_sum(kernel, data, scale, h, pts, floor, cutoff)
    return _window_sum(kernel, data[:, 0], scale, h, pts[:, 0], floor, cutoff)


# ---------------------------------------------------------------------------
# helpers


def _check(sample: Sample, kernel: Kernel, *hs):
    if sample.n < 1:
        raise DataError("empty sample")
    if kernel.dim != sample.dim:
        raise ValueError(f"kernel dim {kernel.dim} does not match sample dim {sample.dim}")
    for h in hs:
        if not h > 0:
            raise ValueError(f"bandwidth must be positive, got {h}")


def _grid_points(grid, d):
    g = np.asarray(grid, dtype=float)
    if d == 1:
        return g.reshape(-1, 1)
    if g.ndim == 1 and g.size == d:
        g = g.reshape(1, d)
    if g.shape[-1] != d:
        raise ValueError(f"grid points must have {d} coordinates, got shape {g.shape}")
    return g.reshape(-1, d)


def _grid_for_pdf(pts, d):
    return pts[:, 0] if d == 1 else pts


def default_grid(sample, kernel: Kernel, h: float, c: float = 1.0, m: int = 512):
    """``m`` equispaced points over ``[min X - h R / c, max X + h R / c]`` (``d = 1``)."""
    sample = as_sample(sample)
    if sample.dim != 1:
        raise NotImplementedError("default grids are only built for d = 1")
    pad = h * kernel.support_radius / c
    return np.linspace(sample.x[0] - pad, sample.x[-1] + pad, int(m))


def _finish(sample, h, pts, grid, sums, kind, bandwidths, kernel, meta=None):
    d = sample.dim
    values = sums / (sample.n * h**d)
    g = np.asarray(grid, dtype=float)
    if d == 1:
        values = values.reshape(g.shape)
    return DensityEstimate(
        grid=g,
        values=values,
        kind=kind,
        bandwidths=bandwidths,
        kernel=kernel.name,
        n=sample.n,
        meta=meta or {},
    )


def _prepare(sample, kernel, h, grid, c=1.0):
    sample = as_sample(sample)
    _check(sample, kernel, h)
    if grid is None:
        grid = default_grid(sample, kernel, h, c)
    return sample, grid, _grid_points(grid, sample.dim)


# ---------------------------------------------------------------------------
# estimators


def classical_kde(sample, kernel: Kernel, h: float, grid=None, *, method: str = "window"):
    """Fixed bandwidth estimate ``1/(n h^d) sum K((t - X_i)/h)``."""
    sample, grid, pts = _prepare(sample, kernel, h, grid)
    sums = _variable_sum(kernel, sample, np.ones(sample.n), h, pts, method=method)
    return _finish(sample, h, pts, grid, sums, "classical", {"h": h}, kernel)


def ideal_vkde(
    sample,
    kernel: Kernel,
    h: float,
    spec: ClippingSpec,
    model: DensityModel,
    grid=None,
    *,
    method: str = "window",
):
    """Clipped square-root-law estimator using the true density at the observations."""
    sample, grid, pts = _prepare(sample, kernel, h, grid, spec.c)
    scale = alpha(spec, model.pdf(sample.points()))
    sums = _variable_sum(kernel, sample, scale, h, pts, method=method)
    return _finish(
        sample, h, pts, grid, sums, "ideal-vkde", {"h": h}, kernel, {"c": spec.c, "t0": spec.t0}
    )


def pilot_at_sample(
    sample, kernel: Kernel, h1: float, *, leave_one_out: bool = False, index=None, method="window"
):
    """Classical estimate with bandwidth ``h1`` at the (sorted) observations.

    ``index`` restricts evaluation to a subset of sorted positions. By default
    each observation contributes ``K(0) / (n h1^d)`` to its own value; with
    ``leave_one_out`` that term is removed and the sum renormalized by ``n - 1``.
    """
    sample = as_sample(sample)
    _check(sample, kernel, h1)
    pts = sample.data if index is None else sample.data[index]
    n, d = sample.n, sample.dim
    sums = _variable_sum(kernel, sample, np.ones(n), h1, pts, method=method)
    if leave_one_out:
        if n < 2:
            raise DataError("leave-one-out pilot needs at least two observations")
        k0 = float(kernel.from_sq(0.0))
        return np.maximum(sums - k0, 0.0) / ((n - 1) * h1**d)
    return sums / (n * h1**d)


def plugin_vkde(
    sample,
    kernel: Kernel,
    bw: BandwidthPair,
    spec: ClippingSpec,
    grid=None,
    *,
    leave_one_out: bool = False,
    method: str = "window",
):
    """Two-bandwidth plug-in estimator.

    A classical pilot with bandwidth ``h1`` is evaluated at the observations and
    plugged into ``alpha``; the main pass uses bandwidth ``h2``. Because
    ``alpha >= c``, an observation farther than ``h2 R / c`` from every
    evaluation point cannot contribute, so the pilot is only computed for the
    observations inside that reach.
    """
    sample, grid, pts = _prepare(sample, kernel, bw.h2, grid, spec.c)
    _check(sample, kernel, bw.h1)
    reach = bw.h2 * kernel.support_radius / spec.c * (1.0 + _PAD)
    if sample.dim == 1 and method == "window":
        lo = int(np.searchsorted(sample.x, pts[:, 0].min() - reach, side="left"))
        hi = int(np.searchsorted(sample.x, pts[:, 0].max() + reach, side="right"))
        index = np.arange(lo, hi)
    else:
        index = np.arange(sample.n)
    pilot = pilot_at_sample(
        sample, kernel, bw.h1, leave_one_out=leave_one_out, index=index, method=method
    )
    scale = np.zeros(sample.n)
    scale[index] = alpha(spec, pilot)
    sums = _variable_sum(kernel, sample, scale, bw.h2, pts, method=method)
    return _finish(
        sample,
        bw.h2,
        pts,
        grid,
        sums,
        "plugin-vkde",
        {"h1": bw.h1, "h2": bw.h2},
        kernel,
        {"c": spec.c, "t0": spec.t0, "leave_one_out": leave_one_out},
    )


def hall_marron(sample, kernel: Kernel, h: float, model: DensityModel, grid=None, *, method="window"):
    """Unclipped square-root law: scale ``f(X_i)^{1/2}``."""
    sample, grid, pts = _prepare(sample, kernel, h, grid)
    scale = np.sqrt(model.pdf(sample.points()))
    sums = _variable_sum(kernel, sample, scale, h, pts, method=method)
    return _finish(sample, h, pts, grid, sums, "hall-marron", {"h": h}, kernel)


def abramson(sample, kernel: Kernel, h: float, model: DensityModel, grid=None, *, method="window"):
    """Scale ``max(f(X_i), f(t)/10)^{1/2}``, which depends on the evaluation point."""
    sample, grid, pts = _prepare(sample, kernel, h, grid)
    scale = np.sqrt(model.pdf(sample.points()))
    floor = np.sqrt(model.pdf(_grid_for_pdf(pts, sample.dim)) / 10.0)
    # an observation with f(X_i) = 0 still contributes through the floor
    scale = np.where(scale > 0, scale, np.finfo(float).tiny)
    sums = _variable_sum(kernel, sample, scale, h, pts, floor=floor, method=method)
    return _finish(sample, h, pts, grid, sums, "abramson", {"h": h}, kernel)


def hhm(
    sample,
    kernel: Kernel,
    h: float,
    model: DensityModel,
    grid=None,
    B: float = 1.0,
    *,
    method: str = "window",
):
    """Square-root law with a hard window ``|t - X_i| < h B`` (one dimension only).

    ``B = math.inf`` removes the window.
    """
    sample, grid, pts = _prepare(sample, kernel, h, grid)
    if sample.dim != 1:
        raise NotImplementedError("the windowed square-root estimator is defined for d = 1 only")
    if B < 0:
        raise ValueError("B must be nonnegative")
    scale = np.sqrt(model.pdf(sample.x))
    cutoff = None if math.isinf(B) else h * B
    sums = _variable_sum(kernel, sample, scale, h, pts, cutoff=cutoff, method=method)
    return _finish(sample, h, pts, grid, sums, "hhm", {"h": h, "B": B}, kernel)


# ---------------------------------------------------------------------------
# bandwidth rules

_GAUSS_CANONICAL = (1.0 / (2.0 * math.sqrt(math.pi))) ** 0.2


def silverman_bandwidth(sample, kernel: Kernel) -> float:
    """Silverman's rule of thumb rescaled to ``kernel`` by canonical bandwidths.

    ``0.9 min(sd, IQR/1.34) n^{-1/5}`` is the Gaussian-kernel rule; multiplying by
    ``delta_K / delta_Gauss`` with ``delta_K = (int K^2 / tau_2^2)^{1/5}`` gives the
    equivalent amount of smoothing for ``kernel``.
    """
    sample = as_sample(sample)
    if sample.dim != 1:
        raise NotImplementedError("Silverman's rule is implemented for d = 1")
    x = sample.x
    n = x.size
    if n < 2:
        raise DataError("need at least two observations for a bandwidth rule")
    sd = float(np.std(x, ddof=1))
    q75, q25 = np.quantile(x, [0.75, 0.25])
    spread = min(sd, (q75 - q25) / 1.34) if q75 > q25 else sd
    mom = compute_moments(kernel)
    delta = (mom.mu0 / mom.tau2**2) ** 0.2
    return 0.9 * spread * n ** -0.2 * delta / _GAUSS_CANONICAL


def auto_bandwidths(n: int, d: int = 1) -> BandwidthPair:
    """Rates ``h1 = n^{-1/(4+d)}`` and ``h2 = n^{-1/(8+d)}`` (``n^{-1/5}``, ``n^{-1/9}`` for ``d = 1``)."""
    return BandwidthPair(h1=n ** (-1.0 / (4 + d)), h2=n ** (-1.0 / (8 + d)))
