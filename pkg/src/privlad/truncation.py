"""Saturating loss transforms and the truncated empirical risk.

The transform is odd, non-decreasing, and flat at ``log(theta)`` beyond
|x| >= 1, so each record can move the scaled empirical risk by a bounded
amount no matter how wild its residual is. That bound is what the selection
mechanism's privacy accounting consumes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .datasets import Dataset
from .errors import ParameterError, ShapeError

VARIANT_SECOND = "second_moment"
VARIANT_THETA = "theta_moment"

SANDWICH_TOL = 1e-12

# Max residual-matrix elements evaluated at once (memory ceiling ~256 MiB).
_CHUNK_ELEMS = 2**25


@dataclass(frozen=True)
class TruncationSpec:
    """Chosen transform family and scale.

    ``second_moment`` is the theta = 2 member of the same family; both
    variants share one evaluation path and one saturation formula.
    """

    variant: str
    iota: float
    theta: float

    @property
    def saturation(self) -> float:
        return math.log(self.theta)


def make_truncation(variant: str, iota: float, theta: float | None = None) -> TruncationSpec:
    if variant not in (VARIANT_SECOND, VARIANT_THETA):
        raise ParameterError(f"unknown truncation variant {variant!r}")
    if not (iota > 0 and math.isfinite(iota)):
        raise ParameterError(f"iota must be a positive finite real, got {iota}")
    if variant == VARIANT_SECOND:
        if theta is not None and theta != 2.0:
            raise ParameterError("second_moment variant fixes theta = 2")
        return TruncationSpec(variant, float(iota), 2.0)
    if theta is None or not 1.0 < theta < 2.0:
        raise ParameterError(f"theta_moment variant needs theta in (1, 2), got {theta}")
    return TruncationSpec(variant, float(iota), float(theta))


def psi(spec: TruncationSpec, x) -> float | np.ndarray:
    """Evaluate the transform; accepts scalars or arrays.

    For |x| < 1 the value is -log(1 - |x| + |x|^theta / theta) carried by the
    sign of x; beyond that it is the saturation constant. log1p keeps the
    small-x behaviour exact (psi(x) = x + O(x^2)), and |x|^theta is computed
    as exp(theta * log|x|) with the x = 0 case short-circuited.
    """
    arr = np.asarray(x, dtype=float)
    ax = np.abs(arr)
    inner = np.minimum(ax, 1.0)
    if spec.variant == VARIANT_SECOND:
        powered = inner * inner / 2.0
    else:
        safe = np.where(inner > 0.0, inner, 1.0)
        powered = np.where(inner > 0.0, np.exp(spec.theta * np.log(safe)) / spec.theta, 0.0)
    magnitude = np.where(ax >= 1.0, spec.saturation, -np.log1p(powered - inner))
    out = np.sign(arr) * magnitude
    if arr.ndim == 0:
        return float(out)
    return out


def _check_dims(w: np.ndarray, dataset: Dataset) -> None:
    if w.ndim != 1 or w.shape[0] != dataset.d:
        raise ShapeError(f"w has shape {w.shape}, dataset dimension is {dataset.d}")


def truncated_empirical_risk(w, dataset: Dataset, spec: TruncationSpec) -> float:
    """(1 / (n * iota)) * sum_i psi(iota * |y_i - <x_i, w>|).

    Residual magnitudes are non-negative and psi saturates, so the value
    lies in [0, saturation / iota].
    """
    w = np.asarray(w, dtype=float)
    _check_dims(w, dataset)
    resid = dataset.ys - dataset.xs @ w
    total = float(np.sum(psi(spec, spec.iota * np.abs(resid))))
    return total / (dataset.n * spec.iota)


def l1_empirical_risk(w, dataset: Dataset) -> float:
    w = np.asarray(w, dtype=float)
    _check_dims(w, dataset)
    return float(np.mean(np.abs(dataset.ys - dataset.xs @ w)))


def truncated_risk_batch(points, dataset: Dataset, spec: TruncationSpec) -> np.ndarray:
    """Truncated empirical risk at many parameter vectors.

    Evaluation is chunked over candidate rows so the residual matrix never
    exceeds a fixed memory budget; candidates are pure functions of the
    data, so chunking cannot change any value.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != dataset.d:
        raise ShapeError(f"points shape {pts.shape} does not match dimension {dataset.d}")
    m = pts.shape[0]
    out = np.empty(m)
    chunk = max(1, _CHUNK_ELEMS // max(1, dataset.n))
    xs_t = dataset.xs.T
    for lo in range(0, m, chunk):
        block = pts[lo:lo + chunk]
        resid = dataset.ys[None, :] - block @ xs_t
        np.abs(resid, out=resid)
        resid *= spec.iota
        out[lo:lo + chunk] = psi(spec, resid).sum(axis=1)
    out /= dataset.n * spec.iota
    return out


@dataclass(frozen=True)
class SandwichReport:
    passed: bool
    witness: float | None = None


def sandwich_check(spec: TruncationSpec, grid) -> SandwichReport:
    """Verify -log(1 - x + |x|^t/t) <= psi(x) <= log(1 + x + |x|^t/t) on a grid.

    Both bound arguments are provably positive for theta in (1, 2] (the
    lower one bottoms out at 1/theta); that positivity is asserted rather
    than skipped over.
    """
    g = np.asarray(grid, dtype=float)
    if g.size == 0:
        raise ParameterError("sandwich grid must be non-empty")
    g = np.atleast_1d(g)
    powered = np.abs(g) ** spec.theta / spec.theta
    lower_arg = 1.0 - g + powered
    upper_arg = 1.0 + g + powered
    if np.any(lower_arg <= 0.0) or np.any(upper_arg <= 0.0):
        raise ParameterError("sandwich bound argument is non-positive; theta out of range")
    lower = -np.log(lower_arg)
    upper = np.log(upper_arg)
    values = psi(spec, g)
    bad = (values < lower - SANDWICH_TOL) | (values > upper + SANDWICH_TOL)
    if np.any(bad):
        return SandwichReport(passed=False, witness=float(g[np.argmax(bad)]))
    return SandwichReport(passed=True)
