"""Bounded search domains and verified covering nets.

The estimator optimizes over a finite net instead of the continuous domain,
so every downstream guarantee leans on the net actually covering. The
construction is a deterministic axis-aligned lattice with spacing
``zeta / sqrt(d)`` anchored at the domain center: inside a box the nearest
lattice point is within zeta outright, and for a ball the lattice is
augmented with boundary projections so the curved rim stays covered. All
kept points are pairwise at least ``zeta / 2`` apart, which is what keeps
the cardinality under the ``ceil((3 * diameter / zeta) ** d)`` budget for
d <= 4.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import CapacityError, ParameterError, ParseError, ShapeError
from .rng import TAG_COVER, stream
from .serialize import csv_text, format_float, parse_float, read_csv_rows, write_text

BOUND_SENTINEL = int(np.iinfo(np.int64).max)
DEFAULT_NET_CAP = 10**7
COVERING_SLACK = 1e-12


@dataclass(frozen=True, eq=False)
class ConstraintSet:
    """Ball or axis-aligned box in R^d."""

    kind: str
    center: np.ndarray
    radius: float | None           # ball only
    halfwidths: np.ndarray | None  # box only

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    def diameter(self) -> float:
        if self.kind == "ball":
            return 2.0 * self.radius
        return 2.0 * float(np.linalg.norm(self.halfwidths))

    def contains(self, w) -> bool:
        """Exact membership; no tolerance is applied."""
        w = np.asarray(w, dtype=float)
        if w.shape != (self.dim,):
            raise ShapeError(f"point shape {w.shape} does not match dimension {self.dim}")
        if self.kind == "ball":
            return float(np.linalg.norm(w - self.center)) <= self.radius
        return bool(np.all(np.abs(w - self.center) <= self.halfwidths))

    def sample_uniform(self, count: int, rng: np.random.Generator) -> np.ndarray:
        if self.kind == "box":
            low = self.center - self.halfwidths
            high = self.center + self.halfwidths
            return rng.uniform(low, high, size=(count, self.dim))
        direction = rng.standard_normal((count, self.dim))
        direction /= np.linalg.norm(direction, axis=1, keepdims=True)
        radii = self.radius * rng.random(count) ** (1.0 / self.dim)
        return self.center + direction * radii[:, None]


def make_set(kind: str, center, radius_or_halfwidths) -> ConstraintSet:
    """Build a validated domain.

    Args:
        kind: "ball" or "box".
        center: length-d center vector.
        radius_or_halfwidths: positive scalar radius for a ball, or a
            length-d vector of positive half-widths for a box.
    """
    if kind not in ("ball", "box"):
        raise ParameterError(f"unknown set kind {kind!r}")
    c = np.atleast_1d(np.asarray(center, dtype=float))
    if c.ndim != 1 or c.shape[0] < 1:
        raise ShapeError("center must be a non-empty 1-d vector")
    if not np.all(np.isfinite(c)):
        raise ParameterError("center must be finite")
    c = c.copy()
    c.setflags(write=False)
    if kind == "ball":
        r = float(np.asarray(radius_or_halfwidths).reshape(()))
        if not (r > 0 and math.isfinite(r)):
            raise ParameterError(f"ball radius must be positive and finite, got {r}")
        return ConstraintSet("ball", c, r, None)
    hw = np.atleast_1d(np.asarray(radius_or_halfwidths, dtype=float))
    if hw.shape != c.shape:
        raise ShapeError(f"halfwidths shape {hw.shape} does not match center {c.shape}")
    if not np.all(np.isfinite(hw)) or np.any(hw <= 0):
        raise ParameterError("box half-widths must be positive and finite")
    hw = hw.copy()
    hw.setflags(write=False)
    return ConstraintSet("box", c, None, hw)


@dataclass(frozen=True, eq=False)
class Net:
    """Finite point set covering ``domain`` to radius ``zeta``."""

    points: np.ndarray
    zeta: float
    domain: ConstraintSet

    @property
    def cardinality(self) -> int:
        return self.points.shape[0]


def cardinality_bound(domain: ConstraintSet, zeta: float) -> int:
    """ceil((3 * diameter / zeta) ** d), saturating at BOUND_SENTINEL."""
    if not (zeta > 0 and math.isfinite(zeta)):
        raise ParameterError(f"zeta must be positive and finite, got {zeta}")
    ratio = 3.0 * domain.diameter() / zeta
    if ratio <= 1.0:
        return 1
    if domain.dim * math.log(ratio) >= math.log(BOUND_SENTINEL):
        return BOUND_SENTINEL
    return int(math.ceil(ratio**domain.dim))


def grid_size_estimate(domain: ConstraintSet, zeta: float) -> int:
    """Lattice cardinality that build_net would enumerate (pre-filtering).

    Exact for boxes. For balls this counts the enclosing box of the
    enumerated lattice, so it over-estimates the final net size; the
    capacity check is deliberately conservative.
    """
    if not (zeta > 0 and math.isfinite(zeta)):
        raise ParameterError(f"zeta must be positive and finite, got {zeta}")
    h = zeta / math.sqrt(domain.dim)
    if domain.kind == "box":
        counts = [2 * int(math.floor(w / h)) + 1 for w in domain.halfwidths]
    else:
        reach = int(math.floor((domain.radius + zeta / 2.0) / h))
        counts = [2 * reach + 1] * domain.dim
    total = 1
    for cnt in counts:
        total *= cnt
        if total > BOUND_SENTINEL:
            return BOUND_SENTINEL
    return total


def _suggest_zeta(domain: ConstraintSet, zeta: float, cap: int) -> float:
    estimate = grid_size_estimate(domain, zeta)
    suggestion = zeta * (estimate / cap) ** (1.0 / domain.dim) * 1.1
    diameter = domain.diameter()
    while suggestion < diameter and grid_size_estimate(domain, suggestion) > cap:
        suggestion *= 1.25
    return min(suggestion, diameter)


def _axis_coords(center_j: float, halfwidth_j: float, h: float) -> np.ndarray:
    k = int(math.floor(halfwidth_j / h))
    coords = center_j + h * np.arange(-k, k + 1)
    # floor() keeps k*h <= halfwidth mathematically; clamp repairs the
    # one-ulp overshoot floating point can introduce at the ends
    return np.clip(coords, center_j - halfwidth_j, center_j + halfwidth_j)


def _cartesian(axes: list[np.ndarray]) -> np.ndarray:
    counts = [a.shape[0] for a in axes]
    total = int(np.prod(counts))
    d = len(axes)
    out = np.empty((total, d))
    repeat = total
    for j, axis in enumerate(axes):
        repeat //= counts[j]
        tile = total // (repeat * counts[j])
        out[:, j] = np.tile(np.repeat(axis, repeat), tile)
    return out


def _pull_inside(center: np.ndarray, offsets: np.ndarray, radius: float) -> np.ndarray:
    # nudge inward until exact membership holds under floating point
    offsets = offsets.copy()
    while True:
        points = center + offsets
        bad = np.linalg.norm(points - center, axis=1) > radius
        if not bad.any():
            return points
        offsets[bad] *= 1.0 - 2.0**-50


def _ball_points(domain: ConstraintSet, zeta: float, h: float) -> np.ndarray:
    center, radius = domain.center, domain.radius
    reach = int(math.floor((radius + zeta / 2.0) / h))
    axis = h * np.arange(-reach, reach + 1)
    lattice = _cartesian([axis] * domain.dim)  # offsets from the center
    norms = np.linalg.norm(lattice, axis=1)
    interior = _pull_inside(center, lattice[norms <= radius], radius)
    shell_mask = (norms > radius) & (norms <= radius + zeta / 2.0)
    shell, shell_norms = lattice[shell_mask], norms[shell_mask]
    if shell.shape[0] == 0:
        return interior
    # Any domain point rounds to a lattice point within zeta/2; if that
    # lattice point fell outside, its radial projection is within zeta/2 of
    # the domain point too (projections onto convex sets are 1-Lipschitz).
    # Keeping a projection only when it is > zeta/2 from everything already
    # kept preserves that two-hop covering at radius zeta while keeping all
    # net points zeta/2-separated.
    projected = _pull_inside(center, shell * (radius / shell_norms[:, None]), radius)
    interior_dist = cKDTree(interior).query(projected, workers=-1)[0]
    candidate_tree = cKDTree(projected)
    suppressed = np.zeros(projected.shape[0], dtype=bool)
    kept: list[int] = []
    for i in range(projected.shape[0]):
        if suppressed[i] or interior_dist[i] <= zeta / 2.0:
            continue
        kept.append(i)
        suppressed[candidate_tree.query_ball_point(projected[i], zeta / 2.0)] = True
    if not kept:
        return interior
    return np.vstack([interior, projected[kept]])


def build_net(domain: ConstraintSet, zeta: float, net_cap: int = DEFAULT_NET_CAP) -> Net:
    """Construct a deterministic zeta-net of the domain.

    Raises:
        ParameterError: zeta outside (0, diameter].
        CapacityError: the lattice would exceed ``net_cap`` points; the
            error names the cap that would admit it and a coarser zeta
            that fits.
    """
    diameter = domain.diameter()
    if not (0 < zeta <= diameter) or not math.isfinite(zeta):
        raise ParameterError(f"zeta must be in (0, diameter={diameter:g}], got {zeta}")
    estimate = grid_size_estimate(domain, zeta)
    if estimate > net_cap:
        raise CapacityError(
            f"net would need about {estimate} points, exceeding the cap {net_cap};"
            f" raise the cap or coarsen zeta",
            required_cap=estimate,
            suggested_zeta=_suggest_zeta(domain, zeta, net_cap),
        )
    h = zeta / math.sqrt(domain.dim)
    if domain.kind == "box":
        axes = [
            _axis_coords(float(c), float(w), h)
            for c, w in zip(domain.center, domain.halfwidths)
        ]
        points = _cartesian(axes)
    else:
        points = _ball_points(domain, zeta, h)
    points.setflags(write=False)
    return Net(points=points, zeta=float(zeta), domain=domain)


@dataclass(frozen=True, eq=False)
class CoverReport:
    passed: bool
    max_distance: float
    witness: np.ndarray | None = None


def covering_check(net: Net, probes: int, rng_seed: int) -> CoverReport:
    """Randomized covering audit: every probe must be within zeta of the net.

    Probes are drawn uniformly from the domain; the distance test allows an
    absolute slack of 1e-12 for floating point. On failure the report
    carries the first worst uncovered point as a witness.
    """
    if net.cardinality < 1:
        raise ParameterError("net must be non-empty")
    if probes < 1:
        raise ParameterError(f"probes must be >= 1, got {probes}")
    rng = stream(rng_seed, TAG_COVER)
    samples = net.domain.sample_uniform(probes, rng)
    tree = cKDTree(net.points)
    dists, _ = tree.query(samples, k=1, workers=-1)
    worst = int(np.argmax(dists))
    max_distance = float(dists[worst])
    if max_distance <= net.zeta + COVERING_SLACK:
        return CoverReport(passed=True, max_distance=max_distance)
    return CoverReport(passed=False, max_distance=max_distance, witness=samples[worst])


def net_header(d: int) -> list[str]:
    return [f"dim{j}" for j in range(d)]


def net_csv_text(net: Net) -> str:
    rows = ([format_float(v) for v in row] for row in net.points)
    return csv_text(net_header(net.points.shape[1]), rows)


def save_net_csv(net: Net, path: str) -> None:
    write_text(path, net_csv_text(net))


def load_net_points(path: str) -> np.ndarray:
    """Read back a net CSV; returns the bare point matrix."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    first = text.splitlines()[0] if text.splitlines() else ""
    d = len(first.split(","))
    rows = [
        [parse_float(tok, path, line_no) for tok in tokens]
        for line_no, tokens in read_csv_rows(text, net_header(d), path=path)
    ]
    if not rows:
        raise ParseError("net file has no points", path=path, line=1)
    return np.array(rows)
