"""Exponential mechanism over a finite candidate set, with an exact audit.

Selection probabilities are proportional to ``exp(epsilon * u / (2 * Delta))``
where ``u`` is the utility and ``Delta`` bounds how much any single record
can move any candidate's utility. Everything here is computed from exact
(log-domain, max-shifted) weights, so privacy can be audited by direct
comparison of output distributions rather than by sampling.
"""

from __future__ import annotations

from dataclasses import dataclass

import math

import numpy as np
from scipy.special import logsumexp

from .datasets import Dataset, make_dataset
from .errors import ParameterError, ShapeError
from .truncation import TruncationSpec

# above this many candidates the exact CDF is not materialized and draws
# fall back to the Gumbel-max trick on unnormalized log weights
EXACT_SAMPLING_LIMIT = 10**6

_GUMBEL_CHUNK = 2**22


@dataclass(frozen=True, eq=False)
class MechanismSpec:
    """A fully resolved selection problem: utilities, budget, sensitivity."""

    utilities: np.ndarray
    epsilon: float
    sensitivity: float

    @property
    def size(self) -> int:
        return self.utilities.shape[0]


def make_mechanism(utilities, epsilon: float, sensitivity: float) -> MechanismSpec:
    u = np.asarray(utilities, dtype=float)
    if u.ndim != 1 or u.shape[0] < 1:
        raise ShapeError("utilities must be a non-empty 1-d vector")
    if not np.all(np.isfinite(u)):
        raise ParameterError("utilities must be finite")
    if not (epsilon > 0 and math.isfinite(epsilon)):
        raise ParameterError(f"epsilon must be positive and finite, got {epsilon}")
    if not (sensitivity > 0 and math.isfinite(sensitivity)):
        raise ParameterError(f"sensitivity must be positive and finite, got {sensitivity}")
    u = u.copy()
    u.setflags(write=False)
    return MechanismSpec(utilities=u, epsilon=float(epsilon), sensitivity=float(sensitivity))


def score_sensitivity(n: int, trunc: TruncationSpec) -> float:
    """Utility sensitivity of the truncated risk under one record swap.

    Each sample contributes a value in [0, saturation] to n * iota * risk,
    so swapping one record moves the risk by at most saturation / (n * iota).
    The factor 2 below keeps the classical two-sided bound; the audit will
    therefore observe log ratios no larger than epsilon / 2.
    """
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}")
    return 2.0 * trunc.saturation / (n * trunc.iota)


def log_output_distribution(spec: MechanismSpec) -> np.ndarray:
    """Exact log selection probabilities (max-shifted before normalizing)."""
    scaled = (spec.epsilon / (2.0 * spec.sensitivity)) * spec.utilities
    shifted = scaled - np.max(scaled)
    return shifted - logsumexp(shifted)


def exact_output_distribution(spec: MechanismSpec) -> np.ndarray:
    probs = np.exp(log_output_distribution(spec))
    return probs / probs.sum()


def sample(spec: MechanismSpec, rng: np.random.Generator) -> int:
    """Draw one candidate index."""
    return int(sample_many(spec, 1, rng)[0])


def sample_many(spec: MechanismSpec, count: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``count`` candidate indices.

    Small candidate sets use inverse-CDF on the exact distribution; larger
    ones use Gumbel-max on the unnormalized log weights, which never
    materializes the normalizing constant.
    """
    if count < 1:
        raise ParameterError(f"count must be >= 1, got {count}")
    if spec.size <= EXACT_SAMPLING_LIMIT:
        cdf = np.cumsum(exact_output_distribution(spec))
        idx = np.searchsorted(cdf, rng.random(count), side="right")
        return np.minimum(idx, spec.size - 1)
    scaled = (spec.epsilon / (2.0 * spec.sensitivity)) * spec.utilities
    out = np.empty(count, dtype=np.int64)
    per_chunk = max(1, _GUMBEL_CHUNK // spec.size)
    for start in range(0, count, per_chunk):
        stop = min(start + per_chunk, count)
        noisy = scaled + rng.gumbel(size=(stop - start, spec.size))
        out[start:stop] = np.argmax(noisy, axis=1)
    return out


def differing_records(a: Dataset, b: Dataset) -> int:
    """Number of positions where the two datasets disagree."""
    if a.n != b.n or a.d != b.d:
        raise ShapeError("datasets must have identical shape to be compared")
    same = np.all(a.xs == b.xs, axis=1) & (a.ys == b.ys)
    return int(np.sum(~same))


def record_swap_pairs(base: Dataset, replacements) -> list[tuple[Dataset, Dataset]]:
    """Neighboring-pair universe built by swapping single records.

    The k-th replacement ``(x_row, y)`` overwrites record ``k % n`` of the
    base dataset, yielding one neighboring pair per replacement.
    """
    pairs = []
    for k, (x_row, y) in enumerate(replacements):
        xs = base.xs.copy()
        ys = base.ys.copy()
        xs[k % base.n] = np.asarray(x_row, dtype=float)
        ys[k % base.n] = float(y)
        pairs.append((base, make_dataset(xs, ys)))
    return pairs


@dataclass(frozen=True, eq=False)
class AuditReport:
    """Exact privacy audit outcome over a universe of neighboring pairs."""

    epsilon: float
    per_pair_max: np.ndarray
    max_log_ratio: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "pairs": int(self.per_pair_max.shape[0]),
            "per_pair_max_log_ratio": [float(v) for v in self.per_pair_max],
            "max_log_ratio": self.max_log_ratio,
            "passed": self.passed,
        }


def dp_audit(pairs, spec_builder, epsilon: float, allow_identical: bool = False) -> AuditReport:
    """Exact epsilon-DP check by direct output-distribution comparison.

    For every dataset pair the full selection distribution is computed via
    ``spec_builder(dataset) -> MechanismSpec`` and the audit records
    ``max_r |ln p_D(r) - ln p_D'(r)|``. Pairs must differ in exactly one
    record; identical pairs (a null check, ratio 0) require
    ``allow_identical=True``.
    """
    if not pairs:
        raise ParameterError("audit requires at least one dataset pair")
    per_pair = np.empty(len(pairs))
    for i, (left, right) in enumerate(pairs):
        diff = differing_records(left, right)
        if diff == 0 and not allow_identical:
            raise ParameterError(f"pair {i} is identical; pass allow_identical=True to audit it")
        if diff > 1:
            raise ParameterError(f"pair {i} differs in {diff} records; neighbors differ in one")
        spec_left = spec_builder(left)
        spec_right = spec_builder(right)
        if spec_left.size != spec_right.size:
            raise ShapeError(f"pair {i} produced mismatched candidate sets")
        log_left = log_output_distribution(spec_left)
        log_right = log_output_distribution(spec_right)
        per_pair[i] = float(np.max(np.abs(log_left - log_right)))
    max_ratio = float(np.max(per_pair))
    per_pair.setflags(write=False)
    return AuditReport(
        epsilon=float(epsilon),
        per_pair_max=per_pair,
        max_log_ratio=max_ratio,
        passed=bool(max_ratio <= epsilon + 1e-9),
    )
