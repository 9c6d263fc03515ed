"""Private least-absolute-deviation fitting over a covering net.

The estimator grids the constraint set, scores every net point by the
truncated empirical risk, and selects one with the exponential mechanism.
Truncation level and net resolution are resolved from the moment assumption
by ``choose_parameters``; all asymptotic constants are taken at 1 and
exposed as explicit multipliers so experiments can vary them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .datasets import Dataset
from .errors import ParameterError
from .geometry import DEFAULT_NET_CAP, ConstraintSet, Net, build_net, grid_size_estimate
from .mechanism import make_mechanism, sample, score_sensitivity
from .rng import TAG_MECHANISM, stream, validate_seed
from .truncation import (
    VARIANT_SECOND,
    VARIANT_THETA,
    TruncationSpec,
    make_truncation,
    truncated_risk_batch,
)

ASSUMPTIONS = ("l2_second", "coord_second", "l2_theta", "coord_theta")

ZETA_RULE_RESOLUTION = "resolution"
ZETA_RULE_CAPACITY = "capacity"


@dataclass(frozen=True)
class ResolvedParameters:
    """Concrete truncation level and net resolution for one fit."""

    assumption: str
    n: int
    d: int
    epsilon: float
    eta: float
    tau: float
    theta: float
    iota: float
    zeta: float
    zeta_rule: str
    rate: float

    def to_dict(self) -> dict:
        return {
            "assumption": self.assumption,
            "n": self.n,
            "d": self.d,
            "epsilon": self.epsilon,
            "eta": self.eta,
            "tau": self.tau,
            "theta": self.theta,
            "iota": self.iota,
            "zeta": self.zeta,
            "zeta_rule": self.zeta_rule,
            "rate": self.rate,
        }


def _validate_assumption(assumption: str, theta: float | None) -> float:
    if assumption not in ASSUMPTIONS:
        raise ParameterError(f"unknown assumption {assumption!r}; expected one of {ASSUMPTIONS}")
    if assumption.endswith("_second"):
        if theta is not None and theta != 2.0:
            raise ParameterError("second-moment assumptions fix theta at 2")
        return 2.0
    if theta is None or not (1.0 < theta < 2.0):
        raise ParameterError(f"theta-moment assumptions need theta in (1, 2), got {theta}")
    return float(theta)


def choose_parameters(
    assumption: str,
    *,
    n: int,
    d: int,
    epsilon: float,
    eta: float,
    tau: float,
    domain: ConstraintSet,
    theta: float | None = None,
    net_cap: int = DEFAULT_NET_CAP,
    iota_scale: float = 1.0,
    zeta_scale: float = 1.0,
) -> ResolvedParameters:
    """Resolve truncation level and net resolution from first principles.

    With ``base = ln(n) * ln(1/eta) / (n * epsilon)`` the truncation level is

        l2_second:    sqrt(d * base) / tau
        coord_second: sqrt(base) / tau
        l2_theta:     (d * base) ** (1/theta) / tau
        coord_theta:  base ** ((theta-1)/theta) / tau

    and ``rate`` is the matching excess-risk scale with constants at 1.
    The net resolution defaults to ``min(diameter/2, 1/n)``; when that grid
    would blow the capacity budget the rule falls back to
    ``min(diameter/2, rate)``, and ``zeta_rule`` records which one fired.
    """
    theta = _validate_assumption(assumption, theta)
    if n < 2:
        raise ParameterError(f"n must be >= 2 to resolve parameters, got {n}")
    if d < 1:
        raise ParameterError(f"d must be >= 1, got {d}")
    if not (0.0 < eta < 1.0):
        raise ParameterError(f"eta must be in (0, 1), got {eta}")
    if not (epsilon > 0 and math.isfinite(epsilon)):
        raise ParameterError(f"epsilon must be positive and finite, got {epsilon}")
    if not (tau > 0 and math.isfinite(tau)):
        raise ParameterError(f"tau must be positive and finite, got {tau}")
    if iota_scale <= 0 or zeta_scale <= 0:
        raise ParameterError("scale multipliers must be positive")
    if domain.dim != d:
        raise ParameterError(f"domain dimension {domain.dim} does not match d={d}")

    base = math.log(n) * math.log(1.0 / eta) / (n * epsilon)
    if assumption == "l2_second":
        iota = math.sqrt(d * base) / tau
    elif assumption == "coord_second":
        iota = math.sqrt(base) / tau
    elif assumption == "l2_theta":
        iota = (d * base) ** (1.0 / theta) / tau
    else:
        iota = base ** ((theta - 1.0) / theta) / tau
    iota *= iota_scale
    if assumption.endswith("_second"):
        rate = math.sqrt(d * base)
    else:
        rate = (d * base) ** ((theta - 1.0) / theta)

    diameter = domain.diameter()
    zeta = min(diameter / 2.0, 1.0 / n) * zeta_scale
    zeta = min(zeta, diameter)
    rule = ZETA_RULE_RESOLUTION
    if grid_size_estimate(domain, zeta) > net_cap:
        zeta = min(min(diameter / 2.0, rate) * zeta_scale, diameter)
        rule = ZETA_RULE_CAPACITY
    return ResolvedParameters(
        assumption=assumption,
        n=n,
        d=d,
        epsilon=float(epsilon),
        eta=float(eta),
        tau=float(tau),
        theta=theta,
        iota=float(iota),
        zeta=float(zeta),
        zeta_rule=rule,
        rate=float(rate),
    )


def truncation_for(params: ResolvedParameters) -> TruncationSpec:
    if params.assumption.endswith("_second"):
        return make_truncation(VARIANT_SECOND, params.iota)
    return make_truncation(VARIANT_THETA, params.iota, theta=params.theta)


@dataclass(frozen=True, eq=False)
class EstimateResult:
    """Outcome of one private fit; ``w_hat`` is an exact net row."""

    w_hat: np.ndarray
    chosen_index: int
    chosen_risk: float
    net_size: int
    seed: int
    sensitivity: float
    params: ResolvedParameters

    def to_dict(self) -> dict:
        return {
            "w_hat": [float(v) for v in self.w_hat],
            "chosen_index": self.chosen_index,
            "chosen_risk": self.chosen_risk,
            "net_size": self.net_size,
            "seed": self.seed,
            "sensitivity": self.sensitivity,
            "params": self.params.to_dict(),
        }


def nonprivate_net_minimizer(net: Net, dataset: Dataset, trunc: TruncationSpec) -> tuple[int, np.ndarray, float]:
    """Exact net minimizer of the truncated risk; ties go to the lowest index."""
    risks = truncated_risk_batch(net.points, dataset, trunc)
    idx = int(np.argmin(risks))
    return idx, net.points[idx], float(risks[idx])


def dp_l1_fit(
    dataset: Dataset,
    domain: ConstraintSet,
    epsilon: float,
    *,
    assumption: str,
    tau: float,
    seed: int,
    theta: float | None = None,
    eta: float = 0.1,
    net_cap: int = DEFAULT_NET_CAP,
    iota_scale: float = 1.0,
    zeta_scale: float = 1.0,
    params: ResolvedParameters | None = None,
    net: Net | None = None,
) -> EstimateResult:
    """Differentially private L1 fit over a covering net of the domain.

    Resolves parameters (unless ``params`` is supplied), builds the net
    (unless ``net`` is supplied, which must match ``params.zeta``), scores
    every net point by truncated risk, and draws the estimate with the
    exponential mechanism. The draw is reproducible from ``seed`` alone.

    Raises:
        CapacityError: the net at the resolved zeta exceeds ``net_cap``;
            the error carries a coarser zeta that fits.
    """
    seed = validate_seed(seed)
    if dataset.d != domain.dim:
        raise ParameterError(f"dataset dimension {dataset.d} does not match domain {domain.dim}")
    if params is not None:
        if params.epsilon != epsilon:
            raise ParameterError("params were resolved for a different epsilon")
        if params.n != max(dataset.n, 2) or params.d != dataset.d:
            raise ParameterError("params were resolved for a different dataset shape")
    if params is None:
        # single-record datasets borrow the n=2 schedule: the formulas
        # degenerate at ln(1) = 0
        params = choose_parameters(
            assumption,
            n=max(dataset.n, 2),
            d=dataset.d,
            epsilon=epsilon,
            eta=eta,
            tau=tau,
            domain=domain,
            theta=theta,
            net_cap=net_cap,
            iota_scale=iota_scale,
            zeta_scale=zeta_scale,
        )
    if net is None:
        net = build_net(domain, params.zeta, net_cap=net_cap)
    elif net.zeta != params.zeta:
        raise ParameterError("supplied net was built at a different zeta than params")
    trunc = truncation_for(params)
    risks = truncated_risk_batch(net.points, dataset, trunc)
    sensitivity = score_sensitivity(dataset.n, trunc)
    mech = make_mechanism(-risks, epsilon, sensitivity)
    idx = sample(mech, stream(seed, TAG_MECHANISM))
    return EstimateResult(
        w_hat=net.points[idx],
        chosen_index=idx,
        chosen_risk=float(risks[idx]),
        net_size=net.cardinality,
        seed=seed,
        sensitivity=sensitivity,
        params=params,
    )
