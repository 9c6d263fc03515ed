"""Request and response models for the service and the config file format.

A run config is one JSON document with four sections: the data-generating
model, the constraint set, the estimator knobs, and the experiment grid
(plus an optional audit section). The root seed is part of the config on
purpose: no run may ever draw entropy from the clock.
"""

from __future__ import annotations

from typing import Literal, Union

from pydantic import BaseModel, ConfigDict, Field

from ..geometry import DEFAULT_NET_CAP

MAX_SEED = 2**64 - 1


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class DesignSpec(_Strict):
    kind: Literal["gaussian", "student_t", "symmetric_pareto"]
    nu: float | None = None
    alpha: float | None = None
    scale: float = 1.0


class NoiseSpec(_Strict):
    kind: Literal["gaussian", "student_t"]
    sigma: float = 1.0
    nu: float | None = None


class ModelSpec(_Strict):
    design: DesignSpec
    noise: NoiseSpec
    w_star: list[float] = Field(min_length=1)


class SetSpec(_Strict):
    kind: Literal["ball", "box"]
    center: list[float] = Field(min_length=1)
    radius: float | None = None
    halfwidths: list[float] | None = None


class EstimatorSpec(_Strict):
    assumption: Literal["l2_second", "coord_second", "l2_theta", "coord_theta"]
    tau: Union[float, Literal["auto"]] = "auto"
    theta: float | None = None
    eta: float = 0.1
    iota: float | None = None  # explicit override; otherwise resolved by rule
    zeta: float | None = None  # explicit override; otherwise resolved by rule
    net_cap: int = DEFAULT_NET_CAP
    iota_scale: float = 1.0
    zeta_scale: float = 1.0
    tau_mc_samples: int = 10**7  # only used when tau="auto" falls back to MC


class ExperimentSpec(_Strict):
    n: int | None = None          # synth / fit dataset size
    n_grid: list[int] | None = None
    epsilons: list[float] = Field(min_length=1)
    trials: int = 30
    mc_samples: int = 10**6
    oracle: Literal["auto", "analytic", "mc"] = "auto"
    threads: int = 1


class AuditSpec(_Strict):
    epsilon: float
    pairs: int = 200
    n: int = 10
    iota: float | None = None       # pin the truncation level instead of resolving it
    sensitivity_scale: float = 1.0  # test hook: deliberately mis-set the sensitivity
    adversarial: bool = False       # worst-case pair instead of model draws


class RunConfig(_Strict):
    seed: int = Field(ge=0, le=MAX_SEED)
    model: ModelSpec
    set: SetSpec
    estimator: EstimatorSpec
    experiment: ExperimentSpec
    audit: AuditSpec | None = None


class SynthRequest(_Strict):
    config: RunConfig
    n: int | None = None  # overrides experiment.n


class SynthResponse(_Strict):
    csv: str
    n: int
    d: int


class FitRequest(_Strict):
    config: RunConfig
    dataset_csv: str


class AuditRequest(_Strict):
    config: RunConfig


class SweepRequest(_Strict):
    config: RunConfig


class SweepResponse(_Strict):
    rows_csv: str
    summary: dict


class NetRequest(_Strict):
    config: RunConfig


class NetResponse(_Strict):
    csv: str
    cardinality: int
    zeta: float
    bound: int
