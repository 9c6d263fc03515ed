"""Risk evaluation, concentration probes, and the scaling experiment.

Population L1 risk is evaluated three ways: exact closed form for the
all-Gaussian model, plain Monte Carlo, and a common-random-numbers scheme
that reuses one frozen draw set across every candidate so that excess-risk
differences are not drowned by fresh sampling noise. The probes check the
finite-sample deviation bounds of the truncated risk pointwise over a net,
and ``run_scaling`` drives the full n-by-epsilon experiment grid.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .datasets import Dataset, PopulationModel, draw_design, draw_noise, synth
from .errors import CapacityError, ParameterError, UnsupportedModelError
from .estimator import ResolvedParameters, choose_parameters, dp_l1_fit
from .geometry import DEFAULT_NET_CAP, ConstraintSet, Net, build_net
from .rng import TAG_EVAL, TAG_PROBE, TAG_SWEEP, TAG_SYNTH, derive_seed, stream, validate_seed
from .serialize import csv_text, format_float
from .truncation import VARIANT_SECOND, VARIANT_THETA, TruncationSpec, psi, truncated_risk_batch

MIN_MC_SAMPLES = 10**3

_STABILITY_CHUNK = 2**25


def _delta(model: PopulationModel, w) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if w.shape != (model.d,):
        raise ParameterError(f"w has shape {w.shape}, expected ({model.d},)")
    return w - model.w_star


def population_risk_mc(
    model: PopulationModel, w, mc_samples: int, rng: np.random.Generator
) -> tuple[float, float]:
    """Monte Carlo estimate of E|y - <x, w>| with its standard error."""
    if mc_samples < MIN_MC_SAMPLES:
        raise ParameterError(f"mc_samples must be >= {MIN_MC_SAMPLES}, got {mc_samples}")
    delta = _delta(model, w)
    xs = draw_design(model.design, (mc_samples, model.d), rng)
    values = np.abs(draw_noise(model.noise, mc_samples, rng) - xs @ delta)
    return float(values.mean()), float(values.std(ddof=1) / math.sqrt(mc_samples))


def _require_all_gaussian(model: PopulationModel) -> None:
    if model.design.kind != "gaussian" or model.noise.kind != "gaussian":
        raise UnsupportedModelError(
            "closed-form risk needs gaussian design and gaussian noise,"
            f" got {model.design.kind}/{model.noise.kind}"
        )


def analytic_population_risk(model: PopulationModel, w) -> float:
    """Exact E|y - <x, w>| for the all-Gaussian model.

    The residual is N(0, ||w - w*||^2 + sigma^2), whose absolute first
    moment is sqrt(2/pi) times its standard deviation.
    """
    _require_all_gaussian(model)
    delta = _delta(model, w)
    spread = math.sqrt(float(delta @ delta) + model.noise.sigma**2)
    return math.sqrt(2.0 / math.pi) * spread


def analytic_excess_risk(model: PopulationModel, w) -> float:
    return analytic_population_risk(model, w) - analytic_population_risk(model, model.w_star)


@dataclass(frozen=True, eq=False)
class EvalDraws:
    """Frozen draws shared across candidates for paired risk differences."""

    xs: np.ndarray
    noise: np.ndarray
    base_abs: float


def make_eval_draws(model: PopulationModel, mc_samples: int, rng: np.random.Generator) -> EvalDraws:
    if mc_samples < MIN_MC_SAMPLES:
        raise ParameterError(f"mc_samples must be >= {MIN_MC_SAMPLES}, got {mc_samples}")
    xs = draw_design(model.design, (mc_samples, model.d), rng)
    noise = draw_noise(model.noise, mc_samples, rng)
    xs.setflags(write=False)
    noise.setflags(write=False)
    return EvalDraws(xs=xs, noise=noise, base_abs=float(np.abs(noise).mean()))


def excess_risk_crn(draws: EvalDraws, model: PopulationModel, w) -> float:
    """Paired excess-risk estimate: both terms reuse the same draws."""
    delta = _delta(model, w)
    return float(np.abs(draws.noise - draws.xs @ delta).mean()) - draws.base_abs


PROBE_KINDS = ("lower_second", "upper_second", "lower_theta", "upper_theta", "stability_theta")


@dataclass(frozen=True)
class ProbeReport:
    kind: str
    trials: int
    violations: int
    frequency: float
    eta: float

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "trials": self.trials,
            "violations": self.violations,
            "frequency": self.frequency,
            "eta": self.eta,
        }


def _gaussian_moment_factor(theta: float) -> float:
    # E|Z|^theta for standard normal Z
    return 2.0 ** (theta / 2.0) * math.gamma((theta + 1.0) / 2.0) / math.sqrt(math.pi)


def _gaussian_norm_moment(d: int, theta: float) -> float:
    # E ||x||_2^theta for x ~ N(0, I_d); theta=1 gives the plain expected norm
    return 2.0 ** (theta / 2.0) * math.gamma((d + theta) / 2.0) / math.gamma(d / 2.0)


def _stability_statistic(net: Net, dataset: Dataset, trunc: TruncationSpec) -> np.ndarray:
    # -(1/(n iota)) sum_i psi(iota(|r_i(w)| - zeta ||x_i||)) for every net w
    iota = trunc.iota
    norms = np.linalg.norm(dataset.xs, axis=1)
    out = np.empty(net.cardinality)
    rows = max(1, _STABILITY_CHUNK // max(dataset.n, 1))
    for start in range(0, net.cardinality, rows):
        stop = min(start + rows, net.cardinality)
        resid = dataset.ys[None, :] - net.points[start:stop] @ dataset.xs.T
        np.abs(resid, out=resid)
        resid -= net.zeta * norms[None, :]
        resid *= iota
        out[start:stop] = -psi(trunc, resid).mean(axis=1) / iota
    return out


def concentration_probe(
    kind: str,
    model: PopulationModel,
    net: Net,
    trunc: TruncationSpec,
    *,
    n: int,
    trials: int,
    eta: float,
    seed: int,
) -> ProbeReport:
    """Empirical check of a finite-sample deviation bound over a net.

    Each trial draws a fresh size-n dataset and tests whether any net point
    breaks its bound at confidence 1 - eta (the eta is shared across the
    net by a union budget of log(net_size / eta) / (n * iota)). The
    reported violation frequency should stay near or below eta.

    Closed-form population moments are only available for the all-Gaussian
    model; anything else raises UnsupportedModelError.
    """
    if kind not in PROBE_KINDS:
        raise ParameterError(f"unknown probe kind {kind!r}; expected one of {PROBE_KINDS}")
    if trials < 1:
        raise ParameterError(f"trials must be >= 1, got {trials}")
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}")
    if not (0.0 < eta < 1.0):
        raise ParameterError(f"eta must be in (0, 1), got {eta}")
    _require_all_gaussian(model)
    seed = validate_seed(seed)
    second = kind.endswith("_second")
    if second and trunc.variant != VARIANT_SECOND:
        raise ParameterError(f"{kind} probes need a {VARIANT_SECOND} truncation")
    if not second and trunc.variant != VARIANT_THETA:
        raise ParameterError(f"{kind} probes need a {VARIANT_THETA} truncation")

    iota, theta = trunc.iota, trunc.theta
    deltas = net.points - model.w_star[None, :]
    spread_sq = np.einsum("ij,ij->i", deltas, deltas) + model.noise.sigma**2
    spread = np.sqrt(spread_sq)
    risk_pop = math.sqrt(2.0 / math.pi) * spread
    moment = spread_sq if second else spread**theta * _gaussian_moment_factor(theta)
    budget = math.log(net.cardinality / eta) / (n * iota)

    if kind == "stability_theta":
        norm_mean = _gaussian_norm_moment(model.d, 1.0)
        norm_moment = _gaussian_norm_moment(model.d, theta)
        threshold = (
            -risk_pop
            + net.zeta * norm_mean
            + (2.0 * iota) ** (theta - 1.0) / theta * (moment + net.zeta**theta * norm_moment)
            + budget
        )
    else:
        margin = iota ** (theta - 1.0) / theta * moment + budget
        lower_bound = risk_pop - margin
        upper_bound = risk_pop + margin

    violations = 0
    for t in range(trials):
        data = synth(model, n, stream(seed, TAG_PROBE, t))
        if kind == "stability_theta":
            stat = _stability_statistic(net, data, trunc)
            violated = bool(np.any(stat > threshold))
        else:
            risks = truncated_risk_batch(net.points, data, trunc)
            if kind.startswith("lower"):
                violated = bool(np.any(risks < lower_bound))
            else:
                violated = bool(np.any(risks > upper_bound))
        violations += violated
    return ProbeReport(
        kind=kind,
        trials=trials,
        violations=violations,
        frequency=violations / trials,
        eta=eta,
    )


SWEEP_COLUMNS = (
    "n",
    "d",
    "epsilon",
    "theta",
    "assumption",
    "trial",
    "seed",
    "excess_risk",
    "net_size",
    "iota",
    "zeta",
    "wall_time_ms",
)

ORACLE_MODES = ("auto", "analytic", "mc")

_INT_COLUMNS = frozenset({"n", "d", "trial", "seed", "net_size"})


def sweep_rows_csv(rows: list[dict]) -> str:
    """Render sweep rows with the frozen column order and float format."""

    def fmt(col: str, value) -> str:
        if col in _INT_COLUMNS:
            return str(int(value))
        if col == "assumption":
            return str(value)
        return format_float(float(value))

    body = ([fmt(col, row[col]) for col in SWEEP_COLUMNS] for row in rows)
    return csv_text(list(SWEEP_COLUMNS), body)


@dataclass(frozen=True, eq=False)
class SweepResult:
    rows: list[dict]
    summary: dict


def _fit_slope(ns: list[int], medians: list[float]) -> float:
    return float(np.polyfit(np.log(np.asarray(ns, dtype=float)), np.log(medians), 1)[0])


def run_scaling(
    model: PopulationModel,
    domain: ConstraintSet,
    *,
    assumption: str,
    tau: float,
    n_grid: list[int],
    epsilons: list[float],
    trials: int,
    root_seed: int,
    theta: float | None = None,
    eta: float = 0.1,
    oracle: str = "auto",
    mc_samples: int = 10**6,
    net_cap: int = DEFAULT_NET_CAP,
    iota_scale: float = 1.0,
    zeta_scale: float = 1.0,
    threads: int = 1,
) -> SweepResult:
    """Excess risk of the private fit across an (n, epsilon) grid.

    Every trial is reproducible from the seed recorded in its row: the
    trial seed is derived from the root seed and the cell coordinates, and
    both the dataset draw and the mechanism draw descend from it. Risk is
    evaluated with the analytic oracle when the model admits one (or when
    forced), otherwise with a single shared CRN draw set; results are
    therefore independent of the thread count.

    Cells whose net would exceed ``net_cap`` even after the capacity
    fallback are skipped and recorded in the summary rather than failing
    the whole sweep.
    """
    root_seed = validate_seed(root_seed)
    if not n_grid:
        raise ParameterError("n_grid must be non-empty")
    if sorted(set(n_grid)) != list(n_grid):
        raise ParameterError("n_grid must be strictly increasing")
    if any(n < 2 for n in n_grid):
        raise ParameterError("n_grid entries must be >= 2")
    if not epsilons or any(e <= 0 for e in epsilons):
        raise ParameterError("epsilons must be non-empty and positive")
    if trials < 1:
        raise ParameterError(f"trials must be >= 1, got {trials}")
    if threads < 1:
        raise ParameterError(f"threads must be >= 1, got {threads}")
    if oracle not in ORACLE_MODES:
        raise ParameterError(f"oracle must be one of {ORACLE_MODES}, got {oracle!r}")
    if model.d != domain.dim:
        raise ParameterError(f"model dimension {model.d} does not match domain {domain.dim}")

    analytic = model.design.kind == "gaussian" and model.noise.kind == "gaussian"
    if oracle == "analytic" and not analytic:
        raise UnsupportedModelError("analytic oracle requires gaussian design and noise")
    use_analytic = analytic if oracle == "auto" else oracle == "analytic"
    draws = None
    if not use_analytic:
        draws = make_eval_draws(model, mc_samples, stream(root_seed, TAG_EVAL))
    crn_cache: dict[bytes, float] = {}

    def evaluate(w: np.ndarray) -> float:
        if use_analytic:
            return analytic_excess_risk(model, w)
        key = w.tobytes()
        if key not in crn_cache:
            crn_cache[key] = excess_risk_crn(draws, model, w)
        return crn_cache[key]

    prepared: dict[int, tuple[ResolvedParameters, Net]] = {}
    skipped: list[dict] = []
    grid: list[tuple[int, int, float]] = []
    for ni, n in enumerate(n_grid):
        for ei, eps in enumerate(epsilons):
            cell_idx = ni * len(epsilons) + ei
            grid.append((cell_idx, n, eps))
            try:
                params = choose_parameters(
                    assumption,
                    n=n,
                    d=model.d,
                    epsilon=eps,
                    eta=eta,
                    tau=tau,
                    domain=domain,
                    theta=theta,
                    net_cap=net_cap,
                    iota_scale=iota_scale,
                    zeta_scale=zeta_scale,
                )
                prepared[cell_idx] = (params, build_net(domain, params.zeta, net_cap=net_cap))
            except CapacityError as exc:
                skipped.append({"n": n, "epsilon": eps, "reason": str(exc)})

    def run_trial(task: tuple[int, int, float, int]) -> dict:
        cell_idx, n, eps, trial = task
        params, net = prepared[cell_idx]
        trial_seed = derive_seed(root_seed, TAG_SWEEP, cell_idx, trial)
        data = synth(model, n, stream(trial_seed, TAG_SYNTH))
        started = time.perf_counter()
        fit = dp_l1_fit(
            data,
            domain,
            eps,
            assumption=assumption,
            tau=tau,
            seed=trial_seed,
            params=params,
            net=net,
        )
        wall_ms = (time.perf_counter() - started) * 1000.0
        return {
            "n": n,
            "d": model.d,
            "epsilon": eps,
            "theta": params.theta,
            "assumption": assumption,
            "trial": trial,
            "seed": trial_seed,
            "excess_risk": evaluate(fit.w_hat),
            "net_size": fit.net_size,
            "iota": params.iota,
            "zeta": params.zeta,
            "wall_time_ms": wall_ms,
        }

    tasks = [
        (cell_idx, n, eps, trial)
        for cell_idx, n, eps in grid
        if cell_idx in prepared
        for trial in range(trials)
    ]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        rows = list(pool.map(run_trial, tasks))

    cells = []
    for cell_idx, n, eps in grid:
        if cell_idx not in prepared:
            continue
        params, net = prepared[cell_idx]
        excess = [r["excess_risk"] for r in rows if r["n"] == n and r["epsilon"] == eps]
        cells.append(
            {
                "n": n,
                "epsilon": eps,
                "trials": len(excess),
                "median_excess": float(np.median(excess)),
                "net_size": net.cardinality,
                "iota": params.iota,
                "zeta": params.zeta,
                "zeta_rule": params.zeta_rule,
            }
        )

    slopes: dict[str, float] = {}
    for eps in epsilons:
        usable = [c for c in cells if c["epsilon"] == eps and c["median_excess"] > 0]
        if len(usable) >= 3:
            slopes[format_float(eps)] = _fit_slope(
                [c["n"] for c in usable], [c["median_excess"] for c in usable]
            )
    summary = {
        "assumption": assumption,
        "theta": next(iter(prepared.values()))[0].theta if prepared else theta,
        "eta": eta,
        "tau": tau,
        "oracle": "analytic" if use_analytic else "mc",
        "n_grid": [int(n) for n in n_grid],
        "epsilons": [float(e) for e in epsilons],
        "trials": trials,
        "cells": cells,
        "slopes": slopes,
        "skipped": skipped,
    }
    return SweepResult(rows=rows, summary=summary)
