"""Turn a validated run config into core objects and run the commands.

Everything the service endpoints do lives here as plain functions so the
library surface stays usable without HTTP.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from ..datasets import (
    Dataset,
    PopulationModel,
    certified_tau,
    check_moment_exists,
    make_dataset,
    make_design,
    make_model,
    make_noise,
    synth,
)
from ..errors import ParameterError
from ..estimator import (
    EstimateResult,
    ResolvedParameters,
    choose_parameters,
    dp_l1_fit,
)
from ..evaluation import SweepResult, run_scaling
from ..geometry import ConstraintSet, Net, build_net, cardinality_bound, make_set
from ..mechanism import AuditReport, dp_audit, make_mechanism, score_sensitivity
from ..rng import TAG_AUDIT, TAG_SYNTH, stream
from ..truncation import VARIANT_SECOND, VARIANT_THETA, make_truncation, truncated_risk_batch
from .schemas import AuditSpec, RunConfig

ZETA_RULE_EXPLICIT = "explicit"


def build_model(cfg: RunConfig) -> PopulationModel:
    design = make_design(
        cfg.model.design.kind,
        nu=cfg.model.design.nu,
        alpha=cfg.model.design.alpha,
        scale=cfg.model.design.scale,
    )
    noise = make_noise(cfg.model.noise.kind, sigma=cfg.model.noise.sigma, nu=cfg.model.noise.nu)
    return make_model(design, noise, cfg.model.w_star)


def build_domain(cfg: RunConfig) -> ConstraintSet:
    spec = cfg.set
    if spec.kind == "ball":
        if spec.radius is None:
            raise ParameterError("ball sets require a radius")
        return make_set("ball", spec.center, spec.radius)
    if spec.halfwidths is None:
        raise ParameterError("box sets require halfwidths")
    return make_set("box", spec.center, spec.halfwidths)


def build_context(cfg: RunConfig) -> tuple[PopulationModel, ConstraintSet]:
    model = build_model(cfg)
    domain = build_domain(cfg)
    if model.d != domain.dim:
        raise ParameterError(
            f"w_star dimension {model.d} does not match the constraint set dimension {domain.dim}"
        )
    if not domain.contains(model.w_star):
        raise ParameterError("w_star must lie inside the constraint set")
    return model, domain


def resolve_tau(cfg: RunConfig, model: PopulationModel) -> float:
    est = cfg.estimator
    if est.tau != "auto":
        return float(est.tau)
    mode = "coordinate" if est.assumption.startswith("coord") else "l2"
    theta = 2.0 if est.assumption.endswith("_second") else est.theta
    if theta is None:
        raise ParameterError("theta-moment assumptions need estimator.theta to certify tau")
    return certified_tau(model, theta, mode, mc_samples=est.tau_mc_samples, seed=cfg.seed)


def _resolved_params(cfg: RunConfig, domain: ConstraintSet, n: int, epsilon: float,
                     tau: float) -> ResolvedParameters:
    est = cfg.estimator
    params = choose_parameters(
        est.assumption,
        n=max(n, 2),
        d=domain.dim,
        epsilon=epsilon,
        eta=est.eta,
        tau=tau,
        domain=domain,
        theta=est.theta,
        net_cap=est.net_cap,
        iota_scale=est.iota_scale,
        zeta_scale=est.zeta_scale,
    )
    if est.iota is not None:
        # validated when the truncation is built, so iota=0 still fails loudly
        params = dataclasses.replace(params, iota=float(est.iota))
    if est.zeta is not None:
        params = dataclasses.replace(params, zeta=float(est.zeta), zeta_rule=ZETA_RULE_EXPLICIT)
    return params


def run_synth(cfg: RunConfig, n_override: int | None = None) -> Dataset:
    model, _ = build_context(cfg)
    if cfg.estimator.tau == "auto":
        # refuse configs whose estimator assumption cannot hold for this
        # design (the certification moment would be infinite)
        theta = 2.0 if cfg.estimator.assumption.endswith("_second") else cfg.estimator.theta
        if theta is not None:
            check_moment_exists(model.design, theta)
    n = n_override if n_override is not None else cfg.experiment.n
    if n is None:
        raise ParameterError("synthesis needs experiment.n or an explicit n")
    return synth(model, n, stream(cfg.seed, TAG_SYNTH))


def run_fit(cfg: RunConfig, dataset: Dataset) -> EstimateResult:
    model, domain = build_context(cfg)
    if dataset.d != domain.dim:
        raise ParameterError(
            f"dataset dimension {dataset.d} does not match the constraint set {domain.dim}"
        )
    epsilon = float(cfg.experiment.epsilons[0])
    tau = resolve_tau(cfg, model)
    params = _resolved_params(cfg, domain, dataset.n, epsilon, tau)
    return dp_l1_fit(
        dataset,
        domain,
        epsilon,
        assumption=cfg.estimator.assumption,
        tau=tau,
        seed=cfg.seed,
        theta=cfg.estimator.theta,
        eta=cfg.estimator.eta,
        net_cap=cfg.estimator.net_cap,
        params=params,
    )


def run_net(cfg: RunConfig) -> tuple[Net, int]:
    _, domain = build_context(cfg)
    zeta = cfg.estimator.zeta
    if zeta is None:
        raise ParameterError("net construction needs an explicit estimator.zeta")
    net = build_net(domain, float(zeta), net_cap=cfg.estimator.net_cap)
    return net, cardinality_bound(domain, float(zeta))


def adversarial_pair() -> tuple[Dataset, Dataset]:
    """One-dimensional worst-case neighboring pair for the privacy audit.

    Nine records sit just inside the loss's linear range and the swapped
    record flips its label across the origin, moving the risk of every
    candidate near the boundary by close to the full per-record budget.
    """
    xs = np.ones((10, 1))
    ys = np.array([0.9] * 9 + [1.0])
    ys_swapped = ys.copy()
    ys_swapped[9] = -1.0
    return make_dataset(xs, ys), make_dataset(xs, ys_swapped)


def _audit_pairs(model: PopulationModel, audit: AuditSpec, seed: int) -> list[tuple[Dataset, Dataset]]:
    if audit.adversarial:
        if model.d != 1:
            raise ParameterError("the adversarial audit pair is one-dimensional")
        return [adversarial_pair()]
    if audit.pairs < 1:
        raise ParameterError(f"audit.pairs must be >= 1, got {audit.pairs}")
    if audit.n < 1:
        raise ParameterError(f"audit.n must be >= 1, got {audit.n}")
    pairs = []
    for k in range(audit.pairs):
        base = synth(model, audit.n, stream(seed, TAG_AUDIT, k, 0))
        repl = synth(model, 1, stream(seed, TAG_AUDIT, k, 1))
        xs = base.xs.copy()
        ys = base.ys.copy()
        xs[k % audit.n] = repl.xs[0]
        ys[k % audit.n] = repl.ys[0]
        pairs.append((base, make_dataset(xs, ys)))
    return pairs


def run_audit(cfg: RunConfig) -> AuditReport:
    """Exact output-distribution audit of the configured mechanism.

    The mechanism under audit is rebuilt per dataset exactly as ``run_fit``
    would: same net, same truncation, same sensitivity, except that
    ``audit.iota`` can pin the truncation level and
    ``audit.sensitivity_scale`` can deliberately mis-set the sensitivity to
    demonstrate what the audit catches.
    """
    model, domain = build_context(cfg)
    audit = cfg.audit
    if audit is None:
        raise ParameterError("config has no audit section")
    if audit.sensitivity_scale <= 0:
        raise ParameterError("audit.sensitivity_scale must be positive")
    epsilon = float(audit.epsilon)
    n = 10 if audit.adversarial else audit.n
    tau = resolve_tau(cfg, model)
    params = _resolved_params(cfg, domain, n, epsilon, tau)
    net = build_net(domain, params.zeta, net_cap=cfg.estimator.net_cap)
    iota = float(audit.iota) if audit.iota is not None else params.iota
    if cfg.estimator.assumption.endswith("_second"):
        trunc = make_truncation(VARIANT_SECOND, iota)
    else:
        trunc = make_truncation(VARIANT_THETA, iota, theta=cfg.estimator.theta)
    sensitivity = audit.sensitivity_scale * score_sensitivity(n, trunc)

    def builder(dataset: Dataset):
        risks = truncated_risk_batch(net.points, dataset, trunc)
        return make_mechanism(-risks, epsilon, sensitivity)

    return dp_audit(_audit_pairs(model, audit, cfg.seed), builder, epsilon)


def run_sweep(cfg: RunConfig) -> SweepResult:
    model, domain = build_context(cfg)
    exp = cfg.experiment
    if not exp.n_grid:
        raise ParameterError("sweeps need a non-empty experiment.n_grid")
    if cfg.estimator.iota is not None or cfg.estimator.zeta is not None:
        # a single pinned value cannot follow the n grid; only the scale
        # multipliers make sense across sweep cells
        raise ParameterError(
            "estimator.iota and estimator.zeta overrides apply to fit and audit, "
            "not sweep; use iota_scale / zeta_scale"
        )
    tau = resolve_tau(cfg, model)
    return run_scaling(
        model,
        domain,
        assumption=cfg.estimator.assumption,
        tau=tau,
        n_grid=list(exp.n_grid),
        epsilons=[float(e) for e in exp.epsilons],
        trials=exp.trials,
        root_seed=cfg.seed,
        theta=cfg.estimator.theta,
        eta=cfg.estimator.eta,
        oracle=exp.oracle,
        mc_samples=exp.mc_samples,
        net_cap=cfg.estimator.net_cap,
        iota_scale=cfg.estimator.iota_scale,
        zeta_scale=cfg.estimator.zeta_scale,
        threads=exp.threads,
    )
