"""Differentially private L1 regression for heavy-tailed data.

The pipeline: truncate the absolute-deviation loss so one record can only
move it a bounded amount, grid the constraint set with a verified covering
net, and select the estimate with the exponential mechanism. Privacy is
checked by exact output-distribution audits, and the statistical side by
concentration probes and excess-risk scaling experiments.
"""

from .datasets import (
    Dataset,
    Design,
    Noise,
    PopulationModel,
    certified_tau,
    coordinate_moment,
    empirical_moment,
    l2_moment_mc,
    load_csv,
    make_dataset,
    make_design,
    make_model,
    make_noise,
    save_csv,
    synth,
)
from .errors import (
    CapacityError,
    MomentError,
    ParameterError,
    ParseError,
    ShapeError,
    UnsupportedModelError,
)
from .estimator import (
    ASSUMPTIONS,
    EstimateResult,
    ResolvedParameters,
    choose_parameters,
    dp_l1_fit,
    nonprivate_net_minimizer,
    truncation_for,
)
from .evaluation import (
    PROBE_KINDS,
    SWEEP_COLUMNS,
    ProbeReport,
    SweepResult,
    analytic_excess_risk,
    analytic_population_risk,
    concentration_probe,
    excess_risk_crn,
    make_eval_draws,
    population_risk_mc,
    run_scaling,
)
from .geometry import (
    DEFAULT_NET_CAP,
    ConstraintSet,
    CoverReport,
    Net,
    build_net,
    cardinality_bound,
    covering_check,
    make_set,
)
from .mechanism import (
    AuditReport,
    MechanismSpec,
    dp_audit,
    exact_output_distribution,
    log_output_distribution,
    make_mechanism,
    record_swap_pairs,
    sample,
    sample_many,
    score_sensitivity,
)
from .truncation import (
    TruncationSpec,
    l1_empirical_risk,
    make_truncation,
    psi,
    sandwich_check,
    truncated_empirical_risk,
    truncated_risk_batch,
)

__version__ = "0.1.0"

__all__ = [
    "ASSUMPTIONS",
    "AuditReport",
    "CapacityError",
    "ConstraintSet",
    "CoverReport",
    "DEFAULT_NET_CAP",
    "Dataset",
    "Design",
    "EstimateResult",
    "MechanismSpec",
    "MomentError",
    "Net",
    "Noise",
    "PROBE_KINDS",
    "ParameterError",
    "ParseError",
    "PopulationModel",
    "ProbeReport",
    "ResolvedParameters",
    "SWEEP_COLUMNS",
    "ShapeError",
    "SweepResult",
    "TruncationSpec",
    "UnsupportedModelError",
    "analytic_excess_risk",
    "analytic_population_risk",
    "build_net",
    "cardinality_bound",
    "certified_tau",
    "choose_parameters",
    "concentration_probe",
    "coordinate_moment",
    "covering_check",
    "dp_audit",
    "dp_l1_fit",
    "empirical_moment",
    "exact_output_distribution",
    "excess_risk_crn",
    "l1_empirical_risk",
    "l2_moment_mc",
    "load_csv",
    "log_output_distribution",
    "make_dataset",
    "make_design",
    "make_eval_draws",
    "make_mechanism",
    "make_model",
    "make_noise",
    "make_set",
    "make_truncation",
    "nonprivate_net_minimizer",
    "population_risk_mc",
    "psi",
    "record_swap_pairs",
    "run_scaling",
    "sample",
    "sample_many",
    "sandwich_check",
    "save_csv",
    "score_sensitivity",
    "synth",
    "truncated_empirical_risk",
    "truncated_risk_batch",
    "truncation_for",
    "__version__",
]
