import math

import numpy as np
import pytest

import privlad as pl
from privlad.errors import ParameterError, UnsupportedModelError
from privlad.evaluation import SWEEP_COLUMNS, sweep_rows_csv
from privlad.rng import TAG_SWEEP, derive_seed, stream


def _gaussian_model(w_star, sigma=1.0):
    return pl.make_model(
        pl.make_design("gaussian"), pl.make_noise("gaussian", sigma=sigma), w_star
    )


def test_analytic_risk_closed_form():
    model = _gaussian_model([0.3])
    assert pl.analytic_population_risk(model, [0.3]) == 0.7978845608028654
    assert pl.analytic_population_risk(model, [1.3]) == 1.1283791670955128
    assert pl.analytic_excess_risk(model, [1.3]) == 1.1283791670955128 - 0.7978845608028654
    assert pl.analytic_excess_risk(model, model.w_star) == 0.0


def test_analytic_risk_rejects_heavy_tails():
    heavy = pl.make_model(
        pl.make_design("student_t", nu=2.5), pl.make_noise("gaussian", sigma=1.0), [0.0]
    )
    with pytest.raises(UnsupportedModelError):
        pl.analytic_population_risk(heavy, [0.0])
    with pytest.raises(ParameterError):
        pl.analytic_population_risk(_gaussian_model([0.0]), [0.0, 1.0])


def test_mc_risk_agrees_with_analytic():
    model = _gaussian_model([0.25, -0.4], sigma=0.8)
    w = [0.6, 0.1]
    mean, se = pl.population_risk_mc(model, w, 10**5, stream(903))
    assert abs(mean - pl.analytic_population_risk(model, w)) <= 4.0 * se
    with pytest.raises(ParameterError):
        pl.population_risk_mc(model, w, 10, stream(903))


def test_crn_excess_zero_at_optimum_and_tracks_analytic():
    model = _gaussian_model([0.25, -0.4])
    draws = pl.make_eval_draws(model, 10**5, stream(901))
    assert pl.excess_risk_crn(draws, model, model.w_star) == 0.0
    for w in stream(902).uniform(-1.0, 1.0, size=(20, 2)):
        diff = abs(pl.excess_risk_crn(draws, model, w) - pl.analytic_excess_risk(model, w))
        assert diff < 0.01
    with pytest.raises(ParameterError):
        pl.make_eval_draws(model, 10, stream(901))


def test_concentration_probe_validation():
    model = _gaussian_model([0.0])
    net = pl.build_net(pl.make_set("box", [0.0], [1.0]), 0.5)
    second = pl.make_truncation("second_moment", 0.1)
    theta = pl.make_truncation("theta_moment", 0.1, theta=1.5)
    common = dict(n=50, trials=5, eta=0.1, seed=1)
    with pytest.raises(ParameterError):
        pl.concentration_probe("sideways", model, net, second, **common)
    with pytest.raises(ParameterError):
        pl.concentration_probe("upper_second", model, net, theta, **common)
    with pytest.raises(ParameterError):
        pl.concentration_probe("lower_theta", model, net, second, **common)
    heavy = pl.make_model(
        pl.make_design("student_t", nu=2.5), pl.make_noise("gaussian", sigma=1.0), [0.0]
    )
    with pytest.raises(UnsupportedModelError):
        pl.concentration_probe("upper_second", heavy, net, second, **common)
    with pytest.raises(ParameterError):
        pl.concentration_probe("upper_second", model, net, second, n=50, trials=0, eta=0.1, seed=1)


def test_concentration_probe_small_run_holds():
    # generous budget at this n: the bound should never trip
    model = _gaussian_model([0.2])
    net = pl.build_net(pl.make_set("box", [0.0], [1.0]), 0.5)
    trunc = pl.make_truncation("second_moment", 0.1)
    report = pl.concentration_probe(
        "upper_second", model, net, trunc, n=50, trials=40, eta=0.1, seed=5
    )
    assert report.kind == "upper_second"
    assert report.trials == 40
    assert report.violations == 0
    assert report.frequency == 0.0
    assert report.to_dict()["eta"] == 0.1


def test_run_scaling_rows_and_summary():
    model = _gaussian_model([0.2])
    domain = pl.make_set("box", [0.0], [1.0])
    result = pl.run_scaling(
        model, domain, assumption="coord_second", tau=1.0,
        n_grid=[16, 32, 64], epsilons=[1.0, 4.0], trials=3,
        root_seed=77, oracle="analytic",
    )
    assert len(result.rows) == 3 * 2 * 3
    keys = [(r["n"], r["epsilon"], r["trial"]) for r in result.rows]
    assert keys == sorted(keys)
    first = result.rows[0]
    assert first["seed"] == derive_seed(77, TAG_SWEEP, 0, 0)
    assert first["assumption"] == "coord_second"
    summary = result.summary
    assert summary["oracle"] == "analytic"
    assert summary["skipped"] == []
    assert len(summary["cells"]) == 6
    assert set(summary["slopes"]) == {"1", "4"}
    for cell in summary["cells"]:
        assert cell["zeta_rule"] == "resolution"
        assert cell["trials"] == 3

    text = sweep_rows_csv(result.rows)
    lines = text.splitlines()
    assert lines[0] == ",".join(SWEEP_COLUMNS)
    assert len(lines) == 1 + len(result.rows)
    # integer columns serialize without a decimal point
    assert lines[1].split(",")[0] == "16"
    assert lines[1].split(",")[5] == "0"


def test_run_scaling_thread_count_is_invisible():
    model = _gaussian_model([0.2])
    domain = pl.make_set("box", [0.0], [1.0])
    kwargs = dict(
        assumption="coord_second", tau=1.0, n_grid=[16, 32], epsilons=[1.0],
        trials=4, root_seed=9, oracle="mc", mc_samples=2000,
    )
    serial = pl.run_scaling(model, domain, threads=1, **kwargs)
    parallel = pl.run_scaling(model, domain, threads=4, **kwargs)
    for a, b in zip(serial.rows, parallel.rows):
        for col in SWEEP_COLUMNS:
            if col != "wall_time_ms":
                assert a[col] == b[col]
    assert serial.summary["oracle"] == "mc"


def test_run_scaling_skips_oversized_cells():
    model = _gaussian_model([0.2])
    domain = pl.make_set("box", [0.0], [1.0])
    result = pl.run_scaling(
        model, domain, assumption="coord_second", tau=1.0,
        n_grid=[64], epsilons=[1.0], trials=2, root_seed=3,
        oracle="analytic", net_cap=4,
    )
    assert result.rows == []
    assert len(result.summary["skipped"]) == 1
    assert result.summary["skipped"][0]["n"] == 64
    assert result.summary["cells"] == []
    assert result.summary["slopes"] == {}


def test_run_scaling_validation():
    model = _gaussian_model([0.2])
    domain = pl.make_set("box", [0.0], [1.0])
    good = dict(assumption="coord_second", tau=1.0, n_grid=[16, 32],
                epsilons=[1.0], trials=1, root_seed=1, oracle="analytic")
    with pytest.raises(ParameterError):
        pl.run_scaling(model, domain, **{**good, "n_grid": [32, 16]})
    with pytest.raises(ParameterError):
        pl.run_scaling(model, domain, **{**good, "n_grid": []})
    with pytest.raises(ParameterError):
        pl.run_scaling(model, domain, **{**good, "epsilons": [0.0]})
    with pytest.raises(ParameterError):
        pl.run_scaling(model, domain, **{**good, "oracle": "exact"})
    with pytest.raises(ParameterError):
        pl.run_scaling(model, domain, **{**good, "trials": 0})
    heavy = pl.make_model(
        pl.make_design("student_t", nu=2.5), pl.make_noise("gaussian", sigma=1.0), [0.2]
    )
    with pytest.raises(UnsupportedModelError):
        pl.run_scaling(heavy, domain, **good)
