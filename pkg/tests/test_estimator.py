import dataclasses
import math

import numpy as np
import pytest

import privlad as pl
from privlad.errors import ParameterError
from privlad.rng import stream


def _base(n, eta, epsilon):
    return math.log(n) * math.log(1.0 / eta) / (n * epsilon)


DOMAIN_2D = pl.make_set("box", [0.0, 0.0], [1.0, 1.0])


def test_iota_schedules_match_formulas():
    n, d, eps, eta, tau = 500, 2, 1.0, 0.1, 1.7
    base = _base(n, eta, eps)
    expected = {
        "l2_second": math.sqrt(d * base) / tau,
        "coord_second": math.sqrt(base) / tau,
        "l2_theta": (d * base) ** (1.0 / 1.5) / tau,
        "coord_theta": base ** (0.5 / 1.5) / tau,
    }
    for assumption, iota in expected.items():
        theta = None if assumption.endswith("_second") else 1.5
        params = pl.choose_parameters(
            assumption, n=n, d=d, epsilon=eps, eta=eta, tau=tau,
            domain=DOMAIN_2D, theta=theta,
        )
        assert params.iota == pytest.approx(iota, rel=1e-15)
        if assumption.endswith("_second"):
            assert params.rate == pytest.approx(math.sqrt(d * base), rel=1e-15)
            assert params.theta == 2.0
        else:
            assert params.rate == pytest.approx((d * base) ** (0.5 / 1.5), rel=1e-15)
            assert params.theta == 1.5


def test_scale_multipliers():
    kwargs = dict(n=100, d=2, epsilon=1.0, eta=0.1, tau=1.0, domain=DOMAIN_2D)
    plain = pl.choose_parameters("coord_second", **kwargs)
    scaled = pl.choose_parameters("coord_second", iota_scale=3.0, zeta_scale=0.5, **kwargs)
    assert scaled.iota == pytest.approx(3.0 * plain.iota, rel=1e-15)
    assert scaled.zeta == pytest.approx(0.5 * plain.zeta, rel=1e-15)
    assert scaled.rate == plain.rate


def test_zeta_rule_selection():
    fine = pl.choose_parameters(
        "coord_second", n=100, d=2, epsilon=1.0, eta=0.1, tau=1.0, domain=DOMAIN_2D
    )
    assert fine.zeta == 1.0 / 100
    assert fine.zeta_rule == "resolution"
    # a tiny capacity forces the fallback to the rate-scale resolution
    coarse = pl.choose_parameters(
        "coord_second", n=100, d=2, epsilon=1.0, eta=0.1, tau=1.0,
        domain=DOMAIN_2D, net_cap=50,
    )
    assert coarse.zeta_rule == "capacity"
    assert coarse.zeta == pytest.approx(min(DOMAIN_2D.diameter() / 2.0, coarse.rate))
    # large n drives 1/n below the diameter/2 clamp in the resolution rule
    tiny_domain = pl.make_set("box", [0.0], [0.005])
    clamped = pl.choose_parameters(
        "coord_second", n=10, d=1, epsilon=1.0, eta=0.1, tau=1.0, domain=tiny_domain
    )
    assert clamped.zeta == tiny_domain.diameter() / 2.0


def test_choose_parameters_validation():
    good = dict(n=100, d=2, epsilon=1.0, eta=0.1, tau=1.0, domain=DOMAIN_2D)
    with pytest.raises(ParameterError):
        pl.choose_parameters("linf_second", **good)
    with pytest.raises(ParameterError):
        pl.choose_parameters("coord_second", **{**good, "n": 1})
    with pytest.raises(ParameterError):
        pl.choose_parameters("coord_second", **{**good, "eta": 1.0})
    with pytest.raises(ParameterError):
        pl.choose_parameters("coord_second", **{**good, "epsilon": 0.0})
    with pytest.raises(ParameterError):
        pl.choose_parameters("coord_second", **{**good, "tau": -1.0})
    with pytest.raises(ParameterError):
        pl.choose_parameters("coord_second", theta=1.5, **good)
    with pytest.raises(ParameterError):
        pl.choose_parameters("coord_theta", **good)
    with pytest.raises(ParameterError):
        pl.choose_parameters("coord_theta", theta=2.0, **good)
    with pytest.raises(ParameterError):
        pl.choose_parameters("coord_second", **{**good, "d": 1})
    with pytest.raises(ParameterError):
        pl.choose_parameters("coord_second", iota_scale=0.0, **good)


def test_truncation_for_variants():
    params = pl.choose_parameters(
        "coord_second", n=100, d=2, epsilon=1.0, eta=0.1, tau=1.0, domain=DOMAIN_2D
    )
    trunc = pl.truncation_for(params)
    assert trunc.variant == "second_moment"
    assert trunc.iota == params.iota
    theta_params = pl.choose_parameters(
        "l2_theta", n=100, d=2, epsilon=1.0, eta=0.1, tau=1.0,
        domain=DOMAIN_2D, theta=1.5,
    )
    assert pl.truncation_for(theta_params).theta == 1.5
    broken = dataclasses.replace(params, iota=0.0)
    with pytest.raises(ParameterError):
        pl.truncation_for(broken)


def test_nonprivate_minimizer_tie_breaks_low():
    domain = pl.make_set("box", [0.0], [1.0])
    net = pl.build_net(domain, 0.5)
    # symmetric dataset: risk at -0.5 and +0.5 ties exactly
    ds = pl.make_dataset([[1.0], [1.0]], [-0.5, 0.5])
    trunc = pl.make_truncation("second_moment", 0.5)
    idx, w, risk = pl.nonprivate_net_minimizer(net, ds, trunc)
    risks = pl.truncated_risk_batch(net.points, ds, trunc)
    assert risks[1] == risks[3]
    assert idx == 1
    assert w[0] == -0.5
    assert risk == risks[1]


def test_dp_l1_fit_deterministic_and_well_formed():
    model = pl.make_model(
        pl.make_design("gaussian"), pl.make_noise("gaussian", sigma=1.0), [0.3, -0.2]
    )
    ds = pl.synth(model, 60, stream(25))
    domain = pl.make_set("box", [0.0, 0.0], [1.0, 1.0])
    kwargs = dict(assumption="coord_second", tau=1.0, seed=99)
    first = pl.dp_l1_fit(ds, domain, 1.0, **kwargs)
    second = pl.dp_l1_fit(ds, domain, 1.0, **kwargs)
    assert np.array_equal(first.w_hat, second.w_hat)
    assert first.chosen_index == second.chosen_index
    net = pl.build_net(domain, first.params.zeta)
    assert np.array_equal(first.w_hat, net.points[first.chosen_index])
    assert first.net_size == net.cardinality
    assert first.seed == 99
    trunc = pl.truncation_for(first.params)
    assert first.sensitivity == pl.score_sensitivity(ds.n, trunc)
    assert first.chosen_risk == pytest.approx(
        pl.truncated_empirical_risk(first.w_hat, ds, trunc), rel=1e-13
    )
    payload = first.to_dict()
    assert payload["params"]["assumption"] == "coord_second"
    assert payload["w_hat"] == [float(v) for v in first.w_hat]


def test_dp_l1_fit_recovers_realizable_signal():
    # nearly non-private budget: the mechanism concentrates on the minimizer
    domain = pl.make_set("box", [0.0], [2.0])
    rng = stream(900, 0)
    xs = rng.normal(size=(200, 1))
    ds = pl.make_dataset(xs, 0.8 * xs[:, 0])
    hits = 0
    for s in range(100):
        result = pl.dp_l1_fit(
            ds, domain, 1e6, assumption="coord_second", tau=1.0, seed=s
        )
        if abs(result.w_hat[0] - 0.8) <= 2.0 * result.params.zeta:
            hits += 1
    assert hits >= 95


def test_dp_l1_fit_injection_validation():
    model = pl.make_model(
        pl.make_design("gaussian"), pl.make_noise("gaussian", sigma=1.0), [0.3]
    )
    ds = pl.synth(model, 40, stream(26))
    domain = pl.make_set("box", [0.0], [1.0])
    params = pl.choose_parameters(
        "coord_second", n=40, d=1, epsilon=1.0, eta=0.1, tau=1.0, domain=domain
    )
    fit = dict(assumption="coord_second", tau=1.0, seed=5)
    with pytest.raises(ParameterError):
        pl.dp_l1_fit(ds, domain, 2.0, params=params, **fit)
    short = pl.make_dataset(ds.xs[:10], ds.ys[:10])
    with pytest.raises(ParameterError):
        pl.dp_l1_fit(short, domain, 1.0, params=params, **fit)
    wrong_net = pl.build_net(domain, params.zeta * 2.0)
    with pytest.raises(ParameterError):
        pl.dp_l1_fit(ds, domain, 1.0, params=params, net=wrong_net, **fit)
    wide = pl.make_dataset(np.hstack([ds.xs, ds.xs]), ds.ys)
    with pytest.raises(ParameterError):
        pl.dp_l1_fit(wide, domain, 1.0, **fit)
    with pytest.raises(ParameterError):
        pl.dp_l1_fit(ds, domain, 1.0, assumption="coord_second", tau=1.0, seed=-1)


def test_dp_l1_fit_single_record():
    ds = pl.make_dataset([[1.0]], [0.5])
    domain = pl.make_set("box", [0.0], [1.0])
    result = pl.dp_l1_fit(ds, domain, 1.0, assumption="coord_second", tau=1.0, seed=3)
    assert result.params.n == 2
    assert domain.contains(result.w_hat)
