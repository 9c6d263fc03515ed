import math

import numpy as np
import pytest

import privlad as pl
from privlad.errors import CapacityError, ParameterError
from privlad.geometry import Net, load_net_points, net_csv_text, save_net_csv
from privlad.rng import stream


def test_make_set_validation():
    with pytest.raises(ParameterError):
        pl.make_set("simplex", [0.0], [1.0])
    with pytest.raises(ParameterError):
        pl.make_set("box", [0.0], [1.0, 2.0])
    with pytest.raises(ParameterError):
        pl.make_set("box", [0.0], [-1.0])
    with pytest.raises(ParameterError):
        pl.make_set("ball", [0.0, 0.0], 0.0)
    with pytest.raises(ParameterError):
        pl.make_set("ball", [0.0], math.inf)


def test_diameters():
    box = pl.make_set("box", [0.0, 0.0], [1.0, 1.0])
    assert box.diameter() == pytest.approx(2.0 * math.sqrt(2.0))
    ball = pl.make_set("ball", [0.0, 0.0, 0.0], 0.75)
    assert ball.diameter() == 1.5


def test_contains_and_uniform_sampling():
    box = pl.make_set("box", [1.0], [0.5])
    assert box.contains([1.5])
    assert box.contains([0.5])
    assert not box.contains([1.5000001])
    ball = pl.make_set("ball", [0.0, 0.0], 1.0)
    assert ball.contains([0.6, 0.8])
    assert not ball.contains([0.6, 0.81])
    for domain in (box, ball):
        pts = domain.sample_uniform(500, stream(31))
        assert all(domain.contains(p) for p in pts)


def test_build_net_d1_points_exact():
    box = pl.make_set("box", [0.0], [1.0])
    net = pl.build_net(box, 0.5)
    assert net.points.tolist() == [[-1.0], [-0.5], [0.0], [0.5], [1.0]]
    assert net.zeta == 0.5
    assert net.cardinality == 5


def test_cardinality_bounds():
    box = pl.make_set("box", [0.0], [1.0])
    assert pl.cardinality_bound(box, 0.5) == 12
    ball = pl.make_set("ball", [0.0, 0.0], 1.0)
    assert pl.cardinality_bound(ball, 0.5) == 144
    # once zeta reaches 3x the diameter the ratio drops below one point
    assert pl.cardinality_bound(box, 6.0) == 1


def test_net_covers_its_domain():
    for kind in ("box", "ball"):
        if kind == "box":
            domain = pl.make_set("box", [0.2, -0.1], [1.0, 0.7])
        else:
            domain = pl.make_set("ball", [0.2, -0.1], 0.9)
        zeta = 0.3
        net = pl.build_net(domain, zeta)
        report = pl.covering_check(net, 20_000, rng_seed=33)
        assert report.passed
        assert report.max_distance <= zeta + 1e-12
        assert net.cardinality <= pl.cardinality_bound(domain, zeta)


def test_covering_check_detects_gap():
    domain = pl.make_set("box", [0.0], [1.0])
    sparse = Net(points=np.array([[-1.0], [1.0]]), zeta=0.5, domain=domain)
    report = pl.covering_check(sparse, 5000, rng_seed=34)
    assert not report.passed
    assert report.max_distance > 0.5
    assert domain.contains(report.witness)


def test_capacity_error_reports_remedy():
    domain = pl.make_set("box", [0.0, 0.0, 0.0], [1.0, 1.0, 1.0])
    with pytest.raises(CapacityError) as info:
        pl.build_net(domain, 0.01, net_cap=1000)
    err = info.value
    assert err.required_cap > 1000
    assert err.suggested_zeta > 0.01
    retry = pl.build_net(domain, err.suggested_zeta, net_cap=1000)
    assert retry.cardinality <= 1000


def test_build_net_zeta_validation():
    domain = pl.make_set("box", [0.0], [1.0])
    with pytest.raises(ParameterError):
        pl.build_net(domain, 0.0)
    with pytest.raises(ParameterError):
        pl.build_net(domain, -0.5)
    with pytest.raises(ParameterError):
        pl.build_net(domain, 2.5)
    # zeta equal to the diameter is a legal one-point net
    assert pl.build_net(domain, 2.0).cardinality == 1


def test_net_csv_round_trip(tmp_path):
    domain = pl.make_set("box", [0.3, -0.4], [1.0, 0.6])
    net = pl.build_net(domain, 0.45)
    text = net_csv_text(net)
    assert text.splitlines()[0] == "dim0,dim1"
    path = str(tmp_path / "net.csv")
    save_net_csv(net, path)
    points = load_net_points(path)
    assert np.array_equal(points, net.points)
