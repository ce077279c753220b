import json
import math

import numpy as np
import pytest

import eqlab


def identical_cd():
    return eqlab.Economy([2.0, 2.0], [eqlab.cobb_douglas([0.5, 0.5])] * 2, "identical-cd")


def heterogeneous_cd():
    return eqlab.Economy([2.0, 2.0], [eqlab.cobb_douglas([0.6, 0.4]), eqlab.cobb_douglas([0.4, 0.6])])


def mirror_ces():
    return eqlab.Economy([1.0, 1.0], [eqlab.ces([1024.0, 1.0], -4.0), eqlab.ces([1.0, 1024.0], -4.0)])


def test_demand_and_walras():
    spec = eqlab.cobb_douglas([0.5, 0.5])
    assert np.allclose(eqlab.demand(spec, [1.0], 2.0), [1.0, 1.0])
    omega = np.array([[1.0, 0.0], [1.0, 2.0]])
    z = eqlab.aggregate_excess(heterogeneous_cd(), [0.7], omega)
    assert abs(np.dot([0.7, 1.0], z)) < 1e-12
    with pytest.raises(eqlab.DomainError):
        eqlab.cobb_douglas([0.5, 0.6])


def test_equilibria():
    eq = eqlab.find_equilibria(mirror_ces(), np.eye(2))
    prices = [p[0] for p in eq["prices"]]
    assert len(prices) == 3
    assert abs(prices[1] - 1.0) < 1e-9
    assert abs(prices[0] * prices[2] - 1.0) < 1e-6
    assert not eq["boundary_warning"]


def test_manifold_point():
    pbar, w = eqlab.br_point_cobb_douglas(heterogeneous_cd(), [1.0])
    assert abs(pbar[0] - 5.0 / 6.0) < 1e-12
    assert np.allclose(w, [1.0, 8.0 / 3.0], atol=1e-12)
    x = eqlab.phi_chart(heterogeneous_cd(), [1.0], np.zeros((1, 1)))
    assert x.shape == (3,)


def test_curvature():
    flat = eqlab.equilibrium_manifold_chart(identical_cd())
    assert eqlab.minimality_scan(flat, [1.0, 0.0], [3.0, 2.0], [11, 11])["sup_norm"] < 1e-6
    curved = eqlab.equilibrium_manifold_chart(heterogeneous_cd())
    rep = eqlab.mean_curvature(curved, [2.0, 1.0])
    assert rep["mean_curvature_norm"] > 1e-3
    assert not rep["minimal"]


def test_helicoid():
    spec = eqlab.HelicoidSpec(2, 1, [1.0], 1.0)
    chart = eqlab.helicoid_chart(spec)
    assert np.allclose(chart([math.pi / 2, 2.0]), [0.0, 2.0, math.pi / 2])
    assert not eqlab.is_degenerate(spec)
    assert eqlab.is_degenerate(eqlab.HelicoidSpec(2, 1, [0.0], 1.0))
    s, t, residual = eqlab.hyperplane_intersection(spec, [0.0, 0.0, 1.0], math.pi / 2)
    assert abs(s - math.pi / 2) < 1e-12 and residual < 1e-12
    assert eqlab.hyperplane_intersection(eqlab.HelicoidSpec(2, 1, [0.0], 1.0), [0.0, 1.0, 0.0], 1.0) is None
    with pytest.raises(eqlab.DomainError):
        eqlab.HelicoidSpec(2, 2, [1.0, 1.0], 1.0)


def test_volume_and_entropy():
    chart = eqlab.helicoid_chart(eqlab.HelicoidSpec(2, 1, [1.0], 1.0))
    exact = math.pi * (math.sqrt(2.0) + math.log(1.0 + math.sqrt(2.0)))
    v = eqlab.volume(chart, [0.0, 0.0], [2 * math.pi, 1.0])
    assert abs(v - exact) < 1e-8
    assert eqlab.entropy_uniform(chart, [0.0, 0.0], [2 * math.pi, 1.0]) == pytest.approx(math.log(v), rel=1e-12)
    h = eqlab.entropy_general(chart, [0.0, 0.0], [2 * math.pi, 1.0], lambda u: 1.0)
    assert h == pytest.approx(math.log(v), rel=1e-10)


def test_run_config():
    config = {
        "scenario": "equilibria",
        "seed": 1,
        "economy": {
            "id": "identical-cd",
            "resources": [2, 2],
            "consumers": [{"family": "cobb-douglas", "alpha": [0.5, 0.5]}] * 2,
        },
        "endowment_samples": 3,
    }
    out = eqlab.run_config(json.dumps(config), jobs=2)
    assert out["exit_code"] == 0
    assert out["csv"].startswith("scenario,economy_id,point,count,sup_H,volume,entropy,gauss_dispersion,flags\n")
    doc = json.loads(out["json"])
    assert len(doc["rows"]) == 3
    assert out == eqlab.run_config(json.dumps(config), jobs=1)
    with pytest.raises(eqlab.ConfigError):
        eqlab.run_config(json.dumps({**config, "bogus": 1}))
    with pytest.raises(eqlab.ConfigError):
        eqlab.run_config("{not json")
