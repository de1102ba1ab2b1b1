import json
import math
import os
import tempfile

import numpy as np
import pytest

import hml


def test_params_and_regimes():
    p = hml.make_params(0.7, 2)
    assert p.H0 == pytest.approx(0.85)
    assert hml.h_star(p, 4) == pytest.approx(0.4)
    rc = hml.classify_regime(p, 4)
    assert rc["regime"] == "short_range"
    assert rc["scaling_exponent"] == pytest.approx(0.5)
    assert hml.scaling_alpha(p, 4, 0.01) == pytest.approx(0.1)
    with pytest.raises(ValueError):
        hml.make_params(0.4, 1)


def test_chaos_profile_matches_hermite_expansion():
    prof = hml.chaos_projection_profile(4, 1)
    assert prof == {0: 3, 2: 6, 4: 1}
    vecs = hml.enumerate_contractions(2, 2)
    assert sorted(v["delta"] for v in vecs) == [0, 2, 4]
    assert hml.hermite_rank([0.0, 0.0, 0.0, 1.0]) == 1  # x^3 = H3 + 3 H1


def test_fbm_law_and_determinism():
    a = hml.simulate_fbm(0.7, 256, 1.0 / 256, seed=1, stream=5)
    b = hml.simulate_fbm(0.7, 256, 1.0 / 256, seed=1, stream=5)
    assert np.array_equal(a["values"], b["values"])
    # variance at t=1 over a few hundred replicas
    vals = [hml.simulate_fbm(0.7, 64, 1.0 / 64, seed=3, stream=s)["values"][-1]
            for s in range(400)]
    assert np.var(vals) == pytest.approx(1.0, abs=0.25)


def test_rank2_and_volterra():
    p = hml.make_params(0.7, 2)
    z = hml.simulate_hermite(p, 64, 1.0 / 64, seed=2, backend="quadrature")
    assert len(z["values"]) == 65
    assert z["values"][0] == 0.0
    y = hml.simulate_volterra(1.0, hml.make_params(0.7, 1), 200, 0.05, seed=4)
    assert len(y["values"]) == 201
    sigma2 = hml.stationary_variance(1.0, 0.7)
    assert sigma2 == pytest.approx(0.7 * math.gamma(1.4), rel=1e-2)


def test_functional_and_solvers():
    y = hml.simulate_volterra(1.0, hml.make_params(0.9, 1), 2000, 0.05, seed=8)
    g = hml.evaluate_series([-1.0, 0.0, 1.0], y["values"], y["t0"], y["dt"])
    vals = hml.normalized_functional(g["values"], g["t0"], g["dt"], 0.1,
                                     hml.make_params(0.9, 1), 2, [0.0, 1.0])
    assert vals[0] == 0.0

    # linear Young equation against the exact exponential
    n = 2048
    t = np.linspace(0.0, 1.0, n + 1)
    x = hml.solve_young("linear", 1.0, t, 0.0, 1.0 / n, 1.0)
    assert x["values"][-1] == pytest.approx(math.e, rel=2e-3)
    xr = hml.solve_rough("linear", 1.0, t, 0.0, 1.0 / n, 1.0, 0.5)
    assert xr["values"][-1] == pytest.approx(math.e, rel=1e-5)


def test_run_experiment_roundtrip():
    cfg = {
        "kind": "decompose",
        "seed": 3,
        "params": {"H": 0.7, "m": 1},
        "decompose": {"k": 6},
    }
    with tempfile.TemporaryDirectory() as d:
        rc = hml.run_experiment_json(json.dumps(cfg), d)
        assert rc == 0
        with open(os.path.join(d, "decompose.json")) as f:
            out = json.load(f)
        assert out["profile"]["0"] == "15"  # (6-1)!!
        assert os.path.exists(os.path.join(d, "manifest.json"))
