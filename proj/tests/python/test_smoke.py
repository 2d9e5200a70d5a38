"""Smoke tests for the python bindings.

Runnable either under pytest or directly: python tests/python/test_smoke.py
"""

import json
import math
import tempfile

import numpy as np

import cylint

GAUSSIAN = json.dumps({"family": "gaussian", "params": {"variance": 1.0}})


def test_model_symbol():
    m = cylint.model_from_json(GAUSSIAN, 4)
    assert m.dim == 4
    assert m.coordinate_representable
    u = np.array([1.0, 1.0, 0.0, 0.0])
    s = m.symbol(u)
    assert abs(s - (-1.0)) < 1e-12  # -(1/2)||u||^2


def test_increment_cf_matches_empirical():
    m = cylint.model_from_json(GAUSSIAN, 4)
    rng = np.random.default_rng(0)
    phi = rng.standard_normal((2, 4)) / 2.0
    n = 20000
    samples = cylint.radonify_samples(m, phi, 0.5, n, seed=11)
    assert samples.shape == (n, 2)
    v = np.array([0.7, -0.3])
    emp = np.mean(np.exp(1j * samples @ v))
    exact = cylint.increment_cf(m, phi, 0.5, v)
    assert abs(emp - exact) < 3.0 * math.sqrt(2.0 / n)
    # determinism: same seed, same draws
    again = cylint.radonify_samples(m, phi, 0.5, 100, seed=11)
    assert np.array_equal(again, samples[:100])


def test_gauss_dom_constant():
    c = cylint.gauss_dom_constant()
    assert abs(c - 1.93773) < 1e-4


def test_p_metric():
    x = np.zeros((1000, 2))
    y = np.zeros((1000, 2))
    est, se = cylint.p_metric(x, y)
    assert est == 0.0
    y[:, 0] = 5.0  # capped at 1 per sample
    est, _ = cylint.p_metric(x, y)
    assert est == 1.0


def test_prokhorov_closed_cases():
    d0 = np.array([[0.0]])
    d_near = np.array([[0.3]])
    d_far = np.array([[2.0]])
    one = [1.0]
    assert abs(cylint.prokhorov_distance(d0, one, d_near, one) - 0.3) < 1e-12
    assert abs(cylint.prokhorov_distance(d0, one, d_far, one) - 1.0) < 1e-12
    half = np.array([[0.0], [2.0]])
    assert (
        abs(cylint.prokhorov_distance(half, [0.5, 0.5], d0, one) - 0.5) < 1e-12
    )


def test_refine_exp_decay():
    phi = np.eye(3, 4)
    rep = cylint.refine_exp_decay(
        GAUSSIAN, 4, phi, 1.0, [8, 16, 32], 1.0, 1.0, 500, seed=7, threads=2
    )
    assert rep["levels"] == [8, 16, 32]
    assert rep["final_p"][-1] == 0.0  # finest level vs itself
    assert rep["final_p"][0] > rep["final_p"][1]


def test_validate_and_run_experiment():
    errors = cylint.validate_config(json.dumps({"kind": "nope"}))
    assert any(path == "$.kind" for path, _ in errors)

    config = json.dumps(
        {
            "kind": "prokhorov-suite",
            "seed": 5,
            "pairs": 10,
            "max_atoms": 3,
            "dim": 2,
        }
    )
    assert cylint.validate_config(config) == []
    with tempfile.TemporaryDirectory() as out:
        passed, report = cylint.run_experiment(config, out, threads=1)
        assert passed
        rep = json.loads(report)
        assert rep["kind"] == "prokhorov-suite"
        assert rep["summary"]["failed"] == 0


def main():
    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_")]
    for test in tests:
        test()
        print(f"ok {test.__name__}")
    print(f"{len(tests)} python smoke tests passed")


if __name__ == "__main__":
    main()
