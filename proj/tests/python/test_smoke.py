import json
import math

import numpy as np
import pytest

import bifbm


MAIN = bifbm.ModelParams(0.75, 2.0 / 3.0)


def test_covariance_and_kernel_values():
    assert bifbm.covariance(bifbm.ModelParams(0.5, 1.0), 1.0, 2.0) == pytest.approx(1.0)
    assert bifbm.covariance(MAIN, 1.0, 2.0) == pytest.approx(0.911717182609293480, rel=1e-12)
    assert bifbm.heat_kernel(1.0, 1.0) == pytest.approx(0.241970724519143350, rel=1e-12)
    m = bifbm.moments(MAIN, 2.0, 1.0)
    assert m["rho2"] == pytest.approx(1.16877177893497221, rel=1e-10)
    assert bifbm.hnorm(bifbm.StepFunction.indicator(0.0, 1.0), 1.0) == pytest.approx(0.826250259992144207, rel=1e-8)
    assert bifbm.mollifier_constant() == pytest.approx(2.25228362104358101, rel=1e-12)


def test_errors_map_to_python_exceptions():
    with pytest.raises(ValueError):
        bifbm.ModelParams(0.75, 0.7)
    with pytest.raises(ValueError):
        bifbm.heat_kernel(0.0, 1.0)
    with pytest.raises(ValueError):
        bifbm.run_experiment("experiment = qv\nstepz = 3\n")
    with pytest.raises(ValueError):
        bifbm.run_experiment("experiment = hnorm\n", format="xml")


def test_lemma_scan_reports_no_violations():
    rep = bifbm.lemma_scan(MAIN, 2000, 1)
    assert rep["total_violations"] == 0
    assert rep["checks"]["rho2_lower"]["samples"] == 2000


def test_sampling_shapes_and_reproducibility():
    grid = bifbm.TimeGrid(1.0, 128, 8)
    a = bifbm.sample_paths(MAIN, grid, 20, 4)
    b = bifbm.sample_paths(MAIN, grid, 20, 4)
    assert a.values.shape == (20, 137)
    assert np.array_equal(a.values, b.values)
    assert np.all(a.values[:, 0] == 0.0)


def test_estimators_from_python():
    grid = bifbm.TimeGrid(1.0, 256, 8)
    batch = bifbm.sample_paths(MAIN, grid, 50, 2)
    qv = bifbm.quadratic_variation(batch, epsilon_steps=8, eval_times=[0.5, 1.0])
    assert qv.t == [0.5, 1.0]
    assert qv.samples.shape == (2, 50)
    assert qv.mean[1] == pytest.approx(np.mean(qv.samples[1]))
    j = bifbm.quadratic_covariation("identity", batch, epsilon_steps=8)
    assert np.array_equal(j.samples, bifbm.quadratic_variation(batch, epsilon_steps=8).samples)
    f = bifbm.StepFunction.indicator(-0.5, 0.5)
    fw = bifbm.forward_integral(f, batch, epsilon_steps=8).samples
    bw = bifbm.backward_integral(f, batch, epsilon_steps=8).samples
    jf = bifbm.quadratic_covariation(f, batch, epsilon_steps=8).samples
    assert np.allclose(bw - fw, jf, rtol=0, atol=1e-12)
    res = bifbm.ito_residual("square", batch, epsilon_steps=8)
    assert res.label == "ito_residual_forward"


def test_local_time_from_python():
    grid = bifbm.TimeGrid(1.0, 256, 16)
    batch = bifbm.sample_paths(MAIN, grid, 30, 3)
    field = bifbm.local_time(batch, eval_times=[1.0])
    assert field.values.shape == (30, 1, 201)
    assert np.all(field.values >= 0.0)
    assert abs(field.mass(0, 0) - 1.0) < 0.05
    occ = bifbm.occupation_check(batch, field, "constant(1)", 1.0)
    assert occ.mean[0] < 0.05
    by = bifbm.bouleau_yor_residual(bifbm.StepFunction.indicator(-1.0, 1.0), batch, field)
    assert math.isfinite(by.mean[0])
    assert len(bifbm.mollify(bifbm.StepFunction.indicator(0.0, 1.0), 16, [0.5, 2.0])) == 2


def test_harness_round_trip():
    text, ok = bifbm.run_experiment("experiment = hnorm\n", format="json")
    doc = json.loads(text)
    assert ok
    assert doc["experiment"] == "hnorm"
    assert doc["rows"][0]["label"] == "hnorm"
    assert "timestamp" not in doc
    csv, ok = bifbm.run_experiment("experiment = lemma-scan\nscan_samples = 500\n")
    assert ok
    assert csv.splitlines()[0] == "label,t,mean,stderr,n_paths,epsilon,H,K,seed,target,pass"
    canon = bifbm.canonical_config("experiment = qv\nK = 2/3\n")
    assert bifbm.canonical_config(canon) == canon
