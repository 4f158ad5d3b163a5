import json
import math

import numpy as np
import pytest

import rgreen

LOG2 = math.log(2.0)
Z2 = {"driver": {"kind": "constant", "family": {"curve": {"kind": "circle", "radius": 0.0}}}}
ROTATION = {
    "driver": {
        "kind": "circle_rotation",
        "alpha": 0.6180339887498949,
        "family": {"curve": {"kind": "circle", "radius": 0.05}},
    }
}


def z2():
    return rgreen.RationalMap.power_plus_constant(2, 0.0).normalized()


def test_maps_and_points():
    f = z2()
    assert f.degree == 2
    assert f(1.0) == pytest.approx(1.0)
    assert math.isinf(f(complex("inf")).real)
    assert sorted(z.real for z in f.preimages(4.0)) == pytest.approx([-2.0, 2.0])
    assert f.log_eta() == 0.0
    assert not rgreen.RationalMap([1, 0, 0], [0, 1, 0]).is_holomorphic()
    assert rgreen.spherical_distance(0.0, complex("inf")) == pytest.approx(1.0)


def test_potential_examples():
    f = z2()
    assert rgreen.potential_u(f, 1.0) == pytest.approx(-LOG2 / 4, abs=1e-14)
    assert rgreen.potential_u(f, (1.0, 0.0)) == 0.0
    assert rgreen.sup_norm_u(f) == pytest.approx(LOG2 / 4, abs=1e-3)
    maps = [f] * 41
    assert rgreen.green_potential_at(maps, 40, 1.0) == pytest.approx(-LOG2 / 2, abs=1e-12)


def test_series_and_measures():
    maps = rgreen.orbit(ROTATION, 30)
    s = rgreen.green_series(maps, 20, resolution=128)
    assert s.values.shape == (2, 129, 129)
    assert np.all(s.values <= 1e-9)
    assert all(a >= b for a, b in zip(s.tail_bounds, s.tail_bounds[1:]))
    lap = rgreen.measure_from_potential(s)
    assert lap.method == "laplacian"
    assert lap.grid_masses.sum() == pytest.approx(1.0)
    pre = rgreen.measure_by_preimages(maps, 20, m=5000, seed=3)
    assert pre.cloud.shape == (5000,)
    d = rgreen.measure_distance(pre, pre)
    assert d["tv_binned"] == 0.0 and d["energy_dist"] == 0.0
    again = rgreen.cloud_measure(pre.cloud)
    assert rgreen.measure_distance(pre, again)["tv_binned"] == 0.0
    with pytest.raises(rgreen.Error):
        rgreen.measure_from_potential(rgreen.green_series(maps, 3, resolution=64))


def test_observables():
    one = rgreen.Observable.builtin("one")
    assert one(0.3) == 1.0
    assert rgreen.estimate_dsh_norm(one) == 1.0
    assert rgreen.Observable.builtin("cos2")(complex(0.0, 1.0)) == pytest.approx(-1.0)
    with pytest.raises(ValueError):
        rgreen.Observable.builtin("nope")


def test_config_and_diagnostics():
    resolved = rgreen.parse_config(Z2)
    assert resolved["driver"]["kind"] == "constant"
    assert rgreen.parse_config(resolved) == resolved
    with pytest.raises(rgreen.ConfigError, match="bogus"):
        rgreen.parse_config({"bogus": 1})
    d = rgreen.birkhoff_diagnostics(Z2, 64)
    assert d["epsilon"] == 0.0
    assert all(m == 0.0 for m in d["partial_means"])


def test_mixing_constant_phi():
    cfg = dict(ROTATION, depths=[1, 2], samples=2000, observables={"phi": "one", "psi": "re"})
    rep = rgreen.mixing_experiment(cfg)
    assert [r["correlation"] for r in rep["rows"]] == [0.0, 0.0]


def test_run_experiment_is_deterministic(tmp_path):
    cfg = dict(Z2, samples=2000, depth=12)
    a = rgreen.run_experiment("measure", cfg, out=str(tmp_path / "a"), seed=4)
    b = rgreen.run_experiment("measure", cfg, out=str(tmp_path / "b"), seed=4)
    assert a["exit_code"] == 0
    for name in a["artifacts"]:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    manifest = json.loads((tmp_path / "a" / "manifest.json").read_text())
    assert manifest["seed"] == 4
    assert "measure" in rgreen.subcommands()
