import json
import math

import pytest

from ogm import examples
from ogm import hexagon as hx
from ogm import verify as vf
from ogm.cover import CoverError
from ogm.manifold import GraphManifoldSpec


def small_cfg(samples=40, seed=7, workers=1):
    return vf.RunConfig(
        t0_depth=2,
        hex_depth=3,
        samples=samples,
        seed=seed,
        tol=1e-6,
        fiber_range=2.0,
        wall_comp_depth=0,
        workers=workers,
    )


def test_constant_c():
    g = hx.hexagon_constants()
    assert vf.constant_c(3, g.delta) == 4 * g.delta + 1
    # hypothetical degenerate branches
    assert vf.constant_c(2, g.delta) == 2 * g.delta + 1
    assert vf.constant_c(3, 0.0) == 1.0


def test_run_config_validation():
    with pytest.raises(ValueError):
        vf.RunConfig(t0_depth=0)
    with pytest.raises(ValueError):
        vf.RunConfig(samples=0)
    with pytest.raises(ValueError):
        vf.RunConfig(tol=0.0)


def test_qi_report_passes_flip():
    spec = examples.load("flip_n3")
    cfg = small_cfg()
    records = vf.collect_records(spec, cfg)
    rep = vf.verify_qi(spec, cfg, records)
    assert rep.verdict == "PASS"
    assert rep.usable > 0
    assert rep.usable + rep.truncated == cfg.samples
    for stat in rep.inequalities.values():
        assert stat.violations == 0
        assert stat.checked == rep.usable


def test_identical_pairs_trivial():
    spec = examples.load("flip_n3")
    cfg = small_cfg(samples=5)
    cplx, ts = vf._prepare(spec, cfg)
    from ogm.cover import make_stream

    x = cplx.sample_point(make_stream(3, 0))
    from ogm import geodesics as geo

    d = geo.distance(cplx, x, x).distance
    e = ts.product_distance(ts.phi(x), ts.phi(x))
    assert d == 0.0 and e == 0.0


def test_lipschitz_report():
    spec = examples.load("flip_n3")
    cfg = small_cfg()
    records = vf.collect_records(spec, cfg)
    rep = vf.verify_lipschitz(spec, cfg, records)
    assert rep.verdict == "PASS"
    assert rep.retraction_lipschitz is not None
    g = hx.hexagon_constants()
    assert rep.retraction_lipschitz <= 2 * g.delta
    assert "phi0_plus_one" in rep.inequalities
    assert rep.notes == []  # no embedded half-edge warning


def test_curves_report():
    spec = examples.load("flip_n3")
    cfg = small_cfg()
    records = vf.collect_records(spec, cfg)
    rep = vf.verify_curves(spec, cfg, records)
    assert rep.verdict == "PASS"


def test_report_replay_bit_for_bit():
    spec = examples.load("flip_n3")
    cfg = small_cfg(samples=20)
    a = vf.verify_qi(spec, cfg).to_json()
    b = vf.verify_qi(spec, cfg).to_json()
    assert a == b


def test_worker_count_independent():
    spec = examples.load("flip_n3")
    one = vf.verify_qi(spec, small_cfg(samples=24, workers=1)).to_json()
    two = vf.verify_qi(spec, small_cfg(samples=24, workers=2)).to_json()
    assert one == two


def test_reducible_rejected():
    spec = examples.load("reducible_n4")
    with pytest.raises(CoverError) as err:
        vf.verify_qi(spec, small_cfg())
    assert "irreducible" in str(err.value)


def test_invalid_spec_rejected():
    doc = examples.flip_n3()
    doc["edges"][0]["perm"] = [0, 1]
    doc["edges"][1]["perm"] = [0, 1]
    with pytest.raises(CoverError):
        vf.verify_qi(GraphManifoldSpec.from_dict(doc), small_cfg())


def test_truncated_never_counts():
    spec = examples.load("flip_n3")
    cfg = vf.RunConfig(
        t0_depth=2,
        hex_depth=3,
        samples=30,
        seed=11,
        fiber_range=8.0,  # large fibers force truncations
        wall_comp_depth=0,
        workers=1,
    )
    records = vf.collect_records(spec, cfg)
    rep = vf.verify_qi(spec, cfg, records)
    assert rep.truncated > 0
    for stat in rep.inequalities.values():
        assert stat.checked == rep.usable


def test_csv_dump(tmp_path):
    spec = examples.load("flip_n3")
    cfg = small_cfg(samples=10)
    records = vf.collect_records(spec, cfg)
    out = tmp_path / "pairs.csv"
    vf.dump_pairs_csv(records, str(out))
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "index,truncated,d,e"
    assert len(lines) == 11


def test_report_json_schema():
    spec = examples.load("cycle_n4")
    cfg = small_cfg(samples=15)
    rep = vf.verify_qi(spec, cfg)
    doc = json.loads(rep.to_json())
    assert doc["kind"] == "qi"
    assert doc["n"] == 4
    assert doc["config"]["seed"] == 7
    assert set(doc["inequalities"]) == {
        "upper_sandwich",
        "lower_sandwich",
        "upper_lipschitz_sub",
    }
    assert doc["spec_digest"] == spec.digest()
