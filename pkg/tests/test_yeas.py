import math
from dataclasses import replace

import numpy as np
import pytest

from aslab.graph import has_provider_cycle, verify_spider
from aslab.yeas import (
    CalibrationError,
    HyperbolicPoint,
    YeasParams,
    _layout,
    _phase2_pairs,
    calibrate_q,
    generate,
    generate_calibrated,
    hdist,
    sample_point,
)

PARAMS = dict(q=5.0, alpha=0.55, beta=0.7, radius=18.5, seed=7)


class FakeRng:
    def __init__(self, values):
        self.values = list(values)

    def random(self):
        return self.values.pop(0)


# ---------------------------------------------------------------------------
# parameters and sampling


def test_params_validation():
    with pytest.raises(ValueError):
        YeasParams(n=0, **PARAMS)
    with pytest.raises(ValueError):
        YeasParams(n=10, q=5, alpha=0.5, beta=0.7, radius=18.5, seed=1)
    with pytest.raises(ValueError):
        YeasParams(n=10, q=5, alpha=0.55, beta=1.0, radius=18.5, seed=1)
    with pytest.raises(ValueError):
        YeasParams(n=10, q=5, alpha=0.55, beta=0.7, radius=-1, seed=1)
    with pytest.raises(ValueError):
        YeasParams(n=10, q=0, alpha=0.55, beta=0.7, radius=18.5, seed=1)


def test_sample_point_boundaries():
    p = YeasParams(n=1, q=5, alpha=0.8, beta=0.5, radius=12.0, seed=1)
    near_zero = sample_point(p, FakeRng([1e-300, 0.25]))
    assert near_zero.r < 1e-6
    assert near_zero.phi == pytest.approx(math.pi / 2)
    near_rim = sample_point(p, FakeRng([1.0 - 1e-12, 0.0]))
    assert near_rim.r == pytest.approx(12.0, abs=1e-6)


def test_sample_point_midpoint_value():
    p = YeasParams(n=1, q=5, alpha=1.0, beta=0.5, radius=10.0, seed=1)
    pt = sample_point(p, FakeRng([0.5, 0.0]))
    assert pt.r == pytest.approx(9.3069, abs=1e-4)


def test_sample_point_radial_cdf():
    scipy_stats = pytest.importorskip("scipy.stats")
    p = YeasParams(n=1, q=5, alpha=0.55, beta=0.7, radius=18.5, seed=42)
    rng = np.random.default_rng(42)
    rs = np.array([sample_point(p, rng).r for _ in range(100_000)])

    def cdf(r):
        return (np.cosh(p.alpha * np.asarray(r)) - 1) / (np.cosh(p.alpha * p.radius) - 1)

    result = scipy_stats.kstest(rs, cdf)
    assert result.pvalue > 0.01


# ---------------------------------------------------------------------------
# distances


def test_hdist_identical_points():
    a = HyperbolicPoint(3.7, 1.2)
    assert hdist(a, a) == 0.0


def test_hdist_collinear():
    assert hdist(HyperbolicPoint(2.0, 0.5), HyperbolicPoint(6.5, 0.5)) == pytest.approx(4.5)


def test_hdist_antipodal_double_radius():
    r = 5.25
    a = HyperbolicPoint(r, 0.0)
    b = HyperbolicPoint(r, math.pi)
    assert hdist(a, b) == pytest.approx(2 * r, abs=1e-9)


def test_hdist_symmetry_and_triangle_inequality():
    rng = np.random.default_rng(5)
    for _ in range(10_000):
        pts = [
            HyperbolicPoint(float(rng.uniform(0, 18.5)), float(rng.uniform(0, 2 * math.pi)))
            for _ in range(3)
        ]
        a, b, c = pts
        assert hdist(a, b) == pytest.approx(hdist(b, a), abs=1e-12)
        assert hdist(a, c) <= hdist(a, b) + hdist(b, c) + 1e-9


# ---------------------------------------------------------------------------
# generation


def test_single_node():
    res = generate(YeasParams(n=1, **PARAMS))
    assert res.graph.node_count == 1
    assert res.clique == {0}
    assert res.graph.edge_count() == 0
    assert len(res.coords) == 1


def test_determinism():
    p = YeasParams(n=1500, **PARAMS)
    a = generate(p)
    b = generate(p)
    assert a.graph.peer_edges == b.graph.peer_edges
    assert a.graph.cp_edges == b.graph.cp_edges
    assert a.clique == b.clique
    assert a.coords == b.coords


def test_phase1_structure():
    p = YeasParams(n=3000, **PARAMS)
    res = generate(p, include_peering_phase=False)
    g = res.graph
    clique = res.clique
    # every non-clique node has exactly one provider; clique members none
    for u in range(g.node_count):
        if u in clique:
            assert not g.providers[u]
        else:
            assert len(g.providers[u]) == 1
    # the clique is a complete peer graph
    members = sorted(clique)
    for i, u in enumerate(members):
        for v in members[i + 1 :]:
            assert (u, v) in g.peer_edges
    assert not has_provider_cycle(g)


def test_phase1_only_graph_is_spider():
    p = YeasParams(n=2500, **PARAMS)
    res = generate(p, include_peering_phase=False)
    assert verify_spider(res.graph).is_spider


def test_provider_strictly_closer_to_center():
    p = YeasParams(n=2500, **PARAMS)
    res = generate(p)
    rs = [pt.r for pt in res.coords]
    for c, prov in res.graph.cp_edges:
        assert rs[prov] < rs[c]


def test_phase2_adds_only_peer_edges():
    p = YeasParams(n=2500, **PARAMS)
    bare = generate(p, include_peering_phase=False)
    full = generate(p)
    assert bare.graph.cp_edges == full.graph.cp_edges
    assert bare.graph.peer_edges <= full.graph.peer_edges
    assert bare.clique == full.clique


def test_phase2_bucket_matches_brute_force():
    lay = _layout(3000, 0.55, 18.5, 12345)
    threshold = 0.7 * 18.5
    assert _phase2_pairs(lay, threshold, "brute") == _phase2_pairs(lay, threshold, "bucket")


def test_phase2_threshold_respected():
    p = YeasParams(n=800, **PARAMS)
    res = generate(p)
    bare = generate(p, include_peering_phase=False)
    added = res.graph.peer_edges - bare.graph.peer_edges
    for u, v in added:
        assert hdist(res.coords[u], res.coords[v]) < p.beta * p.radius


def test_literal_comparison_form_freezes_clique():
    p = YeasParams(n=400, **PARAMS)
    res = generate(p, comparison_form="literal")
    assert len(res.clique) == 1


def test_scaled_clique_grows_with_q():
    p = YeasParams(n=400, **PARAMS)
    small = len(generate(replace(p, q=2.0)).clique)
    large = len(generate(replace(p, q=12.0)).clique)
    assert small < large


# ---------------------------------------------------------------------------
# calibration


def test_calibrate_q_hits_target():
    p = YeasParams(n=2000, **PARAMS)
    res, q = generate_calibrated(p, target_clique_size=16)
    assert len(res.clique) == 16
    assert q > 1.0


def test_calibrate_q_rejects_unreachable_target():
    p = YeasParams(n=3, **PARAMS)
    with pytest.raises(CalibrationError):
        calibrate_q(p, target_clique_size=5)
