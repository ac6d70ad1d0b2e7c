import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from aslab.game import GameParams, clique_size_bound
from aslab.graph import build_graph
from aslab.theory import (
    BoundRow,
    TheoryContext,
    angle_integral_check,
    bound_timeseries,
    connect_prob,
    estimate_phis,
    intersection_area,
    intersection_area_is_valid,
    peering_prob,
    peering_prob_by_cone,
    solve_cone_profile,
)

R = 18.5


def closed_form(radius, r):
    return 0.5 * (1.0 + np.exp(radius - np.asarray(r)))


# ---------------------------------------------------------------------------
# context, area, connection probability


def test_context_density():
    ctx = TheoryContext(40000, 17.9)
    assert ctx.delta == pytest.approx(40000 / (math.pi * math.exp(17.9)))
    with pytest.raises(ValueError):
        TheoryContext(0, 17.9)


def test_intersection_area_values():
    assert intersection_area(0.0) == 4.0
    assert not intersection_area_is_valid(0.0)
    assert intersection_area(10.0) == pytest.approx(4 * math.e**5)
    assert intersection_area_is_valid(10.0)


def test_intersection_area_doubling_law():
    for l in (1.0, 3.0, 7.5):
        assert intersection_area(2 * l) / 4 == pytest.approx((intersection_area(l) / 4) ** 2)


def test_connect_prob_footnote_value():
    ctx = TheoryContext(40000, 17.9)
    assert connect_prob(ctx, 17.9) == pytest.approx(0.00135, abs=5e-5)


def test_connect_prob_small_separation_expansion():
    ctx = TheoryContext(1000, 20.0)
    assert connect_prob(ctx, 0.0) == pytest.approx(1 - 4 * ctx.delta, abs=1e-6)


def test_connect_prob_strictly_decreasing_and_bounded():
    ctx = TheoryContext(40000, 18.5)
    grid = np.linspace(0.0, 18.5, 200)
    vals = [connect_prob(ctx, l) for l in grid]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    assert all(0.0 < v <= 1.0 for v in vals)


# ---------------------------------------------------------------------------
# cone profile


def test_profile_boundary_value():
    prof = solve_cone_profile(R, 256)
    assert prof.values[-1] == 1.0


def test_profile_matches_closed_form_on_grid():
    prof = solve_cone_profile(R, 1024)
    grid = np.asarray(prof.grid)
    vals = np.asarray(prof.values)
    rel = np.abs(vals - closed_form(R, grid)) / closed_form(R, grid)
    assert rel.max() < 1e-6


def test_profile_spec_point_value():
    prof = solve_cone_profile(R, 1024)
    expected = 0.5 * (1 + math.exp(8.5))  # about 2457.9
    assert prof.value_at(10.0) == pytest.approx(expected, rel=1e-4)


def test_closed_form_satisfies_integral_equation():
    # substitution check of the oracle itself
    quad = pytest.importorskip("scipy.integrate").quad
    for r in (0.0, 5.0, 12.0, 17.0):
        integral, _ = quad(
            lambda s, r=r: closed_form(R, s) * math.exp((s - r) / 2.0), r, R, limit=200
        )
        assert 1.0 + 0.5 * integral == pytest.approx(float(closed_form(R, r)), rel=1e-9)


def test_profile_error_shrinks_with_grid():
    def max_err(m, scheme):
        prof = solve_cone_profile(R, m, scheme=scheme)
        grid = np.asarray(prof.grid)
        vals = np.asarray(prof.values)
        return float(np.max(np.abs(vals - closed_form(R, grid)) / closed_form(R, grid)))

    for scheme in ("order3", "trapezoid"):
        e1, e2 = max_err(512, scheme), max_err(1024, scheme)
        assert e2 <= e1 / 2


def test_profile_nonincreasing_and_exponential_tail():
    prof = solve_cone_profile(R, 1024)
    vals = np.asarray(prof.values)
    assert np.all(np.diff(vals) <= 1e-12)
    grid = np.asarray(prof.grid)
    window = (grid > 2) & (grid < 10)
    slope = np.polyfit(grid[window], np.log(vals[window]), 1)[0]
    assert slope == pytest.approx(-1.0, abs=0.01)


def test_profile_rejects_tiny_grid():
    with pytest.raises(ValueError):
        solve_cone_profile(R, 32)


def test_angle_integral_reduction():
    ctx = TheoryContext(40000, R)
    for s, r in ((17.5, 16.0), (18.0, 17.0)):
        mc, approx = angle_integral_check(ctx, s, r, samples=200_000, seed=3)
        assert 0.5 < mc / approx < 2.0


# ---------------------------------------------------------------------------
# peering probability


def test_peering_prob_inner_region_is_one():
    exact, approx = peering_prob(R / 2 - 1e-9, R)
    assert exact == 1.0 and approx == 1.0


def test_peering_prob_rim_approximation():
    _, approx = peering_prob(R, R)
    assert approx == pytest.approx(math.exp(-R / 2))


def test_peering_prob_continuous_at_half_radius():
    _, approx = peering_prob(R / 2, R)
    assert approx == 1.0
    exact_just_outside, _ = peering_prob(R / 2 + 1e-9, R)
    assert exact_just_outside == pytest.approx(1.0, abs=1e-2)


def test_peering_prob_exact_within_factor_two_of_approx():
    for r2 in np.linspace(R / 2 + 1, R, 40):
        exact, approx = peering_prob(float(r2), R)
        assert 0.5 < exact / approx < 2.0


def test_peering_prob_domain():
    with pytest.raises(ValueError):
        peering_prob(R + 1.0, R)


def test_peering_prob_by_cone():
    prof = solve_cone_profile(R, 512)
    pivot = prof.value_at(R / 2)
    assert peering_prob_by_cone(pivot, prof) == 1.0
    assert peering_prob_by_cone(2 * pivot, prof) == 1.0
    assert peering_prob_by_cone(pivot / 2, prof) == pytest.approx(0.5)
    assert peering_prob_by_cone(pivot / 4, prof) == pytest.approx(0.25)
    ts = np.linspace(1, 2 * pivot, 50)
    vals = [peering_prob_by_cone(float(t), prof) for t in ts]
    assert all(a <= b + 1e-12 for a, b in zip(vals, vals[1:]))


# ---------------------------------------------------------------------------
# phi estimation


def synthetic_graph(nodes, peer_count, cp_count):
    pairs = itertools.combinations(range(nodes), 2)
    peer = [next(pairs) for _ in range(peer_count)]
    cp = [next(pairs) for _ in range(cp_count)]
    return build_graph(peer, cp, node_count=nodes)


def test_estimate_phis_may_2012_counts():
    g = synthetic_graph(41203, 57158, 83374)
    params = estimate_phis(g, c1=1.1, c2=0.05)
    assert float(params.phi_p) == pytest.approx(0.5436, abs=1e-4)
    assert float(params.phi_r) == pytest.approx(0.03604, abs=1e-5)
    assert clique_size_bound(params) == pytest.approx(43.2, abs=0.1)


def test_estimate_phis_zero_constants():
    g = synthetic_graph(10, 3, 4)
    params = estimate_phis(g, c1=0, c2=0)
    assert params.phi_p == 0 and params.phi_r == 0


def test_estimate_phis_scaling_linearity():
    g = synthetic_graph(10, 3, 4)
    a = estimate_phis(g, c1=1.1, c2=0.05)
    b = estimate_phis(g, c1=2.2, c2=0.1)
    assert b.phi_p == 2 * a.phi_p and b.phi_r == 2 * a.phi_r


def test_estimate_phis_needs_both_edge_types():
    with pytest.raises(ValueError):
        estimate_phis(build_graph([(0, 1)], []))
    with pytest.raises(ValueError):
        estimate_phis(build_graph([], [(0, 1)]))


# ---------------------------------------------------------------------------
# bound time series


def test_bound_timeseries_single_snapshot():
    g = build_graph([(0, 1), (2, 3)], [(2, 0), (3, 1), (4, 2)])
    rows = bound_timeseries([("t0", g)])
    assert len(rows) == 1
    row = rows[0]
    assert isinstance(row, BoundRow)
    assert row.clique_size_bound > 0
    assert row.measured_max_cone == int(g.cone_sizes().max())
    assert row.measured_clique_size == 2


def test_bound_timeseries_more_peering_raises_clique_bound():
    sparse = synthetic_graph(30, 4, 10)
    dense = synthetic_graph(30, 12, 10)
    rows = bound_timeseries([("sparse", sparse), ("dense", dense)])
    assert rows[1].phi_r < rows[0].phi_r
    assert rows[1].clique_size_bound > rows[0].clique_size_bound


def test_bound_timeseries_requires_snapshots():
    with pytest.raises(ValueError):
        bound_timeseries([])
