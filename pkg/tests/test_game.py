import itertools
import math
import random
from fractions import Fraction

import pytest

from aslab.game import (
    Action,
    GameParams,
    StrategyProfile,
    clique_size_bound,
    cone_size_bound,
    contains_spanning_spider,
    cost,
    cost_vector,
    enumerate_equilibria,
    induce_graph,
    is_cpe,
    is_pairwise_stable,
)
from aslab.graph import build_graph, verify_spider

INF = math.inf
NONE, P, R = Action.NONE, Action.P, Action.R


def profile(n, entries):
    return StrategyProfile.from_dict(n, entries)


# ---------------------------------------------------------------------------
# graph induction


def test_lone_transit_offer_creates_cp_edge():
    g = induce_graph(profile(2, {(0, 1): P}))
    assert g.cp_edges == {(0, 1)}
    assert not g.peer_edges


def test_lone_peer_offer_creates_nothing():
    g = induce_graph(profile(2, {(0, 1): R}))
    assert not g.cp_edges and not g.peer_edges


def test_transit_offer_met_by_peering_becomes_peer():
    g = induce_graph(profile(2, {(0, 1): P, (1, 0): R}))
    assert g.peer_edges == {(0, 1)}
    assert not g.cp_edges


def test_mutual_offers_all_become_peer():
    for a, b in itertools.product((P, R), repeat=2):
        g = induce_graph(profile(2, {(0, 1): a, (1, 0): b}))
        assert g.peer_edges == {(0, 1)}


# ---------------------------------------------------------------------------
# cost


def test_cost_single_peer_edge():
    g = build_graph([(0, 1)], [])
    params = GameParams(0.5, 0.1)
    assert cost(g, 0, params) == Fraction(1, 10)


def test_cost_star_provider():
    # 1 and 2 both pay 0
    g = build_graph([], [(1, 0), (2, 0)])
    params = GameParams(0.5, 0.1)
    assert cost(g, 1, params) == Fraction(2, 3) + Fraction(1, 2)
    assert cost(g, 0, params) == 0


def test_cost_unreachable_is_infinite():
    g = build_graph([], [], node_count=2)
    assert cost(g, 0, GameParams(1, 1)) == INF


def test_cost_depends_only_on_induced_graph():
    params = GameParams(0.5, 0.1)
    s1 = profile(3, {(0, 1): R, (1, 0): R})
    s2 = profile(3, {(0, 1): P, (1, 0): P})
    g1, g2 = induce_graph(s1), induce_graph(s2)
    assert g1.peer_edges == g2.peer_edges and g1.cp_edges == g2.cp_edges
    assert cost_vector(g1, params) == cost_vector(g2, params)


# ---------------------------------------------------------------------------
# stability checker vs an independent brute-force oracle


def stability_oracle(s, params):
    """Naive re-derivation of all four clauses via graph edits."""
    g = induce_graph(s)
    base = cost_vector(g, params)
    n = s.n
    for u in range(n):
        for row in itertools.product(tuple(Action), repeat=n - 1):
            if cost_vector(induce_graph(s.replace_row(u, row)), params)[u] < base[u]:
                return False
    for a, b in list(g.peer_edges) + list(g.cp_edges):
        peers = [e for e in g.peer_edges if e != (min(a, b), max(a, b))]
        cps = [e for e in g.cp_edges if e not in ((a, b), (b, a))]
        trimmed = cost_vector(build_graph(peers, cps, node_count=n), params)
        if trimmed[a] < base[a] or trimmed[b] < base[b]:
            return False
    for a in range(n):
        for b in range(a + 1, n):
            if g.has_edge(a, b):
                continue
            grown = build_graph(
                list(g.peer_edges) + [(a, b)], list(g.cp_edges), node_count=n
            )
            vec = cost_vector(grown, params)
            if vec[a] < base[a] and vec[b] < base[b]:
                return False
    from aslab.graph import has_provider_cycle

    return not has_provider_cycle(g)


def test_two_player_peer_state_is_stable():
    params = GameParams(0.5, 0.1)
    s = profile(2, {(0, 1): R, (1, 0): R})
    assert is_pairwise_stable(s, params).stable


def test_two_player_transit_state_is_stable():
    params = GameParams(0.5, 0.1)
    s = profile(2, {(0, 1): P})
    assert is_pairwise_stable(s, params).stable


def test_peer_state_with_latent_transit_offer_is_unstable():
    # opponent's standing P lets the other side flip the edge to paid transit
    params = GameParams(0.5, 0.1)
    s = profile(2, {(0, 1): P, (1, 0): P})
    res = is_pairwise_stable(s, params)
    assert not res.stable and res.violated_clause == "nash"


def test_expensive_peer_triangle_matches_oracle():
    params = GameParams(0.5, 10)
    s = profile(3, {(u, v): R for u in range(3) for v in range(3) if u != v})
    assert is_pairwise_stable(s, params).stable == stability_oracle(s, params)


def test_checker_agrees_with_oracle_on_random_profiles():
    rng = random.Random(4242)
    params = GameParams(0.5, 0.1)
    for _ in range(40):
        n = rng.choice((2, 3))
        actions = tuple(Action(rng.randrange(3)) for _ in range(n * (n - 1)))
        s = StrategyProfile(n, actions)
        assert is_pairwise_stable(s, params).stable == stability_oracle(s, params)


# ---------------------------------------------------------------------------
# clear-cut peer edges


def cpe_fixture():
    # clique {0}; 1 and 2 pay 0; 3 pays 1; 4 pays 2; peer edge {3,4}
    return build_graph([(3, 4)], [(1, 0), (2, 0), (3, 1), (4, 2)])


def test_cpe_holds_for_cheap_disjoint_edge():
    assert is_cpe(cpe_fixture(), (3, 4), GameParams(0.5, 0.1), n=5)


def test_cpe_fails_when_peering_too_expensive():
    assert not is_cpe(cpe_fixture(), (3, 4), GameParams(0.5, 0.3), n=5)


def test_cpe_fails_when_covered_by_third_party():
    g = build_graph([(3, 4), (3, 2)], [(1, 0), (2, 0), (3, 1), (4, 2)])
    # 2 peers with 3 and holds 4 in its cone
    assert not is_cpe(g, (3, 4), GameParams(0.5, 0.1), n=5)


def test_cpe_requires_peer_edge():
    with pytest.raises(ValueError):
        is_cpe(cpe_fixture(), (1, 0), GameParams(0.5, 0.1), n=5)


# ---------------------------------------------------------------------------
# corollary bounds


def test_cone_size_bound_values():
    params = GameParams(0.5, 0.1)
    assert cone_size_bound(100, 2, params) == 140
    assert cone_size_bound(100, 1, params) == 150
    assert cone_size_bound(100, 7, GameParams(0.5, 0)) == 150


def test_clique_size_bound_values():
    assert clique_size_bound(GameParams(1, 1)) == pytest.approx((3 + math.sqrt(5)) / 2)
    assert clique_size_bound(GameParams(0.5436, 0.03604)) == pytest.approx(43.19, abs=0.05)


def test_clique_size_bound_rejects_free_peering():
    with pytest.raises(ValueError):
        clique_size_bound(GameParams(1, 0))


def test_clique_size_bound_monotonicity():
    grid = [0.05, 0.1, 0.3, 0.7, 1.5]
    for pp in grid:
        vals = [clique_size_bound(GameParams(pp, pr)) for pr in grid]
        assert all(a >= b for a, b in zip(vals, vals[1:]))
    for pr in grid:
        vals = [clique_size_bound(GameParams(pp, pr)) for pp in grid]
        assert all(a <= b for a, b in zip(vals, vals[1:]))


def test_bound_discriminant_nonnegative():
    rng = random.Random(3)
    for _ in range(200):
        pp, pr = rng.uniform(0, 5), rng.uniform(0, 5)
        assert (pp + pr + 1) ** 2 >= 4 * pr


# ---------------------------------------------------------------------------
# exhaustive enumeration


def test_enumeration_rejects_large_n():
    with pytest.raises(ValueError):
        enumerate_equilibria(5, GameParams(0.5, 0.1))


def test_two_player_equilibria_are_spiders():
    found = enumerate_equilibria(2, GameParams(0.5, 0.1))
    graphs = [g for _, g in found]
    assert len(graphs) == 3  # peer, and transit in either direction
    for g in graphs:
        assert verify_spider(g).is_spider
    for s, g in found:
        induced = induce_graph(s)
        assert induced.peer_edges == g.peer_edges
        assert induced.cp_edges == g.cp_edges
        assert is_pairwise_stable(s, GameParams(0.5, 0.1)).stable


def test_three_player_enumeration_matches_direct_checker():
    params = GameParams(0.5, 0.1)
    expected = set()
    for actions in itertools.product(tuple(Action), repeat=6):
        s = StrategyProfile(3, actions)
        if is_pairwise_stable(s, params).stable:
            g = induce_graph(s)
            expected.add((g.peer_edges, g.cp_edges))
    got = {(g.peer_edges, g.cp_edges) for _, g in enumerate_equilibria(3, params)}
    assert got == expected


def test_three_player_peer_edges_are_cpe_or_clique_internal():
    params = GameParams(0.5, 0.1)
    for _, g in enumerate_equilibria(3, params):
        clique = verify_spider(g).clique_nodes
        for u, v in g.peer_edges:
            assert (u in clique and v in clique) or is_cpe(g, (u, v), params, n=3)


def test_three_player_free_peering_all_reachable_states_span_spiders():
    params = GameParams(0.5, 0)
    for _, g in enumerate_equilibria(3, params):
        total = sum(cost_vector(g, params))
        if total != INF:
            assert contains_spanning_spider(g)


def test_corollary_bounds_hold_on_small_equilibria():
    for n in (2, 3):
        for pp in (0.3, 0.5, 1.0):
            for pr in (0.05, 0.1, 0.3):
                params = GameParams(pp, pr)
                for _, g in enumerate_equilibria(n, params):
                    clique = verify_spider(g).clique_nodes
                    sizes = g.cone_sizes()
                    bound = cone_size_bound(n, max(1, len(clique)), params)
                    assert all(sizes[u] <= bound + 1e-9 for u in clique)
                    assert len(clique) <= clique_size_bound(params)


def test_spanning_spider_search():
    # peer square: contains no spanning spider (two peer hops needed)
    square = build_graph([(0, 1), (1, 2), (2, 3), (3, 0)], [])
    assert not contains_spanning_spider(square)
    spider_plus = build_graph([(0, 1), (2, 3)], [(2, 0), (3, 1)])
    assert contains_spanning_spider(spider_plus)
