"""Peering formation game on labeled AS graphs.

Players pick, per opposite player, one of three actions: do nothing, offer
to buy transit (``P``) or offer to peer (``R``).  Offers induce a labeled
graph: a lone transit offer creates a customer->provider edge, mutual
interest of any kind creates a peer edge.  Players pay a valley-free
communication cost plus per-edge maintenance, and stability is checked
against unilateral strategy rewrites and bilateral edge edits.

Costs are exact rationals (maintenance prices given as floats are read as
their decimal literal), so tie comparisons never depend on a tolerance.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from decimal import Decimal
from enum import IntEnum
from fractions import Fraction
from functools import lru_cache
from math import inf, sqrt
from typing import Iterable, Mapping

import numpy as np

from .graph import (
    LabeledAsGraph,
    build_graph,
    has_provider_cycle,
    valley_free_distances_from,
    verify_spider,
)


class Action(IntEnum):
    NONE = 0
    P = 1  # offer to buy transit from the other player
    R = 2  # offer settlement-free peering


# Pair state codes used by the enumerator: 0 none, 1 peer,
# 2 lower-id node pays higher-id node, 3 the reverse.
_STATE = (
    (0, 3, 0),
    (2, 1, 1),
    (0, 1, 1),
)


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(Decimal(str(value)))
    return Fraction(value)


@dataclass(frozen=True)
class GameParams:
    """Maintenance prices: ``phi_p`` per provider link, ``phi_r`` per peer link."""

    phi_p: Fraction
    phi_r: Fraction

    def __init__(self, phi_p, phi_r):
        object.__setattr__(self, "phi_p", _as_fraction(phi_p))
        object.__setattr__(self, "phi_r", _as_fraction(phi_r))
        if self.phi_p < 0 or self.phi_r < 0:
            raise ValueError("maintenance costs must be nonnegative")


def _directed_pairs(n: int) -> list[tuple[int, int]]:
    return [(u, v) for u in range(n) for v in range(n) if v != u]


def _directed_index(n: int, u: int, v: int) -> int:
    return u * (n - 1) + (v if v < u else v - 1)


@dataclass(frozen=True)
class StrategyProfile:
    """One action per ordered player pair; immutable."""

    n: int
    actions: tuple[Action, ...]

    def __post_init__(self):
        expected = self.n * (self.n - 1)
        if len(self.actions) != expected:
            raise ValueError(
                f"profile for n={self.n} needs {expected} actions, got {len(self.actions)}"
            )

    @classmethod
    def uniform(cls, n: int, action: Action = Action.NONE) -> "StrategyProfile":
        return cls(n, tuple([action] * (n * (n - 1))))

    @classmethod
    def from_dict(
        cls,
        n: int,
        entries: Mapping[tuple[int, int], Action],
        default: Action = Action.NONE,
    ) -> "StrategyProfile":
        actions = [default] * (n * (n - 1))
        for (u, v), a in entries.items():
            if u == v or not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"invalid ordered pair ({u}, {v})")
            actions[_directed_index(n, u, v)] = Action(a)
        return cls(n, tuple(actions))

    def action(self, u: int, v: int) -> Action:
        return self.actions[_directed_index(self.n, u, v)]

    def replace_row(self, u: int, row: Iterable[Action]) -> "StrategyProfile":
        """New profile with player ``u``'s whole action row replaced."""
        actions = list(self.actions)
        opponents = [v for v in range(self.n) if v != u]
        row = list(row)
        if len(row) != len(opponents):
            raise ValueError("row length must equal number of opponents")
        for v, a in zip(opponents, row):
            actions[_directed_index(self.n, u, v)] = Action(a)
        return StrategyProfile(self.n, tuple(actions))


def induce_graph(s: StrategyProfile) -> LabeledAsGraph:
    """Graph produced by simultaneous announcement of the strategies.

    A transit offer met with silence becomes a customer->provider edge; two
    offers of any kind become a peer edge; everything else stays empty.
    """
    peer = []
    cp = []
    for u in range(s.n):
        for v in range(u + 1, s.n):
            a = s.action(u, v)
            b = s.action(v, u)
            state = _STATE[a][b]
            if state == 1:
                peer.append((u, v))
            elif state == 2:
                cp.append((u, v))
            elif state == 3:
                cp.append((v, u))
    return build_graph(peer, cp, node_count=s.n)


def cost(g: LabeledAsGraph, u: int, params: GameParams):
    """Player cost: mean valley-free price to others plus edge upkeep.

    Returns an exact :class:`~fractions.Fraction`, or ``inf`` when some
    destination is unreachable.
    """
    if g.node_count < 2:
        raise ValueError("cost needs a game with at least two players")
    d = valley_free_distances_from(g, u)
    ones = 0
    for v in range(g.node_count):
        if v == u:
            continue
        if d[v] == inf:
            return inf
        ones += d[v]
    return (
        Fraction(ones, g.node_count)
        + params.phi_p * len(g.providers[u])
        + params.phi_r * len(g.peers[u])
    )


def cost_vector(g: LabeledAsGraph, params: GameParams) -> list:
    return [cost(g, u, params) for u in range(g.node_count)]


# ---------------------------------------------------------------------------
# pairwise stability


@dataclass(frozen=True)
class StabilityResult:
    stable: bool
    violated_clause: str | None = None
    detail: str | None = None

    def __bool__(self) -> bool:
        return self.stable


def _graph_without_edge(g: LabeledAsGraph, a: int, b: int) -> LabeledAsGraph:
    key = (a, b) if a < b else (b, a)
    peer = [e for e in g.peer_edges if e != key]
    cp = [e for e in g.cp_edges if e not in ((a, b), (b, a))]
    return build_graph(peer, cp, node_count=g.node_count)


def _graph_with_edge(g: LabeledAsGraph, a: int, b: int, kind: str) -> LabeledAsGraph:
    peer = list(g.peer_edges)
    cp = list(g.cp_edges)
    if kind == "peer":
        peer.append((min(a, b), max(a, b)))
    else:
        cp.append((a, b))  # a pays b
    return build_graph(peer, cp, node_count=g.node_count)


def is_pairwise_stable(
    s: StrategyProfile,
    params: GameParams,
    include_cp_additions: bool = False,
) -> StabilityResult:
    """Check the four pairwise-stable equilibrium clauses for a profile.

    (a) no player gains by rewriting its whole action row, (b) no endpoint
    of an existing edge strictly gains by its deletion, (c) for every
    absent pair at least one endpoint weakly resists adding a peer edge
    (``include_cp_additions`` extends this to provider-edge additions),
    (d) the customer-provider subgraph is acyclic.  The first violated
    clause is reported.
    """
    n = s.n
    g = induce_graph(s)
    memo: dict[tuple[frozenset, frozenset], list] = {}

    def costs_of(graph: LabeledAsGraph) -> list:
        key = (graph.peer_edges, graph.cp_edges)
        found = memo.get(key)
        if found is None:
            found = cost_vector(graph, params)
            memo[key] = found
        return found

    base = costs_of(g)

    for u in range(n):
        for row in itertools.product(tuple(Action), repeat=n - 1):
            dev = s.replace_row(u, row)
            if costs_of(induce_graph(dev))[u] < base[u]:
                return StabilityResult(
                    False, "nash", f"player {u} gains by row {tuple(int(a) for a in row)}"
                )

    for a, b in sorted(g.peer_edges) + sorted(g.cp_edges):
        reduced = costs_of(_graph_without_edge(g, a, b))
        if reduced[a] < base[a] or reduced[b] < base[b]:
            return StabilityResult(False, "deletion", f"edge ({a}, {b}) worth deleting")

    kinds = ["peer"] + (["cp_ab", "cp_ba"] if include_cp_additions else [])
    for a in range(n):
        for b in range(a + 1, n):
            if g.has_edge(a, b):
                continue
            for kind in kinds:
                if kind == "peer":
                    enlarged = costs_of(_graph_with_edge(g, a, b, "peer"))
                elif kind == "cp_ab":
                    enlarged = costs_of(_graph_with_edge(g, a, b, "cp"))
                else:
                    enlarged = costs_of(_graph_with_edge(g, b, a, "cp"))
                if enlarged[a] < base[a] and enlarged[b] < base[b]:
                    return StabilityResult(
                        False, "addition", f"both endpoints gain by adding {kind} ({a}, {b})"
                    )

    if has_provider_cycle(g):
        return StabilityResult(False, "provider_cycle", "customer-provider cycle present")

    return StabilityResult(True)


# ---------------------------------------------------------------------------
# clear-cut peer edges


def is_cpe(
    g: LabeledAsGraph,
    edge: tuple[int, int],
    params: GameParams,
    n: int | None = None,
) -> bool:
    """Clear-cut peer edge test.

    The edge must be cheap against both endpoints' cone weights
    (``phi_r < min(|t(u)|, |t(v)|) / n``) and no third party may cover it:
    no ``w`` peering with one endpoint while holding the other endpoint in
    its customer cone.
    """
    u, v = edge
    key = (u, v) if u < v else (v, u)
    if key not in g.peer_edges:
        raise ValueError(f"({u}, {v}) is not a peer edge")
    if n is None:
        n = g.node_count
    sizes = g.cone_sizes()
    if not params.phi_r < Fraction(int(min(sizes[u], sizes[v])), n):
        return False
    for a, b in ((u, v), (v, u)):
        # w peers with a and holds b in its cone.
        for w in g.peers[a]:
            if w in (u, v):
                continue
            if _cone_contains(g, w, b):
                return False
    return True


def _cone_contains(g: LabeledAsGraph, w: int, x: int) -> bool:
    idx = g._cone_index()
    forest_tin = getattr(idx, "tin", None)
    if forest_tin is not None:
        return bool(idx.tin[w] <= idx.tin[x] < idx.tout[w])
    bits = idx.bits  # type: ignore[attr-defined]
    return bool((bits[w, x >> 6] >> np.uint64(x & 63)) & np.uint64(1))


# ---------------------------------------------------------------------------
# corollary bounds


def cone_size_bound(n: int, clique_size: int, params: GameParams) -> Fraction:
    """Upper bound on clique members' cone sizes in a stable state."""
    if clique_size < 1:
        raise ValueError("clique_size must be at least 1")
    return n * (params.phi_p - params.phi_r * (clique_size - 1) + 1)


def clique_size_bound(params: GameParams) -> float:
    """Upper bound on the top-clique size in a stable state; needs phi_r > 0."""
    if params.phi_r == 0:
        raise ValueError("clique size bound is undefined for phi_r = 0")
    a = float(params.phi_p)
    r = float(params.phi_r)
    s = a + r + 1.0
    return (s + sqrt(s * s - 4.0 * r)) / (2.0 * r)


# ---------------------------------------------------------------------------
# exhaustive enumeration


class _GraphTable:
    """Parameter-independent precomputation for all labeled graphs on n nodes."""

    def __init__(self, n: int):
        self.n = n
        self.pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
        self.npairs = len(self.pairs)
        self.w4 = [4**k for k in range(self.npairs)]
        self.graphs: list[LabeledAsGraph] = []
        self.states_by_gid: list[tuple[int, ...]] = []
        size = 4**self.npairs
        d1 = np.zeros((size, n), dtype=np.int16)
        has_inf = np.zeros((size, n), dtype=bool)
        cyclic = np.zeros(size, dtype=bool)
        nprov = np.zeros((size, n), dtype=np.int16)
        npeer = np.zeros((size, n), dtype=np.int16)
        for gid in range(size):
            states = self._decode(gid)
            peer = []
            cp = []
            for k, (i, j) in enumerate(self.pairs):
                st = states[k]
                if st == 1:
                    peer.append((i, j))
                elif st == 2:
                    cp.append((i, j))
                elif st == 3:
                    cp.append((j, i))
            g = build_graph(peer, cp, node_count=n)
            self.graphs.append(g)
            self.states_by_gid.append(states)
            cyclic[gid] = has_provider_cycle(g)
            for u in range(n):
                d = valley_free_distances_from(g, u)
                ones = 0
                bad = False
                for v in range(n):
                    if v == u:
                        continue
                    if d[v] == inf:
                        bad = True
                    elif d[v] == 1:
                        ones += 1
                d1[gid, u] = ones
                has_inf[gid, u] = bad
                nprov[gid, u] = len(g.providers[u])
                npeer[gid, u] = len(g.peers[u])
        self.d1 = d1
        self.has_inf = has_inf
        self.cyclic = cyclic
        self.nprov = nprov
        self.npeer = npeer
        self._profiles: np.ndarray | None = None
        self._profile_gids: np.ndarray | None = None
        # Per-player deviation metadata: (slot of incoming action, pair
        # index, True when the player is the lower id of the pair).
        dpairs = _directed_pairs(n)
        didx = {p: t for t, p in enumerate(dpairs)}
        pair_index = {p: k for k, p in enumerate(self.pairs)}
        self.meta: list[list[tuple[int, int, bool]]] = []
        for u in range(n):
            rows = []
            for v in range(n):
                if v == u:
                    continue
                k = pair_index[(u, v) if u < v else (v, u)]
                rows.append((didx[(v, u)], k, u < v))
            self.meta.append(rows)
        self.rows = list(itertools.product((0, 1, 2), repeat=n - 1))

    def _decode(self, gid: int) -> tuple[int, ...]:
        out = []
        for _ in range(self.npairs):
            out.append(gid & 3)
            gid >>= 2
        return tuple(out)

    def profiles(self) -> np.ndarray:
        if self._profiles is None:
            ntotal = 3 ** (2 * self.npairs)
            idx = np.arange(ntotal, dtype=np.int64)
            cols = []
            for t in range(2 * self.npairs):
                cols.append(((idx // 3**t) % 3).astype(np.int8))
            self._profiles = np.stack(cols, axis=1)
        return self._profiles

    def profile_gids(self) -> np.ndarray:
        if self._profile_gids is None:
            digits = self.profiles()
            state_np = np.asarray(_STATE, dtype=np.int64)
            dpairs = _directed_pairs(self.n)
            didx = {p: t for t, p in enumerate(dpairs)}
            gids = np.zeros(len(digits), dtype=np.int64)
            for k, (i, j) in enumerate(self.pairs):
                sij = digits[:, didx[(i, j)]]
                sji = digits[:, didx[(j, i)]]
                gids += state_np[sij, sji] * self.w4[k]
            self._profile_gids = gids
        return self._profile_gids

    def cost_lists(self, params: GameParams) -> list[list]:
        """costs[u][gid], exact Fractions with inf for unreachable states."""
        n = self.n
        out: list[list] = []
        for u in range(n):
            cu = []
            d1u = self.d1[:, u]
            infu = self.has_inf[:, u]
            pu = self.nprov[:, u]
            ru = self.npeer[:, u]
            for gid in range(len(self.graphs)):
                if infu[gid]:
                    cu.append(inf)
                else:
                    cu.append(
                        Fraction(int(d1u[gid]), n)
                        + params.phi_p * int(pu[gid])
                        + params.phi_r * int(ru[gid])
                    )
            out.append(cu)
        return out

    def bcd_ok(self, costs: list[list], include_cp_additions: bool) -> np.ndarray:
        """Graphs passing deletion, addition and no-cycle clauses."""
        size = len(self.graphs)
        ok = np.zeros(size, dtype=bool)
        for gid in range(size):
            if self.cyclic[gid]:
                continue
            states = self.states_by_gid[gid]
            good = True
            for k, st in enumerate(states):
                i, j = self.pairs[k]
                if st:
                    gdel = gid - st * self.w4[k]
                    if costs[i][gdel] < costs[i][gid] or costs[j][gdel] < costs[j][gid]:
                        good = False
                        break
                else:
                    additions = (1, 2, 3) if include_cp_additions else (1,)
                    for st_new in additions:
                        gadd = gid + st_new * self.w4[k]
                        if costs[i][gadd] < costs[i][gid] and costs[j][gadd] < costs[j][gid]:
                            good = False
                            break
                    if not good:
                        break
            ok[gid] = good
        return ok

    def profile_is_nash(self, digits_row: list[int], gid: int, costs: list[list]) -> bool:
        states = self.states_by_gid[gid]
        for u in range(self.n):
            c0 = costs[u][gid]
            meta = self.meta[u]
            for row in self.rows:
                gd = gid
                for t, (bslot, k, u_lower) in enumerate(meta):
                    a = row[t]
                    b = digits_row[bslot]
                    st_new = _STATE[a][b] if u_lower else _STATE[b][a]
                    gd += (st_new - states[k]) * self.w4[k]
                if costs[u][gd] < c0:
                    return False
        return True


@lru_cache(maxsize=3)
def _graph_table(n: int) -> _GraphTable:
    return _GraphTable(n)


def enumerate_equilibria(
    n: int,
    params: GameParams,
    include_cp_additions: bool = False,
) -> list[tuple[StrategyProfile, LabeledAsGraph]]:
    """All pairwise-stable states, one representative profile per graph.

    Exhausts every strategy profile (3 to the n(n-1) of them) with costs
    memoized per induced graph; refuses n outside {2, 3, 4} as the space
    is out of budget beyond that.
    """
    if n not in (2, 3, 4):
        raise ValueError("enumerate_equilibria supports n in {2, 3, 4} only")
    table = _graph_table(n)
    costs = table.cost_lists(params)
    ok = table.bcd_ok(costs, include_cp_additions)
    gids = table.profile_gids()
    digits = table.profiles()

    found: dict[int, StrategyProfile] = {}
    for pid in np.flatnonzero(ok[gids]):
        gid = int(gids[pid])
        if gid in found:
            continue
        row = digits[pid].tolist()
        if table.profile_is_nash(row, gid, costs):
            found[gid] = StrategyProfile(n, tuple(Action(x) for x in row))
    return [(found[gid], table.graphs[gid]) for gid in sorted(found)]


def contains_spanning_spider(g: LabeledAsGraph, edge_limit: int = 20) -> bool:
    """True if some subset of the edges forms a spanning spider graph."""
    edges = [("peer", e) for e in sorted(g.peer_edges)] + [
        ("cp", e) for e in sorted(g.cp_edges)
    ]
    if len(edges) > edge_limit:
        raise ValueError(f"exhaustive subgraph search capped at {edge_limit} edges")
    for mask in range(2 ** len(edges)):
        peer = []
        cp = []
        for b, (kind, e) in enumerate(edges):
            if mask >> b & 1:
                (peer if kind == "peer" else cp).append(e)
        sub = build_graph(peer, cp, node_count=g.node_count)
        if verify_spider(sub).is_spider:
            return True
    return False
