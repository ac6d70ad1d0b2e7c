"""Labeled AS-graph data model.

Nodes are dense integers ``0..node_count-1``.  Edges carry one of two
business roles: undirected *peer* edges and directed *customer->provider*
edges (stored as ``(customer, provider)`` pairs).  Graphs are immutable
after construction; every operation here is a pure read and safe under
concurrent use (internal caches are idempotent).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

INFINITE_DISTANCE = math.inf

# Largest node count for which descendant bitsets may be materialized
# (n**2/8 bytes); beyond this cone-set queries refuse rather than thrash.
_BITSET_NODE_LIMIT = 200_000


class GraphConstructionError(ValueError):
    """Raised when edge lists violate the labeled-graph invariants."""


class LabeledAsGraph:
    """Immutable AS-level graph with peer and customer-provider edges.

    Use :func:`build_graph` to construct one; the constructor assumes
    already-validated input.
    """

    __slots__ = (
        "node_count",
        "peer_edges",
        "cp_edges",
        "peers",
        "providers",
        "customers",
        "_cache",
    )

    def __init__(
        self,
        node_count: int,
        peer_edges: frozenset[tuple[int, int]],
        cp_edges: frozenset[tuple[int, int]],
    ):
        self.node_count = node_count
        self.peer_edges = peer_edges
        self.cp_edges = cp_edges
        peers: list[list[int]] = [[] for _ in range(node_count)]
        providers: list[list[int]] = [[] for _ in range(node_count)]
        customers: list[list[int]] = [[] for _ in range(node_count)]
        for u, v in peer_edges:
            peers[u].append(v)
            peers[v].append(u)
        for c, p in cp_edges:
            providers[c].append(p)
            customers[p].append(c)
        self.peers = tuple(tuple(sorted(a)) for a in peers)
        self.providers = tuple(tuple(sorted(a)) for a in providers)
        self.customers = tuple(tuple(sorted(a)) for a in customers)
        self._cache: dict[str, object] = {}

    # -- basic derived views -------------------------------------------------

    def undirected_neighbors(self, u: int) -> tuple[int, ...]:
        """All neighbors of ``u`` regardless of edge role, sorted."""
        return tuple(sorted(self.peers[u] + self.providers[u] + self.customers[u]))

    def undirected_csr(self) -> tuple[np.ndarray, np.ndarray]:
        """CSR (indptr, indices) of the unlabeled undirected graph."""
        cached = self._cache.get("csr")
        if cached is None:
            degs = np.zeros(self.node_count + 1, dtype=np.int64)
            rows = []
            for u in range(self.node_count):
                nbrs = sorted(self.peers[u] + self.providers[u] + self.customers[u])
                degs[u + 1] = len(nbrs)
                rows.append(nbrs)
            indptr = np.cumsum(degs)
            if rows:
                flat = [v for row in rows for v in row]
                indices = np.asarray(flat, dtype=np.int32)
            else:
                indices = np.zeros(0, dtype=np.int32)
            cached = (indptr, indices)
            self._cache["csr"] = cached
        return cached  # type: ignore[return-value]

    def undirected_degrees(self) -> np.ndarray:
        indptr, _ = self.undirected_csr()
        return np.diff(indptr)

    def edge_count(self) -> int:
        return len(self.peer_edges) + len(self.cp_edges)

    def has_edge(self, u: int, v: int) -> bool:
        a, b = (u, v) if u < v else (v, u)
        return (a, b) in self.peer_edges or (u, v) in self.cp_edges or (v, u) in self.cp_edges

    # -- customer cones ------------------------------------------------------

    def cone_sizes(self) -> np.ndarray:
        """|t(u)| for every node: u plus its customer-side descendants."""
        sizes = self._cache.get("cone_sizes")
        if sizes is None:
            sizes = self._cone_index().sizes
            self._cache["cone_sizes"] = sizes
        return sizes  # type: ignore[return-value]

    def cone_array(self, u: int) -> np.ndarray:
        """Customer cone of ``u`` as a sorted integer array."""
        return self._cone_index().cone_array(u)

    def cone_intersection_size(self, u: int, v: int) -> int:
        return self._cone_index().intersection_size(u, v)

    def _cone_index(self) -> "_ConeIndex":
        idx = self._cache.get("cone_index")
        if idx is None:
            idx = _build_cone_index(self)
            self._cache["cone_index"] = idx
        return idx  # type: ignore[return-value]

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return (
            f"LabeledAsGraph(n={self.node_count}, "
            f"peer={len(self.peer_edges)}, cp={len(self.cp_edges)})"
        )


def build_graph(
    peer_pairs: Iterable[tuple[int, int]],
    cp_pairs: Iterable[tuple[int, int]],
    node_count: int | None = None,
) -> LabeledAsGraph:
    """Validate edge lists and build an immutable labeled graph.

    ``cp_pairs`` are ``(customer, provider)`` ordered pairs.  A node pair
    may appear in at most one role and orientation; violations raise
    :class:`GraphConstructionError` naming the offending pair.
    """
    roles: dict[tuple[int, int], str] = {}
    peer_edges: set[tuple[int, int]] = set()
    cp_edges: set[tuple[int, int]] = set()
    max_node = -1

    for a, b in peer_pairs:
        if a == b:
            raise GraphConstructionError(f"self-loop peer edge ({a}, {b})")
        key = (a, b) if a < b else (b, a)
        if key in roles:
            kind = "duplicate" if roles[key] == "peer" else "conflicting"
            raise GraphConstructionError(f"{kind} edge roles for pair {key}")
        roles[key] = "peer"
        peer_edges.add(key)
        max_node = max(max_node, a, b)

    for c, p in cp_pairs:
        if c == p:
            raise GraphConstructionError(f"self-loop customer-provider edge ({c}, {p})")
        key = (c, p) if c < p else (p, c)
        if key in roles:
            if roles[key] == "peer":
                raise GraphConstructionError(f"conflicting edge roles for pair {key}")
            kind = "duplicate" if (c, p) in cp_edges else "conflicting"
            raise GraphConstructionError(f"{kind} customer-provider pair {key}")
        roles[key] = "cp"
        cp_edges.add((c, p))
        max_node = max(max_node, c, p)

    inferred = max_node + 1
    if node_count is None:
        node_count = inferred
    elif node_count < inferred:
        raise GraphConstructionError(
            f"node_count={node_count} too small for edge referencing node {max_node}"
        )
    if any(x < 0 for key in roles for x in key):
        raise GraphConstructionError("negative node identifier in edge list")

    return LabeledAsGraph(node_count, frozenset(peer_edges), frozenset(cp_edges))


# ---------------------------------------------------------------------------
# customer cones


def customer_cone(g: LabeledAsGraph, u: int) -> set[int]:
    """Nodes reachable from ``u`` by provider->customer steps, plus ``u``."""
    _check_node(g, u)
    return set(g.cone_array(u).tolist())


def _down_closure(g: LabeledAsGraph, seeds: Iterable[int]) -> set[int]:
    """Closure of ``seeds`` under provider->customer traversal (seeds included)."""
    seen = set(seeds)
    stack = list(seen)
    while stack:
        x = stack.pop()
        for c in g.customers[x]:
            if c not in seen:
                seen.add(c)
                stack.append(c)
    return seen


class _ConeIndex:
    """Precomputed customer-cone sizes plus set/intersection queries."""

    def __init__(self, sizes: np.ndarray):
        self.sizes = sizes

    def cone_array(self, u: int) -> np.ndarray:
        raise NotImplementedError

    def intersection_size(self, u: int, v: int) -> int:
        raise NotImplementedError


class _ForestConeIndex(_ConeIndex):
    """Cones in a customer-provider forest are contiguous DFS intervals."""

    def __init__(self, order: np.ndarray, tin: np.ndarray, tout: np.ndarray):
        super().__init__((tout - tin).astype(np.int64))
        self.order = order
        self.tin = tin
        self.tout = tout

    def cone_array(self, u: int) -> np.ndarray:
        return np.sort(self.order[self.tin[u]:self.tout[u]])

    def intersection_size(self, u: int, v: int) -> int:
        # Subtrees are nested or disjoint.
        if self.tin[v] <= self.tin[u] < self.tout[v]:
            return int(self.sizes[u])
        if self.tin[u] <= self.tin[v] < self.tout[u]:
            return int(self.sizes[v])
        return 0


class _BitsetConeIndex(_ConeIndex):
    """Descendant sets as packed bit rows; exact on any DAG or cyclic input."""

    def __init__(self, bits: np.ndarray):
        counts = np.bitwise_count(bits).sum(axis=1).astype(np.int64)
        super().__init__(counts)
        self.bits = bits

    def cone_array(self, u: int) -> np.ndarray:
        row = np.unpackbits(self.bits[u].view(np.uint8), bitorder="little")
        return np.flatnonzero(row)

    def intersection_size(self, u: int, v: int) -> int:
        return int(np.bitwise_count(self.bits[u] & self.bits[v]).sum())


def _build_cone_index(g: LabeledAsGraph) -> _ConeIndex:
    n = g.node_count
    is_forest = all(len(g.providers[u]) <= 1 for u in range(n))
    if is_forest:
        idx = _try_forest_index(g)
        if idx is not None:
            return idx
    if n > _BITSET_NODE_LIMIT:
        raise MemoryError(
            f"cone sets on a non-forest graph with {n} nodes exceed the "
            f"supported size ({_BITSET_NODE_LIMIT})"
        )
    return _BitsetConeIndex(_descendant_bitsets(g))


def _try_forest_index(g: LabeledAsGraph) -> _ForestConeIndex | None:
    """Euler-interval index; None if a provider cycle hides from the roots."""
    n = g.node_count
    order = np.empty(n, dtype=np.int64)
    tin = np.empty(n, dtype=np.int64)
    tout = np.empty(n, dtype=np.int64)
    clock = 0
    roots = [u for u in range(n) if not g.providers[u]]
    for root in roots:
        # Iterative DFS with explicit exit records.
        stack: list[tuple[int, bool]] = [(root, False)]
        while stack:
            node, leaving = stack.pop()
            if leaving:
                tout[node] = clock
                continue
            tin[node] = clock
            order[clock] = node
            clock += 1
            stack.append((node, True))
            for c in reversed(g.customers[node]):
                stack.append((c, False))
    if clock != n:
        return None  # some nodes sit on a provider cycle
    return _ForestConeIndex(order, tin, tout)


def _descendant_bitsets(g: LabeledAsGraph) -> np.ndarray:
    """Packed reachability over customer edges, exact even with cycles."""
    n = g.node_count
    words = (n + 63) // 64
    comp = _scc_ids(g.customers, n)
    ncomp = int(comp.max()) + 1 if n else 0
    members: list[list[int]] = [[] for _ in range(ncomp)]
    for u in range(n):
        members[comp[u]].append(u)
    # Component DAG edges follow customer direction.
    comp_children: list[set[int]] = [set() for _ in range(ncomp)]
    for u in range(n):
        cu = comp[u]
        for c in g.customers[u]:
            if comp[c] != cu:
                comp_children[cu].add(comp[c])
    # Process components children-first.
    pending = np.array([len(s) for s in comp_children], dtype=np.int64)
    comp_parents: list[list[int]] = [[] for _ in range(ncomp)]
    for p, children in enumerate(comp_children):
        for c in children:
            comp_parents[c].append(p)
    queue = [c for c in range(ncomp) if pending[c] == 0]
    topo: list[int] = []
    while queue:
        c = queue.pop()
        topo.append(c)
        for p in comp_parents[c]:
            pending[p] -= 1
            if pending[p] == 0:
                queue.append(p)
    comp_bits = np.zeros((ncomp, words), dtype=np.uint64)
    for c in topo:
        row = comp_bits[c]
        for u in members[c]:
            row[u >> 6] |= np.uint64(1) << np.uint64(u & 63)
        for child in comp_children[c]:
            np.bitwise_or(row, comp_bits[child], out=row)
    bits = np.zeros((n, words), dtype=np.uint64)
    for u in range(n):
        bits[u] = comp_bits[comp[u]]
    return bits


def _scc_ids(adj: Sequence[Sequence[int]], n: int) -> np.ndarray:
    """Strongly connected component ids (iterative Tarjan)."""
    index = np.full(n, -1, dtype=np.int64)
    low = np.zeros(n, dtype=np.int64)
    on_stack = np.zeros(n, dtype=bool)
    comp = np.full(n, -1, dtype=np.int64)
    stack: list[int] = []
    counter = 0
    ncomp = 0
    for start in range(n):
        if index[start] != -1:
            continue
        work: list[tuple[int, int]] = [(start, 0)]
        while work:
            node, ei = work[-1]
            if ei == 0:
                index[node] = low[node] = counter
                counter += 1
                stack.append(node)
                on_stack[node] = True
            advanced = False
            for j in range(ei, len(adj[node])):
                nxt = adj[node][j]
                if index[nxt] == -1:
                    work[-1] = (node, j + 1)
                    work.append((nxt, 0))
                    advanced = True
                    break
                if on_stack[nxt]:
                    low[node] = min(low[node], index[nxt])
            if advanced:
                continue
            work.pop()
            if low[node] == index[node]:
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp[w] = ncomp
                    if w == node:
                        break
                ncomp += 1
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
    return comp


# ---------------------------------------------------------------------------
# valley-free reachability


def valley_free_distances_from(g: LabeledAsGraph, u: int) -> list[float]:
    """Communication price from ``u`` to every node: 0, 1 or inf.

    A valley-free walk climbs customer->provider edges, crosses at most one
    peer edge, then descends provider->customer edges, strictly in that
    order.  The price is 0 when some valley-free route leaves ``u`` through
    a peer or a customer, 1 when routes exist but all leave through a
    provider, and inf when no route exists.  Entry ``u`` itself is 0.
    """
    _check_node(g, u)
    # Free-first destinations: one peer hop then descents, or pure descents.
    free_seeds = set(g.peers[u]) | set(g.customers[u])
    free = _down_closure(g, free_seeds) if free_seeds else set()

    # Anything valley-free reachable: climb, optional peer, descend.
    up: set[int] = {u}
    stack = [u]
    while stack:
        x = stack.pop()
        for p in g.providers[x]:
            if p not in up:
                up.add(p)
                stack.append(p)
    after_peer: set[int] = set()
    for x in up:
        after_peer.update(g.peers[x])
    down_seeds: set[int] = set()
    for x in up | after_peer:
        down_seeds.update(g.customers[x])
    reachable = up | after_peer | (_down_closure(g, down_seeds) if down_seeds else set())

    out: list[float] = []
    for v in range(g.node_count):
        if v == u or v in free:
            out.append(0)
        elif v in reachable:
            out.append(1)
        else:
            out.append(INFINITE_DISTANCE)
    return out


def valley_free_distance(g: LabeledAsGraph, u: int, v: int) -> float:
    """Price of communication from ``u`` to ``v`` (0, 1 or inf); u != v."""
    if u == v:
        raise ValueError("valley_free_distance requires distinct endpoints")
    _check_node(g, v)
    return valley_free_distances_from(g, u)[v]


def has_provider_cycle(g: LabeledAsGraph) -> bool:
    """True iff the customer->provider directed subgraph contains a cycle."""
    n = g.node_count
    state = bytearray(n)  # 0 unseen, 1 in progress, 2 done
    for start in range(n):
        if state[start]:
            continue
        stack: list[tuple[int, int]] = [(start, 0)]
        state[start] = 1
        while stack:
            node, ei = stack[-1]
            if ei < len(g.providers[node]):
                stack[-1] = (node, ei + 1)
                nxt = g.providers[node][ei]
                if state[nxt] == 1:
                    return True
                if state[nxt] == 0:
                    state[nxt] = 1
                    stack.append((nxt, 0))
            else:
                state[node] = 2
                stack.pop()
    return False


# ---------------------------------------------------------------------------
# spider verification


@dataclass(frozen=True)
class SpiderReport:
    """Outcome of checking the three spider-graph properties.

    ``clique_nodes`` are the provider-free nodes.  ``forest_ok`` holds when
    every other node has exactly one provider and its provider chain ends in
    the clique.  ``cone_disjointness_violations`` counts nodes owning a pair
    of peer edges whose far endpoints have overlapping customer cones
    (pairs touching a clique-internal peer edge are exempt and tallied in
    ``clique_internal_edges_exempted`` instead).
    """

    clique_nodes: frozenset[int]
    is_peer_clique: bool
    forest_ok: bool
    cone_disjointness_violations: int
    clique_internal_edges_exempted: int
    is_spider: bool


def verify_spider(
    g: LabeledAsGraph,
    pair_cap: int = 10_000,
    seed: int = 0,
) -> SpiderReport:
    """Check whether ``g`` is a spider graph.

    ``pair_cap`` bounds, per node, how many peer-neighbor pairs are tested
    for cone overlap; nodes with more pairs get a seeded sample (measured
    graphs can have peer-degree hubs).
    """
    n = g.node_count
    clique = frozenset(u for u in range(n) if not g.providers[u])

    is_peer_clique = True
    clique_sorted = sorted(clique)
    peer_set = g.peer_edges
    for i, a in enumerate(clique_sorted):
        for b in clique_sorted[i + 1:]:
            if (a, b) not in peer_set:
                is_peer_clique = False
                break
        if not is_peer_clique:
            break

    forest_ok = all(len(g.providers[u]) == 1 for u in range(n) if u not in clique)
    if forest_ok and n:
        reached = _down_closure(g, clique)
        forest_ok = len(reached) == n

    violations = 0
    exempted = 0
    for u in range(n):
        nbrs = g.peers[u]
        if u in clique:
            eligible = [v for v in nbrs if v not in clique]
            exempted += len(nbrs) - len(eligible)
        else:
            eligible = list(nbrs)
        m = len(eligible)
        if m < 2:
            continue
        total_pairs = m * (m - 1) // 2
        if total_pairs <= pair_cap:
            pairs = (
                (eligible[i], eligible[j])
                for i in range(m)
                for j in range(i + 1, m)
            )
        else:
            rng = np.random.default_rng((seed, u))
            ii = rng.integers(0, m, size=pair_cap)
            jj = rng.integers(0, m - 1, size=pair_cap)
            jj = np.where(jj >= ii, jj + 1, jj)
            pairs = ((eligible[int(i)], eligible[int(j)]) for i, j in zip(ii, jj))
        for v, w in pairs:
            if g.cone_intersection_size(v, w) > 0:
                violations += 1
                break

    # Clique-internal peer edges were counted once per endpoint.
    exempted //= 2

    return SpiderReport(
        clique_nodes=clique,
        is_peer_clique=is_peer_clique,
        forest_ok=forest_ok,
        cone_disjointness_violations=violations,
        clique_internal_edges_exempted=exempted,
        is_spider=is_peer_clique and forest_ok and violations == 0,
    )


def top_clique(g: LabeledAsGraph) -> frozenset[int]:
    """Largest mutually-peering set among provider-free nodes (exact search).

    Ties are broken toward the lexicographically smallest node set, so the
    result is deterministic.
    """
    candidates = [u for u in range(g.node_count) if not g.providers[u]]
    if not candidates:
        return frozenset()
    cand_set = set(candidates)
    adj = {u: {v for v in g.peers[u] if v in cand_set} for u in candidates}

    best: list[int] = [min(candidates)]

    def bron_kerbosch(r: set[int], p: set[int], x: set[int]) -> None:
        nonlocal best
        if not p and not x:
            if len(r) > len(best) or (len(r) == len(best) and sorted(r) < best):
                best = sorted(r)
            return
        if len(r) + len(p) < len(best):
            return
        pivot = max(p | x, key=lambda v: len(adj[v] & p))
        for v in sorted(p - adj[pivot]):
            bron_kerbosch(r | {v}, p & adj[v], x & adj[v])
            p = p - {v}
            x = x | {v}

    bron_kerbosch(set(), set(candidates), set())
    return frozenset(best)


def spider_coverage(g: LabeledAsGraph) -> float:
    """Fraction of nodes reached top-down from the detected top clique."""
    if g.node_count == 0:
        raise ValueError("spider_coverage is undefined on an empty graph")
    clique = top_clique(g)
    if not clique:
        return 0.0
    reached = _down_closure(g, clique)
    return len(reached) / g.node_count


def _check_node(g: LabeledAsGraph, u: int) -> None:
    if not 0 <= u < g.node_count:
        raise ValueError(f"node {u} out of range for graph with {g.node_count} nodes")
