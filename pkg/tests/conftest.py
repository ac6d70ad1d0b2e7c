"""Shared test helpers: independent oracles and random graph builders."""

from __future__ import annotations

import math
import random

from aslab.graph import LabeledAsGraph, build_graph


def vf_distance_oracle(g: LabeledAsGraph, u: int, v: int) -> float:
    """Valley-free price by brute force: enumerate every simple path from
    u to v, classify its move sequence against the up*/peer?/down* pattern,
    then apply the first-edge case analysis.  Independent of the BFS
    implementation under test; only usable on tiny graphs.
    """

    def moves(x):
        out = [(p, "up") for p in g.providers[x]]
        out += [(w, "peer") for w in g.peers[x]]
        out += [(c, "down") for c in g.customers[x]]
        return out

    valid_first_kinds = []
    stack = [(u, [u], [])]
    while stack:
        node, visited, kinds = stack.pop()
        for nxt, kind in moves(node):
            if nxt in visited:
                continue
            seq = kinds + [kind]
            if nxt == v:
                if _is_valley_free(seq):
                    valid_first_kinds.append(seq[0])
                continue
            stack.append((nxt, visited + [nxt], seq))

    if not valid_first_kinds:
        return math.inf
    if any(k in ("peer", "down") for k in valid_first_kinds):
        return 0
    return 1


def _is_valley_free(kinds: list[str]) -> bool:
    phase = 0  # 0 climbing, 1 after the single peer hop, 2 descending
    for k in kinds:
        if k == "up":
            if phase != 0:
                return False
        elif k == "peer":
            if phase != 0:
                return False
            phase = 1
        else:  # down
            phase = 2
    return True


def cone_oracle(g: LabeledAsGraph, u: int) -> set[int]:
    """Descendant set by fixpoint iteration over customer adjacency."""
    cone = {u}
    changed = True
    while changed:
        changed = False
        for x in list(cone):
            for c in g.customers[x]:
                if c not in cone:
                    cone.add(c)
                    changed = True
    return cone


def random_labeled_graph(rng: random.Random, max_nodes: int = 6) -> LabeledAsGraph:
    """Random small graph: each unordered pair gets one of four edge states."""
    n = rng.randint(2, max_nodes)
    peer = []
    cp = []
    for i in range(n):
        for j in range(i + 1, n):
            state = rng.choice(("none", "none", "peer", "cp", "pc"))
            if state == "peer":
                peer.append((i, j))
            elif state == "cp":
                cp.append((i, j))
            elif state == "pc":
                cp.append((j, i))
    return build_graph(peer, cp, node_count=n)
