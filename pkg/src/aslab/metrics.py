"""Empirical graph statistics: degree/cone distributions, clustering,
distance metrics, peering likelihood and cone-overlap sampling.

All operations are pure reads over an immutable graph.  Sampled modes are
reproducible from (seed, samples) alone.  Curves are emitted as CSV with
columns ``bin_low, bin_high, value, count``; for complementary cumulative
curves the value at a row is P(X > bin_low).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import IO, Iterable, Sequence

import numpy as np

from ._bfs import bfs_stats, connected_components
from .graph import LabeledAsGraph, top_clique


@dataclass(frozen=True)
class MetricsReport:
    nodes: int
    edges: int
    avg_degree: float
    avg_local_clustering: float
    global_transitivity: float
    avg_distance: float
    diameter: int
    largest_component_size: int
    tier1_count: int
    method_notes: str

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True)
class BinnedCurve:
    """Histogram-shaped curve: ``len(bin_edges) == len(values) + 1``."""

    bin_edges: tuple[float, ...]
    values: tuple[float, ...]
    counts: tuple[int, ...]

    def __post_init__(self):
        if len(self.bin_edges) != len(self.values) + 1:
            raise ValueError("bin_edges must have one more entry than values")
        if len(self.values) != len(self.counts):
            raise ValueError("values and counts must align")
        if any(a > b for a, b in zip(self.bin_edges, self.bin_edges[1:])):
            raise ValueError("bin_edges must be ascending")

    def rows(self) -> list[tuple[float, float, float, int]]:
        return [
            (self.bin_edges[i], self.bin_edges[i + 1], self.values[i], self.counts[i])
            for i in range(len(self.values))
        ]


def write_curve_csv(curve: BinnedCurve, stream: IO[str], comments: Iterable[str] = ()) -> None:
    for line in comments:
        stream.write(f"# {line}\n")
    stream.write("bin_low,bin_high,value,count\n")
    for lo, hi, value, count in curve.rows():
        stream.write(f"{lo!r},{hi!r},{value!r},{count}\n")


# ---------------------------------------------------------------------------
# basic metrics


def basic_metrics(
    g: LabeledAsGraph,
    mode: str = "auto",
    exact_threshold: int = 50_000,
    sample_sources: int = 1_000,
    seed: int | None = None,
) -> MetricsReport:
    """Headline statistics of the unlabeled undirected graph.

    Distances come from BFS at every node when ``n <= exact_threshold``
    (or ``mode='exact'``); otherwise from a seeded source sample, in which
    case the diameter is a lower bound (sample eccentricities plus a
    double-sweep) and ``seed`` is required.
    """
    n = g.node_count
    if n == 0:
        raise ValueError("metrics are undefined on an empty graph")
    indptr, indices = g.undirected_csr()
    degrees = np.diff(indptr)
    edges = g.edge_count()

    tri_per_node, triangles = _triangle_counts(g, indptr, indices)
    possible = degrees * (degrees - 1) / 2.0
    with np.errstate(divide="ignore", invalid="ignore"):
        local = np.where(possible > 0, tri_per_node / possible, 0.0)
    # Headline clustering averages over nodes that can close a triangle
    # (degree >= 2); the all-nodes mean goes into the method notes.
    deg2 = possible > 0
    avg_local = float(local[deg2].mean()) if deg2.any() else 0.0
    avg_local_all = float(local.mean())
    triples = possible.sum()
    transitivity = float(3.0 * triangles / triples) if triples else 0.0

    labels = connected_components(indptr, indices, n)
    largest = int(np.bincount(labels).max())

    if mode == "auto":
        mode = "exact" if n <= exact_threshold else "sampled"
    if mode == "exact":
        sources = np.arange(n, dtype=np.int64)
        note_mode = f"distances=exact (all {n} sources)"
    elif mode == "sampled":
        if seed is None:
            raise ValueError("sampled distance mode requires a seed")
        rng = np.random.default_rng(seed)
        k = min(sample_sources, n)
        sources = np.sort(rng.choice(n, size=k, replace=False)).astype(np.int64)
        note_mode = f"distances=sampled ({k} sources, seed={seed}); diameter is a lower bound"
    else:
        raise ValueError(f"unknown mode {mode!r}")

    sum_d, ecc, reached = bfs_stats(indptr, indices, sources, n)
    pair_count = int((reached - 1).sum())
    avg_distance = float(sum_d.sum() / pair_count) if pair_count else 0.0
    diameter = int(ecc.max()) if len(ecc) else 0
    if mode == "sampled":
        diameter = max(diameter, _double_sweep(indptr, indices, n))

    notes = (
        f"{note_mode}; clustering over degree>=2 nodes "
        f"(mean over all nodes: {avg_local_all:.6g}); "
        f"triangles={int(triangles)}"
    )
    return MetricsReport(
        nodes=n,
        edges=edges,
        avg_degree=float(2.0 * edges / n),
        avg_local_clustering=avg_local,
        global_transitivity=transitivity,
        avg_distance=avg_distance,
        diameter=diameter,
        largest_component_size=largest,
        tier1_count=len(top_clique(g)),
        method_notes=notes,
    )


def _double_sweep(indptr, indices, n) -> int:
    """Classic diameter lower bound: BFS, hop to the farthest node, BFS again."""
    if n == 0:
        return 0
    dist = _bfs_distances(indptr, indices, 0, n)
    far = int(np.argmax(dist))
    dist2 = _bfs_distances(indptr, indices, far, n)
    return int(dist2.max(initial=0))


def _bfs_distances(indptr, indices, source: int, n: int) -> np.ndarray:
    dist = np.full(n, -1, dtype=np.int64)
    dist[source] = 0
    queue = [source]
    head = 0
    while head < len(queue):
        x = queue[head]
        head += 1
        for j in range(indptr[x], indptr[x + 1]):
            y = int(indices[j])
            if dist[y] < 0:
                dist[y] = dist[x] + 1
                queue.append(y)
    return dist


def _triangle_counts(
    g: LabeledAsGraph, indptr: np.ndarray, indices: np.ndarray
) -> tuple[np.ndarray, float]:
    """Per-node triangle counts via sorted-adjacency membership tests."""
    n = g.node_count
    corner = np.zeros(n, dtype=np.int64)
    total = 0
    edges = sorted(g.peer_edges) + [
        (min(c, p), max(c, p)) for c, p in g.cp_edges
    ]
    for u, v in edges:
        au = indices[indptr[u] : indptr[u + 1]]
        av = indices[indptr[v] : indptr[v + 1]]
        small, big = (au, av) if len(au) <= len(av) else (av, au)
        pos = np.searchsorted(big, small)
        pos[pos >= len(big)] = len(big) - 1
        common = small[big[pos] == small]
        k = len(common)
        if k:
            total += k
            corner[u] += k
            corner[v] += k
            np.add.at(corner, common, 1)
    # each triangle contributed +1 to every corner at each of its 3 edges
    return corner / 3.0, total / 3.0


# ---------------------------------------------------------------------------
# distribution curves


def _exact_ccdf(samples: np.ndarray) -> BinnedCurve:
    values, counts = np.unique(samples, return_counts=True)
    total = counts.sum()
    above = total - np.cumsum(counts)
    edges = tuple(float(v) for v in values) + (float(values[-1]) + 1.0,)
    return BinnedCurve(
        bin_edges=edges,
        values=tuple((above / total).tolist()),
        counts=tuple(int(c) for c in counts),
    )


def degree_ccdf(g: LabeledAsGraph) -> BinnedCurve:
    """P(degree > k) at every observed k, unbinned."""
    if g.node_count == 0:
        raise ValueError("empty graph")
    return _exact_ccdf(g.undirected_degrees())


def cone_ccdf(g: LabeledAsGraph) -> BinnedCurve:
    """P(|t(u)| > x) over all nodes, unbinned."""
    if g.node_count == 0:
        raise ValueError("empty graph")
    return _exact_ccdf(g.cone_sizes())


def loglog_slope(curve: BinnedCurve, decades: float = 2.0) -> float:
    """Least-squares slope of log10(value) vs log10(bin_low), fitted over a
    window of the given width centered on the populated x-range."""
    x = np.asarray(curve.bin_edges[:-1], dtype=float)
    y = np.asarray(curve.values, dtype=float)
    keep = (x > 0) & (y > 0)
    lx, ly = np.log10(x[keep]), np.log10(y[keep])
    if len(lx) < 3:
        raise ValueError("not enough positive points for a slope fit")
    span = lx.max() - lx.min()
    if span > decades:
        center = 0.5 * (lx.max() + lx.min())
        window = (lx >= center - decades / 2) & (lx <= center + decades / 2)
        lx, ly = lx[window], ly[window]
    slope, _ = np.polyfit(lx, ly, 1)
    return float(slope)


def peering_likelihood(g: LabeledAsGraph, log_bins: Sequence[float] | None = None) -> BinnedCurve:
    """Chance that a node pair peers, binned by the smaller customer cone.

    Denominators count every unordered pair exactly (via the sorted cone
    array: a node in ascending order realizes the pair minimum against all
    later nodes); numerators count peer edges landing in the bin.  Bins
    default to powers of two covering the observed cone sizes;
    ``log_bins`` overrides them with explicit ascending edges.
    """
    n = g.node_count
    if n < 2:
        raise ValueError("need at least two nodes")
    sizes = g.cone_sizes()
    if log_bins is None:
        max_size = int(sizes.max())
        nbins = max(1, math.ceil(math.log2(max_size + 1)))
        edges = np.array([2.0**i for i in range(nbins + 1)])
    else:
        edges = np.asarray(log_bins, dtype=float)
        if len(edges) < 2 or np.any(np.diff(edges) <= 0):
            raise ValueError("log_bins must be ascending with at least two edges")
        nbins = len(edges) - 1

    bin_of = np.digitize(sizes, edges) - 1
    order = np.argsort(sizes, kind="stable")
    later = n - 1 - np.arange(n)
    denom = np.zeros(nbins, dtype=np.int64)
    np.add.at(denom, bin_of[order], later)

    numer = np.zeros(nbins, dtype=np.int64)
    for u, v in g.peer_edges:
        m = min(sizes[u], sizes[v])
        numer[np.digitize(m, edges) - 1] += 1

    keep = denom > 0
    kept_edges = [float(edges[i]) for i in range(nbins) if keep[i]]
    kept_edges.append(float(edges[int(np.nonzero(keep)[0][-1]) + 1]))
    return BinnedCurve(
        bin_edges=tuple(kept_edges),
        values=tuple((numer[keep] / denom[keep]).tolist()),
        counts=tuple(int(c) for c in denom[keep]),
    )


# ---------------------------------------------------------------------------
# cone-overlap sampling


def overlap_ccdf(
    g: LabeledAsGraph, samples: int, seed: int
) -> tuple[BinnedCurve, float]:
    """Sample cone overlap between peer-neighbor pairs of a common node.

    Each sample draws a hub C (probability proportional to its total
    degree, conditioned on owning at least two peer edges -- the limit law
    of resampling ineligible hubs), then two distinct peer neighbors A, B
    uniformly, and records ``|t(A) & t(B)| / min(|t(A)|, |t(B)|)``.
    Returns the CCDF of that ratio plus the exact-zero fraction.
    """
    n = g.node_count
    if samples < 1:
        raise ValueError("need at least one sample")
    eligible = np.array([u for u in range(n) if len(g.peers[u]) >= 2], dtype=np.int64)
    if len(eligible) == 0:
        raise ValueError("no node has two peer edges; overlap sampling impossible")
    degrees = g.undirected_degrees()
    weights = degrees[eligible].astype(float)
    rng = np.random.default_rng(seed)
    hubs = rng.choice(eligible, size=samples, p=weights / weights.sum())

    sizes = g.cone_sizes()
    xs = np.empty(samples, dtype=float)
    pos = 0
    pair_memo: dict[tuple[int, int], float] = {}
    for hub, count in zip(*np.unique(hubs, return_counts=True)):
        nbrs = g.peers[int(hub)]
        m = len(nbrs)
        ii = rng.integers(0, m, size=count)
        jj = rng.integers(0, m - 1, size=count)
        jj = np.where(jj >= ii, jj + 1, jj)
        for i, j in zip(ii, jj):
            a, b = nbrs[int(i)], nbrs[int(j)]
            key = (a, b) if a < b else (b, a)
            x = pair_memo.get(key)
            if x is None:
                inter = g.cone_intersection_size(a, b)
                x = inter / min(int(sizes[a]), int(sizes[b]))
                pair_memo[key] = x
            xs[pos] = x
            pos += 1

    zero_fraction = float((xs == 0.0).mean())
    # bin 0 holds exactly the zeros: the smallest positive ratio is 1/n
    k = max(8, math.ceil(math.log2(max(2, n))) + 1)
    edges = [0.0] + [2.0**-i for i in range(k, -1, -1)]
    counts, _ = np.histogram(xs, bins=edges)
    values = tuple(float((xs > e).mean()) for e in edges[:-1])
    return (
        BinnedCurve(
            bin_edges=tuple(edges),
            values=values,
            counts=tuple(int(c) for c in counts),
        ),
        zero_fraction,
    )
