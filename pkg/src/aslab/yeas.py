"""Hyperbolic AS-topology generator (YEAS).

Nodes are laid out quasi-uniformly on a hyperbolic disk.  Phase one walks
nodes outward by radius: a node either joins the central mutually-peering
clique (when its summed distance to the clique stays below ``q`` times its
distance to the nearest already-placed node) or buys transit from that
nearest node.  Phase two adds a peer edge between every still-unlinked pair
closer than ``beta * radius``.  Output is deterministic for a fixed seed.

Distances are evaluated through hyperboloid coordinates
``(cosh r, sinh r cos phi, sinh r sin phi)`` so that all candidate-pair
scans (brute force or sector-pruned) share one elementwise expression and
therefore agree bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .graph import LabeledAsGraph, build_graph

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class YeasParams:
    """Generator knobs: size, clique control, layout shape and peering reach."""

    n: int
    q: float
    alpha: float
    beta: float
    radius: float
    seed: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if not 0.5 < self.alpha <= 1.0:
            raise ValueError("alpha must lie in (0.5, 1]")
        if not 0.0 < self.beta < 1.0:
            raise ValueError("beta must lie in (0, 1)")
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        if self.q <= 0:
            raise ValueError("q must be positive")


@dataclass(frozen=True)
class HyperbolicPoint:
    r: float
    phi: float

    def __post_init__(self):
        if self.r < 0:
            raise ValueError("radial coordinate must be nonnegative")
        if not 0.0 <= self.phi < _TWO_PI:
            raise ValueError("angle must lie in [0, 2*pi)")


class YeasResult(NamedTuple):
    graph: LabeledAsGraph
    clique: frozenset[int]
    coords: list[HyperbolicPoint]


def sample_point(params: YeasParams, rng: np.random.Generator) -> HyperbolicPoint:
    """Draw one point: radius by inverse transform of the quasi-uniform
    CDF ``(cosh(alpha r) - 1) / (cosh(alpha R) - 1)``, angle uniform."""
    u1 = rng.random()
    u2 = rng.random()
    r = math.acosh(1.0 + (math.cosh(params.alpha * params.radius) - 1.0) * u1) / params.alpha
    return HyperbolicPoint(r, _TWO_PI * u2)


def hdist(a: HyperbolicPoint, b: HyperbolicPoint) -> float:
    """Hyperbolic distance (law of cosines); argument clamped against rounding."""
    arg = math.cosh(a.r) * math.cosh(b.r) - math.sinh(a.r) * math.sinh(b.r) * math.cos(
        a.phi - b.phi
    )
    return math.acosh(max(arg, 1.0))


# ---------------------------------------------------------------------------
# layout


class _Layout:
    """Seeded point set sorted by radius, plus nearest-placed-node tables.

    ``nearest_dist[i]`` / ``nearest_idx[i]`` describe the closest node among
    those placed before ``i`` (radius order, ties by draw index); they do not
    depend on q, so clique calibration reuses one layout.
    """

    def __init__(self, n: int, alpha: float, radius: float, seed: int):
        self.n = n
        rng = np.random.default_rng(seed)
        us = rng.random((n, 2))
        r = np.arccosh(1.0 + (math.cosh(alpha * radius) - 1.0) * us[:, 0]) / alpha
        phi = _TWO_PI * us[:, 1]
        order = np.lexsort((np.arange(n), r))
        self.r = r[order]
        self.phi = phi[order]
        self.t = np.cosh(self.r)
        sinh_r = np.sinh(self.r)
        self.x = sinh_r * np.cos(self.phi)
        self.y = sinh_r * np.sin(self.phi)
        self.nearest_dist, self.nearest_idx = self._nearest_placed()

    def cosh_dist(self, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
        """cosh of pairwise distances, rows x cols, one broadcast expression."""
        return (
            self.t[rows][:, None] * self.t[cols][None, :]
            - self.x[rows][:, None] * self.x[cols][None, :]
            - self.y[rows][:, None] * self.y[cols][None, :]
        )

    def dist_to_one(self, i: int, others: np.ndarray) -> np.ndarray:
        arg = self.t[i] * self.t[others] - self.x[i] * self.x[others] - self.y[i] * self.y[others]
        return np.arccosh(np.maximum(arg, 1.0))

    def _nearest_placed(self) -> tuple[np.ndarray, np.ndarray]:
        n = self.n
        dist = np.full(n, np.inf)
        idx = np.full(n, -1, dtype=np.int64)
        if n < 2:
            return dist, idx
        block = max(16, int(16_000_000 // n))
        for lo in range(1, n, block):
            hi = min(n, lo + block)
            rows = np.arange(lo, hi)
            arg = self.cosh_dist(rows, np.arange(hi))
            arg[np.arange(hi)[None, :] >= rows[:, None]] = np.inf
            best = np.argmin(arg, axis=1)
            idx[lo:hi] = best
            vals = arg[np.arange(hi - lo), best]
            dist[lo:hi] = np.arccosh(np.maximum(vals, 1.0))
        return dist, idx


@lru_cache(maxsize=2)
def _layout(n: int, alpha: float, radius: float, seed: int) -> _Layout:
    return _Layout(n, alpha, radius, seed)


# ---------------------------------------------------------------------------
# phase 1: clique and transit trees


def _phase1(
    layout: _Layout,
    q: float,
    comparison_form: str,
    stop_above: int | None = None,
) -> list[int]:
    """Clique membership after the radius-ordered placement pass.

    ``comparison_form='scaled'`` admits a node when the clique-distance sum
    is below q times the nearest-placed distance; ``'literal'`` scales the
    sum instead (kept for compatibility, freezes the clique at one node for
    q >= 1).  ``stop_above`` aborts early once the clique outgrows it.
    """
    n = layout.n
    clique = [0]
    if n == 1:
        return clique
    ssum = layout.dist_to_one(0, np.arange(n))
    i = 1
    while i < n:
        if comparison_form == "scaled":
            passing = ssum[i:] < q * layout.nearest_dist[i:]
        elif comparison_form == "literal":
            passing = q * ssum[i:] < layout.nearest_dist[i:]
        else:
            raise ValueError(f"unknown comparison_form {comparison_form!r}")
        hits = np.flatnonzero(passing)
        if hits.size == 0:
            break
        w = i + int(hits[0])
        clique.append(w)
        if stop_above is not None and len(clique) > stop_above:
            return clique
        if w + 1 < n:
            rest = np.arange(w + 1, n)
            ssum[rest] += layout.dist_to_one(w, rest)
        i = w + 1
    return clique


# ---------------------------------------------------------------------------
# phase 2: distance-threshold peering


def _phase2_pairs(
    layout: _Layout, threshold: float, method: str
) -> list[tuple[int, int]]:
    if layout.n < 2:
        return []
    if method == "brute":
        return _phase2_brute(layout, threshold)
    if method == "bucket":
        return _phase2_bucket(layout, threshold)
    raise ValueError(f"unknown phase-2 method {method!r}")


def _mask_to_pairs(mask, rows, cols):
    ri, ci = np.nonzero(mask)
    return rows[ri], cols[ci]


def _phase2_brute(layout: _Layout, threshold: float) -> list[tuple[int, int]]:
    n = layout.n
    cosh_t = math.cosh(threshold)
    out_u: list[np.ndarray] = []
    out_v: list[np.ndarray] = []
    block = max(16, int(16_000_000 // n))
    for lo in range(0, n - 1, block):
        hi = min(n - 1, lo + block)
        rows = np.arange(lo, hi)
        arg = layout.cosh_dist(rows, np.arange(n))
        mask = arg < cosh_t
        mask[np.arange(n)[None, :] <= rows[:, None]] = False
        uu, vv = _mask_to_pairs(mask, rows, np.arange(n))
        out_u.append(uu)
        out_v.append(vv)
    return _pairs_list(out_u, out_v)


def _phase2_bucket(layout: _Layout, threshold: float) -> list[tuple[int, int]]:
    """Sector-pruned scan, exact: a sector pair is skipped only when
    ``cosh d >= cosh(dr) + 2 sinh(r_u) sinh(r_v) sin^2(dphi/2)`` already
    exceeds the threshold for the most favorable radii and angle gap.
    Central nodes (which reach across all angles) are scanned row-wise.
    """
    n = layout.n
    cosh_t = math.cosh(threshold)
    r_core = threshold / 2.0 + 4.0
    core = np.flatnonzero(layout.r < r_core)
    rest = np.flatnonzero(layout.r >= r_core)
    out_u: list[np.ndarray] = []
    out_v: list[np.ndarray] = []

    core_set = set(core.tolist())
    all_idx = np.arange(n)
    block = max(1, int(16_000_000 // max(n, 1)))
    for lo in range(0, len(core), block):
        sub = core[lo : lo + block]
        arg = layout.cosh_dist(sub, all_idx)
        mask = arg < cosh_t
        # keep (c, j) once: j after c, or j a non-core node of smaller index
        keep = all_idx[None, :] > sub[:, None]
        if core_set:
            noncore_cols = np.ones(n, dtype=bool)
            noncore_cols[core] = False
            keep |= noncore_cols[None, :] & (all_idx[None, :] < sub[:, None])
        mask &= keep
        uu, vv = _mask_to_pairs(mask, sub, all_idx)
        out_u.append(uu)
        out_v.append(vv)

    if len(rest) >= 2:
        nb = int(max(8, min(4096, len(rest) // 48)))
        width = _TWO_PI / nb
        bucket_of = np.minimum((layout.phi[rest] / width).astype(np.int64), nb - 1)
        order = np.argsort(bucket_of, kind="stable")
        sorted_nodes = rest[order]
        sorted_buckets = bucket_of[order]
        starts = np.searchsorted(sorted_buckets, np.arange(nb))
        ends = np.searchsorted(sorted_buckets, np.arange(nb), side="right")
        members = [sorted_nodes[starts[b] : ends[b]] for b in range(nb)]
        min_sinh = np.array(
            [np.sinh(layout.r[m]).min() if len(m) else np.inf for m in members]
        )
        global_min_sinh = min_sinh.min()
        for k in range(nb // 2 + 1):
            gap = max(0, k - 1) * width
            floor_term = 2.0 * math.sin(gap / 2.0) ** 2
            if floor_term * global_min_sinh * global_min_sinh >= cosh_t:
                break
            for a in range(nb):
                b = (a + k) % nb
                if k == 0 and a != b:
                    continue
                if 2 * k == nb and a > b:
                    continue
                ma, mb = members[a], members[b]
                if not len(ma) or not len(mb):
                    continue
                if floor_term * min_sinh[a] * min_sinh[b] >= cosh_t:
                    continue
                arg = layout.cosh_dist(ma, mb)
                mask = arg < cosh_t
                if a == b:
                    mask &= mb[None, :] > ma[:, None]
                uu, vv = _mask_to_pairs(mask, ma, mb)
                out_u.append(uu)
                out_v.append(vv)

    return _pairs_list(out_u, out_v)


def _pairs_list(out_u, out_v) -> list[tuple[int, int]]:
    if not out_u:
        return []
    u = np.concatenate(out_u)
    v = np.concatenate(out_v)
    lo = np.minimum(u, v)
    hi = np.maximum(u, v)
    return sorted(zip(lo.tolist(), hi.tolist()))


# ---------------------------------------------------------------------------
# generator


def generate(
    params: YeasParams,
    include_peering_phase: bool = True,
    phase2_method: str = "auto",
    comparison_form: str = "scaled",
) -> YeasResult:
    """Run the generator; nodes are labeled by increasing radius.

    Phase one yields the clique plus one provider edge per remaining node
    (the provider is always the nearest earlier-placed node, hence closer
    to the disk center).  Phase two peers every unlinked pair with distance
    below ``beta * radius``; it is a pure predicate over pairs, so the scan
    strategy (``'brute'``, ``'bucket'`` or ``'auto'``) cannot change the
    result.
    """
    layout = _layout(params.n, params.alpha, params.radius, params.seed)
    clique = _phase1(layout, params.q, comparison_form)
    clique_set = frozenset(clique)

    peer_edges: set[tuple[int, int]] = set()
    for i, u in enumerate(clique):
        for v in clique[i + 1 :]:
            peer_edges.add((min(u, v), max(u, v)))
    cp_edges = [
        (w, int(layout.nearest_idx[w]))
        for w in range(params.n)
        if w not in clique_set
    ]

    if include_peering_phase and params.n > 1:
        method = phase2_method
        if method == "auto":
            method = "brute" if params.n <= 4096 else "bucket"
        existing = set(peer_edges)
        existing.update((min(c, p), max(c, p)) for c, p in cp_edges)
        for u, v in _phase2_pairs(layout, params.beta * params.radius, method):
            if (u, v) not in existing:
                peer_edges.add((u, v))

    graph = build_graph(sorted(peer_edges), sorted(cp_edges), node_count=params.n)
    coords = [
        HyperbolicPoint(float(layout.r[i]), float(min(layout.phi[i], np.nextafter(_TWO_PI, 0))))
        for i in range(params.n)
    ]
    return YeasResult(graph, clique_set, coords)


class CalibrationError(RuntimeError):
    """No q value reproduced the requested clique size."""


def calibrate_q(
    params: YeasParams,
    target_clique_size: int = 16,
    q_max: float = 1e6,
) -> float:
    """Find q such that phase one yields exactly ``target_clique_size``
    clique members, by bisection on the (almost always monotone) clique
    size, with a fine scan fallback across the final bracket.
    """
    if target_clique_size < 1:
        raise ValueError("target clique size must be positive")
    if target_clique_size > params.n:
        raise CalibrationError("target clique size exceeds node count")
    layout = _layout(params.n, params.alpha, params.radius, params.seed)

    def clique_size(q: float) -> int:
        return len(_phase1(layout, q, "scaled", stop_above=target_clique_size))

    lo = 1.0
    hi = max(4.0, float(target_clique_size))
    while clique_size(hi) < target_clique_size:
        hi *= 2.0
        if hi > q_max:
            raise CalibrationError(
                f"clique size {target_clique_size} not reachable below q={q_max}"
            )
    if clique_size(hi) == target_clique_size:
        return hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        size = clique_size(mid)
        if size < target_clique_size:
            lo = mid
        elif size > target_clique_size:
            hi = mid
        else:
            return mid
    # The size function jumped across the target; sweep the bracket.
    for q in np.linspace(lo, hi, 4096):
        if clique_size(float(q)) == target_clique_size:
            return float(q)
    raise CalibrationError(
        f"clique size jumps past {target_clique_size} near q={lo!r}"
    )


def generate_calibrated(
    params: YeasParams,
    target_clique_size: int = 16,
    **kwargs,
) -> tuple[YeasResult, float]:
    """Calibrate q for the target clique size, then generate."""
    q = calibrate_q(params, target_clique_size)
    result = generate(replace(params, q=q), **kwargs)
    return result, q
