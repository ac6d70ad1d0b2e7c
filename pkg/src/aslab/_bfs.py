"""Breadth-first-search kernels over CSR adjacency.

Per-source BFS statistics (distance sum, eccentricity, reached count) with a
compiled parallel path when numba is importable and a plain-Python fallback
otherwise.  Sources are independent, so the parallel schedule cannot change
the result.
"""

from __future__ import annotations

import numpy as np

try:
    import numba
    from numba import get_num_threads, njit, prange

    # The portable threading layer; avoids probing optional TBB/OMP backends.
    numba.config.THREADING_LAYER = "workqueue"
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False


def bfs_stats(
    indptr: np.ndarray,
    indices: np.ndarray,
    sources: np.ndarray,
    n: int,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-source (sum of finite distances, eccentricity, reached count).

    Reached count includes the source itself; eccentricity is over reached
    nodes only.
    """
    sources = np.asarray(sources, dtype=np.int64)
    if HAVE_NUMBA and n * len(sources) >= 1_000_000:
        return _bfs_stats_numba(
            indptr.astype(np.int64), indices.astype(np.int32), sources, n
        )
    return _bfs_stats_python(indptr, indices, sources, n)


def _bfs_stats_python(indptr, indices, sources, n):
    sum_d = np.zeros(len(sources), dtype=np.int64)
    ecc = np.zeros(len(sources), dtype=np.int64)
    reached = np.zeros(len(sources), dtype=np.int64)
    for k, s in enumerate(sources):
        dist = np.full(n, -1, dtype=np.int64)
        dist[s] = 0
        queue = [int(s)]
        head = 0
        total = 0
        far = 0
        while head < len(queue):
            x = queue[head]
            head += 1
            dx = dist[x]
            for j in range(indptr[x], indptr[x + 1]):
                y = indices[j]
                if dist[y] < 0:
                    dist[y] = dx + 1
                    total += dx + 1
                    far = max(far, dx + 1)
                    queue.append(int(y))
        sum_d[k] = total
        ecc[k] = far
        reached[k] = len(queue)
    return sum_d, ecc, reached


if HAVE_NUMBA:

    @njit(parallel=True)
    def _bfs_stats_numba(indptr, indices, sources, n):  # pragma: no cover - compiled
        ns = sources.shape[0]
        sum_d = np.zeros(ns, dtype=np.int64)
        ecc = np.zeros(ns, dtype=np.int64)
        reached = np.zeros(ns, dtype=np.int64)
        nchunks = min(ns, max(1, 4 * get_num_threads()))
        for c in prange(nchunks):
            # Per-chunk scratch reused across sources via a visit stamp.
            dist = np.zeros(n, dtype=np.int32)
            stamp = np.full(n, -1, dtype=np.int32)
            queue = np.empty(n, dtype=np.int32)
            lo = c * ns // nchunks
            hi = (c + 1) * ns // nchunks
            for k in range(lo, hi):
                s = sources[k]
                stamp[s] = k
                dist[s] = 0
                queue[0] = s
                head = 0
                tail = 1
                total = np.int64(0)
                far = 0
                while head < tail:
                    x = queue[head]
                    head += 1
                    dx = dist[x] + 1
                    for j in range(indptr[x], indptr[x + 1]):
                        y = indices[j]
                        if stamp[y] != k:
                            stamp[y] = k
                            dist[y] = dx
                            total += dx
                            if dx > far:
                                far = dx
                            queue[tail] = y
                            tail += 1
                sum_d[k] = total
                ecc[k] = far
                reached[k] = tail
        return sum_d, ecc, reached


def connected_components(indptr: np.ndarray, indices: np.ndarray, n: int) -> np.ndarray:
    """Component label per node on the undirected graph."""
    labels = np.full(n, -1, dtype=np.int64)
    current = 0
    for start in range(n):
        if labels[start] >= 0:
            continue
        labels[start] = current
        queue = [start]
        head = 0
        while head < len(queue):
            x = queue[head]
            head += 1
            for j in range(indptr[x], indptr[x + 1]):
                y = int(indices[j])
                if labels[y] < 0:
                    labels[y] = current
                    queue.append(y)
        current += 1
    return labels
