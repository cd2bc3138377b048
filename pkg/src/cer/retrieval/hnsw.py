"""Hierarchical navigable small-world graph for approximate nearest
neighbors under cosine similarity on unit vectors.

Layout: level-0 adjacency is one preallocated int32 matrix and the level-0
search/insert/prune kernels are numba-compiled, since essentially all work
happens there. Upper levels hold a ~1/ln(M) fraction of nodes and stay as
plain lists handled in numpy. Node levels come from the usual geometric
distribution with a seeded generator, so builds are reproducible.

New nodes connect to up to 2M neighbors at level 0 (M above), selected
from the ef_construction beam with the diversity heuristic: a candidate is
kept only if it is closer to the query than to every already-kept
neighbor, and remaining slots are backfilled with the closest pruned
candidates. Overflowing neighbor lists are re-selected without backfill.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit


@njit(cache=True)
def _dot(vecs, a, q):
    s = 0.0
    for j in range(q.shape[0]):
        s += vecs[a, j] * q[j]
    return s


@njit(cache=True)
def _heap_push(hd, hi, size, d, i):
    pos = size
    hd[pos] = d
    hi[pos] = i
    while pos > 0:
        parent = (pos - 1) >> 1
        if hd[parent] <= hd[pos]:
            break
        td = hd[parent]
        hd[parent] = hd[pos]
        hd[pos] = td
        ti = hi[parent]
        hi[parent] = hi[pos]
        hi[pos] = ti
        pos = parent
    return size + 1


@njit(cache=True)
def _heap_pop(hd, hi, size):
    size -= 1
    hd[0] = hd[size]
    hi[0] = hi[size]
    pos = 0
    while True:
        left = 2 * pos + 1
        if left >= size:
            break
        small = left
        right = left + 1
        if right < size and hd[right] < hd[left]:
            small = right
        if hd[pos] <= hd[small]:
            break
        td = hd[pos]
        hd[pos] = hd[small]
        hd[small] = td
        ti = hi[pos]
        hi[pos] = hi[small]
        hi[small] = ti
        pos = small
    return size


@njit(cache=True)
def _search0(vecs, nbr0, cnt0, count, q, entries, ef, skip):
    """Best-first beam search over the level-0 graph.

    Distances are negated dot products (smaller = closer). Returns
    (distances, node ids) ascending by distance, at most ef entries.
    """
    visited = np.zeros(count, dtype=np.uint8)
    if 0 <= skip < count:
        visited[skip] = 1
    cand_cap = count + entries.shape[0] + 1
    cand_d = np.empty(cand_cap, dtype=np.float64)
    cand_i = np.empty(cand_cap, dtype=np.int32)
    res_d = np.empty(ef + 1, dtype=np.float64)  # holds negated distances (max-heap)
    res_i = np.empty(ef + 1, dtype=np.int32)
    csize = 0
    rsize = 0
    for t in range(entries.shape[0]):
        e = entries[t]
        if visited[e] == 1:
            continue
        visited[e] = 1
        d = -_dot(vecs, e, q)
        csize = _heap_push(cand_d, cand_i, csize, d, e)
        if rsize < ef:
            rsize = _heap_push(res_d, res_i, rsize, -d, e)
        elif d < -res_d[0]:
            rsize = _heap_pop(res_d, res_i, rsize)
            rsize = _heap_push(res_d, res_i, rsize, -d, e)
    while csize > 0:
        d = cand_d[0]
        node = cand_i[0]
        csize = _heap_pop(cand_d, cand_i, csize)
        if rsize >= ef and d > -res_d[0]:
            break
        cnt = cnt0[node]
        for jj in range(cnt):
            nb = nbr0[node, jj]
            if visited[nb] == 1:
                continue
            visited[nb] = 1
            dn = -_dot(vecs, nb, q)
            if rsize < ef:
                rsize = _heap_push(res_d, res_i, rsize, -dn, nb)
                csize = _heap_push(cand_d, cand_i, csize, dn, nb)
            elif dn < -res_d[0]:
                rsize = _heap_pop(res_d, res_i, rsize)
                rsize = _heap_push(res_d, res_i, rsize, -dn, nb)
                csize = _heap_push(cand_d, cand_i, csize, dn, nb)
    out_d = np.empty(rsize, dtype=np.float64)
    out_i = np.empty(rsize, dtype=np.int32)
    for i in range(rsize):
        out_d[i] = -res_d[i]
        out_i[i] = res_i[i]
    order = np.argsort(out_d, kind="mergesort")
    return out_d[order], out_i[order]


@njit(cache=True)
def _select(vecs, ids, dists, n, m, backfill):
    """Diversity heuristic over candidates sorted ascending by distance."""
    selected = np.empty(m, dtype=np.int32)
    pruned = np.empty(n, dtype=np.int32)
    ns = 0
    npr = 0
    for i in range(n):
        if ns >= m:
            break
        c = ids[i]
        dq = dists[i]
        good = True
        for j in range(ns):
            dcs = -_dot(vecs, c, vecs[selected[j]])
            if dcs <= dq:
                good = False
                break
        if good:
            selected[ns] = c
            ns += 1
        else:
            pruned[npr] = c
            npr += 1
    if backfill:
        i = 0
        while ns < m and i < npr:
            selected[ns] = pruned[i]
            ns += 1
            i += 1
    return selected[:ns].copy()


@njit(cache=True)
def _insert0(vecs, nbr0, cnt0, count, idx, entries, ef, m0):
    """Search, link, and prune for a new node at level 0."""
    res_d, res_i = _search0(vecs, nbr0, cnt0, count, vecs[idx], entries, ef, idx)
    sel = _select(vecs, res_i, res_d, res_i.shape[0], m0, True)
    ns = sel.shape[0]
    for j in range(ns):
        nbr0[idx, j] = sel[j]
    cnt0[idx] = ns
    for j in range(ns):
        s = sel[j]
        c = cnt0[s]
        dup = False
        for t in range(c):
            if nbr0[s, t] == idx:
                dup = True
                break
        if dup:
            continue
        if c < m0:
            nbr0[s, c] = idx
            cnt0[s] = c + 1
        else:
            nc = c + 1
            cd = np.empty(nc, dtype=np.float64)
            ci = np.empty(nc, dtype=np.int32)
            for t in range(c):
                ci[t] = nbr0[s, t]
                cd[t] = -_dot(vecs, nbr0[s, t], vecs[s])
            ci[c] = idx
            cd[c] = -_dot(vecs, idx, vecs[s])
            order = np.argsort(cd, kind="mergesort")
            sel2 = _select(vecs, ci[order], cd[order], nc, m0, False)
            for t in range(sel2.shape[0]):
                nbr0[s, t] = sel2[t]
            cnt0[s] = sel2.shape[0]


class HnswGraph:
    def __init__(
        self,
        dim: int,
        m: int = 16,
        ef_construction: int = 200,
        seed: int = 0,
        capacity: int = 1024,
    ):
        self.dim = dim
        self.m = m
        self.m0 = 2 * m
        self.ef_construction = ef_construction
        self._mult = 1.0 / math.log(m)
        self._rng = np.random.default_rng(seed)
        self._count = 0
        self._entry = -1
        self._max_level = -1
        capacity = max(capacity, 8)
        self._vecs = np.zeros((capacity, dim), dtype=np.float32)
        self._nbr0 = np.full((capacity, self.m0), -1, dtype=np.int32)
        self._nbr0_count = np.zeros(capacity, dtype=np.int32)
        self._levels: list[int] = []
        # per node: neighbor lists for levels 1..node_level (empty for level-0 nodes)
        self._upper: list[list[list[int]]] = []

    def __len__(self) -> int:
        return self._count

    def _grow(self, needed: int) -> None:
        cap = self._vecs.shape[0]
        if needed <= cap:
            return
        new_cap = max(needed, cap * 2)
        self._vecs = np.vstack(
            [self._vecs, np.zeros((new_cap - cap, self.dim), dtype=np.float32)]
        )
        pad = np.full((new_cap - cap, self.m0), -1, dtype=np.int32)
        self._nbr0 = np.vstack([self._nbr0, pad])
        self._nbr0_count = np.concatenate(
            [self._nbr0_count, np.zeros(new_cap - cap, dtype=np.int32)]
        )

    # ------------------------------------------------------------------
    # Upper levels (sparse, numpy paths)
    # ------------------------------------------------------------------

    def _greedy_descend(self, q: np.ndarray, entry: int, level: int) -> int:
        cur = entry
        cur_dist = -float(self._vecs[cur] @ q)
        improved = True
        while improved:
            improved = False
            nbrs = self._upper[cur][level - 1]
            if not nbrs:
                break
            dists = -(self._vecs[nbrs] @ q)
            best = int(np.argmin(dists))
            if dists[best] < cur_dist:
                cur = nbrs[best]
                cur_dist = float(dists[best])
                improved = True
        return cur

    def _search_upper(
        self, q: np.ndarray, entries: list[int], ef: int, level: int
    ) -> list[tuple[float, int]]:
        from heapq import heapify, heappop, heappush, heapreplace

        visited = set(entries)
        dists = -(self._vecs[entries] @ q)
        candidates = list(zip(dists.tolist(), entries))
        heapify(candidates)
        results = [(-d, n) for d, n in candidates]
        heapify(results)
        while len(results) > ef:
            heappop(results)
        while candidates:
            d, node = heappop(candidates)
            if len(results) >= ef and d > -results[0][0]:
                break
            fresh = [n for n in self._upper[node][level - 1] if n not in visited]
            if not fresh:
                continue
            visited.update(fresh)
            nd = -(self._vecs[fresh] @ q)
            for dist_n, n in zip(nd.tolist(), fresh):
                if len(results) < ef:
                    heappush(results, (-dist_n, n))
                    heappush(candidates, (dist_n, n))
                elif dist_n < -results[0][0]:
                    heapreplace(results, (-dist_n, n))
                    heappush(candidates, (dist_n, n))
        return sorted((-negd, n) for negd, n in results)

    def _select_upper(
        self, candidates: list[tuple[float, int]], m: int, backfill: bool
    ) -> list[int]:
        selected: list[int] = []
        pruned: list[int] = []
        for d, c in candidates:
            if len(selected) >= m:
                break
            if selected:
                dist_to_sel = -(self._vecs[selected] @ self._vecs[c])
                if not np.all(dist_to_sel > d):
                    pruned.append(c)
                    continue
            selected.append(c)
        if backfill:
            for c in pruned:
                if len(selected) >= m:
                    break
                selected.append(c)
        return selected

    # ------------------------------------------------------------------
    # Insert / search
    # ------------------------------------------------------------------

    def add(self, vec: np.ndarray) -> int:
        """Insert one unit vector; returns its node index."""
        self._grow(self._count + 1)
        idx = self._count
        self._vecs[idx] = np.asarray(vec, dtype=np.float32)
        level = int(-math.log(self._rng.random()) * self._mult)
        self._levels.append(level)
        self._upper.append([[] for _ in range(level)])
        self._count += 1

        if self._entry < 0:
            self._entry = idx
            self._max_level = level
            return idx

        q = self._vecs[idx]
        cur = self._entry
        for lev in range(self._max_level, level, -1):
            cur = self._greedy_descend(q, cur, lev)

        entries = [cur]
        for lev in range(min(level, self._max_level), 0, -1):
            candidates = self._search_upper(q, entries, self.ef_construction, lev)
            candidates = [(d, c) for d, c in candidates if c != idx]
            nbrs = self._select_upper(candidates, self.m, backfill=True)
            self._upper[idx][lev - 1] = nbrs
            for nbr in nbrs:
                existing = self._upper[nbr][lev - 1]
                if idx in existing:
                    continue
                existing.append(idx)
                if len(existing) > self.m:
                    d_nb = -(self._vecs[existing] @ self._vecs[nbr])
                    ranked = sorted(zip(d_nb.tolist(), existing))
                    self._upper[nbr][lev - 1] = self._select_upper(
                        ranked, self.m, backfill=False
                    )
            entries = [c for _, c in candidates] or entries

        _insert0(
            self._vecs,
            self._nbr0,
            self._nbr0_count,
            self._count,
            idx,
            np.asarray(entries, dtype=np.int32),
            self.ef_construction,
            self.m0,
        )

        if level > self._max_level:
            self._entry = idx
            self._max_level = level
        return idx

    def search(self, q: np.ndarray, k: int, ef: int = 100) -> list[tuple[int, float]]:
        """Top-k (node index, cosine score), best first."""
        if self._count == 0:
            return []
        q = np.asarray(q, dtype=np.float32)
        cur = self._entry
        for lev in range(self._max_level, 0, -1):
            cur = self._greedy_descend(q, cur, lev)
        dists, ids = _search0(
            self._vecs,
            self._nbr0,
            self._nbr0_count,
            self._count,
            q,
            np.asarray([cur], dtype=np.int32),
            max(ef, k),
            -1,
        )
        return [(int(i), -float(d)) for d, i in zip(dists[:k], ids[:k])]

    # ------------------------------------------------------------------
    # Persistence: vectors are stored by the owning index; only the graph
    # topology is serialized here.
    # ------------------------------------------------------------------

    def links_to_dict(self) -> dict:
        return {
            "m": self.m,
            "ef_construction": self.ef_construction,
            "entry": self._entry,
            "max_level": self._max_level,
            "levels": self._levels,
            "neighbors0": [
                self._nbr0[i, : self._nbr0_count[i]].tolist()
                for i in range(self._count)
            ],
            "upper": self._upper,
        }

    @classmethod
    def from_links(cls, vectors: np.ndarray, links: dict) -> "HnswGraph":
        graph = cls(
            dim=vectors.shape[1],
            m=links["m"],
            ef_construction=links["ef_construction"],
            capacity=max(len(vectors), 8),
        )
        graph._count = len(vectors)
        graph._vecs[: len(vectors)] = vectors.astype(np.float32, copy=False)
        graph._entry = links["entry"]
        graph._max_level = links["max_level"]
        graph._levels = list(links["levels"])
        graph._upper = [[list(l) for l in levels] for levels in links["upper"]]
        for i, nbrs in enumerate(links["neighbors0"]):
            n = len(nbrs)
            graph._nbr0[i, :n] = nbrs
            graph._nbr0_count[i] = n
        return graph
