"""Rank machinery and the pivot family.

A seeded keyed hash stands in for the random permutation: algorithms only
ever compare ranks or maintain the top-r set, so the permutation is never
materialized. Smaller key = earlier (higher) rank. Ties are broken by node
id inside the key itself, so the order is always total and injective.
"""

from __future__ import annotations

import heapq

from .stream import NodeStream, PassConsumer, census, run_multiplexed

_MASK64 = (1 << 64) - 1
_TIMEOUT = object()


def mix64(x: int) -> int:
    """splitmix64 finalizer; full-avalanche 64-bit mixing."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (x ^ (x >> 31)) & _MASK64


def derive_seed(master: int, label: str) -> int:
    """Deterministically split one master seed into independent sub-seeds."""
    h = mix64(master & _MASK64)
    for ch in label:
        h = mix64(h ^ ord(ch))
    return h


class RankFunction:
    """Injective pseudo-random total order on nodes 0..n-1.

    key(u) encodes the pair (hash(u), u) lexicographically in one integer,
    so hash collisions still yield a strict order.
    """

    def __init__(self, seed: int, n: int):
        self.seed = seed & _MASK64
        self.n = n
        self._base = mix64(self.seed ^ 0x51A17B4C5D2FE3A9)

    def key(self, u: int) -> int:
        h = mix64(self._base ^ ((u * 0xD1B54A32D192ED03) & _MASK64))
        return h * self.n + u

    def rank_less(self, u: int, v: int) -> bool:
        """True iff u ranks ahead of (earlier than) v."""
        return self.key(u) < self.key(v)

    def order(self):
        """All nodes sorted best rank first. O(n) memory: test/offline use."""
        return sorted(range(self.n), key=self.key)


class ReferenceSet:
    """The r best-ranked nodes seen in a pass, with their keys.

    `ordered` lists (key, node) ascending, i.e. best rank first; membership
    and key lookups are O(1).
    """

    def __init__(self, pairs, capacity: int):
        self.capacity = capacity
        self.ordered = sorted(pairs)
        self._key_of = {node: key for key, node in self.ordered}
        if len(self._key_of) != len(self.ordered):
            raise ValueError("duplicate node in reference set")

    def __contains__(self, node) -> bool:
        return node in self._key_of

    def __len__(self) -> int:
        return len(self.ordered)

    def nodes(self):
        return [node for _, node in self.ordered]

    def key_of(self, node) -> int:
        return self._key_of[node]


class ReferenceSetBuilder(PassConsumer):
    """One-pass bounded max-heap keeping the r smallest keys (2 words each)."""

    name = "reference-set"
    declared_passes = 1

    def __init__(self, rf: RankFunction, r: int, accounting=None):
        if r < 1:
            raise ValueError("reference set capacity must be >= 1")
        self.rf = rf
        self.r = r
        self.accounting = accounting
        self._heap = []  # (-key, node): worst kept member on top

    def on_item(self, node):
        k = self.rf.key(node)
        heap = self._heap
        if len(heap) < self.r:
            heapq.heappush(heap, (-k, node))
            census(self.accounting, 2)
        elif -heap[0][0] > k:
            heapq.heapreplace(heap, (-k, node))

    def end_pass(self, p):
        self.finished = True

    def result(self) -> ReferenceSet:
        return ReferenceSet([(-nk, node) for nk, node in self._heap], self.r)


def build_reference_set(stream: NodeStream, rf: RankFunction, r: int, accounting=None):
    builder = ReferenceSetBuilder(rf, r, accounting)
    (refs,), _ = run_multiplexed(stream, [builder], accounting)
    return refs


class Clustering:
    """Node -> pivot assignment; pivots map to themselves."""

    def __init__(self, pivot_of):
        self.pivot_of = list(pivot_of)
        for u, p in enumerate(self.pivot_of):
            if self.pivot_of[p] != p:
                raise ValueError(f"pivot {p} of node {u} is not self-pivoting")

    def pivot(self, u: int) -> int:
        return self.pivot_of[u]

    def __len__(self):
        return len(self.pivot_of)

    def clusters(self):
        groups = {}
        for u, p in enumerate(self.pivot_of):
            groups.setdefault(p, set()).add(u)
        return list(groups.values())

    def blocks(self):
        """Clusters as a canonical partition: blocks sorted by minimum element."""
        return sorted((tuple(sorted(g)) for g in self.clusters()), key=lambda b: b[0])


def pivot_clustering(oracle, rf: RankFunction) -> Clustering:
    """Classic greedy pivot clustering: best-ranked unassigned node becomes a
    pivot and claims its unassigned neighbors."""
    n = oracle.n
    pivot_of = [-1] * n
    for u in sorted(range(n), key=rf.key):
        if pivot_of[u] == -1:
            pivot_of[u] = u
            for v in oracle.neighbors(u):
                if pivot_of[v] == -1:
                    pivot_of[v] = u
    return Clustering(pivot_of)


def pruned_pivot(oracle, rf: RankFunction, k: int, u: int) -> int:
    """Budget-limited recursive pivot search (offline reference).

    A single counter shared across the whole call tree allows k recursive
    descents; exhausting it makes u a singleton (returns u).
    """
    if k < 1:
        raise ValueError("recursion budget must be >= 1")
    key = rf.key
    used = 0

    def rec(w):
        nonlocal used
        if used >= k:
            return _TIMEOUT
        kw = key(w)
        for _, v in sorted((key(v), v) for v in oracle.neighbors(w) if key(v) < kw):
            used += 1
            p = rec(v)
            if p is _TIMEOUT or p == v:
                return p
        return w

    p = rec(u)
    return u if p is _TIMEOUT else p


def find_pivot_status(u, rf: RankFunction, refs: ReferenceSet, k: int, oracle):
    """Pivot search restricted to the reference set.

    Returns (pivot, timed_out). pivot is None exactly when u is outside the
    reference set, no stored neighbor resolves to a pivot, and the budget
    was not exhausted; a timeout returns u itself (singleton).
    """
    if k < 1:
        raise ValueError("recursion budget must be >= 1")
    used = 0
    ordered = refs.ordered

    def rec(w):
        nonlocal used
        if used >= k:
            return _TIMEOUT
        kw = rf.key(w)
        for kv, v in ordered:
            if kv >= kw:
                break
            if not oracle.sim(w, v):
                continue
            used += 1
            p = rec(v)
            if p is _TIMEOUT or p == v:
                return p
        if w in refs:
            return w
        return None

    p = rec(u)
    if p is _TIMEOUT:
        return u, True
    return p, False


def find_pivot(u, rf, refs, k, oracle):
    return find_pivot_status(u, rf, refs, k, oracle)[0]


class PivotResolver:
    """Caches find_pivot results for a fixed (rank, reference set, budget).

    find_pivot is a pure function of its node, so the cache is a CPU-side
    accelerator only; it is not algorithm state and is not censused.
    """

    def __init__(self, rf, refs, k, oracle):
        self.rf = rf
        self.refs = refs
        self.k = k
        self.oracle = oracle
        self._cache = {}

    def status(self, u):
        hit = self._cache.get(u)
        if hit is None:
            hit = find_pivot_status(u, self.rf, self.refs, self.k, self.oracle)
            self._cache[u] = hit
        return hit

    def pivot(self, u):
        return self.status(u)[0]


class PrunedPivotStream(PassConsumer):
    """Streaming budget-limited pivot search for one query node.

    Keeps the pending query path as entries [x, key(x), y, key(y)] where y
    tracks x's best not-yet-explored candidate: during a pass y improves to
    the best-ranked neighbor of x strictly between the entry's current
    candidate and y itself. Space is 4 words per entry, at most k+1 entries.
    """

    def __init__(self, u, rf: RankFunction, k: int, oracle, accounting=None):
        if k < 1:
            raise ValueError("recursion budget must be >= 1")
        self.u = u
        self.rf = rf
        self.k = k
        self.declared_passes = k
        self.oracle = oracle
        self.accounting = accounting
        self.name = f"pruned-pivot-stream[{u}]"
        ku = rf.key(u)
        self._path = [[u, ku, u, ku]]
        census(accounting, 4)
        self._answer = None
        self._upper = ku  # max over entries of key(y): cheap reject gate

    def on_item(self, node):
        self.feed(node, self.rf.key(node))

    def feed(self, node, node_key):
        if node_key >= self._upper:
            return
        path = self._path
        sim = self.oracle.sim
        for i, entry in enumerate(path):
            if node_key >= entry[3]:
                continue
            if i + 1 < len(path) and node_key <= path[i + 1][1]:
                continue
            if sim(entry[0], node):
                entry[2] = node
                entry[3] = node_key
                self._upper = max(e[3] for e in path)
            # candidate intervals are disjoint: no other entry can match
            break

    def end_pass(self, p):
        path = self._path
        while True:
            x, _, y, _ = path[-1]
            if x != y:
                break
            if len(path) <= 2:
                self._finish(x)
                return
            path.pop()
            path.pop()
            census(self.accounting, -8)
        if p >= self.k:
            self._finish(self.u)
            return
        x, kx, y, ky = path[-1]
        path[-1] = [x, kx, x, kx]
        path.append([y, ky, y, ky])
        census(self.accounting, 4)
        self._upper = max(e[3] for e in path)

    def _finish(self, answer):
        self._answer = answer
        census(self.accounting, -4 * len(self._path))
        self._path = []
        self.finished = True

    def result(self):
        return self._answer if self.finished else self.u


def pruned_pivot_stream(stream: NodeStream, u, rf, k, oracle, accounting=None):
    """Streaming pivot resolution for u; equals pruned_pivot(u) exactly."""
    consumer = PrunedPivotStream(u, rf, k, oracle, accounting)
    (answer,), _ = run_multiplexed(stream, [consumer], accounting)
    return answer
