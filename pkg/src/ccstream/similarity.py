"""Similarity oracles: the only channel through which any algorithm sees edges.

Nodes are integers in [0, n) identifying stream items by arrival position.
Every oracle answers symmetric, reflexive `sim` queries and counts each call.
"""

from __future__ import annotations

import struct

import numpy as np

from .errors import ParseError


class SimilarityOracle:
    """Base class for pairwise similarity over nodes 0..n-1.

    Self-queries answer True without consulting storage but still count.
    The query counter is plain instance state: concurrent runs should use
    one oracle instance each (or merge counters afterwards).
    """

    def __init__(self, n: int):
        if n < 0:
            raise ValueError("node count must be non-negative")
        self.n = n
        self.query_count = 0

    def sim(self, u: int, v: int) -> bool:
        n = self.n
        if not (0 <= u < n and 0 <= v < n):
            raise ValueError(f"node id out of range: ({u}, {v}) with n={n}")
        self.query_count += 1
        if u == v:
            return True
        return self._sim(u, v)

    def _sim(self, u: int, v: int) -> bool:
        raise NotImplementedError

    def neighbors(self, u: int):
        """All v != u with sim(u, v). Exhaustive scan unless overridden.

        Enumeration helpers exist for offline reference computations and
        tests; streaming algorithms must only ever call sim().
        """
        return [v for v in range(self.n) if v != u and self.sim(u, v)]

    def degree(self, u: int) -> int:
        """Test-only: number of similar partners of u."""
        return len(self.neighbors(u))


class ExplicitGraphOracle(SimilarityOracle):
    """Similarity backed by an explicit undirected edge set.

    Duplicate edges and self-loops in the input are ignored; adjacency is
    kept symmetric. Neighbor enumeration reads stored adjacency directly
    and does not touch the query counter.
    """

    def __init__(self, n: int, edges=()):
        super().__init__(n)
        adj = [set() for _ in range(n)]
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) out of range for n={n}")
            if u == v:
                continue
            adj[u].add(v)
            adj[v].add(u)
        self._adj = adj
        self._sorted = [sorted(s) for s in adj]

    def _sim(self, u, v):
        return v in self._adj[u]

    def neighbors(self, u):
        return self._sorted[u]

    def degree(self, u):
        return len(self._adj[u])

    def edge_count(self) -> int:
        return sum(len(s) for s in self._adj) // 2

    def edges(self):
        for u in range(self.n):
            for v in self._sorted[u]:
                if u < v:
                    yield u, v


class EmbeddingOracle(SimilarityOracle):
    """Similar iff cosine of the two embedding vectors strictly exceeds theta.

    A zero vector gets cosine -1 against everything (never similar), so
    degenerate rows cannot crash a run.
    """

    def __init__(self, vectors, theta: float):
        vectors = np.asarray(vectors, dtype=np.float64)
        if vectors.ndim != 2:
            raise ValueError("vectors must be a 2-D array")
        super().__init__(vectors.shape[0])
        norms = np.linalg.norm(vectors, axis=1)
        self._zero = norms == 0.0
        safe = np.where(self._zero, 1.0, norms)
        self._unit = vectors / safe[:, None]
        self.theta = float(theta)
        self.dim = vectors.shape[1]

    def _sim(self, u, v):
        if self._zero[u] or self._zero[v]:
            return -1.0 > self.theta
        return float(np.dot(self._unit[u], self._unit[v])) > self.theta

    def neighbors(self, u):
        cos = self._unit @ self._unit[u]
        if self._zero[u]:
            cos = np.full(self.n, -1.0)
        else:
            cos[self._zero] = -1.0
        hits = np.nonzero(cos > self.theta)[0]
        return [int(v) for v in hits if v != u]


class L1ThresholdOracle(SimilarityOracle):
    """Similar iff the l1 distance between two sparse points is <= 1.

    Points are sparse (index -> value) mappings; with integer coordinates
    the threshold test is exact, which the adversarial instances rely on.
    """

    def __init__(self, points):
        pts = []
        for p in points:
            items = sorted(p.items() if hasattr(p, "items") else p)
            pts.append(tuple((int(i), c) for i, c in items if c != 0))
        super().__init__(len(pts))
        self.points = pts

    def _sim(self, u, v):
        return self.l1(u, v) <= 1

    def l1(self, u, v):
        a, b = self.points[u], self.points[v]
        dist = 0
        i = j = 0
        while i < len(a) and j < len(b):
            ia, ca = a[i]
            ib, cb = b[j]
            if ia == ib:
                dist += abs(ca - cb)
                i += 1
                j += 1
            elif ia < ib:
                dist += abs(ca)
                i += 1
            else:
                dist += abs(cb)
                j += 1
        dist += sum(abs(c) for _, c in a[i:])
        dist += sum(abs(c) for _, c in b[j:])
        return dist


def load_edgelist(path):
    """Read an undirected edge list: one `u v` per line, optional `n <count>` header.

    Without a header, n is max id + 1. Duplicates and self-loops are dropped
    by the oracle. Returns an ExplicitGraphOracle.
    """
    edges = []
    declared_n = None
    max_id = -1
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            parts = text.split()
            if parts[0] == "n":
                if declared_n is not None or len(parts) != 2:
                    raise ParseError(f"{path}:{lineno}: bad header line {text!r}")
                try:
                    declared_n = int(parts[1])
                except ValueError:
                    raise ParseError(f"{path}:{lineno}: bad node count {parts[1]!r}") from None
                continue
            if len(parts) != 2:
                raise ParseError(f"{path}:{lineno}: expected two node ids, got {text!r}")
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise ParseError(f"{path}:{lineno}: non-integer node id in {text!r}") from None
            if u < 0 or v < 0:
                raise ParseError(f"{path}:{lineno}: negative node id in {text!r}")
            edges.append((u, v))
            max_id = max(max_id, u, v)
    n = declared_n if declared_n is not None else max_id + 1
    if max_id >= n:
        raise ParseError(f"{path}: node id {max_id} exceeds declared n={n}")
    return ExplicitGraphOracle(n, edges)


def save_edgelist(path, oracle: ExplicitGraphOracle, header: bool = True):
    with open(path, "w", encoding="utf-8") as fh:
        if header:
            fh.write(f"n {oracle.n}\n")
        for u, v in oracle.edges():
            fh.write(f"{u} {v}\n")


def load_embeddings(path):
    """Read the binary embedding format: little-endian u64 n, u64 dim, then
    n*dim float32 row-major."""
    with open(path, "rb") as fh:
        head = fh.read(16)
        if len(head) != 16:
            raise ParseError(f"{path}: truncated embedding header")
        n, dim = struct.unpack("<QQ", head)
        data = np.fromfile(fh, dtype="<f4", count=n * dim)
    if data.size != n * dim:
        raise ParseError(f"{path}: expected {n * dim} floats, found {data.size}")
    return data.reshape(n, dim).astype(np.float64)


def save_embeddings(path, vectors):
    vectors = np.asarray(vectors, dtype=np.float64)
    with open(path, "wb") as fh:
        fh.write(struct.pack("<QQ", vectors.shape[0], vectors.shape[1]))
        fh.write(vectors.astype("<f4").tobytes())
