"""Brute-force optimal clustering cost and generic cost evaluation.

Ground truth for approximation-ratio tests. The optimum enumerates set
partitions as restricted growth strings with branch-and-bound pruning, so
the guard keeps runs to seconds.
"""

from __future__ import annotations

from .clustering import RankFunction, pivot_clustering
from .errors import CapacityError

OPT_GUARD = 13


def canonical_partition(blocks):
    """Blocks as sorted tuples, ordered by minimum element."""
    return sorted((tuple(sorted(b)) for b in blocks), key=lambda b: b[0])


def _validate_partition(n, blocks):
    seen = set()
    for block in blocks:
        for u in block:
            if not (0 <= u < n):
                raise ValueError(f"node {u} out of range for n={n}")
            if u in seen:
                raise ValueError(f"node {u} appears in two blocks")
            seen.add(u)
    if len(seen) != n:
        raise ValueError("partition does not cover all nodes")


def clustering_cost(oracle, partition) -> int:
    """Similar pairs split across blocks plus dissimilar pairs sharing one."""
    n = oracle.n
    blocks = list(partition)
    _validate_partition(n, blocks)
    label = [0] * n
    for i, block in enumerate(blocks):
        for u in block:
            label[u] = i
    cut = 0
    internal_similar = [0] * len(blocks)
    for u in range(n):
        for v in oracle.neighbors(u):
            if v <= u:
                continue
            if label[u] == label[v]:
                internal_similar[label[u]] += 1
            else:
                cut += 1
    kept_dissimilar = sum(
        len(b) * (len(b) - 1) // 2 - internal_similar[i] for i, b in enumerate(blocks)
    )
    return cut + kept_dissimilar


def opt_cost(oracle):
    """Minimum clustering cost over all set partitions, with one argmin.

    Enumerates assignments node by node (restricted growth order), pruning
    any partial assignment whose accumulated cost already meets the best
    known bound. A few greedy clusterings seed that bound.
    """
    n = oracle.n
    if n > OPT_GUARD:
        raise CapacityError(f"exhaustive optimum guarded at n <= {OPT_GUARD}, got {n}")
    if n == 0:
        return 0, []

    simmat = [[False] * n for _ in range(n)]
    for u in range(n):
        for v in oracle.neighbors(u):
            simmat[u][v] = True

    best_cost, best_assign = _initial_bound(oracle)
    assign = [0] * n
    sim_placed = [sum(1 for j in range(i) if simmat[i][j]) for i in range(n)]

    def walk(i, used, cost):
        nonlocal best_cost, best_assign
        if cost >= best_cost:
            return
        if i == n:
            best_cost = cost
            best_assign = assign[:]
            return
        row = simmat[i]
        block_size = [0] * used
        block_sim = [0] * used
        for j in range(i):
            b = assign[j]
            block_size[b] += 1
            if row[j]:
                block_sim[b] += 1
        outside_all = sim_placed[i]
        for b in range(used):
            # dissimilar kept inside b plus similar cut to other blocks
            delta = (block_size[b] - block_sim[b]) + (outside_all - block_sim[b])
            assign[i] = b
            walk(i + 1, used, cost + delta)
        assign[i] = used
        walk(i + 1, used + 1, cost + outside_all)

    walk(0, 0, 0)
    blocks = {}
    for u, b in enumerate(best_assign):
        blocks.setdefault(b, []).append(u)
    return best_cost, canonical_partition(blocks.values())


def _initial_bound(oracle):
    n = oracle.n
    candidates = [[(u,) for u in range(n)]]
    for seed in (0, 1, 2):
        candidates.append(pivot_clustering(oracle, RankFunction(seed, n)).blocks())
    best_cost = None
    best_blocks = None
    for blocks in candidates:
        cost = clustering_cost(oracle, blocks)
        if best_cost is None or cost < best_cost:
            best_cost, best_blocks = cost, blocks
    assign = [0] * n
    for b, block in enumerate(best_blocks):
        for u in block:
            assign[u] = b
    return best_cost, assign
