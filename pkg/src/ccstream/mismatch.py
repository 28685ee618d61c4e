"""Exact offline mismatch semantics: the ground truth the estimators chase.

A pair mismatches when it is similar but split across clusters, or
dissimilar but co-clustered, under the budget-limited pivot assignment.
The node partition splits V into nodes whose pivot is determinable from the
stored reference set (resolved) and the rest (unresolved); mismatch pairs
split accordingly into those touching a resolved node and those entirely
on the unresolved side.
"""

from __future__ import annotations

from dataclasses import dataclass

from .clustering import Clustering, PivotResolver, pruned_pivot
from .errors import CapacityError

PAIR_SCAN_GUARD = 5000


@dataclass(frozen=True)
class NodePartition:
    resolved: frozenset
    unresolved: frozenset


@dataclass(frozen=True)
class MismatchCounts:
    total: int
    in_resolved: int
    in_unresolved: int


def is_mismatch(u, v, clustering: Clustering, oracle) -> bool:
    if u == v:
        raise ValueError("mismatch is defined on distinct nodes")
    same = clustering.pivot(u) == clustering.pivot(v)
    return oracle.sim(u, v) != same


def partition_nodes(oracle, rf, refs, k) -> NodePartition:
    """Classify every node by whether its pivot is determinable from refs."""
    resolver = PivotResolver(rf, refs, k, oracle)
    resolved, unresolved = set(), set()
    for u in range(oracle.n):
        (resolved if resolver.pivot(u) is not None else unresolved).add(u)
    return NodePartition(frozenset(resolved), frozenset(unresolved))


def cluster_of(u, clustering: Clustering, oracle):
    """Members of u's cluster if u is a pivot, else the empty set."""
    if clustering.pivot(u) != u:
        return set()
    members = {v for v in oracle.neighbors(u) if clustering.pivot(v) == u}
    members.add(u)
    return members


def pruned_clustering(oracle, rf, k) -> Clustering:
    """Budget-limited pivot assignment for every node (offline reference)."""
    return Clustering([pruned_pivot(oracle, rf, k, u) for u in range(oracle.n)])


def mismatch_counts(oracle, rf, refs, k) -> MismatchCounts:
    """Exhaustive pair scan splitting mismatch pairs by the node partition.

    O(n^2) verification oracle; guarded so tests stay fast.
    """
    n = oracle.n
    if n > PAIR_SCAN_GUARD:
        raise CapacityError(f"pair scan guarded at n <= {PAIR_SCAN_GUARD}, got {n}")
    clustering = pruned_clustering(oracle, rf, k)
    part = partition_nodes(oracle, rf, refs, k)
    resolved = part.resolved
    total = in_res = in_unres = 0
    for u in range(n):
        u_resolved = u in resolved
        for v in range(u + 1, n):
            if not is_mismatch(u, v, clustering, oracle):
                continue
            total += 1
            if u_resolved or v in resolved:
                in_res += 1
            else:
                in_unres += 1
    return MismatchCounts(total, in_res, in_unres)
