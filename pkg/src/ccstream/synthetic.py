"""Synthetic graph generators: desk-scale stand-ins for the real datasets."""

from __future__ import annotations

import numpy as np

from .similarity import ExplicitGraphOracle


def gnp(n: int, p: float, seed: int = 0) -> ExplicitGraphOracle:
    """Erdos-Renyi positive-edge graph G(n, p)."""
    if not (0.0 <= p <= 1.0):
        raise ValueError("edge probability must be in [0, 1]")
    rng = np.random.default_rng(seed)
    edges = []
    for u in range(n - 1):
        hits = np.nonzero(rng.random(n - u - 1) < p)[0]
        edges.extend((u, u + 1 + int(h)) for h in hits)
    return ExplicitGraphOracle(n, edges)


def planted(n: int, clusters: int, p_in: float, p_out: float,
            seed: int = 0) -> ExplicitGraphOracle:
    """Planted-partition graph: contiguous equal blocks, dense inside, sparse
    across."""
    if clusters < 1:
        raise ValueError("need at least one cluster")
    if not (0.0 <= p_in <= 1.0 and 0.0 <= p_out <= 1.0):
        raise ValueError("edge probabilities must be in [0, 1]")
    label = np.repeat(np.arange(clusters), -(-n // clusters))[:n]
    rng = np.random.default_rng(seed)
    edges = []
    for u in range(n - 1):
        same = label[u + 1:] == label[u]
        prob = np.where(same, p_in, p_out)
        hits = np.nonzero(rng.random(n - u - 1) < prob)[0]
        edges.extend((u, u + 1 + int(h)) for h in hits)
    return ExplicitGraphOracle(n, edges)
