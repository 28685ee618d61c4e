"""Correlation-clustering cost estimation over node-arrival streams."""

from .clustering import (
    Clustering,
    PivotResolver,
    PrunedPivotStream,
    RankFunction,
    ReferenceSet,
    build_reference_set,
    derive_seed,
    find_pivot,
    find_pivot_status,
    pivot_clustering,
    pruned_pivot,
    pruned_pivot_stream,
)
from .errors import AccountingError, CapacityError, ParseError, StreamRunError
from .estimators import (
    DegreeCapWarning,
    EstimatorParams,
    estimate_cost,
    estimate_resolved,
    estimate_unresolved,
    matched_pair_budget,
    resolved_mismatch,
    simple_sampling,
    size_plan,
)
from .exact import clustering_cost, opt_cost
from .gadgets import disj_gadget, index_gadget
from .mismatch import (
    MismatchCounts,
    NodePartition,
    cluster_of,
    is_mismatch,
    mismatch_counts,
    partition_nodes,
    pruned_clustering,
)
from .similarity import (
    EmbeddingOracle,
    ExplicitGraphOracle,
    L1ThresholdOracle,
    SimilarityOracle,
    load_edgelist,
    load_embeddings,
    save_edgelist,
    save_embeddings,
)
from .stream import Accounting, NodeStream, PassConsumer, run_multiplexed
from .synthetic import gnp, planted

__version__ = "0.1.0"
