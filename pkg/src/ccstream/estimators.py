"""The streaming estimation stack.

Two estimators split the mismatch pairs by the node partition: pairs
touching a node whose pivot the stored reference set can resolve are
counted through a degree estimator with a high/low split; pairs entirely
on the unresolved side are counted by sampling whole (provably small)
clusters. The top-level estimator multiplexes both over shared passes.

All sample sizes derive from one plan; the theory formulas are clamped to
[1, n] so at small n sampling degenerates to exhaustive and the estimates
collapse to the exact counts.
"""

from __future__ import annotations

import math
import random
import warnings
from dataclasses import dataclass, field
from statistics import median

from .clustering import (
    PivotResolver,
    PrunedPivotStream,
    RankFunction,
    ReferenceSetBuilder,
    derive_seed,
    find_pivot,
)
from .stream import Accounting, NodeStream, PassConsumer, census, run_multiplexed

SPACE_MODES = ("theory", "budget", "test")

# analysis constants: reference set, high/low certificate sample, low-degree
# sample, cluster sample
C_REFS, C_S1, C_S2, C_CLUSTER = 48.0, 12.0, 32.0, 8.0


class DegreeCapWarning(UserWarning):
    """A sampled unresolved node exceeded the expected degree cap."""


@dataclass(frozen=True)
class EstimatorParams:
    k: int = 15
    alpha: float = 0.5
    epsilon: float = 0.1
    seed: int = 0
    space_mode: str = "theory"
    space_param: float | None = None
    normalize_output: bool = False

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("recursion budget k must be >= 2")
        if not (0.0 <= self.alpha < 1.0):
            raise ValueError("alpha must be in [0, 1)")
        if not (0.0 < self.epsilon < 1.0):
            raise ValueError("epsilon must be in (0, 1)")
        if self.space_mode not in SPACE_MODES:
            raise ValueError(f"space_mode must be one of {SPACE_MODES}")
        if self.space_mode == "budget":
            if self.space_param is None or not (0.0 < self.space_param <= 1.0):
                raise ValueError("budget mode needs a fraction in (0, 1]")
        if self.space_mode == "test":
            if self.space_param is None or not (0.0 < self.space_param <= 1.0):
                raise ValueError("test mode needs a constant scale in (0, 1]")

    @property
    def beta(self) -> float:
        return (1.0 - self.alpha) / 4.0

    def sub_seed(self, label: str) -> int:
        return derive_seed(self.seed, label)

    def rank_function(self, n: int, rep: int = 0) -> RankFunction:
        return RankFunction(self.sub_seed(f"rank:{rep}"), n)


@dataclass(frozen=True)
class SizePlan:
    """Concrete sample sizes for one run at a given n."""

    r: int
    t1: int
    t2: int
    t: int
    high_threshold: float
    words: int = field(default=0)


def _theory_raw(n, k, alpha, epsilon, scale=1.0):
    beta = (1.0 - alpha) / 4.0
    log_n = math.log(max(n, 2))
    e2 = epsilon * epsilon
    r = scale * C_REFS * k * n ** (1.0 - beta) * log_n
    t1 = scale * (C_S1 / e2) * n ** (1.0 - beta) * log_n
    t2 = scale * (C_S2 / e2) * n ** (alpha + beta) * log_n
    t = scale * (C_CLUSTER / e2) * n ** (alpha + 2.0 * beta) * log_n
    return r, t1, t2, t


def _clamp(value, n):
    return max(1, min(n, math.ceil(value)))


def size_plan(n: int, k: int, alpha: float, epsilon: float, mode: str, param) -> SizePlan:
    """Sample sizes for a run.

    theory: the analysis formulas, clamped to [1, n].
    test:   the same with all four constants scaled by `param`.
    budget: a total budget of param*n words split across the four
            structures in proportion to their clamped theory word costs
            (reference set 2 words per member, low-degree sample 2 per
            slot, cluster sample 3 + expected-cluster-size words per slot).

    The high/low certificate threshold follows the formula from the final
    t1 but is floored at 2: below two sampled witnesses the certificate is
    indistinguishable from noise and would double-count low-degree nodes.
    """
    beta = (1.0 - alpha) / 4.0
    raw = _theory_raw(n, k, alpha, epsilon, param if mode == "test" else 1.0)
    if mode in ("theory", "test"):
        r, t1, t2, t = (_clamp(v, n) for v in raw)
    elif mode == "budget":
        total = max(16.0, param * n)
        rc, t1c, t2c, tc = (_clamp(v, n) for v in raw)
        gamma_width = 3.0 + n ** beta
        weights = (2.0 * rc, float(t1c), 2.0 * t2c, tc * gamma_width)
        wsum = sum(weights)
        r = _clamp(total * weights[0] / wsum / 2.0, n)
        t1 = _clamp(total * weights[1] / wsum, n)
        t2 = _clamp(total * weights[2] / wsum / 2.0, n)
        t = _clamp(total * weights[3] / wsum / gamma_width, n)
    else:
        raise ValueError(f"unknown space mode {mode!r}")
    threshold = max(2.0 * t1 / n ** (1.0 - beta), 2.0)
    words = 2 * r + t1 + 2 * t2 + 3 * t
    return SizePlan(r, t1, t2, t, threshold, words)


def plan_for(n: int, params: EstimatorParams, epsilon: float | None = None) -> SizePlan:
    return size_plan(
        n,
        params.k,
        params.alpha,
        params.epsilon if epsilon is None else epsilon,
        params.space_mode,
        params.space_param,
    )


def _split_mismatch(pivot_u, pivot_v, similar: bool) -> bool:
    """Mismatch membership on the resolved side given both pivot lookups."""
    if pivot_u is None and pivot_v is None:
        return False
    if pivot_u is None or pivot_v is None:
        return similar
    return similar != (pivot_u == pivot_v)


def resolved_mismatch(u, v, rf, refs, k, oracle) -> bool:
    """Does (u, v) mismatch with at least one endpoint resolvable from refs?

    Exact: when both pivots resolve they are the true budget-limited pivots,
    one-sided pairs are cross-cluster by partition purity, and unresolved
    pairs never qualify.
    """
    if u == v:
        raise ValueError("mismatch is defined on distinct nodes")
    pu = find_pivot(u, rf, refs, k, oracle)
    pv = find_pivot(v, rf, refs, k, oracle)
    return _split_mismatch(pu, pv, oracle.sim(u, v))


class _Reservoir:
    """Fixed-capacity uniform sample without replacement (fill then replace)."""

    def __init__(self, capacity: int, rng: random.Random):
        self.capacity = capacity
        self.rng = rng
        self.slots = []
        self.seen = 0

    def offer(self, item):
        self.seen += 1
        if len(self.slots) < self.capacity:
            self.slots.append(item)
        else:
            i = self.rng.randint(1, self.seen)
            if i <= self.capacity:
                self.slots[i - 1] = item


class ResolvedSideEstimator(PassConsumer):
    """Three-pass estimator for mismatch pairs touching a resolved node.

    Pass 1 reservoir-samples the certificate set; pass 2 classifies each
    node by sampled mismatch-degree, rescaling high nodes on the spot and
    routing low ones into a second reservoir; pass 3 computes the sampled
    low nodes' exact mismatch degrees. Output is half the estimated degree
    sum.
    """

    name = "resolved-side"
    declared_passes = 3

    def __init__(self, n, plan, resolver, oracle, rng, accounting=None):
        self.n = n
        self.t1 = plan.t1
        self.t2 = plan.t2
        self.threshold = plan.high_threshold
        self.resolver = resolver
        self.oracle = oracle
        self.accounting = accounting
        self._certificate = _Reservoir(plan.t1, rng)
        self._low = _Reservoir(plan.t2, rng)
        self._degrees = [0] * plan.t2
        self._high_sum = 0.0
        self._pass = 0
        census(accounting, plan.t1 + 2 * plan.t2 + 4)

    def begin_pass(self, p):
        self._pass = p

    def on_item(self, node):
        if self._pass == 1:
            self._certificate.offer(node)
            return
        if self._pass == 2:
            hits = 0
            for u in self._certificate.slots:
                if u != node and self._pair_mismatch(u, node):
                    hits += 1
            if hits >= self.threshold:
                self._high_sum += self.n * hits / self.t1
            else:
                self._low.offer(node)
            return
        for i, u in enumerate(self._low.slots):
            if u != node and self._pair_mismatch(u, node):
                self._degrees[i] += 1

    def _pair_mismatch(self, u, v):
        pu = self.resolver.pivot(u)
        pv = self.resolver.pivot(v)
        return _split_mismatch(pu, pv, self.oracle.sim(u, v))

    def end_pass(self, p):
        if p == 3:
            self.finished = True
            census(self.accounting, -(self.t1 + 2 * self.t2 + 4))

    def result(self) -> float:
        low_seen = self._low.seen
        filled = len(self._low.slots)
        low_sum = sum(self._degrees[:filled])
        low_part = (low_seen / filled) * low_sum if filled else 0.0
        return (self._high_sum + low_part) / 2.0


class UnresolvedSideEstimator(PassConsumer):
    """(k+3)-pass estimator for mismatch pairs entirely on the unresolved side.

    Pass 1 reservoir-samples unresolved nodes; pass 2 collects each sample's
    neighborhood; k passes resolve every collected neighbor's pivot with
    multiplexed streaming searches, after which each neighborhood is pruned
    to the sample's own cluster; the final pass counts similar edges leaving
    each cluster toward other unresolved nodes. Dissimilar pairs inside each
    cluster are counted offline.
    """

    name = "unresolved-side"

    def __init__(self, n, plan, resolver, oracle, rf, k, rng, accounting=None,
                 degree_cap_slack=4.0):
        self.n = n
        self.t = plan.t
        self.resolver = resolver
        self.oracle = oracle
        self.rf = rf
        self.k = k
        self.declared_passes = k + 3
        self.accounting = accounting
        self._sample = _Reservoir(plan.t, rng)
        self._hoods = None
        self._searches = {}
        self._active = []
        self._pivots = {}
        self._out_counts = None
        self._pass = 0
        self.degree_cap = degree_cap_slack * n ** ((1.0 - resolver_alpha(resolver)) / 4.0)
        self.cap_violations = 0
        census(accounting, 3 * plan.t + 1)

    def begin_pass(self, p):
        self._pass = p
        if p == 2:
            self._hoods = [set() for _ in self._sample.slots]
            self._out_counts = [0] * len(self._sample.slots)
        elif p == 3:
            targets = set()
            for hood in self._hoods:
                targets.update(hood)
            for v in sorted(targets):
                self._searches[v] = PrunedPivotStream(
                    v, self.rf, self.k, self.oracle, self.accounting
                )
            self._active = list(self._searches.values())

    def on_item(self, node):
        p = self._pass
        if p == 1:
            if self.resolver.pivot(node) is None:
                self._sample.offer(node)
        elif p == 2:
            sim = self.oracle.sim
            for i, s in enumerate(self._sample.slots):
                if sim(s, node):
                    hood = self._hoods[i]
                    if node not in hood:
                        hood.add(node)
                        census(self.accounting, 1)
        elif p <= self.k + 2:
            if self._active:
                node_key = self.rf.key(node)
                for search in self._active:
                    search.feed(node, node_key)
        else:
            if self.resolver.pivot(node) is not None:
                return
            sim = self.oracle.sim
            for i, hood in enumerate(self._hoods):
                if node in hood:
                    continue
                self._out_counts[i] += sum(1 for v in hood if sim(v, node))

    def end_pass(self, p):
        if 3 <= p <= self.k + 2:
            q = p - 2
            still = []
            for search in self._active:
                search.end_pass(q)
                if search.finished:
                    self._pivots[search.u] = search.result()
                else:
                    still.append(search)
            self._active = still
            if p == self.k + 2:
                for search in self._active:
                    self._pivots[search.u] = search.result()
                self._active = []
                self._prune()
        elif p == self.k + 3:
            self.finished = True
            held = sum(len(h) for h in self._hoods) if self._hoods else 0
            census(self.accounting, -(3 * self.t + 1 + held))

    def _prune(self):
        for i, s in enumerate(self._sample.slots):
            hood = self._hoods[i]
            if len(hood) > self.degree_cap:
                self.cap_violations += 1
                warnings.warn(
                    f"sampled unresolved node {s} has {len(hood)} neighbors, "
                    f"over the cap {self.degree_cap:.1f}",
                    DegreeCapWarning,
                    stacklevel=2,
                )
            keep = {v for v in hood if self._pivots.get(v) == s}
            census(self.accounting, -(len(hood) - len(keep)))
            self._hoods[i] = keep

    def result(self) -> float:
        unresolved_seen = self._sample.seen
        filled = len(self._sample.slots)
        if filled == 0:
            return 0.0
        sim = self.oracle.sim
        total = 0.0
        for i in range(filled):
            members = sorted(self._hoods[i])
            inside = 0
            for a in range(len(members)):
                for b in range(a + 1, len(members)):
                    if not sim(members[a], members[b]):
                        inside += 1
            total += inside + 0.5 * self._out_counts[i]
        return unresolved_seen / filled * total


def resolver_alpha(resolver):
    """Degree-cap exponent bookkeeping: stored on the resolver by the caller."""
    return getattr(resolver, "alpha", 0.0)


def estimate_resolved(stream, params, rf, refs, oracle, accounting=None):
    """Run the resolved-side estimator alone (3 passes); refs pre-built."""
    acct = accounting if accounting is not None else Accounting()
    plan = plan_for(stream.n, params)
    resolver = PivotResolver(rf, refs, params.k, oracle)
    resolver.alpha = params.alpha
    rng = random.Random(params.sub_seed("resolved:0"))
    consumer = ResolvedSideEstimator(stream.n, plan, resolver, oracle, rng, acct)
    (value,), _ = run_multiplexed(stream, [consumer], acct)
    return value


def estimate_unresolved(stream, params, rf, refs, oracle, accounting=None):
    """Run the unresolved-side estimator alone (k+3 passes); refs pre-built."""
    acct = accounting if accounting is not None else Accounting()
    plan = plan_for(stream.n, params)
    resolver = PivotResolver(rf, refs, params.k, oracle)
    resolver.alpha = params.alpha
    rng = random.Random(params.sub_seed("unresolved:0"))
    consumer = UnresolvedSideEstimator(
        stream.n, plan, resolver, oracle, rf, params.k, rng, acct
    )
    (value,), _ = run_multiplexed(stream, [consumer], acct)
    return value


def estimate_cost(stream, params, oracle, accounting=None, reps=1):
    """Full streaming cost estimate: k+4 passes regardless of repetitions.

    Pass 1 builds each repetition's reference set; the remaining k+3 passes
    run both side estimators for every repetition multiplexed. Repetitions
    use independently derived randomness and are reduced by median. The
    normalized output applies the additive slack and rescaling; the raw
    variant returns the two estimates' sum as-is.
    """
    if reps < 1:
        raise ValueError("need at least one repetition")
    acct = accounting if accounting is not None else Accounting()
    n = stream.n
    if n == 0:
        return _normalize(0.0, params, n) if params.normalize_output else 0.0
    sub_eps = params.epsilon / 8.0
    plan = plan_for(n, params, epsilon=sub_eps)

    builders = [
        ReferenceSetBuilder(params.rank_function(n, rep), plan.r, acct)
        for rep in range(reps)
    ]
    ref_sets, _ = run_multiplexed(stream, builders, acct)

    consumers = []
    per_rep = []
    for rep in range(reps):
        rf = builders[rep].rf
        resolver = PivotResolver(rf, ref_sets[rep], params.k, oracle)
        resolver.alpha = params.alpha
        res = ResolvedSideEstimator(
            n, plan, resolver, oracle,
            random.Random(params.sub_seed(f"resolved:{rep}")), acct,
        )
        unres = UnresolvedSideEstimator(
            n, plan, resolver, oracle, rf, params.k,
            random.Random(params.sub_seed(f"unresolved:{rep}")), acct,
        )
        consumers.extend((res, unres))
        per_rep.append((res, unres))
    run_multiplexed(stream, consumers, acct)
    for rep in range(reps):
        census(acct, -2 * len(ref_sets[rep]))

    value = median(res.result() + unres.result() for res, unres in per_rep)
    if params.normalize_output:
        return _normalize(value, params, n)
    return value


def _normalize(raw, params, n):
    slack = 0.375 * params.epsilon * n ** (1.0 - params.alpha)
    return (raw + slack) / (1.0 - params.epsilon / 8.0)


def matched_pair_budget(n, params) -> int:
    """Pair count giving the baseline sampler the same word budget."""
    if params.space_mode == "budget":
        words = max(16.0, params.space_param * n)
    else:
        words = plan_for(n, params, epsilon=params.epsilon / 8.0).words
    return max(1, int(words) // 2)


def _pair_unrank(idx, n):
    """idx in [0, C(n,2)) -> the idx-th pair (u, v), u < v, in row order."""
    total = n * (n - 1) // 2
    rem = total - 1 - idx
    # rem indexes pairs from the end; row u holds n-1-u pairs
    b = (math.isqrt(8 * rem + 1) + 1) // 2  # pairs-from-end in last b rows >= rem+1
    u = n - 1 - b
    offset = idx - (total - b * (b + 1) // 2)
    return u, u + 1 + offset


def simple_sampling(stream, q, k, rf, oracle, accounting=None, seed=0):
    """Uniform pair-sampling baseline.

    Samples q unordered node pairs without replacement, resolves both
    pivots with multiplexed streaming searches (at most k passes), tests
    the mismatch definition on each pair, and scales the hit fraction back
    to the full pair count. q covering all pairs reproduces the exact cost.
    """
    if q < 1:
        raise ValueError("need at least one sampled pair")
    acct = accounting if accounting is not None else Accounting()
    n = stream.n
    total_pairs = n * (n - 1) // 2
    if total_pairs == 0:
        return 0.0
    q = min(q, total_pairs)
    rng = random.Random(derive_seed(seed, "pairs"))
    if q == total_pairs:
        pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    else:
        pairs = [_pair_unrank(i, n) for i in rng.sample(range(total_pairs), q)]
    census(acct, 2 * q)
    searches = {}
    for u, v in pairs:
        for node in (u, v):
            if node not in searches:
                searches[node] = PrunedPivotStream(node, rf, k, oracle, acct)
    run_multiplexed(stream, list(searches.values()), acct)
    pivots = {node: s.result() for node, s in searches.items()}
    hits = sum(
        1 for u, v in pairs if oracle.sim(u, v) != (pivots[u] == pivots[v])
    )
    census(acct, -2 * q)
    # product before quotient keeps the exhaustive case exact
    return hits * total_pairs / q
