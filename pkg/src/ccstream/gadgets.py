"""Adversarial point-set generators for the streaming lower bounds.

Both families pair an l1-threshold oracle with a closed-form optimal cost,
so brute force can certify the construction. Coordinates are integers and
each point has at most two nonzero entries, so a point is O(1) words and
the threshold test is exact. Arrival order is the first party's points
followed by the second party's, the order the one-pass argument stresses.
"""

from __future__ import annotations

from dataclasses import dataclass

from .similarity import L1ThresholdOracle


@dataclass(frozen=True)
class IndexInstance:
    """One-sided bit-lookup instance: 2l points in R^(l+1)."""

    x: tuple
    b: int
    points: tuple
    oracle: L1ThresholdOracle
    expected_opt: int


@dataclass(frozen=True)
class DisjInstance:
    """Set-intersection instance: 4l points in R^2."""

    x: tuple
    y: tuple
    points: tuple
    oracle: L1ThresholdOracle
    expected_opt: int


def _check_bits(bits, name):
    bits = tuple(int(b) for b in bits)
    if any(b not in (0, 1) for b in bits):
        raise ValueError(f"{name} must be a 0/1 vector")
    return bits


def index_gadget(x, b: int) -> IndexInstance:
    """Points for the bit-lookup construction.

    The holder of x places point i at coordinate 4i + x_i on the first axis;
    the querier with index b places l points at 4b on the first axis plus a
    unit step on axis i. All cross distances exceed 1 except querier points
    against the x-point at position b, which sit at distance x_b + 1: the
    graph is empty when x_b = 1 (optimal cost 0) and a star with l leaves
    when x_b = 0 (optimal cost l - 1).
    """
    x = _check_bits(x, "x")
    ell = len(x)
    if ell < 2:
        raise ValueError("need at least two bits")
    if not (1 <= b <= ell):
        raise ValueError(f"index b={b} out of range [1, {ell}]")
    points = []
    for i in range(1, ell + 1):
        points.append({0: 4 * i + x[i - 1]})
    for i in range(1, ell + 1):
        points.append({0: 4 * b, i: 1})
    expected = 0 if x[b - 1] == 1 else ell - 1
    frozen = tuple(tuple(sorted(p.items())) for p in points)
    return IndexInstance(x, b, frozen, L1ThresholdOracle(points), expected)


def disj_gadget(x, y) -> DisjInstance:
    """Points for the set-intersection construction.

    Per position i the first party places a pair at second coordinates x_i
    and x_i - 1, the second party a pair at 3 - y_i and 4 - y_i; the first
    coordinate 2i separates positions. Each party's pair is always similar;
    the only cross edge appears when x_i = y_i = 1, and every such position
    forces exactly one mismatch, so the optimal cost is the number of
    intersecting positions.
    """
    x = _check_bits(x, "x")
    y = _check_bits(y, "y")
    if len(x) != len(y):
        raise ValueError(f"bit vectors differ in length: {len(x)} vs {len(y)}")
    if len(x) < 1:
        raise ValueError("need at least one bit")
    ell = len(x)
    points = []
    for i in range(1, ell + 1):
        points.append({0: 2 * i, 1: x[i - 1]})
    for i in range(1, ell + 1):
        points.append({0: 2 * i, 1: x[i - 1] - 1})
    for i in range(1, ell + 1):
        points.append({0: 2 * i, 1: 3 - y[i - 1]})
    for i in range(1, ell + 1):
        points.append({0: 2 * i, 1: 4 - y[i - 1]})
    expected = sum(1 for xi, yi in zip(x, y) if xi == 1 and yi == 1)
    frozen = tuple(tuple(sorted(p.items())) for p in points)
    return DisjInstance(x, y, frozen, L1ThresholdOracle(points), expected)


def disj_intended_partition(ell: int):
    """The matching-of-pairs clustering: each party's pair per position."""
    blocks = []
    for i in range(ell):
        blocks.append((i, ell + i))
    for i in range(ell):
        blocks.append((2 * ell + i, 3 * ell + i))
    return blocks


def format_points(points) -> str:
    """Sparse points as text: one line per point, `idx:value` entries."""
    lines = []
    for p in points:
        entries = " ".join(f"{i}:{c}" for i, c in p) or "-"
        lines.append(entries)
    return "\n".join(lines) + "\n"
