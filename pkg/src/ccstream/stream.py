"""Node-arrival streams, shared-pass scheduling, and pass/space accounting.

The space model counts words of declared algorithm state (node ids, rank
keys, counters, list slots), not machine bytes: consumers report their own
allocations through Accounting.census.
"""

from __future__ import annotations

from .errors import AccountingError, StreamRunError


class Accounting:
    """Passes consumed, peak live words, and similarity-query total for a run."""

    def __init__(self):
        self.passes_used = 0
        self.peak_words = 0
        self.oracle_calls = 0
        self._live = 0

    @property
    def live_words(self) -> int:
        return self._live

    def census(self, words: int) -> None:
        self._live += words
        if self._live < 0:
            raise AccountingError(f"live word count went negative ({self._live})")
        if self._live > self.peak_words:
            self.peak_words = self._live

    def note_pass(self) -> None:
        self.passes_used += 1


def census(accounting, words: int) -> None:
    """Census hook tolerant of a missing accounting object."""
    if accounting is not None:
        accounting.census(words)


class NodeStream:
    """Replayable node-arrival sequence with the node count known upfront.

    Node ids are arrival positions, so the default order is 0..n-1; a custom
    order must be a permutation of it. Iterating never mutates state, so any
    number of replays (or concurrent runs) see the identical sequence.
    """

    def __init__(self, n: int, order=None):
        if n < 0:
            raise ValueError("stream length must be non-negative")
        self.n = n
        if order is None:
            self._order = tuple(range(n))
        else:
            self._order = tuple(order)
            if sorted(self._order) != list(range(n)):
                raise ValueError("stream order must be a permutation of 0..n-1")

    def __iter__(self):
        return iter(self._order)

    def __len__(self):
        return self.n


class PassConsumer:
    """Protocol for algorithms driven by the shared-pass scheduler.

    The scheduler delivers begin_pass(p), on_item(node) for every stream
    item in order, then end_pass(p), for p = 1..declared_passes or until the
    consumer sets `finished`. State transitions happen in end_pass; on_item
    must not assume it sees a partial pass.
    """

    name = "consumer"
    declared_passes = 1
    finished = False

    def begin_pass(self, p: int) -> None:
        pass

    def on_item(self, node: int) -> None:
        raise NotImplementedError

    def end_pass(self, p: int) -> None:
        pass

    def result(self):
        raise NotImplementedError


def run_multiplexed(stream: NodeStream, consumers, accounting=None):
    """Drive all consumers over shared physical passes.

    Physical passes = max of declared_passes over consumers still active;
    a consumer that finishes (or exhausts its declared passes) simply stops
    receiving callbacks without stalling the others. Returns (results,
    accounting).
    """
    if not consumers:
        raise ValueError("need at least one consumer")
    acct = accounting if accounting is not None else Accounting()
    p = 0
    while True:
        active = [c for c in consumers if not c.finished and c.declared_passes > p]
        if not active:
            break
        p += 1
        acct.note_pass()
        for c in active:
            _guarded(c, c.begin_pass, p)
        for node in stream:
            for c in active:
                _guarded(c, c.on_item, node)
        for c in active:
            _guarded(c, c.end_pass, p)
    return [c.result() for c in consumers], acct


def _guarded(consumer, fn, arg):
    try:
        fn(arg)
    except StreamRunError:
        raise
    except Exception as exc:
        raise StreamRunError(consumer.name, str(exc)) from exc
