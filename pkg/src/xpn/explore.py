"""Bounded forward exploration and exact backward coverability.

Forward search is breadth-first over exact markings with a visited set and
deterministic successor order (transition declaration order), so traces are
reproducible.  The budget counts node expansions.  A verdict is definitive
unless the budget (or a depth cap) cut the search off, in which case the
status is OUT_OF_BUDGET and nothing can be concluded.

backward_cover saturates minimal bases of upward-closed predecessor sets
and is exact, but only supports nets without inhibitor arcs.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .net import (Inhibitor, Marking, Net, NotFirableError, Numeric, Reset,
                  Transfer, XpnError, fire, require_valid, successors)

FOUND = "found"
EXHAUSTED = "exhausted"
OUT_OF_BUDGET = "out-of-budget"


@dataclass(frozen=True)
class Trace:
    """A replayed run: markings[0] is the start, markings[i+1] the marking
    after transitions[i]."""

    transitions: tuple
    markings: tuple


def replay(net: Net, start: Marking, names) -> Trace:
    """Fire `names` in order from `start`; raises NotFirableError if the
    sequence is not a run."""
    ms = [tuple(start)]
    for name in names:
        ms.append(fire(net, ms[-1], name))
    return Trace(tuple(names), tuple(ms))


@dataclass(frozen=True)
class SearchBudget:
    max_steps: int = 1_000_000
    max_depth: int | None = None


@dataclass(frozen=True)
class SearchResult:
    status: str  # FOUND | EXHAUSTED | OUT_OF_BUDGET
    trace: Trace | None = None
    expanded: int = 0

    @property
    def found(self) -> bool:
        return self.status == FOUND

    @property
    def definitive(self) -> bool:
        return self.status != OUT_OF_BUDGET


def _leq(a: Marking, b: Marking) -> bool:
    return all(x <= y for x, y in zip(a, b))


def _bfs(net: Net, start: Marking, goal, budget: SearchBudget) -> SearchResult:
    """Shared engine: `goal(marking, successor_list)` decides hits.  The hit
    trace is replayed before returning, as a postcondition check."""
    require_valid(net)
    start = tuple(start)
    if len(start) != len(net.places):
        raise XpnError("start marking length mismatch")
    parent = {start: None}
    queue = deque([(start, 0)])
    expanded = 0
    pruned = False

    def finish(m: Marking) -> SearchResult:
        names = []
        at = m
        while parent[at] is not None:
            prev, via = parent[at]
            names.append(via)
            at = prev
        names.reverse()
        trace = replay(net, start, names)
        if trace.markings[-1] != m:
            raise XpnError("internal error: trace replay mismatch")
        return SearchResult(FOUND, trace, expanded)

    while queue:
        if expanded >= budget.max_steps:
            return SearchResult(OUT_OF_BUDGET, None, expanded)
        m, depth = queue.popleft()
        expanded += 1
        succ = successors(net, m)
        if goal(m, succ):
            return finish(m)
        if budget.max_depth is not None and depth >= budget.max_depth:
            if succ:
                pruned = True
            continue
        for name, m2 in succ:
            if m2 not in parent:
                parent[m2] = (m, name)
                queue.append((m2, depth + 1))
    status = OUT_OF_BUDGET if pruned else EXHAUSTED
    return SearchResult(status, None, expanded)


def bounded_reach(net: Net, target: Marking,
                  budget: SearchBudget = SearchBudget()) -> SearchResult:
    """Is `target` reachable (exact equality) from the initial marking?"""
    target = tuple(target)
    return _bfs(net, net.initial, lambda m, s: m == target, budget)


def bounded_cover(net: Net, target: Marking,
                  budget: SearchBudget = SearchBudget()) -> SearchResult:
    """Is some marking >= `target` reachable from the initial marking?"""
    target = tuple(target)
    return _bfs(net, net.initial, lambda m, s: _leq(target, m), budget)


def bounded_deadlock(net: Net,
                     budget: SearchBudget = SearchBudget()) -> SearchResult:
    """Is a marking with no firable transition reachable?"""
    return _bfs(net, net.initial, lambda m, s: not s, budget)


# ---------------------------------------------------------------------------
# backward coverability

class UpwardClosedSet:
    """An upward-closed set of markings kept as its minimal basis."""

    def __init__(self, basis=()):
        self.basis: list = []
        for m in basis:
            self.add(m)

    def contains(self, m: Marking) -> bool:
        return any(_leq(b, m) for b in self.basis)

    def add(self, m: Marking) -> bool:
        """Add ↑m; returns False if already covered."""
        m = tuple(m)
        if self.contains(m):
            return False
        self.basis = [b for b in self.basis if not _leq(m, b)]
        self.basis.append(m)
        return True


@dataclass(frozen=True)
class BackwardCoverResult:
    coverable: bool
    basis: tuple  # minimal basis of the backward-reachable upward-closed set


def _compositions(total: int, parts: int):
    """All ways to write `total` as an ordered sum of `parts` >= 0 ints."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _min_predecessors(net: Net, plan, target: Marking) -> list:
    """Minimal markings m with fire(m, t) >= target, for one transition.

    Reset and transfer arcs make the predecessor basis non-singleton: a
    transfer target's demand can be met partly by tokens already in the
    target place and partly by tokens arriving from each source, and the
    minimal ways to split that demand are exactly the integer compositions.
    """
    _, numeric, inhib, resets, xfers, posts = plan
    n = len(net.places)
    pre_w = [0] * n
    for p, w in numeric:
        pre_w[p] = w
    post_w = [0] * n
    for p, w in posts:
        post_w[p] += w
    zeroed = set(resets) | {src for src, _ in xfers}
    incoming: dict = {}
    for src, tgt in xfers:
        incoming.setdefault(tgt, []).append(src)

    base = [0] * n  # fixed part of the predecessor
    groups = []  # (slots, demand) with slots = place positions sharing it
    for p in range(n):
        demand = max(0, target[p] - post_w[p])
        if p in incoming:
            slots = ([] if p in zeroed else [p]) + incoming[p]
            groups.append((p, slots, demand))
        elif p in zeroed:
            if demand > 0:
                return []  # this transition cannot refill a zeroed place
        else:
            base[p] = pre_w[p] + demand
    for p in range(n):
        if p not in zeroed:
            base[p] = max(base[p], pre_w[p])

    out = [base]
    for p, slots, demand in groups:
        if not slots:
            if demand > 0:
                return []
            continue
        split_axes = list(_compositions(demand, len(slots)))
        nxt = []
        for m in out:
            for split in split_axes:
                m2 = list(m)
                for slot, extra in zip(slots, split):
                    m2[slot] += extra
                nxt.append(m2)
        out = nxt
    return [tuple(m) for m in out]


def backward_cover(net: Net, target: Marking) -> BackwardCoverResult:
    """Exact coverability via backward saturation; inhibitor arcs are not
    supported (raises)."""
    require_valid(net)
    target = tuple(target)
    if len(target) != len(net.places):
        raise XpnError("target marking length mismatch")
    for t in net.transitions:
        if any(isinstance(a, Inhibitor) for a in t.pre.values()):
            raise XpnError("backward_cover does not support inhibitor arcs")

    plans = net._plan()
    ucs = UpwardClosedSet([target])
    frontier = [target]
    while frontier:
        fresh = []
        for b in frontier:
            for plan in plans:
                for p in _min_predecessors(net, plan, b):
                    if ucs.add(p):
                        fresh.append(p)
        frontier = fresh
    return BackwardCoverResult(ucs.contains(net.initial), tuple(sorted(ucs.basis)))
