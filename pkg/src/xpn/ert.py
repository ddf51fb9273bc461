"""Termination decider over an extended reachability tree.

The tree unrolls runs depth-first in declaration order.  A node is cut as a
subsumed leaf when some ancestor marking is componentwise <= it AND agrees
with it exactly on every place whose index is at most the largest
transition index used along the connecting path.  Place index is position
plus one (the least place has index 1); a transition's index is the largest
index among its inhibitor pre-places, 0 if it has none.

A subsumed leaf certifies a pumpable non-terminating run (stem to the
ancestor, pump down to the leaf).  If the tree completes without one, every
branch ends in a deadlock and the net terminates.  The tree is finite for
eligible nets, so running out of node budget is a resource error, not a
verdict.

Eligible nets: every transition's inhibitor pre-places form a downward
closed set, reset arcs are unrestricted, transfer arcs are absent.
"""

from __future__ import annotations

from dataclasses import dataclass

from .net import (Inhibitor, Marking, Net, TRANSFER_KIND, XpnError, classify,
                  require_valid, successors)
from .explore import Trace, replay, _leq


class BudgetExceededError(XpnError):
    """The node budget ran out before the tree was complete."""


class NotEligibleError(XpnError):
    """The net is outside the class this decider handles."""


def place_index(net: Net, place: str) -> int:
    return net.place_pos(place) + 1


def transition_index(net: Net, tname: str) -> int:
    t = net.transition(tname)
    idxs = [net.place_pos(p) + 1
            for p, a in t.pre.items() if isinstance(a, Inhibitor)]
    return max(idxs, default=0)


def compat(net: Net, m1: Marking, m2: Marking, level: int) -> bool:
    """Equality on every place of index <= level, i.e. the first `level`
    positions."""
    level = min(level, len(net.places))
    return m1[:level] == m2[:level]


def subsume(net: Net, m2: Marking, m1: Marking, rho) -> bool:
    """Does the run `rho` (replaying m2 -> m1) pump?  Checks m2 <= m1 plus
    compatibility at the largest transition index along rho."""
    names = tuple(rho.transitions) if isinstance(rho, Trace) else tuple(rho)
    end = replay(net, m2, names).markings[-1]
    if end != tuple(m1):
        raise XpnError("rho does not lead from m2 to m1")
    level = max((transition_index(net, n) for n in names), default=0)
    return _leq(m2, m1) and compat(net, m2, m1, level)


@dataclass(frozen=True)
class Terminating:
    tree_size: int


@dataclass(frozen=True)
class NonTerminating:
    stem: Trace
    pump: Trace


@dataclass(frozen=True)
class ErtNode:
    marking: Marking
    parent: int | None
    via: str | None  # transition into this node
    via_index: int  # its transition index
    status: str  # "inner" | "deadlock" | "subsumed"
    subsumed_by: int | None = None


@dataclass(frozen=True)
class Ert:
    nodes: tuple
    verdict: object  # Terminating | NonTerminating


def check_eligible(net: Net):
    require_valid(net)
    cls = classify(net)
    if TRANSFER_KIND in cls.specials:
        raise NotEligibleError("transfer arcs are not supported")
    if not cls.ert_eligible:
        raise NotEligibleError(
            "some transition's inhibitor pre-places are not downward closed")


def _scan(nodes, statuses, nid) -> int | None:
    """Nearest ancestor subsuming node `nid`, or None."""
    node = nodes[nid]
    m1 = node.marking
    level = node.via_index
    anc = node.parent
    while anc is not None:
        a = nodes[anc]
        m2 = a.marking
        lv = min(level, len(m1))
        if m2[:lv] == m1[:lv] and _leq(m2, m1):
            return anc
        level = max(level, a.via_index)
        anc = a.parent
    return None


def _path_names(nodes, top: int, bottom: int) -> list:
    """Transition names along the tree path from node `top` down to
    `bottom` (via edges of every node strictly below `top`)."""
    names = []
    at = bottom
    while at != top:
        names.append(nodes[at].via)
        at = nodes[at].parent
    names.reverse()
    return names


def build_ert(net: Net, max_nodes: int = 1_000_000, rng=None,
              stop_early: bool = False) -> Ert:
    """Expand the full tree (or stop at the first subsumed leaf when
    `stop_early`).  `rng` shuffles child order; the verdict is order
    independent, which tests exploit."""
    check_eligible(net)
    tidx = {t.name: transition_index(net, t.name) for t in net.transitions}

    nodes = [ErtNode(tuple(net.initial), None, None, 0, "inner")]
    statuses = ["inner"]
    subsumed_by = [None]
    first_cut = None  # (leaf id, ancestor id)
    stack = [0]

    while stack:
        nid = stack.pop()
        succ = successors(net, nodes[nid].marking)
        if rng is not None:
            rng.shuffle(succ)
        if not succ:
            statuses[nid] = "deadlock"
            continue
        child_ids = []
        for name, m2 in succ:
            if len(nodes) >= max_nodes:
                raise BudgetExceededError(
                    f"tree exceeded {max_nodes} nodes")
            cid = len(nodes)
            nodes.append(ErtNode(m2, nid, name, tidx[name], "inner"))
            statuses.append("inner")
            subsumed_by.append(None)
            anc = _scan(nodes, statuses, cid)
            if anc is not None:
                statuses[cid] = "subsumed"
                subsumed_by[cid] = anc
                if first_cut is None:
                    first_cut = (cid, anc)
                    if stop_early:
                        stack = []
                        child_ids = []
                        break
            else:
                child_ids.append(cid)
        stack.extend(reversed(child_ids))

    if first_cut is None:
        verdict = Terminating(len(nodes))
    else:
        leaf, anc = first_cut
        stem = replay(net, net.initial, _path_names(nodes, 0, anc))
        pump = replay(net, stem.markings[-1], _path_names(nodes, anc, leaf))
        verdict = NonTerminating(stem, pump)

    final = tuple(
        ErtNode(n.marking, n.parent, n.via, n.via_index, statuses[i],
                subsumed_by[i])
        for i, n in enumerate(nodes))
    return Ert(final, verdict)


def decide_termination(net: Net, max_nodes: int = 1_000_000, rng=None):
    """Terminating(tree_size) or NonTerminating(stem, pump)."""
    return build_ert(net, max_nodes, rng, stop_early=True).verdict


def verify_pump(net: Net, verdict) -> bool:
    """Independent certificate check: replay the stem, replay the pump
    twice, and confirm the subsumption conditions recur."""
    if not isinstance(verdict, NonTerminating):
        return False
    if not verdict.pump.transitions:
        return False
    try:
        m2 = replay(net, net.initial, verdict.stem.transitions).markings[-1]
        m1 = replay(net, m2, verdict.pump.transitions).markings[-1]
        level = max(transition_index(net, n) for n in verdict.pump.transitions)
        if not (_leq(m2, m1) and compat(net, m2, m1, level)):
            return False
        m1b = replay(net, m1, verdict.pump.transitions).markings[-1]
        return _leq(m1, m1b) and compat(net, m1, m1b, level)
    except XpnError:
        return False


def ert_dot(net: Net, ert: Ert) -> str:
    """DOT rendering of the tree; subsumed leaves are doubled and linked to
    the ancestor that cuts them."""
    lines = ["digraph ert {", "  node [fontname=\"Helvetica\"];"]
    for i, n in enumerate(ert.nodes):
        label = " ".join(str(c) for c in n.marking)
        extra = ""
        if n.status == "subsumed":
            extra = " peripheries=2 color=red"
        elif n.status == "deadlock":
            extra = " shape=box"
        lines.append(f"  n{i} [label=\"{label}\"{extra}];")
    for i, n in enumerate(ert.nodes):
        if n.parent is not None:
            lines.append(f"  n{n.parent} -> n{i} [label=\"{n.via}\"];")
        if n.subsumed_by is not None:
            lines.append(
                f"  n{i} -> n{n.subsumed_by} [style=dashed color=red "
                f"label=\"subsumed\"];")
    lines.append("}")
    return "\n".join(lines) + "\n"
