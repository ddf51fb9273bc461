"""Net-to-net reductions between the special-arc classes.

Every operation returns a TransformResult holding the constructed net, a
total injective map from source markings to target markings (plus
alternates when one source marking has several representatives), a
sentence saying how the source question reads off the target, and origin
notes covering every output place and transition.

New places are appended above all existing ones in the hierarchy order
unless the construction itself dictates otherwise (transfer_hierarchize
reorders three places at the bottom).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .net import (INHIBIT, INHIBITOR_KIND, Inhibitor, Marking, Net, Numeric,
                  RESET, Reset, TRANSFER_KIND, Transfer, Transition, XpnError,
                  classify, require_valid)

COPY = "copy"
CONST = "const"


class TransformError(XpnError):
    pass


@dataclass(frozen=True)
class MarkingMap:
    """Per target position either ("copy", source_pos) or ("const", n)."""

    entries: tuple

    def __call__(self, m: Marking) -> Marking:
        return tuple(m[a] if k == COPY else a for k, a in self.entries)

    def compose(self, inner: "MarkingMap") -> "MarkingMap":
        out = []
        for k, a in self.entries:
            out.append(inner.entries[a] if k == COPY else (k, a))
        return MarkingMap(tuple(out))


def identity_entries(n: int) -> list:
    return [(COPY, i) for i in range(n)]


@dataclass(frozen=True)
class TransformResult:
    net: Net
    forward: MarkingMap
    query: str
    goal: Marking | None = None
    alt_forwards: tuple = ()
    place_origin: dict = field(default_factory=dict)
    trans_origin: dict = field(default_factory=dict)


def _fresh(base: str, taken: set) -> str:
    name = base
    k = 2
    while name in taken:
        name = f"{base}{k}"
        k += 1
    taken.add(name)
    return name


def _numeric_pre(t: Transition) -> dict:
    return {p: a for p, a in t.pre.items() if isinstance(a, Numeric)}


def _gated(t: Transition, gate: str) -> Transition:
    pre = dict(t.pre)
    pre[gate] = Numeric(1)
    post = dict(t.post)
    post[gate] = post.get(gate, 0) + 1
    return Transition(t.name, pre, post)


# ---------------------------------------------------------------------------
# reset elimination

def _pick_special(net: Net, kinds) -> Transition | None:
    for t in net.transitions:
        if any(isinstance(a, kinds) for a in t.pre.values()):
            return t
    return None


def _elim_one(net: Net, with_transfer: bool) -> TransformResult:
    require_valid(net)
    cls = classify(net)
    if with_transfer:
        if not cls.constrained_transfer:
            raise TransformError(
                "a transfer arc targets a place with a non-numeric arc on "
                "the same transition")
        kinds = (Reset, Transfer)
        what = "reset or transfer"
    else:
        if TRANSFER_KIND in cls.specials:
            raise TransformError("transfer arcs present; use hirct_elim")
        kinds = (Reset,)
        what = "reset"
    t = _pick_special(net, kinds)
    if t is None:
        raise TransformError(f"no transition with a {what} pre-arc")

    ptaken = set(net.places)
    ttaken = {x.name for x in net.transitions}
    busy = _fresh(f"{t.name}_busy", ptaken)
    lock = _fresh("lock", ptaken)
    places = net.places + (busy, lock)

    resets = [p for p, a in t.pre.items() if isinstance(a, Reset)]
    xfers = [(p, a.target) for p, a in t.pre.items() if isinstance(a, Transfer)]
    inhibs = [p for p, a in t.pre.items() if isinstance(a, Inhibitor)]

    place_origin = {p: "original" for p in net.places}
    place_origin[busy] = f"token held while the phases of {t.name} run"
    place_origin[lock] = "token held while any other transition may fire"
    trans_origin = {}

    transitions = []
    for u in net.transitions:
        if u.name != t.name:
            transitions.append(_gated(u, lock))
            trans_origin[u.name] = "original, gated on the lock"
            continue
        start = _fresh(f"{t.name}_start", ttaken)
        pre = dict(_numeric_pre(t))
        pre[lock] = Numeric(1)
        transitions.append(Transition(start, pre, {busy: 1}))
        trans_origin[start] = (
            f"consumes the numeric pre-arcs of {t.name} and opens its gadget")
        for p in resets:
            name = _fresh(f"{t.name}_drain_{p}", ttaken)
            transitions.append(
                Transition(name, {p: Numeric(1), busy: Numeric(1)}, {busy: 1}))
            trans_origin[name] = f"discards one token of reset place {p}"
        for p, target in xfers:
            name = _fresh(f"{t.name}_move_{p}", ttaken)
            transitions.append(
                Transition(name, {p: Numeric(1), busy: Numeric(1)},
                           {target: 1, busy: 1}))
            trans_origin[name] = f"moves one token from {p} to {target}"
        finish = _fresh(f"{t.name}_finish", ttaken)
        pre = {busy: Numeric(1)}
        for p in inhibs + resets + [p for p, _ in xfers]:
            pre[p] = INHIBIT
        post = dict(t.post)
        post[lock] = post.get(lock, 0) + 1
        transitions.append(Transition(finish, pre, post))
        trans_origin[finish] = (
            f"checks the emptied places and performs the post-arcs of {t.name}")

    fmap = MarkingMap(tuple(identity_entries(len(net.places))
                            + [(CONST, 0), (CONST, 1)]))
    out = Net(places, tuple(transitions), fmap(net.initial))
    return TransformResult(
        net=out, forward=fmap,
        query=("a marking M is reachable in the source iff forward(M) is "
               "reachable here; forward sets busy=0 lock=1"),
        place_origin=place_origin, trans_origin=trans_origin)


def hir_elim(net: Net) -> TransformResult:
    """Replace the first reset-bearing transition by a start/drain/finish
    gadget guarded by a lock place.  Inhibitor and reset arcs only."""
    return _elim_one(net, with_transfer=False)


def hirct_elim(net: Net) -> TransformResult:
    """Like hir_elim but also accepts constrained transfer arcs: each
    transfer arc of the chosen transition becomes a one-token mover, and
    the finish transition additionally requires the sources empty."""
    return _elim_one(net, with_transfer=True)


def hir_elim_all(net: Net) -> TransformResult:
    """Iterate hir_elim until no reset-bearing transition remains."""
    require_valid(net)
    result = None
    current = net
    while _pick_special(current, (Reset,)) is not None:
        step = hir_elim(current)
        if result is None:
            result = step
        else:
            origin = dict(step.place_origin)
            for p, desc in result.place_origin.items():
                if origin.get(p) == "original":
                    origin[p] = desc
            result = TransformResult(
                net=step.net,
                forward=step.forward.compose(result.forward),
                query=result.query,
                place_origin=origin,
                trans_origin=step.trans_origin)
        current = step.net
    if result is None:
        raise TransformError("no transition with a reset pre-arc")
    return result


# ---------------------------------------------------------------------------
# deadlock-freedom <-> reachability

def _deadlock_clauses(net: Net, cap: int) -> list:
    """DNF of "no transition can fire": per transition pick one way to be
    disabled (a numeric pre-place held under its weight, or an inhibited
    place held nonempty); prune contradictory picks, deduplicate, cap."""
    per_t = []
    for t in net.transitions:
        opts = []
        for place, arc in t.pre.items():
            p = net.place_pos(place)
            if isinstance(arc, Numeric) and arc.weight > 0:
                opts.extend(("exact", p, j) for j in range(arc.weight))
            elif isinstance(arc, Inhibitor):
                opts.append(("atleast", p, 1))
        if not opts:
            return []  # that transition is never disabled: no deadlock
        per_t.append(opts)

    clauses = []
    seen = set()
    assign: dict = {}

    def rec(i: int):
        if i == len(per_t):
            key = frozenset(assign.items())
            if key not in seen:
                seen.add(key)
                if len(clauses) >= cap:
                    raise TransformError(
                        f"more than {cap} deadlock clauses; raise clause_cap")
                clauses.append(dict(assign))
            return
        for kind, p, j in per_t[i]:
            prev = assign.get(p)
            if kind == "exact":
                if prev == ("atleast",) and j == 0:
                    continue
                if isinstance(prev, tuple) and prev[0] == "exact" and prev[1] != j:
                    continue
                assign[p] = ("exact", j)
            else:
                if prev == ("exact", 0):
                    continue
                if prev is None:
                    assign[p] = ("atleast",)
            saved = prev
            rec(i + 1)
            if saved is None:
                del assign[p]
            else:
                assign[p] = saved
        return

    rec(0)
    return clauses


def dlf_to_reach(net: Net, clause_cap: int = 10_000) -> TransformResult:
    """Source has a reachable deadlock iff the constructed net reaches the
    goal marking (goal place holding the only token)."""
    require_valid(net)
    cls = classify(net)
    if TRANSFER_KIND in cls.specials:
        raise TransformError("transfer arcs are not supported here")

    clauses = _deadlock_clauses(net, clause_cap)
    ptaken = set(net.places)
    ttaken = {t.name for t in net.transitions}
    live = _fresh("live", ptaken)
    goalp = _fresh("goal", ptaken)

    places = list(net.places) + [live, goalp]
    place_origin = {p: "original" for p in net.places}
    place_origin[live] = "token held while the source net still runs"
    place_origin[goalp] = "token placed once a deadlock clause is certified"
    trans_origin = {}

    transitions = [_gated(t, live) for t in net.transitions]
    for t in net.transitions:
        trans_origin[t.name] = "original, gated on live"

    for k, clause in enumerate(clauses):
        cplace = _fresh(f"c{k}", ptaken)
        places.append(cplace)
        place_origin[cplace] = f"clause {k} in progress"
        enter = _fresh(f"c{k}_enter", ttaken)
        transitions.append(Transition(enter, {live: Numeric(1)}, {cplace: 1}))
        trans_origin[enter] = f"commits to deadlock clause {k}"

        check_pre = {cplace: Numeric(1)}
        for p in net.places:
            check_pre[p] = INHIBIT
        for pos in sorted(clause):
            place = net.places[pos]
            lit = clause[pos]
            if lit == ("atleast",) or lit[1] >= 1:
                companion = _fresh(f"c{k}_{place}", ptaken)
                places.append(companion)
                place_origin[companion] = (
                    f"clause {k}: witness that {place} held the right count")
                check_pre[companion] = Numeric(1)
                take = _fresh(f"c{k}_take_{place}", ttaken)
                weight = 1 if lit == ("atleast",) else lit[1]
                transitions.append(Transition(
                    take,
                    {place: Numeric(weight), cplace: Numeric(1)},
                    {companion: 1, cplace: 1}))
                trans_origin[take] = (
                    f"clause {k}: moves {weight} token(s) out of {place}")
                if lit == ("atleast",):
                    drop = _fresh(f"c{k}_drop_{place}", ttaken)
                    transitions.append(Transition(
                        drop, {place: Numeric(1), cplace: Numeric(1)},
                        {cplace: 1}))
                    trans_origin[drop] = (
                        f"clause {k}: discards surplus tokens of {place}")
            # an exact-zero literal needs no mover: the check transition
            # already inhibits on the place
        for pos in range(len(net.places)):
            if pos not in clause:
                place = net.places[pos]
                drop = _fresh(f"c{k}_drop_{place}", ttaken)
                transitions.append(Transition(
                    drop, {place: Numeric(1), cplace: Numeric(1)}, {cplace: 1}))
                trans_origin[drop] = (
                    f"clause {k}: empties unconstrained place {place}")
        checkt = _fresh(f"c{k}_check", ttaken)
        transitions.append(Transition(checkt, check_pre, {goalp: 1}))
        trans_origin[checkt] = f"certifies clause {k} and places the goal token"

    n_src = len(net.places)
    entries = identity_entries(n_src) + [(CONST, 1), (CONST, 0)]
    entries += [(CONST, 0)] * (len(places) - n_src - 2)
    fmap = MarkingMap(tuple(entries))
    goal = tuple(1 if p == goalp else 0 for p in places)
    out = Net(tuple(places), tuple(transitions), fmap(net.initial))
    return TransformResult(
        net=out, forward=fmap,
        query=("the source has a reachable deadlock iff this net reaches "
               "the goal marking (goal=1, all else 0)"),
        goal=goal,
        place_origin=place_origin, trans_origin=trans_origin)


def reach_to_dlf(net: Net, target: Marking) -> TransformResult:
    """Target reachable in the source iff the constructed net has a
    reachable deadlock; that deadlock is unique (done=1, all else 0)."""
    require_valid(net)
    target = tuple(target)
    if len(target) != len(net.places):
        raise TransformError("target marking length mismatch")
    if any(n < 0 for n in target):
        raise TransformError("negative target marking")

    ptaken = set(net.places)
    ttaken = {t.name for t in net.transitions}
    gate = _fresh("gate", ptaken)
    tick = _fresh("tick", ptaken)
    done = _fresh("done", ptaken)
    places = net.places + (gate, tick, done)

    place_origin = {p: "original" for p in net.places}
    place_origin[gate] = "token the source transitions borrow per firing"
    place_origin[tick] = "keeps the net live until the final check"
    place_origin[done] = "marks that the target was hit exactly"
    trans_origin = {}

    transitions = [_gated(t, gate) for t in net.transitions]
    for t in net.transitions:
        trans_origin[t.name] = "original, gated"
    for p in net.places:
        name = _fresh(f"idle_{p}", ttaken)
        transitions.append(Transition(name, {p: Numeric(1)}, {p: 1}))
        trans_origin[name] = f"keeps the net live while {p} is nonempty"
    spin = _fresh("spin", ttaken)
    transitions.append(Transition(spin, {tick: Numeric(1)}, {tick: 1}))
    trans_origin[spin] = "keeps the net live until the final check"
    finish = _fresh("finish", ttaken)
    pre = {p: Numeric(n) for p, n in zip(net.places, target) if n > 0}
    pre[gate] = Numeric(1)
    pre[tick] = Numeric(1)
    transitions.append(Transition(finish, pre, {done: 1}))
    trans_origin[finish] = "consumes the target marking plus both control tokens"

    fmap = MarkingMap(tuple(identity_entries(len(net.places))
                            + [(CONST, 1), (CONST, 1), (CONST, 0)]))
    goal = tuple(0 for _ in net.places) + (0, 0, 1)
    out = Net(places, tuple(transitions), fmap(net.initial))
    return TransformResult(
        net=out, forward=fmap,
        query=("the target is reachable in the source iff this net has a "
               "reachable deadlock; the only reachable deadlock is the goal "
               "marking (done=1, all else 0)"),
        goal=goal,
        place_origin=place_origin, trans_origin=trans_origin)


# ---------------------------------------------------------------------------
# two inhibitors -> one inhibitor + one reset

def two_inh_to_reset(net: Net) -> TransformResult:
    """Trade the first of exactly two inhibitor arcs for a reset arc, using
    a copy place that shadows the reset place's numeric traffic."""
    require_valid(net)
    cls = classify(net)
    if cls.specials not in ((), (INHIBITOR_KIND,)):
        raise TransformError("only inhibitor arcs are allowed here")
    arcs = [(i, p) for i, t in enumerate(net.transitions)
            for p, a in t.pre.items() if isinstance(a, Inhibitor)]
    if len(arcs) != 2:
        raise TransformError(f"expected exactly two inhibitor arcs, found {len(arcs)}")
    (i1, p2), (_i4, _q) = arcs
    t1_name = net.transitions[i1].name

    ptaken = set(net.places)
    copy = _fresh(f"{p2}_copy", ptaken)
    places = net.places + (copy,)
    p2_pos = net.place_pos(p2)

    transitions = []
    for i, t in enumerate(net.transitions):
        pre = dict(t.pre)
        if i == i1:
            pre[p2] = RESET
        a = t.pre.get(p2)
        if isinstance(a, Numeric):
            pre[copy] = a
        post = dict(t.post)
        if p2 in post:
            post[copy] = post[p2]
        transitions.append(Transition(t.name, pre, post))

    entries = identity_entries(len(net.places)) + [(COPY, p2_pos)]
    fmap = MarkingMap(tuple(entries))
    out = Net(places, tuple(transitions), fmap(net.initial))
    place_origin = {p: "original" for p in net.places}
    place_origin[copy] = (
        f"mirrors the numeric traffic of {p2}; equality certifies that the "
        f"reset on {t1_name} only ever fired on empty")
    trans_origin = {t.name: ("inhibitor traded for a reset" if t.name == t1_name
                             else "original, numeric arcs mirrored onto the copy")
                    for t in net.transitions}
    return TransformResult(
        net=out, forward=fmap,
        query=("M is reachable in the source iff forward(M) is reachable "
               f"here, where forward duplicates {p2} into {copy}"),
        place_origin=place_origin, trans_origin=trans_origin)


# ---------------------------------------------------------------------------
# two transfers -> hierarchical transfers

def _split_swapper(net: Net, i2: int):
    """Make the mode-swapping transition free of numeric pre-arcs from the
    duplicated place by splitting it into an atomic consume/act pair."""
    t2 = net.transitions[i2]
    ptaken = set(net.places)
    ttaken = {t.name for t in net.transitions}
    hold = _fresh("hold", ptaken)
    mid = _fresh("mid", ptaken)
    places = net.places + (hold, mid)

    transitions = []
    for i, t in enumerate(net.transitions):
        if i != i2:
            transitions.append(_gated(t, hold))
            continue
        pre_a = dict(_numeric_pre(t2))
        pre_a[hold] = Numeric(1)
        a_name = _fresh(f"{t2.name}_a", ttaken)
        transitions.append(Transition(a_name, pre_a, {mid: 1}))
        pre_b = {p: a for p, a in t2.pre.items() if isinstance(a, Transfer)}
        pre_b[mid] = Numeric(1)
        post_b = dict(t2.post)
        post_b[hold] = post_b.get(hold, 0) + 1
        b_name = _fresh(f"{t2.name}_b", ttaken)
        transitions.append(Transition(b_name, pre_b, post_b))

    fmap = MarkingMap(tuple(identity_entries(len(net.places))
                            + [(CONST, 1), (CONST, 0)]))
    out = Net(places, tuple(transitions), fmap(net.initial))
    return out, fmap, hold, mid


def transfer_hierarchize(net: Net) -> TransformResult:
    """Reorder and duplicate so that both transfer arcs respect the place
    order: the first transfer's source gets a shadow copy, and a mode token
    says which of the two currently represents it.  M is reachable in the
    source iff either representative marking is reachable here."""
    require_valid(net)
    cls = classify(net)
    if cls.specials != (TRANSFER_KIND,):
        raise TransformError("exactly the transfer kind must be present")
    arcs = [(i, p, a.target) for i, t in enumerate(net.transitions)
            for p, a in t.pre.items() if isinstance(a, Transfer)]
    if len(arcs) != 2:
        raise TransformError(f"expected exactly two transfer arcs, found {len(arcs)}")
    (i1, p1, p3), (i2, p2, p4) = arcs
    if i1 == i2:
        raise TransformError("the two transfer arcs must sit on distinct transitions")
    if p1 == p2:
        raise TransformError("the two transfer arcs must have distinct sources")
    if p4 == p1:
        raise TransformError(
            f"the swapping transition may not transfer into {p1}")
    if net.transitions[i2].post.get(p1):
        raise TransformError(
            f"a post-arc from {net.transitions[i2].name} into {p1} is not "
            "supported")

    split_map = None
    split_names = ()
    if isinstance(net.transitions[i2].pre.get(p1), Numeric):
        net, split_map, hold, mid = _split_swapper(net, i2)
        split_names = (hold, mid)
        arcs = [(i, p, a.target) for i, t in enumerate(net.transitions)
                for p, a in t.pre.items() if isinstance(a, Transfer)]
        (i1, p1, p3), (i2, p2, p4) = arcs

    t1 = net.transitions[i1]
    t2 = net.transitions[i2]

    ptaken = set(net.places)
    ttaken = {t.name for t in net.transitions}
    alt = _fresh(f"{p1}_alt", ptaken)
    mode_a = _fresh("modeA", ptaken)
    mode_b = _fresh("modeB", ptaken)

    rest = [p for p in net.places if p not in (p1, p2)]
    places = [p1, alt, p2] + rest + [mode_a, mode_b]

    def subst(p: str) -> str:
        return alt if p == p1 else p

    def build_copy(t: Transition, mode: str) -> Transition:
        b_side = mode == "B"
        pre = {}
        for p, a in t.pre.items():
            p_ = subst(p) if b_side else p
            if isinstance(a, Transfer):
                a = Transfer(subst(a.target) if b_side else a.target)
            pre[p_] = a
        post = {}
        for p, w in t.post.items():
            post[subst(p) if b_side else p] = w
        if t.name == t1.name:
            # shadow transfer so the source pair stays downward closed
            if b_side:
                pre[p1] = Transfer(p3)
            else:
                pre[alt] = Transfer(p3)
        if t.name == t2.name:
            pre[p1] = Transfer(alt)
            pre[alt] = Transfer(p1)
        gate_in = mode_b if b_side else mode_a
        swaps = t.name == t2.name
        gate_out = (mode_a if b_side else mode_b) if swaps else gate_in
        pre[gate_in] = Numeric(1)
        post[gate_out] = post.get(gate_out, 0) + 1
        name = t.name if not b_side else _fresh(f"{t.name}_alt", ttaken)
        return Transition(name, pre, post)

    transitions = [build_copy(t, "A") for t in net.transitions]
    b_copies = [build_copy(t, "B") for t in net.transitions]
    transitions += b_copies

    pos_of = {p: i for i, p in enumerate(net.places)}
    entries_a = []
    entries_b = []
    for p in places:
        if p == alt:
            entries_a.append((CONST, 0))
            entries_b.append((COPY, pos_of[p1]))
        elif p == p1:
            entries_a.append((COPY, pos_of[p1]))
            entries_b.append((CONST, 0))
        elif p == mode_a:
            entries_a.append((CONST, 1))
            entries_b.append((CONST, 0))
        elif p == mode_b:
            entries_a.append((CONST, 0))
            entries_b.append((CONST, 1))
        else:
            entries_a.append((COPY, pos_of[p]))
            entries_b.append((COPY, pos_of[p]))
    fmap = MarkingMap(tuple(entries_a))
    bmap = MarkingMap(tuple(entries_b))
    if split_map is not None:
        fmap = fmap.compose(split_map)
        bmap = bmap.compose(split_map)

    # initial marking: mode A representative of the (possibly split) initial
    out = Net(tuple(places), tuple(transitions),
              MarkingMap(tuple(entries_a))(net.initial))

    place_origin = {p: "original" for p in net.places}
    place_origin[alt] = f"shadow of {p1}; holds it while mode B is active"
    place_origin[mode_a] = f"mode token: {p1} is the live representative"
    place_origin[mode_b] = f"mode token: {alt} is the live representative"
    for p in split_names:
        place_origin[p] = "atomic split of the swapping transition"
    trans_origin = {}
    for t, b in zip(net.transitions, b_copies):
        role = "original" if t.name not in (t1.name, t2.name) else (
            "first transfer, shadow arc added" if t.name == t1.name
            else "second transfer, swaps the mode and the representatives")
        trans_origin[t.name] = f"{role} (mode A copy)"
        trans_origin[b.name] = f"{role} (mode B copy)"

    query = ("M is reachable in the source iff forward(M) or alt_forward(M) "
             "is reachable here (mode A and mode B representatives)")
    return TransformResult(
        net=out, forward=fmap, query=query, alt_forwards=(bmap,),
        place_origin=place_origin, trans_origin=trans_origin)
