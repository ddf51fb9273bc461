"""Text formats: the .xpn net format, marking literals and trace files.

A .xpn file looks like::

    # lines starting with # are comments
    places: p1 p2 p3 p4 p5
    marking: p1=3
    trans t1: in p1*2, inh p2, reset p3, xfer p4->p5 ; out p5*1, p3*2

The places line is required and comes first; its order is the hierarchy
order (leftmost is least).  The marking line is optional (default all
zero).  Weight 0 arcs are treated as absent.  render_net() emits a
canonical form that parses back to an equal net.
"""

from __future__ import annotations

import re

from .net import (Arc, INHIBIT, Inhibitor, Marking, Net, Numeric, RESET,
                  Reset, Transfer, Transition, XpnError)

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_.]*")
_INT_RE = re.compile(r"[0-9]+")


class ParseError(XpnError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, column {col}: {message}")
        self.message = message
        self.line = line
        self.col = col


class _Cursor:
    """Single-line scanner that reports 1-based columns on failure."""

    def __init__(self, text: str, lineno: int, start: int = 0):
        self.text = text
        self.lineno = lineno
        self.i = start

    def _skip_ws(self):
        while self.i < len(self.text) and self.text[self.i] in " \t":
            self.i += 1

    def done(self) -> bool:
        self._skip_ws()
        return self.i >= len(self.text)

    def fail(self, message: str):
        self._skip_ws()
        raise ParseError(message, self.lineno, self.i + 1)

    def peek(self, s: str) -> bool:
        self._skip_ws()
        return self.text.startswith(s, self.i)

    def lit(self, s: str):
        if not self.peek(s):
            self.fail(f"expected {s!r}")
        self.i += len(s)

    def try_lit(self, s: str) -> bool:
        if self.peek(s):
            self.i += len(s)
            return True
        return False

    def peek_name(self) -> bool:
        self._skip_ws()
        return bool(_NAME_RE.match(self.text, self.i))

    def name(self, what: str = "name") -> str:
        self._skip_ws()
        m = _NAME_RE.match(self.text, self.i)
        if not m:
            self.fail(f"expected a {what}")
        self.i = m.end()
        return m.group()

    def integer(self) -> int:
        self._skip_ws()
        m = _INT_RE.match(self.text, self.i)
        if not m:
            self.fail("expected a number")
        self.i = m.end()
        return int(m.group())


def _strip_comment(raw: str) -> str:
    return raw.split("#", 1)[0]


def parse_net(text: str) -> Net:
    places: list = []
    place_set: set = set()
    initial: dict = {}
    transitions: list = []
    saw_places = False
    saw_marking = False

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not line.strip():
            continue
        cur = _Cursor(line, lineno)

        if cur.try_lit("places:"):
            if saw_places:
                cur.fail("duplicate places line")
            saw_places = True
            while not cur.done():
                col = cur.i
                p = cur.name("place name")
                if p in place_set:
                    raise ParseError(f"place {p!r} declared twice", lineno, col + 1)
                place_set.add(p)
                places.append(p)
            continue

        if cur.try_lit("marking:"):
            if not saw_places:
                cur.fail("marking line before places line")
            if saw_marking:
                cur.fail("duplicate marking line")
            saw_marking = True
            while not cur.done():
                p = cur.name("place name")
                if p not in place_set:
                    cur.fail(f"unknown place {p!r} in marking")
                if p in initial:
                    cur.fail(f"place {p!r} marked twice")
                cur.lit("=")
                initial[p] = cur.integer()
            continue

        if cur.try_lit("trans"):
            if not saw_places:
                cur.fail("transition line before places line")
            tname = cur.name("transition name")
            cur.lit(":")
            pre: dict = {}
            post: dict = {}

            def add_pre(place: str, arc: Arc, at: _Cursor):
                if place in pre:
                    at.fail(f"place {place!r} has two pre-arc descriptors")
                pre[place] = arc

            while not cur.peek(";"):
                if cur.done():
                    cur.fail("expected ';' between pre and post arcs")
                kw = cur.name("arc keyword")
                if kw == "in":
                    p = cur.name("place name")
                    w = cur.integer() if cur.try_lit("*") else 1
                    if w > 0:
                        add_pre(p, Numeric(w), cur)
                elif kw == "inh":
                    add_pre(cur.name("place name"), INHIBIT, cur)
                elif kw == "reset":
                    add_pre(cur.name("place name"), RESET, cur)
                elif kw == "xfer":
                    p = cur.name("place name")
                    cur.lit("->")
                    add_pre(p, Transfer(cur.name("place name")), cur)
                else:
                    cur.fail(f"unknown arc keyword {kw!r}")
                if not cur.try_lit(","):
                    break
            cur.lit(";")
            while not cur.done():
                w = cur.name("place name")
                if w == "out" and cur.peek_name():
                    p = cur.name("place name")
                else:
                    p = w
                weight = cur.integer() if cur.try_lit("*") else 1
                if p in post:
                    cur.fail(f"place {p!r} has two post-arcs")
                if weight > 0:
                    post[p] = weight
                if not cur.try_lit(","):
                    break
            if not cur.done():
                cur.fail("trailing text after transition")
            transitions.append(Transition(tname, pre, post))
            continue

        cur.fail("expected 'places:', 'marking:' or 'trans'")

    if not saw_places:
        raise ParseError("missing places line", 1, 1)
    marking = tuple(initial.get(p, 0) for p in places)
    return Net(tuple(places), tuple(transitions), marking)


def _check_name(name: str) -> str:
    m = _NAME_RE.fullmatch(name)
    if not m:
        raise XpnError(f"name {name!r} cannot be written to the text format")
    return name


def render_net(net: Net, header=()) -> str:
    """Canonical text for `net`; `header` lines are emitted as comments."""
    lines = [f"# {h}" if h else "#" for h in header]
    lines.append("places: " + " ".join(_check_name(p) for p in net.places))
    marked = [(p, n) for p, n in zip(net.places, net.initial) if n]
    if marked:
        lines.append("marking: " + " ".join(f"{p}={n}" for p, n in marked))
    for t in net.transitions:
        pre_items = []
        for place, arc in t.pre.items():
            _check_name(place)
            if isinstance(arc, Numeric):
                pre_items.append(f"in {place}*{arc.weight}")
            elif isinstance(arc, Inhibitor):
                pre_items.append(f"inh {place}")
            elif isinstance(arc, Reset):
                pre_items.append(f"reset {place}")
            elif isinstance(arc, Transfer):
                pre_items.append(f"xfer {place}->{_check_name(arc.target)}")
            else:
                raise XpnError(f"bad arc descriptor {arc!r}")
        post_items = [f"{p}*{w}" for p, w in t.post.items() if _check_name(p)]
        if post_items:
            post_items[0] = "out " + post_items[0]
        lines.append(
            f"trans {_check_name(t.name)}: " + ", ".join(pre_items)
            + (" ; " if pre_items else "; ")
            + ", ".join(post_items))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# marking literals ("p1=3 p2=0") and trace files

def parse_marking(net: Net, literal: str) -> Marking:
    counts: dict = {}
    cur = _Cursor(literal, 1)
    while not cur.done():
        p = cur.name("place name")
        if p not in net._pos:
            cur.fail(f"unknown place {p!r}")
        if p in counts:
            cur.fail(f"place {p!r} given twice")
        cur.lit("=")
        counts[p] = cur.integer()
    return net.marking(counts)


def format_marking(net: Net, m: Marking, keep_zeros: bool = True) -> str:
    pairs = [(p, n) for p, n in zip(net.places, m) if keep_zeros or n]
    return " ".join(f"{p}={n}" for p, n in pairs)


def parse_trace(text: str) -> tuple:
    names = []
    for raw in text.splitlines():
        line = _strip_comment(raw).strip()
        if line:
            names.append(line)
    return tuple(names)


def render_trace(names) -> str:
    return "".join(f"{n}\n" for n in names)
