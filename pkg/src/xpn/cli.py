"""Command line front end.

Exit codes: 0 for a definitive answer (including a definitive no), 1 when
a search or tree budget ran out before an answer, 2 for usage, parse,
validation or precondition problems.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import compilers, transforms
from .dot import export_dot
from .ert import (BudgetExceededError, NonTerminating, Terminating, build_ert,
                  ert_dot, verify_pump)
from .explore import (EXHAUSTED, FOUND, OUT_OF_BUDGET, SearchBudget,
                      backward_cover, bounded_cover, bounded_deadlock,
                      bounded_reach, replay)
from .fmt import ParseError, format_marking, parse_marking, parse_net, \
    parse_trace, render_net, render_trace
from .net import NotFirableError, XpnError, classify, has_errors, validate
from .transforms import TransformResult


class _Fail(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as e:
        raise _Fail(2, f"{path}: {e.strerror or e}")


def _parse_or_fail(path: str, text: str, parser):
    try:
        return parser(text)
    except ParseError as e:
        raise _Fail(2, f"{path}:{e.line}:{e.col}: error: {e.message}")


def _read_net(path: str, check: bool = True):
    net = _parse_or_fail(path, _read_text(path), parse_net)
    if check:
        diags = validate(net)
        for d in diags:
            if d.severity == "error":
                raise _Fail(2, f"{path}: error: {d.code}: {d.message}")
    return net


def _marking_arg(net, path: str, literal: str):
    try:
        return parse_marking(net, literal)
    except ParseError as e:
        raise _Fail(2, f"marking literal: col {e.col}: {e.message}")
    except XpnError as e:
        raise _Fail(2, f"marking literal: {e}")


def _write_out(args, text: str):
    if getattr(args, "output", None):
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# verbs

def cmd_validate(args) -> int:
    net = _parse_or_fail(args.net, _read_text(args.net), parse_net)
    diags = validate(net)
    for d in diags:
        print(f"{args.net}: {d.severity}: {d.code}: {d.message}")
    if has_errors(diags):
        return 2
    if not diags:
        print(f"{args.net}: ok")
    return 0


def cmd_classify(args) -> int:
    net = _read_net(args.net)
    cls = classify(net)
    print(f"class: {cls.label()}")
    print(f"specials: {' '.join(cls.specials) if cls.specials else '-'}")
    print("hierarchical: "
          + (" ".join(cls.hierarchical) if cls.hierarchical else "-"))
    print(f"constrained-transfer: {'yes' if cls.constrained_transfer else 'no'}")
    print(f"ert-eligible: {'yes' if cls.ert_eligible else 'no'}")
    return 0


def cmd_fire(args) -> int:
    net = _read_net(args.net)
    start = net.initial
    if args.marking is not None:
        start = _marking_arg(net, args.net, args.marking)
    names = list(args.transition)
    if args.trace_file:
        names += list(parse_trace(_read_text(args.trace_file)))
    if not names:
        raise _Fail(2, "no transitions given")
    try:
        trace = replay(net, start, names)
    except NotFirableError as e:
        print(f"not firable: {e}")
        return 0
    print(format_marking(net, trace.markings[-1]))
    return 0


def cmd_explore(args) -> int:
    net = _read_net(args.net)
    if args.mode == "backward-cover":
        if args.marking is None:
            raise _Fail(2, "backward-cover needs a target marking (-m)")
        target = _marking_arg(net, args.net, args.marking)
        try:
            res = backward_cover(net, target)
        except XpnError as e:
            raise _Fail(2, str(e))
        print("COVERABLE" if res.coverable else "UNCOVERABLE")
        for b in res.basis:
            print(format_marking(net, b))
        return 0

    budget = SearchBudget(max_steps=args.max_steps, max_depth=args.max_depth)
    if args.mode == "deadlock":
        res = bounded_deadlock(net, budget)
    else:
        if args.marking is None:
            raise _Fail(2, f"{args.mode} needs a target marking (-m)")
        target = _marking_arg(net, args.net, args.marking)
        fn = bounded_reach if args.mode == "reach" else bounded_cover
        res = fn(net, target, budget)
    if res.status == FOUND:
        print(f"FOUND steps={len(res.trace.transitions)} expanded={res.expanded}")
        print(format_marking(net, res.trace.markings[-1]))
        if args.trace:
            Path(args.trace).write_text(render_trace(res.trace.transitions))
        return 0
    if res.status == EXHAUSTED:
        print(f"EXHAUSTED expanded={res.expanded}")
        return 0
    print(f"OUT_OF_BUDGET expanded={res.expanded}")
    return 1


def cmd_terminate(args) -> int:
    net = _read_net(args.net)
    try:
        ert = build_ert(net, max_nodes=args.max_nodes,
                        stop_early=not args.full_tree)
    except BudgetExceededError as e:
        print(f"OUT_OF_BUDGET {e}")
        return 1
    if args.dot:
        Path(args.dot).write_text(ert_dot(net, ert))
    v = ert.verdict
    if isinstance(v, Terminating):
        print(f"TERMINATING tree_size={v.tree_size}")
        return 0
    assert isinstance(v, NonTerminating)
    if not verify_pump(net, v):
        raise XpnError("internal error: pump certificate failed to verify")
    print("NONTERMINATING")
    print(("stem: " + " ".join(v.stem.transitions)).rstrip())
    print(("pump: " + " ".join(v.pump.transitions)).rstrip())
    if args.stem:
        Path(args.stem).write_text(render_trace(v.stem.transitions))
    if args.pump:
        Path(args.pump).write_text(render_trace(v.pump.transitions))
    return 0


def _map_lines(net_in, result: TransformResult) -> list:
    lines = []
    maps = [("forward", result.forward)]
    maps += [(f"alt{i if i > 1 else ''}", m)
             for i, m in enumerate(result.alt_forwards, start=1)]
    for name, mm in maps:
        lines.append(f"{name}:")
        for place, (kind, val) in zip(result.net.places, mm.entries):
            src = net_in.places[val] if kind == transforms.COPY else str(val)
            lines.append(f"{place} <- {src}")
    return lines


def cmd_transform(args) -> int:
    net = _read_net(args.net)
    try:
        if args.op == "hir-elim":
            result = transforms.hir_elim(net)
        elif args.op == "hirct-elim":
            result = transforms.hirct_elim(net)
        elif args.op == "hir-elim-all":
            result = transforms.hir_elim_all(net)
        elif args.op == "dlf-to-reach":
            result = transforms.dlf_to_reach(net, clause_cap=args.clause_cap)
        elif args.op == "reach-to-dlf":
            if args.marking is None:
                raise _Fail(2, "reach-to-dlf needs a target marking (-m)")
            target = _marking_arg(net, args.net, args.marking)
            result = transforms.reach_to_dlf(net, target)
        elif args.op == "two-inh-to-reset":
            result = transforms.two_inh_to_reset(net)
        else:
            result = transforms.transfer_hierarchize(net)
    except transforms.TransformError as e:
        raise _Fail(2, f"{args.op}: {e}")

    header = [f"xpn transform {args.op}", f"query: {result.query}"]
    if result.goal is not None:
        header.append(
            "goal: " + format_marking(result.net, result.goal, keep_zeros=False))
    map_lines = _map_lines(net, result)
    if args.output:
        Path(args.output).write_text(render_net(result.net, header=header))
        Path(args.output + ".map").write_text(
            "\n".join(map_lines) + "\n")
        print(f"wrote {args.output} and {args.output}.map")
    else:
        sys.stdout.write(render_net(
            result.net, header=header + ["map:"] + map_lines))
    return 0


def cmd_compile(args) -> int:
    text = _read_text(args.source)
    if args.kind == "minsky":
        cm = _parse_or_fail(args.source, text, compilers.parse_machine)
        comp = compilers.compile_minsky(cm, transfer=args.transfer)
        cover = format_marking(comp.net, comp.cover_target, keep_zeros=False)
        header = [f"xpn compile minsky{' --transfer' if args.transfer else ''}",
                  f"cover: {cover}",
                  "the machine halts iff the cover target is coverable"]
        _write_out(args, render_net(comp.net, header=header))
    else:
        inst = _parse_or_fail(args.source, text, compilers.parse_positivity)
        try:
            comp = compilers.compile_positivity(inst)
        except ValueError as e:
            raise _Fail(2, str(e))
        header = ["xpn compile positivity",
                  f"census: places={len(comp.net.places)} "
                  f"transitions={len(comp.net.transitions)}",
                  "restart fires once per phase while every iterate stays "
                  "nonnegative"]
        _write_out(args, render_net(comp.net, header=header))
    return 0


def cmd_export_dot(args) -> int:
    net = _read_net(args.net)
    highlight = ()
    if args.highlight:
        highlight = tuple(x for x in args.highlight.split(",") if x)
    _write_out(args, export_dot(net, highlight=highlight))
    return 0


# ---------------------------------------------------------------------------

def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="xpn",
        description="Petri nets with inhibitor, reset and transfer arcs")
    sub = ap.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("validate", help="parse and check a net file")
    p.add_argument("net")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("classify", help="report the net's arc-kind class")
    p.add_argument("net")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("fire", help="fire a transition sequence")
    p.add_argument("net")
    p.add_argument("transition", nargs="*")
    p.add_argument("-m", "--marking", help='start marking, e.g. "p=2 q=0"')
    p.add_argument("--trace-file", help="file with one transition per line")
    p.set_defaults(func=cmd_fire)

    p = sub.add_parser("explore", help="bounded forward / backward search")
    p.add_argument("mode",
                   choices=["reach", "cover", "deadlock", "backward-cover"])
    p.add_argument("net")
    p.add_argument("-m", "--marking", help="target marking literal")
    p.add_argument("--max-steps", type=int, default=1_000_000)
    p.add_argument("--max-depth", type=int, default=None)
    p.add_argument("--trace", help="write the witness trace here")
    p.set_defaults(func=cmd_explore)

    p = sub.add_parser("terminate", help="decide termination via the "
                                         "extended reachability tree")
    p.add_argument("net")
    p.add_argument("--max-nodes", type=int, default=1_000_000)
    p.add_argument("--full-tree", action="store_true",
                   help="expand the whole tree even after a verdict")
    p.add_argument("--dot", help="write the tree as DOT here")
    p.add_argument("--stem", help="write the stem trace here")
    p.add_argument("--pump", help="write the pump trace here")
    p.set_defaults(func=cmd_terminate)

    p = sub.add_parser("transform", help="apply a net-to-net reduction")
    p.add_argument("op", choices=["hir-elim", "hirct-elim", "hir-elim-all",
                                  "dlf-to-reach", "reach-to-dlf",
                                  "two-inh-to-reset", "transfer-hierarchize"])
    p.add_argument("net")
    p.add_argument("-o", "--output", help="output net file (.map written "
                   "alongside)")
    p.add_argument("-m", "--marking", help="target marking (reach-to-dlf)")
    p.add_argument("--clause-cap", type=int, default=10_000)
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("compile", help="compile a counter machine or a "
                                       "positivity instance to a net")
    p.add_argument("kind", choices=["minsky", "positivity"])
    p.add_argument("source")
    p.add_argument("-o", "--output")
    p.add_argument("--transfer", action="store_true",
                   help="minsky: use transfer arcs instead of resets")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("export-dot", help="render a net as Graphviz DOT")
    p.add_argument("net")
    p.add_argument("-o", "--output")
    p.add_argument("--highlight", help="comma separated transition names")
    p.set_defaults(func=cmd_export_dot)

    return ap


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return args.func(args)
    except _Fail as e:
        print(str(e), file=sys.stderr)
        return e.code
    except XpnError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
