"""End-to-end CLI checks, run in process through cli.main."""

import pytest

from xpn import cli
from xpn.explore import bounded_cover
from xpn.fmt import parse_net, parse_trace

CHAIN = "places: a b\nmarking: a=2\ntrans t: in a ; out b\n"
LOOP = "places: a\nmarking: a=1\ntrans t: in a ; out a\n"
HIR = "places: a b\nmarking: a=2 b=5\ntrans t: in a, reset b ; out b\n"


@pytest.fixture
def run(capsys, tmp_path):
    def go(*argv, files=None):
        paths = {}
        for name, text in (files or {}).items():
            p = tmp_path / name
            p.write_text(text)
            paths[name] = str(p)
        resolved = [paths.get(a, a) for a in argv]
        code = cli.main(resolved)
        cap = capsys.readouterr()
        return code, cap.out, cap.err, paths
    return go


# ---------------------------------------------------------------------------
# validate / classify

def test_validate_ok(run):
    code, out, err, paths = run("validate", "n.xpn", files={"n.xpn": CHAIN})
    assert code == 0 and err == ""
    assert out == f"{paths['n.xpn']}: ok\n"


def test_validate_warning_exits_zero(run):
    net = "places: a\nmarking: a=1\ntrans t: xfer a->a ;\n"
    code, out, err, _ = run("validate", "n.xpn", files={"n.xpn": net})
    assert code == 0
    assert "warning: self-transfer" in out
    assert "ok" not in out


def test_validate_error_exits_two(run):
    net = "places: a\ntrans t: in ghost ;\n"
    code, out, err, _ = run("validate", "n.xpn", files={"n.xpn": net})
    assert code == 2
    assert "error: unknown-place" in out


def test_parse_error_has_location(run):
    code, out, err, paths = run(
        "classify", "n.xpn", files={"n.xpn": "places: a\nplaces: b\n"})
    assert code == 2 and out == ""
    assert err.startswith(f"{paths['n.xpn']}:2:9: error:")


def test_classify_plain(run):
    code, out, _, _ = run("classify", "n.xpn", files={"n.xpn": CHAIN})
    assert code == 0
    assert out.splitlines() == [
        "class: plain",
        "specials: -",
        "hierarchical: -",
        "constrained-transfer: yes",
        "ert-eligible: yes",
    ]


def test_classify_specials(run):
    net = "places: a b\nmarking: a=1\ntrans t: inh a, in b ; out b\n"
    code, out, _, _ = run("classify", "n.xpn", files={"n.xpn": net})
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "class: inhibitor(hierarchical)"
    assert lines[4] == "ert-eligible: yes"


def test_usage_error_is_exit_two():
    with pytest.raises(SystemExit) as err:
        cli.main(["no-such-verb"])
    assert err.value.code == 2


# ---------------------------------------------------------------------------
# fire

def test_fire_sequence(run):
    code, out, _, _ = run("fire", "n.xpn", "t", "t", files={"n.xpn": CHAIN})
    assert code == 0 and out == "a=0 b=2\n"


def test_fire_with_start_marking(run):
    code, out, _, _ = run("fire", "n.xpn", "t", "-m", "a=5",
                          files={"n.xpn": CHAIN})
    assert code == 0 and out == "a=4 b=1\n"


def test_fire_trace_file(run):
    code, out, _, _ = run("fire", "n.xpn", "--trace-file", "tr",
                          files={"n.xpn": CHAIN, "tr": "t\nt\n"})
    assert code == 0 and out == "a=0 b=2\n"


def test_fire_not_firable_is_definitive(run):
    code, out, _, _ = run("fire", "n.xpn", "t", "t", "t",
                          files={"n.xpn": CHAIN})
    assert code == 0
    assert out.startswith("not firable:")


def test_fire_needs_transitions(run):
    code, _, err, _ = run("fire", "n.xpn", files={"n.xpn": CHAIN})
    assert code == 2 and "no transitions given" in err


def test_fire_bad_marking_literal(run):
    code, _, err, _ = run("fire", "n.xpn", "t", "-m", "ghost=1",
                          files={"n.xpn": CHAIN})
    assert code == 2 and "marking literal" in err


# ---------------------------------------------------------------------------
# explore

def test_explore_reach_found_writes_trace(run, tmp_path):
    tr = tmp_path / "wit.trace"
    code, out, _, _ = run("explore", "reach", "n.xpn", "-m", "a=0 b=2",
                          "--trace", str(tr), files={"n.xpn": CHAIN})
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("FOUND steps=2 expanded=")
    assert lines[1] == "a=0 b=2"
    assert parse_trace(tr.read_text()) == ("t", "t")


def test_explore_reach_exhausted(run):
    code, out, _, _ = run("explore", "reach", "n.xpn", "-m", "a=2 b=1",
                          files={"n.xpn": CHAIN})
    assert code == 0 and out.startswith("EXHAUSTED expanded=")


def test_explore_out_of_budget(run):
    grow = "places: a\ntrans t: ; out a\n"
    code, out, _, _ = run("explore", "reach", "n.xpn", "-m", "a=1000000",
                          "--max-steps", "10", files={"n.xpn": grow})
    assert code == 1 and out.startswith("OUT_OF_BUDGET expanded=")


def test_explore_cover_and_deadlock(run):
    code, out, _, _ = run("explore", "cover", "n.xpn", "-m", "b=1",
                          files={"n.xpn": CHAIN})
    assert code == 0 and out.startswith("FOUND steps=1")
    code, out, _, _ = run("explore", "deadlock", "n.xpn",
                          files={"n.xpn": CHAIN})
    assert code == 0
    assert out.splitlines()[1] == "a=0 b=2"


def test_explore_needs_marking(run):
    code, _, err, _ = run("explore", "reach", "n.xpn", files={"n.xpn": CHAIN})
    assert code == 2 and "needs a target marking" in err


def test_explore_backward_cover(run):
    code, out, _, _ = run("explore", "backward-cover", "n.xpn", "-m", "b=2",
                          files={"n.xpn": CHAIN})
    assert code == 0
    assert out.splitlines() == ["COVERABLE", "a=0 b=2", "a=1 b=1", "a=2 b=0"]
    code, out, _, _ = run("explore", "backward-cover", "n.xpn", "-m", "b=3",
                          files={"n.xpn": CHAIN})
    assert code == 0 and out.splitlines()[0] == "UNCOVERABLE"


def test_explore_backward_cover_rejects_inhibitors(run):
    net = "places: a b\ntrans t: inh a ; out b\n"
    code, _, err, _ = run("explore", "backward-cover", "n.xpn", "-m", "b=1",
                          files={"n.xpn": net})
    assert code == 2 and "inhibitor" in err


# ---------------------------------------------------------------------------
# terminate

def test_terminate_terminating(run):
    code, out, _, _ = run("terminate", "n.xpn", files={"n.xpn": CHAIN})
    assert code == 0 and out == "TERMINATING tree_size=3\n"


def test_terminate_nonterminating_writes_certificates(run, tmp_path):
    stem, pump, dot = (tmp_path / x for x in ("s.trace", "p.trace", "t.dot"))
    code, out, _, _ = run("terminate", "n.xpn",
                          "--stem", str(stem), "--pump", str(pump),
                          "--dot", str(dot), files={"n.xpn": LOOP})
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "NONTERMINATING"
    assert lines[1] == "stem:"  # empty, the loop starts at the root
    assert lines[2] == "pump: t"
    assert parse_trace(stem.read_text()) == ()
    assert parse_trace(pump.read_text()) == ("t",)
    assert dot.read_text().startswith("digraph")


def test_terminate_out_of_budget(run):
    net = "places: a b\nmarking: a=10\ntrans t: in a ; out b\n"
    code, out, _, _ = run("terminate", "n.xpn", "--max-nodes", "5",
                          files={"n.xpn": net})
    assert code == 1 and out.startswith("OUT_OF_BUDGET")


def test_terminate_rejects_ineligible_net(run):
    net = "places: a b\nmarking: a=1\ntrans t: in a, inh b ;\n"
    code, _, err, _ = run("terminate", "n.xpn", files={"n.xpn": net})
    assert code == 2 and err.startswith("error:")


# ---------------------------------------------------------------------------
# transform

def test_transform_stdout_carries_header_and_map(run):
    code, out, _, _ = run("transform", "hir-elim", "n.xpn",
                          files={"n.xpn": HIR})
    assert code == 0
    assert out.startswith("# xpn transform hir-elim\n# query: ")
    assert "# forward:\n# a <- a\n# b <- b\n# t_busy <- 0\n# lock <- 1\n" in out
    assert "trans t_finish: in t_busy*1, inh b ; out b*1, lock*1" in out


def test_transform_output_with_map_sidecar(run, tmp_path):
    outfile = tmp_path / "out.xpn"
    code, out, _, _ = run("transform", "hir-elim", "n.xpn",
                          "-o", str(outfile), files={"n.xpn": HIR})
    assert code == 0
    assert out == f"wrote {outfile} and {outfile}.map\n"
    reparsed = parse_net(outfile.read_text())
    assert reparsed.places == ("a", "b", "t_busy", "lock")
    mapping = (tmp_path / "out.xpn.map").read_text().splitlines()
    assert mapping[0] == "forward:"
    assert mapping[1:5] == ["a <- a", "b <- b", "t_busy <- 0", "lock <- 1"]


def test_transform_reach_to_dlf_needs_marking(run):
    code, _, err, _ = run("transform", "reach-to-dlf", "n.xpn",
                          files={"n.xpn": CHAIN})
    assert code == 2 and "needs a target marking" in err


def test_transform_goal_line(run):
    code, out, _, _ = run("transform", "dlf-to-reach", "n.xpn",
                          files={"n.xpn": CHAIN})
    assert code == 0 and "# goal: goal=1\n" in out


def test_transform_precondition_failure(run):
    code, _, err, _ = run("transform", "two-inh-to-reset", "n.xpn",
                          files={"n.xpn": CHAIN})
    assert code == 2 and err.startswith("two-inh-to-reset:")


# ---------------------------------------------------------------------------
# compile

MACHINE = "q0: INC 1 -> q1\nq1: JZDEC 1 -> qh / q1\nqh: HALT\n"
SPIN = "q0: JZDEC 1 -> q0 / q0\nqh: HALT\n"


def test_compile_minsky_stdout_is_a_net(run):
    code, out, _, _ = run("compile", "minsky", "m.txt",
                          files={"m.txt": MACHINE})
    assert code == 0
    assert out.startswith("# xpn compile minsky\n# cover: accept=1\n")
    net = parse_net(out)
    assert bounded_cover(net, tuple(
        1 if p == "accept" else 0 for p in net.places)).found


def test_compile_minsky_nonhalting_not_coverable(run):
    code, out, _, _ = run("compile", "minsky", "m.txt", files={"m.txt": SPIN})
    assert code == 0
    net = parse_net(out)
    res = bounded_cover(net, tuple(
        1 if p == "accept" else 0 for p in net.places))
    assert res.definitive and not res.found


def test_compile_minsky_transfer_flag(run, tmp_path):
    outfile = tmp_path / "m.xpn"
    code, out, _, _ = run("compile", "minsky", "m.txt", "--transfer",
                          "-o", str(outfile), files={"m.txt": MACHINE})
    assert code == 0 and out == ""
    text = outfile.read_text()
    assert text.startswith("# xpn compile minsky --transfer\n")
    assert "transfer" in text


def test_compile_machine_parse_error(run):
    code, _, err, paths = run("compile", "minsky", "m.txt",
                              files={"m.txt": "q0: WAT\n"})
    assert code == 2 and err.startswith(f"{paths['m.txt']}:1:")


def test_compile_positivity_census_header(run):
    src = "3\n1 -4 7\n2 -5 -8\n-3 -6 9\n1 1 1\n"
    code, out, _, _ = run("compile", "positivity", "p.txt",
                          files={"p.txt": src})
    assert code == 0
    assert "# census: places=17 transitions=13\n" in out
    net = parse_net(out)
    assert len(net.places) == 17 and len(net.transitions) == 13


def test_compile_positivity_rejects_negative_start(run):
    code, _, err, _ = run("compile", "positivity", "p.txt",
                          files={"p.txt": "1\n2\n-1\n"})
    assert code == 2 and "nonnegative" in err


# ---------------------------------------------------------------------------
# export-dot

def test_export_dot_deterministic(run):
    code, first, _, _ = run("export-dot", "n.xpn", files={"n.xpn": CHAIN})
    assert code == 0
    assert first.startswith("digraph")
    assert 'label="t"' in first and 'label="a\\n2"' in first
    code, second, _, _ = run("export-dot", "n.xpn", files={"n.xpn": CHAIN})
    assert first == second


def test_export_dot_highlight(run, tmp_path):
    outfile = tmp_path / "n.dot"
    code, out, _, _ = run("export-dot", "n.xpn", "-o", str(outfile),
                          "--highlight", "t", files={"n.xpn": CHAIN})
    assert code == 0 and out == ""
    plain_code, plain, _, _ = run("export-dot", "n.xpn",
                                  files={"n.xpn": CHAIN})
    assert plain_code == 0
    assert outfile.read_text() != plain


def test_missing_file_is_exit_two(run):
    code, _, err, _ = run("validate", "/nonexistent/net.xpn")
    assert code == 2 and err != ""
