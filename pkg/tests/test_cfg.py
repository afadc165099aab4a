import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import cfg_of
from warnsift.cfg import (BACK, FALLTHROUGH, FALSE, TRUE, build_cfg,
                          def_use_influences, statement_def_use)
from warnsift.cparser import locate_ip, parse_source
from warnsift.corpusio import WarningReport
from warnsift.errors import PathAnchorMismatch, UnsupportedConstruct
from warnsift.paths import ExecutionPath, generate_path


def edge_set(cfg):
    return {(e.src, e.dst, e.tag) for e in cfg.edges}


def test_pair_bad_graph_shape(bad_cfg):
    stmts = bad_cfg.statement_nodes()
    assert [(n.kind, n.line) for n in stmts] == [
        ("VariableDeclarator", 3), ("IfSelection", 4), ("MethodInvocation", 5)]
    decl, cond, call = stmts
    exit_id = bad_cfg.exit
    assert edge_set(bad_cfg) == {
        (bad_cfg.entry, decl.id, FALLTHROUGH),
        (decl.id, cond.id, FALLTHROUGH),
        (cond.id, call.id, TRUE),
        (cond.id, exit_id, FALSE),
        (call.id, exit_id, FALLTHROUGH),
    }


def test_empty_body_entry_to_exit_only():
    _, cfg = cfg_of("void f(){}", "f")
    assert cfg.statement_nodes() == []
    assert edge_set(cfg) == {(cfg.entry, cfg.exit, FALLTHROUGH)}


def test_while_back_edge():
    _, cfg = cfg_of("void f(){ while(c){ x = 1; } }", "f")
    header = next(n for n in cfg.nodes if n.kind == "WhileLoop")
    body = next(n for n in cfg.nodes if n.kind == "AssignmentStatement")
    assert (body.id, header.id, BACK) in edge_set(cfg)
    back_edges = [e for e in cfg.edges if e.tag == BACK]
    assert len(back_edges) == 1


def test_if_has_one_true_one_false_edge():
    _, cfg = cfg_of("void f(){ if(c) x = 1; else x = 2; y = 3; }", "f")
    cond = next(n for n in cfg.nodes if n.kind == "IfSelection")
    tags = sorted(e.tag for e in cfg.edges if e.src == cond.id)
    assert tags == [FALSE, TRUE]


def test_node_count_is_statements_plus_two():
    sources = [
        "void f(){}",
        "void f(){ int a = 1; }",
        "void f(){ if(c) x = 1; else { y = 2; z = 3; } }",
        "void f(){ while(c){ if(d) break; else continue; } return; }",
        "void f(){ for(i = 0; i < 9; i = i + 1) total = total + i; }",
    ]
    for source in sources:
        tree = parse_source(source)
        from warnsift.cparser import iter_statements
        fn = tree.function_named("f")
        count = len(list(iter_statements(fn.children[0])))
        cfg = build_cfg(fn)
        assert len(cfg.nodes) == count + 2, source


def test_every_statement_reachable_from_entry():
    _, cfg = cfg_of(
        "void f(){ if(c){ while(d){ e = 1; } } else { return; } g = 2; }", "f")
    seen = set()
    frontier = [cfg.entry]
    while frontier:
        node = frontier.pop()
        if node in seen:
            continue
        seen.add(node)
        frontier.extend(e.dst for e in cfg.edges if e.src == node)
    assert seen == {n.id for n in cfg.nodes}


def test_break_jumps_past_loop_and_continue_goes_back():
    _, cfg = cfg_of(
        "void f(){ while(c){ if(d) break; continue; } done = 1; }", "f")
    header = next(n for n in cfg.nodes if n.kind == "WhileLoop")
    brk = next(n for n in cfg.nodes if n.kind == "BreakStatement")
    cont = next(n for n in cfg.nodes if n.kind == "ContinueStatement")
    after = next(n for n in cfg.nodes if n.kind == "AssignmentStatement")
    edges = edge_set(cfg)
    assert (brk.id, after.id, FALLTHROUGH) in edges
    assert (cont.id, header.id, BACK) in edges


def test_break_outside_loop_rejected():
    tree = parse_source("void f(){ break; }")
    with pytest.raises(UnsupportedConstruct):
        build_cfg(tree.function_named("f"))


def test_return_routes_to_exit():
    _, cfg = cfg_of("void f(){ if(c) return; x = 1; }", "f")
    ret = next(n for n in cfg.nodes if n.kind == "ReturnStatement")
    assert (ret.id, cfg.exit, FALLTHROUGH) in edge_set(cfg)


def test_entry_has_no_incoming_forward_edges():
    _, cfg = cfg_of("void f(){ while(c) x = 1; }", "f")
    incoming = [e for e in cfg.edges if e.dst == cfg.entry and e.tag != BACK]
    assert incoming == []


def test_entry_carries_parameter_defs():
    _, cfg = cfg_of("void f(int a, struct s *b){ }", "f")
    assert cfg.nodes[cfg.entry].defs == {"a", "b"}


# -- def/use rules -----------------------------------------------------------

def stmt_def_use(source, index=0):
    tree = parse_source(source)
    stmt = tree.function_named("f").children[0].children[index]
    return statement_def_use(stmt)


def test_def_use_declaration():
    defs, uses = stmt_def_use("void f(){ int x = a + b; }")
    assert defs == {"x"}
    assert uses == {"a", "b"}


def test_def_use_self_assignment_overlaps():
    defs, uses = stmt_def_use("void f(){ x = x + 1; }")
    assert defs == {"x"}
    assert uses == {"x"}


def test_def_use_member_access_contributes_base_only():
    defs, uses = stmt_def_use("void f(){ y = p->field; }")
    assert defs == {"y"}
    assert uses == {"p"}


def test_def_use_member_write_defines_and_uses_base():
    defs, uses = stmt_def_use("void f(){ p->field = v; }")
    assert defs == {"p"}
    assert uses == {"p", "v"}


def test_def_use_deref_write():
    defs, uses = stmt_def_use("void f(){ *p = v; }")
    assert defs == {"p"}
    assert uses == {"p", "v"}


def test_def_use_call_arguments_are_uses_not_defs():
    defs, uses = stmt_def_use("void f(){ g(a, b->c); }")
    assert defs == set()
    assert uses == {"a", "b"}


def test_def_use_callee_name_is_not_a_use():
    defs, uses = stmt_def_use("void f(){ x = g(a); }")
    assert uses == {"a"}


def test_def_use_for_header():
    defs, uses = stmt_def_use("void f(){ for(i = 0; i < n; i = i + step) body(); }")
    assert defs == {"i"}
    assert uses == {"i", "n", "step"}


def test_def_use_condition_only_for_if():
    defs, uses = stmt_def_use("void f(){ if (a > b) c = 1; }")
    assert defs == set()
    assert uses == {"a", "b"}


# -- influence analysis --------------------------------------------------------

def pipeline(source, function, line, variable):
    tree = parse_source(source, "t.c")
    anchor = locate_ip(tree, WarningReport("t.c", function, line, variable, None, "x"))
    cfg = build_cfg(tree.function_named(function))
    target = cfg.node_for_ast(anchor.node)
    path = generate_path(cfg, target.id)
    return tree, cfg, path, anchor


def test_influence_single_step(pair_tree, bad_cfg, bad_anchor):
    target = bad_cfg.node_for_ast(bad_anchor.node)
    path = generate_path(bad_cfg, target.id)
    result = def_use_influences(bad_cfg, path, bad_anchor)
    assert result.variables == {"twoInts"}


def test_influence_two_step_closure():
    source = "void f(){ b = 1; a = b; ip = a; use(ip); }"
    # everything sits on line 1; the first statement mentioning ip anchors
    _, cfg, path, anchor = pipeline(source, "f", 1, "ip")
    result = def_use_influences(cfg, path, anchor)
    assert result.variables == {"ip", "a", "b"}


def test_influence_seed_only_when_never_defined():
    source = "void f(int ip){ x = 1; use(ip); }"
    _, cfg, path, anchor = pipeline(source, "f", 1, "ip")
    result = def_use_influences(cfg, path, anchor)
    assert result.variables == {"ip"}


def test_influence_requires_matching_terminal():
    source = "void f(){ a = 1; ip = a; }"
    tree = parse_source(source, "t.c")
    anchor = locate_ip(tree, WarningReport("t.c", "f", 1, "ip", None, "x"))
    cfg = build_cfg(tree.function_named("f"))
    first = cfg.statement_nodes()[0]
    path = generate_path(cfg, first.id)
    with pytest.raises(PathAnchorMismatch):
        def_use_influences(cfg, path, anchor)


def test_influence_closure_is_order_insensitive():
    # A later redefinition of an influencing variable still pulls in its
    # uses: the closure has no kill semantics.
    source = "void f(){ y = q; x = y; y = r; ip = x; use(ip); }"
    _, cfg, path, anchor = pipeline(source, "f", 1, "ip")
    result = def_use_influences(cfg, path, anchor)
    assert result.variables == {"ip", "x", "y", "q", "r"}


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=3))
def test_influence_monotone_under_prefix_extension(extra):
    lines = ["a = z;" for _ in range(extra)] + ["b = c;", "a = b;", "ip = a;", "use(ip);"]
    source = "void f(){ " + " ".join(lines) + " }"
    tree = parse_source(source, "t.c")
    anchor_line = 1
    anchor = locate_ip(tree, WarningReport("t.c", "f", anchor_line, "ip", None, "x"))
    cfg = build_cfg(tree.function_named("f"))
    target = cfg.node_for_ast(anchor.node)
    full = generate_path(cfg, target.id)
    short_ids = full.node_ids[extra:]
    short = ExecutionPath(cfg, short_ids)
    small = def_use_influences(cfg, short, anchor).variables
    big = def_use_influences(cfg, full, anchor).variables
    assert small <= big
