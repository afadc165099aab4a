import pytest

from warnsift.abstraction import (TokenSequence, abstract_tokens, select_nodes,
                                  to_model_input)
from warnsift.cfg import build_cfg, def_use_influences
from warnsift.cparser import locate_ip, parse_source
from warnsift.corpusio import WarningReport
from warnsift.errors import UnknownNodeKind
from warnsift.paths import generate_path
from warnsift.vocab import CLS, DEFAULT_VOCAB, PAD, SEP, SPELLINGS, UNK

FIG5_CONTENT = [
    "VariableDeclarator", "StructType", "Pointer", "VariableIP", "Null",
    "IfSelection", "VariableIP", "NotEqual", "Null", "InclusiveAnd",
    "VariableIP", "Equal", "Constant",
]


def run_extraction(source, function, line, variable):
    tree = parse_source(source, "t.c")
    report = WarningReport("t.c", function, line, variable, None, "t")
    anchor = locate_ip(tree, report)
    cfg = build_cfg(tree.function_named(function))
    target = cfg.node_for_ast(anchor.node)
    path = generate_path(cfg, target.id)
    influences = def_use_influences(cfg, path, anchor)
    nodes = select_nodes(path, influences, anchor)
    return tree, cfg, path, anchor, influences, nodes


def test_select_nodes_pair_keeps_decl_and_if(pair_source):
    _, _, _, _, _, nodes = run_extraction(pair_source, "bad", 4, "twoInts")
    assert [(n.kind, n.line) for n in nodes] == [
        ("VariableDeclarator", 3), ("IfSelection", 4)]


def test_select_nodes_cuts_path_at_anchor(pair_tree, bad_cfg, bad_anchor):
    # A path that runs past the anchored statement (here: to the call on
    # line 5) is truncated back to it before filtering.
    call = next(n for n in bad_cfg.nodes if n.kind == "MethodInvocation")
    path = generate_path(bad_cfg, call.id)
    assert path.lines() == [3, 4, 5]
    influences = def_use_influences(
        bad_cfg, generate_path(bad_cfg, bad_cfg.node_for_ast(bad_anchor.node).id),
        bad_anchor)
    nodes = select_nodes(path, influences, bad_anchor)
    assert [n.line for n in nodes] == [3, 4]


def test_select_nodes_excludes_irrelevant_statement():
    source = "void f(){\n  t *ip = NULL;\n  y = 7;\n  if (ip != NULL)\n    use(ip);\n}"
    _, _, _, _, _, nodes = run_extraction(source, "f", 4, "ip")
    assert [n.line for n in nodes] == [2, 4]


def test_select_nodes_keeps_influencing_chain():
    source = ("void f(){\n  t *base = NULL;\n  int noise = 0;\n  t *ip = base;\n"
              "  noise = noise + 1;\n  if (ip != NULL)\n    use(ip);\n}")
    _, _, _, _, influences, nodes = run_extraction(source, "f", 6, "ip")
    assert influences.variables == {"ip", "base"}
    assert [n.line for n in nodes] == [2, 4, 6]


def test_select_nodes_minimal_single_node():
    source = "void f(int ip){\n  use(ip);\n}"
    _, _, _, _, _, nodes = run_extraction(source, "f", 2, "ip")
    assert [n.kind for n in nodes] == ["MethodInvocation"]


def test_fig5_token_sequence(pair_source):
    tree, _, _, anchor, _, nodes = run_extraction(pair_source, "bad", 4, "twoInts")
    seq = abstract_tokens(nodes, anchor, tree, instance_id="w1", label=1)
    assert seq.tokens == FIG5_CONTENT


def test_good_variant_differs_in_exactly_one_token(pair_source):
    tree, _, _, anchor_b, _, nodes_b = run_extraction(pair_source, "bad", 4, "twoInts")
    seq_bad = abstract_tokens(nodes_b, anchor_b, tree)
    tree_g, _, _, anchor_g, _, nodes_g = run_extraction(pair_source, "good", 10, "twoInts")
    seq_good = abstract_tokens(nodes_g, anchor_g, tree_g)
    assert len(seq_bad.tokens) == len(seq_good.tokens)
    diffs = [i for i, (x, y) in enumerate(zip(seq_bad.tokens, seq_good.tokens)) if x != y]
    assert len(diffs) == 1
    assert seq_bad.tokens[diffs[0]] == "InclusiveAnd"
    assert seq_good.tokens[diffs[0]] == "LogicalAnd"


def test_break_emits_kind_token_alone():
    source = "void f(int ip){\n  while (ip > 0) {\n    break;\n  }\n}"
    tree = parse_source(source, "t.c")
    anchor = locate_ip(tree, WarningReport("t.c", "f", 2, "ip", None, "t"))
    cfg = build_cfg(tree.function_named("f"))
    brk = next(n for n in cfg.nodes if n.kind == "BreakStatement")
    seq = abstract_tokens([brk], anchor, tree)
    assert seq.tokens == ["BreakStatement"]


def test_call_statement_distinguishes_user_defined():
    source = ("int helper(int v) { return v; }\n"
              "void f(){\n  int ip = 0;\n  ip = helper(ip);\n  println(\"x\", ip);\n}")
    tree = parse_source(source, "t.c")
    anchor = locate_ip(tree, WarningReport("t.c", "f", 5, "ip", None, "t"))
    cfg = build_cfg(tree.function_named("f"))
    call = next(n for n in cfg.nodes if n.kind == "MethodInvocation")
    assign = next(n for n in cfg.nodes if n.kind == "AssignmentStatement")
    seq = abstract_tokens([assign, call], anchor, tree)
    assert seq.tokens == [
        "AssignmentStatement", "VariableIP", "Assign", "UserDefinedCall", "VariableIP",
        "MethodInvocation", "LibraryCall", "Constant", "VariableIP"]


def test_variable_indices_assigned_by_first_emission():
    # b emits first -> Variable1; a -> Variable2; re-occurrences keep their
    # index; the IP variable never takes a numeric one.
    source = "void f(){\n  int b = 2;\n  int a = b;\n  int ip = a + b;\n  use(ip);\n}"
    tree, _, _, anchor, _, nodes = run_extraction(source, "f", 4, "ip")
    seq = abstract_tokens(nodes, anchor, tree)
    assert seq.tokens == [
        "VariableDeclarator", "IntType", "Variable1", "Constant",
        "VariableDeclarator", "IntType", "Variable2", "Variable1",
        "VariableDeclarator", "IntType", "VariableIP", "Variable2", "Plus", "Variable1"]


def test_type_atoms_cover_builtins_and_pointers():
    source = ("void f(){\n  struct pair *p = NULL;\n  char **c = NULL;\n"
              "  float x = 0;\n  double d = 1;\n  void *v = NULL;\n  use(p);\n}")
    tree = parse_source(source, "t.c")
    anchor = locate_ip(tree, WarningReport("t.c", "f", 7, "p", None, "t"))
    cfg = build_cfg(tree.function_named("f"))
    seq = abstract_tokens(cfg.statement_nodes(), anchor, tree)
    assert seq.tokens == [
        "VariableDeclarator", "StructType", "Pointer", "VariableIP", "Null",
        "VariableDeclarator", "CharType", "Pointer", "Pointer", "Variable1", "Null",
        "VariableDeclarator", "FloatType", "Variable2", "Constant",
        "VariableDeclarator", "FloatType", "Variable3", "Constant",
        "VariableDeclarator", "VoidType", "Pointer", "Variable4", "Null",
        "MethodInvocation", "LibraryCall", "VariableIP"]


def test_unary_and_operator_atoms():
    source = "void f(){\n  int ip = 0;\n  if (!(ip >= 3) || (-ip < 1))\n    use(ip);\n}"
    tree, _, _, anchor, _, nodes = run_extraction(source, "f", 3, "ip")
    seq = abstract_tokens(nodes, anchor, tree)
    assert seq.tokens == [
        "VariableDeclarator", "IntType", "VariableIP", "Constant",
        "IfSelection", "LogicalNot", "VariableIP", "GreaterEqual", "Constant",
        "LogicalOr", "Minus", "VariableIP", "Less", "Constant"]


def test_synthetic_nodes_rejected():
    source = "void f(int ip){ use(ip); }"
    tree, cfg, _, anchor, _, _ = run_extraction(source, "f", 1, "ip")
    entry = cfg.nodes[cfg.entry]
    with pytest.raises(UnknownNodeKind):
        abstract_tokens([entry], anchor, tree)


def test_vocabulary_closure_over_extraction(pair_source):
    tree, _, _, anchor, _, nodes = run_extraction(pair_source, "bad", 4, "twoInts")
    seq = abstract_tokens(nodes, anchor, tree)
    unk = DEFAULT_VOCAB.unk_id
    encoded = to_model_input(seq, DEFAULT_VOCAB)
    assert unk not in encoded.ids
    assert all(s in DEFAULT_VOCAB for s in seq.tokens)


# -- model input packaging ----------------------------------------------------

def test_fig5_input_is_fifteen_positions(pair_source):
    tree, _, _, anchor, _, nodes = run_extraction(pair_source, "bad", 4, "twoInts")
    seq = abstract_tokens(nodes, anchor, tree)
    inp = to_model_input(seq, DEFAULT_VOCAB)
    assert len(inp) == 15
    assert inp.ids[0] == DEFAULT_VOCAB.cls_id
    assert inp.ids[-1] == DEFAULT_VOCAB.sep_id
    assert list(inp.ids).count(DEFAULT_VOCAB.sep_id) == 1
    assert all(m == 1 for m in inp.mask)
    assert all(s == 0 for s in inp.segment)


def test_empty_content_packs_to_two_positions():
    inp = to_model_input(TokenSequence("x", []), DEFAULT_VOCAB)
    assert [DEFAULT_VOCAB.spelling_of(i) for i in inp.ids] == [CLS, SEP]


def test_truncation_to_512():
    seq = TokenSequence("x", ["Constant"] * 600)
    inp = to_model_input(seq, DEFAULT_VOCAB)
    assert len(inp) == 512
    assert list(inp.ids).count(DEFAULT_VOCAB.id_of("Constant")) == 510


def test_truncation_side_head_vs_tail():
    seq = TokenSequence("x", ["Null"] * 3 + ["Constant"] * 3)
    head = to_model_input(seq, DEFAULT_VOCAB, max_len=6, truncate="head")
    tail = to_model_input(seq, DEFAULT_VOCAB, max_len=6, truncate="tail")
    null_id = DEFAULT_VOCAB.id_of("Null")
    constant_id = DEFAULT_VOCAB.id_of("Constant")
    assert list(head.ids)[1:-1] == [null_id] * 3 + [constant_id]
    assert list(tail.ids)[1:-1] == [null_id] + [constant_id] * 3
    with pytest.raises(ValueError):
        to_model_input(seq, DEFAULT_VOCAB, truncate="middle")


def test_out_of_vocabulary_maps_to_unk():
    seq = TokenSequence("x", ["NotAToken", "Constant"])
    inp = to_model_input(seq, DEFAULT_VOCAB)
    assert inp.ids[1] == DEFAULT_VOCAB.unk_id


def test_vocab_table_layout():
    assert SPELLINGS[:4] == (PAD, UNK, CLS, SEP)
    assert DEFAULT_VOCAB.pad_id == 0
    assert DEFAULT_VOCAB.unk_id == 1
    assert DEFAULT_VOCAB.cls_id == 2
    assert DEFAULT_VOCAB.sep_id == 3
    assert len(set(SPELLINGS)) == len(SPELLINGS)


def test_vocab_file_roundtrip(tmp_path):
    path = tmp_path / "vocab.txt"
    DEFAULT_VOCAB.save(path)
    loaded = type(DEFAULT_VOCAB).load(path)
    assert loaded.spellings == DEFAULT_VOCAB.spellings
    assert loaded.sha256() == DEFAULT_VOCAB.sha256()
