"""Per-function control flow graphs and def-use influence analysis.

One CFG node per statement (multi-declarator lines were already split by
the parser), plus synthetic Entry/Exit nodes. Edges carry a branch tag:
``Fallthrough``, ``True``/``False`` for branch outcomes, and ``Back`` for
loop back edges (target dominates source).
"""

from dataclasses import dataclass, field

from .errors import PathAnchorMismatch, UnsupportedConstruct

FALLTHROUGH = "Fallthrough"
TRUE = "True"
FALSE = "False"
BACK = "Back"

_TAG_ORDER = {TRUE: 0, FALSE: 1, FALLTHROUGH: 2, BACK: 3}

ENTRY = "Entry"
EXIT = "Exit"


@dataclass
class CfgNode:
    id: int
    kind: str
    line: int
    ast_ref: object = None  # syntax-tree statement node; absent for Entry/Exit
    defs: frozenset = frozenset()
    uses: frozenset = frozenset()

    def __repr__(self):
        return f"CfgNode({self.id} {self.kind} L{self.line})"


@dataclass
class Edge:
    src: int
    dst: int
    tag: str


@dataclass
class ControlFlowGraph:
    function: str
    nodes: list = field(default_factory=list)
    edges: list = field(default_factory=list)
    entry: int = 0
    exit: int = 0

    def successors(self, node_id):
        """Out-edges in canonical order: True, False, Fallthrough, Back;
        ties broken by ascending target id."""
        out = [e for e in self.edges if e.src == node_id]
        out.sort(key=lambda e: (_TAG_ORDER[e.tag], e.dst))
        return out

    def node_for_ast(self, ast_node):
        for node in self.nodes:
            if node.ast_ref is ast_node:
                return node
        return None

    def statement_nodes(self):
        return [n for n in self.nodes if n.kind not in (ENTRY, EXIT)]

    def to_dot(self):
        lines = [f'digraph "{self.function}" {{']
        for n in self.nodes:
            label = f"{n.id}: {n.kind}" + ("" if n.kind in (ENTRY, EXIT) else f" L{n.line}")
            lines.append(f'  n{n.id} [label="{label}"];')
        for e in self.edges:
            lines.append(f'  n{e.src} -> n{e.dst} [label="{e.tag}"];')
        lines.append("}")
        return "\n".join(lines)


def _expr_variables(node, acc):
    """Base variables read by an expression. Member access contributes only
    its base; callee names and literals contribute nothing."""
    if node is None:
        return
    if node.kind == "Identifier":
        acc.add(node.name)
        return
    for child in node.children:
        _expr_variables(child, acc)


def _lvalue_base(node):
    """Variable assigned through an lvalue, plus whether the write goes
    through a dereference/member (which also reads the base)."""
    if node.kind == "Identifier":
        return node.name, False
    if node.kind == "MemberAccess":
        base, _ = _lvalue_base(node.children[0])
        return base, True
    if node.kind == "UnaryOp" and node.op == "*":
        base, _ = _lvalue_base(node.children[0])
        return base, True
    return None, False


def _assignment_def_use(node):
    lhs, rhs = node.children
    defs, uses = set(), set()
    base, indirect = _lvalue_base(lhs)
    if base is not None:
        defs.add(base)
        if indirect:
            uses.add(base)
    else:
        _expr_variables(lhs, uses)
    _expr_variables(rhs, uses)
    return defs, uses


def statement_def_use(stmt):
    """Syntactic def/use sets for one statement node."""
    defs, uses = set(), set()
    kind = stmt.kind
    if kind == "VariableDeclarator":
        defs.add(stmt.name)
        for child in stmt.children:
            _expr_variables(child, uses)
    elif kind == "AssignmentStatement":
        defs, uses = _assignment_def_use(stmt)
    elif kind in ("MethodInvocation", "AssertStatement", "ReturnStatement", "ExpressionStatement"):
        for child in stmt.children:
            _expr_variables(child, uses)
    elif kind in ("IfSelection", "WhileLoop"):
        _expr_variables(stmt.role("cond"), uses)
    elif kind == "ForLoop":
        for role in ("init", "update"):
            clause = stmt.role(role)
            if clause is None:
                continue
            if clause.kind == "AssignmentStatement":
                d, u = _assignment_def_use(clause)
                defs |= d
                uses |= u
            else:
                _expr_variables(clause, uses)
        _expr_variables(stmt.role("cond"), uses)
    elif kind in ("BreakStatement", "ContinueStatement"):
        pass
    else:
        raise UnsupportedConstruct(f"no def/use rule for {kind}")
    return frozenset(defs), frozenset(uses)


class _Builder:
    def __init__(self, function):
        self.function = function
        self.cfg = ControlFlowGraph(function.name)
        entry = CfgNode(0, ENTRY, function.line,
                        defs=frozenset(name for _, name in (function.params or [])))
        self.cfg.nodes.append(entry)
        self.loop_stack = []  # (header node id, list of dangling break edges)

    def new_node(self, stmt):
        defs, uses = statement_def_use(stmt)
        node = CfgNode(len(self.cfg.nodes), stmt.kind, stmt.line,
                       ast_ref=stmt, defs=defs, uses=uses)
        self.cfg.nodes.append(node)
        return node

    def connect(self, pending, dst, back=False):
        for src, tag in pending:
            self.cfg.edges.append(Edge(src, dst, BACK if back else tag))

    def build(self):
        body = self.function.children[0]
        pending = self.process_block(body, [(0, FALLTHROUGH)])
        exit_node = CfgNode(len(self.cfg.nodes), EXIT, self.function.line)
        self.cfg.nodes.append(exit_node)
        self.cfg.exit = exit_node.id
        self.connect(pending, exit_node.id)
        # Return statements were wired with a placeholder destination.
        for e in self.cfg.edges:
            if e.dst == -1:
                e.dst = exit_node.id
        return self.cfg

    def process_block(self, block, pending):
        for stmt in block.children:
            pending = self.process_statement(stmt, pending)
        return pending

    def process_statement(self, stmt, pending):
        kind = stmt.kind
        if kind == "Block":
            return self.process_block(stmt, pending)
        if kind == "IfSelection":
            cond = self.new_node(stmt)
            self.connect(pending, cond.id)
            out = self.process_substatement(stmt.role("then"), [(cond.id, TRUE)])
            if stmt.role("else") is not None:
                out += self.process_substatement(stmt.role("else"), [(cond.id, FALSE)])
            else:
                out.append((cond.id, FALSE))
            return out
        if kind == "WhileLoop":
            header = self.new_node(stmt)
            self.connect(pending, header.id)
            breaks = []
            self.loop_stack.append((header.id, breaks))
            body_out = self.process_substatement(stmt.role("body"), [(header.id, TRUE)])
            self.loop_stack.pop()
            self.connect(body_out, header.id, back=True)
            return [(header.id, FALSE)] + breaks
        if kind == "ForLoop":
            header = self.new_node(stmt)
            self.connect(pending, header.id)
            breaks = []
            self.loop_stack.append((header.id, breaks))
            body_out = self.process_substatement(stmt.role("body"), [(header.id, TRUE)])
            self.loop_stack.pop()
            self.connect(body_out, header.id, back=True)
            out = breaks
            if stmt.role("cond") is not None:
                out = [(header.id, FALSE)] + out
            return out
        if kind in ("VariableDeclarator", "AssignmentStatement", "MethodInvocation",
                    "AssertStatement", "ExpressionStatement"):
            node = self.new_node(stmt)
            self.connect(pending, node.id)
            return [(node.id, FALLTHROUGH)]
        if kind == "BreakStatement":
            node = self.new_node(stmt)
            self.connect(pending, node.id)
            if not self.loop_stack:
                raise UnsupportedConstruct("break outside a loop")
            self.loop_stack[-1][1].append((node.id, FALLTHROUGH))
            return []
        if kind == "ContinueStatement":
            node = self.new_node(stmt)
            self.connect(pending, node.id)
            if not self.loop_stack:
                raise UnsupportedConstruct("continue outside a loop")
            self.cfg.edges.append(Edge(node.id, self.loop_stack[-1][0], BACK))
            return []
        if kind == "ReturnStatement":
            node = self.new_node(stmt)
            self.connect(pending, node.id)
            self.cfg.edges.append(Edge(node.id, -1, FALLTHROUGH))
            return []
        raise UnsupportedConstruct(f"no flow rule for {kind}")

    def process_substatement(self, stmt, pending):
        if stmt is None:
            return pending
        return self.process_statement(stmt, pending)


def build_cfg(function):
    """Build the control flow graph of a parsed FunctionDef node."""
    if function.kind != "FunctionDef":
        raise UnsupportedConstruct(f"expected a FunctionDef, got {function.kind}")
    return _Builder(function).build()


@dataclass(frozen=True)
class InfluenceSet:
    variables: frozenset


def def_use_influences(cfg, path, anchor):
    """Variables that transitively reach the IP variable along ``path``.

    Smallest closure containing the IP variable where any path node
    defining a member contributes all variables it uses; computed by
    reverse sweeps to a fixed point.
    """
    if not path.node_ids or cfg.nodes[path.node_ids[-1]].ast_ref is not anchor.node:
        raise PathAnchorMismatch(
            f"path does not end at the anchored statement (line {anchor.location.line})")
    nodes = [cfg.nodes[i] for i in path.node_ids]
    influenced = {anchor.ip_variable}
    changed = True
    while changed:
        changed = False
        for node in reversed(nodes):
            if node.defs & influenced and not node.uses <= influenced:
                influenced |= node.uses
                changed = True
    return InfluenceSet(frozenset(influenced))
