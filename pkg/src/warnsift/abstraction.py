"""Abstraction of selected path nodes into the closed token vocabulary.

Each selected statement emits its kind token followed by an in-order walk
of its expression content restricted to the retained atoms: type atoms,
indexed variable placeholders (the IP variable becomes VariableIP),
Constant/Null, call-type atoms, and operator atoms. Concrete identifiers
and literal values are deliberately erased.
"""

from dataclasses import dataclass

from .errors import UnknownNodeKind
from .vocab import CLS, SEP, VARIABLE_IP

BINARY_OP_ATOMS = {
    "==": "Equal",
    "!=": "NotEqual",
    "<": "Less",
    ">": "Greater",
    "<=": "LessEqual",
    ">=": "GreaterEqual",
    "&&": "LogicalAnd",
    "||": "LogicalOr",
    "&": "InclusiveAnd",
    "|": "InclusiveOr",
    "+": "Plus",
    "-": "Minus",
    "*": "Times",
    "/": "Divide",
    "%": "Mod",
}

UNARY_OP_ATOMS = {
    "!": "LogicalNot",
    "-": "Minus",
    "*": "Dereference",
    "&": "AddressOf",
}

BUILTIN_TYPE_ATOMS = {
    "int": "IntType",
    "char": "CharType",
    "float": "FloatType",
    "double": "FloatType",
    "void": "VoidType",
}


@dataclass
class TokenSequence:
    instance_id: str
    tokens: list
    label: int = None
    project: str = ""


@dataclass
class InputSequence:
    ids: tuple
    mask: tuple
    segment: tuple = ()

    def __post_init__(self):
        if not self.segment:
            self.segment = tuple(0 for _ in self.ids)

    def __len__(self):
        return len(self.ids)


def select_nodes(path, influences, anchor):
    """Path-order subsequence of CFG nodes relevant to the warning.

    The path is cut at the anchored statement (paths normally terminate
    there already); a node is kept when it mentions the IP variable or any
    other influencing variable.
    """
    nodes = [path.cfg.nodes[i] for i in path.node_ids]
    cut = None
    for i, node in enumerate(nodes):
        if node.ast_ref is anchor.node:
            cut = i
    if cut is not None:
        nodes = nodes[:cut + 1]
    relevant = influences.variables
    return [n for n in nodes if (n.defs | n.uses) & relevant]


class _Emitter:
    def __init__(self, ip_variable, user_functions):
        self.ip_variable = ip_variable
        self.user_functions = user_functions
        self.indices = {}
        self.tokens = []

    def emit(self, spelling):
        self.tokens.append(spelling)

    def variable(self, name):
        if name == self.ip_variable:
            self.emit(VARIABLE_IP)
            return
        if name not in self.indices:
            self.indices[name] = len(self.indices) + 1
        self.emit(f"Variable{self.indices[name]}")

    def type_atoms(self, desc):
        if desc.is_struct or desc.base not in BUILTIN_TYPE_ATOMS:
            self.emit("StructType")
        else:
            self.emit(BUILTIN_TYPE_ATOMS[desc.base])
        for _ in range(desc.pointer_depth):
            self.emit("Pointer")

    def expression(self, node):
        kind = node.kind
        if kind == "Identifier":
            self.variable(node.name)
        elif kind == "NullLiteral":
            self.emit("Null")
        elif kind == "Constant":
            self.emit("Constant")
        elif kind == "MemberAccess":
            self.expression(node.children[0])
        elif kind == "BinaryOp":
            self.expression(node.children[0])
            self.emit(BINARY_OP_ATOMS[node.op])
            self.expression(node.children[1])
        elif kind == "UnaryOp":
            self.emit(UNARY_OP_ATOMS[node.op])
            self.expression(node.children[0])
        elif kind == "Call":
            self.emit("UserDefinedCall" if node.callee in self.user_functions
                      else "LibraryCall")
            for arg in node.children:
                self.expression(arg)
        else:
            raise UnknownNodeKind(f"cannot abstract expression kind {kind}")

    def statement(self, stmt):
        kind = stmt.kind
        self.emit(kind)
        if kind == "VariableDeclarator":
            self.type_atoms(stmt.type_desc)
            self.variable(stmt.name)
            for init in stmt.children:
                self.expression(init)
        elif kind == "AssignmentStatement":
            self.expression(stmt.children[0])
            self.emit("Assign")
            self.expression(stmt.children[1])
        elif kind in ("MethodInvocation", "ReturnStatement", "AssertStatement"):
            for child in stmt.children:
                self.expression(child)
        elif kind in ("IfSelection", "WhileLoop", "ForLoop"):
            cond = stmt.role("cond")
            if cond is not None:
                self.expression(cond)
        elif kind in ("BreakStatement", "ContinueStatement"):
            pass
        else:
            raise UnknownNodeKind(f"cannot abstract statement kind {kind}")


def abstract_tokens(nodes, anchor, tree, instance_id="", label=None):
    """Abstract selected CFG nodes into a TokenSequence."""
    emitter = _Emitter(anchor.ip_variable, tree.defined_function_names())
    for node in nodes:
        if node.ast_ref is None:
            raise UnknownNodeKind(f"cannot abstract synthetic node {node.kind}")
        emitter.statement(node.ast_ref)
    return TokenSequence(instance_id, emitter.tokens, label)


def to_model_input(seq, vocab, max_len=512, truncate="head"):
    """Encode a TokenSequence as [CLS] + content + [SEP] token ids.

    ``truncate`` names the end that is kept when the content exceeds
    ``max_len - 2``. Out-of-vocabulary spellings map to [UNK].
    """
    if truncate not in ("head", "tail"):
        raise ValueError("truncate must be 'head' or 'tail'")
    budget = max_len - 2
    content = seq.tokens
    if len(content) > budget:
        content = content[:budget] if truncate == "head" else content[-budget:]
    spellings = [CLS] + list(content) + [SEP]
    ids = tuple(vocab.id_of(s) for s in spellings)
    mask = tuple(1 for _ in ids)
    return InputSequence(ids, mask)
