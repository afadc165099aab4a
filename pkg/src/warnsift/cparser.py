"""Recursive-descent parser for the supported C subset.

The subset covers function definitions, declarations with initializers
(including pointers and ``struct X *``), assignments, if/else, for, while,
break/continue/return, assert, call statements, and an expression grammar
with C precedence over the lexed operator set. There is no preprocessor,
switch, goto, do-while, or typedef resolution; an unknown identifier in
type position is taken to be a type name.

Every node records the half-open token span it covers, so the original
token spellings can be reconstructed from the tree (see
:meth:`SyntaxTree.serialize_spellings`).
"""

from dataclasses import dataclass, field

from .errors import AnchorNotFound, ParseError, VariableNotAtIp
from .lexer import CHAR, IDENT, KEYWORD, NUMBER, OP, PUNCT, STRING, SourceLocation, lex

# Statement-level node kinds (the plumbing kinds Block/ExpressionStatement
# included); expression kinds live below.
STATEMENT_KINDS = frozenset(
    {
        "VariableDeclarator",
        "AssignmentStatement",
        "MethodInvocation",
        "IfSelection",
        "ForLoop",
        "WhileLoop",
        "BreakStatement",
        "ContinueStatement",
        "ReturnStatement",
        "AssertStatement",
        "ExpressionStatement",
    }
)

CONTROL_KINDS = frozenset({"IfSelection", "ForLoop", "WhileLoop"})

BASE_TYPE_KEYWORDS = frozenset({"void", "int", "char", "float", "double"})


@dataclass(frozen=True)
class TypeDescriptor:
    base: str
    pointer_depth: int = 0
    is_struct: bool = False


@dataclass
class Node:
    kind: str
    location: SourceLocation
    span: tuple = (0, 0)  # half-open token indices
    children: list = field(default_factory=list)
    name: str = None  # identifier/function/declarator name
    op: str = None  # operator spelling for BinaryOp/UnaryOp
    value: str = None  # literal spelling for Constant
    callee: str = None  # called function name for Call
    type_desc: TypeDescriptor = None
    params: list = None  # FunctionDef: [(TypeDescriptor, name), ...]
    roles: dict = None  # control statements: role -> child index

    def role(self, name):
        if self.roles is None or name not in self.roles:
            return None
        return self.children[self.roles[name]]

    @property
    def line(self):
        return self.location.line

    def __repr__(self):
        extra = self.name or self.op or self.value or self.callee or ""
        return f"Node({self.kind}{' ' + extra if extra else ''} @{self.location.line})"


class SyntaxTree:
    def __init__(self, root, tokens, filename):
        self.root = root
        self.tokens = tokens
        self.filename = filename

    def serialize_spellings(self):
        """Token spellings reconstructed by walking the tree structure."""
        out = []

        def walk(node):
            i = node.span[0]
            for child in node.children:
                out.extend(t.spelling for t in self.tokens[i:child.span[0]])
                walk(child)
                i = child.span[1]
            out.extend(t.spelling for t in self.tokens[i:node.span[1]])

        walk(self.root)
        return out

    def functions(self):
        return [n for n in self.root.children if n.kind == "FunctionDef"]

    def function_named(self, name):
        for fn in self.functions():
            if fn.name == name:
                return fn
        return None

    def defined_function_names(self):
        return {fn.name for fn in self.functions()}


def iter_statements(body):
    """Yield every statement node in a statement/Block subtree, outer first.

    Children of for/if/while headers are expressions, not statements, and
    are not yielded; loop/branch bodies are walked recursively.
    """
    if body is None:
        return
    if body.kind == "Block":
        for child in body.children:
            yield from iter_statements(child)
        return
    yield body
    if body.kind == "IfSelection":
        yield from iter_statements(body.role("then"))
        yield from iter_statements(body.role("else"))
    elif body.kind in ("WhileLoop", "ForLoop"):
        yield from iter_statements(body.role("body"))


# Keeps the recursive-descent stack comfortably inside Python's default
# recursion limit for both paren and statement nesting.
MAX_NESTING_DEPTH = 64


class _Parser:
    def __init__(self, tokens, filename):
        self.tokens = tokens
        self.filename = filename
        self.pos = 0
        self.depth = 0

    def enter(self):
        self.depth += 1
        if self.depth > MAX_NESTING_DEPTH:
            raise ParseError("construct nests too deeply for the supported subset",
                             self.here())

    def leave(self):
        self.depth -= 1

    # -- token helpers -----------------------------------------------------

    def peek(self, offset=0):
        i = self.pos + offset
        return self.tokens[i] if i < len(self.tokens) else None

    def at(self, kind, spelling=None, offset=0):
        tok = self.peek(offset)
        if tok is None or tok.kind != kind:
            return False
        return spelling is None or tok.spelling == spelling

    def advance(self):
        tok = self.peek()
        self.pos += 1
        return tok

    def here(self):
        tok = self.peek()
        if tok is not None:
            return tok.location
        if self.tokens:
            last = self.tokens[-1].location
            return SourceLocation(last.file, last.line, last.column + 1)
        return SourceLocation(self.filename, 1, 1)

    def expect(self, kind, spelling=None):
        if not self.at(kind, spelling):
            want = spelling or kind
            got = self.peek().spelling if self.peek() else "end of input"
            raise ParseError(f"expected {want!r}, found {got!r}", self.here(), (want,))
        return self.advance()

    def fail(self, message, expected=()):
        raise ParseError(message, self.here(), expected)

    # -- grammar -----------------------------------------------------------

    def parse_translation_unit(self):
        start = self.pos
        loc = self.tokens[0].location if self.tokens else SourceLocation(self.filename, 1, 1)
        unit = Node("TranslationUnit", loc)
        children = []
        while self.peek() is not None:
            children.extend(self.parse_toplevel())
        unit.children = children
        unit.span = (start, self.pos)
        return unit

    def parse_toplevel(self):
        if not (self.at(KEYWORD) and self.peek().spelling in BASE_TYPE_KEYWORDS | {"struct"}) \
                and not self.at(IDENT):
            self.fail("expected a function definition or declaration")
        mark = self.pos
        base = self.parse_type_base()
        depth = 0
        while self.at(OP, "*"):
            self.advance()
            depth += 1
        if self.at(IDENT) and self.at(PUNCT, "(", offset=1):
            return [self.parse_function_def(mark, base, depth)]
        self.pos = mark
        return self.parse_declaration()

    def parse_type_base(self):
        tok = self.peek()
        if tok is None:
            self.fail("expected a type name")
        if tok.kind == KEYWORD and tok.spelling == "struct":
            self.advance()
            name = self.expect(IDENT)
            return TypeDescriptor(name.spelling, is_struct=True)
        if tok.kind == KEYWORD and tok.spelling in BASE_TYPE_KEYWORDS:
            self.advance()
            return TypeDescriptor(tok.spelling)
        if tok.kind == IDENT:
            self.advance()
            return TypeDescriptor(tok.spelling)
        self.fail(f"expected a type name, found {tok.spelling!r}")

    def parse_function_def(self, start, base, depth):
        name_tok = self.expect(IDENT)
        fn = Node("FunctionDef", name_tok.location, name=name_tok.spelling,
                  type_desc=TypeDescriptor(base.base, depth, base.is_struct))
        self.expect(PUNCT, "(")
        params = []
        if not self.at(PUNCT, ")"):
            if self.at(KEYWORD, "void") and self.at(PUNCT, ")", offset=1):
                self.advance()
            else:
                params.append(self.parse_param())
                while self.at(PUNCT, ","):
                    self.advance()
                    params.append(self.parse_param())
        self.expect(PUNCT, ")")
        fn.params = params
        body = self.parse_block()
        fn.children = [body]
        fn.span = (start, self.pos)
        return fn

    def parse_param(self):
        base = self.parse_type_base()
        depth = 0
        while self.at(OP, "*"):
            self.advance()
            depth += 1
        name = self.expect(IDENT)
        return (TypeDescriptor(base.base, depth, base.is_struct), name.spelling)

    def parse_block(self):
        start = self.pos
        open_tok = self.expect(PUNCT, "{")
        block = Node("Block", open_tok.location)
        stmts = []
        while not self.at(PUNCT, "}"):
            if self.peek() is None:
                self.fail("unterminated block, expected '}'", ("}",))
            stmts.extend(self.parse_statement())
        self.expect(PUNCT, "}")
        block.children = stmts
        block.span = (start, self.pos)
        return block

    def parse_statement(self):
        """Parse one statement; declarations may expand to several nodes."""
        self.enter()
        try:
            return self._parse_statement_inner()
        finally:
            self.leave()

    def _parse_statement_inner(self):
        tok = self.peek()
        if tok is None:
            self.fail("expected a statement")
        if tok.kind == PUNCT and tok.spelling == "{":
            return [self.parse_block()]
        if tok.kind == KEYWORD:
            kw = tok.spelling
            if kw == "if":
                return [self.parse_if()]
            if kw == "while":
                return [self.parse_while()]
            if kw == "for":
                return [self.parse_for()]
            if kw in ("break", "continue"):
                start = self.pos
                self.advance()
                self.expect(PUNCT, ";")
                kind = "BreakStatement" if kw == "break" else "ContinueStatement"
                node = Node(kind, tok.location)
                node.span = (start, self.pos)
                return [node]
            if kw == "return":
                start = self.pos
                self.advance()
                node = Node("ReturnStatement", tok.location)
                if not self.at(PUNCT, ";"):
                    node.children = [self.parse_expression()]
                self.expect(PUNCT, ";")
                node.span = (start, self.pos)
                return [node]
            if kw in BASE_TYPE_KEYWORDS or kw == "struct":
                return self.parse_declaration()
            self.fail(f"unexpected keyword {kw!r}")
        if tok.kind == IDENT and self.starts_declaration():
            return self.parse_declaration()
        if tok.kind == IDENT and tok.spelling == "assert" and self.at(PUNCT, "(", offset=1):
            return [self.parse_assert()]
        return [self.parse_expression_statement()]

    def starts_declaration(self):
        """IDENT '*'+ IDENT or IDENT IDENT opens a declaration."""
        offset = 1
        saw_star = False
        while self.at(OP, "*", offset):
            saw_star = True
            offset += 1
        if not self.at(IDENT, offset=offset):
            return False
        return saw_star or offset == 1

    def parse_declaration(self):
        base = self.parse_type_base()
        nodes = []
        while True:
            start = self.pos if nodes else self.pos - (2 if base.is_struct else 1)
            depth = 0
            while self.at(OP, "*"):
                self.advance()
                depth += 1
            name_tok = self.expect(IDENT)
            node = Node("VariableDeclarator", name_tok.location, name=name_tok.spelling,
                        type_desc=TypeDescriptor(base.base, depth, base.is_struct))
            if self.at(OP, "="):
                self.advance()
                node.children = [self.parse_expression()]
            node.span = (start, self.pos)
            nodes.append(node)
            if self.at(PUNCT, ","):
                self.advance()
                continue
            break
        self.expect(PUNCT, ";")
        # All declarators of the line share the declaring token's location.
        first_loc = nodes[0].location
        for node in nodes:
            node.location = SourceLocation(first_loc.file, first_loc.line, node.location.column)
        return nodes

    def parse_if(self):
        start = self.pos
        kw = self.expect(KEYWORD, "if")
        self.expect(PUNCT, "(")
        cond = self.parse_expression()
        self.expect(PUNCT, ")")
        then = self.parse_substatement()
        node = Node("IfSelection", kw.location)
        node.children = [cond, then]
        node.roles = {"cond": 0, "then": 1}
        if self.at(KEYWORD, "else"):
            self.advance()
            node.children.append(self.parse_substatement())
            node.roles["else"] = 2
        node.span = (start, self.pos)
        return node

    def parse_while(self):
        start = self.pos
        kw = self.expect(KEYWORD, "while")
        self.expect(PUNCT, "(")
        cond = self.parse_expression()
        self.expect(PUNCT, ")")
        body = self.parse_substatement()
        node = Node("WhileLoop", kw.location)
        node.children = [cond, body]
        node.roles = {"cond": 0, "body": 1}
        node.span = (start, self.pos)
        return node

    def parse_for(self):
        start = self.pos
        kw = self.expect(KEYWORD, "for")
        self.expect(PUNCT, "(")
        node = Node("ForLoop", kw.location)
        node.roles = {}

        def add(role, child):
            node.roles[role] = len(node.children)
            node.children.append(child)

        if not self.at(PUNCT, ";"):
            add("init", self.parse_header_clause())
        self.expect(PUNCT, ";")
        if not self.at(PUNCT, ";"):
            add("cond", self.parse_expression())
        self.expect(PUNCT, ";")
        if not self.at(PUNCT, ")"):
            add("update", self.parse_header_clause())
        self.expect(PUNCT, ")")
        add("body", self.parse_substatement())
        node.span = (start, self.pos)
        return node

    def parse_header_clause(self):
        """A for-header init/update: an assignment or a bare expression."""
        start = self.pos
        expr = self.parse_expression()
        if self.at(OP, "="):
            eq = self.advance()
            rhs = self.parse_expression()
            node = Node("AssignmentStatement", expr.location, op=eq.spelling)
            node.children = [expr, rhs]
            node.span = (start, self.pos)
            return node
        return expr

    def parse_substatement(self):
        stmts = self.parse_statement()
        if len(stmts) == 1:
            return stmts[0]
        # A multi-declarator line as a loop/branch body; wrap to keep one child.
        block = Node("Block", stmts[0].location)
        block.children = stmts
        block.span = (stmts[0].span[0], stmts[-1].span[1])
        return block

    def parse_assert(self):
        start = self.pos
        kw = self.expect(IDENT)  # 'assert'
        self.expect(PUNCT, "(")
        node = Node("AssertStatement", kw.location)
        if not self.at(PUNCT, ")"):
            node.children.append(self.parse_expression())
            while self.at(PUNCT, ","):
                self.advance()
                node.children.append(self.parse_expression())
        self.expect(PUNCT, ")")
        self.expect(PUNCT, ";")
        node.span = (start, self.pos)
        return node

    def parse_expression_statement(self):
        start = self.pos
        expr = self.parse_expression()
        if self.at(OP, "="):
            eq = self.advance()
            rhs = self.parse_expression()
            self.expect(PUNCT, ";")
            node = Node("AssignmentStatement", expr.location, op=eq.spelling)
            node.children = [expr, rhs]
            node.span = (start, self.pos)
            return node
        self.expect(PUNCT, ";")
        if expr.kind == "Call":
            node = Node("MethodInvocation", expr.location, callee=expr.callee)
            node.children = [expr]
            node.span = (start, self.pos)
            return node
        node = Node("ExpressionStatement", expr.location)
        node.children = [expr]
        node.span = (start, self.pos)
        return node

    # Binary operator precedence, C order (higher binds tighter).
    _PRECEDENCE = {
        "||": 1, "&&": 2, "|": 3, "&": 4,
        "==": 5, "!=": 5,
        "<": 6, ">": 6, "<=": 6, ">=": 6,
        "+": 7, "-": 7,
        "*": 8, "/": 8, "%": 8,
    }

    def parse_expression(self):
        return self.parse_binary(1)

    def parse_binary(self, min_prec):
        start = self.pos
        left = self.parse_unary()
        while True:
            tok = self.peek()
            if tok is None or tok.kind != OP:
                return left
            prec = self._PRECEDENCE.get(tok.spelling)
            if prec is None or prec < min_prec:
                return left
            self.advance()
            right = self.parse_binary(prec + 1)
            node = Node("BinaryOp", tok.location, op=tok.spelling)
            node.children = [left, right]
            node.span = (start, self.pos)
            left = node

    def parse_unary(self):
        tok = self.peek()
        if tok is not None and tok.kind == OP and tok.spelling in ("!", "-", "*", "&"):
            start = self.pos
            self.advance()
            operand = self.parse_unary()
            node = Node("UnaryOp", tok.location, op=tok.spelling)
            node.children = [operand]
            node.span = (start, self.pos)
            return node
        return self.parse_postfix()

    def parse_postfix(self):
        start = self.pos
        node = self.parse_primary()
        while True:
            if self.at(OP, "->"):
                arrow = self.advance()
                member = self.expect(IDENT)
                access = Node("MemberAccess", arrow.location, name=member.spelling)
                access.children = [node]
                access.span = (start, self.pos)
                node = access
                continue
            if self.at(PUNCT, "(") and node.kind == "Identifier":
                self.advance()
                call = Node("Call", node.location, callee=node.name)
                args = []
                if not self.at(PUNCT, ")"):
                    args.append(self.parse_expression())
                    while self.at(PUNCT, ","):
                        self.advance()
                        args.append(self.parse_expression())
                self.expect(PUNCT, ")")
                call.children = args
                call.span = (start, self.pos)
                node = call
                continue
            return node

    def parse_primary(self):
        tok = self.peek()
        if tok is None:
            self.fail("expected an expression")
        start = self.pos
        if tok.kind == IDENT:
            self.advance()
            if tok.spelling == "NULL":
                node = Node("NullLiteral", tok.location)
            else:
                node = Node("Identifier", tok.location, name=tok.spelling)
            node.span = (start, self.pos)
            return node
        if tok.kind in (NUMBER, STRING, CHAR):
            self.advance()
            node = Node("Constant", tok.location, value=tok.spelling)
            node.span = (start, self.pos)
            return node
        if tok.kind == PUNCT and tok.spelling == "(":
            self.enter()
            try:
                self.advance()
                inner = self.parse_expression()
                self.expect(PUNCT, ")")
                return inner
            finally:
                self.leave()
        self.fail(f"unexpected token {tok.spelling!r} in expression")


def parse_translation_unit(tokens, filename="<string>"):
    return SyntaxTree(_Parser(tokens, filename).parse_translation_unit(), tokens, filename)


def parse_source(source_text, filename="<string>"):
    return parse_translation_unit(lex(source_text, filename), filename)


@dataclass(frozen=True)
class IpAnchor:
    """A warning resolved to a statement node and the implicated variable."""

    function: str
    node: Node
    ip_variable: str
    location: SourceLocation


def _anchor_region(node):
    """Children scanned for the warning variable: the header for control
    statements, the whole statement otherwise."""
    if node.kind == "IfSelection" or node.kind == "WhileLoop":
        return [node.role("cond")]
    if node.kind == "ForLoop":
        return [node.role(r) for r in ("init", "cond", "update") if node.role(r) is not None]
    return list(node.children)


def _mentions_variable(node, name):
    if node is None:
        return False
    if node.kind == "Identifier" and node.name == name:
        return True
    if node.kind == "VariableDeclarator" and node.name == name:
        return True
    return any(_mentions_variable(c, name) for c in node.children)


def _statement_lines(tree, node):
    """Line range a statement occupies for anchoring; control statements
    count only their header tokens (keyword through closing paren)."""
    start, end = node.span
    if node.kind in CONTROL_KINDS:
        body_role = "then" if node.kind == "IfSelection" else "body"
        body = node.role(body_role)
        if body is not None:
            end = body.span[0]
    toks = tree.tokens[start:end]
    if not toks:
        return (node.line, node.line)
    return (min(t.location.line for t in toks), max(t.location.line for t in toks))


def locate_ip(tree, report):
    """Resolve a warning report to the statement it anchors to.

    ``report`` needs attributes ``function``, ``line`` and ``variable``.
    Raises :class:`AnchorNotFound` when no statement of the named function
    covers the line, and :class:`VariableNotAtIp` when none of the covering
    statements mentions the variable.
    """
    fn = tree.function_named(report.function)
    if fn is None:
        raise AnchorNotFound(f"no function named {report.function!r}")
    at_line = []

    def visit(body, depth):
        for stmt in iter_direct(body):
            if stmt.kind == "Block":
                visit(stmt, depth)
                continue
            lo, hi = _statement_lines(tree, stmt)
            if lo <= report.line <= hi:
                at_line.append((depth, len(at_line), stmt))
            if stmt.kind == "IfSelection":
                visit(stmt.role("then"), depth + 1)
                visit(stmt.role("else"), depth + 1)
            elif stmt.kind in ("WhileLoop", "ForLoop"):
                visit(stmt.role("body"), depth + 1)

    def iter_direct(body):
        if body is None:
            return []
        if body.kind == "Block":
            return body.children
        return [body]

    visit(fn.children[0], 0)
    if not at_line:
        raise AnchorNotFound(
            f"no statement of {report.function!r} at line {report.line}")
    matching = [
        (depth, order, stmt)
        for depth, order, stmt in at_line
        if (stmt.kind == "VariableDeclarator" and stmt.name == report.variable)
        or any(_mentions_variable(r, report.variable) for r in _anchor_region(stmt))
    ]
    if not matching:
        raise VariableNotAtIp(
            f"variable {report.variable!r} does not occur in any statement at line {report.line}")
    matching.sort(key=lambda item: (-item[0], item[1]))
    node = matching[0][2]
    return IpAnchor(report.function, node, report.variable, node.location)
