"""Lexer for the supported C subset.

Produces a flat token stream with exact 1-based line/column locations.
Comments and whitespace are discarded; every other byte must belong to a
recognized token or lexing fails with :class:`LexError`.
"""

from dataclasses import dataclass

from .errors import LexError


@dataclass(frozen=True)
class SourceLocation:
    file: str
    line: int
    column: int

    def __str__(self):
        return f"{self.file}:{self.line}:{self.column}"


KEYWORD = "keyword"
IDENT = "ident"
NUMBER = "number"
STRING = "string"
CHAR = "char"
OP = "op"
PUNCT = "punct"


@dataclass(frozen=True)
class Token:
    kind: str
    spelling: str
    location: SourceLocation

    def __repr__(self):
        return f"Token({self.kind}, {self.spelling!r}, {self.location})"


KEYWORDS = frozenset(
    {
        "void", "int", "char", "float", "double", "struct",
        "if", "else", "for", "while",
        "break", "continue", "return",
    }
)

# Longest-match first.
TWO_CHAR_OPS = ("==", "!=", "&&", "||", "<=", ">=", "->")
ONE_CHAR_OPS = "&|!*=<>+-/%"
PUNCTUATION = "(){};,"


def _is_ident_start(ch):
    return ch.isalpha() or ch == "_"


def _is_ident_char(ch):
    return ch.isalnum() or ch == "_"


class _Scanner:
    def __init__(self, text, filename):
        self.text = text
        self.filename = filename
        self.pos = 0
        self.line = 1
        self.column = 1

    def location(self):
        return SourceLocation(self.filename, self.line, self.column)

    def peek(self, offset=0):
        i = self.pos + offset
        return self.text[i] if i < len(self.text) else ""

    def advance(self, count=1):
        for _ in range(count):
            if self.pos >= len(self.text):
                return
            if self.text[self.pos] == "\n":
                self.line += 1
                self.column = 1
            else:
                self.column += 1
            self.pos += 1

    def take_while(self, predicate):
        start = self.pos
        while self.pos < len(self.text) and predicate(self.text[self.pos]):
            self.advance()
        return self.text[start:self.pos]


def lex(source_text, filename="<string>"):
    """Tokenize ``source_text`` into a list of :class:`Token`."""
    sc = _Scanner(source_text, filename)
    tokens = []
    while sc.pos < len(sc.text):
        ch = sc.peek()
        if ch in " \t\r\n\f\v":
            sc.advance()
            continue
        if ch == "/" and sc.peek(1) == "/":
            while sc.pos < len(sc.text) and sc.peek() != "\n":
                sc.advance()
            continue
        if ch == "/" and sc.peek(1) == "*":
            loc = sc.location()
            sc.advance(2)
            while sc.pos < len(sc.text):
                if sc.peek() == "*" and sc.peek(1) == "/":
                    sc.advance(2)
                    break
                sc.advance()
            else:
                raise LexError("unterminated block comment", loc)
            continue

        loc = sc.location()
        if _is_ident_start(ch):
            spelling = sc.take_while(_is_ident_char)
            kind = KEYWORD if spelling in KEYWORDS else IDENT
            tokens.append(Token(kind, spelling, loc))
            continue
        if ch.isdigit():
            spelling = _lex_number(sc)
            tokens.append(Token(NUMBER, spelling, loc))
            continue
        if ch == '"':
            tokens.append(Token(STRING, _lex_quoted(sc, '"'), loc))
            continue
        if ch == "'":
            tokens.append(Token(CHAR, _lex_quoted(sc, "'"), loc))
            continue
        two = sc.text[sc.pos:sc.pos + 2]
        if two in TWO_CHAR_OPS:
            sc.advance(2)
            tokens.append(Token(OP, two, loc))
            continue
        if ch in ONE_CHAR_OPS:
            sc.advance()
            tokens.append(Token(OP, ch, loc))
            continue
        if ch in PUNCTUATION:
            sc.advance()
            tokens.append(Token(PUNCT, ch, loc))
            continue
        raise LexError(f"unrecognized character {ch!r}", loc)
    return tokens


def _lex_number(sc):
    start = sc.pos
    if sc.peek() == "0" and sc.peek(1) in "xX":
        sc.advance(2)
        sc.take_while(lambda c: c in "0123456789abcdefABCDEF")
    else:
        sc.take_while(str.isdigit)
        if sc.peek() == "." and sc.peek(1).isdigit():
            sc.advance()
            sc.take_while(str.isdigit)
    return sc.text[start:sc.pos]


def _lex_quoted(sc, quote):
    start = sc.pos
    loc = sc.location()
    sc.advance()
    while sc.pos < len(sc.text):
        ch = sc.peek()
        if ch == "\\":
            sc.advance(2)
            continue
        if ch == quote:
            sc.advance()
            return sc.text[start:sc.pos]
        if ch == "\n":
            break
        sc.advance()
    raise LexError("unterminated literal", loc)
