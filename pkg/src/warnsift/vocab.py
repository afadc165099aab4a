"""Closed token vocabulary and the spelling <-> id table.

The vocabulary is fixed at build time: four specials first ([PAD]=0,
[UNK]=1, [CLS]=2, [SEP]=3), then statement kinds, type/value/call/operator
atoms, VariableIP, and a bounded run of indexed variable placeholders.
Sequences extracted by this package never leave the vocabulary; foreign
corpora may still contain unknown spellings, which map to [UNK].
"""

import hashlib

PAD = "[PAD]"
UNK = "[UNK]"
CLS = "[CLS]"
SEP = "[SEP]"

STATEMENT_KINDS = (
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
)

TYPE_ATOMS = (
    "StructType",
    "IntType",
    "CharType",
    "FloatType",
    "VoidType",
    "Pointer",
)

VALUE_ATOMS = ("Constant", "Null")

CALL_ATOMS = ("LibraryCall", "UserDefinedCall")

OPERATOR_ATOMS = (
    "Equal",
    "NotEqual",
    "Less",
    "Greater",
    "LessEqual",
    "GreaterEqual",
    "LogicalAnd",
    "LogicalOr",
    "LogicalNot",
    "InclusiveAnd",
    "InclusiveOr",
    "Assign",
    "Plus",
    "Minus",
    "Times",
    "Divide",
    "Mod",
    "Dereference",
    "AddressOf",
)

VARIABLE_IP = "VariableIP"

# Indexed placeholders beyond this bound fall back to [UNK] at encoding time.
MAX_VARIABLE_INDEX = 64

SPELLINGS = (
    (PAD, UNK, CLS, SEP)
    + STATEMENT_KINDS
    + TYPE_ATOMS
    + VALUE_ATOMS
    + CALL_ATOMS
    + OPERATOR_ATOMS
    + (VARIABLE_IP,)
    + tuple(f"Variable{i}" for i in range(1, MAX_VARIABLE_INDEX + 1))
)


class Vocabulary:
    """Bidirectional spelling/id table over a fixed spelling list."""

    def __init__(self, spellings=SPELLINGS):
        self.spellings = tuple(spellings)
        self.index = {s: i for i, s in enumerate(self.spellings)}
        if len(self.index) != len(self.spellings):
            raise ValueError("duplicate spelling in vocabulary")

    def __len__(self):
        return len(self.spellings)

    def __contains__(self, spelling):
        return spelling in self.index

    def id_of(self, spelling):
        """Id for a spelling; unknown spellings map to [UNK]."""
        return self.index.get(spelling, self.index[UNK])

    def spelling_of(self, token_id):
        return self.spellings[token_id]

    @property
    def pad_id(self):
        return self.index[PAD]

    @property
    def unk_id(self):
        return self.index[UNK]

    @property
    def cls_id(self):
        return self.index[CLS]

    @property
    def sep_id(self):
        return self.index[SEP]

    def file_text(self):
        """Newline-separated spellings; id = 0-based line number."""
        return "\n".join(self.spellings) + "\n"

    def sha256(self):
        return hashlib.sha256(self.file_text().encode("utf-8")).hexdigest()

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.file_text())

    @classmethod
    def load(cls, path):
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
        return cls(tuple(lines))


DEFAULT_VOCAB = Vocabulary()
