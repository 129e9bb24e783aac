"""Line-oriented text formats for ontologies, mappings, databases, datasets, UCQs and graphs.

Statements end with ``.`` (optional for UCQ and dataset lines) and ``#``
starts a comment. Parse errors carry a 1-based line and column.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .canonical import canonicalize
from .model import (
    BOTTOM,
    TOP,
    AtomicConcept,
    Atom,
    BasicRole,
    ConceptDisjointness,
    ConceptInclusion,
    ConjunctiveQuery,
    Dataset,
    ExistsRole,
    Layer,
    MappingAssertion,
    Ontology,
    Predicate,
    QueryError,
    RoleDisjointness,
    RoleInclusion,
    SourceDatabase,
    Term,
    UnionQuery,
    constant,
    sorted_atoms,
    variable,
)


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.message = message
        self.line = line
        self.column = column
        where = f"line {line}, column {column}: " if line else ""
        super().__init__(where + message)


_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>\#[^\n]*)
  | (?P<nl>\n)
  | (?P<quoted>'(?:[^'\\\n]|\\.)*')
  | (?P<arrow>=>)
  | (?P<neck>:-)
  | (?P<ident>[A-Za-z0-9_][A-Za-z0-9_]*)
  | (?P<punct>[(),.:/])
    """,
    re.VERBOSE,
)

IDENT = re.compile(r"[A-Za-z0-9_]+")
VARIABLE_NAME = re.compile(r"[a-z_][A-Za-z0-9_]*")
PREDICATE_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int


def tokenize(text: str) -> list[Token]:
    out = []
    pos = 0
    line, line_start = 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "nl":
            out.append(Token("nl", "\n", line, pos - line_start + 1))
            line, line_start = line + 1, m.end()
        elif kind not in ("ws", "comment"):
            out.append(Token(kind, m.group(), line, pos - line_start + 1))
        pos = m.end()
    out.append(Token("eof", "", line, pos - line_start + 1))
    return out


def _unquote(s: str) -> str:
    return re.sub(r"\\(.)", r"\1", s[1:-1])


def quote_constant(name: str) -> str:
    if IDENT.fullmatch(name):
        return name
    return "'" + name.replace("\\", "\\\\").replace("'", "\\'") + "'"


class _Parser:
    def __init__(self, text: str, skip_newlines: bool = True):
        self.tokens = [t for t in tokenize(text) if not (skip_newlines and t.kind == "nl")]
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def error(self, message: str, tok: Optional[Token] = None) -> ParseError:
        tok = tok or self.tok
        return ParseError(message, tok.line, tok.column)

    def at(self, *texts: str) -> bool:
        return self.tok.text in texts and self.tok.kind != "quoted"

    def accept(self, text: str) -> Optional[Token]:
        if self.at(text):
            tok = self.tok
            self.i += 1
            return tok
        return None

    def expect(self, text: str) -> Token:
        tok = self.accept(text)
        if tok is None:
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")
        return tok

    def ident(self, what: str = "identifier") -> Token:
        tok = self.tok
        if tok.kind != "ident":
            raise self.error(f"expected {what}, found {tok.text or 'end of input'!r}")
        self.i += 1
        return tok

    def skip_newlines(self):
        while self.tok.kind == "nl":
            self.i += 1

    def end_of_line(self):
        if self.tok.kind not in ("nl", "eof"):
            raise self.error(f"unexpected {self.tok.text!r}")


# ---------------------------------------------------------------------------
# Predicate bookkeeping shared by the parsers
# ---------------------------------------------------------------------------


class Signature:
    """Predicates seen so far, keyed by (layer, name), with arity checks."""

    def __init__(self, known: Iterable[Predicate] = (), closed: bool = False):
        self.preds: dict[tuple[Layer, str], Predicate] = {}
        for p in known:
            self.preds[(p.layer, p.name)] = p
        self.closed = closed

    def get(self, name: str, arity: int, layer: Layer, tok: Token) -> Predicate:
        if not PREDICATE_NAME.fullmatch(name):
            raise ParseError(f"invalid predicate name {name!r}", tok.line, tok.column)
        if layer is Layer.ONTOLOGY and name in (TOP.name, BOTTOM.name):
            if arity != 1:
                raise ParseError(f"{name} is a reserved concept of arity 1", tok.line, tok.column)
            return TOP if name == TOP.name else BOTTOM
        p = self.preds.get((layer, name))
        if p is None:
            if self.closed:
                raise ParseError(f"unknown predicate {name}", tok.line, tok.column)
            if layer is Layer.ONTOLOGY and arity not in (1, 2):
                raise ParseError(f"ontology predicate {name} must be unary or binary", tok.line, tok.column)
            p = Predicate(name, arity, layer)
            self.preds[(layer, name)] = p
        elif p.arity != arity:
            raise ParseError(f"arity mismatch: {name} has arity {p.arity}, used with {arity}", tok.line, tok.column)
        return p


def _parse_args(p: _Parser, term) -> tuple[list[Term], Token]:
    start = p.expect("(")
    args = []
    if not p.at(")"):
        while True:
            args.append(term(p))
            if not p.accept(","):
                break
    p.expect(")")
    return args, start


def _variable(p: _Parser) -> Term:
    tok = p.ident("variable")
    if not VARIABLE_NAME.fullmatch(tok.text):
        raise p.error(f"variables must be lowercase identifiers, found {tok.text!r}", tok)
    return variable(tok.text)


def _constant(p: _Parser) -> Term:
    tok = p.tok
    if tok.kind == "quoted":
        p.i += 1
        name = _unquote(tok.text)
        if not name:
            raise p.error("empty constant", tok)
        return constant(name)
    return constant(p.ident("constant").text)


def _parse_cq(p: _Parser, layer: Layer, sig: Signature) -> ConjunctiveQuery:
    start = p.tok
    targets, _ = _parse_args(p, _variable)
    p.expect(":-")
    body = []
    while True:
        name_tok = p.ident("predicate")
        args, _ = _parse_args(p, _variable)
        body.append(Atom(sig.get(name_tok.text, len(args), layer, name_tok), tuple(args)))
        if not p.accept(","):
            break
    try:
        return ConjunctiveQuery(tuple(targets), frozenset(body))
    except QueryError as e:
        raise p.error(str(e), start) from None


# ---------------------------------------------------------------------------
# Ontology
# ---------------------------------------------------------------------------


def _parse_concept_or_role(p: _Parser):
    """A raw side: ('name', tok) | ('some', role, inv) | ('inv', tok)."""
    tok = p.ident("concept or role")
    if tok.text in ("some", "inv") and p.at("("):
        p.expect("(")
        if tok.text == "some":
            inner = p.ident("role")
            inverted = False
            if inner.text == "inv" and p.at("("):
                p.expect("(")
                inner = p.ident("role")
                p.expect(")")
                inverted = True
            p.expect(")")
            return ("some", inner, inverted)
        inner = p.ident("role")
        p.expect(")")
        return ("inv", inner)
    return ("name", tok)


def parse_ontology(
    text: str, roles: Iterable[str] = (), concepts: Iterable[str] = (), signature: Iterable[Predicate] = ()
) -> Ontology:
    """Parse ``isa``/``disjoint`` assertions and ``concept X.``/``role X.`` declarations.

    A bare name is a role if it is declared or used as one anywhere in the
    file (or listed in ``roles``), and a concept otherwise.
    """
    p = _Parser(text)
    raw = []
    declared: list[tuple[str, Token]] = []
    while p.tok.kind != "eof":
        first = p.tok
        if first.kind == "ident" and first.text in ("concept", "role") and p.tokens[p.i + 1].kind == "ident":
            p.i += 1
            name = p.ident()
            p.expect(".")
            declared.append((first.text, name))
            continue
        lhs = _parse_concept_or_role(p)
        op = p.tok
        if not (p.accept("isa") or p.accept("disjoint")):
            raise p.error(f"expected 'isa' or 'disjoint', found {op.text or 'end of input'!r}")
        rhs = _parse_concept_or_role(p)
        p.expect(".")
        raw.append((first, lhs, op.text, rhs))

    role_names = set(roles)
    concept_names = set(concepts)
    for p_ in signature:
        (role_names if p_.arity == 2 else concept_names).add(p_.name)
    for kind, tok in declared:
        (role_names if kind == "role" else concept_names).add(tok.text)
    for _, lhs, _, rhs in raw:
        for side in (lhs, rhs):
            if side[0] in ("some", "inv"):
                role_names.add(side[1].text)
    # a bare name related to a role is a role too
    changed = True
    while changed:
        changed = False
        for _, lhs, _, rhs in raw:
            roleish = [s[0] == "inv" or (s[0] == "name" and s[1].text in role_names) for s in (lhs, rhs)]
            for side, other in ((lhs, roleish[1]), (rhs, roleish[0])):
                name = side[1].text
                if other and side[0] == "name" and name not in role_names and name not in concept_names:
                    role_names.add(name)
                    changed = True
    mentions = [tok for _, tok in declared] + [s[1] for _, l, _, r in raw for s in (l, r)]
    for tok in mentions:
        if tok.text in role_names and (tok.text in concept_names or tok.text in (TOP.name, BOTTOM.name)):
            raise ParseError(f"arity mismatch: {tok.text} used both as concept and role", tok.line, tok.column)

    sig = Signature()

    def concept_of(side):
        if side[0] == "some":
            return ExistsRole(BasicRole(sig.get(side[1].text, 2, Layer.ONTOLOGY, side[1]), side[2]))
        if side[0] == "inv":
            return None
        return AtomicConcept(sig.get(side[1].text, 1, Layer.ONTOLOGY, side[1]))

    def role_of(side):
        if side[0] == "some":
            return None
        return BasicRole(sig.get(side[1].text, 2, Layer.ONTOLOGY, side[1]), side[0] == "inv")

    def is_role(side):
        return side[0] == "inv" or (side[0] == "name" and side[1].text in role_names)

    assertions = []
    for first, lhs, op, rhs in raw:
        if is_role(lhs) != is_role(rhs):
            raise ParseError("cannot relate a concept and a role", first.line, first.column)
        if is_role(lhs):
            l, r = role_of(lhs), role_of(rhs)
            assertions.append(RoleInclusion(l, r) if op == "isa" else RoleDisjointness(l, r))
        else:
            l, r = concept_of(lhs), concept_of(rhs)
            if op == "disjoint" and l == AtomicConcept(BOTTOM):
                raise ParseError("Bottom cannot be the left-hand side of a disjointness", first.line, first.column)
            assertions.append(ConceptInclusion(l, r) if op == "isa" else ConceptDisjointness(l, r))
    extra = set(signature)
    for kind, tok in declared:
        extra.add(sig.get(tok.text, 2 if kind == "role" else 1, Layer.ONTOLOGY, tok))
    return Ontology.build(assertions, extra)


def serialize_ontology(ontology: Ontology) -> str:
    lines = []
    mentioned = set()
    for a in ontology.assertions:
        lines.append(str(a))
        if isinstance(a, (ConceptInclusion, ConceptDisjointness)):
            for side in (a.lhs, a.rhs):
                mentioned.add(side.concept if isinstance(side, AtomicConcept) else side.role.role)
        else:
            mentioned |= {a.lhs.role, a.rhs.role}
    decls = []
    for pred in sorted(ontology.signature):
        # bare role names need a declaration to be read back as roles
        if pred not in mentioned or pred.arity == 2:
            decls.append(f"{'role' if pred.arity == 2 else 'concept'} {pred.name}.")
    return "\n".join(decls + lines) + ("\n" if decls or lines else "")


# ---------------------------------------------------------------------------
# Mapping
# ---------------------------------------------------------------------------


def parse_mapping(text: str, ontology_signature: Iterable[Predicate] = ()) -> tuple[MappingAssertion, ...]:
    """``[ID:] CQ => CQ.`` per assertion; missing ids default to ``m<position>``."""
    p = _Parser(text)
    src_sig = Signature()
    onto_sig = Signature(ontology_signature)
    out = []
    ids: set[str] = set()
    while p.tok.kind != "eof":
        start = p.tok
        if start.kind == "ident" and p.tokens[p.i + 1].text == ":":
            ident = p.ident().text
            p.expect(":")
        else:
            ident = f"m{len(out) + 1}"
        if ident in ids:
            raise p.error(f"duplicate mapping assertion id {ident}", start)
        ids.add(ident)
        src = _parse_cq(p, Layer.SOURCE, src_sig)
        p.expect("=>")
        tgt = _parse_cq(p, Layer.ONTOLOGY, onto_sig)
        p.expect(".")
        if src.targets != tgt.targets:
            raise p.error("source and target queries must share the target list", start)
        out.append(MappingAssertion(ident, src, tgt))
    return tuple(out)


def format_cq(q: ConjunctiveQuery) -> str:
    head = "(" + ",".join(t.name for t in q.targets) + ")"
    return head + " :- " + ", ".join(str(a) for a in sorted_atoms(q.body))


def format_mapping_assertion(m: MappingAssertion) -> str:
    return f"{m.id}: {format_cq(m.source)} => {format_cq(m.target)}."


def serialize_mapping(mapping: Sequence[MappingAssertion]) -> str:
    return "".join(format_mapping_assertion(m) + "\n" for m in mapping)


# ---------------------------------------------------------------------------
# Database and datasets
# ---------------------------------------------------------------------------


def parse_database(text: str, schema: Iterable[Predicate] = ()) -> SourceDatabase:
    p = _Parser(text)
    sig = Signature(schema)
    facts = []
    while p.tok.kind != "eof":
        name = p.ident("predicate")
        args, _ = _parse_args(p, _constant)
        p.expect(".")
        facts.append(Atom(sig.get(name.text, len(args), Layer.SOURCE, name), tuple(args)))
    return SourceDatabase.of(facts, schema)


def format_fact(a: Atom) -> str:
    return f"{a.predicate.name}(" + ",".join(quote_constant(t.name) for t in a.args) + ")."


def serialize_database(db: SourceDatabase) -> str:
    return "".join(format_fact(f) + "\n" for f in sorted_atoms(db.facts))


def _header(p: _Parser, key: str) -> Optional[int]:
    p.skip_newlines()
    if p.tok.text == key and p.tokens[p.i + 1].text == ":":
        p.i += 2
        tok = p.tok
        if tok.kind != "ident" or not tok.text.isdigit():
            raise p.error("expected a nonnegative integer")
        p.i += 1
        p.end_of_line()
        return int(tok.text)
    return None


def parse_dataset(text: str) -> Dataset:
    p = _Parser(text, skip_newlines=False)
    arity = _header(p, "arity")
    if arity is None:
        raise p.error("dataset must start with 'arity: n'")
    if arity < 1:
        raise p.error("dataset arity must be at least 1")
    rows = []
    while True:
        p.skip_newlines()
        if p.tok.kind == "eof":
            break
        args, start = _parse_args(p, _constant)
        if len(args) != arity:
            raise p.error(f"expected {arity} components, found {len(args)}", start)
        p.accept(".")
        p.end_of_line()
        rows.append(tuple(args))
    return Dataset(arity, frozenset(rows))


def format_tuple(row: Sequence[Term]) -> str:
    return "(" + ",".join(quote_constant(t.name) for t in row) + ")"


def serialize_tuples(rows: Iterable[Sequence[Term]]) -> str:
    """One ``(c1,...,cn)`` per line in canonical order."""
    ordered = sorted(rows, key=lambda r: tuple(t.sort_key() for t in r))
    return "\n".join(format_tuple(r) for r in ordered)


def serialize_dataset(dataset: Dataset) -> str:
    body = serialize_tuples(dataset.tuples)
    return f"arity: {dataset.arity}\n" + (body + "\n" if body else "")


# ---------------------------------------------------------------------------
# UCQs
# ---------------------------------------------------------------------------


def parse_ucq(text: str, signature: Optional[Iterable[Predicate]] = None, layer: Layer = Layer.ONTOLOGY) -> UnionQuery:
    """One CQ per line, optional ``arity: n`` header; ``BOTTOM/n`` or an empty body is bottom.

    With ``signature`` given, predicates outside it are rejected.
    """
    p = _Parser(text, skip_newlines=False)
    sig = Signature(signature or (), closed=signature is not None)
    arity = _header(p, "arity")
    cqs: list[ConjunctiveQuery] = []
    bottom = False
    while True:
        p.skip_newlines()
        if p.tok.kind == "eof":
            break
        if p.tok.text == "BOTTOM" and p.tokens[p.i + 1].text == "/":
            p.i += 2
            n = p.ident("arity")
            if not n.text.isdigit():
                raise p.error("expected an arity", n)
            if arity is not None and arity != int(n.text):
                raise p.error(f"arity mismatch: header says {arity}", n)
            arity = int(n.text)
            bottom = True
            p.end_of_line()
            continue
        start = p.tok
        q = _parse_cq(p, layer, sig)
        p.accept(".")
        p.end_of_line()
        if arity is None:
            arity = q.arity
        elif q.arity != arity:
            raise p.error(f"arity mismatch: expected {arity} targets, found {q.arity}", start)
        cqs.append(q)
    if arity is None:
        raise ParseError("empty query file needs an 'arity: n' header or 'BOTTOM/n'", 1, 1)
    if bottom and cqs:
        raise ParseError("BOTTOM cannot be combined with other disjuncts", 1, 1)
    return UnionQuery(arity, tuple(cqs))


def serialize_ucq(q, canonical: bool = True) -> str:
    """``BOTTOM/n`` for the empty union, else one CQ per line."""
    if isinstance(q, ConjunctiveQuery):
        q = UnionQuery(q.arity, (q,))
    if canonical:
        q = canonicalize(q)
    if q.is_bottom:
        return f"BOTTOM/{q.arity}"
    return "\n".join(format_cq(d) for d in q.disjuncts)


# ---------------------------------------------------------------------------
# Graphs
# ---------------------------------------------------------------------------


def _vertex(p: _Parser) -> str:
    tok = p.tok
    if tok.kind == "quoted":
        p.i += 1
        return _unquote(tok.text)
    return p.ident("vertex").text


def parse_graph(text: str):
    """``vertices: v1 v2 ...`` followed by one ``u v`` edge per line."""
    from .reductions import Graph

    p = _Parser(text, skip_newlines=False)
    p.skip_newlines()
    if not (p.tok.text == "vertices" and p.tokens[p.i + 1].text == ":"):
        raise p.error("graph must start with 'vertices: ...'")
    p.i += 2
    vertices: list[str] = []
    while p.tok.kind not in ("nl", "eof"):
        start = p.tok
        v = _vertex(p)
        if v in vertices:
            raise p.error(f"duplicate vertex {v!r}", start)
        vertices.append(v)
    if not vertices:
        raise p.error("graph has no vertices")
    known = set(vertices)
    edges = []
    while True:
        p.skip_newlines()
        if p.tok.kind == "eof":
            break
        pair = []
        first = p.tok
        for _ in range(2):
            start = p.tok
            v = _vertex(p)
            if v not in known:
                raise p.error(f"undeclared vertex {v!r}", start)
            pair.append(v)
        if pair[0] == pair[1]:
            raise p.error(f"loop on {pair[0]!r}", first)
        p.accept(".")
        p.end_of_line()
        edges.append(tuple(pair))
    return Graph.of(vertices, edges)


def serialize_graph(g) -> str:
    lines = ["vertices: " + " ".join(quote_constant(v) for v in g.ordered_vertices())]
    lines += [f"{quote_constant(u)} {quote_constant(v)}" for u, v in g.ordered_edges()]
    return "\n".join(lines) + "\n"
