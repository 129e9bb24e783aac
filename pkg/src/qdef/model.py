"""Value types for OBDM systems: terms, atoms, queries, ontologies, mappings.

Everything here is immutable. Structural problems in user-level containers
(mappings, databases, datasets) are reported by :func:`validate_system`
rather than raised, while the query types reject malformed input at
construction time since every algorithm relies on their invariants.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Sequence, Union

NULL_PREFIX = "n!"


class TermKind(enum.IntEnum):
    CONSTANT = 0
    VARIABLE = 1
    NULL = 2


class Layer(enum.Enum):
    SOURCE = "source"
    ONTOLOGY = "ontology"
    INTERMEDIATE = "intermediate"


class QueryError(ValueError):
    """A query violates a structural invariant."""


_DIGITS = re.compile(r"(\d+)")


def natural_key(text: str) -> tuple:
    # "v10" sorts after "v9"
    return tuple(int(p) if p.isdigit() else p for p in _DIGITS.split(text))


@dataclass(frozen=True, order=True)
class Term:
    kind: TermKind
    name: str

    def __post_init__(self):
        if not self.name:
            raise ValueError("term name must be nonempty")
        if (self.kind is TermKind.NULL) != self.name.startswith(NULL_PREFIX):
            raise ValueError(f"labeled nulls (and only they) carry the {NULL_PREFIX!r} prefix: {self.name!r}")

    @property
    def is_constant(self) -> bool:
        return self.kind is TermKind.CONSTANT

    @property
    def is_variable(self) -> bool:
        return self.kind is TermKind.VARIABLE

    @property
    def is_null(self) -> bool:
        return self.kind is TermKind.NULL

    def sort_key(self) -> tuple:
        return (int(self.kind), natural_key(self.name))

    def __str__(self):
        return self.name

    def __repr__(self):
        return f"{self.kind.name.lower()}({self.name!r})"


def constant(name: str) -> Term:
    return Term(TermKind.CONSTANT, name)


def variable(name: str) -> Term:
    return Term(TermKind.VARIABLE, name)


def null(name: str) -> Term:
    return Term(TermKind.NULL, name)


def constants(*names: str) -> tuple[Term, ...]:
    return tuple(constant(n) for n in names)


@dataclass(frozen=True)
class Predicate:
    name: str
    arity: int
    layer: Layer = Layer.ONTOLOGY

    def __post_init__(self):
        if self.arity < 0:
            raise ValueError("arity must be nonnegative")

    def __call__(self, *args: Term) -> "Atom":
        return Atom(self, tuple(args))

    def sort_key(self) -> tuple:
        return (self.name, self.arity, self.layer.value)

    def __str__(self):
        return self.name

    # Enum members are not orderable; keep dataclass ordering usable.
    def __lt__(self, other):
        return self.sort_key() < other.sort_key()


def concept(name: str) -> Predicate:
    return Predicate(name, 1, Layer.ONTOLOGY)


def role(name: str) -> Predicate:
    return Predicate(name, 2, Layer.ONTOLOGY)


def source(name: str, arity: int) -> Predicate:
    return Predicate(name, arity, Layer.SOURCE)


TOP = concept("Top")
BOTTOM = concept("Bottom")
RESERVED_CONCEPTS = (TOP, BOTTOM)


@dataclass(frozen=True)
class Atom:
    predicate: Predicate
    args: tuple[Term, ...]

    def __post_init__(self):
        if not isinstance(self.args, tuple):
            object.__setattr__(self, "args", tuple(self.args))
        if len(self.args) != self.predicate.arity:
            raise ValueError(
                f"{self.predicate.name} expects {self.predicate.arity} arguments, got {len(self.args)}"
            )

    def sort_key(self) -> tuple:
        return (self.predicate.sort_key(), tuple(t.sort_key() for t in self.args))

    def substitute(self, mapping) -> "Atom":
        return Atom(self.predicate, tuple(mapping.get(t, t) for t in self.args))

    def __lt__(self, other):
        return self.sort_key() < other.sort_key()

    def __str__(self):
        return f"{self.predicate.name}({','.join(t.name for t in self.args)})"

    __repr__ = __str__


AtomSet = frozenset  # frozenset[Atom]


def domain_of(atoms: Iterable[Atom]) -> set[Term]:
    """All terms occurring in ``atoms``."""
    return {t for a in atoms for t in a.args}


def sorted_atoms(atoms: Iterable[Atom]) -> list[Atom]:
    return sorted(atoms, key=Atom.sort_key)


def sorted_terms(terms: Iterable[Term]) -> list[Term]:
    return sorted(terms, key=Term.sort_key)


# ---------------------------------------------------------------------------
# Queries
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConjunctiveQuery:
    """``{targets | exists y. body}`` with variables only.

    ``targets`` may repeat a variable; every target must occur in the body.
    """

    targets: tuple[Term, ...]
    body: frozenset[Atom]

    def __post_init__(self):
        if not isinstance(self.targets, tuple):
            object.__setattr__(self, "targets", tuple(self.targets))
        if not isinstance(self.body, frozenset):
            object.__setattr__(self, "body", frozenset(self.body))
        if not self.body:
            raise QueryError("query body must be nonempty")
        body_terms = domain_of(self.body)
        for t in body_terms:
            if not t.is_variable:
                raise QueryError(f"queries may only mention variables, found {t!r}")
        for t in self.targets:
            if not t.is_variable:
                raise QueryError(f"target {t!r} is not a variable")
            if t not in body_terms:
                raise QueryError(f"target variable {t.name} does not occur in the body")

    @property
    def arity(self) -> int:
        return len(self.targets)

    @property
    def variables(self) -> set[Term]:
        return domain_of(self.body)

    @property
    def existentials(self) -> set[Term]:
        return self.variables - set(self.targets)

    @property
    def predicates(self) -> set[Predicate]:
        return {a.predicate for a in self.body}

    def layers(self) -> set[Layer]:
        return {a.predicate.layer for a in self.body}

    def __str__(self):
        from .syntax import format_cq

        return format_cq(self)

    __repr__ = __str__


CQ = ConjunctiveQuery


@dataclass(frozen=True)
class UnionQuery:
    """A finite union of CQs of equal arity; no disjuncts is the bottom query."""

    arity: int
    disjuncts: tuple[ConjunctiveQuery, ...] = ()

    def __post_init__(self):
        if not isinstance(self.disjuncts, tuple):
            object.__setattr__(self, "disjuncts", tuple(self.disjuncts))
        if self.arity < 0:
            raise QueryError("arity must be nonnegative")
        for d in self.disjuncts:
            if d.arity != self.arity:
                raise QueryError(f"disjunct of arity {d.arity} in a union of arity {self.arity}")

    @classmethod
    def bottom(cls, arity: int) -> "UnionQuery":
        return cls(arity, ())

    @classmethod
    def of(cls, *cqs: ConjunctiveQuery) -> "UnionQuery":
        if not cqs:
            raise QueryError("use UnionQuery.bottom for the empty union")
        return cls(cqs[0].arity, tuple(cqs))

    @property
    def is_bottom(self) -> bool:
        return not self.disjuncts

    def __iter__(self) -> Iterator[ConjunctiveQuery]:
        return iter(self.disjuncts)

    def __len__(self):
        return len(self.disjuncts)

    def __str__(self):
        from .syntax import serialize_ucq

        return serialize_ucq(self, canonical=False)


def top_query(arity: int) -> UnionQuery:
    """``{(x1..xn) | Top(x1) & ... & Top(xn)}``; for arity 0 a single ``Top(y)``."""
    if arity == 0:
        return UnionQuery(0, (ConjunctiveQuery((), frozenset({TOP(variable("y"))})),))
    xs = tuple(variable(f"x{i}") for i in range(1, arity + 1))
    return UnionQuery(arity, (ConjunctiveQuery(xs, frozenset(TOP(x) for x in xs)),))


# ---------------------------------------------------------------------------
# DL-Lite_R
# ---------------------------------------------------------------------------


@dataclass(frozen=True, order=True)
class BasicRole:
    role: Predicate
    inverted: bool = False

    def inverse(self) -> "BasicRole":
        return BasicRole(self.role, not self.inverted)

    def atom(self, subject: Term, obj: Term) -> Atom:
        """``R(subject, obj)``, unfolded to ``P(obj, subject)`` for ``R = P-``."""
        return self.role(obj, subject) if self.inverted else self.role(subject, obj)

    def __str__(self):
        return f"inv({self.role.name})" if self.inverted else self.role.name


@dataclass(frozen=True, order=True)
class AtomicConcept:
    concept: Predicate

    def __str__(self):
        return self.concept.name


@dataclass(frozen=True, order=True)
class ExistsRole:
    role: BasicRole

    def __str__(self):
        return f"some({self.role})"


BasicConcept = Union[AtomicConcept, ExistsRole]


@dataclass(frozen=True)
class ConceptInclusion:
    lhs: BasicConcept
    rhs: BasicConcept

    def __str__(self):
        return f"{self.lhs} isa {self.rhs}."


@dataclass(frozen=True)
class RoleInclusion:
    lhs: BasicRole
    rhs: BasicRole

    def __str__(self):
        return f"{self.lhs} isa {self.rhs}."


@dataclass(frozen=True)
class ConceptDisjointness:
    lhs: BasicConcept
    rhs: BasicConcept

    def __str__(self):
        return f"{self.lhs} disjoint {self.rhs}."


@dataclass(frozen=True)
class RoleDisjointness:
    lhs: BasicRole
    rhs: BasicRole

    def __str__(self):
        return f"{self.lhs} disjoint {self.rhs}."


OntologyAssertion = Union[ConceptInclusion, RoleInclusion, ConceptDisjointness, RoleDisjointness]


def concept_predicates(b: BasicConcept) -> set[Predicate]:
    return {b.concept} if isinstance(b, AtomicConcept) else {b.role.role}


def assertion_predicates(a: OntologyAssertion) -> set[Predicate]:
    if isinstance(a, (ConceptInclusion, ConceptDisjointness)):
        return concept_predicates(a.lhs) | concept_predicates(a.rhs)
    return {a.lhs.role, a.rhs.role}


@dataclass(frozen=True)
class Ontology:
    assertions: tuple[OntologyAssertion, ...] = ()
    concepts: frozenset[Predicate] = frozenset()
    roles: frozenset[Predicate] = frozenset()

    @classmethod
    def build(cls, assertions: Iterable[OntologyAssertion] = (), extra: Iterable[Predicate] = ()) -> "Ontology":
        """Ontology whose signature is inferred from ``assertions`` plus ``extra``."""
        assertions = tuple(assertions)
        preds = set(extra)
        for a in assertions:
            preds |= assertion_predicates(a)
        preds -= set(RESERVED_CONCEPTS)
        return cls(
            assertions,
            frozenset(p for p in preds if p.arity == 1),
            frozenset(p for p in preds if p.arity == 2),
        )

    @property
    def signature(self) -> frozenset[Predicate]:
        return self.concepts | self.roles

    @property
    def inclusions(self) -> list[Union[ConceptInclusion, RoleInclusion]]:
        return [a for a in self.assertions if isinstance(a, (ConceptInclusion, RoleInclusion))]

    @property
    def disjointness(self) -> list[Union[ConceptDisjointness, RoleDisjointness]]:
        return [a for a in self.assertions if isinstance(a, (ConceptDisjointness, RoleDisjointness))]

    def __len__(self):
        return len(self.assertions)


# ---------------------------------------------------------------------------
# Mappings, databases, systems
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MappingAssertion:
    id: str
    source: ConjunctiveQuery
    target: ConjunctiveQuery

    @property
    def is_gav(self) -> bool:
        return len(self.target.body) == 1 and not self.target.existentials

    @property
    def is_lav(self) -> bool:
        return len(self.source.body) == 1 and not self.source.existentials

    def __str__(self):
        from .syntax import format_mapping_assertion

        return format_mapping_assertion(self)


Mapping = tuple  # tuple[MappingAssertion, ...]


@dataclass(frozen=True)
class SourceDatabase:
    schema: frozenset[Predicate]
    facts: frozenset[Atom]

    @classmethod
    def of(cls, facts: Iterable[Atom], schema: Iterable[Predicate] = ()) -> "SourceDatabase":
        facts = frozenset(facts)
        return cls(frozenset(schema) | {f.predicate for f in facts}, facts)

    @property
    def domain(self) -> set[Term]:
        return domain_of(self.facts)


@dataclass(frozen=True)
class Dataset:
    arity: int
    tuples: frozenset[tuple[Term, ...]]

    @classmethod
    def of(cls, arity: int, rows: Iterable[Sequence[Union[str, Term]]]) -> "Dataset":
        return cls(
            arity,
            frozenset(tuple(t if isinstance(t, Term) else constant(t) for t in row) for row in rows),
        )

    def __iter__(self):
        return iter(sorted(self.tuples, key=lambda r: tuple(t.sort_key() for t in r)))

    def __len__(self):
        return len(self.tuples)


@dataclass(frozen=True)
class ObdmSpec:
    ontology: Ontology
    schema: frozenset[Predicate]
    mapping: tuple[MappingAssertion, ...]


@dataclass(frozen=True)
class ObdmSystem:
    spec: ObdmSpec
    database: SourceDatabase

    @property
    def ontology(self) -> Ontology:
        return self.spec.ontology

    @property
    def mapping(self) -> tuple[MappingAssertion, ...]:
        return self.spec.mapping


def make_system(
    ontology: Optional[Ontology],
    mapping: Iterable[MappingAssertion],
    facts: Iterable[Atom],
    schema: Iterable[Predicate] = (),
) -> ObdmSystem:
    """Assemble a system, inferring the source schema and ontology alphabet from the mapping."""
    mapping = tuple(mapping)
    db = SourceDatabase.of(facts, schema)
    src = set(db.schema)
    onto_preds = set()
    for m in mapping:
        src |= m.source.predicates
        onto_preds |= m.target.predicates
    ontology = ontology or Ontology()
    ontology = Ontology.build(ontology.assertions, set(ontology.signature) | onto_preds)
    return ObdmSystem(ObdmSpec(ontology, frozenset(src), mapping), SourceDatabase(frozenset(src), db.facts))


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    path: str
    message: str

    def __str__(self):
        return f"{self.path}: {self.message}"


def _check_layer(q: ConjunctiveQuery, layer: Layer, path: str, out: list[Violation]):
    for a in sorted_atoms(q.body):
        if a.predicate.layer is not layer:
            out.append(Violation(path, f"{a} is not a {layer.value} predicate"))


def validate_system(system: ObdmSystem, dataset: Optional[Dataset] = None) -> list[Violation]:
    """Collect every invariant violation; an empty list means valid."""
    out: list[Violation] = []
    onto = system.spec.ontology
    schema = system.spec.schema
    signature = onto.signature | set(RESERVED_CONCEPTS)

    for p in sorted(onto.concepts):
        if p.arity != 1 or p.layer is not Layer.ONTOLOGY:
            out.append(Violation(f"ontology.signature.{p.name}", "concepts must be unary ontology predicates"))
    for p in sorted(onto.roles):
        if p.arity != 2 or p.layer is not Layer.ONTOLOGY:
            out.append(Violation(f"ontology.signature.{p.name}", "roles must be binary ontology predicates"))

    for i, a in enumerate(onto.assertions):
        path = f"ontology.assertions[{i}]"
        for p in sorted(assertion_predicates(a)):
            if p not in signature:
                out.append(Violation(path, f"{p.name} is not in the ontology signature"))
        if isinstance(a, (ConceptInclusion, ConceptDisjointness)):
            for side in (a.lhs, a.rhs):
                if isinstance(side, ExistsRole) and side.role.role.arity != 2:
                    out.append(Violation(path, f"{side} needs a binary role"))
                if isinstance(side, AtomicConcept) and side.concept.arity != 1:
                    out.append(Violation(path, f"{side} needs a unary concept"))
            if isinstance(a, ConceptDisjointness) and a.lhs == AtomicConcept(BOTTOM):
                out.append(Violation(path, "Bottom cannot be the left-hand side of a disjointness"))
        else:
            for side in (a.lhs, a.rhs):
                if side.role.arity != 2:
                    out.append(Violation(path, f"{side} needs a binary role"))

    ids = set()
    for i, m in enumerate(system.spec.mapping):
        path = f"mapping[{m.id}]"
        if m.id in ids:
            out.append(Violation(path, "duplicate mapping assertion id"))
        ids.add(m.id)
        if m.source.targets != m.target.targets:
            out.append(Violation(path, "source and target queries have different target lists"))
        _check_layer(m.source, Layer.SOURCE, path + ".source", out)
        _check_layer(m.target, Layer.ONTOLOGY, path + ".target", out)
        for p in sorted(m.source.predicates):
            if p.layer is Layer.SOURCE and p not in schema:
                out.append(Violation(path + ".source", f"{p.name}/{p.arity} is not in the source schema"))
        for p in sorted(m.target.predicates):
            if p.layer is Layer.ONTOLOGY and p not in signature:
                out.append(Violation(path + ".target", f"{p.name}/{p.arity} is not in the ontology signature"))

    db = system.database
    for f in sorted_atoms(db.facts):
        path = f"database.{f}"
        if f.predicate not in schema or f.predicate not in db.schema:
            out.append(Violation(path, f"{f.predicate.name}/{f.predicate.arity} is not in the source schema"))
        if f.predicate.layer is not Layer.SOURCE:
            out.append(Violation(path, "facts must use source predicates"))
        for t in f.args:
            if not t.is_constant:
                out.append(Violation(path, f"{t.name} is not a constant"))

    if dataset is not None:
        out.extend(validate_dataset(dataset, db))
    return out


def validate_dataset(dataset: Dataset, database: SourceDatabase) -> list[Violation]:
    out = []
    if dataset.arity < 1:
        out.append(Violation("dataset", "arity must be at least 1"))
    dom = database.domain
    for row in dataset:
        path = "dataset.(" + ",".join(t.name for t in row) + ")"
        if len(row) != dataset.arity:
            out.append(Violation(path, f"expected {dataset.arity} components"))
        for t in row:
            if not t.is_constant:
                out.append(Violation(path, f"{t.name} is not a constant"))
            elif t not in dom:
                out.append(Violation(path, f"{t.name} does not occur in the database"))
    return out
