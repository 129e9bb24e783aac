"""The mapping chase M(D) and depth-bounded prefixes of the canonical structure."""

from __future__ import annotations

import os
from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Union

from .homomorphism import evaluate_cq
from .model import (
    BOTTOM,
    NULL_PREFIX,
    TOP,
    Atom,
    AtomicConcept,
    BasicRole,
    ConceptInclusion,
    ExistsRole,
    MappingAssertion,
    Ontology,
    SourceDatabase,
    Term,
    UnionQuery,
    domain_of,
    null,
    sorted_terms,
)

DEFAULT_CHASE_CAP = 10**7
CHASE_CAP_ENV = "QDEF_CHASE_CAP"


class ChaseLimitError(RuntimeError):
    """The chase grew past the configured atom cap."""


def chase_cap(explicit: Optional[int] = None) -> int:
    if explicit is not None:
        return explicit
    raw = os.environ.get(CHASE_CAP_ENV)
    if raw:
        try:
            return int(raw)
        except ValueError:
            raise ValueError(f"{CHASE_CAP_ENV} must be an integer, got {raw!r}") from None
    return DEFAULT_CHASE_CAP


@dataclass(frozen=True)
class ChaseResult:
    atoms: frozenset
    # null -> (assertion id, target tuple, existential variable name)
    provenance: dict = field(default_factory=dict, compare=False, hash=False)

    @property
    def nulls(self) -> set[Term]:
        return {t for t in domain_of(self.atoms) if t.is_null}


def null_name(assertion_id: str, tup: Sequence[Term], var: Term) -> str:
    return f"{NULL_PREFIX}{assertion_id}!{','.join(t.name for t in tup)}!{var.name}"


def mapping_chase(mapping: Iterable[MappingAssertion], database: SourceDatabase, cap: Optional[int] = None) -> ChaseResult:
    """Fire every assertion once per answer tuple of its source query over ``database``."""
    limit = chase_cap(cap)
    atoms: set[Atom] = set()
    provenance = {}
    facts = database.facts
    for m in mapping:
        rows = sorted(evaluate_cq(m.source, facts), key=lambda r: tuple(t.sort_key() for t in r))
        existentials = sorted_terms(m.target.existentials)
        for row in rows:
            sub = dict(zip(m.target.targets, row))
            for z in existentials:
                n = null(null_name(m.id, row, z))
                sub[z] = n
                provenance[n] = (m.id, row, z.name)
            atoms.update(a.substitute(sub) for a in m.target.body)
            if len(atoms) > limit:
                raise ChaseLimitError(f"mapping chase exceeded {limit} atoms")
    return ChaseResult(frozenset(atoms), provenance)


def _child_name(parent: Term, r: BasicRole) -> str:
    stem = parent.name if parent.name.startswith(NULL_PREFIX + "@") else f"{NULL_PREFIX}@{parent.name}"
    return f"{stem}>{r}"


class _Structure:
    """Mutable atom store with the lookups the DL-Lite chase needs."""

    def __init__(self, ontology: Ontology, cap: int):
        self.atoms: set[Atom] = set()
        self.concepts: dict[Term, set] = defaultdict(set)
        self.succ: dict[tuple, set] = defaultdict(set)  # (role, inverted, term) -> terms
        self.depth: dict[Term, int] = {}
        # (role, inverted, term): successors owed past the depth bound
        self.virtual: set[tuple] = set()
        self.cap = cap
        self.queue: deque = deque()
        self.by_concept = defaultdict(list)
        self.by_role = defaultdict(list)
        self.role_incl = defaultdict(list)
        self.top_lhs = []
        for a in ontology.inclusions:
            if isinstance(a, ConceptInclusion):
                if a.rhs in (AtomicConcept(TOP), AtomicConcept(BOTTOM)) or a.lhs == AtomicConcept(BOTTOM):
                    continue
                if a.lhs == AtomicConcept(TOP):
                    self.top_lhs.append(a)
                elif isinstance(a.lhs, AtomicConcept):
                    self.by_concept[a.lhs.concept].append(a)
                else:
                    self.by_role[(a.lhs.role.role, a.lhs.role.inverted)].append(a)
            else:
                self.role_incl[a.lhs.role].append(a)

    def add_term(self, t: Term, depth: int):
        if t in self.depth:
            return
        self.depth[t] = depth
        for a in self.top_lhs:
            self._apply(a.rhs, t)

    def add(self, atom: Atom):
        if atom in self.atoms:
            return
        self.atoms.add(atom)
        if len(self.atoms) > self.cap:
            raise ChaseLimitError(f"canonical chase exceeded {self.cap} atoms")
        self.queue.append(atom)
        if atom.predicate.arity == 1:
            self.concepts[atom.args[0]].add(atom.predicate)
        else:
            s, o = atom.args
            self.succ[(atom.predicate, False, s)].add(o)
            self.succ[(atom.predicate, True, o)].add(s)

    def _apply(self, rhs, t: Term):
        if isinstance(rhs, AtomicConcept):
            self.add(rhs.concept(t))

    def has_successor(self, r: BasicRole, t: Term) -> bool:
        key = (r.role, r.inverted, t)
        return bool(self.succ.get(key)) or key in self.virtual

    def add_virtual(self, r: BasicRole, t: Term):
        """Record that ``t`` has an ``r``-successor without creating it, with its consequences on ``t``."""
        pending = [r]
        while pending:
            r = pending.pop()
            if self.has_successor(r, t):
                continue
            self.virtual.add((r.role, r.inverted, t))
            for a in self.by_role.get((r.role, r.inverted), ()):
                self._apply(a.rhs, t)
            for a in self.role_incl.get(r.role, ()):
                flip = a.lhs.inverted != r.inverted
                pending.append(BasicRole(a.rhs.role, a.rhs.inverted != flip))

    def holds(self, lhs, t: Term) -> bool:
        if lhs == AtomicConcept(TOP):
            return True
        if isinstance(lhs, AtomicConcept):
            return lhs.concept in self.concepts.get(t, ())
        return self.has_successor(lhs.role, t)

    def saturate(self):
        """Apply every non-generating inclusion to fixpoint."""
        while self.queue:
            atom = self.queue.popleft()
            if atom.predicate.arity == 1:
                t = atom.args[0]
                for a in self.by_concept.get(atom.predicate, ()):
                    self._apply(a.rhs, t)
                continue
            s, o = atom.args
            for a in self.by_role.get((atom.predicate, False), ()):
                self._apply(a.rhs, s)
            for a in self.by_role.get((atom.predicate, True), ()):
                self._apply(a.rhs, o)
            for a in self.role_incl.get(atom.predicate, ()):
                # lhs R(u,v) with R = P or P-
                u, v = (o, s) if a.lhs.inverted else (s, o)
                self.add(a.rhs.atom(u, v))


def bounded_canonical_chase(
    ontology: Ontology,
    base: Union[ChaseResult, Iterable[Atom]],
    depth: int,
    domain: Iterable[Term] = (),
    materialize_top: bool = False,
    cap: Optional[int] = None,
) -> frozenset:
    """Prefix of the canonical structure whose labeled nulls have generation depth at most ``depth``.

    Base terms (and the extra ``domain`` terms, which only matter for inclusions
    with ``Top`` on the left) have depth 0. A term at depth ``k`` that needs an
    ``R``-successor and has none receives a fresh null of depth ``k + 1``, named
    after its parent and ``R``, provided ``k < depth``. Past the bound the
    successor is only recorded, so each kept term still carries every atom the
    full structure has on it. Inclusions are applied in file order and terms in
    canonical order.
    """
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    atoms = base.atoms if isinstance(base, ChaseResult) else frozenset(base)
    st = _Structure(ontology, chase_cap(cap))
    for t in sorted_terms(domain_of(atoms) | set(domain)):
        st.add_term(t, 0)
    for a in sorted(atoms, key=Atom.sort_key):
        st.add(a)
    st.saturate()

    generating = [
        a for a in ontology.inclusions if isinstance(a, ConceptInclusion) and isinstance(a.rhs, ExistsRole)
    ]
    while True:
        created = False
        for a in generating:
            r = a.rhs.role
            for t in sorted_terms(st.depth):
                d = st.depth[t]
                if not st.holds(a.lhs, t) or st.has_successor(r, t):
                    continue
                created = True
                if d >= depth:
                    st.add_virtual(r, t)
                    st.saturate()
                    continue
                n = null(_child_name(t, r))
                st.add_term(n, d + 1)
                st.add(r.atom(t, n))
                st.saturate()
        if not created:
            break

    out = set(st.atoms)
    if materialize_top:
        out.update(TOP(t) for t in st.depth)
    return frozenset(out)


def default_oracle_depth(q: UnionQuery, ontology: Ontology) -> int:
    """Largest disjunct size plus twice the number of atomic roles."""
    largest = max((len(d.body) for d in q.disjuncts), default=0)
    return largest + 2 * len(ontology.roles)
