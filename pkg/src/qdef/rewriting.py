"""Query rewriting: violation queries, PerfectRef, MapRef and certain answers.

``rew(spec, q)`` compiles an ontology query into a source query in two
stages. PerfectRef folds the ontology's positive inclusions into the UCQ;
MapRef then splits the GLAV mapping into a GAV part and a LAV part over
auxiliary predicates, rewrites through the LAV part with single-piece
unifiers and unfolds the GAV part.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Optional, Sequence, Union

from .canonical import canonical_cq, canonicalize
from .chase import bounded_canonical_chase, mapping_chase
from .homomorphism import evaluate_cq, evaluate_ucq, find_homomorphism
from .model import (
    BOTTOM,
    TOP,
    Atom,
    AtomicConcept,
    ConceptDisjointness,
    ConceptInclusion,
    ConjunctiveQuery,
    Layer,
    MappingAssertion,
    ObdmSpec,
    ObdmSystem,
    Ontology,
    Predicate,
    RoleDisjointness,
    RoleInclusion,
    Term,
    UnionQuery,
    domain_of,
    sorted_atoms,
    sorted_terms,
    variable,
)

DEFAULT_TUPLE_CAP = 10**6


class TupleLimitError(RuntimeError):
    """Materializing all tuples over dom(D) would exceed the tuple cap."""


class _UnionFind:
    def __init__(self):
        self.parent: dict = {}

    def find(self, t):
        p = self.parent.setdefault(t, t)
        if p != t:
            p = self.parent[t] = self.find(p)
        return p

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[ra] = rb

    def copy(self) -> "_UnionFind":
        uf = _UnionFind()
        uf.parent = dict(self.parent)
        return uf

    def classes(self) -> dict:
        out: dict = {}
        for t in list(self.parent):
            out.setdefault(self.find(t), set()).add(t)
        return out


def _fresh(prefix: str, taken: set) -> Term:
    i = 0
    while True:
        v = variable(f"{prefix}~{i}")
        if v not in taken:
            taken.add(v)
            return v
        i += 1


def components(q: ConjunctiveQuery) -> list[ConjunctiveQuery]:
    """Split ``q`` into variable-disjoint CQs; each keeps the targets it mentions, in order."""
    uf = _UnionFind()
    for a in q.body:
        for t in a.args[1:]:
            uf.union(a.args[0], t)
    groups: dict = {}
    for a in sorted_atoms(q.body):
        key = uf.find(a.args[0]) if a.args else None
        groups.setdefault(key, []).append(a)
    out = []
    for atoms in groups.values():
        terms = domain_of(atoms)
        targets = tuple(dict.fromkeys(t for t in q.targets if t in terms))
        out.append(ConjunctiveQuery(targets, frozenset(atoms)))
    return out


def minimize_cq(q: ConjunctiveQuery) -> ConjunctiveQuery:
    """A core of ``q``: an equivalent subquery with no redundant atom (no ontology involved)."""
    atoms = frozenset(q.body)
    targets = q.targets
    changed = True
    while changed:
        changed = False
        for a in sorted_atoms(atoms):
            rest = atoms - {a}
            if not rest or not set(targets) <= domain_of(rest):
                continue
            h = find_homomorphism(atoms, targets, rest, targets)
            if h is not None:
                atoms = frozenset(b.substitute(h) for b in atoms)
                changed = True
                break
    return ConjunctiveQuery(targets, atoms)


def _normalize_top(q: ConjunctiveQuery) -> ConjunctiveQuery:
    """Drop ``Top(v)`` when ``v`` occurs in some other atom."""
    tops = [a for a in q.body if a.predicate == TOP]
    if not tops:
        return q
    others = domain_of(a for a in q.body if a.predicate != TOP)
    kept = frozenset(a for a in q.body if a.predicate != TOP or a.args[0] not in others)
    return ConjunctiveQuery(q.targets, kept)


# ---------------------------------------------------------------------------
# Violation query
# ---------------------------------------------------------------------------


def _concept_atoms(b, y: Term, taken: set) -> list[Atom]:
    if isinstance(b, AtomicConcept):
        return [b.concept(y)]
    return [b.role.atom(y, _fresh("y", taken))]


def violation_query(ontology: Ontology) -> UnionQuery:
    """Boolean UCQ with one disjunct per disjointness assertion (and per ``B isa Bottom``)."""
    y = variable("y")
    y1, y2 = variable("y1"), variable("y2")
    out = []
    for a in ontology.assertions:
        if isinstance(a, ConceptDisjointness):
            taken = {y}
            body = _concept_atoms(a.lhs, y, taken) + _concept_atoms(a.rhs, y, taken)
        elif isinstance(a, RoleDisjointness):
            body = [a.lhs.atom(y1, y2), a.rhs.atom(y1, y2)]
        elif isinstance(a, ConceptInclusion) and a.rhs == AtomicConcept(BOTTOM):
            body = _concept_atoms(a.lhs, y, {y})
        else:
            continue
        out.append(_normalize_top(ConjunctiveQuery((), frozenset(body))))
    return UnionQuery(0, tuple(out))


# ---------------------------------------------------------------------------
# PerfectRef
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Rules:
    # rhs concept name -> lhs basic concepts (Top included)
    into_concept: dict
    # (role, inverted) -> lhs basic concepts, for rhs some(R)
    into_exists: dict
    # role -> list of (lhs BasicRole, rhs inverted)
    into_role: dict


@lru_cache(maxsize=256)
def _compile(ontology: Ontology) -> _Rules:
    into_concept: dict = {}
    into_exists: dict = {}
    into_role: dict = {}
    for a in ontology.inclusions:
        if isinstance(a, ConceptInclusion):
            if a.lhs == AtomicConcept(BOTTOM) or a.rhs in (AtomicConcept(TOP), AtomicConcept(BOTTOM)):
                continue
            if isinstance(a.rhs, AtomicConcept):
                into_concept.setdefault(a.rhs.concept, []).append(a.lhs)
            else:
                into_exists.setdefault((a.rhs.role.role, a.rhs.role.inverted), []).append(a.lhs)
        elif isinstance(a, RoleInclusion):
            into_role.setdefault(a.rhs.role, []).append((a.lhs, a.rhs.inverted))
    return _Rules(into_concept, into_exists, into_role)


def _occurrences(q: ConjunctiveQuery) -> dict:
    counts: dict = {}
    for a in q.body:
        for t in a.args:
            counts[t] = counts.get(t, 0) + 1
    return counts


def _unbound(q: ConjunctiveQuery, counts: dict) -> set:
    targets = set(q.targets)
    return {t for t, n in counts.items() if n == 1 and t not in targets}


def _replace(q: ConjunctiveQuery, old: Atom, new: Atom) -> ConjunctiveQuery:
    return ConjunctiveQuery(q.targets, (q.body - {old}) | {new})


def _lhs_atom(lhs, t: Term, taken: set) -> Atom:
    if isinstance(lhs, AtomicConcept):
        return lhs.concept(t)
    return lhs.role.atom(t, _fresh("f", taken))


def _atom_rewritings(q: ConjunctiveQuery, rules: _Rules) -> Iterator[ConjunctiveQuery]:
    counts = _occurrences(q)
    unbound = _unbound(q, counts)
    for g in sorted_atoms(q.body):
        p = g.predicate
        if p.arity == 1:
            for lhs in rules.into_concept.get(p, ()):
                yield _replace(q, g, _lhs_atom(lhs, g.args[0], set(q.variables)))
            continue
        s, o = g.args
        if o in unbound:
            for lhs in rules.into_exists.get((p, False), ()):
                yield _replace(q, g, _lhs_atom(lhs, s, set(q.variables)))
        if s in unbound:
            for lhs in rules.into_exists.get((p, True), ()):
                yield _replace(q, g, _lhs_atom(lhs, o, set(q.variables)))
        for lhs, rhs_inverted in rules.into_role.get(p, ()):
            # P(s,o) read as R2(s,o), or as R2(o,s) when R2 = P-
            u, v = (o, s) if rhs_inverted else (s, o)
            yield _replace(q, g, lhs.atom(u, v))


def _unify_atoms(a: Atom, b: Atom) -> dict:
    uf = _UnionFind()
    for s, t in zip(a.args, b.args):
        uf.union(s, t)
    sub = {}
    for members in uf.classes().values():
        rep = min(members, key=Term.sort_key)
        for m in members:
            if m != rep:
                sub[m] = rep
    return sub


def _reductions(q: ConjunctiveQuery, rules: _Rules) -> Iterator[ConjunctiveQuery]:
    """Unify pairs of role atoms, keeping a result only if it opens an existential rule."""
    old_unbound = _unbound(q, _occurrences(q))
    atoms = sorted_atoms(a for a in q.body if a.predicate.arity == 2)
    for a, b in itertools.combinations(atoms, 2):
        if a.predicate != b.predicate:
            continue
        sub = _unify_atoms(a, b)
        new = ConjunctiveQuery(
            tuple(sub.get(t, t) for t in q.targets), frozenset(x.substitute(sub) for x in q.body)
        )
        new_unbound = _unbound(new, _occurrences(new))
        merged_into: dict = {}
        for old, rep in sub.items():
            merged_into.setdefault(rep, set()).add(old)
        useful = False
        for g in new.body:
            if g.predicate.arity != 2:
                continue
            for pos, t in enumerate(g.args):
                if t not in new_unbound:
                    continue
                if not rules.into_exists.get((g.predicate, pos == 0)):
                    continue
                sources = merged_into.get(t, set()) | {t}
                if len(sources) > 1 or t not in old_unbound:
                    useful = True
        if useful:
            yield new


def perfect_ref(ontology: Ontology, q: Union[UnionQuery, ConjunctiveQuery]) -> UnionQuery:
    """UCQ whose plain evaluation yields the certain answers of ``q`` under the ontology's inclusions."""
    if isinstance(q, ConjunctiveQuery):
        q = UnionQuery(q.arity, (q,))
    return _perfect_ref(ontology, canonicalize(q))


@lru_cache(maxsize=1024)
def _perfect_ref(ontology: Ontology, q: UnionQuery) -> UnionQuery:
    rules = _compile(ontology)
    seen: dict = {}
    queue: deque = deque()
    for d in q.disjuncts:
        d = canonical_cq(_normalize_top(d))
        if d not in seen:
            seen[d] = None
            queue.append(d)
    if not (rules.into_concept or rules.into_exists or rules.into_role):
        return canonicalize(UnionQuery(q.arity, tuple(seen)))
    while queue:
        cur = queue.popleft()
        for new in itertools.chain(_atom_rewritings(cur, rules), _reductions(cur, rules)):
            new = canonical_cq(_normalize_top(new))
            if new not in seen:
                seen[new] = None
                queue.append(new)
    return canonicalize(UnionQuery(q.arity, tuple(seen)))


# ---------------------------------------------------------------------------
# MapRef
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SplitMapping:
    gav: tuple[MappingAssertion, ...]
    lav: tuple[MappingAssertion, ...]
    intermediate: frozenset[Predicate]


def aux_predicate(m: MappingAssertion) -> Predicate:
    return Predicate(f"aux_{m.id}", len(m.source.targets), Layer.INTERMEDIATE)


def split_glav(mapping: Sequence[MappingAssertion]) -> SplitMapping:
    """``qS(x) -> qO(x)`` becomes ``qS(x) -> aux_m(x)`` plus ``aux_m(x) -> qO(x)``."""
    gav, lav, aux = [], [], set()
    for m in mapping:
        p = aux_predicate(m)
        aux.add(p)
        xs = m.source.targets
        middle = ConjunctiveQuery(xs, frozenset({p(*xs)}))
        gav.append(MappingAssertion(m.id, m.source, middle))
        lav.append(MappingAssertion(m.id, middle, ConjunctiveQuery(m.target.targets, m.target.body)))
    return SplitMapping(tuple(gav), tuple(lav), frozenset(aux))


@dataclass(frozen=True)
class _LavRule:
    head: Atom  # aux_m(x)
    body: tuple[Atom, ...]
    frontier: frozenset
    existentials: frozenset


def _lav_rules(lav: Sequence[MappingAssertion]) -> dict:
    by_pred: dict = {}
    for i, m in enumerate(lav):
        # rename apart from query variables, which never contain '#'
        ren = {v: variable(f"r#{i}#{v.name}") for v in m.source.variables | m.target.variables}
        (head,) = m.source.body
        head = head.substitute(ren)
        body = tuple(a.substitute(ren) for a in sorted_atoms(m.target.body))
        frontier = frozenset(ren[t] for t in m.target.targets)
        rule = _LavRule(head, body, frontier, frozenset(ren[v] for v in m.target.existentials))
        for b in body:
            by_pred.setdefault(b.predicate, []).append(rule)
    for p in by_pred:
        by_pred[p] = list(dict.fromkeys(by_pred[p]))
    return by_pred


def _is_ontology_atom(a: Atom) -> bool:
    return a.predicate.layer is Layer.ONTOLOGY and a.predicate != TOP


def _single_pieces(q: ConjunctiveQuery, a0: Atom, rule: _LavRule) -> Iterator[tuple[frozenset, _UnionFind]]:
    """Single-piece unifiers of ``rule`` with a subset of ``q`` containing ``a0``."""
    distinguished = set(q.targets)
    onto_atoms = sorted_atoms(a for a in q.body if _is_ontology_atom(a))

    def explore(covered: list, uf: _UnionFind):
        sticky = set()
        for members in uf.classes().values():
            ex = members & rule.existentials
            if not ex:
                continue
            if len(ex) > 1 or members & rule.frontier or members & distinguished:
                return
            sticky |= {m for m in members if not m.name.startswith("r#")}
        if any(a.predicate != TOP and not _is_ontology_atom(a) and sticky & set(a.args) for a in q.body):
            return  # already rewritten atoms cannot be re-covered
        for g in onto_atoms:
            if g not in covered and sticky & set(g.args):
                for b in rule.body:
                    if b.predicate == g.predicate:
                        uf2 = uf.copy()
                        for s, t in zip(g.args, b.args):
                            uf2.union(s, t)
                        yield from explore(covered + [g], uf2)
                return
        yield frozenset(covered), uf

    for b in rule.body:
        if b.predicate == a0.predicate:
            uf = _UnionFind()
            for s, t in zip(a0.args, b.args):
                uf.union(s, t)
            yield from explore([a0], uf)


def _apply_piece(q: ConjunctiveQuery, covered: frozenset, uf: _UnionFind, rule: _LavRule, step: int) -> ConjunctiveQuery:
    distinguished = set(q.targets)
    taken = set(q.variables)
    sub: dict = {}
    for members in sorted(uf.classes().values(), key=lambda m: sorted(t.sort_key() for t in m)):
        qvars = [m for m in members if not m.name.startswith("r#")]
        if qvars:
            dist = [m for m in qvars if m in distinguished]
            rep = min(dist or qvars, key=Term.sort_key)
        else:
            rep = _fresh(f"f#{step}", taken)
        for m in members:
            sub[m] = rep
    for v in sorted_terms(set(rule.head.args) - set(sub)):
        sub[v] = _fresh(f"f#{step}", taken)
    body = frozenset(a.substitute(sub) for a in q.body - covered) | {rule.head.substitute(sub)}
    return ConjunctiveQuery(tuple(sub.get(t, t) for t in q.targets), body)


def lav_rewrite(lav: Sequence[MappingAssertion], q: Union[UnionQuery, ConjunctiveQuery]) -> UnionQuery:
    """Rewrite ontology atoms into auxiliary atoms until none remain; partial rewritings are dropped."""
    if isinstance(q, ConjunctiveQuery):
        q = UnionQuery(q.arity, (q,))
    rules = _lav_rules(lav)
    done: list = []
    for d in q.disjuncts:
        seen = {d}
        queue = deque([d])
        while queue:
            cur = queue.popleft()
            pending = sorted_atoms(a for a in cur.body if _is_ontology_atom(a))
            if not pending:
                done.append(_normalize_top(cur))
                continue
            a0 = pending[0]
            step = len(cur.body) - len(pending)
            for rule in rules.get(a0.predicate, ()):
                for covered, uf in _single_pieces(cur, a0, rule):
                    new = _apply_piece(cur, covered, uf, rule, step)
                    if new not in seen:
                        seen.add(new)
                        queue.append(new)
    return canonicalize(UnionQuery(q.arity, tuple(done)))


def gav_unfold(
    gav: Sequence[MappingAssertion], q: Union[UnionQuery, ConjunctiveQuery], schema: Iterable[Predicate] = ()
) -> UnionQuery:
    """Replace each auxiliary atom by its source body; ``Top(v)`` becomes "v occurs somewhere in D"."""
    if isinstance(q, ConjunctiveQuery):
        q = UnionQuery(q.arity, (q,))
    by_aux = {next(iter(m.target.body)).predicate: m for m in gav}
    schema = sorted({p for p in schema} | {a.predicate for m in gav for a in m.source.body})
    positions = [(p, i) for p in schema if p.layer is Layer.SOURCE for i in range(p.arity)]
    out = []
    for d in q.disjuncts:
        uf = _UnionFind()
        taken = set(d.variables)
        parts: list[Atom] = []
        tops = []
        for a in sorted_atoms(d.body):
            if a.predicate == TOP:
                tops.append(a.args[0])
                continue
            m = by_aux.get(a.predicate)
            if m is None:
                raise ValueError(f"no GAV rule defines {a.predicate.name}")
            (head,) = m.target.body
            ren: dict = {}
            for x, t in zip(head.args, a.args):
                if x in ren:
                    uf.union(ren[x], t)
                else:
                    ren[x] = t
            for v in sorted_terms(m.source.existentials):
                ren[v] = _fresh(f"g#{v.name}", taken)
            parts.extend(b.substitute(ren) for b in m.source.body)
        classes = uf.classes()
        sub = {}
        for members in classes.values():
            rep = min(members, key=Term.sort_key)
            for mbr in members:
                sub[mbr] = rep
        targets = tuple(sub.get(t, t) for t in d.targets)
        base = [a.substitute(sub) for a in parts]
        top_vars = list(dict.fromkeys(sub.get(v, v) for v in tops))
        choices = []
        for v in top_vars:
            alts = []
            for p, i in positions:
                args = [_fresh("t", taken) for _ in range(p.arity)]
                args[i] = v
                alts.append(p(*args))
            choices.append(alts)
        for combo in itertools.product(*choices):
            out.append(ConjunctiveQuery(targets, frozenset(base) | set(combo)))
    return canonicalize(UnionQuery(q.arity, tuple(out)))


def map_ref(
    mapping: Sequence[MappingAssertion], q: Union[UnionQuery, ConjunctiveQuery], schema: Iterable[Predicate] = ()
) -> UnionQuery:
    split = split_glav(mapping)
    return gav_unfold(split.gav, lav_rewrite(split.lav, q), schema)


def rew(spec: ObdmSpec, q: Union[UnionQuery, ConjunctiveQuery]) -> UnionQuery:
    """Source-level UCQ computing the certain answers of ``q`` on consistent systems."""
    if isinstance(q, ConjunctiveQuery):
        q = UnionQuery(q.arity, (q,))
    return _rew(spec, canonicalize(q))


@lru_cache(maxsize=4096)
def _rew(spec: ObdmSpec, q: UnionQuery) -> UnionQuery:
    return canonicalize(map_ref(spec.mapping, perfect_ref(spec.ontology, q), spec.schema))


# ---------------------------------------------------------------------------
# Consistency and certain answers
# ---------------------------------------------------------------------------


def is_consistent(system: ObdmSystem) -> bool:
    v = violation_query(system.ontology)
    if v.is_bottom:
        return True
    return not evaluate_ucq(rew(system.spec, v), system.database.facts)


def all_tuples(system: ObdmSystem, arity: int, tuple_cap: int = DEFAULT_TUPLE_CAP) -> set:
    """dom(D)^arity, guarded by ``tuple_cap``."""
    dom = sorted_terms(system.database.domain)
    if len(dom) ** arity > tuple_cap:
        raise TupleLimitError(f"|dom(D)|^{arity} = {len(dom) ** arity} exceeds the tuple cap {tuple_cap}")
    return set(itertools.product(dom, repeat=arity))


@lru_cache(maxsize=8192)
def _component_rewriting(spec: ObdmSpec, q: ConjunctiveQuery) -> UnionQuery:
    return rew(spec, minimize_cq(q))


def _join(parts: list[tuple[tuple, set]], targets: tuple) -> set:
    rows = [{}]
    for key, answers in parts:
        rows = [{**r, **dict(zip(key, a))} for r in rows for a in answers]
        if not rows:
            return set()
    return {tuple(r[t] for t in targets) for r in rows}


def _rewriting_answers(system: ObdmSystem, q: UnionQuery) -> set:
    facts = system.database.facts
    out: set = set()
    for d in q.disjuncts:
        parts = []
        for comp in components(d):
            canon = canonical_cq(comp)
            answers = evaluate_ucq(_component_rewriting(system.spec, canon), facts)
            if not answers:
                parts = None
                break
            # canonical renaming maps comp's ordered targets onto canon's
            key = tuple(dict.fromkeys(comp.targets))
            parts.append((key, answers))
        if parts is not None:
            out |= _join(parts, d.targets)
    return out


def _bfs_eccentricity(q: ConjunctiveQuery, sources: Iterable[Term]) -> int:
    adj: dict = {}
    for a in q.body:
        for s in a.args:
            adj.setdefault(s, set()).update(a.args)
    dist = {s: 0 for s in sources}
    frontier = list(dist)
    while frontier:
        nxt = []
        for v in frontier:
            for w in adj.get(v, ()):
                if w not in dist:
                    dist[w] = dist[v] + 1
                    nxt.append(w)
        frontier = nxt
    return max(dist.values(), default=0)


def oracle_depth(q: ConjunctiveQuery, ontology: Ontology) -> int:
    """Chase depth sufficient for a connected CQ.

    Anchored queries map within their eccentricity from the answer constants;
    a boolean query may sit anywhere in the anonymous part, whose subtrees
    repeat after 2|roles| levels.
    """
    if q.targets:
        return _bfs_eccentricity(q, set(q.targets))
    diameter = max(_bfs_eccentricity(q, [v]) for v in q.variables)
    return 2 * len(ontology.roles) + diameter


def oracle_answers(system: ObdmSystem, q: UnionQuery, depth: Optional[int] = None) -> set:
    """Certain answers by homomorphisms into a bounded prefix of the canonical structure."""
    base = mapping_chase(system.mapping, system.database)
    mentions_top = any(a.predicate == TOP for d in q.disjuncts for a in d.body)
    chases: dict = {}

    def chase(k: int):
        if k not in chases:
            chases[k] = bounded_canonical_chase(
                system.ontology, base, k, system.database.domain, materialize_top=mentions_top
            )
        return chases[k]

    if depth is not None:
        return evaluate_ucq(q, chase(depth), constants_only=True)
    out: set = set()
    for d in q.disjuncts:
        parts = []
        for comp in components(d):
            need = oracle_depth(comp, system.ontology)
            answers = set()
            if not comp.targets:
                answers = evaluate_cq(comp, chase(0), constants_only=True)
            if not answers:
                answers = evaluate_cq(comp, chase(need), constants_only=True)
            if not answers:
                parts = None
                break
            parts.append((tuple(dict.fromkeys(comp.targets)), answers))
        if parts is not None:
            out |= _join(parts, d.targets)
    return out


def chase_answers(system: ObdmSystem, q: UnionQuery) -> set:
    """PerfectRef evaluated over M(D), with ``Top`` holding for every term."""
    base = mapping_chase(system.mapping, system.database)
    data = set(base.atoms)
    data |= {TOP(t) for t in domain_of(base.atoms) | system.database.domain}
    return evaluate_ucq(perfect_ref(system.ontology, q), data, constants_only=True)


METHODS = ("rewriting", "rew", "chase", "oracle")


def certain_answers(
    system: ObdmSystem,
    q: Union[UnionQuery, ConjunctiveQuery],
    tuple_cap: int = DEFAULT_TUPLE_CAP,
    method: str = "rewriting",
    depth: Optional[int] = None,
) -> set:
    """cert(q) over ``system``: dom(D)^n when inconsistent, otherwise computed by ``method``.

    ``rewriting`` evaluates per-component rewritings of minimized disjuncts,
    ``rew`` evaluates ``rew(spec, q)`` literally, ``chase`` evaluates PerfectRef
    over M(D) and ``oracle`` searches a bounded canonical-structure prefix.
    """
    if isinstance(q, ConjunctiveQuery):
        q = UnionQuery(q.arity, (q,))
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    if not is_consistent(system):
        return all_tuples(system, q.arity, tuple_cap)
    if q.is_bottom:
        return set()
    if method == "rewriting":
        return _rewriting_answers(system, q)
    if method == "rew":
        return evaluate_ucq(rew(system.spec, q), system.database.facts)
    if method == "chase":
        return chase_answers(system, q)
    return oracle_answers(system, q, depth)
