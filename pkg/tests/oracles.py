"""Brute-force reference implementations used as test oracles.

Nothing here calls into the library's evaluation, chase or rewriting code;
only the value types are shared.
"""

from __future__ import annotations

import itertools

from qdef.model import (
    BOTTOM,
    TOP,
    AtomicConcept,
    ConceptDisjointness,
    ConceptInclusion,
    RoleDisjointness,
    RoleInclusion,
    domain_of,
    null,
)


def all_maps(variables, terms):
    """Every total map from ``variables`` to ``terms``."""
    variables = sorted(variables, key=lambda v: v.name)
    for image in itertools.product(sorted(terms, key=lambda t: (t.kind, t.name)), repeat=len(variables)):
        yield dict(zip(variables, image))


def brute_homomorphisms(source_atoms, target_atoms, fixed=None):
    """All variable maps sending every source atom into the target (constants fixed)."""
    fixed = dict(fixed or {})
    free = {t for t in domain_of(source_atoms) if t.is_variable and t not in fixed}
    target = set(target_atoms)
    out = []
    for h in all_maps(free, domain_of(target) | set(fixed.values())):
        h.update(fixed)
        if all(a.substitute(h) in target for a in source_atoms):
            out.append(h)
    return out


def _matches(atoms, by_pred, asg):
    if not atoms:
        yield asg
        return
    first, rest = atoms[0], atoms[1:]
    for fact in by_pred.get(first.predicate, ()):
        new = dict(asg)
        ok = True
        for s, t in zip(first.args, fact.args):
            if s.is_variable:
                if new.setdefault(s, t) != t:
                    ok = False
                    break
            elif s != t:
                ok = False
                break
        if ok:
            yield from _matches(rest, by_pred, new)


def naive_evaluate(q, data, constants_only=False):
    """Answers of a CQ or UCQ by nested-loop join."""
    disjuncts = q.disjuncts if hasattr(q, "disjuncts") else (q,)
    by_pred = {}
    for a in data:
        by_pred.setdefault(a.predicate, []).append(a)
    out = set()
    for d in disjuncts:
        for asg in _matches(list(d.body), by_pred, {}):
            row = tuple(asg[x] for x in d.targets)
            if not constants_only or all(t.is_constant for t in row):
                out.add(row)
    return out


def naive_mapping_chase(mapping, facts):
    atoms = set()
    counter = itertools.count()
    for m in mapping:
        for row in sorted(naive_evaluate(m.source, facts), key=lambda r: [t.name for t in r]):
            sub = dict(zip(m.target.targets, row))
            for z in sorted(m.target.existentials, key=lambda v: v.name):
                sub[z] = null(f"n!t{next(counter)}")
            atoms |= {a.substitute(sub) for a in m.target.body}
    return atoms


class NaiveChase:
    """Restricted chase by repeated full passes, nulls up to ``depth`` levels deep."""

    def __init__(self, ontology, atoms, domain, depth):
        self.atoms = set(atoms)
        self.bound = depth
        self.depth = {t: 0 for t in domain_of(self.atoms) | set(domain)}
        counter = itertools.count()
        changed = True
        while changed:
            changed = False
            for a in ontology.inclusions:
                if isinstance(a, RoleInclusion):
                    for f in [f for f in self.atoms if f.predicate == a.lhs.role]:
                        s, o = f.args
                        u, v = (o, s) if a.lhs.inverted else (s, o)
                        new = a.rhs.atom(u, v)
                        if new not in self.atoms:
                            self.atoms.add(new)
                            changed = True
                    continue
                if a.rhs == AtomicConcept(BOTTOM) or a.rhs == AtomicConcept(TOP) or a.lhs == AtomicConcept(BOTTOM):
                    continue
                for t in list(self.depth):
                    if not self.holds(a.lhs, t):
                        continue
                    if isinstance(a.rhs, AtomicConcept):
                        new = a.rhs.concept(t)
                        if new not in self.atoms:
                            self.atoms.add(new)
                            changed = True
                    elif not self.holds(a.rhs, t) and self.depth[t] < depth:
                        n = null(f"n!c{next(counter)}")
                        self.depth[n] = self.depth[t] + 1
                        self.atoms.add(a.rhs.role.atom(t, n))
                        changed = True

    def holds(self, b, t) -> bool:
        if b == AtomicConcept(TOP):
            return True
        if isinstance(b, AtomicConcept):
            return b.concept(t) in self.atoms
        r = b.role
        for f in self.atoms:
            if f.predicate == r.role and f.args[1 if r.inverted else 0] == t:
                return True
        return False

    def violated(self, ontology) -> bool:
        """Disjointness violations among terms whose neighbourhood is complete."""
        inner = [t for t, d in self.depth.items() if d < self.bound]
        for a in ontology.assertions:
            if isinstance(a, ConceptDisjointness):
                if any(self.holds(a.lhs, t) and self.holds(a.rhs, t) for t in inner):
                    return True
            elif isinstance(a, RoleDisjointness):
                pairs = {f.args for f in self.atoms if f.predicate == a.lhs.role}
                pairs = {(o, s) for s, o in pairs} if a.lhs.inverted else pairs
                other = {f.args for f in self.atoms if f.predicate == a.rhs.role}
                other = {(o, s) for s, o in other} if a.rhs.inverted else other
                if pairs & other:
                    return True
            elif isinstance(a, ConceptInclusion) and a.rhs == AtomicConcept(BOTTOM):
                if any(self.holds(a.lhs, t) for t in inner):
                    return True
        return False


def naive_depth(q, ontology) -> int:
    largest = max((len(d.body) for d in q.disjuncts), default=0)
    return largest + 2 * len(ontology.roles) + 1


def naive_certain_answers(system, q):
    """Certain answers from a naive chase of M(D), or dom(D)^n when inconsistent."""
    domain = system.database.domain
    base = naive_mapping_chase(system.mapping, system.database.facts)
    chase = NaiveChase(system.ontology, base, domain, naive_depth(q, system.ontology))
    if chase.violated(system.ontology):
        return set(itertools.product(sorted(domain, key=lambda t: t.name), repeat=q.arity))
    data = chase.atoms | {TOP(t) for t in chase.depth}
    return naive_evaluate(q, data, constants_only=True)


def colorable(vertices, edges, k: int) -> bool:
    vertices = sorted(vertices)
    for colours in itertools.product(range(k), repeat=len(vertices)):
        c = dict(zip(vertices, colours))
        if all(c[u] != c[v] for u, v in edges):
            return True
    return False


def max_clique(vertices, edges) -> int:
    adj = {frozenset(e) for e in edges}
    vertices = sorted(vertices)
    for size in range(len(vertices), 0, -1):
        for sub in itertools.combinations(vertices, size):
            if all(frozenset((u, v)) in adj for u, v in itertools.combinations(sub, 2)):
                return size
    return 0
