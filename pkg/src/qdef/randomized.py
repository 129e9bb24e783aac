"""Seeded generators of small random OBDM instances for property tests.

Bounds: at most 6 constants, 4 mapping assertions, 3 ontology assertions,
and queries of at most 3 disjuncts with at most 4 atoms each.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Optional

from .chase import mapping_chase
from .model import (
    AtomicConcept,
    BasicRole,
    ConceptDisjointness,
    ConceptInclusion,
    ConjunctiveQuery,
    Dataset,
    ExistsRole,
    MappingAssertion,
    ObdmSystem,
    Ontology,
    RoleDisjointness,
    RoleInclusion,
    UnionQuery,
    concept,
    constant,
    domain_of,
    make_system,
    role,
    sorted_terms,
    source,
    variable,
)

MAX_CONSTANTS = 6
MAX_MAPPING = 4
MAX_ONTOLOGY = 3
MAX_ATOMS = 4
MAX_DISJUNCTS = 3

CONCEPTS = tuple(concept(n) for n in ("A", "B", "C"))
ROLES = tuple(role(n) for n in ("P", "R"))
SOURCES = (source("s1", 1), source("s2", 2), source("s3", 2), source("s4", 1))


@dataclass(frozen=True)
class Instance:
    system: ObdmSystem
    dataset: Dataset
    seed: int


def _basic_concept(rng: random.Random):
    if rng.random() < 0.5:
        return AtomicConcept(rng.choice(CONCEPTS))
    return ExistsRole(BasicRole(rng.choice(ROLES), rng.random() < 0.5))


def random_ontology(rng: random.Random, allow_disjointness: bool = True) -> Ontology:
    out = []
    for _ in range(rng.randint(0, MAX_ONTOLOGY)):
        roll = rng.random()
        if roll < 0.65:
            out.append(ConceptInclusion(_basic_concept(rng), _basic_concept(rng)))
        elif roll < 0.9 or not allow_disjointness:
            out.append(RoleInclusion(BasicRole(rng.choice(ROLES)), BasicRole(rng.choice(ROLES), rng.random() < 0.4)))
        elif rng.random() < 0.5:
            out.append(ConceptDisjointness(_basic_concept(rng), _basic_concept(rng)))
        else:
            out.append(RoleDisjointness(BasicRole(rng.choice(ROLES)), BasicRole(rng.choice(ROLES), True)))
    return Ontology.build(out, CONCEPTS + ROLES)


def _random_body(rng: random.Random, preds, anchors: list, n_atoms: int, fresh_prefix: str, fresh_ok: bool = True) -> set:
    """Atoms over ``preds`` touching every anchor variable, connected where possible."""
    pool = list(anchors)
    body = set()
    counter = itertools.count()
    pending = list(anchors)
    for i in range(n_atoms):
        p = rng.choice(preds)
        args = []
        for _ in range(p.arity):
            if pending:
                args.append(pending.pop(0))
            elif fresh_ok and (not pool or rng.random() < 0.35):
                v = variable(f"{fresh_prefix}{next(counter)}")
                pool.append(v)
                args.append(v)
            else:
                args.append(rng.choice(pool))
        body.add(p(*args))
    while pending:
        v = pending.pop(0)
        p = rng.choice([q for q in preds if q.arity == 1] or preds)
        body.add(p(*([v] * p.arity)))
    return body


def random_mapping(rng: random.Random) -> tuple[MappingAssertion, ...]:
    out = []
    onto = CONCEPTS + ROLES
    for i in range(rng.randint(1, MAX_MAPPING)):
        n = rng.choice((1, 1, 2))
        xs = [variable(f"x{j}") for j in range(n)]
        src = _random_body(rng, SOURCES, xs, rng.randint(1, 2), "y")
        tgt = _random_body(rng, onto, xs, rng.randint(1, 2), "z", fresh_ok=rng.random() < 0.5)
        out.append(MappingAssertion(f"m{i + 1}", ConjunctiveQuery(tuple(xs), src), ConjunctiveQuery(tuple(xs), tgt)))
    return tuple(out)


def random_facts(rng: random.Random) -> list:
    cs = [constant(f"c{i}") for i in range(1, rng.randint(2, MAX_CONSTANTS) + 1)]
    facts = set()
    for _ in range(rng.randint(2, 8)):
        p = rng.choice(SOURCES)
        facts.add(p(*(rng.choice(cs) for _ in range(p.arity))))
    return sorted(facts)


def random_dataset(rng: random.Random, system: ObdmSystem, arity: Optional[int] = None) -> Dataset:
    """A dataset over constants of M(D), so that every tuple yields a well-formed CQ."""
    arity = arity or rng.choice((1, 1, 1, 2))
    present = sorted_terms(t for t in domain_of(mapping_chase(system.mapping, system.database).atoms) if t.is_constant)
    if not present:
        return Dataset(arity, frozenset())
    rows = list(itertools.product(present, repeat=arity))
    k = rng.randint(0, min(len(rows), 4))
    return Dataset(arity, frozenset(rng.sample(rows, k)))


def random_instance(seed: int, allow_disjointness: bool = True) -> Instance:
    rng = random.Random(seed)
    ontology = random_ontology(rng, allow_disjointness)
    mapping = random_mapping(rng)
    system = make_system(ontology, mapping, random_facts(rng), schema=SOURCES)
    return Instance(system, random_dataset(rng, system), seed)


def random_cq(rng: random.Random, arity: int, ontology: Ontology) -> ConjunctiveQuery:
    preds = sorted(ontology.signature)
    xs = [variable(f"x{j}") for j in range(arity)]
    if rng.random() < 0.3 and arity >= 2:
        xs[1] = xs[0]  # repeated answer variable
    anchors = list(dict.fromkeys(xs))
    while True:
        body = _random_body(rng, preds, anchors, rng.randint(1, MAX_ATOMS), "y")
        if len(body) <= MAX_ATOMS:
            break
    return ConjunctiveQuery(tuple(xs), frozenset(body))


def random_ucq(rng: random.Random, arity: int, ontology: Ontology) -> UnionQuery:
    n = rng.randint(1, MAX_DISJUNCTS)
    return UnionQuery(arity, tuple(random_cq(rng, arity, ontology) for _ in range(n)))
