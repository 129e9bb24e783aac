import random

import pytest

from qdef.chase import (
    CHASE_CAP_ENV,
    ChaseLimitError,
    bounded_canonical_chase,
    chase_cap,
    default_oracle_depth,
    mapping_chase,
)
from qdef.homomorphism import evaluate_ucq
from qdef.model import (
    AtomicConcept,
    BasicRole,
    ConceptInclusion,
    ConjunctiveQuery,
    ExistsRole,
    Layer,
    MappingAssertion,
    Ontology,
    SourceDatabase,
    concept,
    constant,
    domain_of,
    null,
    role,
    source,
    variable,
)
from qdef.randomized import random_instance, random_ucq
from qdef.syntax import parse_ontology
from conftest import load_query
from oracles import naive_mapping_chase

A, B = concept("A"), concept("B")
P = role("P")
x, z = variable("x"), variable("z")
c = constant("c")


def names(atoms):
    return sorted(str(a) for a in atoms)


def test_gav_mapping_chase(ex5):
    assert names(mapping_chase(ex5.mapping, ex5.database).atoms) == [
        "EnrolledIn(c2,b)",
        "EnrolledIn(c3,b)",
        "Student(c1)",
    ]


def test_empty_database(ex3):
    assert mapping_chase(ex3.mapping, SourceDatabase.of(())).atoms == frozenset()


def test_glav_null_naming():
    s = source("s", 1)
    m = MappingAssertion("m1", ConjunctiveQuery((x,), {s(x)}), ConjunctiveQuery((x,), {P(x, z)}))
    result = mapping_chase([m], SourceDatabase.of({s(c)}))
    assert result.atoms == {P(c, null("n!m1!c!z"))}
    assert result.provenance[null("n!m1!c!z")] == ("m1", (c,), "z")


def test_saturation_adds_superconcept():
    o = parse_ontology("MathStudent isa Student.")
    ms, st = concept("MathStudent"), concept("Student")
    c1 = constant("c1")
    assert bounded_canonical_chase(o, {ms(c1)}, 1) == {ms(c1), st(c1)}


def test_existential_creates_one_null():
    o = Ontology.build([ConceptInclusion(AtomicConcept(A), ExistsRole(BasicRole(P)))])
    out = bounded_canonical_chase(o, {A(c)}, 2)
    nulls = {t for t in domain_of(out) if t.is_null}
    assert len(nulls) == 1
    assert out == {A(c), P(c, next(iter(nulls)))}


def test_example_certain_answers_at_depth_zero(ex3):
    data = bounded_canonical_chase(ex3.ontology, mapping_chase(ex3.mapping, ex3.database), 0)
    q1 = load_query("q1.ucq", ex3)
    assert {r[0].name for r in evaluate_ucq(q1, data, constants_only=True)} == {"c1", "c2", "c3", "c4"}


def test_successor_past_the_bound_still_has_consequences():
    # C(c) needs an inv(R)-successor, which in turn makes c an A
    o = parse_ontology("role R.\nC isa some(inv(R)).\nsome(inv(R)) isa A.\n")
    cc, aa = concept("C"), concept("A")
    assert aa(c) in bounded_canonical_chase(o, {cc(c)}, 0)
    assert aa(c) in bounded_canonical_chase(o, {cc(c)}, 1)


def test_role_inclusion_past_the_bound():
    o = parse_ontology("role P.\nrole S.\nA isa some(P).\nP isa inv(S).\nsome(inv(S)) isa B.\n")
    assert B(c) in bounded_canonical_chase(o, {A(c)}, 0)


def test_chase_cap(ex3, monkeypatch):
    with pytest.raises(ChaseLimitError):
        mapping_chase(ex3.mapping, ex3.database, cap=2)
    monkeypatch.setenv(CHASE_CAP_ENV, "3")
    assert chase_cap() == 3
    with pytest.raises(ChaseLimitError):
        mapping_chase(ex3.mapping, ex3.database)
    monkeypatch.setenv(CHASE_CAP_ENV, "many")
    with pytest.raises(ValueError):
        chase_cap()


def test_default_depth_formula(ex3):
    assert default_oracle_depth(load_query("q2.ucq", ex3), ex3.ontology) == 1 + 2 * 1


@pytest.mark.parametrize("seed", range(60))
def test_random_chase_properties(seed):
    inst = random_instance(seed)
    system = inst.system
    base = mapping_chase(system.mapping, system.database)
    again = mapping_chase(system.mapping, system.database)
    assert base.atoms == again.atoms
    assert all(a.predicate.layer is Layer.ONTOLOGY for a in base.atoms)
    assert {t for t in domain_of(base.atoms) if t.is_constant} <= system.database.domain
    # same atoms as an independent naive chase, up to null names
    naive = naive_mapping_chase(system.mapping, system.database.facts)
    assert len(naive) == len(base.atoms)
    assert {a for a in naive if not any(t.is_null for t in a.args)} == {
        a for a in base.atoms if not any(t.is_null for t in a.args)
    }

    prev = None
    for depth in range(5):
        cur = bounded_canonical_chase(system.ontology, base, depth, system.database.domain)
        assert cur == bounded_canonical_chase(system.ontology, base, depth, system.database.domain)
        if prev is not None:
            assert prev <= cur
        prev = cur


@pytest.mark.parametrize("seed", range(40))
def test_depth_zero_is_closed_under_non_generating_inclusions(seed):
    inst = random_instance(seed)
    o = inst.system.ontology
    out = bounded_canonical_chase(o, mapping_chase(inst.system.mapping, inst.system.database), 0)
    terms = domain_of(out)

    def holds(b, t):
        if isinstance(b, AtomicConcept):
            return b.concept(t) in out
        r = b.role
        return any(a.predicate == r.role and a.args[1 if r.inverted else 0] == t for a in out)

    for a in o.inclusions:
        if isinstance(a, ConceptInclusion):
            if isinstance(a.rhs, AtomicConcept) and a.rhs.concept.name not in ("Top", "Bottom"):
                for t in terms:
                    if holds(a.lhs, t):
                        assert a.rhs.concept(t) in out
        else:
            for f in out:
                if f.predicate == a.lhs.role:
                    s, o_ = f.args
                    u, v = (o_, s) if a.lhs.inverted else (s, o_)
                    assert a.rhs.atom(u, v) in out


def test_random_queries_stable_at_default_depth():
    # evaluating at the default depth or one level deeper gives the same answers
    for seed in range(40):
        inst = random_instance(seed)
        rng = random.Random(seed)
        q = random_ucq(rng, inst.dataset.arity, inst.system.ontology)
        base = mapping_chase(inst.system.mapping, inst.system.database)
        d = default_oracle_depth(q, inst.system.ontology)
        one = evaluate_ucq(q, bounded_canonical_chase(inst.system.ontology, base, d), constants_only=True)
        two = evaluate_ucq(q, bounded_canonical_chase(inst.system.ontology, base, d + 1), constants_only=True)
        assert one == two
