import itertools
import random

import pytest

from qdef import canonicalize
from qdef.chase import bounded_canonical_chase, mapping_chase
from qdef.homomorphism import evaluate_ucq
from qdef.model import (
    ConjunctiveQuery,
    Ontology,
    UnionQuery,
    concept,
    constant,
    make_system,
    role,
    source,
    variable,
)
from qdef.randomized import random_instance, random_ucq
from qdef.rewriting import (
    METHODS,
    TupleLimitError,
    all_tuples,
    certain_answers,
    gav_unfold,
    is_consistent,
    lav_rewrite,
    map_ref,
    minimize_cq,
    perfect_ref,
    rew,
    split_glav,
    violation_query,
)
from qdef.syntax import parse_mapping, parse_ontology, parse_ucq, serialize_ucq
from conftest import load_query
from oracles import naive_certain_answers

A, B = concept("A"), concept("B")
P = role("P")
x, y, z = variable("x"), variable("y"), variable("z")
c = constant("c")


def ucq(text, *preds):
    return parse_ucq(text, preds or None)


def rows(answers):
    return sorted(tuple(t.name for t in r) for r in answers)


# violation query -----------------------------------------------------------


def test_violation_query_for_concept_disjointness():
    o = parse_ontology("A1 disjoint A2.")
    assert serialize_ucq(violation_query(o)) == "() :- A1(v0), A2(v0)"


def test_violation_query_without_disjointness_is_bottom(ex3):
    assert violation_query(ex3.ontology) == UnionQuery.bottom(0)


def test_violation_query_for_inverse_existential():
    o = parse_ontology("role P.\nsome(inv(P)) disjoint A.\n")
    v = violation_query(o)
    assert canonicalize(v) == canonicalize(parse_ucq("() :- P(y2,y1), A(y1)"))
    # checked against a database that violates the assertion and one that does not
    m = parse_mapping("(x,y) :- sp(x,y) => (x,y) :- P(x,y).\n(x) :- sa(x) => (x) :- A(x).\n")
    sp, sa = source("sp", 2), source("sa", 1)
    d = constant("d")
    assert not is_consistent(make_system(o, m, [sp(c, d), sa(d)]))
    assert is_consistent(make_system(o, m, [sp(c, d), sa(c)]))


def test_violation_query_counts_disjointness_assertions():
    o = parse_ontology("A disjoint B.\nrole P.\nrole R.\nP disjoint inv(R).\nsome(P) disjoint A.\nA isa B.\n")
    assert len(violation_query(o)) == 3


# PerfectRef -----------------------------------------------------------------


def test_perfect_ref_concept_inclusion(ex3):
    q = load_query("q1.ucq", ex3)
    assert serialize_ucq(perfect_ref(ex3.ontology, q)).splitlines() == [
        "(v0) :- ForeignStudent(v0)",
        "(v0) :- MathStudent(v0)",
        "(v0) :- Student(v0)",
    ]


def test_perfect_ref_empty_ontology_is_canonicalize():
    q = ucq("(x) :- P(x,y), A(y)")
    assert perfect_ref(Ontology(), q) == canonicalize(q)


def test_perfect_ref_existential():
    o = parse_ontology("role P.\nA isa some(P).\n")
    q = ucq("() :- P(y1,y2)")
    out = perfect_ref(o, q)
    assert canonicalize(ucq("() :- A(y)")).disjuncts[0] in out.disjuncts
    # certain over {A(c)} by the chase oracle
    assert evaluate_ucq(q, bounded_canonical_chase(o, {A(c)}, 1))
    assert evaluate_ucq(out, {A(c)})


def test_perfect_ref_needs_reduction():
    # P(x,y), P(z,y) only becomes rewritable by A after unifying x and z
    o = parse_ontology("role P.\nA isa some(P).\n")
    q = ucq("(x) :- P(x,y), P(z,y)")
    out = perfect_ref(o, q)
    assert evaluate_ucq(out, {A(c)}) == {(c,)}
    assert evaluate_ucq(q, bounded_canonical_chase(o, {A(c)}, 1), constants_only=True) == {(c,)}


# MapRef ---------------------------------------------------------------------


def test_split_glav():
    m = parse_mapping("m: (x) :- s(x), t(x,y) => (x) :- P(x,z), A(z).\ng: (x) :- s(x) => (x) :- A(x).\n")
    sp = split_glav(m)
    assert len(sp.gav) == len(sp.lav) == 2
    for gav, lav in zip(sp.gav, sp.lav):
        (head,) = gav.target.body
        (body,) = lav.source.body
        assert head.predicate == body.predicate and head.predicate.name.startswith("aux_")
        assert head.predicate in sp.intermediate
    empty = split_glav(())
    assert empty.gav == empty.lav == () and not empty.intermediate


def _aux_lav(target):
    m = parse_mapping(f"m: (x) :- s(x) => {target}.")
    return split_glav(m)


def test_lav_direct_cover():
    sp = _aux_lav("(x) :- A(x)")
    out = lav_rewrite(sp.lav, ucq("(x) :- A(x)"))
    assert serialize_ucq(out) == "(v0) :- aux_m(v0)"


def test_lav_existential_cannot_escape_the_piece():
    sp = _aux_lav("(x) :- P(x,z)")
    assert lav_rewrite(sp.lav, ucq("(x) :- P(x,y), A(y)")).is_bottom


def test_lav_two_atom_piece():
    sp = _aux_lav("(x) :- P(x,z), P(z,x)")
    out = lav_rewrite(sp.lav, ucq("(x) :- P(x,y), P(y,x)"))
    assert serialize_ucq(out) == "(v0) :- aux_m(v0)"
    s = source("s", 1)
    system = make_system(None, parse_mapping("m: (x) :- s(x) => (x) :- P(x,z), P(z,x)."), [s(c)])
    assert certain_answers(system, ucq("(x) :- P(x,y), P(y,x)"), method="chase") == {(c,)}


def test_lav_rewritten_atom_blocks_later_existential_unification():
    # y0 is first rewritten through m2 and must not then be unified with m1's null
    m = parse_mapping(
        "m1: (x0) :- s1(x0), s1(y0) => (x0) :- R(x0,z0).\n"
        "m2: (x0) :- s1(x0) => (x0) :- P(x0,x0), P(z0,z0).\n"
    )
    assert map_ref(m, ucq("(x0,x0) :- P(y0,y1), R(x0,y0)")).is_bottom


def test_gav_unfold_examples():
    m = parse_mapping("m1: (x) :- s1(x) => (x) :- A(x).\nm4: (x) :- s3(x,y), s4(y) => (x) :- B(x).\n")
    sp = split_glav(m)
    aux1, aux4 = (next(iter(g.target.body)).predicate for g in sp.gav)
    assert serialize_ucq(gav_unfold(sp.gav, UnionQuery.of(ConjunctiveQuery((x,), {aux1(x)})))) == "(v0) :- s1(v0)"
    out = gav_unfold(sp.gav, UnionQuery.of(ConjunctiveQuery((x,), {aux4(x)})))
    assert serialize_ucq(out) == "(v0) :- s3(v0,v1), s4(v1)"
    both = gav_unfold(sp.gav, UnionQuery.of(ConjunctiveQuery((x,), {aux4(x), aux4(y), aux1(x)})))
    (d,) = both.disjuncts
    assert len(d.body) == 5 and len(d.variables) == 4


def test_map_ref_examples(ex3):
    q1 = load_query("q1.ucq", ex3)
    assert serialize_ucq(map_ref(ex3.mapping, q1)).splitlines() == ["(v0) :- s1(v0)", "(v0) :- s2(v0)"]
    assert map_ref((), q1).is_bottom
    assert map_ref(ex3.mapping, UnionQuery.bottom(1)).is_bottom


def test_rew_example(ex3):
    out = rew(ex3.spec, load_query("q1.ucq", ex3))
    assert set(serialize_ucq(out).splitlines()) == {
        "(v0) :- s1(v0)",
        "(v0) :- s2(v0)",
        "(v0) :- s3(v0,v1), s4(v1)",
        "(v0) :- s3(v0,v1), s5(v1)",
    }
    assert rew(ex3.spec, UnionQuery.bottom(1)).is_bottom


def test_rew_with_empty_ontology_is_map_ref(mirror):
    q = load_query("qa.ucq", mirror)
    assert rew(mirror.spec, q) == map_ref(mirror.mapping, q)


# certain answers --------------------------------------------------------------


def test_consistency_examples(ex3):
    assert is_consistent(ex3)
    o = parse_ontology("A disjoint B.")
    m = parse_mapping("(x) :- sa(x) => (x) :- A(x).\n(x) :- sb(x) => (x) :- B(x).\n")
    sa, sb = source("sa", 1), source("sb", 1)
    assert not is_consistent(make_system(o, m, [sa(c), sb(c)]))
    assert is_consistent(make_system(o, m, [sa(c)]))


@pytest.mark.parametrize("name,expected", [
    ("q1.ucq", ["c1", "c2", "c3", "c4"]),
    ("q2.ucq", ["c1", "c2", "c3", "c4", "c5"]),
    ("q3.ucq", ["c1"]),
    ("q4.ucq", ["c2"]),
    ("q5.ucq", ["c1", "c2"]),
])
def test_example_certain_answers_all_routes(ex3, name, expected):
    q = load_query(name, ex3)
    for method in METHODS:
        assert rows(certain_answers(ex3, q, method=method)) == [(e,) for e in expected]


def test_bottom_over_consistent_system(ex3):
    assert certain_answers(ex3, UnionQuery.bottom(1)) == set()


def test_inconsistent_system_returns_every_tuple(violating):
    dom = sorted(t.name for t in violating.database.domain)
    for q in (load_query("qa.ucq", violating), load_query("qp.ucq", violating), UnionQuery.bottom(2)):
        expected = sorted(itertools.product(dom, repeat=q.arity))
        for method in METHODS:
            assert rows(certain_answers(violating, q, method=method)) == expected


def test_tuple_cap(violating):
    with pytest.raises(TupleLimitError):
        all_tuples(violating, 3, tuple_cap=10)


def test_minimize_cq_keeps_a_core():
    q = ConjunctiveQuery((x,), {P(x, y), P(x, z), A(y)})
    assert minimize_cq(q) == ConjunctiveQuery((x,), {P(x, y), A(y)})


# randomized properties --------------------------------------------------------


@pytest.mark.parametrize("seed", range(150))
def test_map_ref_contract(seed):
    inst = random_instance(seed)
    system = inst.system
    rng = random.Random(seed)
    q = random_ucq(rng, inst.dataset.arity, system.ontology)
    lhs = evaluate_ucq(map_ref(system.mapping, q), system.database.facts)
    rhs = evaluate_ucq(q, mapping_chase(system.mapping, system.database).atoms, constants_only=True)
    assert lhs == rhs


@pytest.mark.parametrize("seed", range(150))
def test_routes_agree_with_naive_oracle(seed):
    inst = random_instance(seed)
    rng = random.Random(7_000 + seed)
    q = random_ucq(rng, inst.dataset.arity, inst.system.ontology)
    expected = naive_certain_answers(inst.system, q)
    for method in METHODS:
        assert certain_answers(inst.system, q, method=method) == expected


@pytest.mark.parametrize("seed", range(60))
def test_perfect_ref_disjuncts_are_sound(seed):
    inst = random_instance(seed, allow_disjointness=False)
    rng = random.Random(seed)
    q = random_ucq(rng, inst.dataset.arity, inst.system.ontology)
    cert = certain_answers(inst.system, q)
    for d in perfect_ref(inst.system.ontology, q).disjuncts:
        assert certain_answers(inst.system, UnionQuery.of(d)) <= cert


def test_random_inconsistent_instances_return_every_tuple():
    found = 0
    for seed in range(400):
        inst = random_instance(seed)
        if is_consistent(inst.system):
            continue
        found += 1
        rng = random.Random(seed)
        for arity in (1, 2):
            q = random_ucq(rng, arity, inst.system.ontology)
            assert certain_answers(inst.system, q) == all_tuples(inst.system, arity)
    assert found > 0
