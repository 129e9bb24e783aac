"""Canonical forms for conjunctive queries and their unions.

A CQ is relabelled by an isomorphism-invariant procedure: variable colours
are refined from target positions and atom neighbourhoods, ties are broken
by individualizing each member of the first ambiguous colour class in turn,
and the lexicographically least resulting encoding wins. Two isomorphic
queries therefore canonicalize to the same value.
"""

from __future__ import annotations

from typing import Union

from .model import Atom, ConjunctiveQuery, Term, UnionQuery, variable

# Leaves explored before settling for the best encoding seen so far. Only
# highly symmetric queries get near this.
MAX_LEAVES = 4096

_Encoding = tuple  # (targets, atoms) over integer variable labels


def _refine(colors: list[int], atoms, incidence) -> list[int]:
    while True:
        signatures = []
        for v, c in enumerate(colors):
            neighbourhood = sorted(
                (pred, pos, tuple(colors[a] for a in args)) for pred, pos, args in incidence[v]
            )
            signatures.append((c, tuple(neighbourhood)))
        ranks = {s: i for i, s in enumerate(sorted(set(signatures)))}
        refined = [ranks[s] for s in signatures]
        if len(ranks) == len(set(colors)):
            return refined
        colors = refined


def _individualize(colors: list[int], v: int) -> list[int]:
    keyed = [(c, 0 if u == v else 1) for u, c in enumerate(colors)]
    ranks = {k: i for i, k in enumerate(sorted(set(keyed)))}
    return [ranks[k] for k in keyed]


def _encode(order: list[int], targets, atoms) -> _Encoding:
    enc_atoms = sorted((pred, tuple(order[a] for a in args)) for pred, args in atoms)
    enc_targets = tuple(order[t] for t in targets)
    # rename by first occurrence over (targets, sorted body)
    first: dict[int, int] = {}
    for t in enc_targets:
        first.setdefault(t, len(first))
    for _, args in enc_atoms:
        for a in args:
            first.setdefault(a, len(first))
    return (
        tuple(first[t] for t in enc_targets),
        tuple(sorted((pred, tuple(first[a] for a in args)) for pred, args in enc_atoms)),
    )


def cq_encoding(q: ConjunctiveQuery) -> _Encoding:
    """Isomorphism-invariant encoding of ``q``."""
    vars_ = sorted(q.variables, key=Term.sort_key)
    index = {v: i for i, v in enumerate(vars_)}
    preds = {a.predicate: a.predicate.sort_key() for a in q.body}
    atoms = [(preds[a.predicate], tuple(index[t] for t in a.args)) for a in q.body]
    targets = [index[t] for t in q.targets]

    incidence: list[list] = [[] for _ in vars_]
    for pred, args in atoms:
        for pos, a in enumerate(args):
            incidence[a].append((pred, pos, args))

    initial_keys = [tuple(i for i, t in enumerate(targets) if t == v) for v in range(len(vars_))]
    ranks = {k: i for i, k in enumerate(sorted(set(initial_keys)))}
    colors = [ranks[k] for k in initial_keys]

    best: list = [None]
    leaves = [0]

    def search(colors):
        if leaves[0] >= MAX_LEAVES and best[0] is not None:
            return
        colors = _refine(colors, atoms, incidence)
        n_colors = len(set(colors))
        if n_colors == len(colors):
            leaves[0] += 1
            enc = _encode(colors, targets, atoms)
            if best[0] is None or enc < best[0]:
                best[0] = enc
            return
        cells: dict[int, list[int]] = {}
        for v, c in enumerate(colors):
            cells.setdefault(c, []).append(v)
        cell = min(c for c, members in cells.items() if len(members) > 1)
        for v in cells[cell]:
            search(_individualize(colors, v))

    search(colors)
    return best[0]


def _decode(enc: _Encoding, q: ConjunctiveQuery) -> ConjunctiveQuery:
    preds = {a.predicate.sort_key(): a.predicate for a in q.body}
    enc_targets, enc_atoms = enc
    names = [variable(f"v{i}") for i in range(1 + max((a for _, args in enc_atoms for a in args), default=-1))]
    body = frozenset(Atom(preds[p], tuple(names[a] for a in args)) for p, args in enc_atoms)
    return ConjunctiveQuery(tuple(names[t] for t in enc_targets), body)


def canonical_cq(q: ConjunctiveQuery) -> ConjunctiveQuery:
    return _decode(cq_encoding(q), q)


def cq_sort_key(q: ConjunctiveQuery) -> tuple:
    return (
        len(q.body),
        tuple(t.sort_key() for t in q.targets),
        tuple(sorted(a.sort_key() for a in q.body)),
    )


def canonicalize(q: Union[UnionQuery, ConjunctiveQuery]) -> UnionQuery:
    """Normal form: canonical disjuncts, duplicates removed, sorted."""
    if isinstance(q, ConjunctiveQuery):
        q = UnionQuery(q.arity, (q,))
    disjuncts = {canonical_cq(d) for d in q.disjuncts}
    return UnionQuery(q.arity, tuple(sorted(disjuncts, key=cq_sort_key)))
