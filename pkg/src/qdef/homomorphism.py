"""Backtracking homomorphism search and CQ/UCQ evaluation."""

from __future__ import annotations

from collections import defaultdict
from typing import Iterable, Iterator, Optional, Sequence, Union

from .model import Atom, ConjunctiveQuery, Term, UnionQuery, sorted_atoms

Assignment = dict  # dict[Term, Term]


class AtomIndex:
    """Target-side lookup tables: by predicate and by (predicate, position, term)."""

    def __init__(self, atoms: Iterable[Atom]):
        self.atoms = frozenset(atoms)
        by_pred = defaultdict(list)
        by_pos = defaultdict(list)
        for a in sorted_atoms(self.atoms):
            by_pred[a.predicate].append(a)
            for i, t in enumerate(a.args):
                by_pos[(a.predicate, i, t)].append(a)
        self.by_pred = dict(by_pred)
        self.by_pos = dict(by_pos)

    def __len__(self):
        return len(self.atoms)


def as_index(data) -> AtomIndex:
    return data if isinstance(data, AtomIndex) else AtomIndex(data)


def _candidates(atom: Atom, index: AtomIndex, asg: dict) -> list[Atom]:
    pool = None
    for i, t in enumerate(atom.args):
        if t in asg:
            lst = index.by_pos.get((atom.predicate, i, asg[t]), ())
            if pool is None or len(lst) < len(pool):
                pool = lst
            if not pool:
                return []
    if pool is None:
        pool = index.by_pred.get(atom.predicate, ())
    out = []
    for cand in pool:
        local = {}
        for s, t in zip(atom.args, cand.args):
            bound = asg.get(s, local.get(s))
            if bound is None:
                local[s] = t
            elif bound != t:
                break
        else:
            out.append(cand)
    return out


def _pick(atoms: list[Atom], index: AtomIndex, asg: dict, among=None):
    """Atom with the fewest candidates (first in canonical order on ties)."""
    best = best_cands = None
    for a in atoms:
        if among is not None and not among(a):
            continue
        cands = _candidates(a, index, asg)
        if best is None or len(cands) < len(best_cands):
            best, best_cands = a, cands
            if not cands:
                break
    return best, best_cands


def _extend(atom: Atom, cand: Atom, asg: dict) -> Optional[list[Term]]:
    added = []
    for s, t in zip(atom.args, cand.args):
        bound = asg.get(s)
        if bound is None:
            asg[s] = t
            added.append(s)
        elif bound != t:
            for v in added:
                del asg[v]
            return None
    return added


def _solve(atoms: list[Atom], index: AtomIndex, asg: dict) -> Iterator[dict]:
    if not atoms:
        yield asg
        return
    atom, cands = _pick(atoms, index, asg)
    if not cands:
        return
    rest = [a for a in atoms if a is not atom]
    for cand in cands:
        added = _extend(atom, cand, asg)
        if added is None:
            continue
        yield from _solve(rest, index, asg)
        for v in added:
            del asg[v]


def _components(atoms: Sequence[Atom]) -> list[list[Atom]]:
    """Split atoms into groups connected through shared terms."""
    parent: dict[Term, Term] = {}

    def find(t):
        while parent.setdefault(t, t) != t:
            parent[t] = parent[parent[t]]
            t = parent[t]
        return t

    for a in atoms:
        for t in a.args[1:]:
            ra, rb = find(a.args[0]), find(t)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    groups: dict = {}
    ground = []
    for a in atoms:
        if a.args:
            groups.setdefault(find(a.args[0]), []).append(a)
        else:
            ground.append(a)
    comps = list(groups.values())
    if ground:
        comps.append(ground)
    return comps


def find_homomorphism(
    source: Iterable[Atom],
    source_tuple: Sequence[Term],
    target,
    target_tuple: Sequence[Term],
) -> Optional[Assignment]:
    """A map ``h`` with ``h(source) <= target`` and ``h(source_tuple) == target_tuple``.

    Every term of ``source`` (constants included) may be mapped; returns
    ``None`` when no such map exists. The first solution under canonical
    atom and candidate order is returned.
    """
    if len(source_tuple) != len(target_tuple):
        raise ValueError("tuples must have equal length")
    asg: dict = {}
    for s, t in zip(source_tuple, target_tuple):
        if asg.setdefault(s, t) != t:
            return None
    index = as_index(target)
    for comp in _components(sorted_atoms(set(source))):
        sol = next(_solve(comp, index, asg), None)
        if sol is None:
            return None
    return dict(asg)


def homomorphisms(source: Iterable[Atom], target, fixed: Optional[dict] = None) -> Iterator[Assignment]:
    """Every homomorphism from ``source`` into ``target`` extending ``fixed``."""
    index = as_index(target)
    for sol in _solve(sorted_atoms(set(source)), index, dict(fixed or {})):
        yield dict(sol)


def _answers(atoms: list[Atom], index: AtomIndex, asg: dict, wanted: set, out: set, key: tuple):
    unbound = [v for v in key if v not in asg]
    if not unbound:
        if next(_solve(atoms, index, dict(asg)), None) is not None:
            out.add(tuple(asg[v] for v in key))
        return
    pending = set(unbound)
    atom, cands = _pick(atoms, index, asg, among=lambda a: any(t in pending for t in a.args))
    if not cands:
        return
    rest = [a for a in atoms if a is not atom]
    for cand in cands:
        added = _extend(atom, cand, asg)
        if added is None:
            continue
        _answers(rest, index, asg, wanted, out, key)
        for v in added:
            del asg[v]


def evaluate_cq(q: ConjunctiveQuery, data, constants_only: bool = False) -> set[tuple[Term, ...]]:
    """Tuples ``t`` such that the body maps into ``data`` sending the targets to ``t``."""
    index = as_index(data)
    partial: list[set] = []
    keys: list[tuple] = []
    for comp in _components(sorted_atoms(q.body)):
        comp_vars = {t for a in comp for t in a.args}
        key = tuple(dict.fromkeys(t for t in q.targets if t in comp_vars))
        found: set = set()
        _answers(comp, index, {}, set(key), found, key)
        if constants_only:
            found = {row for row in found if all(t.is_constant for t in row)}
        if not found:
            return set()
        if key:
            partial.append(found)
            keys.append(key)
    results = [{}]
    for key, rows in zip(keys, partial):
        results = [{**r, **dict(zip(key, row))} for r in results for row in rows]
    return {tuple(r[t] for t in q.targets) for r in results}


def evaluate_ucq(
    q: Union[UnionQuery, ConjunctiveQuery], data, constants_only: bool = False
) -> set[tuple[Term, ...]]:
    if isinstance(q, ConjunctiveQuery):
        return evaluate_cq(q, data, constants_only)
    index = as_index(data)
    out: set = set()
    for d in q.disjuncts:
        out |= evaluate_cq(d, index, constants_only)
    return out
