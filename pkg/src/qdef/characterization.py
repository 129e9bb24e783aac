"""Verifying and computing perfect, minimally complete and maximally sound characterizations."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Union

from .canonical import canonicalize
from .chase import mapping_chase
from .model import (
    Atom,
    ConjunctiveQuery,
    Dataset,
    ObdmSystem,
    Term,
    UnionQuery,
    domain_of,
    top_query,
    variable,
)
from .rewriting import DEFAULT_TUPLE_CAP, all_tuples, certain_answers, is_consistent


class CharacterizationError(ValueError):
    pass


class IsolatedConstantError(CharacterizationError):
    """A tuple constant occurs in no atom, so no CQ can have it as an answer variable."""


class NoSoundCharacterization(CharacterizationError):
    """Inconsistent system and a dataset short of dom(D)^n: every query returns too much."""


class InconsistentSystemError(CharacterizationError):
    pass


class CharacterizationMode(enum.Enum):
    SOUND = "sound"
    COMPLETE = "complete"
    PERFECT = "perfect"


@dataclass(frozen=True)
class ExistenceAnswer:
    exists: bool
    witness: Optional[UnionQuery] = None

    def __post_init__(self):
        if self.exists != (self.witness is not None):
            raise ValueError("a witness is present exactly when one exists")


def query_from_atoms(atoms: Iterable[Atom], tup: Sequence[Term]) -> ConjunctiveQuery:
    """The CQ read off ``atoms``: tuple constants become ``x_c``, every other term ``y_t``."""
    atoms = frozenset(atoms)
    if not atoms:
        raise IsolatedConstantError("cannot build a query from an empty set of atoms")
    present = domain_of(atoms)
    for c in tup:
        if c not in present:
            raise IsolatedConstantError(f"constant {c.name} occurs in no atom")
    distinguished = set(tup)
    ren = {t: variable(("x_" if t in distinguished else "y_") + t.name) for t in present}
    return ConjunctiveQuery(tuple(ren[c] for c in tup), frozenset(a.substitute(ren) for a in atoms))


def _check_arity(q: UnionQuery, dataset: Dataset):
    if q.arity != dataset.arity:
        raise CharacterizationError(f"query arity {q.arity} differs from dataset arity {dataset.arity}")


def verify(
    system: ObdmSystem,
    dataset: Dataset,
    q: Union[UnionQuery, ConjunctiveQuery],
    mode: CharacterizationMode,
    tuple_cap: int = DEFAULT_TUPLE_CAP,
    method: str = "rewriting",
) -> bool:
    if isinstance(q, ConjunctiveQuery):
        q = UnionQuery(q.arity, (q,))
    _check_arity(q, dataset)
    cert = certain_answers(system, q, tuple_cap, method=method)
    lam = set(dataset.tuples)
    if mode is CharacterizationMode.COMPLETE:
        return lam <= cert
    if mode is CharacterizationMode.SOUND:
        return cert <= lam
    return cert == lam


def _per_tuple_queries(system: ObdmSystem, dataset: Dataset) -> list[tuple[tuple, ConjunctiveQuery]]:
    atoms = mapping_chase(system.mapping, system.database).atoms
    return [(c, query_from_atoms(atoms, c)) for c in dataset]


def min_complete(system: ObdmSystem, dataset: Dataset) -> UnionQuery:
    """Union of ``query(M(D), c)`` over the dataset, canonicalized."""
    if not is_consistent(system):
        return top_query(dataset.arity)
    if not dataset.tuples:
        return UnionQuery.bottom(dataset.arity)
    cqs = [q for _, q in _per_tuple_queries(system, dataset)]
    return canonicalize(UnionQuery(dataset.arity, tuple(cqs)))


def max_sound(system: ObdmSystem, dataset: Dataset, tuple_cap: int = DEFAULT_TUPLE_CAP) -> UnionQuery:
    """Union of those ``query(M(D), c)`` whose certain answers stay inside the dataset."""
    everything = all_tuples(system, dataset.arity, tuple_cap)
    lam = set(dataset.tuples)
    if not is_consistent(system):
        if lam == everything:
            return top_query(dataset.arity)
        raise NoSoundCharacterization("the system is inconsistent and the dataset is not dom(D)^n")
    outside = everything - lam
    kept = []
    for _, q in _per_tuple_queries(system, dataset):
        if not (certain_answers(system, q, tuple_cap) & outside):
            kept.append(q)
    return canonicalize(UnionQuery(dataset.arity, tuple(kept)))


def exists_perfect(system: ObdmSystem, dataset: Dataset, tuple_cap: int = DEFAULT_TUPLE_CAP) -> ExistenceAnswer:
    """A perfect characterization exists iff the minimally complete one is also sound."""
    if not is_consistent(system):
        if set(dataset.tuples) == all_tuples(system, dataset.arity, tuple_cap):
            return ExistenceAnswer(True, top_query(dataset.arity))
        return ExistenceAnswer(False)
    q = min_complete(system, dataset)
    if verify(system, dataset, q, CharacterizationMode.SOUND, tuple_cap):
        return ExistenceAnswer(True, q)
    return ExistenceAnswer(False)


def semantic_existence_test(
    system: ObdmSystem, dataset: Dataset, tuple_cap: int = DEFAULT_TUPLE_CAP, depth: Optional[int] = None
) -> bool:
    """No tuple of the dataset maps, with the canonical structure, onto a tuple outside it.

    Checked through homomorphisms into a bounded canonical-structure prefix,
    independently of the rewriting route used by :func:`exists_perfect`.
    """
    if not is_consistent(system):
        raise InconsistentSystemError("the semantic test needs a consistent system")
    lam = set(dataset.tuples)
    outside = all_tuples(system, dataset.arity, tuple_cap) - lam
    if not outside:
        return True
    for _, q in _per_tuple_queries(system, dataset):
        if certain_answers(system, q, tuple_cap, method="oracle", depth=depth) & outside:
            return False
    return True
