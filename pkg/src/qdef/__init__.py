"""Ontological characterizations of datasets over OBDM systems."""

from .model import (
    BOTTOM,
    TOP,
    Atom,
    AtomicConcept,
    BasicRole,
    ConceptDisjointness,
    ConceptInclusion,
    ConjunctiveQuery,
    Dataset,
    ExistsRole,
    Layer,
    MappingAssertion,
    ObdmSpec,
    ObdmSystem,
    Ontology,
    Predicate,
    QueryError,
    RoleDisjointness,
    RoleInclusion,
    SourceDatabase,
    Term,
    UnionQuery,
    Violation,
    concept,
    constant,
    constants,
    domain_of,
    make_system,
    null,
    role,
    source,
    top_query,
    validate_dataset,
    validate_system,
    variable,
)
from .canonical import canonicalize

__version__ = "0.1.0"
