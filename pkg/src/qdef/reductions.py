"""Instance generators for the colourability and odd-clique hardness reductions."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .model import (
    ConjunctiveQuery,
    Dataset,
    MappingAssertion,
    ObdmSystem,
    Ontology,
    UnionQuery,
    concept,
    constant,
    make_system,
    natural_key,
    role,
    source,
    variable,
)


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class Graph:
    vertices: frozenset[str]
    edges: frozenset[frozenset[str]]

    @classmethod
    def of(cls, vertices: Iterable[str], edges: Iterable[tuple[str, str]]) -> "Graph":
        edges = list(edges)
        vs = set(vertices) | {v for e in edges for v in e}
        return cls(frozenset(vs), frozenset(frozenset(e) for e in edges))

    def ordered_vertices(self) -> list[str]:
        return sorted(self.vertices, key=natural_key)

    def ordered_edges(self) -> list[tuple[str, str]]:
        pos = {v: i for i, v in enumerate(self.ordered_vertices())}
        pairs = [tuple(sorted(e, key=pos.__getitem__)) for e in self.edges]
        return sorted(pairs, key=lambda p: (pos[p[0]], pos[p[1]]))

    def validate(self, allow_isolated: bool = True):
        if not self.vertices:
            raise GraphError("graph has no vertices")
        for e in self.edges:
            if len(e) != 2:
                raise GraphError(f"loop on {next(iter(e))}")
            if not e <= self.vertices:
                raise GraphError(f"edge {sorted(e)} uses an unknown vertex")
        if not allow_isolated:
            touched = {v for e in self.edges for v in e}
            isolated = sorted(self.vertices - touched, key=natural_key)
            if isolated:
                raise GraphError(f"isolated vertices: {', '.join(isolated)}")


PALETTE3 = ("rp", "gp", "bp")
PALETTE4 = ("r", "g", "b", "y")


def gen_coloring_instance(g: Graph) -> tuple[ObdmSystem, Dataset, UnionQuery]:
    """Fixed system and dataset ``{(c4)}`` plus the query ``q_G`` built from ``g``.

    ``(c3)`` (resp. ``(c4)``) is a certain answer of ``q_G`` exactly when ``g``
    is 3-colourable (resp. 4-colourable).
    """
    g.validate(allow_isolated=False)
    s1, s2 = source("s1", 2), source("s2", 2)
    p1, p2 = role("P1"), role("P2")
    x1, x2 = variable("x1"), variable("x2")
    mapping = (
        MappingAssertion("m1", ConjunctiveQuery((x1, x2), {s1(x1, x2)}), ConjunctiveQuery((x1, x2), {p1(x1, x2)})),
        MappingAssertion("m2", ConjunctiveQuery((x1, x2), {s2(x1, x2)}), ConjunctiveQuery((x1, x2), {p2(x1, x2)})),
    )
    facts = []
    for palette, hub in ((PALETTE3, "c3"), (PALETTE4, "c4")):
        cs = [constant(n) for n in palette]
        facts += [s1(a, b) for a in cs for b in cs if a != b]
        facts += [s2(a, constant(hub)) for a in cs]
    system = make_system(Ontology.build((), {p1, p2}), mapping, facts)
    dataset = Dataset.of(1, [("c4",)])

    x = variable("x")
    ys = {v: variable(f"y{i}") for i, v in enumerate(g.ordered_vertices())}
    body = {p1(ys[u], ys[v]) for u, v in g.ordered_edges()}
    body |= {p2(y, x) for y in ys.values()}
    return system, dataset, UnionQuery(1, (ConjunctiveQuery((x,), frozenset(body)),))


def pad_to_even(g: Graph) -> Graph:
    """Add one fresh isolated vertex when ``|V|`` is odd; the maximum clique size is unchanged."""
    if len(g.vertices) % 2 == 0:
        return g
    k = 0
    while f"pad{k}" in g.vertices:
        k += 1
    return Graph(g.vertices | {f"pad{k}"}, g.edges)


def clique_body(p: int, e) -> set:
    """``e(y_k, y_j)`` for ``1 <= k < j <= p``."""
    ys = [variable(f"y{i}") for i in range(1, p + 1)]
    return {e(ys[k], ys[j]) for j in range(p) for k in range(j)}


def gen_odd_clique_instance(g: Graph) -> tuple[ObdmSystem, Dataset]:
    """A system with a perfect characterization of ``{(c)}`` iff ``g``'s maximum clique size is odd."""
    g.validate()
    g = pad_to_even(g)
    n = len(g.vertices)
    e = source("e", 2)
    ss = {i: source(f"s{i}", 1) for i in range(1, n + 1)}
    x = variable("x")
    mapping = []
    concepts = set()
    for i in range(1, n + 1, 2):
        a = concept(f"A{i}")
        concepts.add(a)
        for j, suffix in ((i, "a"), (i + 1, "b")):
            body = {ss[j](x)} | clique_body(j, e)
            mapping.append(
                MappingAssertion(f"m{i}{suffix}", ConjunctiveQuery((x,), frozenset(body)), ConjunctiveQuery((x,), {a(x)}))
            )
    names = {v: constant(f"v_{v}") for v in g.vertices}
    facts = []
    for u, v in g.ordered_edges():
        facts += [e(names[u], names[v]), e(names[v], names[u])]
    c, cp = constant("c"), constant("cp")
    facts += [ss[i](c if i % 2 else cp) for i in range(1, n + 1)]
    system = make_system(Ontology.build((), concepts), mapping, facts, schema=set(ss.values()) | {e})
    return system, Dataset.of(1, [("c",)])
