"""Mixed graphs: DAGs plus multidirected hyperedges.

A mixed graph is a set of vertices, an acyclic set of directed edges,
and a set of multidirected edges (hyperedges of order >= 2, stored as
sorted multisets).  A hyperedge of order 2 is the classical bidirected
edge; a hyperedge models a hidden common cause of its endpoints.  The
canonical-DAG reduction replaces each hyperedge with a fresh latent
source vertex pointing at its endpoints.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import CycleError, SchemaError


@dataclass(frozen=True)
class MixedGraph:
    """Immutable mixed graph G = (V, D, H).

    ``vertices`` is a sorted tuple of distinct non-negative ints,
    ``directed_edges`` a sorted tuple of (u, v) pairs, and
    ``multidirected_edges`` a sorted tuple of internally sorted vertex
    multisets of size >= 2.  Construction normalizes (sorts, dedups)
    and validates endpoints; acyclicity is checked separately by
    validate_acyclic.
    """

    vertices: tuple[int, ...]
    directed_edges: tuple[tuple[int, int], ...] = ()
    multidirected_edges: tuple[tuple[int, ...], ...] = ()
    labels: Mapping[int, str] | None = None

    def __post_init__(self) -> None:
        verts = tuple(sorted(set(int(v) for v in self.vertices)))
        if any(v < 0 for v in verts):
            raise ValueError("vertex ids must be non-negative integers")
        vset = set(verts)
        edges = tuple(sorted(set((int(u), int(v)) for u, v in self.directed_edges)))
        for u, v in edges:
            if u == v:
                raise ValueError(f"self-loop at {u}")
            if u not in vset or v not in vset:
                raise ValueError(f"edge ({u},{v}) has an endpoint outside the vertex set")
        hyper = tuple(
            sorted(set(tuple(sorted(int(x) for x in h)) for h in self.multidirected_edges))
        )
        for h in hyper:
            if len(h) < 2:
                raise ValueError(f"multidirected edge {h} has order < 2")
            for x in h:
                if x not in vset:
                    raise ValueError(f"multidirected edge {h} mentions unknown vertex {x}")
        if self.labels is not None:
            for v in self.labels:
                if v not in vset:
                    raise ValueError(f"label for unknown vertex {v}")
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "directed_edges", edges)
        object.__setattr__(self, "multidirected_edges", hyper)
        if self.labels is not None:
            object.__setattr__(self, "labels", dict(sorted(self.labels.items())))

    # -- basic accessors -------------------------------------------------

    @property
    def is_dag(self) -> bool:
        """True when there are no multidirected edges."""
        return not self.multidirected_edges

    def children(self, v: int) -> tuple[int, ...]:
        return tuple(b for a, b in self.directed_edges if a == v)

    def parents(self, v: int) -> tuple[int, ...]:
        return tuple(a for a, b in self.directed_edges if b == v)

    def index_of(self, v: int) -> int:
        """Dense position of vertex v in the sorted vertex tuple."""
        return self.vertices.index(v)

    def adjacency(self) -> dict[int, tuple[int, ...]]:
        """Sorted child lists keyed by vertex (every vertex present)."""
        out: dict[int, list[int]] = {v: [] for v in self.vertices}
        for u, v in self.directed_edges:
            out[u].append(v)
        return {v: tuple(sorted(cs)) for v, cs in out.items()}


@dataclass(frozen=True)
class CanonicalDagResult:
    """Outcome of the hidden-variable reduction.

    ``dag`` has no multidirected edges; ``latent_map`` sends each original
    hyperedge to its fresh latent vertex id; ``original_vertices`` marks
    the vertices that existed before the reduction.
    """

    dag: MixedGraph
    latent_map: Mapping[tuple[int, ...], int]
    original_vertices: tuple[int, ...]

    latent_of: Mapping[int, tuple[int, ...]] = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "latent_of", {v: h for h, v in self.latent_map.items()}
        )


def validate_acyclic(g: MixedGraph) -> tuple[int, ...]:
    """Topologically order the directed part, smallest vertex id first.

    Returns a vertex ordering in which every directed edge goes forward.
    Raises CycleError carrying one offending cycle (as a closed vertex
    sequence) when the directed part is cyclic.
    """
    children = g.adjacency()
    indeg = {v: 0 for v in g.vertices}
    for _, v in g.directed_edges:
        indeg[v] += 1
    ready = [v for v in g.vertices if indeg[v] == 0]
    heapq.heapify(ready)
    order: list[int] = []
    while ready:
        v = heapq.heappop(ready)
        order.append(v)
        for c in children[v]:
            indeg[c] -= 1
            if indeg[c] == 0:
                heapq.heappush(ready, c)
    if len(order) == len(g.vertices):
        return tuple(order)
    raise CycleError(_find_cycle(g, {v for v in g.vertices if v not in set(order)}))


def _find_cycle(g: MixedGraph, candidates: set[int]) -> tuple[int, ...]:
    """Locate one directed cycle among the unresolved vertices.

    Every leftover of Kahn's algorithm keeps at least one leftover
    parent, so walking parent links must revisit a vertex; the revisit
    closes a cycle, reported in edge direction.
    """
    parent: dict[int, list[int]] = {v: [] for v in candidates}
    for u, v in g.directed_edges:
        if u in candidates and v in candidates:
            parent[v].append(u)
    start = min(candidates)
    seen = {start: 0}
    walk = [start]
    while True:
        v = min(parent[walk[-1]])
        if v in seen:
            return (v,) + tuple(reversed(walk[seen[v]:]))
        seen[v] = len(walk)
        walk.append(v)


def canonical_dag(g: MixedGraph) -> CanonicalDagResult:
    """Replace every hyperedge with a fresh latent source vertex.

    The latent for the r-th hyperedge (1-based, in sorted hyperedge
    order) gets id ``max(original ids) + r``, so certificates citing
    latents are reproducible across runs.  A graph with no hyperedges
    comes back unchanged with an empty latent map.
    """
    if not g.multidirected_edges:
        return CanonicalDagResult(dag=g, latent_map={}, original_vertices=g.vertices)
    base = max(g.vertices)
    latent_map = {h: base + r for r, h in enumerate(g.multidirected_edges, start=1)}
    vertices = g.vertices + tuple(latent_map[h] for h in g.multidirected_edges)
    edges = list(g.directed_edges)
    for h, v in latent_map.items():
        edges.extend((v, x) for x in set(h))
    dag = MixedGraph(vertices=vertices, directed_edges=tuple(edges), labels=g.labels)
    return CanonicalDagResult(dag=dag, latent_map=latent_map, original_vertices=g.vertices)


# -- JSON interface ------------------------------------------------------

_KEYS = {"vertices", "directed_edges", "multidirected_edges", "labels"}


def parse_graph(text: str) -> MixedGraph:
    """Parse the JSON graph document; validates schema and acyclicity."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError("/", f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaError("/", "top level must be an object")
    for key in ("vertices", "directed_edges", "multidirected_edges"):
        if key not in doc:
            raise SchemaError(f"/{key}", "missing")
    for key in doc:
        if key not in _KEYS:
            raise SchemaError(f"/{key}", "unknown key")
    verts = _int_list(doc["vertices"], "/vertices")
    edges = []
    for i, e in enumerate(_list(doc["directed_edges"], "/directed_edges")):
        pair = _int_list(e, f"/directed_edges/{i}")
        if len(pair) != 2:
            raise SchemaError(f"/directed_edges/{i}", "must be a pair")
        edges.append((pair[0], pair[1]))
    hyper = []
    for i, h in enumerate(_list(doc["multidirected_edges"], "/multidirected_edges")):
        members = _int_list(h, f"/multidirected_edges/{i}")
        if len(members) < 2:
            raise SchemaError(f"/multidirected_edges/{i}", "order must be >= 2")
        hyper.append(tuple(members))
    labels = None
    if "labels" in doc:
        if not isinstance(doc["labels"], dict):
            raise SchemaError("/labels", "must be an object")
        labels = {}
        for k, v in doc["labels"].items():
            if not isinstance(v, str):
                raise SchemaError(f"/labels/{k}", "label must be a string")
            try:
                labels[int(k)] = v
            except ValueError as exc:
                raise SchemaError(f"/labels/{k}", "key must be an integer") from exc
    try:
        g = MixedGraph(
            vertices=tuple(verts),
            directed_edges=tuple(edges),
            multidirected_edges=tuple(hyper),
            labels=labels,
        )
    except ValueError as exc:
        raise SchemaError("/", str(exc)) from exc
    validate_acyclic(g)
    return g


def serialize_graph(g: MixedGraph) -> str:
    """Canonical single-line JSON; parse_graph round-trips it byte-for-byte."""
    doc: dict[str, object] = {
        "vertices": list(g.vertices),
        "directed_edges": [list(e) for e in g.directed_edges],
        "multidirected_edges": [list(h) for h in g.multidirected_edges],
    }
    if g.labels:
        doc["labels"] = {str(k): v for k, v in g.labels.items()}
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def _list(x: object, path: str) -> list:
    if not isinstance(x, list):
        raise SchemaError(path, "must be an array")
    return x


def _int_list(x: object, path: str) -> list[int]:
    items = _list(x, path)
    out = []
    for i, v in enumerate(items):
        if not isinstance(v, int) or isinstance(v, bool):
            raise SchemaError(f"{path}/{i}", "must be an integer")
        out.append(v)
    return out
