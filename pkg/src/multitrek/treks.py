"""Treks, trek systems, and multi-trek separation.

A k-trek into sinks (i_1..i_k) is a tuple of k directed paths whose
sources either coincide at a single top vertex or all lie inside one
multidirected hyperedge.  A trek system is n k-treks whose side-i
endpoints cover the ordered set S_i; two of its treks have a *sided
intersection* when their side-i paths share a vertex.  The central
question — does a system without sided intersection exist? — reduces
to finding n distinct candidate tops from which every side admits a
vertex-disjoint path system, which is a unit-capacity max-flow check
per side.

All enumerations are capped (default 10^6 items); exceeding a cap is
an explicit BudgetExceeded, never silent truncation.  Orderings are
lexicographic throughout so certificates reproduce across runs.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import BudgetExceeded, InternalInconsistency
from .graphs import MixedGraph, canonical_dag
from .tensors import perm_sign

DEFAULT_BUDGET = 10**6


@dataclass(frozen=True)
class DirectedPath:
    """A directed walk (automatically simple in a DAG); one vertex is a valid trivial path."""

    vertices: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.vertices:
            raise ValueError("a path needs at least one vertex")
        object.__setattr__(self, "vertices", tuple(int(v) for v in self.vertices))

    @property
    def source(self) -> int:
        return self.vertices[0]

    @property
    def sink(self) -> int:
        return self.vertices[-1]

    def is_path_of(self, g: MixedGraph) -> bool:
        edges = set(g.directed_edges)
        vset = set(g.vertices)
        return all(v in vset for v in self.vertices) and all(
            (a, b) in edges for a, b in zip(self.vertices, self.vertices[1:])
        )


@dataclass(frozen=True)
class KTrek:
    """k directed paths topped by one vertex or supported by one hyperedge."""

    paths: tuple[DirectedPath, ...]
    top_vertex: int | None = None
    top_hyperedge: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        if (self.top_vertex is None) == (self.top_hyperedge is None):
            raise ValueError("exactly one of top_vertex / top_hyperedge must be set")
        srcs = self.sources
        if self.top_vertex is not None:
            if any(s != self.top_vertex for s in srcs):
                raise ValueError(f"sources {srcs} do not coincide at top {self.top_vertex}")
        else:
            if not set(srcs) <= set(self.top_hyperedge):
                raise ValueError(f"sources {srcs} not supported by hyperedge {self.top_hyperedge}")

    @property
    def order(self) -> int:
        return len(self.paths)

    @property
    def sources(self) -> tuple[int, ...]:
        return tuple(p.source for p in self.paths)

    @property
    def sinks(self) -> tuple[int, ...]:
        return tuple(p.sink for p in self.paths)

    def sort_key(self) -> tuple[tuple[int, ...], ...]:
        return tuple(p.vertices for p in self.paths)


@dataclass(frozen=True)
class TrekSystem:
    """n treks covering the ordered sides, with induced permutations and sign.

    Treks are ordered so that trek j ends at side_endpoints[0][j] on
    side 1; induced_permutations[i-2][j] is the position in side i of
    trek j's side-i sink, and sign is the product of those
    permutations' signs.
    """

    treks: tuple[KTrek, ...]
    side_endpoints: tuple[tuple[int, ...], ...]
    induced_permutations: tuple[tuple[int, ...], ...]
    sign: int


@dataclass(frozen=True)
class SidedIntersectionWitness:
    """Two treks of a system sharing shared_vertex on one side (1-based)."""

    trek_index_a: int
    trek_index_b: int
    side: int
    shared_vertex: int


@dataclass(frozen=True)
class TopObstruction:
    """A candidate top multiset R and the first side with no disjoint path system."""

    top: tuple[int, ...]
    blocked_side: int


@dataclass(frozen=True)
class TrekSearchResult:
    """Either a verified intersection-free system, or per-top obstructions."""

    system: TrekSystem | None
    obstructions: tuple[TopObstruction, ...]

    @property
    def found(self) -> bool:
        return self.system is not None


# -- reachability and path enumeration -----------------------------------


def reachable_from(g: MixedGraph, u: int) -> frozenset[int]:
    """Vertices reachable from u by directed edges, u included."""
    children = g.adjacency()
    seen = {u}
    stack = [u]
    while stack:
        for c in children[stack.pop()]:
            if c not in seen:
                seen.add(c)
                stack.append(c)
    return frozenset(seen)


def enumerate_paths(
    g: MixedGraph, u: int, v: int, budget: int = DEFAULT_BUDGET
) -> list[DirectedPath]:
    """All directed paths u -> v, lexicographic by vertex sequence.

    The trivial path [u] is returned when u == v; the list is empty
    when v is unreachable.  Raises BudgetExceeded past the cap.
    """
    vset = set(g.vertices)
    if u not in vset or v not in vset:
        raise ValueError(f"vertices {u},{v} must belong to the graph")
    children = g.adjacency()
    into_v = _ancestor_closure(g, v)
    out: list[DirectedPath] = []

    def dfs(path: list[int]) -> None:
        cur = path[-1]
        if cur == v:
            if len(out) >= budget:
                raise BudgetExceeded(f"paths {u}->{v}", budget)
            out.append(DirectedPath(tuple(path)))
            return
        for c in children[cur]:
            if c in into_v:
                path.append(c)
                dfs(path)
                path.pop()

    if u in into_v:
        dfs([u])
    return out


def _ancestor_closure(g: MixedGraph, v: int) -> frozenset[int]:
    parents: dict[int, list[int]] = {w: [] for w in g.vertices}
    for a, b in g.directed_edges:
        parents[b].append(a)
    seen = {v}
    stack = [v]
    while stack:
        for p in parents[stack.pop()]:
            if p not in seen:
                seen.add(p)
                stack.append(p)
    return frozenset(seen)


# -- trek enumeration -----------------------------------------------------


def enumerate_ktreks(
    g: MixedGraph, sinks: Sequence[int], budget: int = DEFAULT_BUDGET
) -> list[KTrek]:
    """All k-treks into the ordered sinks, in lexicographic path order.

    Tops of both kinds are covered: a common source vertex, or a source
    tuple drawn from one hyperedge.  One tuple of paths is one trek; a
    trek whose sources coincide is reported with its vertex top even
    when a hyperedge also supports it.
    """
    k = len(sinks)
    if k < 2:
        raise ValueError("a k-trek needs k >= 2 sinks")
    vset = set(g.vertices)
    if any(s not in vset for s in sinks):
        raise ValueError(f"sinks {tuple(sinks)} must belong to the graph")
    reach = {t: reachable_from(g, t) for t in g.vertices}

    source_tuples: set[tuple[int, ...]] = set()
    for t in g.vertices:
        if all(s in reach[t] for s in sinks):
            source_tuples.add((t,) * k)
    for h in g.multidirected_edges:
        members = sorted(set(h))
        pools = [[m for m in members if sinks[i] in reach[m]] for i in range(k)]
        if all(pools):
            for srcs in itertools.product(*pools):
                source_tuples.add(srcs)

    path_cache: dict[tuple[int, int], list[DirectedPath]] = {}

    def paths(a: int, b: int) -> list[DirectedPath]:
        if (a, b) not in path_cache:
            path_cache[(a, b)] = enumerate_paths(g, a, b, budget)
        return path_cache[(a, b)]

    treks: list[KTrek] = []
    for srcs in sorted(source_tuples):
        top_vertex = srcs[0] if all(s == srcs[0] for s in srcs) else None
        top_hyperedge = None
        if top_vertex is None:
            top_hyperedge = min(
                h for h in g.multidirected_edges if set(srcs) <= set(h)
            )
        for combo in itertools.product(*(paths(srcs[i], sinks[i]) for i in range(k))):
            if len(treks) >= budget:
                raise BudgetExceeded(f"k-treks into {tuple(sinks)}", budget)
            treks.append(
                KTrek(paths=tuple(combo), top_vertex=top_vertex, top_hyperedge=top_hyperedge)
            )
    treks.sort(key=KTrek.sort_key)
    return treks


# -- vertex-disjoint path systems via max flow ----------------------------


def exists_disjoint_path_system(
    g: MixedGraph, r: Sequence[int], s: Sequence[int]
) -> list[DirectedPath] | None:
    """A system of #R vertex-disjoint paths from R onto S, else None.

    Unit vertex capacities via vertex splitting; integral max flow, so
    polynomial.  The returned list is aligned with R's order (path i
    starts at r[i]); endpoints cover S exactly.
    """
    rr, ss = list(r), list(s)
    if len(rr) != len(ss):
        raise ValueError("R and S must have equal size")
    if len(set(rr)) != len(rr) or len(set(ss)) != len(ss):
        raise ValueError("R and S must consist of distinct vertices")
    vset = set(g.vertices)
    if any(v not in vset for v in rr + ss):
        raise ValueError("R and S must belong to the graph")
    n = len(rr)
    if n == 0:
        return []

    idx = {v: i for i, v in enumerate(g.vertices)}
    p = len(g.vertices)
    vin = lambda v: 2 * idx[v]
    vout = lambda v: 2 * idx[v] + 1
    src, snk = 2 * p, 2 * p + 1

    adj: dict[int, list[int]] = {node: [] for node in range(2 * p + 2)}
    cap: dict[tuple[int, int], int] = {}

    def add_edge(a: int, b: int) -> None:
        if (a, b) not in cap:
            adj[a].append(b)
            adj[b].append(a)
            cap[(a, b)] = 0
            cap[(b, a)] = 0
        cap[(a, b)] += 1

    for v in g.vertices:
        add_edge(vin(v), vout(v))
    for a, b in g.directed_edges:
        add_edge(vout(a), vin(b))
    for v in sorted(set(rr)):
        add_edge(src, vin(v))
    for v in sorted(set(ss)):
        add_edge(vout(v), snk)

    flow: dict[tuple[int, int], int] = {e: 0 for e in cap}
    sent = 0
    while sent < n:
        # BFS for a shortest augmenting path in the residual graph
        prev: dict[int, int] = {src: src}
        queue = deque([src])
        while queue and snk not in prev:
            u = queue.popleft()
            for w in adj[u]:
                if w not in prev and cap[(u, w)] - flow[(u, w)] > 0:
                    prev[w] = u
                    queue.append(w)
        if snk not in prev:
            return None
        node = snk
        while node != src:
            pu = prev[node]
            flow[(pu, node)] += 1
            flow[(node, pu)] -= 1
            node = pu
        sent += 1

    paths: list[DirectedPath] = []
    for v in rr:
        seq = [v]
        node = vout(v)
        while True:
            nxt = next(w for w in adj[node] if flow[(node, w)] > 0)
            flow[(node, nxt)] = 0  # consume so shared bookkeeping cannot reuse it
            if nxt == snk:
                break
            seq.append(g.vertices[nxt // 2])
            node = nxt + 1  # w is an in-node; step to its out-node
        paths.append(DirectedPath(tuple(seq)))
    return paths


# -- trek systems ----------------------------------------------------------


def make_trek_system(treks: Sequence[KTrek], sides: Sequence[Sequence[int]]) -> TrekSystem:
    """Assemble a TrekSystem, computing induced permutations and sign.

    Treks must already be ordered so trek j's side-1 sink is sides[0][j];
    every side's sinks must cover that side exactly.
    """
    k = len(sides)
    n = len(treks)
    side_lists = [list(side) for side in sides]
    for j, trek in enumerate(treks):
        if trek.order != k:
            raise ValueError(f"trek {j} has order {trek.order}, expected {k}")
        if trek.paths[0].sink != side_lists[0][j]:
            raise ValueError("treks are not aligned with side 1's order")
    perms: list[tuple[int, ...]] = []
    for i in range(1, k):
        positions = []
        for trek in treks:
            sink = trek.paths[i].sink
            try:
                positions.append(side_lists[i].index(sink))
            except ValueError:
                raise ValueError(f"sink {sink} is not in side {i + 1}") from None
        if sorted(positions) != list(range(n)):
            raise ValueError(f"side {i + 1} endpoints do not cover the side exactly")
        perms.append(tuple(positions))
    sign = 1
    for p in perms:
        sign *= perm_sign(p)
    return TrekSystem(
        treks=tuple(treks),
        side_endpoints=tuple(tuple(side) for side in side_lists),
        induced_permutations=tuple(perms),
        sign=sign,
    )


def find_sided_intersection(system: TrekSystem) -> SidedIntersectionWitness | None:
    """First (side, trek pair, smallest vertex) shared on one side, if any."""
    return sided_intersection_of_paths([
        [trek.paths[i] for trek in system.treks] for i in range(len(system.side_endpoints))
    ])


def sided_intersection_of_paths(
    paths_by_side: Sequence[Sequence[DirectedPath]],
) -> SidedIntersectionWitness | None:
    for i, side_paths in enumerate(paths_by_side):
        for a in range(len(side_paths)):
            va = set(side_paths[a].vertices)
            for b in range(a + 1, len(side_paths)):
                shared = va & set(side_paths[b].vertices)
                if shared:
                    return SidedIntersectionWitness(
                        trek_index_a=a, trek_index_b=b, side=i + 1, shared_vertex=min(shared)
                    )
    return None


def exists_trek_system_no_sided_intersection(
    g: MixedGraph, sides: Sequence[Sequence[int]], budget: int = DEFAULT_BUDGET
) -> TrekSearchResult:
    """Search for an intersection-free system of k-treks between the sides.

    A found system certifies that the corresponding cumulant subtensor
    determinant is generically nonzero, at every order.  The converse
    holds at order 2 (and no order-4 counterexample is known): when no
    system exists the determinant vanishes identically.  At odd orders
    >= 3 the converse fails on rare configurations — systems whose
    treks meet only on side 1 carry equal signs and need not cancel —
    so an empty search result there is an obstruction log, not a proof
    of vanishing; the decision oracle cross-checks algebraically.

    Hyperedges are handled through the canonical DAG and the found
    system is re-expressed over the original vertices (treks topped at
    a latent become hyperedge-supported treks).  Obstruction-log tops
    cite canonical-DAG vertex ids, so latent ids can appear there.
    """
    side_lists = _checked_sides(g, sides)
    if g.is_dag:
        return _search_dag(g, side_lists, budget)
    canon = canonical_dag(g)
    result = _search_dag(canon.dag, side_lists, budget)
    if result.system is None:
        return result
    treks = []
    for trek in result.system.treks:
        top = trek.top_vertex
        if top in canon.latent_of:
            treks.append(
                KTrek(
                    paths=tuple(DirectedPath(p.vertices[1:]) for p in trek.paths),
                    top_hyperedge=canon.latent_of[top],
                )
            )
        else:
            treks.append(trek)
    system = make_trek_system(treks, side_lists)
    _verify_system(g, system)
    return TrekSearchResult(system=system, obstructions=result.obstructions)


def _checked_sides(g: MixedGraph, sides: Sequence[Sequence[int]]) -> list[list[int]]:
    side_lists = [list(side) for side in sides]
    if len(side_lists) < 2:
        raise ValueError("need at least two sides")
    n = len(side_lists[0])
    if n == 0 or any(len(side) != n for side in side_lists):
        raise ValueError("sides must be nonempty and of equal size")
    vset = set(g.vertices)
    for side in side_lists:
        if len(set(side)) != len(side):
            raise ValueError(f"side {side} repeats a vertex")
        if any(v not in vset for v in side):
            raise ValueError(f"side {side} leaves the vertex set")
    return side_lists


def _search_dag(
    dag: MixedGraph, sides: list[list[int]], budget: int
) -> TrekSearchResult:
    n = len(sides[0])
    k = len(sides)
    reach = {v: reachable_from(dag, v) for v in dag.vertices}
    useful = [
        v for v in dag.vertices if all(reach[v] & set(side) for side in sides)
    ]
    obstructions: list[TopObstruction] = []
    count = 0
    for tops in itertools.combinations(useful, n):
        count += 1
        if count > budget:
            raise BudgetExceeded("candidate top sets", budget)
        per_side: list[list[DirectedPath]] = []
        for i, side in enumerate(sides):
            found = exists_disjoint_path_system(dag, tops, side)
            if found is None:
                obstructions.append(TopObstruction(top=tops, blocked_side=i + 1))
                break
            per_side.append(found)
        if len(per_side) < k:
            continue
        raw = [
            KTrek(
                paths=tuple(per_side[i][j] for i in range(k)),
                top_vertex=tops[j],
            )
            for j in range(n)
        ]
        raw.sort(key=lambda trek: sides[0].index(trek.paths[0].sink))
        system = make_trek_system(raw, sides)
        _verify_system(dag, system)
        return TrekSearchResult(system=system, obstructions=tuple(obstructions))
    return TrekSearchResult(system=None, obstructions=tuple(obstructions))


def _verify_system(g: MixedGraph, system: TrekSystem) -> None:
    """Independent pairwise check of every returned witness."""
    for trek in system.treks:
        for path in trek.paths:
            if not path.is_path_of(g):
                raise InternalInconsistency(f"witness path {path.vertices} is not a path of the graph")
        if trek.top_hyperedge is not None and trek.top_hyperedge not in g.multidirected_edges:
            raise InternalInconsistency(f"witness hyperedge {trek.top_hyperedge} is not in the graph")
    witness = find_sided_intersection(system)
    if witness is not None:
        raise InternalInconsistency(f"returned system has a sided intersection: {witness}")


# -- k-trek separation -----------------------------------------------------


def check_ktrek_separation(
    g: MixedGraph,
    sides: Sequence[Sequence[int]],
    blockers: Sequence[Sequence[int]],
    budget: int = DEFAULT_BUDGET,
) -> bool:
    """True iff every k-trek between the sides is blocked.

    (A_1..A_k) separates when every k-trek into any sink tuple from
    S_1 x ... x S_k has, on some side j, a path through A_j (endpoints
    count).  Decided by per-side reachability avoiding A_j, which is
    exhaustive: a trek exists iff some top offers every side an
    avoiding path.
    """
    if len(blockers) != len(sides):
        raise ValueError("need one blocking set per side")
    side_lists = [list(side) for side in sides]
    block_sets = [set(a) for a in blockers]
    vset = set(g.vertices)
    for group in list(side_lists) + [sorted(a) for a in block_sets]:
        if any(v not in vset for v in group):
            raise ValueError("sides and blockers must belong to the graph")

    avoid_reach: list[dict[int, frozenset[int]]] = []
    for a in block_sets:
        sub = _induced(g, vset - a)
        avoid_reach.append({v: reachable_from(sub, v) for v in sub.vertices})

    def side_open(i: int, source: int) -> bool:
        if source in block_sets[i]:
            return False
        return bool(avoid_reach[i][source] & set(side_lists[i]))

    count = 0
    for t in g.vertices:
        count += 1
        if count > budget:
            raise BudgetExceeded("separation top candidates", budget)
        if all(side_open(i, t) for i in range(len(side_lists))):
            return False
    for h in g.multidirected_edges:
        count += 1
        if count > budget:
            raise BudgetExceeded("separation top candidates", budget)
        members = set(h)
        if all(any(side_open(i, m) for m in members) for i in range(len(side_lists))):
            return False
    return True


def _induced(g: MixedGraph, keep: set[int]) -> MixedGraph:
    return MixedGraph(
        vertices=tuple(sorted(keep)),
        directed_edges=tuple(
            (a, b) for a, b in g.directed_edges if a in keep and b in keep
        ),
    )


def find_ktrek_separating_sets(
    g: MixedGraph,
    sides: Sequence[Sequence[int]],
    budget: int,
    cap: int = DEFAULT_BUDGET,
) -> tuple[tuple[int, ...], ...] | None:
    """Smallest-total-size separating tuple (A_1..A_k) with total <= budget.

    Exhaustive, smallest total size first, lexicographic tie-break; None
    when no tuple within the budget separates.  ``cap`` bounds the
    number of tuples tried.
    """
    if budget < 0:
        raise ValueError("budget must be >= 0")
    k = len(sides)
    verts = list(g.vertices)
    tried = 0
    for total in range(budget + 1):
        for sizes in itertools.product(range(total + 1), repeat=k):
            if sum(sizes) != total:
                continue
            for combo in itertools.product(
                *(itertools.combinations(verts, size) for size in sizes)
            ):
                tried += 1
                if tried > cap:
                    raise BudgetExceeded("separating-set candidates", cap)
                if check_ktrek_separation(g, sides, combo, budget=cap):
                    return tuple(tuple(a) for a in combo)
    return None


# -- JSON shapes for certificates -----------------------------------------


def trek_system_to_doc(system: TrekSystem) -> dict:
    treks = []
    for trek in system.treks:
        top: dict[str, object]
        if trek.top_vertex is not None:
            top = {"vertex": trek.top_vertex}
        else:
            top = {"hyperedge": list(trek.top_hyperedge), "sources": list(trek.sources)}
        treks.append({"paths": [list(p.vertices) for p in trek.paths], "top": top})
    return {
        "treks": treks,
        "side_endpoints": [list(side) for side in system.side_endpoints],
        "permutations": [list(p) for p in system.induced_permutations],
        "sign": system.sign,
    }


def trek_system_from_doc(doc: dict) -> TrekSystem:
    treks = []
    for entry in doc["treks"]:
        paths = tuple(DirectedPath(tuple(p)) for p in entry["paths"])
        top = entry["top"]
        if "vertex" in top:
            treks.append(KTrek(paths=paths, top_vertex=int(top["vertex"])))
        else:
            treks.append(KTrek(paths=paths, top_hyperedge=tuple(sorted(top["hyperedge"]))))
    return make_trek_system(treks, [tuple(s) for s in doc["side_endpoints"]])


def obstructions_to_doc(obstructions: Iterable[TopObstruction]) -> list[dict]:
    return [
        {"top": list(o.top), "blocked_side": o.blocked_side} for o in obstructions
    ]
