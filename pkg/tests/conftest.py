"""Shared fixtures and brute-force oracles for the test-suite.

The oracles here (path enumeration, permutation-expansion determinants,
disjoint path systems) are deliberately independent re-implementations:
they exist to cross-check the package, so they must not call into the
routines they validate.
"""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

import pytest

from multitrek import MixedGraph

# -- frozen graphs ---------------------------------------------------------


@pytest.fixture
def two_root_dag() -> MixedGraph:
    # Two independent roots with overlapping descendant sets; vertex 3 is
    # intentionally absent so ids and dense positions differ.
    return MixedGraph(
        vertices=(1, 2, 4, 5, 6, 7, 8),
        directed_edges=((1, 4), (1, 6), (1, 7), (2, 6), (2, 8), (4, 5)),
    )


@pytest.fixture
def star() -> MixedGraph:
    return MixedGraph(vertices=(0, 1, 2, 3), directed_edges=((0, 1), (0, 2), (0, 3)))


@pytest.fixture
def collider() -> MixedGraph:
    return MixedGraph(vertices=(1, 2, 3), directed_edges=((1, 3), (2, 3)))


@pytest.fixture
def chain2() -> MixedGraph:
    return MixedGraph(vertices=(1, 2), directed_edges=((1, 2),))


@pytest.fixture
def latent_triple() -> MixedGraph:
    # One order-3 multidirected edge; third cross-cumulant is non-zero.
    return MixedGraph(vertices=(1, 2, 3), multidirected_edges=((1, 2, 3),))


@pytest.fixture
def pairwise_triple() -> MixedGraph:
    # Pairwise multidirected edges only; third cross-cumulant vanishes.
    return MixedGraph(
        vertices=(1, 2, 3), multidirected_edges=((1, 2), (1, 3), (2, 3))
    )


@pytest.fixture
def menger_gap() -> tuple[MixedGraph, tuple[tuple[int, ...], ...]]:
    """Graph + sides where the order-3 determinant vanishes yet no
    blocking tuple of total size <= n-1 = 1 exists (found by search,
    then frozen; both decision modes confirm the vanishing)."""
    g = MixedGraph(
        vertices=(1, 2, 3, 4, 5, 6),
        directed_edges=((1, 4), (1, 5), (2, 4), (2, 5), (3, 5), (5, 6)),
    )
    return g, ((3, 4), (1, 6), (2, 5))


@pytest.fixture
def factorization_dag() -> MixedGraph:
    # det N^(4)_{1,2,3,4} = 0 and det N^(2)_{1,2} = 0 while
    # det N^(2)_{3,4} != 0: the order-4 vanishing factors through a
    # lower-order vanishing on one complementary pair of sides.
    return MixedGraph(vertices=(1, 2, 3, 4, 5), directed_edges=((5, 3), (5, 4)))


# -- random generators -----------------------------------------------------


def random_dag(
    rng: random.Random,
    max_vertices: int = 8,
    edge_prob: float = 0.5,
    min_vertices: int = 2,
) -> MixedGraph:
    p = rng.randint(min_vertices, max_vertices)
    vs = tuple(range(1, p + 1))
    edges = tuple(
        (a, b) for a, b in itertools.combinations(vs, 2) if rng.random() < edge_prob
    )
    return MixedGraph(vertices=vs, directed_edges=edges)


def random_mixed(
    rng: random.Random,
    max_vertices: int = 7,
    edge_prob: float = 0.4,
    max_hyperedges: int = 2,
    max_hyper_order: int = 4,
) -> MixedGraph:
    g = random_dag(rng, max_vertices=max_vertices, edge_prob=edge_prob)
    hyper = []
    for _ in range(rng.randint(0, max_hyperedges)):
        size = rng.randint(2, min(max_hyper_order, len(g.vertices)))
        hyper.append(tuple(sorted(rng.sample(g.vertices, size))))
    return MixedGraph(
        vertices=g.vertices,
        directed_edges=g.directed_edges,
        multidirected_edges=tuple(hyper),
    )


def random_sides(
    rng: random.Random, g: MixedGraph, k: int, n: int
) -> tuple[tuple[int, ...], ...]:
    return tuple(tuple(sorted(rng.sample(g.vertices, n))) for _ in range(k))


# -- independent oracles ---------------------------------------------------


def all_paths(g: MixedGraph, u: int, v: int) -> list[tuple[int, ...]]:
    """Every directed path u -> v by naive DFS (trivial path included)."""
    adj: dict[int, list[int]] = {a: [] for a in g.vertices}
    for a, b in g.directed_edges:
        adj[a].append(b)
    out: list[tuple[int, ...]] = []

    def walk(path: list[int]) -> None:
        if path[-1] == v:
            out.append(tuple(path))
        for w in adj[path[-1]]:
            walk(path + [w])

    walk([u])
    return out


def perm_sign_by_inversions(perm: tuple[int, ...]) -> int:
    inv = sum(
        1
        for i in range(len(perm))
        for j in range(i + 1, len(perm))
        if perm[i] > perm[j]
    )
    return -1 if inv % 2 else 1


def det_by_permutation_expansion(rows: list[list[Fraction]]) -> Fraction:
    n = len(rows)
    total = Fraction(0)
    for perm in itertools.permutations(range(n)):
        term = Fraction(perm_sign_by_inversions(perm))
        for i in range(n):
            term *= rows[i][perm[i]]
        total += term
    return total


def minor_det_by_path_systems(
    g: MixedGraph,
    lam: dict[tuple[int, int], Fraction],
    rows: tuple[int, ...],
    cols: tuple[int, ...],
) -> Fraction:
    """Signed sum over vertex-disjoint path systems rows -> cols.

    Brute force over all path combinations; the oracle for the
    path-matrix minor identity.
    """
    n = len(rows)
    total = Fraction(0)
    for perm in itertools.permutations(range(n)):
        sign = perm_sign_by_inversions(perm)
        pools = [all_paths(g, rows[i], cols[perm[i]]) for i in range(n)]
        for combo in itertools.product(*pools):
            seen: set[int] = set()
            disjoint = True
            for path in combo:
                for x in path:
                    if x in seen:
                        disjoint = False
                        break
                    seen.add(x)
                if not disjoint:
                    break
            if not disjoint:
                continue
            weight = Fraction(sign)
            for path in combo:
                for a, b in zip(path, path[1:]):
                    weight *= lam[(a, b)]
            total += weight
    return total


# -- acceptance reporting --------------------------------------------------

ACCEPTANCE_LINES: list[str] = []


def record_acceptance(line: str) -> None:
    ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
