"""Parametrized cumulant tensors of a linear structural equation model.

An instance assigns a rational weight to every directed edge and noise
cumulants per order: diagonal values per vertex, plus (for mixed
graphs) entries on index multisets supported by a hyperedge.  The
order-k cumulant tensor of the observed vector is the noise tensor
pushed through the k-fold Tucker product with (I - Lambda)^{-1}, whose
(j, i) entry is the sum of path monomials from j to i.

Everything here is ring-generic: values may be Fractions or the sparse
polynomials from .polynomial, which is how the symbolic ("certain")
vanishing checks reuse the same code paths.
"""

from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .errors import BudgetExceeded, MissingOrder, SchemaError
from .graphs import MixedGraph, validate_acyclic
from .polynomial import Poly
from .ser import frac_from_str, frac_to_str
from .tensors import RATIONAL, DiagonalSpec, Tensor, hyperdet_from_getter, perm_sign
from .treks import DEFAULT_BUDGET, KTrek, enumerate_ktreks, sided_intersection_of_paths


def _coerce_scalar(x):
    """Fractions stay exact; ints/strings are parsed; ring elements pass through."""
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    if isinstance(x, str):
        return frac_from_str(x)
    return x


@dataclass(frozen=True)
class HyperedgeSpec:
    """Off-diagonal noise entries keyed by sorted index multisets.

    Keys must not be all-equal (those live in the diagonal spec); the
    tensor value at any permutation of a key is the stored value, so
    symmetry holds by construction.
    """

    entries: Mapping[tuple[int, ...], object] = field(default_factory=dict)

    def __post_init__(self) -> None:
        clean = {}
        for key, val in self.entries.items():
            tup = tuple(sorted(int(i) for i in key))
            if len(set(tup)) < 2:
                raise ValueError(f"all-equal multiset {tup} belongs in the diagonal spec")
            clean[tup] = _coerce_scalar(val)
        object.__setattr__(self, "entries", dict(sorted(clean.items())))


@dataclass(frozen=True)
class NoiseCumulants:
    """Noise cumulants of one order: diagonal part plus hyperedge part."""

    diag: DiagonalSpec
    hyper: HyperedgeSpec = field(default_factory=HyperedgeSpec)


@dataclass(frozen=True)
class ModelInstance:
    """Edge weights plus noise cumulants per order."""

    lam: Mapping[tuple[int, int], object]
    noise: Mapping[int, NoiseCumulants]

    def __post_init__(self) -> None:
        lam = {
            (int(u), int(v)): _coerce_scalar(x)
            for (u, v), x in sorted(self.lam.items())
        }
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "noise", {int(k): v for k, v in sorted(self.noise.items())})

    def noise_at(self, order: int) -> NoiseCumulants:
        if order not in self.noise:
            raise MissingOrder(f"no noise cumulants at order {order}")
        return self.noise[order]


def validate_instance(g: MixedGraph, inst: ModelInstance) -> None:
    """Check supports: lambda on edges, hyper keys inside some hyperedge."""
    edges = set(g.directed_edges)
    for e in inst.lam:
        if e not in edges:
            raise ValueError(f"lambda entry {e} is not a directed edge of the graph")
    vset = set(g.vertices)
    hsets = [set(h) for h in g.multidirected_edges]
    for order, nc in inst.noise.items():
        for v in nc.diag.values:
            if v not in vset:
                raise ValueError(f"diagonal noise at unknown vertex {v}")
        for key in nc.hyper.entries:
            if len(key) != order:
                raise ValueError(f"hyper key {key} has size {len(key)}, expected {order}")
            if not any(set(key) <= hs for hs in hsets):
                raise ValueError(f"hyper key {key} is not supported by any hyperedge")


# -- path matrix -----------------------------------------------------------


def path_matrix(g: MixedGraph, lam: Mapping[tuple[int, int], object]) -> list[list]:
    """(I - Lambda)^{-1} as path sums: entry (j, i) sums weight products over paths j -> i.

    Computed by dynamic programming over the topological order, so no
    path enumeration; works for any scalar ring (rationals, floats,
    polynomials).
    """
    edges = set(g.directed_edges)
    for e in lam:
        if tuple(e) not in edges:
            raise ValueError(f"lambda entry {e} is not a directed edge of the graph")
    order = validate_acyclic(g)
    idx = {v: i for i, v in enumerate(g.vertices)}
    p = len(g.vertices)
    m: list[list] = [[0] * p for _ in range(p)]
    for i in range(p):
        m[i][i] = 1
    children = g.adjacency()
    for v in reversed(order):
        j = idx[v]
        for c in children[v]:
            w = lam.get((v, c), 0)
            if not w:
                continue
            row_c = m[idx[c]]
            row_j = m[j]
            for i in range(p):
                if row_c[i]:
                    row_j[i] = row_j[i] + w * row_c[i]
    return m


# -- cumulant assembly -----------------------------------------------------


def noise_support(g: MixedGraph, inst: ModelInstance, order: int) -> dict[tuple[int, ...], object]:
    """Nonzero noise entries at full index tuples (all permutations filled in)."""
    nc = inst.noise_at(order)
    full: dict[tuple[int, ...], object] = {}
    for v, val in nc.diag.values.items():
        if val:
            full[(v,) * order] = val
    for key, val in nc.hyper.entries.items():
        if not val:
            continue
        for perm in set(itertools.permutations(key)):
            full[perm] = val
    return full


def model_cumulant(g: MixedGraph, inst: ModelInstance, order: int) -> Tensor:
    """Order-k cumulant tensor of the observed vector; exact and symmetric."""
    validate_instance(g, inst)
    m = path_matrix(g, inst.lam)
    support = noise_support(g, inst, order)
    idx = {v: i for i, v in enumerate(g.vertices)}
    p = len(g.vertices)
    values: dict[tuple[int, ...], object] = {}
    for key in itertools.combinations_with_replacement(range(p), order):
        values[key] = _tucker_entry(support, m, idx, key)
    entries = [
        values[tuple(sorted(pos))]
        for pos in itertools.product(range(p), repeat=order)
    ]
    return Tensor.of([p] * order, entries, RATIONAL)


def _tucker_entry(
    support: Mapping[tuple[int, ...], object],
    m: list[list],
    idx: Mapping[int, int],
    positions: tuple[int, ...],
) -> object:
    total = 0
    for jtuple, val in support.items():
        term = val
        for j, i in zip(jtuple, positions):
            factor = m[idx[j]][i]
            if not factor:
                term = 0
                break
            term = term * factor
        total = total + term
    return total


def cumulant_entry(
    g: MixedGraph,
    inst: ModelInstance,
    indices: Sequence[int],
    _cache: dict | None = None,
) -> object:
    """Single cumulant entry by the Tucker route (vertex ids, not positions)."""
    if _cache is None:
        _cache = {}
    if "m" not in _cache:
        validate_instance(g, inst)
        _cache["m"] = path_matrix(g, inst.lam)
        _cache["idx"] = {v: i for i, v in enumerate(g.vertices)}
    order = len(indices)
    if ("support", order) not in _cache:
        _cache[("support", order)] = noise_support(g, inst, order)
    key = tuple(sorted(_cache["idx"][v] for v in indices))
    memo = _cache.setdefault(("entries", order), {})
    if key not in memo:
        memo[key] = _tucker_entry(_cache[("support", order)], _cache["m"], _cache["idx"], key)
    return memo[key]


# -- trek-rule routes -------------------------------------------------------


def trek_monomial(inst: ModelInstance, trek: KTrek) -> object:
    """E at the trek's sources times the product of its path weights."""
    term = noise_entry(inst, len(trek.paths), trek.sources)
    if not term:
        return 0
    for path in trek.paths:
        for a, b in zip(path.vertices, path.vertices[1:]):
            w = inst.lam.get((a, b), 0)
            if not w:
                return 0
            term = term * w
    return term


def noise_entry(inst: ModelInstance, order: int, indices: Sequence[int]) -> object:
    """Noise tensor entry at an arbitrary index tuple (diagonal or hyperedge)."""
    nc = inst.noise_at(order)
    key = tuple(sorted(indices))
    if len(set(key)) == 1:
        return nc.diag.values.get(key[0], Fraction(0))
    return nc.hyper.entries.get(key, Fraction(0))


def cumulant_entry_by_trek_rule(
    g: MixedGraph,
    inst: ModelInstance,
    indices: Sequence[int],
    budget: int = DEFAULT_BUDGET,
) -> object:
    """Cumulant entry as a sum of monomials over all k-treks into the indices.

    Must agree with the Tucker route exactly; that agreement is one of
    the package's core self-tests.
    """
    total = 0
    for trek in enumerate_ktreks(g, tuple(indices), budget):
        total = total + trek_monomial(inst, trek)
    return total


def det_by_trek_systems(
    g: MixedGraph,
    inst: ModelInstance,
    sides: Sequence[Sequence[int]],
    budget: int = DEFAULT_BUDGET,
    open_first_side: bool = False,
) -> object:
    """Subtensor determinant as a signed sum over filtered trek systems.

    Sides are ordered lists of distinct vertices.  Each admitted system
    of n treks contributes its permutation sign times the product of
    its treks' monomials.

    With ``open_first_side=False`` the sum ranges over systems with no
    sided intersection anywhere (the certificate objects used by the
    vanishing oracle).  That sum equals the determinant of the ordered
    cumulant subtensor at every even order: swapping two path tails at
    a shared vertex of side i >= 2 negates exactly one of the k-1
    permutation signs, so those systems cancel in pairs, and a tail
    swap on side 1 re-sorts the row alignment, which multiplies the
    sign by (-1)**(k-1) and cancels the side-1 meetings as well when k
    is even.  At odd orders >= 3 that last factor is +1, systems whose
    only meetings lie on side 1 can survive, and the fully filtered
    sum may differ from the determinant (see the pinned witness in the
    test suite).

    With ``open_first_side=True`` the intersection filter is applied
    to sides 2..k only.  This sum equals the subtensor determinant at
    every order and is the exact expansion this package relies on.
    """
    if g.multidirected_edges:
        # The sided-intersection-free restriction is a DAG identity; with
        # free hyperedge noise entries the skipped systems need not cancel.
        raise ValueError(
            "det_by_trek_systems needs a DAG; reduce with canonical_dag first"
        )
    side_lists = [list(s) for s in sides]
    k = len(side_lists)
    if k < 2:
        raise ValueError("need at least two sides")
    n = len(side_lists[0])
    if any(len(s) != n for s in side_lists):
        raise ValueError("sides must have equal size")
    if any(len(set(s)) != len(s) for s in side_lists):
        raise ValueError("sides must consist of distinct vertices")
    if n == 0:
        return Fraction(1)

    trek_cache: dict[tuple[int, ...], list[KTrek]] = {}

    def treks_into(sinks: tuple[int, ...]) -> list[KTrek]:
        if sinks not in trek_cache:
            trek_cache[sinks] = enumerate_ktreks(g, sinks, budget)
        return trek_cache[sinks]

    total = 0
    count = 0
    perms = list(itertools.permutations(range(n)))
    for combo in itertools.product(perms, repeat=k - 1):
        sign = 1
        for p in combo:
            sign *= perm_sign(p)
        sink_tuples = [
            (side_lists[0][j],) + tuple(side_lists[i + 1][combo[i][j]] for i in range(k - 1))
            for j in range(n)
        ]
        pools = [treks_into(t) for t in sink_tuples]
        if any(not pool for pool in pools):
            continue
        for system in itertools.product(*pools):
            count += 1
            if count > budget:
                raise BudgetExceeded("trek-system candidates", budget)
            paths_by_side = [[trek.paths[i] for trek in system] for i in range(k)]
            filtered = paths_by_side[1:] if open_first_side else paths_by_side
            if sided_intersection_of_paths(filtered) is not None:
                continue
            term = 1
            for trek in system:
                term = term * trek_monomial(inst, trek)
                if not term:
                    break
            if not term:
                continue
            total = total + (term if sign > 0 else -term)
    return total if not isinstance(total, int) else Fraction(total)


# -- generic instances ------------------------------------------------------


def sample_generic_instance(g: MixedGraph, k_max: int, rng_seed: int) -> ModelInstance:
    """Random instance for polynomial identity testing; deterministic per seed.

    Edge weights and noise values are nonzero rationals +-1..+-997.
    Diagonal noise covers every vertex at orders 2..k_max; hyperedge
    noise covers every admissible multiset of each hyperedge.
    """
    if k_max < 2:
        raise ValueError("k_max must be >= 2")
    rng = random.Random(rng_seed)

    def draw() -> Fraction:
        magnitude = rng.randint(1, 997)
        return Fraction(magnitude if rng.random() < 0.5 else -magnitude)

    lam = {e: draw() for e in g.directed_edges}
    noise = {}
    for order in range(2, k_max + 1):
        diag = {v: draw() for v in g.vertices}
        hyper: dict[tuple[int, ...], Fraction] = {}
        for h in g.multidirected_edges:
            for key in itertools.combinations_with_replacement(sorted(set(h)), order):
                if len(set(key)) >= 2 and key not in hyper:
                    hyper[key] = draw()
        noise[order] = NoiseCumulants(diag=DiagonalSpec(diag), hyper=HyperedgeSpec(hyper))
    return ModelInstance(lam=lam, noise=noise)


def symbolic_instance(g: MixedGraph, k_max: int) -> ModelInstance:
    """Instance whose values are independent polynomial variables.

    Used by the certain decision mode: a determinant vanishes on the
    whole model iff it is the zero polynomial in these variables.
    """
    lam = {(u, v): Poly.var(f"l{u}_{v}") for u, v in g.directed_edges}
    noise = {}
    for order in range(2, k_max + 1):
        diag = {v: Poly.var(f"e{order}_{v}") for v in g.vertices}
        hyper: dict[tuple[int, ...], Poly] = {}
        for h in g.multidirected_edges:
            for key in itertools.combinations_with_replacement(sorted(set(h)), order):
                if len(set(key)) >= 2 and key not in hyper:
                    name = "e" + str(order) + "_" + "_".join(str(i) for i in key)
                    hyper[key] = Poly.var(name)
        noise[order] = NoiseCumulants(diag=DiagonalSpec(diag), hyper=HyperedgeSpec(hyper))
    return ModelInstance(lam=lam, noise=noise)


def subtensor_determinant(
    g: MixedGraph,
    inst: ModelInstance,
    sides: Sequence[Sequence[int]],
) -> object:
    """det of the cumulant subtensor at the instance, entries computed on demand."""
    side_lists = [list(s) for s in sides]
    order = len(side_lists)
    n = len(side_lists[0])
    cache: dict = {}

    def entry(pos: tuple[int, ...]) -> object:
        vertices = tuple(side_lists[m][i] for m, i in enumerate(pos))
        return cumulant_entry(g, inst, vertices, cache)

    return hyperdet_from_getter(n, order, entry, one=Fraction(1))


# -- JSON interface ---------------------------------------------------------


def instance_to_json(inst: ModelInstance) -> str:
    lam = {f"{u}->{v}": frac_to_str(Fraction(x)) for (u, v), x in inst.lam.items()}
    noise: dict[str, dict] = {}
    for order, nc in inst.noise.items():
        entry: dict[str, dict] = {
            "diag": {str(v): frac_to_str(Fraction(x)) for v, x in nc.diag.values.items()}
        }
        if nc.hyper.entries:
            entry["hyper"] = {
                json.dumps(list(key), separators=(",", ":")): frac_to_str(Fraction(x))
                for key, x in nc.hyper.entries.items()
            }
        noise[str(order)] = entry
    return json.dumps({"lambda": lam, "noise": noise}, sort_keys=True, separators=(",", ":"))


def instance_from_json(text: str) -> ModelInstance:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError("/", f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "lambda" not in doc or "noise" not in doc:
        raise SchemaError("/", 'expected keys "lambda" and "noise"')
    lam = {}
    for key, val in doc["lambda"].items():
        try:
            u, v = key.split("->")
            lam[(int(u), int(v))] = frac_from_str(val, f"/lambda/{key}")
        except ValueError as exc:
            raise SchemaError(f"/lambda/{key}", "expected 'u->v' key") from exc
    noise = {}
    for order_key, nc_doc in doc["noise"].items():
        try:
            order = int(order_key)
        except ValueError as exc:
            raise SchemaError(f"/noise/{order_key}", "order must be an integer") from exc
        if not isinstance(nc_doc, dict) or "diag" not in nc_doc:
            raise SchemaError(f"/noise/{order_key}", 'expected key "diag"')
        diag = {
            int(v): frac_from_str(x, f"/noise/{order_key}/diag/{v}")
            for v, x in nc_doc["diag"].items()
        }
        hyper = {}
        for hkey, x in nc_doc.get("hyper", {}).items():
            try:
                key_list = json.loads(hkey)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"/noise/{order_key}/hyper/{hkey}", "bad multiset key") from exc
            hyper[tuple(key_list)] = frac_from_str(x, f"/noise/{order_key}/hyper/{hkey}")
        noise[order] = NoiseCumulants(diag=DiagonalSpec(diag), hyper=HyperedgeSpec(hyper))
    return ModelInstance(lam=lam, noise=noise)
