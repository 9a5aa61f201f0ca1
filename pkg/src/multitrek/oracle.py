"""The user-facing vanishing decision.

decide_vanishing answers: does det of the cumulant subtensor indexed by
S_1..S_k vanish on *every* model consistent with the graph?  It always
runs two independent routes and cross-checks them:

  * combinatorial — search for a trek system without sided
    intersection (a found system certifies generic non-vanishing);
  * algebraic — evaluate the determinant exactly at random rational
    instances (randomized mode; five zeros at a 997-value range makes a
    false "vanishes" call vanishingly unlikely), or expand it as a
    polynomial in the model parameters (certain mode).

How disagreements are treated depends on what is actually guaranteed:

  * a verified witness system with an exactly zero determinant is a
    hard InternalInconsistency at every order (after a symbolic
    recheck that rules out an unlucky randomized draw);
  * at order 2 absence of a system is equivalent to vanishing, so any
    disagreement there is likewise a hard InternalInconsistency;
  * at orders >= 3 absence of a system does NOT prove vanishing: on
    rare side configurations every system has a sided meeting yet the
    determinant is nonzero, because systems whose treks meet only on
    side 1 pick up the sign factor (-1)**(k-1) under the tail swap
    and fail to cancel when k is odd.  Such cases return NotVanishes
    (the algebraic record is decisive) with the obstruction log and an
    explicit "gap" marker in the certificate.  No order-4 instance of
    this has ever been observed; order-3 witnesses are pinned in the
    test suite.

Graphs with multidirected edges are decided through their canonical
DAG, whose latent parametrization is exactly the hidden-variable
model; certificates are re-expressed over the original vertices.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .cumulants import (
    sample_generic_instance,
    subtensor_determinant,
    symbolic_instance,
)
from .errors import InternalInconsistency
from .graphs import MixedGraph, canonical_dag, serialize_graph
from .polynomial import Poly
from .ser import canonical_json, frac_to_str
from .treks import (
    DEFAULT_BUDGET,
    TrekSearchResult,
    exists_trek_system_no_sided_intersection,
    find_sided_intersection,
    obstructions_to_doc,
    trek_system_from_doc,
    trek_system_to_doc,
)

VANISHES = "Vanishes"
NOT_VANISHES = "NotVanishes"

VALUE_RANGE = 997

GAP_NOTE = (
    "no intersection-free trek system exists, yet the determinant is "
    "nonzero: at orders >= 3 absence of a system is not sufficient for "
    "vanishing (systems meeting only on side 1 need not cancel), so the "
    "verdict follows the algebraic record"
)

EXIT_NOT_VANISHES = 0
EXIT_VANISHES = 10
EXIT_ERROR = 2


@dataclass(frozen=True)
class Decision:
    """Verdict plus certificates from both routes; serializes canonically."""

    verdict: str
    combinatorial_certificate: dict
    algebraic_record: tuple[dict, ...]
    mode: str
    graph_hash: str
    sides: tuple[tuple[int, ...], ...]
    order: int
    seed: int | None
    trials: int | None
    value_range: int | None

    def to_doc(self) -> dict:
        return {
            "verdict": self.verdict,
            "combinatorial_certificate": self.combinatorial_certificate,
            "algebraic_record": list(self.algebraic_record),
            "mode": self.mode,
            "graph_hash": self.graph_hash,
            "sides": [list(s) for s in self.sides],
            "order": self.order,
            "seed": self.seed,
            "trials": self.trials,
            "value_range": self.value_range,
        }

    def to_json(self) -> str:
        return canonical_json(self.to_doc())

    @property
    def exit_code(self) -> int:
        return EXIT_VANISHES if self.verdict == VANISHES else EXIT_NOT_VANISHES


def graph_hash(g: MixedGraph) -> str:
    return hashlib.sha256(serialize_graph(g).encode("utf-8")).hexdigest()


def instance_seed(seed: int, trial: int) -> int:
    """Deterministic per-trial seed derivation for the randomized mode."""
    return seed * 1_000_003 + trial + 1


def decide_vanishing(
    g: MixedGraph,
    sides: Sequence[Sequence[int]],
    mode: str = "randomized",
    seed: int | None = None,
    trials: int = 5,
    budget: int = DEFAULT_BUDGET,
) -> Decision:
    """Decide identical vanishing of det C^(k) over the sides (k = number of sides)."""
    side_lists = [tuple(side) for side in sides]
    k = len(side_lists)
    if k < 2:
        raise ValueError("need at least two sides")
    n = len(side_lists[0])
    if n == 0 or any(len(s) != n for s in side_lists):
        raise ValueError("sides must be nonempty and of equal size")
    vset = set(g.vertices)
    for s in side_lists:
        if any(v not in vset for v in s):
            raise ValueError(f"side {s} leaves the vertex set")
    if mode not in ("randomized", "certain"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "randomized" and seed is None:
        raise ValueError("randomized mode needs a seed")

    digest = graph_hash(g)

    if any(len(set(s)) != len(s) for s in side_lists):
        # Policy short-circuit: a side repeating a vertex is reported as
        # vanishing without algebraic evidence (at k = 2 the repeat truly
        # forces a zero determinant; the record stays empty by design).
        return Decision(
            verdict=VANISHES,
            combinatorial_certificate={"policy": "repeated vertex within a side"},
            algebraic_record=(),
            mode=mode,
            graph_hash=digest,
            sides=side_lists,
            order=k,
            seed=seed,
            trials=None,
            value_range=None,
        )

    search = exists_trek_system_no_sided_intersection(g, side_lists, budget)

    canon = canonical_dag(g)
    record: list[dict] = []
    algebraic_nonzero = False
    if mode == "randomized":
        for t in range(trials):
            child = instance_seed(seed, t)
            inst = sample_generic_instance(canon.dag, k, child)
            det = subtensor_determinant(canon.dag, inst, side_lists)
            det = Fraction(det)
            record.append({"seed": child, "determinant": frac_to_str(det)})
            if det:
                algebraic_nonzero = True
    else:
        inst = symbolic_instance(canon.dag, k)
        det = subtensor_determinant(canon.dag, inst, side_lists)
        if isinstance(det, Poly) and det:
            record.append({"seed": None, "determinant": f"nonzero-polynomial({det.n_terms} terms)"})
            algebraic_nonzero = True
        else:
            record.append({"seed": None, "determinant": "0"})

    if search.found and not algebraic_nonzero:
        # A verified witness system certifies a generically nonzero
        # determinant at every order.  Randomized draws can all land on
        # roots of a nonzero polynomial, so settle symbolically before
        # declaring the implementation inconsistent.
        if mode == "randomized":
            inst = symbolic_instance(canon.dag, k)
            det = subtensor_determinant(canon.dag, inst, side_lists)
            if isinstance(det, Poly) and det:
                record.append(
                    {"seed": None, "determinant": f"nonzero-polynomial({det.n_terms} terms)"}
                )
                algebraic_nonzero = True
        if not algebraic_nonzero:
            raise InternalInconsistency(
                "a witness trek system coexists with an exactly zero determinant: "
                f"graph={serialize_graph(g)}, sides={side_lists}"
            )

    gap = False
    if algebraic_nonzero and not search.found:
        if k == 2:
            # At order 2 absence of a system is equivalent to vanishing,
            # so this disagreement can only be an implementation fault.
            raise InternalInconsistency(
                "order-2 routes disagree: no trek system, nonzero determinant: "
                f"graph={serialize_graph(g)}, sides={side_lists}"
            )
        gap = True

    if search.found:
        certificate = {"trek_system": trek_system_to_doc(search.system)}
        verdict = NOT_VANISHES
    elif gap:
        certificate = {
            "obstructions": obstructions_to_doc(search.obstructions),
            "gap": GAP_NOTE,
        }
        verdict = NOT_VANISHES
    else:
        certificate = {"obstructions": obstructions_to_doc(search.obstructions)}
        verdict = VANISHES
    return Decision(
        verdict=verdict,
        combinatorial_certificate=certificate,
        algebraic_record=tuple(record),
        mode=mode,
        graph_hash=digest,
        sides=side_lists,
        order=k,
        seed=seed,
        trials=trials if mode == "randomized" else None,
        value_range=VALUE_RANGE if mode == "randomized" else None,
    )


def detect_common_cause(
    g: MixedGraph,
    indices: Sequence[int],
    mode: str = "randomized",
    seed: int | None = None,
    trials: int = 5,
    budget: int = DEFAULT_BUDGET,
) -> Decision:
    """Do the given variables share a cause?  decide_vanishing with singleton sides.

    The subtensor is 1 x ... x 1, so the determinant is the single
    cumulant entry: NotVanishes means the entry is generically nonzero,
    i.e. the variables admit a common cause (a trek joining them all).
    """
    if len(indices) < 2:
        raise ValueError("need at least two variables")
    return decide_vanishing(
        g, [(i,) for i in indices], mode=mode, seed=seed, trials=trials, budget=budget
    )


def certify_decision(g: MixedGraph, doc: dict, budget: int = DEFAULT_BUDGET) -> tuple[bool, str]:
    """Re-verify a stored Decision document against the graph.

    Checks the graph digest, replays the recorded algebraic evaluations
    seed by seed, and re-validates the combinatorial certificate (the
    witness system's paths, cover, and intersection-freeness — or, for
    a vanishing verdict, that the search still comes up empty).  A
    NotVanishes decision carrying a "gap" marker is re-verified by
    confirming both halves of the gap: the search still finds nothing
    and the determinant evidence is still nonzero.
    """
    digest = graph_hash(g)
    if doc.get("graph_hash") != digest:
        return False, "graph hash does not match"
    sides = [tuple(s) for s in doc.get("sides", [])]
    if not sides:
        return False, "decision cites no sides"
    verdict = doc.get("verdict")
    if verdict not in (VANISHES, NOT_VANISHES):
        return False, f"unknown verdict {verdict!r}"
    k = len(sides)

    certificate = doc.get("combinatorial_certificate", {})
    if "policy" in certificate:
        repeats = any(len(set(s)) != len(s) for s in sides)
        if verdict == VANISHES and repeats:
            return True, "policy short-circuit verified"
        return False, "policy certificate does not apply to these sides"

    if verdict == VANISHES and "gap" in certificate:
        return False, "vanishing verdict cannot carry a gap marker"

    canon = canonical_dag(g)
    replayed_nonzero = False
    for entry in doc.get("algebraic_record", []):
        child = entry.get("seed")
        recorded = entry.get("determinant")
        if child is None:
            if verdict == VANISHES and str(recorded).startswith("nonzero-polynomial"):
                return False, "vanishing verdict carries a nonzero determinant"
            continue  # symbolic entries are re-derived below where needed
        inst = sample_generic_instance(canon.dag, k, child)
        det = Fraction(subtensor_determinant(canon.dag, inst, sides))
        if frac_to_str(det) != recorded:
            return False, f"recorded determinant at seed {child} does not replay"
        if det:
            replayed_nonzero = True
        if verdict == VANISHES and det:
            return False, "vanishing verdict carries a nonzero determinant"

    if verdict == NOT_VANISHES and "gap" in certificate:
        if "obstructions" not in certificate:
            return False, "gap certificate is missing the obstruction log"
        if k == 2:
            return False, "gap certificate is impossible at order 2"
        gap_search = exists_trek_system_no_sided_intersection(g, sides, budget)
        if gap_search.found:
            return False, "a trek system without sided intersection exists after all"
        if not replayed_nonzero:
            det = subtensor_determinant(canon.dag, symbolic_instance(canon.dag, k), sides)
            if not (isinstance(det, Poly) and det):
                return False, "gap certificate carries no nonzero evidence"
        return True, "gap verified: no witness system, determinant nonzero"

    if verdict == NOT_VANISHES:
        if "trek_system" not in certificate:
            return False, "missing trek system certificate"
        try:
            system = trek_system_from_doc(certificate["trek_system"])
        except (KeyError, ValueError) as exc:
            return False, f"malformed trek system: {exc}"
        if tuple(system.side_endpoints) != tuple(sides):
            return False, "trek system endpoints do not match the decision sides"
        for trek in system.treks:
            for path in trek.paths:
                if not path.is_path_of(g):
                    return False, f"certificate path {list(path.vertices)} is not a path of the graph"
            if trek.top_hyperedge is not None and trek.top_hyperedge not in g.multidirected_edges:
                return False, f"certificate hyperedge {list(trek.top_hyperedge)} is not in the graph"
        if find_sided_intersection(system) is not None:
            return False, "certificate system has a sided intersection"
        if system.sign != certificate["trek_system"].get("sign"):
            return False, "stored sign does not match the recomputed sign"
        return True, "certificate verified"

    search: TrekSearchResult = exists_trek_system_no_sided_intersection(g, sides, budget)
    if search.found:
        return False, "a trek system without sided intersection exists after all"
    if k >= 3:
        # An empty search is not a proof of vanishing at these orders
        # (the blind spot), so re-derive the determinant exactly.
        det = subtensor_determinant(canon.dag, symbolic_instance(canon.dag, k), sides)
        if isinstance(det, Poly) and det:
            return False, "vanishing verdict but the determinant is a nonzero polynomial"
    return True, "vanishing re-verified"
