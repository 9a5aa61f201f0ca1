import copy
import json
import random
from fractions import Fraction

import pytest

from multitrek import (
    Decision,
    InternalInconsistency,
    MixedGraph,
    certify_decision,
    decide_vanishing,
    detect_common_cause,
    exists_trek_system_no_sided_intersection,
    graph_hash,
)
from multitrek.oracle import EXIT_NOT_VANISHES, EXIT_VANISHES, instance_seed
from multitrek.polynomial import Poly
from conftest import random_mixed, random_sides


def test_star_not_vanishes_both_modes(star):
    sides = ((1,), (2,), (3,))
    d = decide_vanishing(star, sides, mode="randomized", seed=3)
    assert d.verdict == "NotVanishes"
    assert d.exit_code == EXIT_NOT_VANISHES
    assert len(d.algebraic_record) == 5
    assert [e["seed"] for e in d.algebraic_record] == [
        instance_seed(3, t) for t in range(5)
    ]
    assert any(e["determinant"] != "0/1" for e in d.algebraic_record)
    assert "trek_system" in d.combinatorial_certificate

    c = decide_vanishing(star, sides, mode="certain")
    assert c.verdict == "NotVanishes"
    assert c.seed is None and c.trials is None and c.value_range is None
    assert c.algebraic_record[0]["seed"] is None
    assert c.algebraic_record[0]["determinant"].startswith("nonzero-polynomial(")


def test_collider_vanishes_both_modes(collider):
    sides = ((1,), (2,), (3,))
    d = decide_vanishing(collider, sides, mode="randomized", seed=3)
    assert d.verdict == "Vanishes"
    assert d.exit_code == EXIT_VANISHES
    assert all(e["determinant"] == "0/1" for e in d.algebraic_record)
    assert "obstructions" in d.combinatorial_certificate

    c = decide_vanishing(collider, sides, mode="certain")
    assert c.verdict == "Vanishes"
    assert c.algebraic_record == ({"seed": None, "determinant": "0"},)


def test_repeated_vertex_side_policy(chain2):
    d = decide_vanishing(chain2, ((1, 1), (1, 2)), mode="randomized", seed=0)
    assert d.verdict == "Vanishes"
    assert d.combinatorial_certificate == {"policy": "repeated vertex within a side"}
    assert d.algebraic_record == ()
    ok, reason = certify_decision(chain2, d.to_doc())
    assert ok, reason


def test_decide_validation(chain2):
    with pytest.raises(ValueError):
        decide_vanishing(chain2, (((1,)),))
    with pytest.raises(ValueError):
        decide_vanishing(chain2, ((1,), (1, 2)), seed=0)
    with pytest.raises(ValueError):
        decide_vanishing(chain2, ((), ()), seed=0)
    with pytest.raises(ValueError):
        decide_vanishing(chain2, ((1,), (9,)), seed=0)
    with pytest.raises(ValueError):
        decide_vanishing(chain2, ((1,), (2,)), mode="guess", seed=0)
    with pytest.raises(ValueError):
        decide_vanishing(chain2, ((1,), (2,)), mode="randomized")


def test_graph_hash_distinguishes(star, collider):
    assert graph_hash(star) == graph_hash(star)
    assert graph_hash(star) != graph_hash(collider)
    assert len(graph_hash(star)) == 64


def test_decision_json_deterministic(star):
    a = decide_vanishing(star, ((1,), (2,)), seed=11)
    b = decide_vanishing(star, ((1,), (2,)), seed=11)
    assert a == b
    assert a.to_json() == b.to_json()
    doc = json.loads(a.to_json())
    assert doc["verdict"] == "NotVanishes"
    assert doc["order"] == 2
    assert doc["value_range"] == 997


def test_detect_common_cause_wraps(star):
    d = detect_common_cause(star, (1, 2, 3), seed=4)
    e = decide_vanishing(star, ((1,), (2,), (3,)), seed=4)
    assert d == e
    with pytest.raises(ValueError):
        detect_common_cause(star, (1,), seed=4)


def test_certify_round_trips(star, collider, latent_triple):
    d = decide_vanishing(star, ((1,), (2,), (3,)), seed=5)
    assert certify_decision(star, d.to_doc()) == (True, "certificate verified")

    v = decide_vanishing(collider, ((1,), (2,), (3,)), seed=5)
    assert certify_decision(collider, v.to_doc()) == (True, "vanishing re-verified")

    m = decide_vanishing(latent_triple, ((1,), (2,), (3,)), seed=5)
    assert m.verdict == "NotVanishes"
    ok, reason = certify_decision(latent_triple, m.to_doc())
    assert ok, reason

    # round trip through JSON too
    assert certify_decision(star, json.loads(d.to_json()))[0]


def test_certify_rejects_tampering(star, collider):
    d = decide_vanishing(star, ((1,), (2,), (3,)), seed=6)
    doc = d.to_doc()

    assert certify_decision(collider, doc) == (False, "graph hash does not match")

    bad = copy.deepcopy(doc)
    bad["algebraic_record"][0]["determinant"] = "1/2"
    ok, reason = certify_decision(star, bad)
    assert not ok and "does not replay" in reason

    bad = copy.deepcopy(doc)
    bad["verdict"] = "Vanishes"
    ok, reason = certify_decision(star, bad)
    assert not ok and "nonzero determinant" in reason

    bad = copy.deepcopy(doc)
    del bad["combinatorial_certificate"]["trek_system"]
    ok, reason = certify_decision(star, bad)
    assert not ok and "missing trek system" in reason

    bad = copy.deepcopy(doc)
    bad["combinatorial_certificate"]["trek_system"]["treks"][0]["paths"][0] = [3, 1]
    ok, reason = certify_decision(star, bad)
    assert not ok

    bad = copy.deepcopy(doc)
    bad["combinatorial_certificate"]["trek_system"]["sign"] = -d.combinatorial_certificate[
        "trek_system"
    ]["sign"]
    ok, reason = certify_decision(star, bad)
    assert not ok and "sign" in reason

    bad = copy.deepcopy(doc)
    bad["verdict"] = "Maybe"
    ok, reason = certify_decision(star, bad)
    assert not ok and "unknown verdict" in reason


def test_modes_agree_on_random_graphs():
    rng = random.Random(61)
    for _ in range(20):
        g = random_mixed(rng, max_vertices=5, edge_prob=0.4, max_hyperedges=1)
        k = rng.randint(2, 3)
        n = rng.randint(1, 2)
        sides = random_sides(rng, g, k, n)
        rand = decide_vanishing(g, sides, mode="randomized", seed=rng.getrandbits(16))
        cert = decide_vanishing(g, sides, mode="certain")
        assert rand.verdict == cert.verdict
        search = exists_trek_system_no_sided_intersection(g, sides)
        if "gap" in rand.combinatorial_certificate:
            assert rand.verdict == "NotVanishes" and not search.found
        else:
            assert (rand.verdict == "NotVanishes") == search.found
        ok, reason = certify_decision(g, rand.to_doc())
        assert ok, reason


# Five-vertex witness of the odd-order blind spot: no intersection-free
# trek system exists between these sides, yet the order-3 determinant is
# the nonzero monomial 2*e3_2*e3_3*l2_3*l3_4^2.
GAP_GRAPH = MixedGraph((1, 2, 3, 4, 5), ((2, 3), (2, 5), (3, 4), (3, 5)))
GAP_SIDES = ((3, 4), (2, 3), (2, 4))


def test_blind_spot_returns_gap_decision():
    search = exists_trek_system_no_sided_intersection(GAP_GRAPH, GAP_SIDES)
    assert not search.found

    for mode, seed in (("randomized", 5), ("certain", None)):
        d = decide_vanishing(GAP_GRAPH, GAP_SIDES, mode=mode, seed=seed)
        assert d.verdict == "NotVanishes"
        assert d.exit_code == EXIT_NOT_VANISHES
        assert "gap" in d.combinatorial_certificate
        assert "obstructions" in d.combinatorial_certificate
        assert "trek_system" not in d.combinatorial_certificate

    r = decide_vanishing(GAP_GRAPH, GAP_SIDES, mode="randomized", seed=5)
    assert all(e["determinant"] != "0/1" for e in r.algebraic_record)


def test_gap_certify_round_trip_and_tampering():
    d = decide_vanishing(GAP_GRAPH, GAP_SIDES, mode="certain")
    ok, reason = certify_decision(GAP_GRAPH, d.to_doc())
    assert ok and "gap verified" in reason

    r = decide_vanishing(GAP_GRAPH, GAP_SIDES, mode="randomized", seed=8)
    ok, reason = certify_decision(GAP_GRAPH, json.loads(r.to_json()))
    assert ok and "gap verified" in reason

    bad = copy.deepcopy(d.to_doc())
    del bad["combinatorial_certificate"]["obstructions"]
    ok, reason = certify_decision(GAP_GRAPH, bad)
    assert not ok and "obstruction log" in reason

    bad = copy.deepcopy(d.to_doc())
    bad["verdict"] = "Vanishes"
    ok, reason = certify_decision(GAP_GRAPH, bad)
    assert not ok

    # a gap marker smuggled into an order-2 decision must be rejected
    star = MixedGraph((0, 1, 2), ((0, 1), (0, 2)))
    two = decide_vanishing(star, ((1,), (2,)), mode="certain")
    bad = copy.deepcopy(two.to_doc())
    bad["combinatorial_certificate"] = {
        "gap": "forged",
        "obstructions": [],
    }
    ok, reason = certify_decision(star, bad)
    assert not ok and "order 2" in reason


def test_order2_disagreement_raises(monkeypatch):
    import multitrek.oracle as oracle_module

    g = MixedGraph((1, 2), ())  # no treks between 1 and 2 at all
    monkeypatch.setattr(
        oracle_module, "subtensor_determinant", lambda g_, inst, sides: Fraction(1)
    )
    with pytest.raises(InternalInconsistency, match="order-2"):
        decide_vanishing(g, ((1,), (2,)), mode="randomized", seed=1)


def test_witness_with_zero_determinant_raises(monkeypatch, star):
    import multitrek.oracle as oracle_module

    monkeypatch.setattr(
        oracle_module, "subtensor_determinant", lambda g_, inst, sides: Fraction(0)
    )
    for mode, seed in (("randomized", 2), ("certain", None)):
        with pytest.raises(InternalInconsistency, match="witness trek system"):
            decide_vanishing(star, ((1,), (2,), (3,)), mode=mode, seed=seed)


def test_randomized_fluke_resolved_symbolically(monkeypatch, star):
    # all randomized draws read zero, but the symbolic recheck sees the
    # truth: the decision stands and records the recheck entry
    import multitrek.oracle as oracle_module

    real = oracle_module.subtensor_determinant

    def zero_for_rational_instances(g_, inst, sides):
        det = real(g_, inst, sides)
        return det if isinstance(det, Poly) else Fraction(0)

    monkeypatch.setattr(
        oracle_module, "subtensor_determinant", zero_for_rational_instances
    )
    d = decide_vanishing(star, ((1,), (2,), (3,)), mode="randomized", seed=9)
    assert d.verdict == "NotVanishes"
    assert "trek_system" in d.combinatorial_certificate
    assert d.algebraic_record[-1]["seed"] is None
    assert d.algebraic_record[-1]["determinant"].startswith("nonzero-polynomial(")
    assert all(e["determinant"] == "0/1" for e in d.algebraic_record[:-1])
