import random
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from potx import load
from potx.errors import (CyclicModel, OpaqueQuery, TooLarge, UnknownValue,
                         ZeroProbabilityEvidence)
from potx.inference import Factor, brute_force_joint, infer, network_order

import gen

ROOT = Path(__file__).resolve().parents[1]
CHAIN = load((ROOT / "corpus" / "chain.potx").read_text())
FIG2 = load((ROOT / "corpus" / "fig2.potx").read_text())

IDENTITY_CHAIN = load("""system identity {
  state A physical domain { low, high }
  state B physical domain { low, high }
  model M { in: A; out: B }
  observer o level 2 { covers: A, M; }
  cpt A { row () -> { low: 0.5, high: 0.5 } }
  cpt M { row (low) -> { low: 1, high: 0 } row (high) -> { low: 0, high: 1 } }
}""")


def close(dist, expected, tol=1e-9):
    return dist.keys() == expected.keys() and all(abs(dist[k] - expected[k]) <= tol for k in dist)


def hand_enumeration():
    # independent of the package: sum the 4-outcome joint directly
    prior = {"low": 0.3, "high": 0.7}
    table = {"low": {"low": 0.9, "high": 0.1}, "high": {"low": 0.2, "high": 0.8}}
    return {b: sum(prior[a] * table[a][b] for a in prior) for b in ("low", "high")}


def test_chain_marginal_matches_hand_enumeration():
    expected = hand_enumeration()
    assert close(expected, {"low": 0.41, "high": 0.59})
    assert close(infer(CHAIN, CHAIN.observers, {}, "B"), expected)
    assert close(brute_force_joint(CHAIN, {}, "B"), expected)


def test_identity_chain_with_evidence():
    assert close(infer(IDENTITY_CHAIN, ["o"], {"A": "low"}, "B"), {"low": 1.0, "high": 0.0})


def test_backward_query():
    # Bayes on the chain: P(A=low | B=high) = 0.03 / 0.59
    dist = infer(CHAIN, ["analyst"], {"B": "high"}, "A")
    assert dist["low"] == pytest.approx(0.03 / 0.59, abs=1e-12)


def test_opaque_query_under_g_only():
    with pytest.raises(OpaqueQuery) as info:
        infer(FIG2, ["g"], {}, "work_engagement")
    assert info.value.node == "work_engagement"


def test_opaque_ancestor_blocks_query():
    # work_engagement is visible through h, but its parents need g and i
    with pytest.raises(OpaqueQuery) as info:
        infer(FIG2, ["h"], {}, "work_engagement")
    assert info.value.node in {"fatigue_bridge", "physiological_fatigue", "fatigue_model"}


def test_fig2_full_stack():
    dist = infer(FIG2, FIG2.observers, {}, "work_engagement")
    assert close(dist, brute_force_joint(FIG2, {}, "work_engagement"))


def test_evidence_fixing_every_state_is_degenerate():
    evidence = {"A": "high", "B": "low"}
    assert close(brute_force_joint(CHAIN, evidence, "B"), {"low": 1.0, "high": 0.0})
    assert close(infer(CHAIN, ["analyst"], evidence, "B"), {"low": 1.0, "high": 0.0})


def test_zero_mass_evidence():
    evidence = {"A": "low", "B": "low"}
    with pytest.raises(ZeroProbabilityEvidence):
        brute_force_joint(IDENTITY_CHAIN, {"A": "low", "B": "high"}, "B")
    with pytest.raises(ZeroProbabilityEvidence):
        infer(IDENTITY_CHAIN, ["o"], {"A": "low", "B": "high"}, "A")
    assert close(infer(IDENTITY_CHAIN, ["o"], evidence, "B"), {"low": 1.0, "high": 0.0})


def test_unknown_value():
    with pytest.raises(UnknownValue):
        infer(CHAIN, ["analyst"], {"A": "medium"}, "B")


def test_cyclic_network_is_rejected():
    g = load("""system loop {
      state a physical domain { x, y }  state b physical domain { x, y }
      model f { in: a; out: b }  model h { in: b; out: a }
      observer o level 2 { covers: f, h; }
      cpt f { row (x) -> { x: 1, y: 0 } row (y) -> { x: 0, y: 1 } }
      cpt h { row (x) -> { x: 1, y: 0 } row (y) -> { x: 0, y: 1 } }
    }""")
    with pytest.raises(CyclicModel):
        infer(g, ["o"], {}, "a")
    with pytest.raises(CyclicModel):
        brute_force_joint(g, {}, "a")


def test_oracle_refuses_large_networks():
    states = "\n".join(f"state s{i} physical domain {{ a, b }}" for i in range(21))
    with pytest.raises(TooLarge):
        brute_force_joint(load(f"system big {{ {states} }}"), {}, "s0")


def test_elimination_order_is_children_first():
    text, states = gen.random_network(random.Random(11), max_states=8)
    g = load(text)
    order = network_order(g, g.cpts)
    for v in order:
        for p in g.cpts[v].parents:
            assert order.index(p) > order.index(v)


def test_factor_product_and_sum():
    a = Factor(("x",), np.array([0.2, 0.8]))
    b = Factor(("x", "y"), np.array([[0.5, 0.5], [0.1, 0.9]]))
    joint = a * b
    assert joint.vars == ("x", "y")
    np.testing.assert_allclose(joint.sum_out("x").table, [0.18, 0.82])
    np.testing.assert_allclose(joint.reduce("y", 1).table, [0.1, 0.72])


@settings(max_examples=150, deadline=None)
@given(st.integers(min_value=0, max_value=10**6))
def test_matches_oracle(seed):
    rng = random.Random(seed)
    text, states = gen.random_network(rng)
    g = load(text)
    query = rng.choice(states)
    evidence = {s: rng.choice(["lo", "hi"]) for s in rng.sample(states, rng.randint(0, len(states) - 1))
                if s != query}
    try:
        expected = brute_force_joint(g, evidence, query)
    except ZeroProbabilityEvidence:
        with pytest.raises(ZeroProbabilityEvidence):
            infer(g, ["all"], evidence, query)
        return
    got = infer(g, ["all"], evidence, query)
    assert max(abs(got[k] - expected[k]) for k in got) <= 1e-9
    assert abs(sum(got.values()) - 1.0) <= 1e-9


@settings(max_examples=100, deadline=None)
@given(st.integers(min_value=0, max_value=10**6))
def test_evidence_on_query_is_certain(seed):
    rng = random.Random(seed)
    text, states = gen.random_network(rng)
    g = load(text)
    query = rng.choice(states)
    value = rng.choice(["lo", "hi"])
    try:
        dist = infer(g, ["all"], {query: value}, query)
    except ZeroProbabilityEvidence:
        return
    assert dist[value] == 1.0


def test_shrinking_deployment_never_changes_values():
    full = infer(FIG2, ["g", "h", "i"], {}, "psychological_fatigue")
    partial = infer(FIG2, ["g"], {}, "psychological_fatigue")
    assert full == partial


@settings(max_examples=200, deadline=None)
@given(st.integers(min_value=0, max_value=10**6))
def test_gating_only_removes_answers(seed):
    rng = random.Random(seed)
    g = load(gen.random_landscape(rng, with_expect=False).text())
    queries = sorted(s for s in g.cpts if s in g.states)
    if not queries:
        return
    query = rng.choice(queries)
    big = sorted(g.observers)
    small = [o for o in big if rng.random() < 0.5]
    try:
        narrow = infer(g, small, {}, query)
    except (OpaqueQuery, ZeroProbabilityEvidence):
        return
    except Exception as exc:  # a missing table shows up on both sides
        with pytest.raises(type(exc)):
            infer(g, big, {}, query)
        return
    assert infer(g, big, {}, query) == narrow
