import random
from dataclasses import replace
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from potx import ABILITIES, load
from potx.classify import (ModelClass, Perspective, classify_all, classify_model,
                           classify_state, direct_cover_level, required_level)
from potx.errors import NoStateConnection
from potx.graph import Model, Physicality, State

import gen

ROOT = Path(__file__).resolve().parents[1]
FIG2 = load((ROOT / "corpus" / "fig2.potx").read_text())

seeds = st.integers(min_value=0, max_value=10**6)


@pytest.mark.parametrize("state, side", [
    ("blood_color", Perspective.EXTERO),
    ("psychological_fatigue", Perspective.INTRO),
    ("work_engagement", Perspective.INTRO),
])
def test_state_perspective(state, side):
    assert classify_state(FIG2.states[state]) is side


@pytest.mark.parametrize("model, cls", [
    ("oxygen_interpretation", ModelClass.EXTERO),
    ("fatigue_bridge", ModelClass.BRIDGE),
    ("motivation_model", ModelClass.INTRO),
])
def test_model_class(model, cls):
    assert classify_model(FIG2, model) is cls


@pytest.mark.parametrize("node, level", [
    ("rgb_r", 0),
    ("color_syntax", 1),
    ("oxygen_interpretation", 2),
    ("fatigue_model", 3),
    ("fatigue_bridge", 3),
    ("motivation_model", 4),
    ("psychological_fatigue", 3),
    ("work_engagement", 4),
])
def test_fig2_levels(node, level):
    assert required_level(FIG2, node) == level


def test_bridge_is_level_two_for_its_direct_observer():
    assert direct_cover_level(FIG2, "fatigue_bridge") == 2
    assert direct_cover_level(FIG2, "fatigue_model") == 3


def test_alternative_goals_need_level_five():
    g = load("""system alt {
      state cue nonphysical  state goal nonphysical
      model want_rest { in: cue; out: goal; goal }
      model want_pay { in: cue; out: goal; alt-of: want_rest }
    }""")
    assert required_level(g, "want_rest") == 5
    assert required_level(g, "want_pay") == 5


def test_fig2_counts():
    cls = classify_all(FIG2)
    assert (cls.count(ModelClass.BRIDGE), cls.count(ModelClass.INTRO),
            cls.count(ModelClass.EXTERO)) == (1, 1, 4)


def test_all_physical_system_has_no_intro_side():
    g = load("system s { measure m state a physical state b physical "
             "model f { in: m; out: a } model h { in: a; out: b } }")
    cls = classify_all(g)
    assert Perspective.INTRO not in cls.perspectives.values()
    assert cls.count(ModelClass.BRIDGE) == 0


def test_overburden_model_follows_declared_states():
    g = load((ROOT / "corpus" / "scenario2.potx").read_text())
    assert classify_model(g, "overburden_model") is ModelClass.INTRO
    assert classify_model(g, "emotion_recognition") is ModelClass.BRIDGE


def test_model_without_states_has_no_class():
    g = load("system s { measure a measure b }")
    g = replace(g, models={"f": Model("f", ("a",), ("b",))})
    with pytest.raises(NoStateConnection):
        classify_model(g, "f")


def test_ability_table_covers_every_level():
    assert sorted(ABILITIES) == list(range(6))
    assert ABILITIES[3] == "interconnect information from different sources and establish a knowledge network"


def _independent_class(graph, mid):
    m = graph.models[mid]
    tags = [graph.states[n].physicality for n in (*m.inputs, *m.outputs) if n in graph.states]
    phys = sum(t is Physicality.PHYSICAL for t in tags)
    if phys and phys < len(tags):
        return "bridge"
    return "extero" if phys else "intro"


@settings(max_examples=200, deadline=None)
@given(seeds)
def test_partition_and_level_floor(seed):
    g = load(gen.random_landscape(random.Random(seed)).text())
    cls = classify_all(g)
    for mid, c in cls.model_classes.items():
        assert c.value == _independent_class(g, mid)
        level = cls.levels[mid]
        assert level >= 1
        if c is ModelClass.BRIDGE:
            assert level >= 3
        if c is ModelClass.INTRO:
            assert level >= 4
    for n in g.measures:
        assert cls.levels[n] == 0


@settings(max_examples=200, deadline=None)
@given(seeds, st.integers(min_value=0, max_value=50))
def test_relabel_to_nonphysical_never_lowers_model_levels(seed, pick):
    g = load(gen.random_landscape(random.Random(seed)).text())
    physical = sorted(s for s, st_ in g.states.items() if st_.physicality is Physicality.PHYSICAL)
    if not physical:
        return
    target = physical[pick % len(physical)]
    states = dict(g.states)
    states[target] = replace(states[target], physicality=Physicality.NONPHYSICAL)
    flipped = replace(g, states=states)
    for mid in g.models:
        assert required_level(flipped, mid) >= required_level(g, mid)


@given(st.text(min_size=1, max_size=5), st.sampled_from(list(Physicality)),
       st.none() | st.just(("a", "b")))
def test_state_side_depends_only_on_tag(ident, tag, domain):
    expected = Perspective.EXTERO if tag is Physicality.PHYSICAL else Perspective.INTRO
    assert classify_state(State(ident, tag, domain, "label")) is expected
