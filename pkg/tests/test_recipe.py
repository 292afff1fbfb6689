import random
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from potx import ABILITIES, load
from potx.errors import NoTargets
from potx.recipe import Gap, analyze_gaps, apply_suggestions, machine_lines, suggest_observer

import gen
from harness import deployments, minimality_problems, soundness_problems

ROOT = Path(__file__).resolve().parents[1]
CORPUS = sorted((ROOT / "corpus").glob("*.potx"))


def fixture(name):
    return load((ROOT / "corpus" / f"{name}.potx").read_text())


FIG2 = fixture("fig2")


def test_fig2_without_h_has_the_engagement_gap():
    report = analyze_gaps(FIG2, ["i", "g"])
    gap = next(g for g in report.gaps if g.node == "work_engagement")
    assert gap.opaque
    assert gap.required == 4
    assert gap.needs_experimentability
    assert gap.existing == ("h",)


def test_full_stack_closes_every_gap():
    report = analyze_gaps(FIG2, ["i", "g", "h"])
    assert report.gaps == () and report.suggestions == ()
    assert report.summary == {}


def test_scenario2_technical_observer_is_too_low():
    report = analyze_gaps(fixture("scenario2"), ["technical_system"])
    gap = next(g for g in report.gaps if g.node == "mental_overburden")
    assert gap.required >= 4
    suggestion = report.suggestions[report.gaps.index(gap)]
    assert suggestion.requires_experimentable_framework


def test_scenario1_supervisor_needs_elevation():
    report = analyze_gaps(fixture("scenario1"), ["supervisor_l3"])
    assert [g.node for g in report.gaps] == ["task_knowledge"]
    assert report.suggestions[0].minimum_level == 4


def test_engagement_suggestion_from_scratch():
    gap = Gap("work_engagement", None, 4, True)
    s = suggest_observer(FIG2, gap)
    assert s.minimum_level == 4
    assert s.requires_experimentable_framework
    assert s.abilities == ABILITIES[4]
    assert {"motivation_model", "fatigue_bridge"} <= set(s.candidate_cover)


def test_physiological_fatigue_suggestion():
    s = suggest_observer(FIG2, Gap("physiological_fatigue", None, 3, False))
    assert s.minimum_level == 3
    assert s.abilities == "interconnect information from different sources and establish a knowledge network"
    assert not s.requires_experimentable_framework


def test_raw_data_state_suggestion():
    s = suggest_observer(FIG2, Gap("blood_color", None, 1, False))
    assert s.minimum_level == 1
    assert not s.requires_experimentable_framework
    assert s.candidate_cover == ("color_syntax",)


def test_cover_stops_at_adequate_frontier():
    s = suggest_observer(FIG2, Gap("work_engagement", None, 4, True), deployed=["g", "i"])
    assert s.candidate_cover == ("motivation_model",)


def test_unmeasurable_target_is_flagged():
    g = load("""system s {
      state mood nonphysical  state plan nonphysical
      model intent { in: mood; out: plan }
      target transparent { plan }
    }""")
    report = analyze_gaps(g, [])
    assert report.suggestions[0].unmeasurable
    assert "UNMEASURABLE plan" in machine_lines(report)


def test_no_targets():
    with pytest.raises(NoTargets):
        analyze_gaps(load("system s { measure m }"), [])


def test_machine_format():
    report = analyze_gaps(fixture("scenario2"), ["matching_tool", "technical_system"])
    lines = machine_lines(report)
    assert "GAP mental_overburden required=4 experimentable=true" in lines
    assert any(ln.startswith("SUGGEST mental_overburden level=4 cover=") for ln in lines)


def test_gaps_sorted_and_deterministic():
    g = fixture("scenario2")
    first = analyze_gaps(g, [])
    assert [x.node for x in first.gaps] == sorted(x.node for x in first.gaps)
    assert analyze_gaps(g, []) == first


def test_applied_suggestions_are_named_after_gaps():
    report = analyze_gaps(FIG2, ["g"])
    grown, added = apply_suggestions(FIG2, report)
    assert added == ["suggested_work_engagement"]
    assert grown.observers["suggested_work_engagement"].experimentable


@pytest.mark.parametrize("path", CORPUS, ids=lambda p: p.name)
def test_corpus_soundness_and_minimality(path):
    g = load(path.read_text())
    for deployed in deployments(g):
        assert soundness_problems(g, deployed) == []
        assert minimality_problems(g, deployed) == []


@settings(max_examples=150, deadline=None)
@given(st.integers(min_value=0, max_value=10**6))
def test_random_soundness_and_minimality(seed):
    rng = random.Random(seed)
    land = gen.random_landscape(rng, with_expect=False)
    g = load(land.text())
    if not g.targets:
        return
    deployed = sorted(o for o in g.observers if rng.random() < 0.5)
    assert soundness_problems(g, deployed) == []
    assert minimality_problems(g, deployed) == []
