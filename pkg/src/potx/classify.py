"""Perspective membership of states and models, and required observer levels.

Physical states sit in the exteroperspective, non-physical ones in the
introperspective.  A model touching only one kind of state belongs to that
perspective; a model touching both is a bridge and belongs to neither.

Required levels are derived from graph shape alone:

========================================  =====
node                                      level
========================================  =====
measure                                   0
model whose inputs are all measures       1
extero model, one state input             2
extero model, two or more state inputs    3
bridge model                              3
intro model                               4
intro model in an alt group of size >= 2  5
state                                     lowest level among its producers
========================================  =====

A bridge may be *directly* covered by a level-2 observer as long as some
observer of level 3 or more encloses it (see :mod:`potx.transparency`).
States nothing produces get 0 if physical and 4 otherwise.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Mapping

from .errors import NoStateConnection
from .graph import Model, Physicality, State, SystemGraph

__all__ = [
    "Perspective", "ModelClass", "ClassificationMap", "ABILITIES", "PROFICIENCY",
    "EXPERIMENTABLE_LEVEL", "classify_state", "classify_model", "required_level",
    "direct_cover_level", "classify_all",
]

# Knowledge Stairway, one entry per observer level.
PROFICIENCY = {
    0: "Symbols",
    1: "Data",
    2: "Information",
    3: "Knowledge",
    4: "Understanding actions",
    5: "Competence",
}
ABILITIES = {
    0: "perceive/measure symbols or physical entities",
    1: "establish syntax between symbols; typically not effected by uncertainty",
    2: "interpret data including time series of data; typically impacted by uncertainty",
    3: "interconnect information from different sources and establish a knowledge network",
    4: "establish goal models that motivate observed states",
    5: "find the correct goal which motivates the observed states",
}
# Observers at or above this level need an experimentable framework.
EXPERIMENTABLE_LEVEL = 4
BRIDGE_DIRECT_LEVEL = 2
BRIDGE_CHAIN_LEVEL = 3


class Perspective(enum.Enum):
    INTRO = "intro"
    EXTERO = "extero"


class ModelClass(enum.Enum):
    INTRO = "intro"
    EXTERO = "extero"
    BRIDGE = "bridge"


def classify_state(state: State) -> Perspective:
    if state.physicality is Physicality.PHYSICAL:
        return Perspective.EXTERO
    return Perspective.INTRO


def classify_model(graph: SystemGraph, model: Model | str) -> ModelClass:
    if isinstance(model, str):
        model = graph.models[model]
    sides = {classify_state(graph.states[s]) for s in graph.connected_states(model.id)}
    if not sides:
        raise NoStateConnection(model.id)
    if len(sides) == 2:
        return ModelClass.BRIDGE
    return ModelClass.INTRO if Perspective.INTRO in sides else ModelClass.EXTERO


def _model_level(graph: SystemGraph, model: Model) -> int:
    cls = classify_model(graph, model)
    if cls is ModelClass.BRIDGE:
        return BRIDGE_CHAIN_LEVEL
    if cls is ModelClass.INTRO:
        return 5 if len(graph.alt_groups.get(model.id, ())) >= 2 else 4
    state_inputs = sum(1 for n in model.inputs if n in graph.states)
    if state_inputs == 0:
        return 1
    return 2 if state_inputs == 1 else 3


def required_level(graph: SystemGraph, node: str) -> int:
    """Lowest observer level able to comprehend ``node``."""
    if node in graph.measures:
        return 0
    if node in graph.models:
        return _model_level(graph, graph.models[node])
    if node in graph.states:
        makers = graph.producers.get(node, ())
        if makers:
            return min(_model_level(graph, graph.models[m]) for m in makers)
        return 0 if graph.states[node].physicality is Physicality.PHYSICAL else 4
    raise KeyError(f"'{node}' is not a measure, state or model")


def direct_cover_level(graph: SystemGraph, node: str) -> int:
    """Level an observer needs to cover ``node`` directly (bridges count as 2)."""
    if node in graph.models and classify_model(graph, node) is ModelClass.BRIDGE:
        return BRIDGE_DIRECT_LEVEL
    return required_level(graph, node)


@dataclass(frozen=True)
class ClassificationMap:
    perspectives: Mapping[str, Perspective]
    model_classes: Mapping[str, ModelClass]
    levels: Mapping[str, int]

    def count(self, cls: ModelClass) -> int:
        return sum(1 for c in self.model_classes.values() if c is cls)


def classify_all(graph: SystemGraph) -> ClassificationMap:
    perspectives = {sid: classify_state(s) for sid, s in sorted(graph.states.items())}
    classes = {mid: classify_model(graph, m) for mid, m in sorted(graph.models.items())}
    levels = {n: required_level(graph, n) for n in graph.nodes()}
    return ClassificationMap(perspectives, classes, levels)
