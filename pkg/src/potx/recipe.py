"""Gap analysis over transparency targets.

The procedure: classify every node, start from an all-opaque model, apply the
deployed observers, then compare each target against the level it needs.
Every target left opaque, or transparent only to observers below its
required level, becomes a :class:`Gap` with one :class:`ObserverSuggestion`.
"""

from __future__ import annotations

import heapq
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping

from .classify import (ABILITIES, EXPERIMENTABLE_LEVEL, ClassificationMap,
                       classify_all, required_level)
from .errors import NoTargets
from .graph import Observer, SystemGraph
from .transparency import (OpacityMap, as_observers, check_observer,
                           opacity_map, transparent_region)

__all__ = [
    "Gap", "ObserverSuggestion", "GapReport", "analyze_gaps",
    "suggest_observer", "apply_suggestions", "machine_lines",
]


@dataclass(frozen=True)
class Gap:
    node: str
    current_level: int | None  # None when the node is opaque
    required: int
    needs_experimentability: bool
    # Declared observers outside the deployment that would close this gap.
    existing: tuple[str, ...] = ()

    @property
    def opaque(self) -> bool:
        return self.current_level is None


@dataclass(frozen=True)
class ObserverSuggestion:
    gap: str
    minimum_level: int
    abilities: str
    requires_experimentable_framework: bool
    candidate_cover: tuple[str, ...]
    unmeasurable: bool = False

    def as_observer(self, ident: str) -> Observer:
        return Observer(ident, self.minimum_level, self.requires_experimentable_framework,
                        frozenset(self.candidate_cover))


@dataclass(frozen=True)
class GapReport:
    graph: str
    deployed: tuple[str, ...]
    gaps: tuple[Gap, ...]
    suggestions: tuple[ObserverSuggestion, ...]
    summary: Mapping[int, int]
    classification: ClassificationMap | None = field(default=None, compare=False, repr=False)
    opacity: OpacityMap | None = field(default=None, compare=False, repr=False)


def _upstream(graph: SystemGraph, node: str, allowed=lambda m: True) -> set[str]:
    """Every node reachable against the information flow from ``node``."""
    seen, stack = set(), [node]
    while stack:
        n = stack.pop()
        if n in seen:
            continue
        seen.add(n)
        if n in graph.models:
            stack.extend(graph.models[n].inputs)
        elif n in graph.states:
            stack.extend(m for m in graph.producers.get(n, ()) if allowed(m))
    seen.discard(node)
    return seen


def _candidate_cover(graph: SystemGraph, node: str, level: int, opacity: OpacityMap) -> tuple[str, ...]:
    if node in graph.measures:
        return (node,)

    def admissible(m: str) -> bool:
        return required_level(graph, m) <= level

    def frontier(n: str) -> bool:
        seen_at = opacity.level(n)
        return n != node and seen_at is not None and seen_at >= required_level(graph, n)

    heap: list[tuple[int, tuple[str, ...], str]] = []

    def push(cost: int, path: tuple[str, ...], n: str) -> None:
        if n in graph.models and not frontier(n):
            if admissible(n):
                heapq.heappush(heap, (cost + 1, path + (n,), n))
        else:
            heapq.heappush(heap, (cost, path, n))

    if node in graph.models:
        heapq.heappush(heap, (1, (node,), node))
    else:
        starts = [m for m in graph.producers.get(node, ()) if admissible(m)]
        if not starts:
            return (node,)
        for m in starts:
            heapq.heappush(heap, (1, (m,), m))

    settled: set[str] = set()
    while heap:
        cost, path, n = heapq.heappop(heap)
        if n in settled:
            continue
        settled.add(n)
        if frontier(n):
            return tuple(sorted(path))
        if n in graph.models:
            for inp in graph.models[n].inputs:
                push(cost, path, inp)
        elif n in graph.states:
            for m in graph.producers.get(n, ()):
                push(cost, path, m)

    # Nothing adequately transparent upstream: take the whole admissible chain.
    chain = {m for m in _upstream(graph, node, admissible) if m in graph.models and admissible(m)}
    if node in graph.models:
        chain.add(node)
    else:
        chain.update(m for m in graph.producers.get(node, ()) if admissible(m))
    return tuple(sorted(chain))


def suggest_observer(graph: SystemGraph, gap: Gap,
                     deployed: Iterable[Observer | str] = (),
                     opacity: OpacityMap | None = None) -> ObserverSuggestion:
    """Minimal new observer closing ``gap``.

    The cover is the shortest model chain, counted in models, from a node the
    deployment already renders adequately transparent up to the gap node.
    Only models the suggested level can comprehend are used.  With no such
    frontier the cover is every admissible model upstream of the gap.
    """
    if opacity is None:
        opacity = opacity_map(graph, deployed)
    level = required_level(graph, gap.node)
    cover = _candidate_cover(graph, gap.node, level, opacity)
    measured = gap.node in graph.measures or any(
        n in graph.measures for n in _upstream(graph, gap.node))
    return ObserverSuggestion(
        gap=gap.node,
        minimum_level=level,
        abilities=ABILITIES[level],
        requires_experimentable_framework=level >= EXPERIMENTABLE_LEVEL,
        candidate_cover=cover,
        unmeasurable=not measured,
    )


def analyze_gaps(graph: SystemGraph, deployed: Iterable[Observer | str] = ()) -> GapReport:
    if not graph.targets:
        raise NoTargets(graph.name)
    deployed = as_observers(graph, deployed)
    classification = classify_all(graph)
    opacity = opacity_map(graph, deployed)
    deployed_ids = {o.id for o in deployed}
    spare = [o for o in sorted(graph.observers) if o not in deployed_ids
             and not check_observer(graph, o)]

    gaps, suggestions = [], []
    for node in sorted(graph.targets):
        need = classification.levels[node]
        seen_at = opacity.level(node)
        if seen_at is not None and seen_at >= need:
            continue
        existing = tuple(
            o for o in spare
            if graph.observers[o].level >= need
            and node in transparent_region(graph, o).all_nodes
        )
        gap = Gap(node, seen_at, need, need >= EXPERIMENTABLE_LEVEL, existing)
        gaps.append(gap)
        suggestions.append(suggest_observer(graph, gap, opacity=opacity))
    summary = dict(sorted(Counter(g.required for g in gaps).items()))
    return GapReport(graph.name, tuple(sorted(deployed_ids)), tuple(gaps),
                     tuple(suggestions), summary, classification, opacity)


def apply_suggestions(graph: SystemGraph, report: GapReport) -> tuple[SystemGraph, list[str]]:
    """New graph with one top-level observer per suggestion, and their ids."""
    observers = dict(graph.observers)
    taken = set(graph.nodes()) | set(observers)
    added = []
    for s in report.suggestions:
        ident, k = f"suggested_{s.gap}", 2
        while ident in taken:
            ident, k = f"suggested_{s.gap}_{k}", k + 1
        taken.add(ident)
        observers[ident] = s.as_observer(ident)
        added.append(ident)
    return replace(graph, observers=observers), added


def machine_lines(report: GapReport) -> list[str]:
    """Line protocol for shell harnesses."""
    lines = []
    for gap, s in zip(report.gaps, report.suggestions):
        lines.append(f"GAP {gap.node} required={gap.required} "
                     f"experimentable={str(gap.needs_experimentability).lower()}")
        if gap.existing:
            lines.append(f"FIND {gap.node} observers={','.join(gap.existing)}")
        lines.append(f"SUGGEST {s.gap} level={s.minimum_level} cover={','.join(s.candidate_cover)}")
        if s.unmeasurable:
            lines.append(f"UNMEASURABLE {s.gap}")
    return lines
