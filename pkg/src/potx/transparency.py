"""Observer-generated transparency.

An observer comprehends exactly the nodes it covers plus everything its
embedded observers comprehend.  Input and output states of a covered model
come along as the model's interface.  Without observers the whole system is
opaque, and an observer with any violation renders nothing transparent.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Mapping

from .classify import (BRIDGE_CHAIN_LEVEL, EXPERIMENTABLE_LEVEL, ModelClass,
                       classify_model, direct_cover_level, required_level)
from .errors import UnknownReference
from .graph import Observer, SystemGraph

__all__ = [
    "Rule", "TransparencyRegion", "ObserverViolation", "OpacityMap",
    "transparent_region", "check_observer", "check_all", "opacity_map",
    "as_observers",
]


class Rule(enum.Enum):
    LEVEL_TOO_LOW = "LevelTooLow"
    EXPERIMENTABILITY_MISSING = "ExperimentabilityMissing"
    EMBED_LEVEL_EXCEEDS_PARENT = "EmbedLevelExceedsParent"
    BRIDGE_CHAIN_TOO_SHALLOW = "BridgeChainTooShallow"


@dataclass(frozen=True)
class TransparencyRegion:
    observer: str
    nodes: frozenset[str]
    interface: frozenset[str] = frozenset()

    @property
    def all_nodes(self) -> frozenset[str]:
        """Covered nodes plus the states attached to covered models."""
        return self.nodes | self.interface


@dataclass(frozen=True)
class ObserverViolation:
    observer: str
    rule: Rule
    node: str | None = None
    detail: str = ""

    def sort_key(self):
        return (self.observer, self.rule.value, self.node or "")

    def __str__(self):
        where = f" at {self.node}" if self.node else ""
        return f"{self.observer}: {self.rule.value}{where} ({self.detail})"


def as_observers(graph: SystemGraph, observers: Iterable[Observer | str]) -> list[Observer]:
    """Normalize ids or :class:`Observer` objects against ``graph``; sorted, deduplicated."""
    found: dict[str, Observer] = {}
    for o in observers:
        ident = o if isinstance(o, str) else o.id
        if ident not in graph.observers:
            raise UnknownReference(ident)
        found[ident] = graph.observers[ident]
    return [found[k] for k in sorted(found)]


def _subtree(graph: SystemGraph, root: Observer) -> list[Observer]:
    out, stack, seen = [], [root.id], set()
    while stack:
        oid = stack.pop()
        if oid in seen or oid not in graph.observers:
            continue
        seen.add(oid)
        o = graph.observers[oid]
        out.append(o)
        stack.extend(sorted(o.embeds, reverse=True))
    return out


def transparent_region(graph: SystemGraph, observer: Observer | str) -> TransparencyRegion:
    (root,) = as_observers(graph, [observer])
    nodes = frozenset(n for o in _subtree(graph, root) for n in o.covers)
    interface = {
        s for n in nodes if n in graph.models for s in graph.connected_states(n)
    }
    return TransparencyRegion(root.id, nodes, frozenset(interface - nodes))


def check_observer(graph: SystemGraph, observer: Observer | str) -> list[ObserverViolation]:
    """Violations inside ``observer``'s tree, judged within its embedding chain.

    The chain for a covered node runs from the outermost observer enclosing
    ``observer`` down to the one covering the node.  Rules:

    * each observer's level reaches the direct-cover level of what it covers;
    * a covered bridge has an observer of level >= 3 somewhere on its chain;
    * a covered node needing level >= 4 requires every level >= 4 observer on
      its chain to be experimentable;
    * an embedded observer's level never exceeds its parent's.
    """
    (root,) = as_observers(graph, [observer])
    chain0 = [graph.observers[a] for a in graph.observer_ancestors(root.id)]
    found: dict[tuple, ObserverViolation] = {}

    def add(v: ObserverViolation) -> None:
        found.setdefault(v.sort_key(), v)

    def walk(o: Observer, chain: list[Observer], seen: set[str]) -> None:
        top = max(x.level for x in chain)
        for n in sorted(o.covers):
            if n in graph.observers or graph.kind(n) is None:
                continue
            need = direct_cover_level(graph, n)
            if o.level < need:
                add(ObserverViolation(o.id, Rule.LEVEL_TOO_LOW, n,
                                      f"level {o.level} < required {need}"))
            if n in graph.models and classify_model(graph, n) is ModelClass.BRIDGE \
                    and top < BRIDGE_CHAIN_LEVEL:
                add(ObserverViolation(o.id, Rule.BRIDGE_CHAIN_TOO_SHALLOW, n,
                                      f"highest level on chain is {top} < {BRIDGE_CHAIN_LEVEL}"))
            if required_level(graph, n) >= EXPERIMENTABLE_LEVEL:
                for x in chain:
                    if x.level >= EXPERIMENTABLE_LEVEL and not x.experimentable:
                        add(ObserverViolation(x.id, Rule.EXPERIMENTABILITY_MISSING, None,
                                              f"level {x.level} observer lacks an experimentable framework"))
        for cid in sorted(o.embeds):
            child = graph.observers.get(cid)
            if child is None or cid in seen:
                continue
            if child.level > o.level:
                add(ObserverViolation(cid, Rule.EMBED_LEVEL_EXCEEDS_PARENT, None,
                                      f"level {child.level} embedded in '{o.id}' at level {o.level}"))
            walk(child, chain + [child], seen | {cid})

    walk(root, chain0 + [root], {root.id})
    return [found[k] for k in sorted(found)]


def check_all(graph: SystemGraph) -> list[ObserverViolation]:
    """Violations of every declared observer, each reported once."""
    found: dict[tuple, ObserverViolation] = {}
    for oid in sorted(graph.observers):
        for v in check_observer(graph, oid):
            found.setdefault(v.sort_key(), v)
    return [found[k] for k in sorted(found)]


@dataclass(frozen=True)
class OpacityMap:
    """Node -> attributing observer id, or ``None`` for opaque nodes."""

    attribution: Mapping[str, str | None]
    levels: Mapping[str, int]
    valid: tuple[str, ...] = ()
    inert: tuple[str, ...] = ()

    def __getitem__(self, node: str) -> str | None:
        return self.attribution[node]

    def is_transparent(self, node: str) -> bool:
        return self.attribution.get(node) is not None

    def transparent(self) -> frozenset[str]:
        return frozenset(n for n, o in self.attribution.items() if o is not None)

    def opaque(self) -> frozenset[str]:
        return frozenset(n for n, o in self.attribution.items() if o is None)

    def level(self, node: str) -> int | None:
        """Highest level of a valid observer comprehending ``node``."""
        return self.levels.get(node)


def opacity_map(graph: SystemGraph, observers: Iterable[Observer | str] = ()) -> OpacityMap:
    deployed = as_observers(graph, observers)
    attribution: dict[str, str | None] = {n: None for n in graph.nodes()}
    levels: dict[str, int] = {}
    valid, inert = [], []
    for o in deployed:  # alphabetical, so the first writer wins ties
        if check_observer(graph, o):
            inert.append(o.id)
            continue
        valid.append(o.id)
        for n in sorted(transparent_region(graph, o).all_nodes):
            if attribution.get(n, "") is None:
                attribution[n] = o.id
            levels[n] = max(levels.get(n, o.level), o.level)
    return OpacityMap(attribution, levels, tuple(valid), tuple(inert))
