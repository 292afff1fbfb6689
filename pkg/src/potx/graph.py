"""Resolved system-model graph and its structural checks.

Information flows measure -> model, state -> model and model -> state.  Edges
live on the models (``inputs`` / ``outputs``); there is no separate edge list.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from typing import Iterable, Mapping

from . import dsl
from .errors import (DanglingModel, DuplicateId, InvalidCpt, StructureError,
                     UnknownReference)

__all__ = [
    "Physicality", "Measure", "State", "Model", "Observer", "Cpt",
    "SystemGraph", "Severity", "Finding", "resolve", "validate_structure",
]

LEVELS = range(0, 6)


class Physicality(enum.Enum):
    PHYSICAL = "physical"
    NONPHYSICAL = "nonphysical"


@dataclass(frozen=True)
class Measure:
    id: str
    label: str | None = None


@dataclass(frozen=True)
class State:
    id: str
    physicality: Physicality
    domain: tuple[str, ...] | None = None
    label: str | None = None


@dataclass(frozen=True)
class Model:
    id: str
    inputs: tuple[str, ...]
    outputs: tuple[str, ...]
    goal: bool = False
    alt_group: str | None = None


@dataclass(frozen=True)
class Observer:
    id: str
    level: int
    experimentable: bool = False
    covers: frozenset[str] = frozenset()
    embeds: frozenset[str] = frozenset()


@dataclass(frozen=True)
class Cpt:
    """Conditional table for one state.

    ``source`` is the model carrying the table, or the state itself for a
    prior on a state nothing produces.  ``parents`` are the source model's
    inputs that have a domain, in declared order.
    """

    source: str
    output: str
    parents: tuple[str, ...]
    rows: Mapping[tuple[str, ...], Mapping[str, float]]

    def prob(self, value: str, parent_values: tuple[str, ...]) -> float:
        return self.rows[parent_values].get(value, 0.0)


@dataclass(frozen=True)
class SystemGraph:
    """Immutable system model.  Build it with :func:`resolve`."""

    name: str
    measures: Mapping[str, Measure] = field(default_factory=dict)
    states: Mapping[str, State] = field(default_factory=dict)
    models: Mapping[str, Model] = field(default_factory=dict)
    observers: Mapping[str, Observer] = field(default_factory=dict)
    targets: frozenset[str] = frozenset()
    cpts: Mapping[str, Cpt] = field(default_factory=dict)  # keyed by output state
    expectations: tuple = ()

    def nodes(self) -> list[str]:
        """Ids of every measure, state and model, sorted."""
        return sorted([*self.measures, *self.states, *self.models])

    def kind(self, ident: str) -> str | None:
        for kind, table in (("measure", self.measures), ("state", self.states),
                            ("model", self.models), ("observer", self.observers)):
            if ident in table:
                return kind
        return None

    @cached_property
    def producers(self) -> Mapping[str, tuple[str, ...]]:
        """State id -> ids of models that output it."""
        found: dict[str, list[str]] = {}
        for m in self.models.values():
            for out in m.outputs:
                found.setdefault(out, []).append(m.id)
        return {k: tuple(sorted(v)) for k, v in found.items()}

    @cached_property
    def consumers(self) -> Mapping[str, tuple[str, ...]]:
        found: dict[str, list[str]] = {}
        for m in self.models.values():
            for inp in m.inputs:
                found.setdefault(inp, []).append(m.id)
        return {k: tuple(sorted(v)) for k, v in found.items()}

    @cached_property
    def observer_parent(self) -> Mapping[str, str]:
        """Embedded observer id -> embedding observer id."""
        parent = {}
        for o in sorted(self.observers.values(), key=lambda o: o.id):
            for child in sorted(o.embeds):
                parent.setdefault(child, o.id)
        return parent

    def observer_ancestors(self, ident: str) -> list[str]:
        """Embedding chain above ``ident``, outermost first."""
        chain = []
        seen = {ident}
        cur = self.observer_parent.get(ident)
        while cur is not None and cur not in seen:
            chain.append(cur)
            seen.add(cur)
            cur = self.observer_parent.get(cur)
        return chain[::-1]

    def connected_states(self, model: str) -> list[str]:
        m = self.models[model]
        return sorted({n for n in (*m.inputs, *m.outputs) if n in self.states})

    @cached_property
    def alt_groups(self) -> Mapping[str, frozenset[str]]:
        """Model id -> members of its alternative group (itself included).

        A group collects every model declaring ``alt-of: g`` plus the model
        named ``g`` if there is one.
        """
        groups: dict[str, set[str]] = {}
        for m in self.models.values():
            if m.alt_group is not None:
                groups.setdefault(m.alt_group, set()).add(m.id)
        for g, members in groups.items():
            if g in self.models:
                members.add(g)
        out: dict[str, frozenset[str]] = {}
        for members in groups.values():
            for mid in members:
                out[mid] = out.get(mid, frozenset()) | frozenset(members)
        return out


# --- validation --------------------------------------------------------------

class Severity(enum.Enum):
    ERROR = "error"
    WARNING = "warning"
    INFO = "info"


@dataclass(frozen=True, order=True)
class Finding:
    node: str
    rule: str
    severity: Severity = field(compare=False)
    message: str = field(default="", compare=False)


def _model_cycles(graph: SystemGraph) -> list[list[str]]:
    """Strongly connected model groups (size > 1 or self-loop), via Tarjan."""
    succ = {
        m.id: sorted({c for out in m.outputs for c in graph.consumers.get(out, ())})
        for m in graph.models.values()
    }
    index: dict[str, int] = {}
    low: dict[str, int] = {}
    stack: list[str] = []
    on_stack: set[str] = set()
    found: list[list[str]] = []

    def visit(v: str) -> None:
        index[v] = low[v] = len(index)
        stack.append(v)
        on_stack.add(v)
        for w in succ[v]:
            if w not in index:
                visit(w)
                low[v] = min(low[v], low[w])
            elif w in on_stack:
                low[v] = min(low[v], index[w])
        if low[v] == index[v]:
            comp = []
            while True:
                w = stack.pop()
                on_stack.discard(w)
                comp.append(w)
                if w == v:
                    break
            if len(comp) > 1 or v in succ[v]:
                found.append(sorted(comp))

    for v in sorted(succ):
        if v not in index:
            visit(v)
    return sorted(found)


def validate_structure(graph: SystemGraph) -> list[Finding]:
    """Check the class-model constraints; returns findings sorted by node."""
    findings: list[Finding] = []

    def add(node, rule, severity, message):
        findings.append(Finding(node, rule, severity, message))

    E, W, I = Severity.ERROR, Severity.WARNING, Severity.INFO
    known = set(graph.measures) | set(graph.states) | set(graph.models) | set(graph.observers)

    seen: dict[str, str] = {}
    for kind, table in (("measure", graph.measures), ("state", graph.states),
                        ("model", graph.models), ("observer", graph.observers)):
        for key, node in table.items():
            if key != node.id:
                add(key, "id-mismatch", E, f"table key '{key}' holds '{node.id}'")
            if key in seen:
                add(key, "duplicate-id", E, f"'{key}' declared as {seen[key]} and {kind}")
            seen.setdefault(key, kind)

    for s in graph.states.values():
        if s.domain is not None and len(set(s.domain)) < 2:
            add(s.id, "state-domain-too-small", E, "domain needs at least 2 distinct values")
        if s.domain is not None and len(set(s.domain)) != len(s.domain):
            add(s.id, "state-domain-duplicate", E, "domain lists a value twice")

    for m in graph.models.values():
        if not m.inputs:
            add(m.id, "model-no-inputs", E, "model has no inputs")
        if not m.outputs:
            add(m.id, "model-no-outputs", E, "model has no outputs")
        for n in sorted(set(m.inputs) & set(m.outputs)):
            add(m.id, "model-input-is-output", E, f"'{n}' is both input and output")
        for n in m.inputs:
            if n not in known:
                add(m.id, "unknown-reference", E, f"input '{n}' is not declared")
            elif n not in graph.measures and n not in graph.states:
                add(m.id, "model-input-not-measure-or-state", E, f"input '{n}' is a {graph.kind(n)}")
        for n in m.outputs:
            if n in graph.measures:
                add(n, "measure-has-input", E, f"measure is an output of model '{m.id}'")
            elif n not in known:
                add(m.id, "unknown-reference", E, f"output '{n}' is not declared")
            elif n not in graph.states:
                add(m.id, "model-output-not-state", E, f"output '{n}' is a {graph.kind(n)}")

    for sid, makers in graph.producers.items():
        if sid not in graph.states or len(makers) < 2:
            continue
        groups = {frozenset(graph.alt_groups.get(mid, {mid})) for mid in makers}
        if len(groups) > 1:
            add(sid, "duplicate-producer", W,
                "produced by " + ", ".join(makers) + " outside a shared alt group")

    for cycle in _model_cycles(graph):
        add(cycle[0], "model-cycle", I, "feedback loop through " + ", ".join(cycle))

    parents: dict[str, list[str]] = {}
    for o in graph.observers.values():
        if o.level not in LEVELS:
            add(o.id, "observer-level-range", E, f"level {o.level} outside 0..5")
        for n in sorted(o.covers):
            if n not in known:
                add(o.id, "unknown-reference", E, f"covers undeclared '{n}'")
            elif n in graph.observers:
                add(o.id, "observer-covers-observer", E, f"covers observer '{n}'; use embeds")
        for child in sorted(o.embeds):
            if child not in graph.observers:
                add(o.id, "unknown-reference", E, f"embeds '{child}', which is not an observer")
            else:
                parents.setdefault(child, []).append(o.id)
    for child, ps in sorted(parents.items()):
        if len(ps) > 1:
            add(child, "observer-multiple-parents", E, "embedded in " + ", ".join(sorted(ps)))
    for oid in sorted(graph.observers):
        cur, seen_chain = oid, set()
        while cur in parents and cur not in seen_chain:
            seen_chain.add(cur)
            cur = sorted(parents[cur])[0]
        if cur == oid and oid in parents:
            add(oid, "observer-embed-cycle", E, "observer embeds itself through its children")
    for o in graph.observers.values():
        if o.id in graph.observer_parent:
            continue
        _check_tree_overlap(graph, o.id, add)

    for t in sorted(graph.targets):
        if t not in known:
            add(t, "unknown-reference", E, "target is not declared")
        elif t in graph.observers:
            add(t, "target-is-observer", E, "targets must be measures, states or models")

    return sorted(findings)


def _check_tree_overlap(graph: SystemGraph, root: str, add) -> None:
    owner: dict[str, str] = {}
    stack, visited = [root], set()
    while stack:
        oid = stack.pop()
        if oid in visited or oid not in graph.observers:
            continue
        visited.add(oid)
        o = graph.observers[oid]
        for n in sorted(o.covers):
            if n in owner:
                add(oid, "observer-cover-overlap", Severity.ERROR,
                    f"'{n}' is also covered by '{owner[n]}' in the same tree")
            else:
                owner[n] = oid
        stack.extend(sorted(o.embeds, reverse=True))


# --- resolution ---------------------------------------------------------------

def _cpt_from_decl(decl: dsl.CptDecl, graph_states, models, producers) -> Cpt:
    if decl.id in models:
        m = models[decl.id]
        if len(m.outputs) != 1:
            raise InvalidCpt(f"cpt '{decl.id}': model must have exactly one output", decl.id, decl.span)
        output = m.outputs[0]
        parents = tuple(n for n in m.inputs if n in graph_states and graph_states[n].domain)
    elif decl.id in graph_states:
        if producers.get(decl.id):
            raise InvalidCpt(f"cpt '{decl.id}': state is produced by a model; attach the cpt there",
                             decl.id, decl.span)
        output, parents = decl.id, ()
    else:
        raise UnknownReference(decl.id, decl.span)
    out_domain = graph_states[output].domain
    if not out_domain:
        raise InvalidCpt(f"cpt '{decl.id}': state '{output}' has no domain", decl.id, decl.span)
    rows: dict[tuple[str, ...], dict[str, float]] = {}
    for row in decl.rows:
        if len(row.parents) != len(parents):
            raise InvalidCpt(f"cpt '{decl.id}': row ({', '.join(row.parents)}) needs "
                             f"{len(parents)} parent values ({', '.join(parents)})", decl.id, decl.span)
        for parent, value in zip(parents, row.parents):
            if value not in graph_states[parent].domain:
                raise InvalidCpt(f"cpt '{decl.id}': '{value}' not in domain of '{parent}'", decl.id, decl.span)
        if row.parents in rows:
            raise InvalidCpt(f"cpt '{decl.id}': row ({', '.join(row.parents)}) given twice", decl.id, decl.span)
        for value, p in row.probs:
            if value not in out_domain:
                raise InvalidCpt(f"cpt '{decl.id}': '{value}' not in domain of '{output}'", decl.id, decl.span)
            if not 0.0 <= p <= 1.0:
                raise InvalidCpt(f"cpt '{decl.id}': probability {p} outside [0, 1]", decl.id, decl.span)
        if abs(math.fsum(p for _, p in row.probs) - 1.0) > dsl.ROW_SUM_TOLERANCE:
            raise InvalidCpt(f"cpt '{decl.id}': row does not sum to 1", decl.id, decl.span)
        rows[row.parents] = dict(row.probs)
    for combo in product(*(graph_states[p].domain for p in parents)):
        if combo not in rows:
            raise InvalidCpt(f"cpt '{decl.id}': missing row ({', '.join(combo)})", decl.id, decl.span)
    return Cpt(decl.id, output, parents, rows)


def _check_refs(ids: Iterable[str], known: set[str], span) -> None:
    for ident in ids:
        if ident not in known:
            raise UnknownReference(ident, span)


def resolve(doc: dsl.Document) -> SystemGraph:
    """Resolve names in a parsed document and build the graph.

    Raises :class:`UnknownReference`, :class:`DuplicateId`,
    :class:`DanglingModel`, :class:`InvalidCpt`, or :class:`StructureError`
    when validation reports any Error finding.
    """
    spans: dict[str, object] = {}
    for item in doc.items:
        if isinstance(item, (dsl.MeasureDecl, dsl.StateDecl, dsl.ModelDecl, dsl.ObserverDecl)):
            if item.id in spans:
                raise DuplicateId(item.id, item.span)
            spans[item.id] = item.span
    known = set(spans)

    for m in doc.models:
        if not m.inputs or not m.outputs:
            raise DanglingModel(m.id, m.span)
        _check_refs(m.inputs, known, m.span)
        _check_refs(m.outputs, known, m.span)
    for o in doc.observers:
        _check_refs(o.covers, known, o.span)
        _check_refs(o.embeds, known, o.span)
    _check_refs(doc.targets, known, None)
    for a in doc.assertions:
        ref = getattr(a, "model", None) or getattr(a, "observer", None) or getattr(a, "node", None)
        _check_refs([ref], known, None)

    measures = {m.id: Measure(m.id, m.label) for m in doc.measures}
    states = {s.id: State(s.id, Physicality(s.physicality), s.domain, s.label) for s in doc.states}
    models = {m.id: Model(m.id, m.inputs, tuple(sorted(set(m.outputs))), m.goal, m.alt_of)
              for m in doc.models}
    observers = {o.id: Observer(o.id, o.level, o.experimentable, frozenset(o.covers), frozenset(o.embeds))
                 for o in doc.observers}
    graph = SystemGraph(doc.name, measures, states, models, observers,
                        frozenset(doc.targets), {}, doc.assertions)

    errors = [f for f in validate_structure(graph) if f.severity is Severity.ERROR]
    if errors:
        raise StructureError(errors)

    cpts: dict[str, Cpt] = {}
    seen_cpt: set[str] = set()
    for decl in doc.cpts:
        if decl.id in seen_cpt:
            raise InvalidCpt(f"cpt '{decl.id}' declared twice", decl.id, decl.span)
        seen_cpt.add(decl.id)
        cpt = _cpt_from_decl(decl, states, models, graph.producers)
        if cpt.output in cpts:
            raise InvalidCpt(f"state '{cpt.output}' has cpts from both "
                             f"'{cpts[cpt.output].source}' and '{decl.id}'", decl.id, decl.span)
        cpts[cpt.output] = cpt
    return SystemGraph(doc.name, measures, states, models, observers,
                       frozenset(doc.targets), cpts, doc.assertions)
