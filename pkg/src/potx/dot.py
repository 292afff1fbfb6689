"""Graphviz rendering in the visual language of the perspective landscapes.

Shapes: measure ``box, style=rounded``; state ``octagon``; model ``box``.
Top-level clusters split extero nodes, bridge models and intro nodes.  Each
valid observer adds a dashed sub-cluster, nested like its embeds.
"""

from __future__ import annotations

from .classify import ModelClass, Perspective, classify_all
from .graph import SystemGraph
from .transparency import check_observer

__all__ = ["to_dot"]

_PERSPECTIVES = (("extero", "exteroperspective"), ("border", "border"), ("intro", "introperspective"))


def _q(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'


def _node_line(graph: SystemGraph, n: str) -> str:
    if n in graph.measures:
        attrs, label = "shape=box, style=rounded", graph.measures[n].label
    elif n in graph.states:
        attrs, label = "shape=octagon", graph.states[n].label
    else:
        attrs, label = "shape=box", None
    text = n if label is None else f"{n}\n{label}"
    return f"{_q(n)} [{attrs}, label={_q(text)}];"


def _placement(graph: SystemGraph) -> dict[str, tuple[str, ...]]:
    """Node -> observer nesting path (outermost first) of its innermost valid coverer."""
    valid = [o for o in sorted(graph.observers) if not check_observer(graph, o)]
    direct: dict[str, str] = {}
    for oid in valid:
        for n in sorted(graph.observers[oid].covers):
            direct.setdefault(n, oid)
    for n in sorted(m for m in direct if m in graph.models):
        for s in graph.connected_states(n):
            direct.setdefault(s, direct[n])
    return {n: tuple(graph.observer_ancestors(o)) + (o,) for n, o in direct.items()}


def to_dot(graph: SystemGraph) -> str:
    classes = classify_all(graph)
    side: dict[str, str] = {}
    for n in graph.measures:
        side[n] = "extero"
    for n, p in classes.perspectives.items():
        side[n] = "intro" if p is Perspective.INTRO else "extero"
    for n, c in classes.model_classes.items():
        side[n] = {ModelClass.INTRO: "intro", ModelClass.EXTERO: "extero",
                   ModelClass.BRIDGE: "border"}[c]
    placed = _placement(graph)

    out = [f"digraph {_q(graph.name)} {{", "  rankdir=LR;", "  compound=true;"]
    for key, title in _PERSPECTIVES:
        members = [n for n in graph.nodes() if side[n] == key]
        out.append(f"  subgraph cluster_{key} {{")
        out.append(f"    label={_q(title)};")
        out.extend(_emit(graph, members, placed, key, (), depth=2))
        out.append("  }")
    for mid in sorted(graph.models):
        m = graph.models[mid]
        for n in m.inputs:
            out.append(f"  {_q(n)} -> {_q(mid)};")
        for n in m.outputs:
            out.append(f"  {_q(mid)} -> {_q(n)};")
    out.append("}")
    return "\n".join(out) + "\n"


def _emit(graph, members, placed, key, prefix, depth):
    pad = "  " * depth
    lines = [pad + _node_line(graph, n) for n in members if placed.get(n, ()) == prefix]
    children = sorted({placed[n][len(prefix)] for n in members
                       if n in placed and placed[n][:len(prefix)] == prefix
                       and len(placed[n]) > len(prefix)})
    for child in children:
        path = prefix + (child,)
        name = "cluster_" + key + "".join("__" + p for p in path)
        lines.append(f"{pad}subgraph {name} {{")
        lines.append(f"{pad}  label={_q(child)}; style=dashed;")
        lines.extend(_emit(graph, members, placed, key, path, depth + 1))
        lines.append(f"{pad}}}")
    return lines
