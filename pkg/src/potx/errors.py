"""Exception hierarchy shared by all potx modules."""

from __future__ import annotations


class PotxError(Exception):
    """Base class for every error raised by potx."""


class ResolveError(PotxError):
    """A parsed document cannot be turned into a :class:`SystemGraph`."""

    def __init__(self, message: str, node: str | None = None, span=None):
        super().__init__(message)
        self.node = node
        self.span = span


class UnknownReference(ResolveError):
    def __init__(self, name: str, span=None):
        super().__init__(f"unknown reference '{name}'", node=name, span=span)


class DuplicateId(ResolveError):
    def __init__(self, name: str, span=None):
        super().__init__(f"duplicate id '{name}'", node=name, span=span)


class DanglingModel(ResolveError):
    def __init__(self, name: str, span=None):
        super().__init__(f"model '{name}' has no inputs or no outputs", node=name, span=span)


class StructureError(ResolveError):
    """Resolution produced a graph with Error-severity findings."""

    def __init__(self, findings):
        self.findings = list(findings)
        first = self.findings[0]
        super().__init__(f"{first.rule}: {first.message}", node=first.node)


class InvalidCpt(ResolveError):
    pass


class NoStateConnection(PotxError):
    def __init__(self, model: str):
        super().__init__(f"model '{model}' is not connected to any state")
        self.model = model


class NoTargets(PotxError):
    def __init__(self, system: str):
        super().__init__(f"system '{system}' declares no transparency targets")


class InferenceError(PotxError):
    pass


class OpaqueQuery(InferenceError):
    def __init__(self, node: str):
        super().__init__(f"opaque: {node}")
        self.node = node


class MissingCpt(InferenceError):
    def __init__(self, state: str):
        super().__init__(f"no cpt for state '{state}'")
        self.state = state


class CyclicModel(InferenceError):
    def __init__(self, nodes):
        self.nodes = tuple(nodes)
        super().__init__("cyclic dependency through " + " -> ".join(self.nodes))


class UnknownValue(InferenceError):
    pass


class TooLarge(InferenceError):
    pass


class ZeroProbabilityEvidence(InferenceError):
    def __init__(self):
        super().__init__("evidence has zero probability")
