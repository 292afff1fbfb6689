"""Whole-document check: structure, classification, observers, expectations."""

from __future__ import annotations

from dataclasses import dataclass

from . import dsl
from .classify import ClassificationMap, classify_all
from .graph import Finding, Severity, SystemGraph, validate_structure
from .recipe import GapReport, analyze_gaps
from .transparency import ObserverViolation, check_all, check_observer

__all__ = ["ExpectationResult", "CheckResult", "check_graph", "evaluate"]


@dataclass(frozen=True)
class ExpectationResult:
    assertion: dsl.Assertion
    passed: bool
    actual: str


@dataclass(frozen=True)
class CheckResult:
    graph: SystemGraph
    findings: list[Finding]
    classification: ClassificationMap
    violations: list[ObserverViolation]
    expectations: list[ExpectationResult]
    gaps: GapReport | None

    @property
    def errors(self) -> list[Finding]:
        return [f for f in self.findings if f.severity is Severity.ERROR]

    @property
    def ok(self) -> bool:
        return not self.errors and not self.violations and all(e.passed for e in self.expectations)


def evaluate(graph: SystemGraph, assertion: dsl.Assertion, classification: ClassificationMap,
             gaps: GapReport | None) -> ExpectationResult:
    """Evaluate one ``expect`` assertion.  Gap assertions see every declared observer deployed."""
    if isinstance(assertion, dsl.ModelAssertion):
        actual = classification.model_classes[assertion.model].value
        return ExpectationResult(assertion, actual == assertion.cls, actual)
    if isinstance(assertion, dsl.ObserverAssertion):
        rules = sorted({v.rule.value for v in check_observer(graph, assertion.observer)})
        actual = "ok" if not rules else "violates " + ",".join(rules)
        if assertion.violates is None:
            return ExpectationResult(assertion, not rules, actual)
        return ExpectationResult(assertion, assertion.violates in rules, actual)
    found = [g for g in (gaps.gaps if gaps else ()) if g.node == assertion.node]
    actual = f"gap level {found[0].required}" if found else "no gap"
    return ExpectationResult(assertion, bool(found) and found[0].required == assertion.level, actual)


def check_graph(graph: SystemGraph) -> CheckResult:
    findings = validate_structure(graph)
    classification = classify_all(graph)
    violations = check_all(graph)
    gaps = analyze_gaps(graph, graph.observers) if graph.targets else None
    results = [evaluate(graph, a, classification, gaps) for a in graph.expectations]
    return CheckResult(graph, findings, classification, violations, results, gaps)
