"""Command-line front end: ``potx check|classify|regions|gaps|infer|export FILE``.

Exit codes: 0 success, 1 findings/violations/gaps or an invalid model,
2 usage or syntax error, 3 internal error.
"""

from __future__ import annotations

import argparse
import os
import sys
from typing import Sequence

from . import dsl
from .checks import check_graph
from .classify import ModelClass, classify_all
from .dot import to_dot
from .errors import (InferenceError, NoTargets, OpaqueQuery, PotxError, ResolveError,
                     StructureError, UnknownValue)
from .graph import SystemGraph, resolve
from .inference import infer
from .recipe import analyze_gaps, machine_lines
from .transparency import check_observer, opacity_map, transparent_region

EXIT_OK, EXIT_FINDINGS, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3

FORMATS = {
    "check": ("text", "machine"),
    "classify": ("text", "machine"),
    "regions": ("text", "machine"),
    "gaps": ("text", "machine"),
    "infer": ("text", "machine"),
    "export": ("dot",),
}


class UsageError(Exception):
    pass


class _Out:
    def __init__(self, quiet: bool, color: bool):
        self.quiet = quiet
        self.color = color
        self.lines: list[str] = []

    def __call__(self, line: str = "") -> None:
        self.lines.append(line)

    def paint(self, text: str, code: str) -> str:
        return f"\x1b[{code}m{text}\x1b[0m" if self.color else text

    def flush(self) -> None:
        if not self.quiet and self.lines:
            sys.stdout.write("\n".join(self.lines) + "\n")


def _load(path: str) -> SystemGraph:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror}") from None
    try:
        return resolve(dsl.parse(text))
    except dsl.ParseError as exc:
        raise UsageError(f"{path}:{exc.span.line}:{exc.span.column}: {exc.message}") from None


def _ids(text: str | None) -> list[str] | None:
    if text is None:
        return None
    return [part.strip() for part in text.split(",") if part.strip()]


def _deployment(graph: SystemGraph, text: str | None) -> list[str]:
    ids = _ids(text)
    if ids is None:
        return sorted(graph.observers)
    for ident in ids:
        if ident not in graph.observers:
            raise UsageError(f"unknown observer '{ident}'")
    return ids


def _evidence(text: str | None) -> dict[str, str]:
    evidence = {}
    for part in _ids(text) or []:
        state, sep, value = part.partition("=")
        if not sep or not state.strip() or not value.strip():
            raise UsageError(f"bad evidence '{part}', expected state=value")
        evidence[state.strip()] = value.strip()
    return evidence


def _bool(flag: bool) -> str:
    return "true" if flag else "false"


# --- commands --------------------------------------------------------------

def cmd_check(graph: SystemGraph, fmt: str, out: _Out) -> int:
    result = check_graph(graph)
    cls = result.classification
    if fmt == "machine":
        out(f"SYSTEM {graph.name} measures={len(graph.measures)} states={len(graph.states)} "
            f"models={len(graph.models)} observers={len(graph.observers)}")
        for f in result.findings:
            out(f"FINDING {f.severity.value} {f.rule} {f.node}")
        for mid, c in cls.model_classes.items():
            out(f"CLASS {mid} {c.value}")
        for v in result.violations:
            out(f"VIOLATION {v.observer} {v.rule.value} {v.node or '-'}")
        for e in result.expectations:
            out(f"EXPECT {'PASS' if e.passed else 'FAIL'} {e.assertion}")
        out(f"RESULT {'ok' if result.ok else 'fail'}")
    else:
        out(f"system {graph.name}: {len(graph.measures)} measures, {len(graph.states)} states, "
            f"{len(graph.models)} models, {len(graph.observers)} observers")
        out(f"models: {cls.count(ModelClass.EXTERO)} extero, {cls.count(ModelClass.INTRO)} intro, "
            f"{cls.count(ModelClass.BRIDGE)} bridge")
        bad = {v.observer for v in result.violations}
        out(f"observers: {len(graph.observers) - len(bad)} valid, {len(bad)} with violations")
        for v in result.violations:
            out("  " + out.paint("violation", "31") + f" {v}")
        for f in result.findings:
            out(f"  {f.severity.value} {f.rule} at {f.node}: {f.message}")
        for e in result.expectations:
            tag = out.paint("PASS", "32") if e.passed else out.paint("FAIL", "31")
            extra = "" if e.passed else f" (actual: {e.actual})"
            out(f"  {tag} {e.assertion}{extra}")
        out("ok" if result.ok else "failed")
    return EXIT_OK if result.ok else EXIT_FINDINGS


def cmd_classify(graph: SystemGraph, fmt: str, out: _Out) -> int:
    cls = classify_all(graph)
    for n in graph.nodes():
        level = cls.levels[n]
        if n in graph.measures:
            kind, what = "MEASURE", "-"
        elif n in graph.states:
            kind, what = "STATE", cls.perspectives[n].value
        else:
            kind, what = "MODEL", cls.model_classes[n].value
        if fmt == "machine":
            out(f"{kind} {n} {what} level={level}")
        else:
            out(f"{n:<28} {kind.lower():<8} {what:<7} L{level}")
    return EXIT_OK


def cmd_regions(graph: SystemGraph, deployed: list[str], fmt: str, out: _Out) -> int:
    opacity = opacity_map(graph, deployed)
    for oid in sorted(set(deployed)):
        region = transparent_region(graph, oid)
        valid = not check_observer(graph, oid)
        nodes = ",".join(sorted(region.all_nodes))
        o = graph.observers[oid]
        if fmt == "machine":
            out(f"REGION {oid} level={o.level} valid={_bool(valid)} nodes={nodes}")
        else:
            state = "valid" if valid else out.paint("inert", "31")
            out(f"observer {oid} (L{o.level}, {state}): {nodes or '(empty)'}")
    for n in graph.nodes():
        owner = opacity[n]
        if fmt == "machine":
            out(f"NODE {n} opaque" if owner is None
                else f"NODE {n} transparent={owner} level={opacity.level(n)}")
        else:
            out(f"  {n:<28} " + ("opaque" if owner is None else f"transparent ({owner}, L{opacity.level(n)})"))
    return EXIT_OK


def cmd_gaps(graph: SystemGraph, deployed: list[str], fmt: str, out: _Out) -> int:
    try:
        report = analyze_gaps(graph, deployed)
    except NoTargets as exc:
        raise UsageError(str(exc)) from None
    if fmt == "text":
        out(f"system {report.graph}, deployed: {', '.join(report.deployed) or '(none)'}")
        if not report.gaps:
            out("no gaps")
        for gap, s in zip(report.gaps, report.suggestions):
            current = "opaque" if gap.opaque else f"transparent at L{gap.current_level}"
            out(f"gap {gap.node}: {current}, needs L{gap.required}")
            if gap.existing:
                out(f"  existing observers that close it: {', '.join(gap.existing)}")
            frame = ", embed into an experimentable framework" if s.requires_experimentable_framework else ""
            out(f"  suggest L{s.minimum_level} observer{frame}: {s.abilities}")
            out(f"  cover: {', '.join(s.candidate_cover)}")
            if s.unmeasurable:
                out("  unmeasurable target: no measure feeds this node")
        if report.summary:
            out("per level: " + ", ".join(f"L{k}={v}" for k, v in report.summary.items()))
    for line in machine_lines(report):
        out(line)
    return EXIT_FINDINGS if report.gaps else EXIT_OK


def cmd_infer(graph: SystemGraph, deployed: list[str], evidence: dict[str, str], query: str,
              out: _Out) -> int:
    try:
        dist = infer(graph, deployed, evidence, query)
    except OpaqueQuery as exc:
        out(f"opaque: {exc.node}")
        return EXIT_FINDINGS
    except UnknownValue as exc:
        raise UsageError(str(exc)) from None
    except InferenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FINDINGS
    for value, p in dist.items():
        out(f"{value}: {p:.6f}")
    return EXIT_OK


def cmd_export(graph: SystemGraph, out: _Out) -> int:
    out(to_dot(graph).rstrip("\n"))
    return EXIT_OK


# --- entry point -------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", default=argparse.SUPPRESS, choices=("text", "machine", "dot"))
    common.add_argument("-q", "--quiet", action="store_true", default=argparse.SUPPRESS)

    parser = argparse.ArgumentParser(prog="potx", description=__doc__.splitlines()[0])
    parser.add_argument("--format", default=None, choices=("text", "machine", "dot"))
    parser.add_argument("-q", "--quiet", action="store_true", default=False)
    sub = parser.add_subparsers(dest="command", required=True)

    for name, help_text in (("check", "validate structure, observers and expect blocks"),
                            ("classify", "perspective and required level of every node"),
                            ("export", "render the landscape as Graphviz DOT")):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.add_argument("file")
    for name, help_text in (("regions", "transparent regions of deployed observers"),
                            ("gaps", "gap analysis against transparency targets")):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.add_argument("file")
        p.add_argument("--deploy", help="comma-separated observer ids (default: all)")
    p = sub.add_parser("infer", parents=[common], help="posterior of a state within transparent regions")
    p.add_argument("file")
    p.add_argument("--deploy", help="comma-separated observer ids (default: all)")
    p.add_argument("--evidence", help="state=value,...")
    p.add_argument("--query", required=True)
    return parser


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    fmt = args.format or FORMATS[args.command][0]
    out = _Out(args.quiet, os.environ.get("POTX_COLOR", "0") == "1")
    try:
        if fmt not in FORMATS[args.command]:
            raise UsageError(f"format '{fmt}' is not available for {args.command}")
        graph = _load(args.file)
        if args.command == "check":
            code = cmd_check(graph, fmt, out)
        elif args.command == "classify":
            code = cmd_classify(graph, fmt, out)
        elif args.command == "regions":
            code = cmd_regions(graph, _deployment(graph, args.deploy), fmt, out)
        elif args.command == "gaps":
            code = cmd_gaps(graph, _deployment(graph, args.deploy), fmt, out)
        elif args.command == "infer":
            code = cmd_infer(graph, _deployment(graph, args.deploy), _evidence(args.evidence),
                             args.query, out)
        else:
            code = cmd_export(graph, out)
    except UsageError as exc:
        print(f"potx: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except StructureError as exc:
        for f in exc.findings:
            print(f"{args.file}: {f.severity.value}: {f.rule} at {f.node}: {f.message}", file=sys.stderr)
        return EXIT_FINDINGS
    except ResolveError as exc:
        where = f"{args.file}:{exc.span.line}:{exc.span.column}" if exc.span else args.file
        print(f"{where}: {exc}", file=sys.stderr)
        return EXIT_FINDINGS
    except PotxError as exc:
        print(f"potx: {exc}", file=sys.stderr)
        return EXIT_FINDINGS
    except Exception as exc:  # noqa: BLE001
        print(f"potx: internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL
    out.flush()
    return code


def main() -> None:
    sys.exit(run())
