"""Reader and writer for ``.potx`` system-model documents.

A document looks like::

    system demo {
      measure rgb_r "red channel"
      state blood_color physical domain { pale, red }
      model color_syntax { in: rgb_r; out: blood_color }
      observer camera level 1 { covers: color_syntax; }
      target transparent { blood_color }
    }

:func:`parse` returns an unresolved :class:`Document` that keeps statements in
source order.  :func:`serialize` writes the canonical form: measures, states,
models, observers, cpts, targets, expects, each group sorted by id.  Two
documents compare equal when their canonical forms agree, so statement order
and the order of set-valued id lists do not matter.  Model inputs are the
exception, their order fixes the parent order of CPT rows.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from decimal import Decimal
from typing import Iterator, NamedTuple, Union

from .errors import PotxError

__all__ = [
    "SourceSpan", "ParseError", "Document", "MeasureDecl", "StateDecl",
    "ModelDecl", "ObserverDecl", "CptRow", "CptDecl", "TargetDecl",
    "ModelAssertion", "ObserverAssertion", "GapAssertion", "ExpectDecl",
    "parse", "serialize", "format_number", "VIOLATION_RULES",
]

# Kept in sync with transparency.Rule; duplicated here so the parser stays
# free of analysis imports.
VIOLATION_RULES = (
    "LevelTooLow",
    "ExperimentabilityMissing",
    "EmbedLevelExceedsParent",
    "BridgeChainTooShallow",
)
MODEL_CLASSES = ("intro", "extero", "bridge")
ROW_SUM_TOLERANCE = 1e-9


class SourceSpan(NamedTuple):
    line: int
    column: int
    length: int


class ParseError(PotxError):
    def __init__(self, span: SourceSpan, message: str, expected: str | None = None):
        super().__init__(f"{span.line}:{span.column}: {message}")
        self.span = span
        self.message = message
        self.expected = expected


# --- abstract syntax -------------------------------------------------------

@dataclass(frozen=True)
class MeasureDecl:
    id: str
    label: str | None = None
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class StateDecl:
    id: str
    physicality: str  # "physical" | "nonphysical"
    domain: tuple[str, ...] | None = None
    label: str | None = None
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class ModelDecl:
    id: str
    inputs: tuple[str, ...]
    outputs: tuple[str, ...]
    goal: bool = False
    alt_of: str | None = None
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class ObserverDecl:
    id: str
    level: int
    experimentable: bool = False
    covers: tuple[str, ...] = ()
    embeds: tuple[str, ...] = ()
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class CptRow:
    parents: tuple[str, ...]
    probs: tuple[tuple[str, float], ...]


@dataclass(frozen=True)
class CptDecl:
    id: str
    rows: tuple[CptRow, ...]
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class TargetDecl:
    ids: tuple[str, ...]
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class ModelAssertion:
    model: str
    cls: str  # intro | extero | bridge

    def __str__(self):
        return f"model {self.model} is {self.cls}"


@dataclass(frozen=True)
class ObserverAssertion:
    observer: str
    violates: str | None = None

    def __str__(self):
        if self.violates is None:
            return f"observer {self.observer} ok"
        return f"observer {self.observer} violates {self.violates}"


@dataclass(frozen=True)
class GapAssertion:
    node: str
    level: int

    def __str__(self):
        return f"gap {self.node} level {self.level}"


Assertion = Union[ModelAssertion, ObserverAssertion, GapAssertion]


@dataclass(frozen=True)
class ExpectDecl:
    assertions: tuple[Assertion, ...]
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


Item = Union[MeasureDecl, StateDecl, ModelDecl, ObserverDecl, CptDecl, TargetDecl, ExpectDecl]


def _assertion_key(a: Assertion):
    if isinstance(a, ModelAssertion):
        return (0, a.model, a.cls)
    if isinstance(a, ObserverAssertion):
        return (1, a.observer, a.violates or "")
    return (2, a.node, str(a.level))


@dataclass(frozen=True, eq=False)
class Document:
    """Unresolved declaration of one system, statements in source order."""

    name: str
    items: tuple[Item, ...] = ()

    def _of(self, kind):
        return [item for item in self.items if isinstance(item, kind)]

    @property
    def measures(self) -> list[MeasureDecl]:
        return self._of(MeasureDecl)

    @property
    def states(self) -> list[StateDecl]:
        return self._of(StateDecl)

    @property
    def models(self) -> list[ModelDecl]:
        return self._of(ModelDecl)

    @property
    def observers(self) -> list[ObserverDecl]:
        return self._of(ObserverDecl)

    @property
    def cpts(self) -> list[CptDecl]:
        return self._of(CptDecl)

    @property
    def targets(self) -> tuple[str, ...]:
        return tuple(sorted({i for t in self._of(TargetDecl) for i in t.ids}))

    @property
    def assertions(self) -> tuple[Assertion, ...]:
        found = [a for e in self._of(ExpectDecl) for a in e.assertions]
        return tuple(sorted(found, key=_assertion_key))

    def canonical(self):
        """Order-insensitive structural key used for equality."""
        by_id = lambda d: d.id  # noqa: E731
        return (
            self.name,
            tuple(sorted(self.measures, key=by_id)),
            tuple(sorted(self.states, key=by_id)),
            tuple(sorted((_normal_model(m) for m in self.models), key=by_id)),
            tuple(sorted((_normal_observer(o) for o in self.observers), key=by_id)),
            tuple(sorted(self.cpts, key=by_id)),
            self.targets,
            self.assertions,
        )

    def __eq__(self, other):
        if not isinstance(other, Document):
            return NotImplemented
        return self.canonical() == other.canonical()

    def __hash__(self):
        return hash(self.canonical())


def _normal_model(m: ModelDecl) -> ModelDecl:
    return ModelDecl(m.id, m.inputs, tuple(sorted(m.outputs)), m.goal, m.alt_of)


def _normal_observer(o: ObserverDecl) -> ObserverDecl:
    return ObserverDecl(o.id, o.level, o.experimentable,
                        tuple(sorted(o.covers)), tuple(sorted(o.embeds)))


# --- lexer -----------------------------------------------------------------

class Token(NamedTuple):
    kind: str  # IDENT NUMBER STRING PUNCT EOF
    value: str
    span: SourceSpan


_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>\#[^\n]*)
  | (?P<ALTOF>alt-of\b)
  | (?P<IDENT>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<NUMBER>[0-9]+(?:\.[0-9]+)?)
  | (?P<STRING>"(?:[^"\\\n]|\\.)*")
  | (?P<PUNCT>->|[{}(),;:])
""", re.VERBOSE)

_ESCAPES = {"n": "\n", "t": "\t", '"': '"', "\\": "\\"}


def _unescape(raw: str, span: SourceSpan) -> str:
    out = []
    chars = iter(raw)
    for ch in chars:
        if ch == "\\":
            nxt = next(chars)
            if nxt not in _ESCAPES:
                raise ParseError(span, f"unknown escape '\\{nxt}' in label")
            out.append(_ESCAPES[nxt])
        else:
            out.append(ch)
    return "".join(out)


def _tokenize(text: str) -> Iterator[Token]:
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            span = SourceSpan(line, pos - line_start + 1, 1)
            if text[pos] == '"':
                raise ParseError(span, "unterminated label")
            raise ParseError(span, f"unexpected character {text[pos]!r}")
        kind = m.lastgroup
        value = m.group()
        span = SourceSpan(line, pos - line_start + 1, len(value))
        if kind == "ALTOF":
            yield Token("PUNCT", value, span)
        elif kind not in ("ws", "comment"):
            yield Token(kind, value, span)
        newlines = value.count("\n")
        if newlines:
            line += newlines
            line_start = pos + value.rindex("\n") + 1
        pos = m.end()
    yield Token("EOF", "", SourceSpan(line, pos - line_start + 1, 0))


# --- parser ----------------------------------------------------------------

def _describe(tok: Token) -> str:
    return "end of input" if tok.kind == "EOF" else repr(tok.value)


class _Parser:
    def __init__(self, text: str):
        self.tokens = list(_tokenize(text))
        self.pos = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def fail(self, expected: str, tok: Token | None = None):
        tok = tok or self.tok
        span = tok.span
        if span.length == 0 and tok.kind == "EOF" and self.pos > 0:
            prev = self.tokens[self.pos - 1].span
            span = SourceSpan(prev.line, prev.column + max(prev.length - 1, 0), 1)
        raise ParseError(span, f"expected {expected}, found {_describe(tok)}", expected)

    def at(self, kind: str, value: str | None = None) -> bool:
        tok = self.tok
        return tok.kind == kind and (value is None or tok.value == value)

    def at_word(self, word: str) -> bool:
        return self.at("IDENT", word)

    def accept(self, kind: str, value: str) -> bool:
        if self.at(kind, value):
            self.advance()
            return True
        return False

    def punct(self, value: str) -> Token:
        if not self.at("PUNCT", value):
            self.fail(f"'{value}'")
        return self.advance()

    def word(self, *choices: str) -> str:
        if self.tok.kind != "IDENT" or self.tok.value not in choices:
            self.fail("|".join(choices))
        return self.advance().value

    def ident(self, what: str = "identifier") -> str:
        if self.tok.kind != "IDENT":
            self.fail(what)
        return self.advance().value

    def idlist(self) -> tuple[str, ...]:
        ids = [self.ident()]
        while self.accept("PUNCT", ","):
            ids.append(self.ident())
        return tuple(ids)

    def label(self) -> str | None:
        if self.tok.kind == "STRING":
            tok = self.advance()
            return _unescape(tok.value[1:-1], tok.span)
        return None

    def number(self) -> float:
        if self.tok.kind != "NUMBER":
            self.fail("number")
        return float(self.advance().value)

    def level(self) -> int:
        tok = self.tok
        if tok.kind != "NUMBER" or tok.value not in ("0", "1", "2", "3", "4", "5"):
            self.fail("level 0..5")
        self.advance()
        return int(tok.value)

    # grammar rules

    def document(self) -> Document:
        self.word("system")
        name = self.ident("system name")
        self.punct("{")
        items = []
        while not self.at("PUNCT", "}"):
            items.append(self.item())
        self.punct("}")
        if self.tok.kind != "EOF":
            self.fail("end of input")
        return Document(name, tuple(items))

    _ITEMS = ("measure", "state", "model", "observer", "cpt", "target", "expect")

    def item(self) -> Item:
        if self.tok.kind != "IDENT" or self.tok.value not in self._ITEMS:
            self.fail("|".join(self._ITEMS) + " or '}'")
        return getattr(self, "item_" + self.tok.value)()

    def item_measure(self) -> MeasureDecl:
        span = self.advance().span
        ident = self.ident()
        return MeasureDecl(ident, self.label(), span)

    def item_state(self) -> StateDecl:
        span = self.advance().span
        ident = self.ident()
        physicality = self.word("physical", "nonphysical")
        domain = None
        if self.accept("IDENT", "domain"):
            self.punct("{")
            values = [self.ident("domain value")]
            self.punct(",")
            values.append(self.ident("domain value"))
            while self.accept("PUNCT", ","):
                values.append(self.ident("domain value"))
            self.punct("}")
            domain = tuple(values)
        return StateDecl(ident, physicality, domain, self.label(), span)

    def item_model(self) -> ModelDecl:
        span = self.advance().span
        ident = self.ident()
        self.punct("{")
        self.word("in")
        self.punct(":")
        inputs = self.idlist()
        self.punct(";")
        self.word("out")
        self.punct(":")
        outputs = self.idlist()
        goal, alt_of = False, None
        while self.accept("PUNCT", ";"):
            if not goal and alt_of is None and self.accept("IDENT", "goal"):
                goal = True
            elif alt_of is None and self.accept("PUNCT", "alt-of"):
                self.punct(":")
                alt_of = self.ident("group name")
            elif self.at("PUNCT", "}"):
                break
            else:
                self.fail("'goal', 'alt-of:' or '}'" if alt_of is None else "'}'")
        self.punct("}")
        return ModelDecl(ident, inputs, outputs, goal, alt_of, span)

    def item_observer(self) -> ObserverDecl:
        span = self.advance().span
        ident = self.ident()
        self.word("level")
        level = self.level()
        experimentable = self.accept("IDENT", "experimentable")
        self.punct("{")
        covers: tuple[str, ...] = ()
        embeds: tuple[str, ...] = ()
        if self.accept("IDENT", "covers"):
            self.punct(":")
            covers = self.idlist()
            self.punct(";")
        if self.accept("IDENT", "embeds"):
            self.punct(":")
            embeds = self.idlist()
            self.punct(";")
        if not self.at("PUNCT", "}"):
            self.fail("'embeds:' or '}'" if not embeds else "'}'")
        self.advance()
        return ObserverDecl(ident, level, experimentable, covers, embeds, span)

    def item_cpt(self) -> CptDecl:
        span = self.advance().span
        ident = self.ident()
        self.punct("{")
        rows = [self.row()]
        while self.at_word("row"):
            rows.append(self.row())
        self.punct("}")
        return CptDecl(ident, tuple(rows), span)

    def row(self) -> CptRow:
        self.word("row")
        self.punct("(")
        parents: tuple[str, ...] = ()
        if not self.at("PUNCT", ")"):
            parents = self.idlist()
        self.punct(")")
        self.punct("->")
        brace = self.punct("{")
        probs = [self.entry()]
        while self.accept("PUNCT", ","):
            probs.append(self.entry())
        self.punct("}")
        seen = set()
        for value, _ in probs:
            if value in seen:
                raise ParseError(brace.span, f"value '{value}' listed twice in row")
            seen.add(value)
        total = math.fsum(p for _, p in probs)
        if abs(total - 1.0) > ROW_SUM_TOLERANCE:
            raise ParseError(brace.span, f"row probabilities sum to {total!r}, not 1")
        return CptRow(parents, tuple(probs))

    def entry(self) -> tuple[str, float]:
        value = self.ident("domain value")
        self.punct(":")
        tok = self.tok
        p = self.number()
        if p > 1.0:
            raise ParseError(tok.span, f"probability {tok.value} exceeds 1")
        return value, p

    def item_target(self) -> TargetDecl:
        span = self.advance().span
        self.word("transparent")
        self.punct("{")
        ids = self.idlist()
        self.punct("}")
        return TargetDecl(ids, span)

    def item_expect(self) -> ExpectDecl:
        span = self.advance().span
        self.punct("{")
        found = [self.assertion()]
        while not self.at("PUNCT", "}"):
            found.append(self.assertion())
        self.advance()
        return ExpectDecl(tuple(found), span)

    def assertion(self) -> Assertion:
        kind = self.word("model", "observer", "gap")
        if kind == "model":
            ident = self.ident()
            self.word("is")
            return ModelAssertion(ident, self.word(*MODEL_CLASSES))
        if kind == "observer":
            ident = self.ident()
            if self.word("ok", "violates") == "ok":
                return ObserverAssertion(ident)
            return ObserverAssertion(ident, self.word(*VIOLATION_RULES))
        ident = self.ident()
        self.word("level")
        return GapAssertion(ident, self.level())


def parse(text: str) -> Document:
    """Parse one ``.potx`` document; raises :class:`ParseError` on the first violation."""
    return _Parser(text).document()


# --- writer ----------------------------------------------------------------

def format_number(x: float) -> str:
    """Shortest decimal spelling of ``x`` that parses back to the same float."""
    text = repr(float(x))
    if "e" in text or "E" in text:
        text = format(Decimal(text), "f")
    return text


def _quote(label: str) -> str:
    escaped = (label.replace("\\", "\\\\").replace('"', '\\"')
               .replace("\n", "\\n").replace("\t", "\\t"))
    return f'"{escaped}"'


def _line_measure(m: MeasureDecl) -> str:
    text = f"measure {m.id}"
    if m.label is not None:
        text += " " + _quote(m.label)
    return text


def _line_state(s: StateDecl) -> str:
    text = f"state {s.id} {s.physicality}"
    if s.domain is not None:
        text += " domain { " + ", ".join(s.domain) + " }"
    if s.label is not None:
        text += " " + _quote(s.label)
    return text


def _line_model(m: ModelDecl) -> str:
    parts = ["in: " + ", ".join(m.inputs), "out: " + ", ".join(sorted(m.outputs))]
    if m.goal:
        parts.append("goal")
    if m.alt_of is not None:
        parts.append("alt-of: " + m.alt_of)
    return f"model {m.id} {{ " + "; ".join(parts) + " }"


def _line_observer(o: ObserverDecl) -> str:
    head = f"observer {o.id} level {o.level}"
    if o.experimentable:
        head += " experimentable"
    parts = []
    if o.covers:
        parts.append("covers: " + ", ".join(sorted(o.covers)) + ";")
    if o.embeds:
        parts.append("embeds: " + ", ".join(sorted(o.embeds)) + ";")
    if not parts:
        return head + " {}"
    return head + " { " + " ".join(parts) + " }"


def _lines_cpt(c: CptDecl) -> list[str]:
    lines = [f"cpt {c.id} {{"]
    for row in c.rows:
        probs = ", ".join(f"{v}: {format_number(p)}" for v, p in row.probs)
        lines.append(f"  row ({', '.join(row.parents)}) -> {{ {probs} }}")
    lines.append("}")
    return lines


def serialize(doc: Document) -> str:
    """Canonical text for ``doc``; ``parse(serialize(d)) == d``."""
    by_id = lambda d: d.id  # noqa: E731
    lines: list[str] = []
    lines += [_line_measure(m) for m in sorted(doc.measures, key=by_id)]
    lines += [_line_state(s) for s in sorted(doc.states, key=by_id)]
    lines += [_line_model(m) for m in sorted(doc.models, key=by_id)]
    lines += [_line_observer(o) for o in sorted(doc.observers, key=by_id)]
    for c in sorted(doc.cpts, key=by_id):
        lines += _lines_cpt(c)
    if doc.targets:
        lines.append("target transparent { " + ", ".join(doc.targets) + " }")
    if doc.assertions:
        lines.append("expect {")
        lines += [f"  {a}" for a in doc.assertions]
        lines.append("}")
    body = "".join(f"  {line}\n" for line in lines)
    return f"system {doc.name} {{\n{body}}}\n"
