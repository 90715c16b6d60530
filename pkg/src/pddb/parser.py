"""Concrete textual syntax for rule programs: parse and render.

Grammar (``.pddb`` files, UTF-8, ``%`` comments to end of line)::

    program   := (statement ".")*
    statement := rule | directive
    rule      := atom conf ("<-" atom ("," atom)*)? (";" modespec ("," modespec)*)?
    conf      := "<" "[" num "," num "]" "," "[" num "," num "]" ">"
    modespec  := ("conj" | "disj") "=" ("ign"|"ind"|"pc"|"nc"|"me")
    directive := "@default" "(" modespec ("," modespec)* ")"
    atom      := ident ("(" term ("," term)* ")")?
    term      := VARIABLE | CONSTANT

Variables match ``[A-Z][A-Za-z0-9_]*``; constants are bare identifiers
``[a-z][A-Za-z0-9_]*``, unsigned integers, or single-quoted strings.
Omitted modes default to ``conj=ign, disj=pc``; an ``@default`` directive
changes the defaults for the statements after it.

Rendering is canonical: resolved per-rule modes are written explicitly
when they differ from the built-in defaults, numbers use at most 6
significant decimals, and rule order is preserved, so
``parse(render(parse(text))) == parse(text)``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .confidence import (
    ConfidenceLevel,
    format_confidence,
    format_probability,
)
from .lang import (
    Atom,
    Const,
    DEFAULT_CONJ_MODE,
    DEFAULT_DISJ_MODE,
    PProgram,
    PRule,
    Var,
)
from .modes import Mode

__all__ = [
    "SourceSpan",
    "ParseError",
    "parse_program",
    "parse_query",
    "parse_confidence",
    "render",
    "render_atom",
    "render_term",
    "render_rule",
]


@dataclass(frozen=True)
class SourceSpan:
    """Byte offsets plus 1-based line/column of the start."""

    begin: int
    end: int
    line: int
    column: int

    def __post_init__(self):
        if self.begin > self.end:
            raise ValueError("span begin > end")


class ParseError(ValueError):
    def __init__(self, message: str, span: SourceSpan):
        super().__init__(f"{span.line}:{span.column}: {message}")
        self.message = message
        self.span = span


_TOKEN_RE = re.compile(
    r"""
      (?P<ws>\s+)
    | (?P<comment>%[^\n]*)
    | (?P<arrow><-)
    | (?P<number>\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)
    | (?P<var>[A-Z][A-Za-z0-9_]*)
    | (?P<ident>[a-z][A-Za-z0-9_]*)
    | (?P<string>'[^'\n]*')
    | (?P<punct>[()\[\]<>,;.=@])
    """,
    re.VERBOSE,
)

_IDENT_RE = re.compile(r"[a-z][A-Za-z0-9_]*\Z")


@dataclass(frozen=True)
class _Token:
    kind: str  # arrow | number | var | ident | string | punct | eof
    text: str
    span: SourceSpan


def _tokenize(text: str) -> list:
    tokens = []
    pos = 0
    line = 1
    line_start = 0
    n = len(text)
    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            span = SourceSpan(pos, pos + 1, line, pos - line_start + 1)
            raise ParseError(f"unexpected character {text[pos]!r}", span)
        kind = m.lastgroup
        raw = m.group()
        if kind in ("ws", "comment"):
            nl = raw.count("\n")
            if nl:
                line += nl
                line_start = m.start() + raw.rindex("\n") + 1
        else:
            span = SourceSpan(m.start(), m.end(), line, m.start() - line_start + 1)
            tokens.append(_Token(kind, raw, span))
        pos = m.end()
    tokens.append(_Token("eof", "", SourceSpan(n, n, line, n - line_start + 1)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    @property
    def cur(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        tok = self.tokens[self.i]
        if tok.kind != "eof":
            self.i += 1
        return tok

    def fail(self, message: str):
        raise ParseError(message, self.cur.span)

    def expect_punct(self, ch: str) -> _Token:
        if self.cur.kind == "punct" and self.cur.text == ch:
            return self.advance()
        self.fail(f"expected {ch!r}, found {self.cur.text or 'end of input'!r}")

    def at_punct(self, ch: str) -> bool:
        return self.cur.kind == "punct" and self.cur.text == ch

    # ---- grammar ---------------------------------------------------

    def program(self) -> PProgram:
        rules = []
        defaults = {"conj": DEFAULT_CONJ_MODE, "disj": DEFAULT_DISJ_MODE}
        while self.cur.kind != "eof":
            if self.at_punct("@"):
                self.directive(defaults)
            else:
                rules.append(self.rule(defaults))
        return PProgram(tuple(rules))

    def directive(self, defaults: dict) -> None:
        self.expect_punct("@")
        name = self.cur
        if name.kind != "ident" or name.text != "default":
            self.fail("expected 'default' after '@'")
        self.advance()
        self.expect_punct("(")
        self.modespecs(defaults)
        self.expect_punct(")")
        self.expect_punct(".")

    def rule(self, defaults: dict) -> PRule:
        begin = self.cur.span
        head = self.atom()
        conf = self.confidence()
        body = []
        if self.cur.kind == "arrow":
            self.advance()
            body.append(self.atom())
            while self.at_punct(","):
                self.advance()
                body.append(self.atom())
        modes = dict(defaults)
        if self.at_punct(";"):
            self.advance()
            self.modespecs(modes)
        end = self.expect_punct(".")
        span = SourceSpan(begin.begin, end.span.end, begin.line, begin.column)
        return PRule(head, tuple(body), conf, modes["conj"], modes["disj"], span)

    def modespecs(self, into: dict) -> None:
        while True:
            key = self.cur
            if key.kind != "ident" or key.text not in ("conj", "disj"):
                self.fail("expected 'conj' or 'disj'")
            self.advance()
            self.expect_punct("=")
            val = self.cur
            try:
                mode = Mode(val.text)
            except ValueError:
                self.fail("expected a mode: ign, ind, pc, nc or me")
            self.advance()
            into[key.text] = mode
            if not self.at_punct(","):
                return
            self.advance()

    def confidence(self) -> ConfidenceLevel:
        begin = self.cur.span
        self.expect_punct("<")
        self.expect_punct("[")
        a = self.number()
        self.expect_punct(",")
        b = self.number()
        self.expect_punct("]")
        self.expect_punct(",")
        self.expect_punct("[")
        g = self.number()
        self.expect_punct(",")
        d = self.number()
        self.expect_punct("]")
        end = self.expect_punct(">")
        span = SourceSpan(begin.begin, end.span.end, begin.line, begin.column)
        if a > b:
            raise ParseError(f"belief interval [{a},{b}] is empty", span)
        if g > d:
            raise ParseError(f"doubt interval [{g},{d}] is empty", span)
        return ConfidenceLevel(a, b, g, d)

    def number(self) -> float:
        tok = self.cur
        if tok.kind != "number":
            self.fail("expected a number")
        self.advance()
        x = float(tok.text)
        if not 0.0 <= x <= 1.0:
            raise ParseError(f"probability {tok.text} outside [0, 1]", tok.span)
        return x

    def atom(self) -> Atom:
        name = self.cur
        if name.kind != "ident":
            self.fail("expected a predicate name")
        self.advance()
        args = []
        if self.at_punct("("):
            self.advance()
            args.append(self.term())
            while self.at_punct(","):
                self.advance()
                args.append(self.term())
            self.expect_punct(")")
        return Atom(name.text, tuple(args))

    def term(self):
        tok = self.cur
        if tok.kind == "var":
            self.advance()
            return Var(tok.text)
        if tok.kind == "ident":
            self.advance()
            return Const(tok.text)
        if tok.kind == "number":
            if not tok.text.isdigit():
                self.fail("constants must be plain integers")
            self.advance()
            return Const(int(tok.text))
        if tok.kind == "string":
            self.advance()
            return Const(tok.text[1:-1])
        self.fail("expected a term")


def parse_program(text: str) -> PProgram:
    """Parse program text; raises :class:`ParseError` with a source span."""
    return _Parser(text).program()


def parse_query(text: str) -> Atom:
    """Parse a single atom, possibly containing variables."""
    p = _Parser(text)
    atom = p.atom()
    if p.cur.kind != "eof":
        p.fail("trailing input after atom")
    return atom


def parse_confidence(text: str) -> ConfidenceLevel:
    """Parse a standalone ``<[a,b],[g,d]>`` literal."""
    p = _Parser(text)
    conf = p.confidence()
    if p.cur.kind != "eof":
        p.fail("trailing input after confidence")
    return conf


# ---- rendering ------------------------------------------------------


def render_term(t) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t.value, int):
        return str(t.value)
    if _IDENT_RE.match(t.value):
        return t.value
    return f"'{t.value}'"


def render_atom(atom: Atom) -> str:
    if not atom.args:
        return atom.pred
    return f"{atom.pred}({','.join(render_term(t) for t in atom.args)})"


def render_rule(rule: PRule) -> str:
    parts = [render_atom(rule.head), format_confidence(rule.confidence)]
    if rule.body:
        parts.append("<-")
        parts.append(", ".join(render_atom(b) for b in rule.body))
    specs = []
    if rule.conj_mode is not DEFAULT_CONJ_MODE:
        specs.append(f"conj={rule.conj_mode.value}")
    if rule.disj_mode is not DEFAULT_DISJ_MODE:
        specs.append(f"disj={rule.disj_mode.value}")
    if specs:
        parts.append(";")
        parts.append(", ".join(specs))
    return " ".join(parts) + "."


def render(program: PProgram) -> str:
    """Canonical text for a program; stable rule order, one rule per line."""
    return "".join(render_rule(r) + "\n" for r in program.rules)


def format_number(x: float) -> str:
    return format_probability(x)
