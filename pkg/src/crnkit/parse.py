"""Text format for reaction networks (``.crn`` files).

One statement per line::

    # comment
    param k1 = 3/2
    species S1 S2 S3          # optional; fixes species order
    S1 + S2 <-> S3 @ k1, 2
    0 -> S1 @ 0.5
    2S1 + S3 -> S2 @ 1e-3

``0`` is the empty complex.  ``->`` takes one rate, ``<->`` takes a forward and a
reverse rate and yields two reactions.  Rates are integers, fractions ``p/q``,
decimals (converted exactly) or parameter names.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .network import Reaction, ReactionNetwork

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_INT = re.compile(r"[0-9]+")
_NUMBER = re.compile(
    r"[-+]?(?:[0-9]+/[0-9]+|(?:[0-9]+\.?[0-9]*|\.[0-9]+)(?:[eE][-+]?[0-9]+)?)"
)
_KEYWORDS = {"param", "species"}


class ParseError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.message = message
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Span:
    line: int
    start: int
    end: int


@dataclass(frozen=True)
class NetworkSource:
    network: ReactionNetwork
    params: dict[str, Fraction]
    spans: tuple[Span, ...]


class _Cursor:
    def __init__(self, text: str, lineno: int):
        self.text = text
        self.pos = 0
        self.lineno = lineno

    def error(self, message: str, pos: int | None = None) -> ParseError:
        return ParseError(message, self.lineno, (self.pos if pos is None else pos) + 1)

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos] in " \t\r":
            self.pos += 1

    def peek(self, s: str) -> bool:
        self.skip_ws()
        return self.text.startswith(s, self.pos)

    def accept(self, s: str) -> bool:
        if self.peek(s):
            self.pos += len(s)
            return True
        return False

    def expect(self, s: str, what: str | None = None):
        if not self.accept(s):
            raise self.error(f"expected {what or repr(s)}")

    def match(self, pattern: re.Pattern) -> str | None:
        self.skip_ws()
        m = pattern.match(self.text, self.pos)
        if not m:
            return None
        self.pos = m.end()
        return m.group()

    def at_end(self) -> bool:
        self.skip_ws()
        return self.pos >= len(self.text)


def parse_rational(text: str) -> Fraction:
    return Fraction(text)


def _parse_side(cur: _Cursor, species: list[str]) -> dict[str, int]:
    start = cur.pos
    cur.skip_ws()
    # the empty complex: a lone 0 not followed by a species name
    m = re.compile(r"0(?![0-9A-Za-z_.])").match(cur.text, cur.pos)
    if m:
        cur.pos = m.end()
        return {}
    side: dict[str, int] = {}
    while True:
        cur.skip_ws()
        coef_pos = cur.pos
        coef_text = cur.match(_INT)
        coef = int(coef_text) if coef_text else 1
        if coef == 0:
            raise cur.error("zero stoichiometric coefficient", coef_pos)
        cur.skip_ws()
        name_pos = cur.pos
        name = cur.match(_IDENT)
        if name is None:
            raise cur.error("expected species name or '0'", name_pos if coef_text or side else start)
        if name in _KEYWORDS:
            raise cur.error(f"{name!r} is a reserved word", name_pos)
        if name not in species:
            species.append(name)
        side[name] = side.get(name, 0) + coef
        if not cur.accept("+"):
            return side


def _parse_rate(cur: _Cursor, params: dict[str, tuple[Fraction, int]]) -> tuple[object, int]:
    cur.skip_ws()
    pos = cur.pos
    text = cur.match(_NUMBER)
    if text is not None:
        try:
            return parse_rational(text), pos
        except (ValueError, ZeroDivisionError):
            raise cur.error(f"invalid rational {text!r}", pos) from None
    name = cur.match(_IDENT)
    if name is None:
        raise cur.error("expected rate (number or parameter name)", pos)
    return name, pos


def parse_source(text: str, overrides: dict[str, Fraction] | None = None) -> NetworkSource:
    """Parse a network document, keeping line/column spans of each reaction.

    ``overrides`` replaces the values of declared parameters.
    """
    params: dict[str, tuple[Fraction, int]] = {}
    species: list[str] = []
    pending = []  # (lineno, start, end, lhs, rhs, [(rate, pos)])

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        cur = _Cursor(line, lineno)
        if cur.at_end():
            continue
        head = re.match(r"\s*(param|species)\b", line)
        if head and not re.search(r"->", line):
            cur.pos = head.end()
            if head.group(1) == "param":
                cur.skip_ws()
                name_pos = cur.pos
                name = cur.match(_IDENT)
                if name is None:
                    raise cur.error("expected parameter name", name_pos)
                if name in params:
                    raise cur.error(f"parameter {name!r} redefined", name_pos)
                cur.expect("=")
                value, pos = _parse_rate(cur, {})
                if isinstance(value, str):
                    raise cur.error("parameter value must be a number", pos)
                if not cur.at_end():
                    raise cur.error("unexpected text after parameter value")
                params[name] = (value, lineno)
            else:
                while not cur.at_end():
                    cur.accept(",")
                    pos = cur.pos
                    name = cur.match(_IDENT)
                    if name is None or name in _KEYWORDS:
                        raise cur.error("expected species name", pos)
                    if name in species:
                        raise cur.error(f"species {name!r} declared twice", pos)
                    species.append(name)
            continue

        cur.skip_ws()
        start = cur.pos
        lhs = _parse_side(cur, species)
        if cur.accept("<->"):
            nrates = 2
        elif cur.accept("->"):
            nrates = 1
        else:
            raise cur.error("expected '->' or '<->'")
        rhs = _parse_side(cur, species)
        cur.expect("@", "'@' followed by rate")
        rates = [_parse_rate(cur, params)]
        while cur.accept(","):
            rates.append(_parse_rate(cur, params))
        if not cur.at_end():
            raise cur.error("unexpected text after reaction")
        if len(rates) != nrates:
            raise ParseError(
                f"{'<->' if nrates == 2 else '->'} takes {nrates} rate(s), got {len(rates)}",
                lineno, start + 1,
            )
        if lhs == rhs:
            raise ParseError("reaction does not change any species", lineno, start + 1)
        pending.append((lineno, start, len(line.rstrip()), lhs, rhs, rates))

    for name, value in (overrides or {}).items():
        if name not in params:
            raise ParseError(f"cannot set undeclared parameter {name!r}", 0, 0)
        params[name] = (Fraction(value), params[name][1])

    n = len(species)
    index = {s: i for i, s in enumerate(species)}

    def vec(side):
        v = [0] * n
        for s, c in side.items():
            v[index[s]] = c
        return tuple(v)

    reactions, spans = [], []
    for lineno, start, end, lhs, rhs, rates in pending:
        values = []
        for rate, pos in rates:
            if isinstance(rate, str):
                if rate not in params:
                    raise ParseError(f"unknown parameter {rate!r}", lineno, pos + 1)
                rate = params[rate][0]
            if rate <= 0:
                raise ParseError(f"rate must be positive, got {rate}", lineno, pos + 1)
            values.append(rate)
        a, b = vec(lhs), vec(rhs)
        span = Span(lineno, start + 1, end)
        reactions.append(Reaction(a, b, values[0]))
        spans.append(span)
        if len(values) == 2:
            reactions.append(Reaction(b, a, values[1]))
            spans.append(span)
    net = ReactionNetwork(tuple(species), tuple(reactions))
    return NetworkSource(net, {k: v for k, (v, _) in params.items()}, tuple(spans))


def parse_network(text: str, overrides: dict[str, Fraction] | None = None) -> ReactionNetwork:
    return parse_source(text, overrides).network


def load_network(path) -> ReactionNetwork:
    with open(path, encoding="utf-8") as fh:
        return parse_network(fh.read())


def _format_side(species, v) -> str:
    terms = [name if c == 1 else f"{c} {name}" for name, c in zip(species, v) if c]
    return " + ".join(terms) if terms else "0"


def format_network(net: ReactionNetwork) -> str:
    """Canonical text; ``parse_network(format_network(net)) == net``."""
    for s in net.species:
        if not _IDENT.fullmatch(s) or s in _KEYWORDS:
            raise ValueError(f"species name {s!r} cannot be written in the text format")
    lines = []
    if net.species:
        lines.append("species " + " ".join(net.species))
    for r in net.reactions:
        lines.append(f"{_format_side(net.species, r.source)} -> "
                     f"{_format_side(net.species, r.target)} @ {r.rate}")
    return "\n".join(lines) + "\n"
