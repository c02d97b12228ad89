"""A tiny boolean expression language for guard conditions.

Expressions combine comparisons with ``and``/``or``/``not`` (the symbols
``∧``, ``∨``, ``&&``, ``||``, ``!`` and ``¬`` are accepted as well)::

    v0 > 0 and v1 < v0
    y2 > 10
    not v3 or v4 == true

Identifiers are resolved against an environment at evaluation time.  For
event values the environment maps ``v0``, ``v1``, ... to the event's value
tuple; for raw network outputs it maps output labels to their scores.
"""

from __future__ import annotations

import operator
import re
from dataclasses import dataclass, field
from typing import Mapping

from .errors import ArityError, ParseError

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>-?(?:\d+\.\d*|\.\d+|\d+)(?:[eE][-+]?\d+)?)
  | (?P<op><=|>=|==|!=|<|>|≤|≥|≠)
  | (?P<and>&&|∧)
  | (?P<or>\|\||∨)
  | (?P<not>!|¬)
  | (?P<lpar>\()
  | (?P<rpar>\))
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
    """,
    re.VERBOSE,
)

_COMPARE = {
    "<": operator.lt,
    "<=": operator.le,
    "≤": operator.le,
    ">": operator.gt,
    ">=": operator.ge,
    "≥": operator.ge,
    "==": operator.eq,
    "!=": operator.ne,
    "≠": operator.ne,
}
_CANONICAL_OP = {"≤": "<=", "≥": ">=", "≠": "!="}

_VALUE_VAR = re.compile(r"v(\d+)$")


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", column=pos + 1)
        kind = m.lastgroup
        value = m.group()
        if kind == "name" and value in ("and", "or", "not"):
            kind = value
        if kind != "ws":
            tokens.append((kind, value, pos + 1))
        pos = m.end()
    tokens.append(("end", "", len(text) + 1))
    return tokens


# AST nodes are plain tuples: ("const", v), ("var", name), ("cmp", op, a, b),
# ("and", a, b), ("or", a, b), ("not", a).


class _Parser:
    def __init__(self, text):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self, kind=None):
        tok = self.tokens[self.i]
        if kind is not None and tok[0] != kind:
            what = tok[1] or "end of expression"
            raise ParseError(f"expected {kind}, found {what!r}", column=tok[2])
        self.i += 1
        return tok

    def parse(self):
        node = self.disjunction()
        self.take("end")
        return node

    def disjunction(self):
        node = self.conjunction()
        while self.peek()[0] == "or":
            self.take()
            node = ("or", node, self.conjunction())
        return node

    def conjunction(self):
        node = self.negation()
        while self.peek()[0] == "and":
            self.take()
            node = ("and", node, self.negation())
        return node

    def negation(self):
        if self.peek()[0] == "not":
            self.take()
            return ("not", self.negation())
        return self.comparison()

    def comparison(self):
        left = self.atom()
        if self.peek()[0] == "op":
            op = self.take()[1]
            right = self.atom()
            return ("cmp", _CANONICAL_OP.get(op, op), left, right)
        return left

    def atom(self):
        kind, value, col = self.peek()
        if kind == "lpar":
            self.take()
            node = self.disjunction()
            self.take("rpar")
            return node
        if kind == "num":
            self.take()
            return ("const", float(value))
        if kind == "name":
            self.take()
            if value == "true":
                return ("const", True)
            if value == "false":
                return ("const", False)
            return ("var", value)
        raise ParseError(f"unexpected {value or 'end of expression'!r}", column=col)


def _variables(node, out):
    tag = node[0]
    if tag == "var":
        out.add(node[1])
    elif tag == "cmp":
        _variables(node[2], out)
        _variables(node[3], out)
    elif tag in ("and", "or"):
        _variables(node[1], out)
        _variables(node[2], out)
    elif tag == "not":
        _variables(node[1], out)
    return out


def _eval(node, env):
    tag = node[0]
    if tag == "const":
        return node[1]
    if tag == "var":
        return env[node[1]]
    if tag == "cmp":
        return _COMPARE[node[1]](_eval(node[2], env), _eval(node[3], env))
    if tag == "and":
        return bool(_eval(node[1], env)) and bool(_eval(node[2], env))
    if tag == "or":
        return bool(_eval(node[1], env)) or bool(_eval(node[2], env))
    return not _eval(node[1], env)


def _render(node, parent=0):
    # precedence: or=1, and=2, not=3, atoms/cmp=4
    tag = node[0]
    if tag == "const":
        v = node[1]
        if isinstance(v, bool):
            return "true" if v else "false"
        return str(int(v)) if v.is_integer() and abs(v) < 1e16 else repr(v)
    if tag == "var":
        return node[1]
    if tag == "cmp":
        return f"{_render(node[2], 4)} {node[1]} {_render(node[3], 4)}"
    if tag == "not":
        text = f"not {_render(node[1], 3)}"
        prec = 3
    else:
        prec = 1 if tag == "or" else 2
        text = f"{_render(node[1], prec)} {tag} {_render(node[2], prec + 1)}"
    return f"({text})" if prec < parent else text


@dataclass(frozen=True)
class Predicate:
    """A parsed boolean expression. Equality is by canonical text."""

    source: str
    _ast: tuple = field(compare=False, repr=False, hash=False)

    @classmethod
    def parse(cls, text: str) -> "Predicate":
        ast = _Parser(text).parse()
        return cls(_render(ast), ast)

    @property
    def variables(self) -> frozenset:
        return frozenset(_variables(self._ast, set()))

    @property
    def value_arity(self) -> int:
        """Smallest tuple length that defines every ``v<i>`` used."""
        idx = [int(m.group(1)) for m in map(_VALUE_VAR.match, self.variables) if m]
        return max(idx) + 1 if idx else 0

    def evaluate(self, env: Mapping[str, object]) -> bool:
        try:
            return bool(_eval(self._ast, env))
        except KeyError as exc:
            raise ArityError(f"undefined variable {exc.args[0]!r} in {self.source!r}") from None

    def on_values(self, values) -> bool:
        if self.value_arity > len(values):
            raise ArityError(
                f"{self.source!r} needs {self.value_arity} values, got {len(values)}"
            )
        return self.evaluate({f"v{i}": v for i, v in enumerate(values)})

    def __call__(self, values) -> bool:
        return self.on_values(values)

    def __str__(self):
        return self.source


TRUE = Predicate.parse("true")
