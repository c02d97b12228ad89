"""Events, valued events and the patterns scenarios use to react to them."""

from __future__ import annotations

import re
import struct
from dataclasses import dataclass
from typing import Callable, Union

from .errors import ArityError, ParseError
from .predicates import Predicate

Scalar = Union[float, bool]


def _scalar(v) -> Scalar:
    if isinstance(v, bool):
        return v
    return float(v)


def _scalar_key(v):
    # bitwise identity for reals: -0.0 != 0.0, and NaN equals itself
    if isinstance(v, bool):
        return (0, v)
    return (1, struct.pack("<d", v))


@dataclass(frozen=True, eq=False)
class Event:
    label: str
    values: tuple = ()

    def __post_init__(self):
        if not self.label:
            raise ValueError("event label must be nonempty")
        object.__setattr__(self, "values", tuple(_scalar(v) for v in self.values))

    def _key(self):
        return (self.label, tuple(_scalar_key(v) for v in self.values))

    def __eq__(self, other):
        if not isinstance(other, Event):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def sort_key(self):
        return (self.label, len(self.values), tuple((not isinstance(v, bool), float(v)) for v in self.values))

    def __str__(self):
        return format_event(self)

    def __repr__(self):
        return f"Event({format_event(self)})"


def make_event(label: str, values=()) -> Event:
    return Event(label, tuple(values))


def _format_scalar(v: Scalar) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    return format(v, ".6g")


def format_event(event: Event) -> str:
    """Trace text form: ``label`` or ``label(v1,v2,...)``."""
    if not event.values:
        return event.label
    return f"{event.label}({','.join(_format_scalar(v) for v in event.values)})"


_EVENT_RE = re.compile(r"\s*([A-Za-z_][A-Za-z0-9_.\-]*)\s*(?:\((.*)\))?\s*$")


def parse_scalar(text: str) -> Scalar:
    t = text.strip()
    if t == "true":
        return True
    if t == "false":
        return False
    try:
        return float(t)
    except ValueError:
        raise ParseError(f"bad value {t!r}") from None


def parse_event(text: str) -> Event:
    """Inverse of :func:`format_event` (up to the 6-digit value rounding)."""
    m = _EVENT_RE.match(text)
    if m is None:
        raise ParseError(f"bad event {text!r}")
    label, inner = m.groups()
    if inner is None:
        return Event(label)
    if not inner.strip():
        return Event(label)
    return Event(label, tuple(parse_scalar(p) for p in inner.split(",")))


@dataclass(frozen=True)
class EventPattern:
    """Matches events by label, optionally refined by a test over the values.

    ``predicate`` may be a :class:`Predicate` or any callable taking the value
    tuple.  Callables that index past the end of the tuple surface as
    :class:`ArityError`.
    """

    label: str
    predicate: Union[Predicate, Callable, None] = None

    def __str__(self):
        if self.predicate is None:
            return self.label
        return f"{self.label} if {self.predicate}"


def matches(pattern: EventPattern, event: Event) -> bool:
    if pattern.label != event.label:
        return False
    if pattern.predicate is None:
        return True
    try:
        return bool(pattern.predicate(event.values))
    except IndexError as exc:
        raise ArityError(f"predicate on {pattern.label} indexed past {len(event.values)} values") from exc


def parse_value_lines(text: str) -> list:
    """One comma-separated value tuple per line; ``#`` starts a comment."""
    rows = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            rows.append(tuple(parse_scalar(v) for v in line.strip("()").split(",")))
    return rows
