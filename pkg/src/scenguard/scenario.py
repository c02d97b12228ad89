"""Scenario objects as transition systems, and their product composition.

A scenario object is the tuple ``<Q, delta, q0, R, B>``: states, a transition
function, an initial state, and per-state sets of requested events and
blocked labels.  Two concrete kinds live here:

* :class:`ScenarioObject` -- an explicit, finite table such as the
  water-tap scenarios;
* :class:`CompositeObject` -- the product of other objects.

Guard scenarios in :mod:`scenguard.guard` subclass :class:`Scenario`
directly and compute declarations on the fly, since their state carries
values (counters, remembered inputs) rather than names from a table.

Transitions are completed with implicit self-loops: an event no pattern at
the current state matches leaves the object where it is.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from typing import Any, Hashable, Iterable, Mapping, Optional, Sequence

from .errors import DeterminismError, ModelError
from .events import Event, EventPattern, matches


@dataclass(frozen=True)
class SyncDeclaration:
    """What an object declares at a synchronization point.

    ``only_allow``, when set, blocks every label outside it; the controller
    scenario uses this to "block all other events" while its outputs are
    pending.
    """

    requested: tuple = ()
    waited: tuple = ()
    blocked: frozenset = frozenset()
    only_allow: Optional[frozenset] = None

    def __post_init__(self):
        object.__setattr__(self, "requested", tuple(self.requested))
        object.__setattr__(self, "waited", tuple(self.waited))
        object.__setattr__(self, "blocked", frozenset(self.blocked))
        if self.only_allow is not None:
            object.__setattr__(self, "only_allow", frozenset(self.only_allow))

    def blocks(self, label: str) -> bool:
        if label in self.blocked:
            return True
        return self.only_allow is not None and label not in self.only_allow


@dataclass(frozen=True)
class StepContext:
    """Information the execution mechanism hands to objects when an event fires.

    ``None`` fields mean "unknown": objects whose reaction depends on them
    must then report every possible successor.
    """

    evaluation: Any = None
    rng: Any = None


UNKNOWN = StepContext()


class Scenario:
    """Interface shared by explicit, composite and guard scenario objects."""

    name: str = "scenario"
    initial: Hashable

    def declaration_at(self, state) -> SyncDeclaration:
        raise NotImplementedError

    def successors(self, state, event: Event, ctx: StepContext = UNKNOWN) -> tuple:
        """All states the object may move to when ``event`` fires at ``state``."""
        raise NotImplementedError

    def step(self, state, event: Event, ctx: StepContext = UNKNOWN):
        succ = self.successors(state, event, ctx)
        if len(succ) != 1:
            raise DeterminismError(
                f"{self.name}: {len(succ)} successors for {event} at {state!r}; "
                "context is missing information the object needs"
            )
        return succ[0]

    def requestable_labels(self) -> frozenset:
        """Superset of labels this object may ever request."""
        raise NotImplementedError

    def blockable_labels(self) -> frozenset:
        """Superset of labels this object may ever block by name."""
        raise NotImplementedError

    def __repr__(self):
        return f"<{type(self).__name__} {self.name}>"


class ScenarioObject(Scenario):
    """An explicit finite scenario object.

    ``transitions`` maps a state to a list of ``(pattern, target)`` pairs;
    patterns may be given as bare labels.  ``requested`` keeps request
    order, which only matters for the controller fallback.
    """

    def __init__(
        self,
        name: str,
        states: Iterable[Hashable],
        initial: Hashable,
        transitions: Mapping[Hashable, Sequence] = None,
        requested: Mapping[Hashable, Sequence[Event]] = None,
        blocked: Mapping[Hashable, Iterable[str]] = None,
    ):
        self.name = name
        self.states = tuple(dict.fromkeys(states))
        state_set = set(self.states)
        if initial not in state_set:
            raise ModelError(f"{name}: initial state {initial!r} is not a state")
        self.initial = initial
        transitions = transitions or {}
        requested = requested or {}
        blocked = blocked or {}
        for table in (transitions, requested, blocked):
            unknown = set(table) - state_set
            if unknown:
                raise ModelError(f"{name}: unknown states {sorted(map(str, unknown))}")

        self.transitions = {}
        for q in self.states:
            edges = []
            for pattern, target in transitions.get(q, ()):
                if isinstance(pattern, str):
                    pattern = EventPattern(pattern)
                if target not in state_set:
                    raise ModelError(f"{name}: transition {q!r} -> {target!r} leaves Q")
                edges.append((pattern, target))
            self.transitions[q] = tuple(edges)
        self.requested = {q: tuple(dict.fromkeys(requested.get(q, ()))) for q in self.states}
        self.blocked = {q: frozenset(blocked.get(q, ())) for q in self.states}

        for q in self.states:
            for e in self.requested[q]:
                if not any(matches(p, e) for p, _ in self.transitions[q]):
                    raise ModelError(f"{name}: state {q!r} requests {e} but has no transition for it")
            clash = {e.label for e in self.requested[q]} & self.blocked[q]
            if clash:
                raise ModelError(f"{name}: state {q!r} requests and blocks {sorted(clash)}")

    def _check_state(self, state):
        if state not in self.transitions:
            raise ModelError(f"{self.name}: unknown state {state!r}")

    def declaration_at(self, state) -> SyncDeclaration:
        self._check_state(state)
        reqs = self.requested[state]
        waited = tuple(
            p for p, _ in self.transitions[state] if not any(matches(p, e) for e in reqs)
        )
        return SyncDeclaration(reqs, waited, self.blocked[state])

    def successors(self, state, event, ctx=UNKNOWN):
        self._check_state(state)
        hits = [t for p, t in self.transitions[state] if matches(p, event)]
        if len(hits) > 1:
            raise DeterminismError(f"{self.name}: {len(hits)} transitions match {event} at {state!r}")
        return (hits[0],) if hits else (state,)

    def requestable_labels(self):
        return frozenset(e.label for reqs in self.requested.values() for e in reqs)

    def blockable_labels(self):
        return frozenset().union(*self.blocked.values())


class CompositeObject(Scenario):
    """Product of scenario objects: states are tuples of component states."""

    def __init__(self, parts: Sequence[Scenario]):
        self.parts = tuple(parts)
        self.name = "∘".join(p.name for p in self.parts)
        self.initial = tuple(p.initial for p in self.parts)

    @property
    def states(self):
        return tuple(itertools.product(*(p.states for p in self.parts)))

    def declaration_at(self, state) -> SyncDeclaration:
        if len(state) != len(self.parts):
            raise ModelError(f"{self.name}: state {state!r} has wrong width")
        decls = [p.declaration_at(q) for p, q in zip(self.parts, state)]
        allow = [d.only_allow for d in decls if d.only_allow is not None]
        return SyncDeclaration(
            tuple(dict.fromkeys(e for d in decls for e in d.requested)),
            tuple(dict.fromkeys(w for d in decls for w in d.waited)),
            frozenset().union(*(d.blocked for d in decls)),
            frozenset.intersection(*allow) if allow else None,
        )

    def successors(self, state, event, ctx=UNKNOWN):
        per_part = [p.successors(q, event, ctx) for p, q in zip(self.parts, state)]
        return tuple(itertools.product(*per_part))

    def requestable_labels(self):
        return frozenset().union(*(p.requestable_labels() for p in self.parts))

    def blockable_labels(self):
        return frozenset().union(*(p.blockable_labels() for p in self.parts))


def declaration_at(obj: Scenario, state) -> SyncDeclaration:
    return obj.declaration_at(state)


def step(obj: Scenario, state, event: Event, ctx: StepContext = UNKNOWN):
    return obj.step(state, event, ctx)


def compose(o1: Scenario, o2: Scenario) -> CompositeObject:
    return CompositeObject((o1, o2))


def compose_all(objects: Sequence[Scenario]) -> Scenario:
    objects = list(objects)
    if not objects:
        raise ValueError("compose_all needs at least one object")
    result = objects[0]
    for obj in objects[1:]:
        result = compose(result, obj)
    return result


def enabled_in(decl: SyncDeclaration) -> tuple:
    """Events a single (possibly composite) declaration leaves triggerable."""
    return tuple(e for e in decl.requested if not decl.blocks(e.label))


def reachable_states(obj: Scenario, depth: int) -> set:
    """States reachable in at most ``depth`` triggered events.

    Every requested, unblocked event is treated as choosable, and objects
    whose reaction depends on unknown context contribute all successors.
    """
    if depth < 0:
        raise ValueError("depth must be >= 0")
    seen = {obj.initial}
    frontier = deque([(obj.initial, 0)])
    while frontier:
        q, d = frontier.popleft()
        if d == depth:
            continue
        for e in enabled_in(obj.declaration_at(q)):
            for nxt in obj.successors(q, e, UNKNOWN):
                if nxt not in seen:
                    seen.add(nxt)
                    frontier.append((nxt, d + 1))
    return seen
