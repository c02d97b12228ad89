"""Explicit-state deadlock checking of guarded models over a finite input alphabet.

The checker runs a breadth-first search over tuples of object states.  The
model's sensor is replaced by one that may request any alphabet entry, so
every input sequence is covered.  Two modes resolve the controller:

``concrete``
    the network is evaluated and its highest-ranked unblocked output fires;
``blackbox``
    any unblocked output may fire, as if nothing were known about the network.

Depth counts triggered events, so one controller round costs two levels.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from typing import Optional, Sequence

from .dnn import evaluate
from .engine import Model, Trace, enabled_events, run
from .errors import ArityError, ModelError
from .events import Event, EventPattern, format_event, parse_value_lines
from .guard import WAIT_INPUT, WAIT_OUTPUT, SensorScenario, controller_scenario
from .scenario import UNKNOWN, Scenario, StepContext, SyncDeclaration

MODES = ("concrete", "blackbox")


@dataclass(frozen=True)
class InputAlphabet:
    entries: tuple

    def __post_init__(self):
        entries = tuple(tuple(float(v) if not isinstance(v, bool) else v for v in e) for e in self.entries)
        if not entries:
            raise ValueError("input alphabet must be nonempty")
        if len({len(e) for e in entries}) != 1:
            raise ArityError("alphabet entries differ in length")
        object.__setattr__(self, "entries", tuple(dict.fromkeys(entries)))

    @property
    def arity(self) -> int:
        return len(self.entries[0])


@dataclass(frozen=True)
class ExplorationStats:
    states_visited: int
    frontier_max: int
    depth_reached: int


@dataclass(frozen=True)
class Verdict:
    """``safe`` up to ``depth``, or a deadlock with its shortest witness."""

    safe: bool
    depth: int
    stats: ExplorationStats
    inputs: tuple = ()
    trace: tuple = ()
    confirmed: Optional[bool] = None

    @property
    def deadlock_step(self) -> Optional[int]:
        """1-based index of the synchronization point that deadlocks."""
        return None if self.safe else len(self.trace) + 1

    def render(self) -> str:
        if self.safe:
            return f"safe(depth={self.depth}) states={self.stats.states_visited}\n"
        lines = [",".join(format(v, ".6g") if not isinstance(v, bool) else str(v).lower() for v in x)
                 for x in self.inputs]
        lines.append("---")
        lines.extend(format_event(e) for e in self.trace)
        lines.append(f"#deadlock at step {self.deadlock_step}")
        return "\n".join(lines) + "\n"


class _AlphabetSensor(Scenario):
    """Offers every alphabet entry as the next input, once per controller round."""

    def __init__(self, input_label: str, alphabet: InputAlphabet, outputs):
        self.name = "alphabet-sensor"
        self.input_label = input_label
        self.outputs = frozenset(outputs)
        self.events = tuple(Event(input_label, e) for e in alphabet.entries)
        self.initial = WAIT_INPUT

    def declaration_at(self, state):
        if state == WAIT_INPUT:
            return SyncDeclaration(requested=self.events)
        return SyncDeclaration(waited=tuple(EventPattern(o) for o in sorted(self.outputs)))

    def successors(self, state, event, ctx=UNKNOWN):
        if state == WAIT_INPUT and event.label == self.input_label:
            return (WAIT_OUTPUT,)
        if state == WAIT_OUTPUT and event.label in self.outputs:
            return (WAIT_INPUT,)
        return (state,)

    def requestable_labels(self):
        return frozenset({self.input_label})

    def blockable_labels(self):
        return frozenset()


def _prepare(model: Model, alphabet: Optional[InputAlphabet]) -> list:
    objects = list(model.objects)
    ctrl = model.controller
    if ctrl is None:
        return objects
    if alphabet is None:
        raise ModelError("a model with a controller needs an input alphabet")
    if alphabet.arity != ctrl.network.n_inputs:
        raise ArityError(f"alphabet entries have {alphabet.arity} values, network takes {ctrl.network.n_inputs}")
    # validates the model conventions on the original objects
    model.instance()
    objects = [o for o in objects if not isinstance(o, SensorScenario)]
    objects.insert(0, _AlphabetSensor(ctrl.input_label, alphabet, ctrl.output_labels))
    objects.append(controller_scenario(ctrl))
    return objects


def _bfs(model, alphabet, mode, depth, stop_at_deadlock):
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if depth < 0:
        raise ValueError("depth must be >= 0")
    objects = _prepare(model, alphabet)
    ctrl = model.controller
    controller_obj = objects[-1] if ctrl is not None else None

    init = tuple(o.initial for o in objects)
    parents = {init: None}
    queue = deque([(init, 0)])
    frontier_max = 1
    depth_reached = 0
    evaluations = {}

    def stats():
        return ExplorationStats(len(parents), frontier_max, depth_reached)

    while queue:
        key, d = queue.popleft()
        decls = [o.declaration_at(q) for o, q in zip(objects, key)]
        if not any(dc.requested for dc in decls):
            continue
        enabled = enabled_events(decls)
        if not enabled:
            if stop_at_deadlock:
                return key, parents, stats()
            continue
        if d == depth:
            continue

        candidates = enabled
        if mode == "concrete" and controller_obj is not None:
            ranked = controller_obj.ranking_at(key[-1])
            if ranked:
                live = {e.label for e in enabled}
                top = next((lbl for lbl in ranked if lbl in live), None)
                candidates = tuple(e for e in enabled if e.label == top) or enabled

        for e in candidates:
            ctx = UNKNOWN
            if mode == "concrete" and ctrl is not None and e.label == ctrl.input_label:
                if e.values not in evaluations:
                    evaluations[e.values] = evaluate(ctrl.network, e.values)
                ctx = StepContext(evaluation=evaluations[e.values])
            options = [o.successors(q, e, ctx) for o, q in zip(objects, key)]
            for nxt in itertools.product(*options):
                if nxt not in parents:
                    parents[nxt] = (key, e)
                    queue.append((nxt, d + 1))
                    depth_reached = max(depth_reached, d + 1)
            frontier_max = max(frontier_max, len(queue))
    return None, parents, stats()


def _path(parents, key) -> list:
    events = []
    while parents[key] is not None:
        key, e = parents[key]
        events.append(e)
    return events[::-1]


def check_deadlock_freedom(
    model: Model,
    alphabet: Optional[InputAlphabet] = None,
    mode: str = "blackbox",
    depth: int = 10,
) -> Verdict:
    """Search for a reachable deadlock within ``depth`` triggered events.

    Returns the shortest witness; ties follow alphabet order, then request
    order.  A witness is ``confirmed`` when replaying its inputs through the
    engine with the real network deadlocks too (black-box witnesses may rely
    on outputs the network would never pick).
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if isinstance(alphabet, (list, tuple)):
        alphabet = InputAlphabet(tuple(alphabet))
    dead, parents, stats = _bfs(model, alphabet, mode, depth, stop_at_deadlock=True)
    if dead is None:
        return Verdict(True, depth, stats)
    events = _path(parents, dead)
    ctrl = model.controller
    if ctrl is not None:
        inputs = tuple(e.values for e in events if e.label == ctrl.input_label)
        replayed = replay(model, inputs)
        confirmed = replayed.reason == "deadlock"
    else:
        inputs = ()
        confirmed = _refire(model, events)
    return Verdict(False, depth, stats, inputs, tuple(events), confirmed)


def _refire(model: Model, events) -> bool:
    inst = model.instance()
    for e in events:
        if e not in enabled_events(inst.declarations()):
            return False
        inst.fire(e)
    decls = inst.declarations()
    return any(d.requested for d in decls) and not enabled_events(decls)


def replay(model: Model, inputs: Sequence[Sequence[float]], strategy="lex", seed: int = 0) -> Trace:
    """Run the model with its sensor fed exactly ``inputs``."""
    inputs = [tuple(x) for x in inputs]
    if model.controller is None:
        return run(model.instance(strategy, seed), 0)
    inst = model.with_inputs(inputs).instance(strategy, seed)
    return run(inst, 4 * len(inputs) + 16)


def explore(model: Model, alphabet: Optional[InputAlphabet] = None, mode: str = "blackbox", depth: int = 10) -> ExplorationStats:
    """Statistics of the full traversal up to ``depth`` (deadlocks do not stop it)."""
    if isinstance(alphabet, (list, tuple)):
        alphabet = InputAlphabet(tuple(alphabet))
    return _bfs(model, alphabet, mode, depth, stop_at_deadlock=False)[2]


def load_alphabet(text: str) -> InputAlphabet:
    """One input tuple per line, values comma-separated; ``#`` starts a comment."""
    return InputAlphabet(tuple(parse_value_lines(text)))
