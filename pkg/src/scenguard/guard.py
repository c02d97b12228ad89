"""Scenario objects that wrap and guard a network controller.

Every guard here follows the same round structure: wait for the controller's
input event, then (possibly) block some output labels until one output
fires.  Guards may wait for input events but never block them, and never
request output events; :class:`scenguard.engine.ModelInstance` rejects
models that break either rule.

Guard states are small hashable tuples so the verifier can enumerate them.
When a guard's reaction depends on something the execution context does
not provide (raw network scores in black-box verification, coin flips
without an rng) it reports every possible successor.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Union

from .engine import ControllerBinding
from .errors import ArityError, ModelError
from .events import Event, EventPattern
from .predicates import Predicate
from .scenario import UNKNOWN, Scenario, SyncDeclaration

WAIT_INPUT = "in"
WAIT_OUTPUT = "out"


@dataclass(frozen=True)
class OverrideRule:
    """``<P, Q, action>``: if P holds on the inputs and Q on the raw outputs, force ``action``.

    ``None`` stands for the constant-true predicate.  A :class:`Predicate`
    used as ``output_pred`` sees each output label bound to its raw score.
    """

    input_pred: Union[Predicate, Callable, None]
    output_pred: Union[Predicate, Callable, None]
    action: str


@dataclass(frozen=True)
class LivenessSpec:
    target: str
    n: int = 1
    mode: str = "deterministic"  # or "probabilistic"
    p: float = 1.0

    def __post_init__(self):
        if self.mode not in ("deterministic", "probabilistic"):
            raise ValueError(f"unknown liveness mode {self.mode!r}")
        if self.mode == "deterministic" and self.n < 1:
            raise ValueError("n must be >= 1")
        if self.mode == "probabilistic" and not 0 < self.p <= 1:
            raise ValueError("p must lie in (0, 1]")


class _RoundGuard(Scenario):
    """Shared plumbing for guards that observe one controller binding."""

    def __init__(self, name: str, binding: ControllerBinding):
        self.name = name
        self.binding = binding
        self.input_label = binding.input_label
        self.outputs = frozenset(binding.output_labels)
        self._input_pattern = EventPattern(binding.input_label)
        self._output_patterns = tuple(EventPattern(lbl) for lbl in binding.output_labels)

    def _waiting(self, state) -> tuple:
        return (self._input_pattern,) if state[0] == WAIT_INPUT else self._output_patterns

    def requestable_labels(self):
        return frozenset()

    def blockable_labels(self):
        return self.outputs


class ControllerScenario(Scenario):
    """Wait for an input event, then request every output, ranked by the network.

    State ``("ready", ranking)`` stores the ranked output labels, or ``None``
    when the network was not evaluated (black-box exploration); requests
    are then listed in neuron order and carry no preference.
    """

    def __init__(self, binding: ControllerBinding):
        self.binding = binding
        self.name = "controller"
        self.initial = ("wait",)
        self._outputs = frozenset(binding.output_labels)

    def ranking_at(self, state) -> Optional[tuple]:
        return state[1] if state[0] == "ready" else None

    def declaration_at(self, state):
        if state[0] == "wait":
            return SyncDeclaration(waited=(EventPattern(self.binding.input_label),))
        labels = state[1] if state[1] is not None else self.binding.output_labels
        return SyncDeclaration(
            requested=tuple(Event(lbl) for lbl in labels),
            only_allow=self._outputs,
        )

    def successors(self, state, event, ctx=UNKNOWN):
        if state[0] == "wait" and event.label == self.binding.input_label:
            if ctx.evaluation is None:
                return (("ready", None),)
            return (("ready", self.binding.ranked_labels(ctx.evaluation)),)
        if state[0] == "ready" and event.label in self._outputs:
            return (("wait",),)
        return (state,)

    def requestable_labels(self):
        return self._outputs

    def blockable_labels(self):
        return frozenset()


def controller_scenario(binding: ControllerBinding) -> ControllerScenario:
    return ControllerScenario(binding)


class _LazySource:
    """Caches items pulled from an iterable so sensor states can index them."""

    def __init__(self, source: Iterable):
        self._it = iter(source)
        self._items = []
        self._done = False

    def get(self, i: int):
        while len(self._items) <= i and not self._done:
            try:
                self._items.append(tuple(next(self._it)))
            except StopIteration:
                self._done = True
        return self._items[i] if i < len(self._items) else None


class SensorScenario(Scenario):
    """Requests the controller input event once per value tuple from ``source``.

    With ``outputs`` given, the sensor waits for one of them after each input
    before requesting the next, so a lazily generated source is only pulled
    once the previous round has finished.
    """

    def __init__(self, input_label: str, source: Iterable, outputs: Iterable[str] = ()):
        self.name = "sensor"
        self.input_label = input_label
        self.outputs = frozenset(outputs)
        self.source = _LazySource(source)
        self.initial = (0, WAIT_INPUT)

    def declaration_at(self, state):
        i, phase = state
        if phase == WAIT_OUTPUT:
            return SyncDeclaration(waited=tuple(EventPattern(o) for o in sorted(self.outputs)))
        values = self.source.get(i)
        if values is None:
            return SyncDeclaration()
        return SyncDeclaration(requested=(Event(self.input_label, values),))

    def successors(self, state, event, ctx=UNKNOWN):
        i, phase = state
        if phase == WAIT_INPUT and event.label == self.input_label:
            return ((i + 1, WAIT_OUTPUT if self.outputs else WAIT_INPUT),)
        if phase == WAIT_OUTPUT and event.label in self.outputs:
            return ((i, WAIT_INPUT),)
        return (state,)

    def requestable_labels(self):
        return frozenset({self.input_label})

    def blockable_labels(self):
        return frozenset()


def sensor_scenario(input_label: str, source: Iterable, outputs: Iterable[str] = ()) -> SensorScenario:
    return SensorScenario(input_label, source, outputs)


class OverrideRuleScenario(_RoundGuard):
    """Compiled override rule: when P and Q hold, block every output except the action."""

    def __init__(self, rule: OverrideRule, binding: ControllerBinding):
        if rule.action not in binding.output_labels:
            raise ModelError(f"override action {rule.action!r} is not a controller output")
        if isinstance(rule.output_pred, Predicate):
            known = set(binding.output_labels)
            unknown = rule.output_pred.variables - known
            if unknown:
                raise ModelError(f"output predicate uses unknown names {sorted(unknown)}")
        super().__init__(f"rule[{rule.action}]", binding)
        self.rule = rule
        self.initial = (WAIT_INPUT,)
        self._forced_block = self.outputs - {rule.action}

    def declaration_at(self, state):
        blocked = self._forced_block if state == (WAIT_OUTPUT, True) else frozenset()
        return SyncDeclaration(waited=self._waiting(state), blocked=blocked)

    def _output_test(self, evaluation) -> tuple:
        q = self.rule.output_pred
        if q is None:
            return (True,)
        if evaluation is None:
            return (False, True)
        raw = evaluation.raw_outputs
        if isinstance(q, Predicate):
            return (q.evaluate(dict(zip(self.binding.output_labels, raw))),)
        return (bool(q(raw)),)

    def successors(self, state, event, ctx=UNKNOWN):
        if state[0] == WAIT_INPUT and event.label == self.input_label:
            p = self.rule.input_pred
            if p is not None:
                try:
                    holds = bool(p(event.values))
                except IndexError as exc:
                    raise ArityError(f"input predicate indexed past {len(event.values)} values") from exc
                if not holds:
                    return ((WAIT_OUTPUT, False),)
            return tuple((WAIT_OUTPUT, fired) for fired in self._output_test(ctx.evaluation))
        if state[0] == WAIT_OUTPUT and event.label in self.outputs:
            return ((WAIT_INPUT,),)
        return (state,)


def compile_override_rule(rule: OverrideRule, binding: ControllerBinding) -> OverrideRuleScenario:
    return OverrideRuleScenario(rule, binding)


class LivenessGuard(_RoundGuard):
    """After ``n`` consecutive rounds ending in ``target``, block it for one round.

    State is ``(phase, count)``; a non-target output resets the count, and so
    does the forced round.
    """

    def __init__(self, spec: LivenessSpec, binding: ControllerBinding):
        if spec.mode != "deterministic":
            raise ValueError("liveness_guard needs a deterministic spec")
        if spec.target not in binding.output_labels:
            raise ModelError(f"liveness target {spec.target!r} is not a controller output")
        super().__init__(f"liveness[{spec.target}x{spec.n}]", binding)
        self.spec = spec
        self.initial = (WAIT_INPUT, 0)

    def declaration_at(self, state):
        phase, count = state
        blocked = {self.spec.target} if phase == WAIT_OUTPUT and count >= self.spec.n else ()
        return SyncDeclaration(waited=self._waiting(state), blocked=blocked)

    def successors(self, state, event, ctx=UNKNOWN):
        phase, count = state
        if phase == WAIT_INPUT and event.label == self.input_label:
            return ((WAIT_OUTPUT, count),)
        if phase == WAIT_OUTPUT and event.label in self.outputs:
            if event.label == self.spec.target and count < self.spec.n:
                return ((WAIT_INPUT, count + 1),)
            return ((WAIT_INPUT, 0),)
        return (state,)


def liveness_guard(spec: LivenessSpec, binding: ControllerBinding) -> LivenessGuard:
    return LivenessGuard(spec, binding)


class ProbabilisticLivenessGuard(_RoundGuard):
    """Each round, with probability ``p``, block ``target`` for that round.

    Coins come from ``rng`` if one was given here, otherwise from the
    execution context.  With neither, both outcomes are successors.
    """

    def __init__(self, spec: LivenessSpec, binding: ControllerBinding, rng=None):
        if spec.mode != "probabilistic":
            raise ValueError("probabilistic_liveness_guard needs a probabilistic spec")
        if spec.target not in binding.output_labels:
            raise ModelError(f"liveness target {spec.target!r} is not a controller output")
        super().__init__(f"prob-liveness[{spec.target}@{spec.p:g}]", binding)
        self.spec = spec
        self.rng = rng
        self.initial = (WAIT_INPUT,)

    def declaration_at(self, state):
        blocked = {self.spec.target} if state == (WAIT_OUTPUT, True) else ()
        return SyncDeclaration(waited=self._waiting(state), blocked=blocked)

    def successors(self, state, event, ctx=UNKNOWN):
        if state[0] == WAIT_INPUT and event.label == self.input_label:
            rng = self.rng if self.rng is not None else ctx.rng
            if rng is None:
                return ((WAIT_OUTPUT, True),) if self.spec.p >= 1 else ((WAIT_OUTPUT, False), (WAIT_OUTPUT, True))
            return ((WAIT_OUTPUT, rng.random() < self.spec.p),)
        if state[0] == WAIT_OUTPUT and event.label in self.outputs:
            return ((WAIT_INPUT,),)
        return (state,)


def probabilistic_liveness_guard(spec: LivenessSpec, binding: ControllerBinding, rng=None) -> ProbabilisticLivenessGuard:
    return ProbabilisticLivenessGuard(spec, binding, rng)


class JobExistsGuard(_RoundGuard):
    """Block ``y_i`` whenever queue slot ``i`` is empty; never blocks the pass action.

    The first ``slots`` input values are the slot-occupancy flags, slot 1
    first.  Output 0 is "pass" and output ``i`` allocates slot ``i``.
    """

    def __init__(self, slots: int, binding: ControllerBinding):
        if slots < 1:
            raise ValueError("slots must be >= 1")
        if len(binding.output_labels) != slots + 1:
            raise ModelError(f"job-exists guard needs {slots + 1} outputs (pass + one per slot)")
        if binding.network.n_inputs < slots:
            raise ModelError(f"controller input has {binding.network.n_inputs} values, fewer than {slots} slot flags")
        super().__init__(f"job-exists[{slots}]", binding)
        self.slots = slots
        self.initial = (WAIT_INPUT,)

    def declaration_at(self, state):
        blocked = state[1] if state[0] == WAIT_OUTPUT else ()
        return SyncDeclaration(waited=self._waiting(state), blocked=blocked)

    def successors(self, state, event, ctx=UNKNOWN):
        if state[0] == WAIT_INPUT and event.label == self.input_label:
            flags = event.values
            if len(flags) < self.slots:
                raise ArityError(f"input has {len(flags)} values, needs {self.slots} slot flags")
            labels = self.binding.output_labels
            empty = frozenset(labels[i] for i in range(1, self.slots + 1) if not flags[i - 1])
            return ((WAIT_OUTPUT, empty),)
        if state[0] == WAIT_OUTPUT and event.label in self.outputs:
            return ((WAIT_INPUT,),)
        return (state,)

    def blockable_labels(self):
        return frozenset(self.binding.output_labels[1:])


def job_exists_guard(slots: int, binding: ControllerBinding) -> JobExistsGuard:
    return JobExistsGuard(slots, binding)


class SteadyStateGuard(_RoundGuard):
    """Block the repeated output once ``n`` consecutive rounds had the same (input, output).

    States: ``("in", pair, run)`` between rounds and
    ``("out", pair, run, input)`` while an output is pending, where ``pair``
    is the last (input event, output label) and ``run`` how many
    consecutive rounds produced it.  The forced round starts a fresh run,
    so no window of ``n + 1`` rounds is ever steady.
    """

    def __init__(self, n: int, binding: ControllerBinding):
        if n < 2:
            raise ValueError("steady-state guard needs n >= 2")
        super().__init__(f"steady[{n}]", binding)
        self.n = n
        self.initial = (WAIT_INPUT, None, 0)

    def declaration_at(self, state):
        blocked = ()
        if state[0] == WAIT_OUTPUT and state[2] >= self.n:
            blocked = {state[1][1]}
        return SyncDeclaration(waited=self._waiting(state), blocked=blocked)

    def successors(self, state, event, ctx=UNKNOWN):
        if state[0] == WAIT_INPUT and event.label == self.input_label:
            _, pair, run = state
            return ((WAIT_OUTPUT, pair, run, event),)
        if state[0] == WAIT_OUTPUT and event.label in self.outputs:
            _, pair, run, seen = state
            current = (seen, event.label)
            # a forced round cannot repeat the blocked pair, so it always opens a new run
            if current == pair:
                return ((WAIT_INPUT, pair, run + 1),)
            return ((WAIT_INPUT, current, 1),)
        return (state,)


def steady_state_guard(n: int, binding: ControllerBinding) -> SteadyStateGuard:
    return SteadyStateGuard(n, binding)
