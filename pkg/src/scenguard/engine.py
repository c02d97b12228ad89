"""The execution mechanism: synchronize, pick an enabled event, advance everyone.

One call to :func:`run_step` is one synchronization point.  When a network
controller is attached, a controller round spans two steps: the sensor's
input event fires (and the network is evaluated on its values right away),
then the controller scenario requests every output in ranked order and the
highest-ranked output no guard blocks is triggered.
"""

from __future__ import annotations

import copy
import enum
import random
from dataclasses import dataclass
from typing import Optional, Sequence

from .dnn import Evaluation, Network, evaluate
from .errors import ModelError
from .events import Event, format_event
from .scenario import Scenario, StepContext, SyncDeclaration


class Strategy(str, enum.Enum):
    CONTROLLER_FIRST = "controller-first"
    LEXICOGRAPHIC = "lex"
    RANDOM = "random"

    @classmethod
    def coerce(cls, value) -> "Strategy":
        if isinstance(value, cls):
            return value
        aliases = {"lexicographic": cls.LEXICOGRAPHIC, "seeded-random": cls.RANDOM}
        return aliases.get(value) or cls(value)


@dataclass
class ControllerBinding:
    """Ties a network to its input event label and one output label per neuron."""

    network: Network
    input_label: str
    output_labels: tuple
    last_evaluation: Optional[Evaluation] = None

    def __post_init__(self):
        self.output_labels = tuple(self.output_labels)
        if len(self.output_labels) != self.network.n_outputs:
            raise ModelError(
                f"{len(self.output_labels)} output labels for a network with "
                f"{self.network.n_outputs} outputs"
            )
        if len(set(self.output_labels)) != len(self.output_labels):
            raise ModelError("output labels must be distinct")
        if self.input_label in self.output_labels:
            raise ModelError("input label doubles as an output label")

    @property
    def output_events(self) -> tuple:
        return tuple(Event(lbl) for lbl in self.output_labels)

    def ranked_labels(self, evaluation: Evaluation) -> tuple:
        return tuple(self.output_labels[i] for i in evaluation.ranking)


@dataclass(frozen=True)
class StepResult:
    outcome: str  # "triggered" | "deadlock" | "quiescent"
    event: Optional[Event] = None

    @property
    def triggered(self) -> bool:
        return self.outcome == "triggered"


@dataclass
class Trace:
    events: list
    reason: str  # "deadlock" | "quiescent" | "budget"

    def render(self) -> str:
        lines = [format_event(e) for e in self.events]
        lines.append(f"#end: {self.reason}")
        return "\n".join(lines) + "\n"

    def __len__(self):
        return len(self.events)


def enabled_events(declarations: Sequence[SyncDeclaration]) -> tuple:
    """Requested events whose label no declaration blocks, in request order."""
    requested = dict.fromkeys(e for d in declarations for e in d.requested)
    return tuple(e for e in requested if not any(d.blocks(e.label) for d in declarations))


def select_event(enabled, ranking=None, strategy=Strategy.LEXICOGRAPHIC, rng=None) -> Optional[Event]:
    """Highest-ranked enabled event if a ranking applies, else by strategy."""
    if not enabled:
        return None
    if ranking:
        live = set(enabled)
        for e in ranking:
            if e in live:
                return e
    ordered = sorted(enabled, key=Event.sort_key)
    if Strategy.coerce(strategy) is Strategy.RANDOM:
        if rng is None:
            raise ValueError("random strategy needs an rng")
        return rng.choice(ordered)
    return ordered[0]


class ModelInstance:
    """A behavioral model plus its execution state.

    ``objects`` are the environment, guard and sensor scenarios.  If a
    ``controller`` is given, its scenario is appended as the last object.
    """

    def __init__(
        self,
        objects: Sequence[Scenario],
        controller: Optional[ControllerBinding] = None,
        strategy=Strategy.LEXICOGRAPHIC,
        seed: int = 0,
    ):
        from .guard import controller_scenario

        self.controller = controller
        self.strategy = Strategy.coerce(strategy)
        self.seed = seed
        self.objects = list(objects)
        self.controller_object = None
        if controller is not None:
            _check_conventions(self.objects, controller)
            self.controller_object = controller_scenario(controller)
            self.objects.append(self.controller_object)
        self.current = [o.initial for o in self.objects]
        self.trace: list = []
        self.rng = random.Random(seed)
        self.last_evaluation: Optional[Evaluation] = None

    def declarations(self) -> list:
        return [o.declaration_at(q) for o, q in zip(self.objects, self.current)]

    def ranking(self) -> Optional[tuple]:
        if self.controller_object is None:
            return None
        labels = self.controller_object.ranking_at(self.current[-1])
        if labels is None:
            return None
        return tuple(Event(lbl) for lbl in labels)

    def fire(self, event: Event) -> None:
        """Trigger ``event``: evaluate the network if it is an input, advance all objects."""
        if self.controller is not None and event.label == self.controller.input_label:
            self.last_evaluation = evaluate(self.controller.network, event.values)
            self.controller.last_evaluation = self.last_evaluation
        ctx = StepContext(self.last_evaluation, self.rng)
        self.current = [o.step(q, event, ctx) for o, q in zip(self.objects, self.current)]
        self.trace.append(event)

    def fork(self) -> "ModelInstance":
        """Independent copy of the execution state (objects stay shared)."""
        twin = copy.copy(self)
        twin.current = list(self.current)
        twin.trace = list(self.trace)
        twin.rng = random.Random()
        twin.rng.setstate(self.rng.getstate())
        return twin


@dataclass
class Model:
    """A collection of scenario objects, optionally around a network controller."""

    objects: list
    controller: Optional[ControllerBinding] = None

    def instance(self, strategy=Strategy.LEXICOGRAPHIC, seed: int = 0) -> ModelInstance:
        return ModelInstance(self.objects, self.controller, strategy, seed)

    def with_inputs(self, inputs) -> "Model":
        """Same model with its sensor replaced by one that replays ``inputs``."""
        from .guard import SensorScenario, sensor_scenario

        if self.controller is None:
            raise ModelError("model has no controller to feed inputs to")
        others = [o for o in self.objects if not isinstance(o, SensorScenario)]
        sensor = sensor_scenario(self.controller.input_label, list(inputs), self.controller.output_labels)
        return Model([sensor] + others, self.controller)


def _check_conventions(objects, controller: ControllerBinding):
    outputs = set(controller.output_labels)
    requesters = []
    for obj in objects:
        if controller.input_label in obj.blockable_labels():
            raise ModelError(f"{obj.name} blocks input event {controller.input_label}")
        bad = outputs & obj.requestable_labels()
        if bad:
            raise ModelError(f"{obj.name} requests controller outputs {sorted(bad)}")
        if controller.input_label in obj.requestable_labels():
            requesters.append(obj.name)
    if len(requesters) > 1:
        raise ModelError(f"several sensors request {controller.input_label}: {requesters}")


def run_step(instance: ModelInstance) -> StepResult:
    decls = instance.declarations()
    if not any(d.requested for d in decls):
        return StepResult("quiescent")
    enabled = enabled_events(decls)
    if not enabled:
        return StepResult("deadlock")
    event = select_event(enabled, instance.ranking(), instance.strategy, instance.rng)
    instance.fire(event)
    return StepResult("triggered", event)


def run(instance: ModelInstance, max_steps: int) -> Trace:
    if max_steps < 0:
        raise ValueError("max_steps must be >= 0")
    for _ in range(max_steps):
        result = run_step(instance)
        if not result.triggered:
            return Trace(list(instance.trace), result.outcome)
    # a budget stop still reports a terminal state if the model reached one
    final = run_step_probe(instance)
    return Trace(list(instance.trace), final or "budget")


def run_step_probe(instance: ModelInstance) -> Optional[str]:
    """Outcome of the next step if it would not trigger anything, without firing."""
    decls = instance.declarations()
    if not any(d.requested for d in decls):
        return "quiescent"
    if not enabled_events(decls):
        return "deadlock"
    return None
