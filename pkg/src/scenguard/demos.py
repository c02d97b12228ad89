"""Self-contained demonstrations: water taps, a job scheduler and a congestion controller.

The scheduler and congestion controllers are small hand-set networks
shipped in ``scenguard/data``; their environments are synthetic.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from importlib import resources

from .dnn import load_network
from .engine import ControllerBinding, Model, Trace, run
from .guard import job_exists_guard, sensor_scenario, steady_state_guard
from .modelfile import load_model

SLOTS = 5
ARRIVAL_P = 0.5


def data_path(name: str):
    return resources.files("scenguard") / "data" / name


def _network(name: str):
    return load_network(data_path(name).read_text())


def watertap_trace(steps: int = 7) -> Trace:
    _, model = load_model(data_path("watertap.sbm"))
    return run(model.instance(), steps)


class JobQueue:
    """Five queue slots; each empty slot receives a job with probability 0.5 per round."""

    def __init__(self, rng: random.Random, slots: int = SLOTS, arrival_p: float = ARRIVAL_P):
        self.rng = rng
        self.arrival_p = arrival_p
        self.occupied = [False] * slots

    def arrive(self):
        for i, busy in enumerate(self.occupied):
            if not busy and self.rng.random() < self.arrival_p:
                self.occupied[i] = True

    def allocate(self, slot: int) -> bool:
        """Hand slot ``slot`` (1-based) its resources; False if no job waits there."""
        if not self.occupied[slot - 1]:
            return False
        self.occupied[slot - 1] = False
        return True


@dataclass
class SchedulerRun:
    rounds: int
    allocations: int
    passes: int
    invalid: int
    reason: str

    @property
    def deadlocked(self) -> bool:
        return self.reason == "deadlock"


def scheduler_binding() -> ControllerBinding:
    return ControllerBinding(
        _network("scheduler.net"), "x", tuple(f"y{i}" for i in range(SLOTS + 1))
    )


def run_scheduler(seed: int, steps: int, guarded: bool) -> SchedulerRun:
    binding = scheduler_binding()
    queue = JobQueue(random.Random(seed))
    holder = {}

    def observations():
        while True:
            queue.arrive()
            yield tuple(queue.occupied)
            # resumed only after this round's output fired
            action = int(holder["inst"].trace[-1].label[1:])
            if action:
                queue.allocate(action)

    objects = [sensor_scenario("x", observations(), binding.output_labels)]
    if guarded:
        objects.append(job_exists_guard(SLOTS, binding))
    inst = Model(objects, binding).instance(seed=seed)
    holder["inst"] = inst
    trace = run(inst, steps)
    outputs = [e.label for e in trace.events if e.label != "x"]
    invalid = invalid_allocations(trace.events)
    passes = outputs.count("y0")
    return SchedulerRun(len(outputs), len(outputs) - passes - invalid, passes, invalid, trace.reason)


def invalid_allocations(trace_events, slots: int = SLOTS) -> int:
    """Count outputs ``y_i`` fired in a round whose input marked slot ``i`` empty."""
    bad = 0
    current = None
    for e in trace_events:
        if e.label == "x":
            current = e.values
        elif current is not None and e.label.startswith("y"):
            i = int(e.label[1:])
            if 1 <= i <= slots and not current[i - 1]:
                bad += 1
    return bad


@dataclass
class CongestionRun:
    n: int
    outputs: list
    forced_round: int | None


STEADY_READING = (0.8, 0.01, 20.0)


def congestion_binding() -> ControllerBinding:
    return ControllerBinding(_network("congestion.net"), "x", ("decrease", "hold", "increase"))


def run_congestion(n: int = 10, rounds: int = 30, reading=STEADY_READING, seed: int = 0) -> CongestionRun:
    binding = congestion_binding()
    sensor = sensor_scenario("x", [reading] * rounds, binding.output_labels)
    inst = Model([sensor, steady_state_guard(n, binding)], binding).instance(seed=seed)
    trace = run(inst, 2 * rounds + 1)
    outputs = [e.label for e in trace.events if e.label != "x"]
    forced = next((i + 1 for i, o in enumerate(outputs) if o != outputs[0]), None)
    return CongestionRun(n, outputs, forced)
