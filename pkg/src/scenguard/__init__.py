"""Scenario-based guards around neural-network controllers.

Environment, guard and sensor scenarios run in lockstep with a wrapped
network; guards veto outputs by blocking them, and the verifier checks that
a set of guards can never block every output at once.
"""

from .dnn import Evaluation, Layer, Network, evaluate, load_network, rank_outputs
from .engine import ControllerBinding, Model, ModelInstance, StepResult, Strategy, Trace, enabled_events, run, run_step, select_event
from .errors import ArityError, DeterminismError, ModelError, ParseError, ScenGuardError
from .events import Event, EventPattern, format_event, make_event, matches, parse_event
from .guard import (
    LivenessSpec,
    OverrideRule,
    compile_override_rule,
    controller_scenario,
    job_exists_guard,
    liveness_guard,
    probabilistic_liveness_guard,
    sensor_scenario,
    steady_state_guard,
)
from .modelfile import load_model, parse_model, serialize_model
from .predicates import Predicate
from .scenario import CompositeObject, ScenarioObject, SyncDeclaration, compose, compose_all, declaration_at, reachable_states, step
from .verify import InputAlphabet, Verdict, check_deadlock_freedom, explore, replay

__version__ = "0.1.0"
