import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from models import DATA, add_cold_water, add_hot_water, environment, stability
from oracles import build_object, oracle_traces, random_model_spec, traces_of_engine, traces_of_object
from scenguard.engine import (
    Model,
    ModelInstance,
    Strategy,
    enabled_events,
    run,
    run_step,
    select_event,
)
from scenguard.errors import ModelError
from scenguard.events import Event
from scenguard.guard import OverrideRule, compile_override_rule, sensor_scenario
from scenguard.modelfile import load_model
from scenguard.predicates import Predicate
from scenguard.scenario import ScenarioObject, SyncDeclaration, compose_all

WL, HOT, COLD = Event("WaterLow"), Event("AddHot"), Event("AddCold")
Y1, Y2 = Event("y1"), Event("y2")
TAP_LOG = ["WaterLow", "AddHot", "AddCold", "AddHot", "AddCold", "AddHot", "AddCold"]


def watertap():
    return Model([environment(), add_hot_water(), add_cold_water(), stability()])


def rule_y2():
    return OverrideRule(Predicate.parse("v0 > 0 and v1 < v0"), None, "y2")


def test_enabled_after_waterlow():
    inst = Model([environment(one_shot=True), add_hot_water(), add_cold_water(), stability()]).instance()
    inst.fire(WL)
    assert enabled_events(inst.declarations()) == (HOT,)


def test_enabled_empty():
    assert enabled_events([]) == ()
    assert enabled_events([SyncDeclaration(blocked={"a"})]) == ()


def test_enabled_block_removes_request():
    decls = [SyncDeclaration(requested=(Y1, Y2)), SyncDeclaration(blocked={"y1"})]
    assert enabled_events(decls) == (Y2,)


def test_select_fallback_and_top():
    assert select_event((Y2,), (Y1, Y2), Strategy.CONTROLLER_FIRST) == Y2
    assert select_event((Y1, Y2), (Y2, Y1), Strategy.CONTROLLER_FIRST) == Y2
    assert select_event((), (Y1,)) is None


def test_select_lex_and_random():
    es = (Event("b"), Event("a", (2,)), Event("a", (1,)))
    assert select_event(es, None, "lexicographic") == Event("a", (1,))
    picks = {select_event(es, None, "seeded-random", random.Random(s)) for s in range(50)}
    assert picks == set(es)
    with pytest.raises(ValueError):
        select_event(es, None, Strategy.RANDOM, None)


def test_watertap_first_step_is_waterlow():
    result = run_step(watertap().instance())
    assert result.triggered and result.event == WL


def test_watertap_seven_steps():
    trace = run(watertap().instance(), 7)
    assert [e.label for e in trace.events] == TAP_LOG
    assert trace.reason == "budget"


def test_watertap_file_matches_code_model(data_dir):
    _, model = load_model(data_dir / "watertap.sbm")
    assert run(model.instance(), 70).render() == run(watertap().instance(), 70).render()


def test_render_format():
    trace = run(watertap().instance(), 2)
    assert trace.render() == "WaterLow\nAddHot\n#end: budget\n"


def test_empty_model_quiescent():
    trace = run(Model([]).instance(), 10)
    assert trace.events == [] and trace.reason == "quiescent"


def test_zero_budget_reports_state():
    assert run(watertap().instance(), 0).reason == "budget"
    with pytest.raises(ValueError):
        run(watertap().instance(), -1)


def test_override_on_running_example(binding):
    guarded = Model([sensor_scenario("x", [(1, 0)], binding.output_labels), compile_override_rule(rule_y2(), binding)], binding)
    plain = Model([sensor_scenario("x", [(1, 0)], binding.output_labels)], binding)
    assert [str(e) for e in run(guarded.instance(), 10).events] == ["x(1,0)", "y2"]
    assert [str(e) for e in run(plain.instance(), 10).events] == ["x(1,0)", "y1"]


def test_evaluation_installed_on_input(binding):
    inst = Model([sensor_scenario("x", [(0, 1)], binding.output_labels)], binding).instance()
    run_step(inst)
    assert inst.last_evaluation.raw_outputs == (0.0, 3.0)
    assert binding.last_evaluation is inst.last_evaluation
    assert inst.ranking() == (Y2, Y1)


def test_conflict_deadlock_on_fourth_input(data_dir):
    _, model = load_model(data_dir / "conflict.sbm")
    trace = run(model.instance(), 100)
    assert trace.reason == "deadlock"
    assert [str(e) for e in trace.events] == ["x(2,1)", "y2"] * 3 + ["x(2,1)"]


def test_deadlock_vs_quiescent():
    a = ScenarioObject("a", ["s"], "s", {"s": [("e", "s")]}, {"s": [Event("e")]})
    b = ScenarioObject("b", ["s"], "s", blocked={"s": ["e"]})
    assert run_step(Model([a, b]).instance()).outcome == "deadlock"
    assert run_step(Model([b]).instance()).outcome == "quiescent"


def test_convention_blocking_input_rejected(binding):
    bad = ScenarioObject("bad", ["s"], "s", blocked={"s": ["x"]})
    with pytest.raises(ModelError):
        Model([bad], binding).instance()


def test_convention_requesting_output_rejected(binding):
    bad = ScenarioObject("bad", ["s"], "s", {"s": [("y1", "s")]}, {"s": [Y1]})
    with pytest.raises(ModelError):
        Model([bad], binding).instance()


def test_convention_single_sensor(binding):
    s1 = sensor_scenario("x", [(1, 0)], binding.output_labels)
    s2 = sensor_scenario("x", [(0, 1)], binding.output_labels)
    with pytest.raises(ModelError):
        Model([s1, s2], binding).instance()


def test_binding_arity(running_net):
    from scenguard.engine import ControllerBinding

    with pytest.raises(ModelError):
        ControllerBinding(running_net, "x", ("y1",))


def _blocked_event_safety(inst, steps):
    for _ in range(steps):
        decls = inst.declarations()
        result = run_step(inst)
        if not result.triggered:
            return
        assert not any(d.blocks(result.event.label) for d in decls)
        assert any(result.event in d.requested for d in decls)


@given(st.integers(0, 10**6))
def test_blocked_event_safety_random_models(seed):
    rng = random.Random(seed)
    objs = [build_object(s) for s in random_model_spec(rng)]
    _blocked_event_safety(Model(objs).instance("random", seed), 40)


@given(st.lists(st.sampled_from([(1, 0), (0, 1), (2, 1), (-1, 3)]), max_size=12), st.integers(0, 100))
def test_blocked_event_safety_guarded(inputs, seed):
    _, model = load_model(DATA / "conflict.sbm")
    _blocked_event_safety(model.with_inputs(inputs).instance("random", seed), 40)


@given(st.integers(0, 2**63 - 1))
def test_same_seed_same_trace(seed):
    a = run(watertap().instance("random", seed), 60)
    b = run(watertap().instance("random", seed), 60)
    assert a.render() == b.render()


@given(st.integers(0, 10**6))
def test_engine_traces_equal_composite_and_oracle(seed):
    rng = random.Random(seed)
    specs = random_model_spec(rng)
    objs = [build_object(s) for s in specs]
    engine = traces_of_engine(Model(objs).instance(), 6)
    assert engine == traces_of_object(compose_all(objs), 6) == oracle_traces(specs, 6)


@given(st.integers(0, 10**6), st.integers(0, 2**32))
def test_every_run_is_an_oracle_trace(seed, run_seed):
    rng = random.Random(seed)
    specs = random_model_spec(rng)
    objs = [build_object(s) for s in specs]
    allowed = oracle_traces(specs, 8)
    for strategy in ("lex", "random"):
        trace = run(Model(objs).instance(strategy, run_seed), 8)
        assert tuple(e.label for e in trace.events) in allowed


def test_fork_is_independent():
    inst = watertap().instance("random", 5)
    run_step(inst)
    twin = inst.fork()
    run(twin, 10)
    assert len(inst.trace) == 1
    assert isinstance(inst, ModelInstance)
    run(inst, 10)
    assert inst.trace == twin.trace
