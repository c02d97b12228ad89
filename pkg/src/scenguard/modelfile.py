"""Reader and writer for ``.sbm`` model files.

Line-oriented; indentation is cosmetic and ``#`` starts a comment::

    event WaterLow
    event x arity 2

    scenario Stability
      state s1 initial
        block AddCold
        on AddHot -> s2
      state s2
        block AddHot
        on AddCold -> s1

    assembly
      controller running_example.net input x outputs y1 y2
      sensor input x from [(1,0), (2,1)*3]
      guard rule if v0 > 0 and v1 < v0 force y2
      guard rule if v0 > 0 when y2 > 10 force y2
      guard liveness y2 3
      guard prob-liveness y2 0.1
      guard job-exists 5
      guard steady 10

``sensor ... from`` takes an inline list (``*k`` repeats an entry) or a path
to a file with one comma-separated tuple per line.  Relative paths resolve
against the model file's directory.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .dnn import load_network
from .engine import ControllerBinding, Model
from .errors import ParseError
from .events import Event, EventPattern, matches, parse_scalar, parse_value_lines
from .guard import (
    LivenessSpec,
    OverrideRule,
    compile_override_rule,
    job_exists_guard,
    liveness_guard,
    probabilistic_liveness_guard,
    sensor_scenario,
    steady_state_guard,
)
from .predicates import Predicate
from .scenario import ScenarioObject

GUARD_KINDS = ("rule", "liveness", "prob-liveness", "job-exists", "steady")

_LABEL_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*$")
_TOKEN_RE = re.compile(r"[^\s(]+(?:\([^)]*\))?|\S+")
_REQ_RE = re.compile(r"([A-Za-z_][A-Za-z0-9_]*)(?:\((.*)\))?$")
_TUPLE_RE = re.compile(r"\(([^)]*)\)(?:\s*\*\s*(\d+))?")


@dataclass(frozen=True)
class Transition:
    label: str
    predicate: Optional[Predicate]
    target: str


@dataclass(frozen=True)
class StateDecl:
    name: str
    initial: bool = False
    requests: tuple = ()
    blocks: frozenset = frozenset()
    transitions: tuple = ()


@dataclass(frozen=True)
class ScenarioDecl:
    name: str
    states: dict  # name -> StateDecl; order-insensitive equality

    @property
    def initial(self) -> str:
        return next(s.name for s in self.states.values() if s.initial)


@dataclass(frozen=True)
class ControllerDecl:
    weights: str
    input: str
    outputs: tuple


@dataclass(frozen=True)
class SensorDecl:
    input: str
    inline: Optional[tuple] = None
    file: Optional[str] = None


@dataclass(frozen=True)
class GuardDecl:
    kind: str
    target: Optional[str] = None
    n: Optional[int] = None
    p: Optional[float] = None
    slots: Optional[int] = None
    input_pred: Optional[Predicate] = None
    output_pred: Optional[Predicate] = None


@dataclass(frozen=True)
class ModelDocument:
    events: dict = field(default_factory=dict)  # label -> arity
    scenarios: tuple = ()
    controller: Optional[ControllerDecl] = None
    sensor: Optional[SensorDecl] = None
    guards: tuple = ()


def _tokens(line: str):
    return [(m.group(), m.start() + 1) for m in _TOKEN_RE.finditer(line)]


def _parse_tuples(text: str, lineno: int, col: int) -> tuple:
    body = text.strip()
    if not (body.startswith("[") and body.endswith("]")):
        raise ParseError("expected an inline list like [(1,0),(0,1)]", lineno, col)
    body = body[1:-1]
    out = []
    pos = 0
    for m in _TUPLE_RE.finditer(body):
        if body[pos:m.start()].strip(" ,"):
            raise ParseError(f"unexpected {body[pos:m.start()].strip()!r} in list", lineno, col)
        try:
            values = tuple(parse_scalar(v) for v in m.group(1).split(",")) if m.group(1).strip() else ()
        except ParseError as exc:
            raise ParseError(exc.message, lineno, col) from None
        out.extend([values] * int(m.group(2) or 1))
        pos = m.end()
    if body[pos:].strip(" ,"):
        raise ParseError(f"unexpected {body[pos:].strip()!r} in list", lineno, col)
    return tuple(out)


class _Reader:
    def __init__(self, text: str):
        self.events = {}
        self.scenarios = []
        self.controller = None
        self.sensor = None
        self.guards = []
        self.section = None  # None | "scenario" | "assembly"
        self.current = None  # scenario being read: dict with name, states, order
        self.state = None  # state being read: dict
        self.text = text

    def fail(self, msg, lineno, col=1):
        raise ParseError(msg, lineno, col)

    def label(self, tok, lineno, col, *, arity=None):
        if tok not in self.events:
            self.fail(f"undeclared event {tok!r}", lineno, col)
        if arity is not None and self.events[tok] != arity:
            self.fail(f"event {tok} has arity {self.events[tok]}, got {arity} values", lineno, col)
        return tok

    def parse(self) -> ModelDocument:
        for lineno, raw in enumerate(self.text.splitlines(), start=1):
            line = raw.split("#", 1)[0].rstrip()
            toks = _tokens(line)
            if not toks:
                continue
            head, col = toks[0]
            if head == "event":
                self.event_line(toks, lineno)
            elif head == "scenario":
                self.finish_scenario()
                if len(toks) != 2:
                    self.fail("expected 'scenario <Name>'", lineno, col)
                name = toks[1][0]
                if any(s.name == name for s in self.scenarios):
                    self.fail(f"duplicate scenario {name!r}", lineno, toks[1][1])
                self.section = "scenario"
                self.current = {"name": name, "states": {}, "line": lineno}
                self.state = None
            elif head == "assembly":
                self.finish_scenario()
                if len(toks) != 1:
                    self.fail("unexpected text after 'assembly'", lineno, toks[1][1])
                self.section = "assembly"
            elif head in ("state", "request", "block", "on"):
                if self.section != "scenario":
                    self.fail(f"'{head}' outside a scenario", lineno, col)
                getattr(self, f"{head}_line")(line, toks, lineno)
            elif head in ("controller", "sensor", "guard"):
                if self.section != "assembly":
                    self.fail(f"'{head}' outside the assembly section", lineno, col)
                getattr(self, f"{head}_line")(line, toks, lineno)
            else:
                self.fail(f"unknown directive {head!r}", lineno, col)
        self.finish_scenario()
        return ModelDocument(
            dict(self.events),
            tuple(self.scenarios),
            self.controller,
            self.sensor,
            tuple(self.guards),
        )

    # -- top level -------------------------------------------------------

    def event_line(self, toks, lineno):
        if self.section is not None:
            self.fail("events must be declared before scenarios and assembly", lineno, toks[0][1])
        if len(toks) not in (2, 4) or (len(toks) == 4 and toks[2][0] != "arity"):
            self.fail("expected 'event <Label> [arity <k>]'", lineno, toks[0][1])
        name, col = toks[1]
        if not _LABEL_RE.match(name):
            self.fail(f"bad event label {name!r}", lineno, col)
        if name in self.events:
            self.fail(f"duplicate event {name!r}", lineno, col)
        arity = 0
        if len(toks) == 4:
            try:
                arity = int(toks[3][0])
            except ValueError:
                arity = -1
            if arity < 0:
                self.fail(f"bad arity {toks[3][0]!r}", lineno, toks[3][1])
        self.events[name] = arity

    # -- scenarios -------------------------------------------------------

    def need_state(self, lineno, col):
        if self.state is None:
            self.fail("directive before any 'state'", lineno, col)
        return self.state

    def state_line(self, line, toks, lineno):
        if len(toks) not in (2, 3) or (len(toks) == 3 and toks[2][0] != "initial"):
            self.fail("expected 'state <name> [initial]'", lineno, toks[0][1])
        name, col = toks[1]
        states = self.current["states"]
        if name in states:
            self.fail(f"duplicate state {name!r}", lineno, col)
        if len(toks) == 3 and any(s["initial"] for s in states.values()):
            self.fail("second initial state", lineno, toks[2][1])
        self.state = {"name": name, "initial": len(toks) == 3, "requests": [], "blocks": set(), "on": [], "line": lineno}
        states[name] = self.state

    def request_line(self, line, toks, lineno):
        st = self.need_state(lineno, toks[0][1])
        if len(toks) < 2:
            self.fail("expected 'request <Event> ...'", lineno, toks[0][1])
        for tok, col in toks[1:]:
            m = _REQ_RE.match(tok)
            if m is None:
                self.fail(f"bad event {tok!r}", lineno, col)
            label, inner = m.groups()
            values = ()
            if inner is not None and inner.strip():
                try:
                    values = tuple(parse_scalar(v) for v in inner.split(","))
                except ParseError as exc:
                    self.fail(exc.message, lineno, col)
            self.label(label, lineno, col, arity=len(values))
            if label in st["blocks"]:
                self.fail(f"state both requests and blocks {label}", lineno, col)
            st["requests"].append((Event(label, values), lineno, col))

    def block_line(self, line, toks, lineno):
        st = self.need_state(lineno, toks[0][1])
        if len(toks) < 2:
            self.fail("expected 'block <Label> ...'", lineno, toks[0][1])
        for tok, col in toks[1:]:
            self.label(tok, lineno, col)
            if any(e.label == tok for e, _, _ in st["requests"]):
                self.fail(f"state both requests and blocks {tok}", lineno, col)
            st["blocks"].add(tok)

    def on_line(self, line, toks, lineno):
        st = self.need_state(lineno, toks[0][1])
        arrow = line.rfind("->")
        if arrow < 0 or len(toks) < 4:
            self.fail("expected 'on <Label> [if <pred>] -> <state>'", lineno, toks[0][1])
        label, lcol = toks[1]
        self.label(label, lineno, lcol)
        target = line[arrow + 2:].strip()
        tcol = arrow + 3 + (len(line[arrow + 2:]) - len(line[arrow + 2:].lstrip()))
        if not target or len(target.split()) != 1:
            self.fail("expected one target state after '->'", lineno, arrow + 1)
        between = line[lcol - 1 + len(label):arrow]
        pred = None
        if between.strip():
            stripped = between.lstrip()
            pcol = lcol + len(label) + (len(between) - len(stripped))
            if not stripped.startswith("if ") and stripped.strip() != "if":
                self.fail(f"expected 'if' or '->', found {stripped.split()[0]!r}", lineno, pcol)
            expr = stripped[2:]
            ecol = pcol + 2 + (len(expr) - len(expr.lstrip()))
            try:
                pred = Predicate.parse(expr)
            except ParseError as exc:
                self.fail(exc.message, lineno, ecol + (exc.column or 1) - 1)
            if pred.value_arity > self.events[label]:
                self.fail(f"predicate reads {pred.value_arity} values but {label} has {self.events[label]}", lineno, ecol)
        for other in st["on"]:
            if other["label"] == label and (other["pred"] is None or pred is None or other["pred"] == pred):
                self.fail(f"nondeterministic transitions on {label} at state {st['name']}", lineno, toks[0][1])
        st["on"].append({"label": label, "pred": pred, "target": target, "line": lineno, "col": tcol})

    def finish_scenario(self):
        cur = self.current
        if cur is None:
            return
        self.current = self.state = None
        states = cur["states"]
        if not states:
            self.fail(f"scenario {cur['name']} has no states", cur["line"])
        if not any(s["initial"] for s in states.values()):
            self.fail(f"scenario {cur['name']} has no initial state", cur["line"])
        decls = {}
        for st in states.values():
            for t in st["on"]:
                if t["target"] not in states:
                    self.fail(f"undefined state {t['target']!r}", t["line"], t["col"])
            for e, line, col in st["requests"]:
                pats = [EventPattern(t["label"], t["pred"]) for t in st["on"]]
                if not any(matches(p, e) for p in pats):
                    self.fail(f"state {st['name']} requests {e} but has no transition for it", line, col)
            decls[st["name"]] = StateDecl(
                st["name"],
                st["initial"],
                tuple(dict.fromkeys(e for e, _, _ in st["requests"])),
                frozenset(st["blocks"]),
                tuple(Transition(t["label"], t["pred"], t["target"]) for t in st["on"]),
            )
        self.scenarios.append(ScenarioDecl(cur["name"], decls))

    # -- assembly --------------------------------------------------------

    def controller_line(self, line, toks, lineno):
        words = [t for t, _ in toks]
        if self.controller is not None:
            self.fail("second controller", lineno, toks[0][1])
        if len(words) < 6 or words[2] != "input" or words[4] != "outputs":
            self.fail("expected 'controller <weights> input <Label> outputs <Label> ...'", lineno, toks[0][1])
        self.label(words[3], lineno, toks[3][1])
        for tok, col in toks[5:]:
            self.label(tok, lineno, col, arity=0)
        if len(set(words[5:])) != len(words) - 5:
            self.fail("duplicate output label", lineno, toks[5][1])
        self.controller = ControllerDecl(words[1], words[3], tuple(words[5:]))

    def sensor_line(self, line, toks, lineno):
        words = [t for t, _ in toks]
        if self.sensor is not None:
            self.fail("second sensor", lineno, toks[0][1])
        if len(words) < 5 or words[1] != "input" or words[3] != "from":
            self.fail("expected 'sensor input <Label> from <list | file>'", lineno, toks[0][1])
        arity = self.events.get(words[2])
        self.label(words[2], lineno, toks[2][1])
        if self.controller is not None and words[2] != self.controller.input:
            self.fail("sensor input differs from the controller input", lineno, toks[2][1])
        rest_col = toks[4][1]
        rest = line[rest_col - 1:].strip()
        if rest.startswith("["):
            tuples = _parse_tuples(rest, lineno, rest_col)
            for t in tuples:
                if len(t) != arity:
                    self.fail(f"sensor value {t} has {len(t)} values, {words[2]} has arity {arity}", lineno, rest_col)
            self.sensor = SensorDecl(words[2], inline=tuples)
        else:
            if len(rest.split()) != 1:
                self.fail("expected a single file path", lineno, rest_col)
            self.sensor = SensorDecl(words[2], file=rest)

    def guard_line(self, line, toks, lineno):
        words = [t for t, _ in toks]
        if len(words) < 2 or words[1] not in GUARD_KINDS:
            col = toks[1][1] if len(toks) > 1 else toks[0][1]
            self.fail(f"expected guard kind, one of {', '.join(GUARD_KINDS)}", lineno, col)
        if self.controller is None:
            self.fail("guards need a preceding controller directive", lineno, toks[0][1])
        outputs = self.controller.outputs
        kind = words[1]

        def output(i):
            if words[i] not in outputs:
                self.fail(f"{words[i]!r} is not a controller output", lineno, toks[i][1])
            return words[i]

        def integer(i, low):
            try:
                v = int(words[i])
            except ValueError:
                v = low - 1
            if v < low:
                self.fail(f"expected an integer >= {low}", lineno, toks[i][1])
            return v

        if kind == "rule":
            self.guards.append(self.rule_guard(line, toks, lineno))
        elif kind == "liveness":
            if len(words) != 4:
                self.fail("expected 'guard liveness <Label> <n>'", lineno, toks[0][1])
            self.guards.append(GuardDecl(kind, target=output(2), n=integer(3, 1)))
        elif kind == "prob-liveness":
            if len(words) != 4:
                self.fail("expected 'guard prob-liveness <Label> <p>'", lineno, toks[0][1])
            try:
                p = float(words[3])
            except ValueError:
                p = -1.0
            if not 0 < p <= 1:
                self.fail("probability must lie in (0, 1]", lineno, toks[3][1])
            self.guards.append(GuardDecl(kind, target=output(2), p=p))
        elif kind == "job-exists":
            if len(words) != 3:
                self.fail("expected 'guard job-exists <slots>'", lineno, toks[0][1])
            self.guards.append(GuardDecl(kind, slots=integer(2, 1)))
        else:
            if len(words) != 3:
                self.fail("expected 'guard steady <n>'", lineno, toks[0][1])
            self.guards.append(GuardDecl(kind, n=integer(2, 2)))

    def rule_guard(self, line, toks, lineno):
        # guard rule [if <P>] [when <Q>] force <Label>
        m = re.match(r"\s*guard\s+rule\s*(?:\bif\b(?P<p>.*?))?(?:\bwhen\b(?P<q>.*?))?\bforce\s+(?P<a>\S+)\s*$", line)
        if m is None:
            self.fail("expected 'guard rule [if <pred>] [when <pred>] force <Label>'", lineno, toks[0][1])
        preds = {}
        for key in ("p", "q"):
            if m.group(key) is None:
                preds[key] = None
                continue
            col = m.start(key) + 1
            try:
                preds[key] = Predicate.parse(m.group(key))
            except ParseError as exc:
                self.fail(exc.message, lineno, col + (exc.column or 1) - 1)
        action = m.group("a")
        if action not in self.controller.outputs:
            self.fail(f"{action!r} is not a controller output", lineno, m.start("a") + 1)
        q = preds["q"]
        if q is not None:
            unknown = q.variables - set(self.controller.outputs)
            if unknown:
                self.fail(f"output predicate names unknown outputs {sorted(unknown)}", lineno, m.start("q") + 1)
        p = preds["p"]
        if p is not None and p.value_arity > self.events[self.controller.input]:
            self.fail(f"input predicate reads {p.value_arity} values", lineno, m.start("p") + 1)
        return GuardDecl("rule", target=action, input_pred=p, output_pred=q)


def parse_model(text: str) -> ModelDocument:
    return _Reader(text).parse()


def _fmt_scalar(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(int(v)) if v.is_integer() and abs(v) < 1e16 else repr(v)


def _fmt_event(e: Event) -> str:
    if not e.values:
        return e.label
    return f"{e.label}({','.join(_fmt_scalar(v) for v in e.values)})"


def _fmt_tuple(t) -> str:
    return "(" + ",".join(_fmt_scalar(v) for v in t) + ")"


def serialize_model(doc: ModelDocument) -> str:
    """Canonical text: events and states sorted, single spaces, two-space indents."""
    out = []
    for label in sorted(doc.events):
        arity = doc.events[label]
        out.append(f"event {label}" + (f" arity {arity}" if arity else ""))
    for sc in doc.scenarios:
        out.append("")
        out.append(f"scenario {sc.name}")
        for name in sorted(sc.states):
            st = sc.states[name]
            out.append(f"  state {name}" + (" initial" if st.initial else ""))
            if st.requests:
                out.append("    request " + " ".join(_fmt_event(e) for e in st.requests))
            if st.blocks:
                out.append("    block " + " ".join(sorted(st.blocks)))
            for t in st.transitions:
                cond = f" if {t.predicate}" if t.predicate is not None else ""
                out.append(f"    on {t.label}{cond} -> {t.target}")
    if doc.controller or doc.sensor or doc.guards:
        out.append("")
        out.append("assembly")
        c = doc.controller
        if c is not None:
            out.append(f"  controller {c.weights} input {c.input} outputs {' '.join(c.outputs)}")
        s = doc.sensor
        if s is not None:
            src = s.file if s.file is not None else "[" + ", ".join(_fmt_tuple(t) for t in s.inline) + "]"
            out.append(f"  sensor input {s.input} from {src}")
        for g in doc.guards:
            out.append("  " + _fmt_guard(g))
    return "\n".join(out).lstrip("\n") + "\n"


def _fmt_guard(g: GuardDecl) -> str:
    if g.kind == "rule":
        parts = ["guard rule"]
        if g.input_pred is not None:
            parts.append(f"if {g.input_pred}")
        if g.output_pred is not None:
            parts.append(f"when {g.output_pred}")
        parts.append(f"force {g.target}")
        return " ".join(parts)
    if g.kind == "liveness":
        return f"guard liveness {g.target} {g.n}"
    if g.kind == "prob-liveness":
        return f"guard prob-liveness {g.target} {g.p!r}"
    if g.kind == "job-exists":
        return f"guard job-exists {g.slots}"
    return f"guard steady {g.n}"


def scenario_object(decl: ScenarioDecl) -> ScenarioObject:
    states = sorted(decl.states)
    return ScenarioObject(
        decl.name,
        states,
        decl.initial,
        {s: [(EventPattern(t.label, t.predicate), t.target) for t in decl.states[s].transitions] for s in states},
        {s: decl.states[s].requests for s in states},
        {s: decl.states[s].blocks for s in states},
    )


def build_model(doc: ModelDocument, base_dir=".") -> Model:
    """Instantiate scenario objects, load the network and wire the guards."""
    base = Path(base_dir)
    objects = [scenario_object(s) for s in doc.scenarios]
    binding = None
    if doc.controller is not None:
        c = doc.controller
        net = load_network((base / c.weights).read_text())
        arity = doc.events[c.input]
        if net.n_inputs != arity:
            raise ParseError(f"network takes {net.n_inputs} inputs but {c.input} has arity {arity}")
        binding = ControllerBinding(net, c.input, c.outputs)
    if doc.sensor is not None:
        s = doc.sensor
        values = s.inline if s.inline is not None else parse_value_lines((base / s.file).read_text())
        outputs = binding.output_labels if binding is not None else ()
        objects.append(sensor_scenario(s.input, list(values), outputs))
    for g in doc.guards:
        objects.append(_guard_object(g, binding))
    return Model(objects, binding)


def _guard_object(g: GuardDecl, binding: ControllerBinding):
    if g.kind == "rule":
        return compile_override_rule(OverrideRule(g.input_pred, g.output_pred, g.target), binding)
    if g.kind == "liveness":
        return liveness_guard(LivenessSpec(g.target, g.n), binding)
    if g.kind == "prob-liveness":
        return probabilistic_liveness_guard(LivenessSpec(g.target, mode="probabilistic", p=g.p), binding)
    if g.kind == "job-exists":
        return job_exists_guard(g.slots, binding)
    return steady_state_guard(g.n, binding)


def load_model(path) -> tuple:
    """Parse and build a model file; returns ``(document, model)``."""
    path = Path(path)
    doc = parse_model(path.read_text(encoding="utf-8"))
    return doc, build_model(doc, path.parent)
