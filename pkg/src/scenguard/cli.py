"""Command-line entry point.

Exit codes: 0 success, 1 usage or parse error, 2 deadlock at runtime,
3 verification found a deadlock.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from . import demos
from .engine import run
from .errors import ScenGuardError
from .modelfile import load_model
from .verify import InputAlphabet, check_deadlock_freedom, load_alphabet

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DEADLOCK = 2
EXIT_VERIFY_DEADLOCK = 3


@dataclass
class RunConfig:
    model: Path
    max_steps: int = 1000
    seed: int = 0
    strategy: str = "lex"
    trace: Optional[Path] = None

    def __post_init__(self):
        if self.max_steps < 0:
            raise ValueError("--steps must be >= 0")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="scenguard", description="Run and verify guarded scenario-based models.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("run", help="execute a model file and print its trace")
    r.add_argument("model", type=Path)
    r.add_argument("--steps", type=int, default=1000)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--strategy", choices=["lex", "random"], default="lex")
    r.add_argument("--trace", type=Path, help="also write the trace to this file")

    v = sub.add_parser("verify", help="check deadlock freedom up to a depth")
    v.add_argument("model", type=Path)
    v.add_argument("--alphabet", type=Path, help="input tuples, one per line (default: the sensor's inputs)")
    v.add_argument("--mode", choices=["concrete", "blackbox"], default="blackbox")
    v.add_argument("--depth", type=int, default=10)

    d = sub.add_parser("demo", help="run a built-in demonstration")
    d.add_argument("name", choices=["watertap", "scheduler", "congestion"])
    d.add_argument("--seed", type=int, default=7)
    d.add_argument("--steps", type=int, default=None)
    return p


def cmd_run(cfg: RunConfig, out) -> int:
    _, model = load_model(cfg.model)
    trace = run(model.instance(cfg.strategy, cfg.seed), cfg.max_steps)
    text = trace.render()
    out.write(text)
    if cfg.trace is not None:
        cfg.trace.write_text(text)
    return EXIT_DEADLOCK if trace.reason == "deadlock" else EXIT_OK


def cmd_verify(model_path: Path, alphabet_path, mode: str, depth: int, out) -> int:
    if depth < 1:
        raise _UsageError("--depth must be >= 1")
    doc, model = load_model(model_path)
    alphabet = None
    if alphabet_path is not None:
        alphabet = load_alphabet(Path(alphabet_path).read_text())
    elif model.controller is not None:
        if doc.sensor is None or doc.sensor.inline is None or not doc.sensor.inline:
            raise _UsageError("model has a controller; pass --alphabet")
        alphabet = InputAlphabet(doc.sensor.inline)
    verdict = check_deadlock_freedom(model, alphabet, mode, depth)
    out.write(verdict.render())
    return EXIT_OK if verdict.safe else EXIT_VERIFY_DEADLOCK


def cmd_demo(name: str, seed: int, steps: Optional[int], out) -> int:
    if name == "watertap":
        out.write(demos.watertap_trace(7 if steps is None else steps).render())
        return EXIT_OK
    if name == "scheduler":
        steps = 1000 if steps is None else steps
        guarded = demos.run_scheduler(seed, steps, guarded=True)
        unguarded = demos.run_scheduler(seed, steps, guarded=False)
        out.write(f"scheduler seed={seed} steps={steps}\n")
        for tag, r in (("guarded", guarded), ("unguarded", unguarded)):
            out.write(
                f"{tag:<9} rounds={r.rounds} allocations={r.allocations} passes={r.passes} "
                f"invalid={r.invalid} end={r.reason}\n"
            )
        return EXIT_DEADLOCK if guarded.deadlocked else EXIT_OK
    rounds = 30 if steps is None else max(steps // 2, 1)
    result = demos.run_congestion(n=10, rounds=rounds, seed=seed)
    out.write(f"congestion n={result.n} rounds={len(result.outputs)}\n")
    out.write("outputs " + " ".join(result.outputs) + "\n")
    if result.forced_round is None:
        out.write("no forced change\n")
    else:
        out.write(f"forced change at round {result.forced_round}\n")
    return EXIT_OK


class _UsageError(Exception):
    pass


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(RunConfig(args.model, args.steps, args.seed, args.strategy, args.trace), out)
        if args.command == "verify":
            return cmd_verify(args.model, args.alphabet, args.mode, args.depth, out)
        return cmd_demo(args.name, args.seed, args.steps, out)
    except (_UsageError, ValueError) as exc:
        print(f"scenguard: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ScenGuardError, OSError) as exc:
        print(f"scenguard: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main_exit():
    sys.exit(main())


if __name__ == "__main__":
    main_exit()
