"""Command-line surface: validate, run, repl, and trace inspection.

``validate`` parses every file in a scenario bundle and statically
previews compliance-in-plans against always-active prohibitions;
``run`` executes a bundle and exits 0 only when no violation went
unremedied and every declared success condition holds; ``repl`` hosts
the human-proxy session (inspect agents, send messages, turn natural
language into confirmed commitments, advance cycles); ``trace``
pretty-prints and filters a recorded trace file. Interactive sessions
can be driven by a transcript file, which makes them testable: the
same transcript produces the same trace as a live session typing it.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

from .commitments import TRANSLATION_PROMPT, TranslationRejected, translate_instruction
from .envsim import Environment
from .interpreter import ACTIVE as I_ACTIVE, SUSPENDED as I_SUSPENDED
from .lang import parse_literal, render_literal, render_plan
from .logic import BeliefBase
from .norms import PROHIBITION, AgentIdentity, _prohibited
from .oracle import LiveOracle, record_replay
from .runtime import System, build_system
from .scenario import ScenarioInvalid, ScenarioSpec, load_scenario
from .tracing import load_trace


@dataclass
class RunConfig:
    scenario: Path
    max_cycles: int | None = None
    trace_out: Path | None = None
    oracle_mode: str = "scripted"  # scripted | replay | record | live
    cassette: Path | None = None
    seed: int = 0
    interactive: bool = False
    human_role: str = "human"
    transcript: Path | None = None


def _build_oracle(config: RunConfig, scenario: ScenarioSpec):
    if config.oracle_mode == "scripted":
        return scenario.oracle
    if config.oracle_mode in ("replay", "record"):
        if config.cassette is None:
            raise SystemExit("--cassette is required for replay/record oracle modes")
        backend = LiveOracle.from_environment() if config.oracle_mode == "record" else None
        return record_replay(backend, config.cassette, config.oracle_mode)
    if config.oracle_mode == "live":
        return LiveOracle.from_environment()
    raise SystemExit(f"unknown oracle mode {config.oracle_mode!r}")


# --------------------------------------------------------------------------
# validate
# --------------------------------------------------------------------------

def static_plan_warnings(scenario: ScenarioSpec) -> list[str]:
    """Plans whose steps unify with always-active prohibitions.

    A static preview of compliance-in-plans: judged against an empty
    belief base, so only antecedent-free (always-active) norms fire.
    """
    warnings = []
    empty = BeliefBase.create()
    prohibitions = [n for n in scenario.norms if n.modality == PROHIBITION]
    for spec in scenario.agents:
        identity = AgentIdentity(spec.name, spec.roles)
        for plan in spec.program.plans:
            for step in plan.body:
                from .norms import _step_action

                action = _step_action(step)
                if action is None:
                    continue
                norm = _prohibited(action, identity, scenario.norms, empty)
                if norm is not None:
                    warnings.append(
                        f"{spec.name}: plan {plan.index} step {render_literal(action)} "
                        f"hits always-active prohibition {norm.id}"
                    )
    return warnings


def cmd_validate(path: Path) -> int:
    try:
        scenario = load_scenario(path)
    except ScenarioInvalid as invalid:
        for error in invalid.errors:
            print(f"error: {error}")
        print(f"validate: {len(invalid.errors)} error(s)")
        return 1
    print(f"scenario {scenario.name}: {len(scenario.agents)} agent(s), "
          f"{len(scenario.norms)} norm(s), {len(scenario.commitments)} commitment(s)")
    for warning in static_plan_warnings(scenario):
        print(f"warning: {warning}")
    print("validate: clean")
    return 0


# --------------------------------------------------------------------------
# run
# --------------------------------------------------------------------------

def _print_summary(system: System, summary) -> None:
    print(f"cycles: {summary.cycles}")
    print(f"goals: {summary.goals_completed} completed, {summary.goals_failed} failed")
    print(
        f"norm compliance: {summary.preventions} prevented, "
        f"{summary.violations} violation(s), {summary.remedied} remedied"
    )
    if summary.commitment_states:
        states = ", ".join(f"{cid}={state}" for cid, state in sorted(summary.commitment_states.items()))
        print(f"commitments: {states}")
    for failure in summary.failures:
        print(f"failure: {failure}")
    print("outcome:", "success" if summary.success else "failure")


def cmd_run(config: RunConfig) -> int:
    try:
        scenario = load_scenario(config.scenario)
    except ScenarioInvalid as invalid:
        for error in invalid.errors:
            print(f"error: {error}")
        return 2
    oracle = _build_oracle(config, scenario)
    system = build_system(scenario, oracle)
    if config.interactive or config.transcript is not None:
        session = Repl(system, scenario, config)
        session.loop()
    else:
        system.run(config.max_cycles if config.max_cycles is not None else scenario.max_cycles)
    summary = system.summary(scenario.success)
    if config.trace_out is not None:
        system.trace.write(config.trace_out)
        print(f"trace written to {config.trace_out}")
    _print_summary(system, summary)
    return 0 if summary.success else 1


# --------------------------------------------------------------------------
# repl
# --------------------------------------------------------------------------

HELP = """\
commands:
  beliefs <agent>            show an agent's belief base
  intentions <agent>         show an agent's intention stacks
  commitments                show the commitment store
  tell <agent> <literal>     send a tell from the human proxy
  achieve <agent> <literal>  send an achieve from the human proxy
  say <agent> <utterance>    translate an instruction into a commitment proposal
  confirm | reject           accept or drop the pending proposal
  step [n]                   advance n system cycles (default 1)
  run                        advance until quiescence or the cycle budget
  summary                    print the current run summary
  help                       this text
  quit                       leave the session"""


class Repl:
    """Human-proxy session; reads a transcript file when one is supplied."""

    def __init__(self, system: System, scenario: ScenarioSpec, config: RunConfig):
        self.system = system
        self.scenario = scenario
        self.config = config
        self.pending_proposal = None
        human = system.agent_for_role(config.human_role)
        if human is None:
            raise SystemExit(
                f"interactive session needs an agent with role {config.human_role!r}"
            )
        self.human = human.name
        self._transcript = None
        if config.transcript is not None:
            self._transcript = list(
                Path(config.transcript).read_text(encoding="utf-8").splitlines()
            )

    def _read(self) -> str | None:
        if self._transcript is not None:
            while self._transcript:
                line = self._transcript.pop(0).strip()
                if line and not line.startswith("#"):
                    print(f"agentry> {line}")
                    return line
            return None
        try:
            return input("agentry> ").strip()
        except EOFError:
            return None

    def loop(self) -> None:
        while True:
            line = self._read()
            if line is None or line in ("quit", "exit"):
                break
            if line == "":
                continue
            try:
                if not self.dispatch(line):
                    break
            except (TranslationRejected, ScenarioInvalid) as exc:
                print(f"rejected: {exc}")
            except Exception as exc:  # surface, keep session alive
                print(f"error: {exc}")

    def dispatch(self, line: str) -> bool:
        command, _, rest = line.partition(" ")
        rest = rest.strip()
        if command == "help":
            print(HELP)
        elif command == "beliefs":
            state = self._agent(rest)
            for fact in state.beliefs.facts:
                print(render_literal(fact))
        elif command == "intentions":
            state = self._agent(rest)
            live = [i for i in state.intentions if i.status in (I_ACTIVE, I_SUSPENDED)]
            if not live:
                print("(no live intentions)")
            for intention in live:
                print(f"intention {intention.id} [{intention.status}]")
                for frame in intention.stack:
                    print(f"  plan {frame.plan.index} pc={frame.pc} for {render_literal(frame.occurrence.goal)}")
        elif command == "commitments":
            for commitment in self.system.store.commitments.values():
                print(f"{commitment.id} [{commitment.state}] {commitment.describe()}")
        elif command in ("tell", "achieve"):
            target, _, literal_text = rest.partition(" ")
            content = parse_literal(literal_text.strip())
            self.system.inject_message(self.human, target, command, content)
            print(f"{command} queued for {target}")
        elif command == "say":
            target, _, utterance = rest.partition(" ")
            self._say(target, utterance.strip())
        elif command == "confirm":
            self._confirm()
        elif command == "reject":
            if self.pending_proposal is None:
                print("nothing to reject")
            else:
                self.system.trace.emit(
                    self.human, "event", {"type": "proposal-rejected"}
                )
                self.pending_proposal = None
                print("proposal dropped")
        elif command == "step":
            count = int(rest) if rest else 1
            for _ in range(count):
                self.system.step_system()
            print(f"cycle {self.system.cycle}")
        elif command == "run":
            self.system.run(self.config.max_cycles or self.scenario.max_cycles)
            print(f"cycle {self.system.cycle} (quiescent={self.system.quiescent()})")
        elif command == "summary":
            _print_summary(self.system, self.system.summary(self.scenario.success))
        else:
            print(f"unknown command {command!r}")
            print(HELP)
        return True

    def _agent(self, name: str):
        state = self.system.agents.get(name)
        if state is None:
            raise ValueError(f"no agent named {name!r}")
        return state

    def _say(self, addressee: str, utterance: str) -> None:
        prompt = TRANSLATION_PROMPT.format(
            speaker=self.human, addressee=addressee, utterance=utterance
        )
        try:
            proposal = translate_instruction(
                utterance,
                self.human,
                addressee,
                self.system.oracle,
                self.scenario.cycles_per_hour,
                self.system.cycle,
            )
        except TranslationRejected as rejected:
            self.system.trace.emit(
                self.human,
                "llm-call",
                {"request": "translate", "prompt": prompt, "response": rejected.raw_reply or None},
            )
            print(f"rejected: {rejected.reason}")
            if rejected.raw_reply:
                print(f"raw reply: {rejected.raw_reply}")
            return
        self.system.trace.emit(
            self.human,
            "llm-call",
            {"request": "translate", "prompt": prompt, "response": proposal.raw_reply},
        )
        self.pending_proposal = proposal
        print(f"proposal: {proposal.sentence}")
        print("confirm or reject?")

    def _confirm(self) -> None:
        if self.pending_proposal is None:
            print("nothing to confirm")
            return
        proposal = self.pending_proposal
        self.pending_proposal = None
        commitment = self.system.adopt_commitment(
            proposal.debtor,
            proposal.creditor,
            proposal.antecedent,
            proposal.consequent,
            proposal.deadline_cycles,
        )
        print(f"created {commitment.id}: {commitment.describe()}")


def cmd_repl(config: RunConfig) -> int:
    config.interactive = True
    return cmd_run(config)


# --------------------------------------------------------------------------
# trace
# --------------------------------------------------------------------------

def cmd_trace(path: Path, agent: str | None, kind: str | None, cycle: int | None) -> int:
    for entry in load_trace(path):
        if agent is not None and entry.agent != agent:
            continue
        if kind is not None and entry.kind != kind:
            continue
        if cycle is not None and entry.cycle != cycle:
            continue
        payload = " ".join(f"{k}={v!r}" for k, v in entry.payload.items())
        print(f"[c{entry.cycle:04d}#{entry.seq:03d}] {entry.agent:<14} {entry.kind:<22} {payload}")
    return 0


# --------------------------------------------------------------------------
# argument parsing
# --------------------------------------------------------------------------

def _add_run_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("scenario", type=Path, help="scenario bundle directory")
    parser.add_argument("--max-cycles", type=int, default=None)
    parser.add_argument("--trace-out", type=Path, default=None)
    parser.add_argument(
        "--oracle-mode", choices=("scripted", "replay", "record", "live"), default="scripted"
    )
    parser.add_argument("--cassette", type=Path, default=None)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--human-role", default="human")
    parser.add_argument("--transcript", type=Path, default=None)


def _config_from_args(args: argparse.Namespace, interactive: bool = False) -> RunConfig:
    return RunConfig(
        scenario=args.scenario,
        max_cycles=args.max_cycles,
        trace_out=args.trace_out,
        oracle_mode=args.oracle_mode,
        cassette=args.cassette,
        seed=args.seed,
        interactive=interactive or args.transcript is not None,
        human_role=args.human_role,
        transcript=args.transcript,
    )


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="agentry", description="normative BDI multi-agent runtime"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_validate = sub.add_parser("validate", help="check a scenario bundle")
    p_validate.add_argument("scenario", type=Path)

    p_run = sub.add_parser("run", help="run a scenario to quiescence")
    _add_run_flags(p_run)

    p_repl = sub.add_parser("repl", help="interactive human-proxy session")
    _add_run_flags(p_repl)

    p_trace = sub.add_parser("trace", help="pretty-print a trace file")
    p_trace.add_argument("trace_file", type=Path)
    p_trace.add_argument("--agent", default=None)
    p_trace.add_argument("--kind", default=None)
    p_trace.add_argument("--cycle", type=int, default=None)

    args = parser.parse_args(argv)
    if args.command == "validate":
        return cmd_validate(args.scenario)
    if args.command == "run":
        return cmd_run(_config_from_args(args))
    if args.command == "repl":
        return cmd_repl(_config_from_args(args, interactive=True))
    if args.command == "trace":
        return cmd_trace(args.trace_file, args.agent, args.kind, args.cycle)
    parser.error(f"unknown command {args.command!r}")
    return 2


if __name__ == "__main__":
    sys.exit(main())
