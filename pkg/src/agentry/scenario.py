"""Scenario bundles: a directory tying together everything one run needs.

A bundle holds a ``manifest.json`` plus the files it references:

* agent sources (``*.asl``),
* a norm file (JSON array of norm objects),
* a commitment file (commitments, secondary policy, protocol vocabulary),
* an environment fixture (repos, backlog, CI verdicts, visibility, actions),
* an oracle script (matcher/response entries),
* constants (max cycles, cycles-per-hour, obligation window) and success
  conditions (belief patterns that must hold in named agents' final state).

Validation parses every file and aggregates all errors so a single pass
reports everything wrong with a bundle.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .commitments import load_commitment_file
from .envsim import Environment
from .lang import AgentProgram, parse_agent_source, parse_literal
from .norms import Norm, load_norm_file
from .oracle import ScriptedOracle


class ScenarioInvalid(Exception):
    """One or more bundle files failed to parse; ``errors`` has them all."""

    def __init__(self, errors: list[str]):
        self.errors = errors
        super().__init__("; ".join(errors))


@dataclass(frozen=True)
class AgentSpec:
    name: str
    roles: tuple[str, ...]
    source_file: str
    program: AgentProgram


@dataclass(frozen=True)
class SuccessCondition:
    agent: str
    belief: str  # literal source text; parsed on demand

    def literal(self):
        return parse_literal(self.belief)


@dataclass
class ScenarioSpec:
    name: str
    path: Path
    agents: list[AgentSpec]
    norms: tuple[Norm, ...]
    commitments: list[dict]
    secondary_policy: dict
    vocabulary: dict
    environment_fixture: dict = field(default_factory=dict)
    oracle: ScriptedOracle = field(default_factory=ScriptedOracle)
    max_cycles: int = 200
    cycles_per_hour: int = 1
    obligation_window: int = 50
    success: list[SuccessCondition] = field(default_factory=list)
    install_protocol: bool = False

    def build_environment(self) -> Environment:
        """A fresh environment per run keeps run_scenario a pure function."""
        return Environment.from_dict(self.environment_fixture)


def load_scenario(path: str | Path) -> ScenarioSpec:
    """Load and fully validate a bundle; raises :class:`ScenarioInvalid`."""
    root = Path(path)
    errors: list[str] = []
    manifest_path = root / "manifest.json"
    if not manifest_path.exists():
        raise ScenarioInvalid([f"{manifest_path}: missing manifest"])
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ScenarioInvalid([f"{manifest_path}: {exc}"]) from exc

    agents: list[AgentSpec] = []
    seen_names: set[str] = set()
    for raw in manifest.get("agents", []):
        name = raw.get("name", "")
        source_file = raw.get("source", "")
        if not name:
            errors.append(f"{manifest_path}: agent entry without a name")
            continue
        if name in seen_names:
            errors.append(f"{manifest_path}: duplicate agent name {name!r}")
            continue
        seen_names.add(name)
        program = AgentProgram(name)
        if source_file:
            source_path = root / source_file
            try:
                program = parse_agent_source(
                    source_path.read_text(encoding="utf-8"), name
                )
            except OSError as exc:
                errors.append(f"{source_path}: {exc}")
            except Exception as exc:
                errors.append(f"{source_path}: {exc}")
        agents.append(AgentSpec(name, tuple(raw.get("roles", ())), source_file, program))

    norms: tuple[Norm, ...] = ()
    if manifest.get("norms"):
        try:
            norms = load_norm_file(root / manifest["norms"])
        except Exception as exc:
            errors.append(f"{root / manifest['norms']}: {exc}")

    commitments: list[dict] = []
    secondary_policy: dict = {}
    vocabulary: dict = {}
    if manifest.get("commitments"):
        try:
            bundle = load_commitment_file(root / manifest["commitments"])
            commitments = bundle["commitments"]
            secondary_policy = bundle["secondary"]
            vocabulary = bundle["vocabulary"]
        except Exception as exc:
            errors.append(f"{root / manifest['commitments']}: {exc}")

    environment_fixture: dict = {}
    if manifest.get("environment"):
        env_path = root / manifest["environment"]
        try:
            environment_fixture = json.loads(env_path.read_text(encoding="utf-8"))
            Environment.from_dict(environment_fixture)  # parse effects eagerly
        except Exception as exc:
            errors.append(f"{env_path}: {exc}")

    oracle = ScriptedOracle()
    if manifest.get("oracle"):
        oracle_path = root / manifest["oracle"]
        try:
            oracle = ScriptedOracle.from_file(oracle_path)
        except Exception as exc:
            errors.append(f"{oracle_path}: {exc}")

    success: list[SuccessCondition] = []
    for raw in manifest.get("success", []):
        condition = SuccessCondition(raw.get("agent", ""), raw.get("belief", ""))
        try:
            condition.literal()
        except Exception as exc:
            errors.append(f"{manifest_path}: bad success belief {condition.belief!r}: {exc}")
        if condition.agent and condition.agent not in seen_names:
            errors.append(f"{manifest_path}: success names unknown agent {condition.agent!r}")
        success.append(condition)

    constants = manifest.get("constants", {})
    if errors:
        raise ScenarioInvalid(errors)
    return ScenarioSpec(
        name=manifest.get("name", root.name),
        path=root,
        agents=agents,
        norms=norms,
        commitments=commitments,
        secondary_policy=secondary_policy,
        vocabulary=vocabulary,
        environment_fixture=environment_fixture,
        oracle=oracle,
        max_cycles=constants.get("max_cycles", 200),
        cycles_per_hour=constants.get("cycles_per_hour", 1),
        obligation_window=constants.get("obligation_window", 50),
        success=success,
        install_protocol=manifest.get("install_protocol", False),
    )
