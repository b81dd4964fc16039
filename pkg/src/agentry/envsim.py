"""Deterministic simulated software-engineering environment.

Stands in for the version-control, backlog, and CI systems agents act on:
``clone_repo``, ``get_backlog_item``, ``save_code_to_file``, ``submitPR``,
and ``compile_and_test`` (the historical spelling ``complile_and_test`` is
accepted as an alias). Scenario fixtures may declare additional scripted
actions with fixed success flags and effect literals, which is how
side effects like a mislogged IP address are injected for norm tests.

Everything an action does is a pure function of the environment state,
the arguments, and the fixture; percepts are filtered per agent through
the fixture's visibility map and the runtime diffs them into belief
events. An action's effect literals are always visible to at least the
acting agent.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .lang import (
    Atom,
    Literal,
    Term,
    TextConstant,
    Variable,
    Wildcard,
    is_ground_term,
    parse_literal,
    render_literal,
    render_term,
)


class UnknownAction(Exception):
    """The action predicate is not in the declared vocabulary."""


class UnboundRequiredArgument(Exception):
    """A required input position held an unbound variable or wildcard."""


@dataclass(frozen=True)
class ActionResult:
    success: bool
    bindings: dict[str, Term] = field(default_factory=dict)
    effects: tuple[Literal, ...] = ()


@dataclass
class TaskRecord:
    id: str
    title: str
    status: str


@dataclass
class FileRecord:
    content: str
    task: str | None


@dataclass
class Workspace:
    url: str
    files: dict[str, FileRecord] = field(default_factory=dict)
    branches: list[str] = field(default_factory=lambda: ["main"])
    pull_requests: list[dict] = field(default_factory=list)


@dataclass(frozen=True)
class CiEntry:
    verdict: str
    effects: tuple[Literal, ...] = ()


@dataclass(frozen=True)
class ScriptedAction:
    name: str
    success: bool = True
    effects: tuple[Literal, ...] = ()


@dataclass
class EnvFact:
    literal: Literal
    visible_to: tuple[str, ...]  # agent names, role names, or "*"


BUILTIN_ACTIONS = (
    "clone_repo",
    "get_backlog_item",
    "save_code_to_file",
    "submitPR",
    "compile_and_test",
)
ACTION_ALIASES = {"complile_and_test": "compile_and_test"}


def _as_text(term: Term) -> str:
    if isinstance(term, TextConstant):
        return term.value
    if isinstance(term, Atom):
        return term.name
    return render_term(term)


class Environment:
    """In-memory stand-in for repos, backlog, and CI, driven by a fixture."""

    def __init__(
        self,
        repos: dict[str, Workspace],
        backlog: list[TaskRecord],
        ci: dict[str, CiEntry],
        visibility: dict[str, tuple[str, ...]],
        scripted: dict[str, ScriptedAction],
    ):
        self.repos = repos
        self.backlog = backlog
        self.ci = ci
        self.visibility = visibility
        self.scripted = scripted
        self.facts: list[EnvFact] = []
        self.event_log: list[dict] = []
        self.agent_task: dict[str, str] = {}
        self.agent_repo: dict[str, str] = {}
        self.save_counter = 0

    # -- fixture loading -----------------------------------------------------

    @staticmethod
    def from_file(path: str | Path) -> "Environment":
        return Environment.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    @staticmethod
    def from_dict(data: dict) -> "Environment":
        repos = {}
        for url, raw in data.get("repos", {}).items():
            files = {
                p: FileRecord(content, None) for p, content in raw.get("files", {}).items()
            }
            repos[url] = Workspace(url, files)
        backlog = [
            TaskRecord(t["id"], t.get("title", ""), t.get("status", "open"))
            for t in data.get("backlog", [])
        ]
        seen = set()
        for task in backlog:
            if task.id in seen:
                raise ValueError(f"duplicate backlog task id {task.id!r}")
            seen.add(task.id)
        ci = {
            task_id: CiEntry(
                raw["verdict"], tuple(parse_literal(e) for e in raw.get("effects", []))
            )
            for task_id, raw in data.get("ci", {}).items()
        }
        visibility = {
            pred: tuple(watchers) for pred, watchers in data.get("visibility", {}).items()
        }
        scripted = {}
        for raw in data.get("actions", []):
            scripted[raw["name"]] = ScriptedAction(
                raw["name"],
                raw.get("success", True),
                tuple(parse_literal(e) for e in raw.get("effects", [])),
            )
        return Environment(repos, backlog, ci, visibility, scripted)

    # -- helpers ---------------------------------------------------------------

    def vocabulary(self) -> tuple[str, ...]:
        return BUILTIN_ACTIONS + tuple(sorted(self.scripted))

    def _resolve_task(self, agent: str) -> str | None:
        """The task an action concerns: the agent's adopted task, else the
        first taken task, else the first open one."""
        if agent in self.agent_task:
            return self.agent_task[agent]
        for status in ("taken", "open"):
            for task in self.backlog:
                if task.status == status:
                    return task.id
        return None

    def _workspace(self, agent: str, url: str | None = None) -> Workspace | None:
        if url is not None:
            return self.repos.get(url)
        if agent in self.agent_repo:
            return self.repos.get(self.agent_repo[agent])
        for ws in self.repos.values():
            return ws
        return None

    def _record_effects(self, agent: str, effects: Sequence[Literal]) -> None:
        for effect in effects:
            watchers = self.visibility.get(effect.predicate, ())
            if "*" not in watchers and agent not in watchers:
                watchers = watchers + (agent,)
            for fact in self.facts:
                if fact.literal == effect:
                    fact.visible_to = tuple(dict.fromkeys(fact.visible_to + watchers))
                    break
            else:
                self.facts.append(EnvFact(effect, watchers))

    # -- actions ---------------------------------------------------------------

    def perform(self, agent: str, action: Literal) -> ActionResult:
        """Apply one external action and return its result.

        Raises :class:`UnknownAction` for undeclared predicates and
        :class:`UnboundRequiredArgument` when an input position is unbound.
        Fixture-declared failures (empty backlog, failing verdicts) are
        successful-or-not results, never exceptions.
        """
        name = ACTION_ALIASES.get(action.predicate, action.predicate)
        handler = {
            "clone_repo": self._clone_repo,
            "get_backlog_item": self._get_backlog_item,
            "save_code_to_file": self._save_code_to_file,
            "submitPR": self._submit_pr,
            "compile_and_test": self._compile_and_test,
        }.get(name)
        if handler is not None:
            result = handler(agent, action)
        elif name in self.scripted:
            result = self._scripted_action(agent, action, self.scripted[name])
        else:
            raise UnknownAction(f"action {action.predicate!r} is not in the vocabulary")
        self._record_effects(agent, result.effects)
        self.event_log.append(
            {"agent": agent, "action": render_literal(action), "success": result.success}
        )
        return result

    def _require_ground(self, action: Literal, position: int) -> Term:
        if position >= len(action.args):
            raise UnboundRequiredArgument(
                f"{action.predicate} needs an argument at position {position + 1}"
            )
        term = action.args[position]
        if not is_ground_term(term):
            raise UnboundRequiredArgument(
                f"{action.predicate} argument {position + 1} must be ground, got {render_term(term)}"
            )
        return term

    def _output_name(self, action: Literal, position: int) -> str | None:
        if position >= len(action.args):
            raise UnboundRequiredArgument(
                f"{action.predicate} needs an argument at position {position + 1}"
            )
        term = action.args[position]
        if isinstance(term, Variable):
            return term.name
        if isinstance(term, Wildcard):
            return None
        return None  # already ground: treated as an assertion, checked by caller

    def _clone_repo(self, agent: str, action: Literal) -> ActionResult:
        url = _as_text(self._require_ground(action, 0))
        workspace = self.repos.get(url)
        if workspace is None:
            return ActionResult(False)
        self.agent_repo[agent] = url
        return ActionResult(True, effects=(Literal("cloned", (TextConstant(url),)),))

    def _get_backlog_item(self, agent: str, action: Literal) -> ActionResult:
        for task in self.backlog:
            if task.status == "open":
                task.status = "taken"
                self.agent_task[agent] = task.id
                out = self._output_name(action, 0)
                bindings = {out: Atom(task.id)} if out else {}
                return ActionResult(True, bindings)
        return ActionResult(False)

    def _save_code_to_file(self, agent: str, action: Literal) -> ActionResult:
        content = _as_text(self._require_ground(action, 1))
        workspace = self._workspace(agent)
        if workspace is None:
            return ActionResult(False)
        task = self._resolve_task(agent)
        path_term = action.args[0] if action.args else None
        if path_term is not None and is_ground_term(path_term):
            path = _as_text(path_term)
            bindings: dict[str, Term] = {}
        else:
            self.save_counter += 1
            stem = task if task is not None else "file"
            path = f"src/{stem}_{self.save_counter}.txt"
            out = self._output_name(action, 0)
            bindings = {out: TextConstant(path)} if out else {}
        workspace.files[path] = FileRecord(content, task)
        return ActionResult(True, bindings, effects=(Literal("saved", (TextConstant(path),)),))

    def _submit_pr(self, agent: str, action: Literal) -> ActionResult:
        url = _as_text(self._require_ground(action, 0))
        workspace = self.repos.get(url)
        if workspace is None:
            return ActionResult(False)
        task = self._resolve_task(agent)
        if task is None:
            return ActionResult(False)
        pr_id = len(workspace.pull_requests) + 1
        workspace.pull_requests.append({"id": pr_id, "task": task, "author": agent})
        return ActionResult(True, effects=(Literal("pr_submitted", (Atom(task),)),))

    def _compile_and_test(self, agent: str, action: Literal) -> ActionResult:
        path = _as_text(self._require_ground(action, 0))
        workspace = self._workspace(agent)
        record = workspace.files.get(path) if workspace is not None else None
        if record is None:
            return ActionResult(False)
        task = record.task if record.task is not None else self._resolve_task(agent)
        entry = self.ci.get(task) if task is not None else None
        if entry is None:
            return ActionResult(False)
        out = self._output_name(action, 1)
        bindings = {out: Atom(entry.verdict)} if out else {}
        return ActionResult(True, bindings, effects=entry.effects)

    def _scripted_action(self, agent: str, action: Literal, script: ScriptedAction) -> ActionResult:
        for i in range(len(action.args)):
            self._require_ground(action, i)
        return ActionResult(script.success, effects=script.effects)

    # -- percepts ----------------------------------------------------------------

    def percepts(self, agent: str, roles: Sequence[str] = ()) -> list[Literal]:
        """Environment facts visible to the agent, in stable order."""
        def sees(watchers: tuple[str, ...]) -> bool:
            return "*" in watchers or agent in watchers or any(r in watchers for r in roles)

        out: list[Literal] = []
        backlog_watchers = self.visibility.get("backlog_status", ("*",))
        if sees(backlog_watchers):
            for task in self.backlog:
                out.append(Literal("backlog_status", (Atom(task.id), Atom(task.status))))
        for fact in self.facts:
            if sees(fact.visible_to):
                out.append(fact.literal)
        return out
