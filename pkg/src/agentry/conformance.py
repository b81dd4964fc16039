"""Cross-module oracles and the shipped regression fixtures.

:func:`ground_query_oracle` answers queries by brute-force ground
instantiation and fixpoint derivation; it exists to referee the SLD engine
and never shares code with it. :func:`run_fixture` executes a shipped
scenario bundle and compares success conditions, violation/remedy/
commitment counts, and the frozen trace digest against the committed
known-good run recorded in ``scenarios/fixtures.json``.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .lang import (
    Atom,
    Compound,
    Literal,
    Rule,
    Term,
    Variable,
    Wildcard,
    literal_variables,
)
from .runtime import run_scenario
from .scenario import load_scenario

SCENARIOS_DIR = Path(__file__).parent / "scenarios"
FIXTURES_FILE = SCENARIOS_DIR / "fixtures.json"

MAX_UNIVERSE = 10


class UniverseTooLarge(Exception):
    """The brute-force oracle only handles up to 10 constants."""


def _substitute(term: Term, binding: dict[str, Term]) -> Term:
    if isinstance(term, Variable):
        return binding[term.name]
    if isinstance(term, Compound):
        return Compound(term.functor, tuple(_substitute(a, binding) for a in term.args))
    return term


def _ground_literal(lit: Literal, binding: dict[str, Term]) -> Literal:
    return Literal(lit.predicate, tuple(_substitute(a, binding) for a in lit.args), lit.negated)


def _dewildcard(lit: Literal, counter: itertools.count) -> Literal:
    def walk(term: Term) -> Term:
        if isinstance(term, Wildcard):
            return Variable(f"_W{next(counter)}")
        if isinstance(term, Compound):
            return Compound(term.functor, tuple(walk(a) for a in term.args))
        return term

    return Literal(lit.predicate, tuple(walk(a) for a in lit.args), lit.negated)


def _assignments(names: Sequence[str], universe: Sequence[Term]):
    for combo in itertools.product(universe, repeat=len(names)):
        yield dict(zip(names, combo))


def ground_query_oracle(
    facts: Sequence[Literal],
    rules: Sequence[Rule],
    goal: Sequence[Literal],
    universe: Sequence[Term],
) -> set[frozenset]:
    """Answer set by exhaustive grounding and naive fixpoint derivation.

    Returns a set of frozen binding sets for the goal's own variables
    (an empty frozenset means the goal holds with no bindings). Rule
    bodies must be negation-free; goal conjuncts may use
    negation-as-failure, judged against the derived atom set.
    """
    if len(universe) > MAX_UNIVERSE:
        raise UniverseTooLarge(f"{len(universe)} constants exceeds {MAX_UNIVERSE}")
    counter = itertools.count()
    derived: set[Literal] = set()
    for fact in facts:
        fact = _dewildcard(fact, counter)
        names = sorted(literal_variables(fact))
        for binding in _assignments(names, universe):
            derived.add(_ground_literal(fact, binding))

    for rule in rules:
        for lit in rule.body:
            if lit.negated:
                raise ValueError("ground oracle does not support negation in rule bodies")

    changed = True
    while changed:
        changed = False
        for rule in rules:
            names = sorted(
                literal_variables(rule.head)
                | {n for lit in rule.body for n in literal_variables(lit)}
            )
            for binding in _assignments(names, universe):
                if all(_ground_literal(l, binding) in derived for l in rule.body):
                    head = _ground_literal(rule.head, binding)
                    if head not in derived:
                        derived.add(head)
                        changed = True

    goal = [_dewildcard(g, counter) for g in goal]
    goal_names = sorted(
        {n for g in goal for n in literal_variables(g) if not n.startswith("_W")}
    )
    all_names = sorted({n for g in goal for n in literal_variables(g)})
    answers: set[frozenset] = set()
    for binding in _assignments(all_names, universe):
        holds = True
        for conjunct in goal:
            if conjunct.predicate == "true" and not conjunct.args:
                continue
            ground = _ground_literal(conjunct.positive(), binding)
            if conjunct.negated == (ground in derived):
                holds = False
                break
        if holds:
            answers.add(frozenset((n, binding[n]) for n in goal_names))
    return answers


# --------------------------------------------------------------------------
# Scenario fixtures
# --------------------------------------------------------------------------

@dataclass
class FixtureReport:
    name: str
    passed: bool
    diffs: list[str] = field(default_factory=list)
    digest: str = ""
    cycles: int = 0


def builtin_scenario_path(name: str) -> Path:
    return SCENARIOS_DIR / name


def load_fixture_registry() -> dict:
    if FIXTURES_FILE.exists():
        return json.loads(FIXTURES_FILE.read_text(encoding="utf-8"))
    return {}


def fixture_names() -> list[str]:
    return sorted(load_fixture_registry())


def execute_fixture(name: str, entry: dict | None = None):
    """Run a shipped fixture; transcript fixtures drive the REPL path."""
    if entry is None:
        entry = load_fixture_registry().get(name, {})
    path = builtin_scenario_path(name)
    scenario = load_scenario(path)
    transcript = entry.get("transcript")
    if transcript:
        from .cli import Repl, RunConfig
        from .runtime import build_system

        system = build_system(scenario)
        config = RunConfig(scenario=path, transcript=path / transcript, interactive=True)
        Repl(system, scenario, config).loop()
    else:
        system = run_scenario(scenario)
    return system, scenario


def run_fixture(name: str, check_digest: bool = True) -> FixtureReport:
    """Run one shipped fixture and diff it against its frozen expectations."""
    registry = load_fixture_registry()
    expected = registry.get(name)
    if expected is None:
        return FixtureReport(name, False, [f"unknown fixture {name!r}"])
    system, scenario = execute_fixture(name, expected)
    summary = system.summary(scenario.success)
    report = FixtureReport(name, True, digest=system.trace.digest(), cycles=system.cycle)

    if not summary.success:
        report.passed = False
        report.diffs.extend(summary.failures)
    expect = expected.get("expect", {})
    for key in ("violations", "preventions", "remedied"):
        if key in expect:
            actual = getattr(summary, key if key != "remedied" else "remedied")
            if actual != expect[key]:
                report.passed = False
                report.diffs.append(f"{key}: expected {expect[key]}, got {actual}")
    for state, count in expect.get("commitment_states", {}).items():
        actual = sum(1 for s in summary.commitment_states.values() if s == state)
        if actual != count:
            report.passed = False
            report.diffs.append(f"commitments {state}: expected {count}, got {actual}")
    frozen = expected.get("digest")
    if check_digest and frozen:
        if report.digest != frozen:
            report.passed = False
            report.diffs.append(f"trace digest drifted: expected {frozen}, got {report.digest}")
    return report


def freeze_fixture_digests(names: Sequence[str] | None = None) -> dict:
    """Re-run fixtures and write their digests into the registry.

    Maintenance helper for intentional behavior changes; the committed
    digests are the regression baseline.
    """
    registry = load_fixture_registry()
    for name in names or sorted(registry):
        system, _ = execute_fixture(name, registry.get(name, {}))
        registry.setdefault(name, {})["digest"] = system.trace.digest()
    FIXTURES_FILE.write_text(json.dumps(registry, indent=2) + "\n", encoding="utf-8")
    return registry
