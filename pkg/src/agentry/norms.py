"""Deontic norms and the three compliance stages.

A norm binds a subject toward an object with an antecedent condition and a
consequent pattern. Prohibitions and permissions constrain the subject;
obligations oblige the object (the party the subject expects something
from). Compliance is enforced at three stages:

* desires — :func:`screen_goal` rejects goals that are themselves
  prohibited or that can only be achieved through prohibited steps;
* plans — :func:`filter_plans` drops applicable plan instances containing
  prohibited steps, unless a permission covers them;
* actions — :func:`monitor_action` reports executed actions or observed
  effects that match active prohibitions, and :class:`ObligationTracker`
  reports obligations whose window lapsed undischarged.

LLM output is checked separately (:func:`check_llm_output`) against textual
detectors declared on prohibition norms. Activation is always evaluated
against the judging agent's own beliefs: there is no global norm authority.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence, Union

from .lang import (
    Compound,
    ExternalAction,
    Literal,
    Plan,
    PlanStep,
    Term,
    TextConstant,
    Variable,
    is_ground,
    parse_literal,
    parse_literal_conjunction,
    render_literal,
)
from .logic import (
    BeliefBase,
    Substitution,
    derivable,
    solutions,
    unify_literals,
    _rename_literal,
)

OBLIGATION = "obligation"
PROHIBITION = "prohibition"
PERMISSION = "permission"
MODALITIES = (OBLIGATION, PROHIBITION, PERMISSION)

DESIRE = "desire"
PLAN = "plan"
ACTION = "action"
LLM_OUTPUT = "llm-output"

DEFAULT_OBLIGATION_WINDOW = 50


class UnknownRole(Exception):
    """An escalation remedy names a role with no registered agent."""


@dataclass(frozen=True)
class CompensatingAction:
    action: Literal


@dataclass(frozen=True)
class SecondaryCommitment:
    debtor: str
    creditor: str
    antecedent: Literal
    consequent: Literal
    deadline: int | None = None


@dataclass(frozen=True)
class EscalateToHuman:
    role: str


RemedySpec = Union[CompensatingAction, SecondaryCommitment, EscalateToHuman]


@dataclass(frozen=True)
class Detector:
    """Textual predicate over LLM output declared in the norm file."""

    substring: str | None = None
    regex: str | None = None

    def matches(self, output: str) -> bool:
        if self.substring is not None:
            return self.substring in output
        if self.regex is not None:
            return re.search(self.regex, output) is not None
        return False


@dataclass(frozen=True)
class Norm:
    id: str
    modality: str
    subject: str
    object: str
    antecedent: tuple[Literal, ...]
    consequent: Literal
    remedy: RemedySpec | None = None
    window: int | None = None
    detector: Detector | None = None
    order: int = 0


@dataclass(frozen=True)
class Violation:
    norm_id: str
    violator: str
    instant: int
    instance: Literal
    stage: str


@dataclass(frozen=True)
class AgentIdentity:
    name: str
    roles: tuple[str, ...] = ()

    def matches(self, party: str) -> bool:
        return party == self.name or party in self.roles


def _substitute(term: Term, bindings: dict[str, Term]) -> Term:
    if isinstance(term, Variable):
        return bindings.get(term.name, term)
    if isinstance(term, Compound):
        return Compound(term.functor, tuple(_substitute(a, bindings) for a in term.args))
    return term


def substitute_literal(lit: Literal, bindings: dict[str, Term]) -> Literal:
    return Literal(lit.predicate, tuple(_substitute(a, bindings) for a in lit.args), lit.negated)


# --------------------------------------------------------------------------
# Norm file loading
# --------------------------------------------------------------------------

def parse_norm(raw: dict, order: int = 0) -> Norm:
    modality = raw["modality"]
    if modality not in MODALITIES:
        raise ValueError(f"unknown norm modality {modality!r}")
    remedy: RemedySpec | None = None
    raw_remedy = raw.get("remedy")
    if raw_remedy is not None:
        if "compensating_action" in raw_remedy:
            remedy = CompensatingAction(parse_literal(raw_remedy["compensating_action"]))
        elif "secondary_commitment" in raw_remedy:
            tpl = raw_remedy["secondary_commitment"]
            remedy = SecondaryCommitment(
                debtor=tpl["debtor"],
                creditor=tpl["creditor"],
                antecedent=parse_literal(tpl.get("antecedent", "true")),
                consequent=parse_literal(tpl["consequent"]),
                deadline=tpl.get("deadline"),
            )
        elif "escalate_to_human" in raw_remedy:
            remedy = EscalateToHuman(raw_remedy["escalate_to_human"])
        else:
            raise ValueError(f"norm {raw.get('id')!r}: unrecognized remedy {raw_remedy!r}")
    detector = None
    raw_detector = raw.get("detector")
    if raw_detector is not None:
        if ("substring" in raw_detector) == ("regex" in raw_detector):
            raise ValueError("detector needs exactly one of 'substring' or 'regex'")
        detector = Detector(raw_detector.get("substring"), raw_detector.get("regex"))
    return Norm(
        id=raw["id"],
        modality=modality,
        subject=raw["subject"],
        object=raw["object"],
        antecedent=parse_literal_conjunction(raw.get("antecedent", "true")),
        consequent=parse_literal(raw["consequent"]),
        remedy=remedy,
        window=raw.get("window"),
        detector=detector,
        order=order,
    )


def load_norm_file(path: str | Path) -> tuple[Norm, ...]:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(data, list):
        raise ValueError("norm file must be a JSON array of norm objects")
    return tuple(parse_norm(raw, i) for i, raw in enumerate(data))


# --------------------------------------------------------------------------
# Activation and coverage
# --------------------------------------------------------------------------

_fresh = [0]


def _rename_apart(lit: Literal) -> Literal:
    import itertools

    _fresh[0] += 1
    counter = itertools.count(_fresh[0] * 1000)
    return _rename_literal(lit, {}, counter)


def _is_active(norm: Norm, agent: AgentIdentity, beliefs: BeliefBase) -> bool:
    if not agent.matches(norm.subject):
        return False
    return derivable(beliefs, norm.antecedent)


def _permitted(instance: Literal, agent: AgentIdentity, norms: Sequence[Norm], beliefs: BeliefBase) -> bool:
    """True when a permission norm covers the (possibly ground) instance."""
    for norm in norms:
        if norm.modality != PERMISSION:
            continue
        if not _is_active(norm, agent, beliefs):
            continue
        if unify_literals(_rename_apart(norm.consequent), instance) is not None:
            return True
    return False


def active_prohibitions(
    agent: AgentIdentity, norms: Sequence[Norm], beliefs: BeliefBase
) -> list[Norm]:
    return [n for n in norms if n.modality == PROHIBITION and _is_active(n, agent, beliefs)]


def _prohibited(
    instance: Literal,
    agent: AgentIdentity,
    norms: Sequence[Norm],
    beliefs: BeliefBase,
) -> Norm | None:
    """The first active, un-permitted prohibition matching the instance."""
    for norm in active_prohibitions(agent, norms, beliefs):
        if unify_literals(_rename_apart(norm.consequent), instance) is None:
            continue
        if _permitted(instance, agent, norms, beliefs):
            return None
        return norm
    return None


def _step_action(step: PlanStep) -> Literal | None:
    if isinstance(step, ExternalAction):
        return step.action
    return None


# --------------------------------------------------------------------------
# Compliance in desires
# --------------------------------------------------------------------------

def screen_goal(
    goal: Literal,
    agent: AgentIdentity,
    norms: Sequence[Norm],
    beliefs: BeliefBase,
    plans: Sequence[Plan] = (),
    cycle: int = 0,
) -> list[Violation]:
    """Violations that adopting this goal would entail; empty means allowed.

    A goal is rejected when an active prohibition's consequent unifies with
    the goal itself, or when every relevant plan for the goal contains a
    step unifying with it (the goal entails a prohibited action).
    """
    from .lang import GoalAddition

    violations: list[Violation] = []
    relevant = [
        p
        for p in plans
        if isinstance(p.trigger, GoalAddition)
        and unify_literals(_rename_apart(p.trigger.goal), goal) is not None
    ]
    for norm in active_prohibitions(agent, norms, beliefs):
        direct = unify_literals(_rename_apart(norm.consequent), goal) is not None
        entailed = bool(relevant) and all(
            any(
                (action := _step_action(step)) is not None
                and unify_literals(_rename_apart(norm.consequent), action) is not None
                for step in plan.body
            )
            for plan in relevant
        )
        if not (direct or entailed):
            continue
        if _permitted(goal, agent, norms, beliefs):
            continue
        violations.append(Violation(norm.id, agent.name, cycle, goal, DESIRE))
    return violations


# --------------------------------------------------------------------------
# Compliance in plans
# --------------------------------------------------------------------------

def filter_plans(
    applicable: Sequence[tuple[Plan, Substitution]],
    agent: AgentIdentity,
    norms: Sequence[Norm],
    beliefs: BeliefBase,
) -> list[tuple[Plan, Substitution]]:
    """Drop plan instances whose instantiated steps hit an active prohibition."""
    kept: list[tuple[Plan, Substitution]] = []
    for plan, subst in applicable:
        rejected = False
        for step in plan.body:
            action = _step_action(step)
            if action is None:
                continue
            instance = subst.apply_literal(action)
            if _prohibited(instance, agent, norms, beliefs) is not None:
                rejected = True
                break
        if not rejected:
            kept.append((plan, subst))
    return kept


# --------------------------------------------------------------------------
# Compliance in actions
# --------------------------------------------------------------------------

def monitor_action(
    executed: Literal,
    effects: Sequence[Literal],
    agent: AgentIdentity,
    norms: Sequence[Norm],
    beliefs: BeliefBase,
    cycle: int = 0,
) -> list[Violation]:
    """One violation per active prohibition hit by the action or an effect."""
    violations: list[Violation] = []
    for instance in (executed, *effects):
        norm = _prohibited(instance, agent, norms, beliefs)
        if norm is not None:
            violations.append(Violation(norm.id, agent.name, cycle, instance, ACTION))
    return violations


@dataclass
class ObligationTracker:
    """Per-run record of obligation activations, discharges, and firings.

    An obligation activates against the obligated agent (the norm's object)
    when its antecedent becomes derivable from that agent's own beliefs; it
    discharges when the consequent becomes derivable or matches a goal the
    agent adopted or an action it performed; it fires (once per activation
    instance) when the window lapses first.
    """

    activations: dict[tuple[str, str, str], int] = field(default_factory=dict)
    done: set[tuple[str, str, str]] = field(default_factory=set)
    default_window: int = DEFAULT_OBLIGATION_WINDOW

    def sweep(
        self,
        agent: AgentIdentity,
        norms: Sequence[Norm],
        beliefs: BeliefBase,
        discharge_log: Sequence[Literal],
        cycle: int,
    ) -> list[Violation]:
        violations: list[Violation] = []
        for norm in norms:
            if norm.modality != OBLIGATION or not agent.matches(norm.object):
                continue
            for binding in solutions(beliefs, norm.antecedent):
                if any(not is_ground(substitute_literal(l, binding)) for l in norm.antecedent):
                    continue
                instance_key = (
                    norm.id,
                    agent.name,
                    " & ".join(render_literal(substitute_literal(l, binding)) for l in norm.antecedent),
                )
                if instance_key in self.done:
                    continue
                if instance_key not in self.activations:
                    self.activations[instance_key] = cycle
                consequent = substitute_literal(norm.consequent, binding)
                discharged = derivable(beliefs, (consequent,)) or any(
                    unify_literals(consequent, entry) is not None for entry in discharge_log
                )
                if discharged:
                    self.done.add(instance_key)
                    continue
                window = norm.window if norm.window is not None else self.default_window
                if cycle - self.activations[instance_key] > window:
                    self.done.add(instance_key)
                    violations.append(
                        Violation(norm.id, agent.name, cycle, consequent, ACTION)
                    )
        return violations

    def pending(self) -> bool:
        """True while some activated obligation has neither fired nor discharged."""
        return any(key not in self.done for key in self.activations)


# --------------------------------------------------------------------------
# LLM-output compliance
# --------------------------------------------------------------------------

def check_llm_output(
    output: str,
    norms: Sequence[Norm],
    agent: AgentIdentity,
    beliefs: BeliefBase,
    cycle: int = 0,
) -> list[Violation]:
    """Violations from detector matches on active prohibitions; empty = pass."""
    violations: list[Violation] = []
    for norm in active_prohibitions(agent, norms, beliefs):
        if norm.detector is None or not norm.detector.matches(output):
            continue
        if _permitted(norm.consequent, agent, norms, beliefs):
            continue
        snippet = output if len(output) <= 40 else output[:37] + "..."
        instance = Literal("flagged_output", (TextConstant(norm.id), TextConstant(snippet)))
        violations.append(Violation(norm.id, agent.name, cycle, instance, LLM_OUTPUT))
    return violations


# --------------------------------------------------------------------------
# Remedies
# --------------------------------------------------------------------------

def remedy_bindings(norm: Norm, violation: Violation) -> dict[str, Term]:
    """Variable bindings from matching the norm's consequent to the instance."""
    subst = unify_literals(norm.consequent, violation.instance)
    if subst is None:
        return {}
    from .lang import literal_variables

    return {name: subst.apply(Variable(name)) for name in literal_variables(norm.consequent)}


def trigger_remedy(violation: Violation, norms: Sequence[Norm], handle, fired: set[Violation]) -> list[str]:
    """Enact the violated norm's remedy through the runtime handle, once.

    The handle provides ``post_goal(agent, literal)``,
    ``create_commitment(debtor, creditor, antecedent, consequent, deadline)``
    and ``escalate(role, violation)`` (which raises :class:`UnknownRole` for
    unregistered roles). Returns human-readable descriptions of what ran.
    """
    if violation in fired:
        return []
    norm = next((n for n in norms if n.id == violation.norm_id), None)
    if norm is None or norm.remedy is None:
        return []
    fired.add(violation)
    remedy = norm.remedy
    if isinstance(remedy, CompensatingAction):
        goal = substitute_literal(remedy.action, remedy_bindings(norm, violation))
        handle.post_goal(violation.violator, goal)
        return [f"compensating-goal {render_literal(goal)} posted to {violation.violator}"]
    if isinstance(remedy, SecondaryCommitment):
        bindings = remedy_bindings(norm, violation)
        commitment = handle.create_commitment(
            remedy.debtor,
            remedy.creditor,
            substitute_literal(remedy.antecedent, bindings),
            substitute_literal(remedy.consequent, bindings),
            remedy.deadline,
        )
        return [f"secondary-commitment {commitment.id} created"]
    if isinstance(remedy, EscalateToHuman):
        handle.escalate(remedy.role, violation)
        return [f"escalated to {remedy.role}"]
    raise TypeError(f"unknown remedy {remedy!r}")
