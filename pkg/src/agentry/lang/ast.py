"""Abstract syntax for the agent language.

Terms are first-order: variables (uppercase or ``_x`` initial), atoms
(lowercase initial), strings, numbers, compounds, and the wildcard ``_``.
On top of terms sit literals, rules, plan steps, plans, and whole agent
programs. Everything is an immutable (frozen, hashable) dataclass so that
belief bases can use set semantics and tests can compare structurally.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union


# --------------------------------------------------------------------------
# Terms
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Variable:
    """A logic variable. Names start with an uppercase letter or ``_x``."""

    name: str


@dataclass(frozen=True)
class Atom:
    """A constant symbol with a lowercase-initial name."""

    name: str


@dataclass(frozen=True)
class TextConstant:
    """A double-quoted string constant."""

    value: str


@dataclass(frozen=True)
class NumberConstant:
    """A numeric constant. Stored as float; integral values print as ints."""

    value: float


@dataclass(frozen=True)
class Compound:
    """A functor applied to one or more argument terms."""

    functor: str
    args: tuple["Term", ...]


@dataclass(frozen=True)
class Wildcard:
    """The anonymous term ``_``: unifies with anything, binds nothing."""


Term = Union[Variable, Atom, TextConstant, NumberConstant, Compound, Wildcard]


@dataclass(frozen=True)
class Literal:
    """A predicate over terms; ``negated`` marks negation-as-failure."""

    predicate: str
    args: tuple[Term, ...] = ()
    negated: bool = False

    def positive(self) -> "Literal":
        return Literal(self.predicate, self.args) if self.negated else self

    @property
    def arity(self) -> int:
        return len(self.args)


TRUE = Literal("true")


@dataclass(frozen=True)
class Rule:
    """``head :- b1 & b2 & ...`` with a positive head and nonempty body."""

    head: Literal
    body: tuple[Literal, ...]


# --------------------------------------------------------------------------
# Prompt expressions and plan steps
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class PromptExpr:
    """A ``+``-concatenation of terms rendered to text for the oracle."""

    parts: tuple[Term, ...]


@dataclass(frozen=True)
class ExternalAction:
    action: Literal


@dataclass(frozen=True)
class InternalAction:
    name: str
    args: tuple[Term, ...]


@dataclass(frozen=True)
class AddBelief:
    belief: Literal


@dataclass(frozen=True)
class RemoveBelief:
    belief: Literal


@dataclass(frozen=True)
class ReplaceBelief:
    """``-+b``: retract everything unifying with b, then assert b.

    A single step that emits both the removal and addition events.
    """

    belief: Literal


@dataclass(frozen=True)
class SubGoal:
    goal: Literal


@dataclass(frozen=True)
class TestGoal:
    __test__ = False  # keep pytest from collecting this AST node

    goal: Literal


PERFORMATIVES = ("achieve", "tell", "ask")


@dataclass(frozen=True)
class SendMessage:
    recipient: Term
    performative: str
    content: Literal


@dataclass(frozen=True)
class QueryLLM:
    prompt: PromptExpr


@dataclass(frozen=True)
class AskLLM:
    prompt: PromptExpr
    result: Variable


PlanStep = Union[
    ExternalAction,
    InternalAction,
    AddBelief,
    RemoveBelief,
    ReplaceBelief,
    SubGoal,
    TestGoal,
    SendMessage,
    QueryLLM,
    AskLLM,
]

# Context conditions are conjunctions of literals and oracle queries.
ContextCondition = Union[Literal, QueryLLM]


# --------------------------------------------------------------------------
# Plans and programs
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class GoalAddition:
    """Trigger ``+!g``: the goal g was adopted."""

    goal: Literal


@dataclass(frozen=True)
class BeliefAddition:
    """Trigger ``+b``: the belief b was added."""

    belief: Literal


Trigger = Union[GoalAddition, BeliefAddition]


@dataclass(frozen=True)
class Plan:
    """Trigger + context condition + body; ``index`` is declaration order."""

    trigger: Trigger
    context: tuple[ContextCondition, ...]
    body: tuple[PlanStep, ...]
    index: int

    @property
    def trigger_literal(self) -> Literal:
        trig = self.trigger
        return trig.goal if isinstance(trig, GoalAddition) else trig.belief


@dataclass(frozen=True)
class AgentProgram:
    name: str = ""
    beliefs: tuple[Literal, ...] = ()
    rules: tuple[Rule, ...] = ()
    plans: tuple[Plan, ...] = ()
    goals: tuple[Literal, ...] = field(default=())

    def with_extra_plans(self, plans: tuple[Plan, ...]) -> "AgentProgram":
        """A copy with plans appended after the existing library."""
        reindexed = tuple(
            Plan(p.trigger, p.context, p.body, len(self.plans) + i)
            for i, p in enumerate(plans)
        )
        return AgentProgram(
            self.name, self.beliefs, self.rules, self.plans + reindexed, self.goals
        )


def term_variables(term: Term) -> set[str]:
    """Names of all variables occurring in a term."""
    if isinstance(term, Variable):
        return {term.name}
    if isinstance(term, Compound):
        out: set[str] = set()
        for a in term.args:
            out |= term_variables(a)
        return out
    return set()


def literal_variables(lit: Literal) -> set[str]:
    out: set[str] = set()
    for a in lit.args:
        out |= term_variables(a)
    return out


def is_ground_term(term: Term) -> bool:
    if isinstance(term, (Variable, Wildcard)):
        return False
    if isinstance(term, Compound):
        return all(is_ground_term(a) for a in term.args)
    return True


def is_ground(lit: Literal) -> bool:
    return all(is_ground_term(a) for a in lit.args)
