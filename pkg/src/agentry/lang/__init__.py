"""Agent language: abstract syntax, parser, and pretty-printer."""

from .ast import (
    AgentProgram,
    AskLLM,
    Atom,
    AddBelief,
    BeliefAddition,
    Compound,
    ContextCondition,
    ExternalAction,
    GoalAddition,
    InternalAction,
    Literal,
    NumberConstant,
    PERFORMATIVES,
    Plan,
    PlanStep,
    PromptExpr,
    QueryLLM,
    RemoveBelief,
    ReplaceBelief,
    Rule,
    SendMessage,
    SubGoal,
    Term,
    TestGoal,
    TextConstant,
    TRUE,
    Trigger,
    Variable,
    Wildcard,
    is_ground,
    is_ground_term,
    literal_variables,
    term_variables,
)
from .parser import (
    ParseError,
    RangeRestrictionError,
    parse_agent_source,
    parse_literal,
    parse_literal_conjunction,
    parse_plan_step,
    parse_term,
)
from .printer import (
    pretty_print,
    render_condition,
    render_literal,
    render_plan,
    render_prompt,
    render_rule,
    render_step,
    render_term,
)

__all__ = [
    "AgentProgram",
    "AskLLM",
    "Atom",
    "AddBelief",
    "BeliefAddition",
    "Compound",
    "ContextCondition",
    "ExternalAction",
    "GoalAddition",
    "InternalAction",
    "Literal",
    "NumberConstant",
    "PERFORMATIVES",
    "ParseError",
    "Plan",
    "PlanStep",
    "PromptExpr",
    "QueryLLM",
    "RangeRestrictionError",
    "RemoveBelief",
    "ReplaceBelief",
    "Rule",
    "SendMessage",
    "SubGoal",
    "TRUE",
    "Term",
    "TestGoal",
    "TextConstant",
    "Trigger",
    "Variable",
    "Wildcard",
    "is_ground",
    "is_ground_term",
    "literal_variables",
    "parse_agent_source",
    "parse_literal",
    "parse_literal_conjunction",
    "parse_plan_step",
    "parse_term",
    "pretty_print",
    "render_condition",
    "render_literal",
    "render_plan",
    "render_prompt",
    "render_rule",
    "render_step",
    "render_term",
    "term_variables",
]
