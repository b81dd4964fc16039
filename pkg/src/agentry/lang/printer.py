"""Pretty-printer for the agent language.

The printed form of any valid program reparses to a structurally equal
program (round-trip identity up to whitespace). Individual render helpers
are also the canonical single-line renderings used in trace payloads,
norm files, and error messages.
"""

from __future__ import annotations

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
    Variable,
    Wildcard,
)


def render_term(term: Term) -> str:
    if isinstance(term, Variable):
        return term.name
    if isinstance(term, Atom):
        return term.name
    if isinstance(term, Wildcard):
        return "_"
    if isinstance(term, TextConstant):
        escaped = term.value.replace("\\", "\\\\").replace('"', '\\"')
        escaped = escaped.replace("\n", "\\n").replace("\t", "\\t")
        return f'"{escaped}"'
    if isinstance(term, NumberConstant):
        value = term.value
        if value == int(value):
            return str(int(value))
        return repr(value)
    if isinstance(term, Compound):
        return f"{term.functor}({', '.join(render_term(a) for a in term.args)})"
    raise TypeError(f"not a term: {term!r}")


def render_literal(lit: Literal) -> str:
    body = lit.predicate
    if lit.args:
        body = f"{lit.predicate}({', '.join(render_term(a) for a in lit.args)})"
    return f"not {body}" if lit.negated else body


def render_prompt(prompt: PromptExpr) -> str:
    return " + ".join(render_term(p) for p in prompt.parts)


def render_condition(cond: ContextCondition) -> str:
    if isinstance(cond, QueryLLM):
        return f"query_LLM({render_prompt(cond.prompt)})"
    return render_literal(cond)


def render_step(step: PlanStep) -> str:
    if isinstance(step, ExternalAction):
        return render_literal(step.action)
    if isinstance(step, InternalAction):
        return f".{step.name}({', '.join(render_term(a) for a in step.args)})"
    if isinstance(step, AddBelief):
        return f"+{render_literal(step.belief)}"
    if isinstance(step, RemoveBelief):
        return f"-{render_literal(step.belief)}"
    if isinstance(step, ReplaceBelief):
        return f"-+{render_literal(step.belief)}"
    if isinstance(step, SubGoal):
        return f"!{render_literal(step.goal)}"
    if isinstance(step, TestGoal):
        return f"?{render_literal(step.goal)}"
    if isinstance(step, SendMessage):
        parts = f"{render_term(step.recipient)}, {step.performative}, {render_literal(step.content)}"
        return f".send({parts})"
    if isinstance(step, QueryLLM):
        return f"query_LLM({render_prompt(step.prompt)})"
    if isinstance(step, AskLLM):
        return f"ask_LLM({render_prompt(step.prompt)}, {step.result.name})"
    raise TypeError(f"not a plan step: {step!r}")


def render_rule(rule: Rule) -> str:
    body = " & ".join(render_literal(l) for l in rule.body)
    return f"{render_literal(rule.head)} :- {body}."


def render_plan(plan: Plan) -> str:
    trig = plan.trigger
    if isinstance(trig, GoalAddition):
        head = f"+!{render_literal(trig.goal)}"
    else:
        head = f"+{render_literal(trig.belief)}"
    context = "true"
    if plan.context:
        context = " & ".join(render_condition(c) for c in plan.context)
    lines = [f"{head} : {context} <-"]
    for i, step in enumerate(plan.body):
        sep = "." if i == len(plan.body) - 1 else ";"
        lines.append(f"    {render_step(step)}{sep}")
    return "\n".join(lines)


def pretty_print(program: AgentProgram) -> str:
    """Render a program as source text; reparsing yields an equal program."""
    chunks: list[str] = []
    for belief in program.beliefs:
        chunks.append(f"{render_literal(belief)}.")
    for rule in program.rules:
        chunks.append(render_rule(rule))
    for goal in program.goals:
        chunks.append(f"!{render_literal(goal)}.")
    for plan in program.plans:
        chunks.append(render_plan(plan))
    return "\n\n".join(chunks) + ("\n" if chunks else "")
