"""Parser, pretty-printer, and round-trip behavior."""

from __future__ import annotations

import pytest
from hypothesis import given, settings, strategies as st

from agentry.lang import (
    AgentProgram,
    AskLLM,
    Atom,
    AddBelief,
    BeliefAddition,
    Compound,
    ExternalAction,
    GoalAddition,
    InternalAction,
    Literal,
    NumberConstant,
    ParseError,
    Plan,
    PromptExpr,
    QueryLLM,
    RangeRestrictionError,
    RemoveBelief,
    ReplaceBelief,
    Rule,
    SendMessage,
    SubGoal,
    TestGoal as TestGoalStep,
    TextConstant,
    Variable,
    Wildcard,
    parse_agent_source,
    parse_literal,
    pretty_print,
)

FIG2_PLAN_P2 = """
+!prepare_project : project_repo(URL) <-
    clone_repo(URL);
    get_backlog_item(T);
    +current_task(T);
    +task_status(T, adopted).
"""


def test_single_belief_with_text_constant():
    program = parse_agent_source('project_url("https://github.com/codebase.git").')
    assert len(program.beliefs) == 1
    belief = program.beliefs[0]
    assert belief.predicate == "project_url"
    assert belief.args == (TextConstant("https://github.com/codebase.git"),)


def test_empty_source_gives_empty_program():
    program = parse_agent_source("")
    assert program == AgentProgram()


def test_fig2_p2_plan_structure():
    program = parse_agent_source(FIG2_PLAN_P2)
    assert len(program.plans) == 1
    plan = program.plans[0]
    assert plan.trigger == GoalAddition(Literal("prepare_project"))
    assert plan.context == (Literal("project_repo", (Variable("URL"),)),)
    assert len(plan.body) == 4
    assert plan.body[0] == ExternalAction(Literal("clone_repo", (Variable("URL"),)))
    assert plan.body[3] == AddBelief(
        Literal("task_status", (Variable("T"), Atom("adopted")))
    )


def test_unterminated_plan_reports_position():
    with pytest.raises(ParseError) as err:
        parse_agent_source("+!g : c <- a1;")
    assert err.value.line == 1
    assert err.value.column == 15  # one past the final character
    assert err.value.expected


def test_parse_error_carries_expected_tokens():
    with pytest.raises(ParseError) as err:
        parse_agent_source("p(1) :- .")
    assert err.value.expected


def test_range_restriction_violation():
    with pytest.raises(RangeRestrictionError) as err:
        parse_agent_source("head(X, Y) :- body(X).")
    assert err.value.variable == "Y"
    assert err.value.rule_head == "head"


def test_comments_are_ignored():
    program = parse_agent_source("// just a comment\np(a). // trailing\n")
    assert len(program.beliefs) == 1


def test_belief_addition_trigger_and_steps():
    source = """
+task_status(T, implemented) : true <-
    ?project_repo(URL);
    submitPR(URL);
    .send(TestingAgent, achieve, test(T, "privacy leaks")).
"""
    plan = parse_agent_source(source).plans[0]
    assert plan.trigger == BeliefAddition(
        Literal("task_status", (Variable("T"), Atom("implemented")))
    )
    assert plan.context == ()
    assert plan.body[0] == TestGoalStep(Literal("project_repo", (Variable("URL"),)))
    send = plan.body[2]
    assert isinstance(send, SendMessage)
    assert send.recipient == Variable("TestingAgent")
    assert send.performative == "achieve"
    assert send.content == Literal("test", (Variable("T"), TextConstant("privacy leaks")))


def test_ask_llm_and_query_llm_parse():
    source = """
+!develop : query_LLM("Is " + T + " ok?") <-
    .concat("implement ", T, Prompt);
    ask_LLM(Prompt, Code);
    query_LLM("done?").
"""
    plan = parse_agent_source(source).plans[0]
    assert isinstance(plan.context[0], QueryLLM)
    assert plan.context[0].prompt.parts == (
        TextConstant("Is "),
        Variable("T"),
        TextConstant(" ok?"),
    )
    assert plan.body[0] == InternalAction(
        "concat", (TextConstant("implement "), Variable("T"), Variable("Prompt"))
    )
    assert plan.body[1] == AskLLM(
        prompt=plan.body[1].prompt, result=Variable("Code")
    )
    assert isinstance(plan.body[2], QueryLLM)


def test_replace_and_remove_belief_steps():
    plan = parse_agent_source("+!g : true <- -+status(done); -old(X); !next.").plans[0]
    assert plan.body == (
        ReplaceBelief(Literal("status", (Atom("done"),))),
        RemoveBelief(Literal("old", (Variable("X"),))),
        SubGoal(Literal("next")),
    )


def test_initial_goals_and_declaration_indices():
    source = "!go.\n+!go : true <- a.\n+!go : true <- b.\n"
    program = parse_agent_source(source)
    assert program.goals == (Literal("go"),)
    assert [p.index for p in program.plans] == [0, 1]


def test_wildcards_and_numbers_parse():
    program = parse_agent_source("task_status(_, _).\nweight(w1, 2.5).\nneg(n, -3).")
    assert program.beliefs[0].args == (Wildcard(), Wildcard())
    assert program.beliefs[1].args[1] == NumberConstant(2.5)
    assert program.beliefs[2].args[1] == NumberConstant(-3)


def test_bad_performative_rejected():
    with pytest.raises(ParseError):
        parse_agent_source("+!g : true <- .send(Agent, shout, p(a)).")


def test_negated_literal_only_in_rule_bodies():
    program = parse_agent_source("q(X) :- p(X) & not done(X).")
    assert program.rules[0].body[1].negated
    with pytest.raises(ParseError):
        parse_agent_source("not p(a).")


def test_deep_nesting_is_an_error_not_a_crash():
    source = "p(" + "f(" * 500 + "a" + ")" * 500 + ")."
    with pytest.raises(ParseError):
        parse_agent_source(source)


def test_oversized_source_rejected():
    with pytest.raises(ParseError):
        parse_agent_source("p(a). " * 20000)


# --------------------------------------------------------------------------
# Round-trip property
# --------------------------------------------------------------------------

atom_names = st.sampled_from(["p", "q", "task", "go", "foo_bar", "s1"])
var_names = st.sampled_from(["X", "Y", "Z", "Var", "_v"])
strings = st.text(
    alphabet=st.sampled_from('abc XYZ_09."\\\n\t'), max_size=12
).map(TextConstant)
numbers = st.one_of(
    st.integers(-999, 999).map(lambda n: NumberConstant(float(n))),
    st.sampled_from([0.5, 1.25, 3.75]).map(NumberConstant),
)


def terms(depth: int = 2):
    base = st.one_of(
        atom_names.map(Atom),
        var_names.map(Variable),
        strings,
        numbers,
        st.just(Wildcard()),
    )
    if depth == 0:
        return base
    return st.one_of(
        base,
        st.builds(
            Compound,
            atom_names,
            st.lists(terms(depth - 1), min_size=1, max_size=3).map(tuple),
        ),
    )


def literals(negated: bool = False):
    return st.builds(
        Literal,
        atom_names,
        st.lists(terms(), max_size=3).map(tuple),
        st.booleans() if negated else st.just(False),
    )


@st.composite
def rules(draw):
    body = tuple(draw(st.lists(literals(), min_size=1, max_size=3)))
    body_vars = sorted(
        {v for lit in body for a in lit.args for v in _vars_of(a)}
    )
    head_args = tuple(
        draw(
            st.lists(
                st.one_of(
                    atom_names.map(Atom),
                    st.sampled_from(body_vars).map(Variable) if body_vars else atom_names.map(Atom),
                ),
                max_size=2,
            )
        )
    )
    return Rule(Literal(draw(atom_names), head_args), body)


def _vars_of(term):
    if isinstance(term, Variable):
        return {term.name}
    if isinstance(term, Compound):
        return {v for a in term.args for v in _vars_of(a)}
    return set()


prompt_parts = st.lists(
    st.one_of(strings, var_names.map(Variable), atom_names.map(Atom)),
    min_size=1,
    max_size=3,
).map(tuple)

steps = st.one_of(
    st.builds(ExternalAction, literals()),
    st.builds(InternalAction, st.sampled_from(["concat", "eq"]), st.lists(terms(1), min_size=1, max_size=3).map(tuple)),
    st.builds(AddBelief, literals()),
    st.builds(RemoveBelief, literals()),
    st.builds(ReplaceBelief, literals()),
    st.builds(SubGoal, literals()),
    st.builds(TestGoalStep, literals()),
    st.builds(
        SendMessage,
        st.one_of(atom_names.map(Atom), var_names.map(Variable)),
        st.sampled_from(["achieve", "tell", "ask"]),
        literals(),
    ),
    st.builds(QueryLLM, prompt_parts.map(PromptExpr)),
)


@st.composite
def plans(draw, index: int = 0):
    trigger = draw(
        st.one_of(st.builds(GoalAddition, literals()), st.builds(BeliefAddition, literals()))
    )
    context = tuple(
        draw(
            st.lists(
                st.one_of(
                    literals(negated=True),
                    st.builds(QueryLLM, prompt_parts.map(PromptExpr)),
                ),
                max_size=3,
            )
        )
    )
    body = tuple(draw(st.lists(steps, min_size=1, max_size=4)))
    return Plan(trigger, context, body, index)


@st.composite
def programs(draw):
    plan_list = draw(st.lists(plans(), max_size=3))
    plan_list = tuple(
        Plan(p.trigger, p.context, p.body, i) for i, p in enumerate(plan_list)
    )
    return AgentProgram(
        name="gen",
        beliefs=tuple(draw(st.lists(literals(), max_size=3))),
        rules=tuple(draw(st.lists(rules(), max_size=2))),
        plans=plan_list,
        goals=tuple(draw(st.lists(literals(), max_size=2))),
    )


@settings(max_examples=200, deadline=None)
@given(programs())
def test_round_trip_identity(program):
    text = pretty_print(program)
    assert parse_agent_source(text, name="gen") == program


def test_round_trip_of_shipped_style_program():
    from conftest import scenario_path

    source = (scenario_path("figs23_end_to_end") / "coding_agent.asl").read_text()
    program = parse_agent_source(source, "CodingAgent")
    assert parse_agent_source(pretty_print(program), "CodingAgent") == program


def test_two_literal_rule_renders_with_ampersand():
    program = parse_agent_source("h(X) :- a(X) & b(X).")
    text = pretty_print(program)
    assert "h(X) :- a(X) & b(X)." in text
    assert parse_agent_source(text) == program


def test_pretty_print_empty_program():
    assert pretty_print(AgentProgram()) == ""
