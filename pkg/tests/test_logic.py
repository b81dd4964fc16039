"""Substitutions, unification, belief base, and query answering."""

from __future__ import annotations

import itertools

import pytest
from hypothesis import given, settings, strategies as st

from agentry.conformance import ground_query_oracle
from agentry.lang import (
    Atom,
    Compound,
    Literal,
    Rule,
    Variable,
    Wildcard,
    parse_agent_source,
    parse_literal,
    parse_term,
)
from agentry.logic import (
    BeliefBase,
    DepthExceeded,
    EMPTY_SUBSTITUTION,
    FloundedNegation,
    NegatedAssertion,
    Substitution,
    assert_belief,
    derivable,
    first_answer,
    query,
    retract_belief,
    retracted_facts,
    solutions,
    unify,
    unify_literals,
)

# --------------------------------------------------------------------------
# Unification
# --------------------------------------------------------------------------

def test_variable_binds_to_constant():
    result = unify(Variable("X"), Atom("adopted"))
    assert result is not None
    assert result.apply(Variable("X")) == Atom("adopted")


def test_structural_decomposition_forces_binding():
    a = parse_literal("task_status(T, adopted)")
    b = parse_literal("task_status(t1, adopted)")
    result = unify_literals(a, b)
    assert result.apply(Variable("T")) == Atom("t1")


def test_occurs_check_rejects_cyclic_binding():
    assert unify(parse_term("X"), parse_term("f(X)")) is None


def test_nested_unifier_applies_to_both_sides():
    left = parse_term("f(X, g(Y))")
    right = parse_term("f(h(Z), g(Z))")
    result = unify(left, right)
    assert result is not None
    # the oracle for correctness: applying the unifier makes both sides equal
    assert result.apply(left) == result.apply(right)
    assert result.apply(Variable("X")) == result.apply(parse_term("h(Z)"))


def test_clash_fails():
    assert unify(Atom("a"), Atom("b")) is None
    assert unify(parse_term("f(a)"), parse_term("g(a)")) is None
    assert unify(parse_term("f(a)"), parse_term("f(a, b)")) is None


def test_wildcard_unifies_and_binds_nothing():
    result = unify(Wildcard(), parse_term("f(a)"))
    assert result is not None and len(result) == 0
    result = unify(Variable("X"), Wildcard())
    assert result is not None
    assert result.apply(Variable("X")) == Variable("X")  # stays free


# -- property: symmetry and idempotence --------------------------------------

atoms = st.sampled_from([Atom("a"), Atom("b"), Atom("c")])
variables = st.sampled_from([Variable(n) for n in "XYZW"])


def small_terms(depth=2):
    if depth == 0:
        return st.one_of(atoms, variables)
    return st.one_of(
        atoms,
        variables,
        st.builds(
            Compound,
            st.sampled_from(["f", "g"]),
            st.lists(small_terms(depth - 1), min_size=1, max_size=2).map(tuple),
        ),
    )


@settings(max_examples=300, deadline=None)
@given(small_terms(), small_terms())
def test_unify_success_is_symmetric(a, b):
    left = unify(a, b)
    right = unify(b, a)
    assert (left is None) == (right is None)
    if left is not None:
        assert left.apply(a) == left.apply(b)
        assert right.apply(a) == right.apply(b)


@settings(max_examples=300, deadline=None)
@given(small_terms(), small_terms())
def test_substitution_apply_is_idempotent(a, b):
    result = unify(a, b)
    if result is None:
        return
    for term in (a, b):
        once = result.apply(term)
        assert result.apply(once) == once


def _ground_instances(term, universe):
    """All ground instantiations of a term over the universe."""
    names = sorted(_vars(term))
    for combo in itertools.product(universe, repeat=len(names)):
        binding = dict(zip(names, combo))
        yield _subst(term, binding)


def _vars(term):
    if isinstance(term, Variable):
        return {term.name}
    if isinstance(term, Compound):
        return {v for a in term.args for v in _vars(a)}
    return set()


def _subst(term, binding):
    if isinstance(term, Variable):
        return binding[term.name]
    if isinstance(term, Compound):
        return Compound(term.functor, tuple(_subst(a, binding) for a in term.args))
    return term


def _depth1_universe():
    """Ground terms of depth <= 1 over three constants and functors f, g."""
    consts = [Atom("a"), Atom("b"), Atom("c")]
    universe = list(consts)
    for functor in ("f", "g"):
        for arity in (1, 2):
            for args in itertools.product(consts, repeat=arity):
                universe.append(Compound(functor, args))
    return universe


@settings(max_examples=150, deadline=None)
@given(small_terms(1), small_terms(1))
def test_most_general_unifier_by_ground_enumeration(a, b):
    """Brute-force MGU check over a small closed ground-term universe.

    Variable assignments range over all ground terms of depth <= 1; the
    common ground instances of a and b must be exactly the instances of
    the returned unifier's application, and unify may fail only when no
    common instance exists.
    """
    universe = _depth1_universe()
    result = unify(a, b)
    common = set(_ground_instances(a, universe)) & set(_ground_instances(b, universe))
    if result is None:
        assert not common
    else:
        unified = result.apply(a)
        assert common == set(_ground_instances(unified, universe))


# --------------------------------------------------------------------------
# Belief base
# --------------------------------------------------------------------------

def test_assert_into_empty_base():
    bb = assert_belief(BeliefBase(), parse_literal("task_status(t1, adopted)"))
    assert len(bb.facts) == 1
    assert bb.revision == 1


def test_assert_is_idempotent_and_revision_stable():
    fact = parse_literal("task_status(t1, adopted)")
    bb = assert_belief(BeliefBase(), fact)
    bb2 = assert_belief(bb, fact)
    assert bb2.facts == bb.facts
    assert bb2.revision == bb.revision


def test_assert_then_retract_restores_facts():
    fact = parse_literal("task_status(t1, adopted)")
    bb = BeliefBase()
    bb2 = retract_belief(assert_belief(bb, fact), fact)
    assert bb2.facts == bb.facts
    assert bb2.revision > bb.revision  # change history is monotone


def test_negated_assertion_rejected():
    with pytest.raises(NegatedAssertion):
        assert_belief(BeliefBase(), parse_literal("not p(a)"))


def test_retract_by_pattern_uses_unification():
    base = BeliefBase.create(
        [parse_literal("task_status(t1, adopted)"), parse_literal("task_status(t2, adopted)")]
    )
    pattern = parse_literal("task_status(t1, _)")
    # oracle: exactly the facts unifying with the pattern disappear
    expected_removED = retracted_facts(base, pattern)
    remaining = retract_belief(base, pattern)
    assert expected_removED == (parse_literal("task_status(t1, adopted)"),)
    assert remaining.facts == (parse_literal("task_status(t2, adopted)"),)


def test_retract_from_empty_and_absent():
    bb = BeliefBase()
    assert retract_belief(bb, parse_literal("p(a)")) is bb
    base = BeliefBase.create([parse_literal("p(a)")])
    same = retract_belief(base, parse_literal("p(b)"))
    assert same.facts == base.facts
    assert same.revision == base.revision


# --------------------------------------------------------------------------
# Query answering
# --------------------------------------------------------------------------

INCOMPLETE_RULES = """
incomplete_task(T) :- task_status(T, adopted).
incomplete_task(T) :- task_status(T, revision).
"""


def test_incomplete_task_query_matches_ground_oracle():
    program = parse_agent_source("task_status(t1, adopted).\n" + INCOMPLETE_RULES)
    bb = BeliefBase.create(program.beliefs, program.rules)
    goal = parse_literal("incomplete_task(T)")
    answers = solutions(bb, [goal])
    assert answers == [{"T": Atom("t1")}]
    oracle = ground_query_oracle(
        program.beliefs, program.rules, [goal], [Atom("t1"), Atom("adopted"), Atom("revision")]
    )
    assert {frozenset(a.items()) for a in answers} == oracle


def test_query_over_empty_base_is_empty():
    assert solutions(BeliefBase(), [parse_literal("p(X)")]) == []


def test_negation_as_failure_with_complement_oracle():
    bb = BeliefBase.create([parse_literal("p(a)")])
    # oracle: derivable ground atoms = {p(a)}; p(b) is in the complement
    assert solutions(bb, [parse_literal("not p(b)")]) == [{}]
    assert solutions(bb, [parse_literal("not p(a)")]) == []


def test_negation_never_binds_variables():
    bb = BeliefBase.create([parse_literal("p(a)"), parse_literal("q(b)")])
    answers = list(query(bb, [parse_literal("q(X)"), parse_literal("not p(X)")]))
    assert len(answers) == 1
    assert answers[0].apply(Variable("X")) == Atom("b")


def test_flounders_on_nonground_negation():
    bb = BeliefBase.create([parse_literal("p(a)")])
    with pytest.raises(FloundedNegation):
        list(query(bb, [parse_literal("not p(X)")]))


def test_depth_bound_raises():
    program = parse_agent_source("loop(X) :- loop(X).\nloop(a) :- loop(a).")
    bb = BeliefBase.create([], program.rules)
    with pytest.raises(DepthExceeded):
        list(query(bb, [parse_literal("loop(a)")], depth_bound=64))


def test_true_goal_answers_once():
    assert solutions(BeliefBase(), [parse_literal("true")]) == [{}]


def test_answer_order_is_fact_insertion_then_rule_declaration():
    program = parse_agent_source(
        "p(first).\np(second).\nq(via_rule).\np(X) :- q(X).\n"
    )
    bb = BeliefBase.create(program.beliefs, program.rules)
    answers = [a["X"] for a in solutions(bb, [parse_literal("p(X)")])]
    assert answers == [Atom("first"), Atom("second"), Atom("via_rule")]


def test_conjunction_joins_left_to_right():
    program = parse_agent_source("current(t1).\ncurrent(t2).\nstatus(t2, ok).")
    bb = BeliefBase.create(program.beliefs, program.rules)
    answers = solutions(bb, [parse_literal("current(T)"), parse_literal("status(T, ok)")])
    assert answers == [{"T": Atom("t2")}]


def test_nonground_facts_answer_with_free_variables():
    bb = BeliefBase.create([parse_literal("current_task(_)"), parse_literal("current_task(t1)")])
    answers = solutions(bb, [parse_literal("current_task(T)")])
    assert answers[0]["T"] == Variable("T")  # wildcard fact leaves T free
    assert answers[1]["T"] == Atom("t1")


def test_rule_variables_do_not_capture_goal_variables():
    program = parse_agent_source("edge(a, b).\nlinked(X, Y) :- edge(X, Y).")
    bb = BeliefBase.create(program.beliefs, program.rules)
    answers = solutions(bb, [parse_literal("linked(X, Y)")])
    assert answers == [{"X": Atom("a"), "Y": Atom("b")}]
