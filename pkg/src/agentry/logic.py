"""Terms-level reasoning: substitutions, unification, beliefs, queries.

The belief base is an immutable value: assert/retract return new bases and
bump a revision counter only on actual change. Query answering is SLD
resolution over facts (insertion order) and rules (declaration order) with
negation-as-failure, an occurs-check, and a configurable depth bound, so
answer order is deterministic and full-system traces are reproducible.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Sequence

from .lang import (
    Atom,
    Compound,
    Literal,
    Rule,
    Term,
    Variable,
    Wildcard,
    is_ground,
    render_literal,
    render_term,
)

DEFAULT_DEPTH_BOUND = 512


class DepthExceeded(Exception):
    """SLD depth went past the bound; the rule set is likely non-terminating."""


class FloundedNegation(Exception):
    """A negated literal still contained variables when it was evaluated."""


class NegatedAssertion(Exception):
    """Attempted to store a negated literal as a belief."""


class Substitution(Mapping[str, Term]):
    """An immutable variable binding map with occurs-check on extension.

    Bindings are triangular (a bound term may mention other bound
    variables); :meth:`apply` resolves chains fully, which makes the
    mapping idempotent as a function on terms.
    """

    __slots__ = ("_bindings",)

    def __init__(self, bindings: dict[str, Term] | None = None):
        self._bindings: dict[str, Term] = bindings or {}

    # Mapping protocol -------------------------------------------------------

    def __getitem__(self, name: str) -> Term:
        return self._bindings[name]

    def __iter__(self):
        return iter(self._bindings)

    def __len__(self) -> int:
        return len(self._bindings)

    def __repr__(self) -> str:
        inner = ", ".join(f"{k} -> {render_term(v)}" for k, v in self._bindings.items())
        return f"{{{inner}}}"

    # Core operations --------------------------------------------------------

    def walk(self, term: Term) -> Term:
        """Follow variable bindings until an unbound variable or non-variable."""
        while isinstance(term, Variable):
            bound = self._bindings.get(term.name)
            if bound is None:
                return term
            term = bound
        return term

    def apply(self, term: Term) -> Term:
        """Resolve a term fully under this substitution."""
        term = self.walk(term)
        if isinstance(term, Compound):
            return Compound(term.functor, tuple(self.apply(a) for a in term.args))
        return term

    def apply_literal(self, lit: Literal) -> Literal:
        return Literal(lit.predicate, tuple(self.apply(a) for a in lit.args), lit.negated)

    def bind(self, name: str, term: Term) -> "Substitution | None":
        """Extend with ``name -> term``; None if the occurs-check fails."""
        if self._occurs(name, term):
            return None
        new = dict(self._bindings)
        new[name] = term
        return Substitution(new)

    def _occurs(self, name: str, term: Term) -> bool:
        term = self.walk(term)
        if isinstance(term, Variable):
            return term.name == name
        if isinstance(term, Compound):
            return any(self._occurs(name, a) for a in term.args)
        return False


EMPTY_SUBSTITUTION = Substitution()


def unify(a: Term, b: Term, subst: Substitution = EMPTY_SUBSTITUTION) -> Substitution | None:
    """Most general unifier of a and b relative to ``subst``, or None.

    The wildcard ``_`` unifies with anything and never produces a binding,
    including when matched against a variable (the variable stays free).
    """
    a = subst.walk(a)
    b = subst.walk(b)
    if isinstance(a, Wildcard) or isinstance(b, Wildcard):
        return subst
    if isinstance(a, Variable):
        if isinstance(b, Variable) and a.name == b.name:
            return subst
        return subst.bind(a.name, b)
    if isinstance(b, Variable):
        return subst.bind(b.name, a)
    if isinstance(a, Atom) and isinstance(b, Atom):
        return subst if a.name == b.name else None
    if type(a) is not type(b):
        return None
    if isinstance(a, Compound):
        assert isinstance(b, Compound)
        if a.functor != b.functor or len(a.args) != len(b.args):
            return None
        out: Substitution | None = subst
        for x, y in zip(a.args, b.args):
            out = unify(x, y, out)
            if out is None:
                return None
        return out
    # Text or number constants.
    return subst if a == b else None


def unify_literals(a: Literal, b: Literal, subst: Substitution = EMPTY_SUBSTITUTION) -> Substitution | None:
    if a.predicate != b.predicate or a.arity != b.arity or a.negated != b.negated:
        return None
    out: Substitution | None = subst
    for x, y in zip(a.args, b.args):
        out = unify(x, y, out)
        if out is None:
            return None
    return out


def _rename_term(term: Term, mapping: dict[str, Variable], fresh: "itertools.count[int]") -> Term:
    if isinstance(term, Variable):
        renamed = mapping.get(term.name)
        if renamed is None:
            renamed = Variable(f"_R{next(fresh)}_{term.name.lstrip('_')}")
            mapping[term.name] = renamed
        return renamed
    if isinstance(term, Compound):
        return Compound(term.functor, tuple(_rename_term(a, mapping, fresh) for a in term.args))
    return term


def _rename_literal(lit: Literal, mapping: dict[str, Variable], fresh) -> Literal:
    return Literal(lit.predicate, tuple(_rename_term(a, mapping, fresh) for a in lit.args), lit.negated)


# --------------------------------------------------------------------------
# Belief base
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class BeliefBase:
    """Facts (set semantics, insertion-ordered) plus rules plus a revision."""

    facts: tuple[Literal, ...] = ()
    rules: tuple[Rule, ...] = ()
    revision: int = 0
    _fact_set: frozenset[Literal] = field(default=frozenset(), repr=False, compare=False)

    @staticmethod
    def create(facts: Sequence[Literal] = (), rules: Sequence[Rule] = ()) -> "BeliefBase":
        base = BeliefBase((), tuple(rules), 0, frozenset())
        for fact in facts:
            base = assert_belief(base, fact)
        return base

    def contains(self, fact: Literal) -> bool:
        return fact in self._fact_set

    def with_rules(self, rules: Sequence[Rule]) -> "BeliefBase":
        return BeliefBase(self.facts, tuple(rules), self.revision + 1, self._fact_set)


def assert_belief(bb: BeliefBase, lit: Literal) -> BeliefBase:
    """Add a positive fact; revision changes only if the fact was absent."""
    if lit.negated:
        raise NegatedAssertion(f"cannot assert negated literal {render_literal(lit)}")
    if bb.contains(lit):
        return bb
    return BeliefBase(bb.facts + (lit,), bb.rules, bb.revision + 1, bb._fact_set | {lit})


def retract_belief(bb: BeliefBase, pattern: Literal) -> BeliefBase:
    """Remove every fact unifying with ``pattern`` (no-op removal is legal)."""
    pattern = pattern.positive()
    kept = tuple(f for f in bb.facts if unify_literals(pattern, f) is None)
    if len(kept) == len(bb.facts):
        return bb
    return BeliefBase(kept, bb.rules, bb.revision + 1, frozenset(kept))


def retracted_facts(bb: BeliefBase, pattern: Literal) -> tuple[Literal, ...]:
    """The facts that :func:`retract_belief` would remove, in stored order."""
    pattern = pattern.positive()
    return tuple(f for f in bb.facts if unify_literals(pattern, f) is not None)


def remove_fact(bb: BeliefBase, lit: Literal) -> BeliefBase:
    """Remove exactly ``lit`` (structural equality), used for percept diffs."""
    if not bb.contains(lit):
        return bb
    kept = tuple(f for f in bb.facts if f != lit)
    return BeliefBase(kept, bb.rules, bb.revision + 1, frozenset(kept))


# --------------------------------------------------------------------------
# Query answering
# --------------------------------------------------------------------------

def query(
    bb: BeliefBase,
    goals: Sequence[Literal],
    subst: Substitution = EMPTY_SUBSTITUTION,
    depth_bound: int = DEFAULT_DEPTH_BOUND,
) -> Iterator[Substitution]:
    """Answers to a conjunctive goal, lazily, in deterministic order.

    Facts are tried in insertion order before rules in declaration order;
    conjunctions resolve left to right. ``not l`` succeeds without new
    bindings when l (which must be ground at that point, else
    :class:`FloundedNegation`) has no answers. Raises :class:`DepthExceeded`
    when rule chaining exceeds ``depth_bound``.
    """
    fresh = itertools.count()

    def solve(goals: tuple[Literal, ...], s: Substitution, depth: int) -> Iterator[Substitution]:
        if depth > depth_bound:
            raise DepthExceeded(f"query depth exceeded {depth_bound}")
        if not goals:
            yield s
            return
        goal, rest = goals[0], goals[1:]
        if goal.negated:
            positive = s.apply_literal(goal.positive())
            if not is_ground(positive):
                raise FloundedNegation(
                    f"negated literal {render_literal(positive)} is not ground"
                )
            for _ in solve((positive,), s, depth + 1):
                return  # derivable: negation fails
            yield from solve(rest, s, depth)
            return
        if goal.predicate == "true" and not goal.args:
            yield from solve(rest, s, depth)
            return
        for fact in bb.facts:
            if fact.predicate != goal.predicate or fact.arity != goal.arity:
                continue
            renamed = _rename_literal(fact, {}, fresh)
            s2 = unify_literals(goal, renamed, s)
            if s2 is not None:
                yield from solve(rest, s2, depth)
        for rule in bb.rules:
            if rule.head.predicate != goal.predicate or rule.head.arity != goal.arity:
                continue
            mapping: dict[str, Variable] = {}
            head = _rename_literal(rule.head, mapping, fresh)
            s2 = unify_literals(goal, head, s)
            if s2 is None:
                continue
            body = tuple(_rename_literal(l, mapping, fresh) for l in rule.body)
            yield from solve(body + rest, s2, depth + 1)

    return solve(tuple(goals), subst, 0)


def solutions(
    bb: BeliefBase,
    goals: Sequence[Literal],
    depth_bound: int = DEFAULT_DEPTH_BOUND,
) -> list[dict[str, Term]]:
    """Eager answers projected onto the goal's own variables."""
    from .lang import literal_variables

    names: set[str] = set()
    for g in goals:
        names |= literal_variables(g)
    out = []
    for s in query(bb, goals, depth_bound=depth_bound):
        out.append({n: s.apply(Variable(n)) for n in sorted(names)})
    return out


def derivable(bb: BeliefBase, goals: Sequence[Literal], depth_bound: int = DEFAULT_DEPTH_BOUND) -> bool:
    for _ in query(bb, goals, depth_bound=depth_bound):
        return True
    return False


def first_answer(
    bb: BeliefBase,
    goals: Sequence[Literal],
    subst: Substitution = EMPTY_SUBSTITUTION,
    depth_bound: int = DEFAULT_DEPTH_BOUND,
) -> Substitution | None:
    for s in query(bb, goals, subst, depth_bound):
        return s
    return None
