"""The deliberation cycle: events, intentions, plan selection, recovery.

One cycle per agent per system step, and each cycle does at most three
things, in order: ingest percepts into belief events, process one event
(screened for norm compliance in desires, with plan candidates filtered
for compliance in plans), and execute one step of one intention chosen
round-robin (monitored for compliance in actions). That smallest-grain
schedule makes whole-system runs deterministic given the same scenario.

Plan failure is recovered by retrying untried applicable alternatives for
the same goal occurrence, re-evaluated against current beliefs; when a
subgoal runs out of alternatives its parent retries, and the root goal's
exhaustion emits a goal-failure event.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .envsim import ActionResult, Environment, UnboundRequiredArgument, UnknownAction
from .lang import (
    AddBelief,
    AgentProgram,
    AskLLM,
    Atom,
    BeliefAddition,
    Compound,
    ExternalAction,
    GoalAddition,
    InternalAction,
    Literal,
    NumberConstant,
    Plan,
    PromptExpr,
    QueryLLM,
    RemoveBelief,
    ReplaceBelief,
    SendMessage,
    SubGoal,
    Term,
    TestGoal,
    TextConstant,
    Variable,
    Wildcard,
    is_ground_term,
    render_literal,
    render_term,
)
from .logic import (
    BeliefBase,
    EMPTY_SUBSTITUTION,
    Substitution,
    assert_belief,
    first_answer,
    query,
    remove_fact,
    retract_belief,
    retracted_facts,
    unify_literals,
    _rename_literal,
)
from .norms import AgentIdentity, Norm, Violation, filter_plans, screen_goal, check_llm_output
from .oracle import OracleRefusal, OracleUnavailable, generate, query_boolean
from .tracing import Message, Trace

GOAL_ADDED = "goal-added"
GOAL_FAILED = "goal-failed"
BELIEF_ADDED = "belief-added"
BELIEF_REMOVED = "belief-removed"
MESSAGE_RECEIVED = "message-received"

ACTIVE = "active"
SUSPENDED = "suspended"
DONE = "done"
FAILED = "failed"


class StepFailure(Exception):
    """A plan step could not be carried out; triggers failure recovery."""


@dataclass(frozen=True)
class Event:
    kind: str
    content: Literal | None
    source: str = "self"  # self | percept | message
    parent_intention: int | None = None
    message: Message | None = None

    def describe(self) -> dict:
        payload: dict = {"type": self.kind, "source": self.source}
        if self.content is not None:
            payload["content"] = render_literal(self.content)
        if self.message is not None:
            payload["from"] = self.message.sender
            payload["performative"] = self.message.performative
        return payload


@dataclass
class GoalOccurrence:
    """Retry bookkeeping for one posting of a goal (or belief trigger)."""

    goal: Literal
    kind: str  # "goal" | "belief"
    attempted: set[int] = field(default_factory=set)


@dataclass
class Frame:
    plan: Plan
    subst: Substitution
    pc: int
    occurrence: GoalOccurrence


@dataclass
class Intention:
    id: int
    stack: list[Frame]
    status: str = ACTIVE

    @property
    def top(self) -> Frame:
        return self.stack[-1]


@dataclass
class AgentState:
    name: str
    program: AgentProgram
    beliefs: BeliefBase
    roles: tuple[str, ...] = ()
    events: deque = field(default_factory=deque)
    intentions: list[Intention] = field(default_factory=list)
    next_intention_id: int = 1
    last_percepts: tuple[Literal, ...] = ()
    rr_cursor: int = 0
    discharge_log: list[Literal] = field(default_factory=list)

    @property
    def identity(self) -> AgentIdentity:
        return AgentIdentity(self.name, self.roles)

    def quiescent(self) -> bool:
        return not self.events and not any(
            i.status in (ACTIVE, SUSPENDED) for i in self.intentions
        )

    def intention(self, intention_id: int) -> Intention | None:
        for intention in self.intentions:
            if intention.id == intention_id:
                return intention
        return None


@dataclass
class AgentServices:
    """Everything the interpreter touches outside the agent itself."""

    env: Environment
    oracle: object
    outbox: Callable[[Message], None]
    norms: Sequence[Norm] = ()
    trace: Trace = field(default_factory=Trace)
    cycle: int = 0
    violation_sink: Callable[[Violation], None] = lambda v: None

    def record_llm_call(self, issuer: str, kind: str, prompt: str, response) -> None:
        self.trace.emit(
            issuer,
            "llm-call",
            {"request": kind, "prompt": prompt, "response": response},
        )


def new_agent_state(name: str, program: AgentProgram, roles: Sequence[str] = ()) -> AgentState:
    """Initial state: program beliefs/rules loaded, initial goals queued."""
    beliefs = BeliefBase.create(program.beliefs, program.rules)
    state = AgentState(name=name, program=program, beliefs=beliefs, roles=tuple(roles))
    for goal in program.goals:
        state.events.append(Event(GOAL_ADDED, goal, source="self"))
    return state


# --------------------------------------------------------------------------
# Plan selection
# --------------------------------------------------------------------------

_fresh_event_vars = [0]


def _freshen(lit: Literal) -> Literal:
    """Rename the literal's variables so they cannot capture plan variables."""
    import itertools

    _fresh_event_vars[0] += 1
    return _rename_literal(lit, {}, itertools.count(_fresh_event_vars[0] * 1000))


def relevant_plans(event: Event, library: Sequence[Plan]) -> list[tuple[Plan, Substitution]]:
    """Plans whose trigger unifies with the event content, in declaration order."""
    if event.content is None:
        return []
    content = _freshen(event.content)
    out: list[tuple[Plan, Substitution]] = []
    for plan in library:
        trigger = plan.trigger
        if event.kind == GOAL_ADDED and isinstance(trigger, GoalAddition):
            pattern = trigger.goal
        elif event.kind == BELIEF_ADDED and isinstance(trigger, BeliefAddition):
            pattern = trigger.belief
        else:
            continue
        subst = unify_literals(pattern, content)
        if subst is not None:
            out.append((plan, subst))
    return out


def render_prompt(prompt: PromptExpr, subst: Substitution = EMPTY_SUBSTITUTION) -> str | None:
    """Instantiate a prompt expression; None when any part is still unbound."""
    parts: list[str] = []
    for part in prompt.parts:
        resolved = subst.apply(part)
        if not is_ground_term(resolved):
            return None
        if isinstance(resolved, TextConstant):
            parts.append(resolved.value)
        elif isinstance(resolved, Atom):
            parts.append(resolved.name)
        else:
            parts.append(render_term(resolved))
    return "".join(parts)


def applicable_plans(
    relevant: Sequence[tuple[Plan, Substitution]],
    beliefs: BeliefBase,
    oracle,
    issuer: str = "",
    services: AgentServices | None = None,
) -> list[tuple[Plan, Substitution]]:
    """Relevant plans whose context holds now, each with its first solution.

    Symbolic conjuncts are solved against the belief base; ``query_LLM``
    conjuncts are evaluated last, once the other conjuncts have grounded
    the prompt, and a refusal or an unbound prompt just fails that
    candidate solution. Raises :class:`OracleUnavailable` only when the
    oracle backend itself cannot answer.
    """
    out: list[tuple[Plan, Substitution]] = []
    for plan, trigger_subst in relevant:
        symbolic = [c for c in plan.context if isinstance(c, Literal)]
        oracle_conds = [c for c in plan.context if isinstance(c, QueryLLM)]
        chosen: Substitution | None = None
        for solution in query(beliefs, symbolic, subst=trigger_subst):
            passed = True
            for cond in oracle_conds:
                prompt = render_prompt(cond.prompt, solution)
                if prompt is None:
                    passed = False
                    break
                try:
                    answer = query_boolean(
                        oracle, prompt, issuer, services.cycle if services else 0
                    )
                except OracleRefusal:
                    if services is not None:
                        services.record_llm_call(issuer, "boolean-query", prompt, None)
                    passed = False
                    break
                if services is not None:
                    services.record_llm_call(issuer, "boolean-query", prompt, answer)
                if not answer:
                    passed = False
                    break
            if passed:
                chosen = solution
                break
        if chosen is not None:
            out.append((plan, chosen))
    return out


def select_plan(
    applicable: Sequence[tuple[Plan, Substitution]], attempted: set[int]
) -> tuple[Plan, Substitution] | None:
    """The lowest-declaration-index applicable plan not yet attempted."""
    for plan, subst in applicable:
        if plan.index not in attempted:
            return plan, subst
    return None


# --------------------------------------------------------------------------
# Step execution
# --------------------------------------------------------------------------

def _resolve_recipient(term: Term, subst: Substitution) -> str | None:
    resolved = subst.walk(term)
    if isinstance(resolved, Atom):
        return resolved.name
    if isinstance(resolved, TextConstant):
        return resolved.value
    if isinstance(resolved, Variable):
        # CamelCase agent names parse as variables; an unbound recipient
        # variable denotes the agent spelled like it.
        return resolved.name
    return None


def _stringify(term: Term) -> str:
    if isinstance(term, TextConstant):
        return term.value
    if isinstance(term, Atom):
        return term.name
    return render_term(term)


def _numeric(term: Term) -> float:
    if isinstance(term, NumberConstant):
        return term.value
    raise StepFailure(f"expected a number, got {render_term(term)}")


def add_belief(state: AgentState, lit: Literal, services: AgentServices, source: str = "self") -> None:
    """Assert a fact, queueing a belief event and trace entry on change."""
    before = state.beliefs.revision
    state.beliefs = assert_belief(state.beliefs, lit)
    if state.beliefs.revision != before:
        state.events.append(Event(BELIEF_ADDED, lit, source=source))
        services.trace.emit(
            state.name, "belief-change", {"op": "add", "belief": render_literal(lit)}
        )


def remove_beliefs_matching(state: AgentState, pattern: Literal, services: AgentServices, source: str = "self") -> None:
    removed = retracted_facts(state.beliefs, pattern)
    state.beliefs = retract_belief(state.beliefs, pattern)
    for fact in removed:
        state.events.append(Event(BELIEF_REMOVED, fact, source=source))
        services.trace.emit(
            state.name, "belief-change", {"op": "remove", "belief": render_literal(fact)}
        )


def execute_step(state: AgentState, intention_id: int, services: AgentServices) -> AgentState:
    """Consume exactly one plan step of the given intention.

    Failures mark the top frame failed and route to :func:`handle_failure`.
    """
    intention = state.intention(intention_id)
    if intention is None or intention.status != ACTIVE or not intention.stack:
        return state
    frame = intention.top
    step = frame.plan.body[frame.pc]
    try:
        advanced = _run_step(state, intention, frame, step, services)
    except StepFailure as failure:
        services.trace.emit(
            state.name,
            "step",
            {"status": "failed", "step": _step_repr(step, frame.subst), "reason": str(failure)},
        )
        handle_failure(state, intention_id, services)
        return state
    if advanced:
        frame.pc += 1
        _pop_completed_frames(state, intention, services)
    return state


def _step_repr(step, subst: Substitution) -> str:
    from .lang import render_step

    return render_step(_resolve_step(step, subst))


def _resolve_step(step, subst: Substitution):
    """The step with the frame's bindings applied, for trace readability."""
    if isinstance(step, ExternalAction):
        return ExternalAction(subst.apply_literal(step.action))
    if isinstance(step, InternalAction):
        return InternalAction(step.name, tuple(subst.apply(a) for a in step.args))
    if isinstance(step, AddBelief):
        return AddBelief(subst.apply_literal(step.belief))
    if isinstance(step, RemoveBelief):
        return RemoveBelief(subst.apply_literal(step.belief))
    if isinstance(step, ReplaceBelief):
        return ReplaceBelief(subst.apply_literal(step.belief))
    if isinstance(step, SubGoal):
        return SubGoal(subst.apply_literal(step.goal))
    if isinstance(step, TestGoal):
        return TestGoal(subst.apply_literal(step.goal))
    if isinstance(step, SendMessage):
        return SendMessage(subst.apply(step.recipient), step.performative, subst.apply_literal(step.content))
    if isinstance(step, QueryLLM):
        return QueryLLM(PromptExpr(tuple(subst.apply(p) for p in step.prompt.parts)))
    if isinstance(step, AskLLM):
        resolved = subst.walk(step.result)
        result = resolved if isinstance(resolved, Variable) else step.result
        return AskLLM(PromptExpr(tuple(subst.apply(p) for p in step.prompt.parts)), result)
    return step


def _run_step(state, intention, frame, step, services: AgentServices) -> bool:
    """Returns True when the program counter should advance now."""
    subst = frame.subst

    if isinstance(step, ExternalAction):
        action = subst.apply_literal(step.action)
        try:
            result = services.env.perform(state.name, action)
        except (UnknownAction, UnboundRequiredArgument) as exc:
            raise StepFailure(str(exc)) from exc
        if not result.success:
            raise StepFailure(f"action {render_literal(action)} refused by environment")
        merged = subst
        for name, term in result.bindings.items():
            extended = merged.bind(name, term)
            if extended is None:
                raise StepFailure(f"binding {name} from action result failed occurs-check")
            merged = extended
        frame.subst = merged
        executed = merged.apply_literal(action)
        state.discharge_log.append(executed)
        services.trace.emit(
            state.name,
            "step",
            {
                "status": "ok",
                "step": render_literal(executed),
                "effects": [render_literal(e) for e in result.effects],
            },
        )
        from .norms import monitor_action

        for violation in monitor_action(
            executed, result.effects, state.identity, services.norms, state.beliefs, services.cycle
        ):
            services.violation_sink(violation)
        return True

    if isinstance(step, InternalAction):
        _run_internal(frame, step, state, services)
        services.trace.emit(
            state.name, "step", {"status": "ok", "step": _step_repr(step, frame.subst)}
        )
        return True

    if isinstance(step, AddBelief):
        lit = subst.apply_literal(step.belief)
        services.trace.emit(state.name, "step", {"status": "ok", "step": f"+{render_literal(lit)}"})
        add_belief(state, lit, services)
        return True

    if isinstance(step, RemoveBelief):
        lit = subst.apply_literal(step.belief)
        services.trace.emit(state.name, "step", {"status": "ok", "step": f"-{render_literal(lit)}"})
        remove_beliefs_matching(state, lit, services)
        return True

    if isinstance(step, ReplaceBelief):
        lit = subst.apply_literal(step.belief)
        services.trace.emit(state.name, "step", {"status": "ok", "step": f"-+{render_literal(lit)}"})
        remove_beliefs_matching(state, lit, services)
        add_belief(state, lit, services)
        return True

    if isinstance(step, SubGoal):
        goal = subst.apply_literal(step.goal)
        state.events.append(Event(GOAL_ADDED, goal, source="self", parent_intention=intention.id))
        intention.status = SUSPENDED
        services.trace.emit(
            state.name, "step", {"status": "posted", "step": f"!{render_literal(goal)}"}
        )
        return False  # pc advances when the subgoal's frame completes

    if isinstance(step, TestGoal):
        goal = step.goal
        answer = first_answer(state.beliefs, (goal,), subst=subst)
        if answer is None:
            raise StepFailure(f"test goal ?{render_literal(subst.apply_literal(goal))} has no answer")
        frame.subst = answer
        services.trace.emit(
            state.name,
            "step",
            {"status": "ok", "step": f"?{render_literal(answer.apply_literal(goal))}"},
        )
        return True

    if isinstance(step, SendMessage):
        receiver = _resolve_recipient(step.recipient, subst)
        if receiver is None:
            raise StepFailure("message recipient did not resolve to an agent name")
        content = subst.apply_literal(step.content)
        message = Message(state.name, receiver, step.performative, content, services.cycle)
        services.outbox(message)
        services.trace.emit(
            state.name,
            "message",
            {
                "to": receiver,
                "performative": step.performative,
                "content": render_literal(content),
            },
        )
        return True

    if isinstance(step, QueryLLM):
        prompt = render_prompt(step.prompt, subst)
        if prompt is None:
            raise StepFailure("query_LLM prompt is not ground")
        try:
            answer = query_boolean(services.oracle, prompt, state.name, services.cycle)
        except OracleRefusal as exc:
            services.record_llm_call(state.name, "boolean-query", prompt, None)
            raise StepFailure(f"oracle refused: {exc}") from exc
        services.record_llm_call(state.name, "boolean-query", prompt, answer)
        if not answer:
            raise StepFailure(f"oracle answered no to {prompt!r}")
        services.trace.emit(
            state.name, "step", {"status": "ok", "step": _step_repr(step, subst)}
        )
        return True

    if isinstance(step, AskLLM):
        prompt = render_prompt(step.prompt, subst)
        if prompt is None:
            raise StepFailure("ask_LLM prompt is not ground")
        if not isinstance(subst.walk(step.result), Variable):
            raise StepFailure(f"ask_LLM result variable {step.result.name} is already bound")
        try:
            output = generate(services.oracle, prompt, state.name, services.cycle)
        except OracleRefusal as exc:
            services.record_llm_call(state.name, "generate", prompt, None)
            raise StepFailure(f"oracle refused: {exc}") from exc
        services.record_llm_call(state.name, "generate", prompt, output)
        flagged = check_llm_output(
            output, services.norms, state.identity, state.beliefs, services.cycle
        )
        if flagged:
            for violation in flagged:
                services.violation_sink(violation)
            raise StepFailure("generated output flagged by norm compliance check")
        bound = subst.bind(subst.walk(step.result).name, TextConstant(output))
        if bound is None:
            raise StepFailure("binding ask_LLM result failed occurs-check")
        frame.subst = bound
        services.trace.emit(
            state.name,
            "step",
            {"status": "ok", "step": f"ask_LLM({prompt!r}, {step.result.name})"},
        )
        return True

    raise StepFailure(f"unsupported plan step {step!r}")


def _run_internal(frame: Frame, step: InternalAction, state: AgentState, services: AgentServices) -> None:
    subst = frame.subst
    args = tuple(subst.apply(a) for a in step.args)
    name = step.name
    if name == "concat":
        if len(args) < 2:
            raise StepFailure(".concat needs at least one input and an output")
        *inputs, out = args
        if not all(is_ground_term(t) for t in inputs):
            raise StepFailure(".concat inputs must be ground")
        if not isinstance(out, Variable):
            raise StepFailure(".concat output must be an unbound variable")
        text = "".join(_stringify(t) for t in inputs)
        bound = subst.bind(out.name, TextConstant(text))
        if bound is None:
            raise StepFailure(".concat output failed occurs-check")
        frame.subst = bound
        return
    if name in ("eq", "neq"):
        if len(args) != 2:
            raise StepFailure(f".{name} takes two arguments")
        from .logic import unify

        unified = unify(args[0], args[1], subst)
        if name == "eq":
            if unified is None:
                raise StepFailure(".eq arguments do not unify")
            frame.subst = unified
        else:
            if unified is not None:
                raise StepFailure(".neq arguments unify")
        return
    if name in ("lt", "leq", "gt", "geq"):
        if len(args) != 2:
            raise StepFailure(f".{name} takes two arguments")
        a, b = _numeric(args[0]), _numeric(args[1])
        ok = {"lt": a < b, "leq": a <= b, "gt": a > b, "geq": a >= b}[name]
        if not ok:
            raise StepFailure(f".{name}({a}, {b}) is false")
        return
    raise StepFailure(f"unknown internal action .{name}")


def _pop_completed_frames(state: AgentState, intention: Intention, services: AgentServices) -> None:
    while intention.stack and intention.top.pc >= len(intention.top.plan.body):
        finished = intention.stack.pop()
        if not intention.stack:
            intention.status = DONE
            if finished.occurrence.kind == "goal":
                services.trace.emit(
                    state.name,
                    "event",
                    {"type": "goal-completed", "content": render_literal(finished.occurrence.goal)},
                )
        else:
            intention.top.pc += 1  # the parent's subgoal step is now complete


# --------------------------------------------------------------------------
# Failure recovery
# --------------------------------------------------------------------------

def handle_failure(state: AgentState, intention_id: int, services: AgentServices) -> AgentState:
    """Retry the top goal with untried alternatives, else cascade upward."""
    intention = state.intention(intention_id)
    if intention is None:
        return state
    while intention.stack:
        frame = intention.top
        occurrence = frame.occurrence
        event_kind = GOAL_ADDED if occurrence.kind == "goal" else BELIEF_ADDED
        candidates = relevant_plans(
            Event(event_kind, occurrence.goal), state.program.plans
        )
        try:
            candidates = applicable_plans(
                candidates, state.beliefs, services.oracle, state.name, services
            )
        except OracleUnavailable as exc:
            services.trace.emit(
                state.name, "event", {"type": "oracle-unavailable", "detail": str(exc)}
            )
            candidates = []
        candidates = filter_plans(candidates, state.identity, services.norms, state.beliefs)
        choice = select_plan(candidates, occurrence.attempted)
        if choice is not None:
            plan, subst = choice
            occurrence.attempted.add(plan.index)
            intention.stack[-1] = Frame(plan, subst, 0, occurrence)
            intention.status = ACTIVE
            services.trace.emit(
                state.name,
                "plan-selected",
                {
                    "plan": plan.index,
                    "trigger": render_literal(occurrence.goal),
                    "retry": True,
                },
            )
            return state
        intention.stack.pop()
        if not intention.stack:
            intention.status = FAILED
            if occurrence.kind == "goal":
                state.events.append(Event(GOAL_FAILED, occurrence.goal, source="self"))
            return state
        # the parent's subgoal step failed; loop tries the parent's alternatives
    intention.status = FAILED
    return state


# --------------------------------------------------------------------------
# The cycle
# --------------------------------------------------------------------------

def ingest_percepts(state: AgentState, services: AgentServices) -> None:
    """Diff the current percept set into belief updates and events."""
    current = services.env.percepts(state.name, state.roles)
    previous = state.last_percepts
    current_set = set(current)
    previous_set = set(previous)
    for lit in previous:
        if lit not in current_set:
            state.beliefs = remove_fact(state.beliefs, lit)
            state.events.append(Event(BELIEF_REMOVED, lit, source="percept"))
            services.trace.emit(state.name, "percept", {"op": "remove", "belief": render_literal(lit)})
    for lit in current:
        if lit not in previous_set:
            state.beliefs = assert_belief(state.beliefs, lit)
            state.events.append(Event(BELIEF_ADDED, lit, source="percept"))
            services.trace.emit(state.name, "percept", {"op": "add", "belief": render_literal(lit)})
    state.last_percepts = tuple(current)


def _process_event(state: AgentState, event: Event, services: AgentServices) -> None:
    services.trace.emit(state.name, "event", event.describe())

    if event.kind == GOAL_FAILED or event.kind == BELIEF_REMOVED:
        return  # traced; nothing triggers on these in this dialect

    if event.kind == MESSAGE_RECEIVED:
        _answer_ask(state, event.message, services)
        return

    if event.kind == GOAL_ADDED:
        violations = screen_goal(
            event.content,
            state.identity,
            services.norms,
            state.beliefs,
            state.program.plans,
            services.cycle,
        )
        if violations:
            for violation in violations:
                services.violation_sink(violation)
            if event.parent_intention is not None:
                parent = state.intention(event.parent_intention)
                if parent is not None:
                    handle_failure(state, parent.id, services)
            return

    candidates = relevant_plans(event, state.program.plans)
    try:
        candidates = applicable_plans(
            candidates, state.beliefs, services.oracle, state.name, services
        )
    except OracleUnavailable as exc:
        services.trace.emit(state.name, "event", {"type": "oracle-unavailable", "detail": str(exc)})
        candidates = []
    candidates = filter_plans(candidates, state.identity, services.norms, state.beliefs)

    occurrence = GoalOccurrence(
        event.content, "goal" if event.kind == GOAL_ADDED else "belief"
    )
    choice = select_plan(candidates, occurrence.attempted)
    if choice is None:
        if event.kind == GOAL_ADDED:
            if event.parent_intention is not None:
                parent = state.intention(event.parent_intention)
                if parent is not None:
                    handle_failure(state, parent.id, services)
            else:
                state.events.append(Event(GOAL_FAILED, event.content, source="self"))
        return

    plan, subst = choice
    occurrence.attempted.add(plan.index)
    frame = Frame(plan, subst, 0, occurrence)
    if event.kind == GOAL_ADDED:
        state.discharge_log.append(event.content)
    if event.parent_intention is not None:
        parent = state.intention(event.parent_intention)
        if parent is not None:
            parent.stack.append(frame)
            parent.status = ACTIVE
        intention_id = event.parent_intention
    else:
        intention = Intention(state.next_intention_id, [frame])
        state.next_intention_id += 1
        state.intentions.append(intention)
        intention_id = intention.id
    services.trace.emit(
        state.name,
        "plan-selected",
        {"plan": plan.index, "trigger": render_literal(event.content), "intention": intention_id},
    )


def _answer_ask(state: AgentState, message: Message, services: AgentServices) -> None:
    """Reply to an ask with the first answer, or a reserved unknown literal."""
    answer = first_answer(state.beliefs, (message.content,))
    if answer is not None:
        content = answer.apply_literal(message.content)
    else:
        content = Literal("unknown", (Compound(message.content.predicate, message.content.args)
                                      if message.content.args else Atom(message.content.predicate),))
    reply = Message(state.name, message.sender, "tell", content, services.cycle)
    services.outbox(reply)
    services.trace.emit(
        state.name,
        "message",
        {"to": message.sender, "performative": "tell", "content": render_literal(content)},
    )


def _select_intention(state: AgentState) -> Intention | None:
    """Round-robin over active intentions by id."""
    active = [i for i in state.intentions if i.status == ACTIVE]
    if not active:
        return None
    for intention in active:
        if intention.id > state.rr_cursor:
            return intention
    return active[0]


def deliberation_cycle(state: AgentState, services: AgentServices) -> AgentState:
    """One agent cycle: percepts, one event, one intention step."""
    ingest_percepts(state, services)

    if state.events:
        _process_event(state, state.events.popleft(), services)

    intention = _select_intention(state)
    if intention is not None:
        state.rr_cursor = intention.id
        execute_step(state, intention.id, services)

    state.intentions = [i for i in state.intentions if i.status in (ACTIVE, SUSPENDED)]
    return state
