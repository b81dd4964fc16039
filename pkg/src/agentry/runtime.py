"""Multi-agent system container: registry, message bus, global scheduler.

One system step delivers last cycle's messages, runs every agent's
deliberation cycle in registration order, sweeps the commitment store,
and remediates pending violations — all under a single logical thread of
control, so a whole run is a pure function of the scenario bundle. The
trace records every observable effect with a stable within-cycle order.

Messages are delivered exactly once, FIFO per (sender, receiver) pair, at
the start of the receiver's next cycle: ``achieve`` becomes a goal event,
``tell`` asserts a belief, and ``ask`` obliges a ``tell`` reply with the
first answer (or a reserved ``unknown(...)`` literal).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .commitments import (
    ACTIVE as C_ACTIVE,
    DETACHED as C_DETACHED,
    VIOLATED as C_VIOLATED,
    CommitmentStore,
    Escalation,
    advance_lifecycle,
    create_commitment,
    handle_violation,
    install_protocol,
)
from .envsim import Environment
from .interpreter import (
    AgentServices,
    AgentState,
    BELIEF_ADDED,
    Event,
    GOAL_ADDED,
    MESSAGE_RECEIVED,
    deliberation_cycle,
    new_agent_state,
)
from .lang import AgentProgram, Atom, Literal, TRUE, TextConstant, render_literal
from .logic import derivable
from .norms import (
    ACTION,
    DESIRE,
    LLM_OUTPUT,
    Norm,
    ObligationTracker,
    UnknownRole,
    Violation,
    trigger_remedy,
)
from .oracle import ScriptedOracle
from .scenario import ScenarioSpec
from .tracing import Message, Trace


class DuplicateName(Exception):
    """An agent with this name is already registered."""


OCCURRED_STAGES = (ACTION, LLM_OUTPUT)


@dataclass
class RunSummary:
    cycles: int = 0
    goals_completed: int = 0
    goals_failed: int = 0
    violations: int = 0  # occurred (action / llm-output / obligation)
    preventions: int = 0  # desire-stage rejections
    remedied: int = 0
    commitment_states: dict = field(default_factory=dict)
    success: bool = True
    failures: list[str] = field(default_factory=list)

    @property
    def unremedied(self) -> int:
        return max(self.violations - self.remedied, 0)


class System:
    """The running multi-agent system; sole owner of all mutable state."""

    def __init__(
        self,
        env: Environment,
        oracle=None,
        norms: tuple[Norm, ...] = (),
        cycles_per_hour: int = 1,
        obligation_window: int = 50,
    ):
        self.env = env
        self.oracle = oracle if oracle is not None else ScriptedOracle()
        self.norms = norms
        self.cycles_per_hour = cycles_per_hour
        self.agents: dict[str, AgentState] = {}
        self.store = CommitmentStore()
        self.secondary_policy: dict = {}
        self.vocabulary: dict = {}
        self.trace = Trace()
        self.cycle = 0
        self.in_flight: list[Message] = []
        self.outbox: list[Message] = []
        self.pending_violations: list[Violation] = []
        self.fired_remedies: set[Violation] = set()
        self.remedied_violations: set[Violation] = set()
        self.obligations = ObligationTracker(default_window=obligation_window)

    # -- registration --------------------------------------------------------

    def register_agent(self, name: str, roles: list[str], program: AgentProgram) -> None:
        """Add an agent with an empty mailbox and its initial goals queued."""
        if name in self.agents:
            raise DuplicateName(name)
        self.agents[name] = new_agent_state(name, program, roles)

    def agent_for_role(self, role: str) -> AgentState | None:
        for state in self.agents.values():
            if role in state.roles or state.name == role:
                return state
        return None

    def reload_norms(self, norms: tuple[Norm, ...]) -> None:
        """Swap the norm set at a cycle boundary (never mid-cycle)."""
        self.norms = norms

    # -- commitments -----------------------------------------------------------

    def adopt_commitment(self, debtor, creditor, antecedent, consequent, deadline=None, derived_from=None):
        commitment = create_commitment(
            self.store, debtor, creditor, antecedent, consequent, deadline, self.cycle, derived_from
        )
        self._trace_commitment(commitment.id, "null", "active")
        if commitment.antecedent == TRUE:
            # unconditional commitments detach the cycle they are created
            self.store.transition(commitment.id, C_DETACHED, self.cycle)
            commitment.bound_consequent = commitment.consequent
            self._trace_commitment(commitment.id, "active", "detached")
        return commitment

    def _trace_commitment(self, cid: str, from_state: str, to_state: str) -> None:
        commitment = self.store.get(cid)
        self.trace.emit(
            "system",
            "commitment-transition",
            {
                "commitment": cid,
                "from": from_state,
                "to": to_state,
                "debtor": commitment.debtor,
                "creditor": commitment.creditor,
            },
        )

    # -- violations --------------------------------------------------------------

    def _sink_violation(self, violation: Violation) -> None:
        self.pending_violations.append(violation)
        self.trace.emit(
            violation.violator,
            "norm-violation",
            {
                "norm": violation.norm_id,
                "stage": violation.stage,
                "instance": render_literal(violation.instance),
            },
        )

    # -- messaging ----------------------------------------------------------------

    def send(self, message: Message) -> None:
        self.outbox.append(message)

    def inject_message(self, sender: str, receiver: str, performative: str, content: Literal) -> None:
        """Queue a message on behalf of a human proxy agent."""
        message = Message(sender, receiver, performative, content, self.cycle)
        self.trace.emit(
            sender,
            "message",
            {"to": receiver, "performative": performative, "content": render_literal(content)},
        )
        self.outbox.append(message)

    def _deliver(self, message: Message) -> None:
        receiver = self.agents.get(message.receiver)
        if receiver is None:
            self.trace.emit(
                "system",
                "event",
                {"type": "undeliverable", "to": message.receiver, "from": message.sender},
            )
            return
        if message.performative == "achieve":
            receiver.events.append(Event(GOAL_ADDED, message.content, source="message"))
        elif message.performative == "tell":
            from .interpreter import add_belief

            services = self._services_for(receiver)
            add_belief(receiver, message.content, services, source="message")
        elif message.performative == "ask":
            receiver.events.append(
                Event(MESSAGE_RECEIVED, message.content, source="message", message=message)
            )

    # -- the global cycle -------------------------------------------------------------

    def _services_for(self, state: AgentState) -> AgentServices:
        return AgentServices(
            env=self.env,
            oracle=self.oracle,
            outbox=self.send,
            norms=self.norms,
            trace=self.trace,
            cycle=self.cycle,
            violation_sink=self._sink_violation,
        )

    def step_system(self) -> None:
        """One global cycle; component errors become trace entries."""
        self.cycle += 1
        self.trace.advance_cycle(self.cycle)

        for message in self.in_flight:
            self._deliver(message)
        self.in_flight = []

        for state in self.agents.values():
            deliberation_cycle(state, self._services_for(state))

        for state in self.agents.values():
            for violation in self.obligations.sweep(
                state.identity, self.norms, state.beliefs, state.discharge_log, self.cycle
            ):
                self._sink_violation(violation)

        beliefs_by_agent = {name: state.beliefs for name, state in self.agents.items()}
        changes = advance_lifecycle(self.store, beliefs_by_agent, self.cycle)
        for cid, from_state, to_state in changes:
            self._trace_commitment(cid, from_state, to_state)
            if to_state == C_VIOLATED:
                self._remediate_commitment(cid)

        self._remediate_norm_violations()

        self.in_flight = self.outbox
        self.outbox = []

    def _remediate_commitment(self, cid: str) -> None:
        commitment = self.store.get(cid)
        outcome = handle_violation(commitment, self.secondary_policy, self.store, self.cycle)
        if isinstance(outcome, Escalation):
            human = self.agent_for_role(outcome.role)
            if human is None:
                self.trace.emit(
                    "system", "event", {"type": "unknown-role", "role": outcome.role}
                )
                return
            content = Literal(
                "escalation", (Atom(cid), TextConstant(commitment.describe()))
            )
            self.outbox.append(Message(commitment.creditor, human.name, "tell", content, self.cycle))
            self.trace.emit(
                "system", "remedy", {"commitment": cid, "action": f"escalated to {human.name}"}
            )
        else:
            self._trace_commitment(outcome.id, "null", "active")
            if outcome.antecedent == TRUE:
                self.store.transition(outcome.id, C_DETACHED, self.cycle)
                outcome.bound_consequent = outcome.consequent
                self._trace_commitment(outcome.id, "active", "detached")
            self.trace.emit(
                "system",
                "remedy",
                {"commitment": cid, "action": f"secondary commitment {outcome.id} created"},
            )

    def _remediate_norm_violations(self) -> None:
        pending, self.pending_violations = self.pending_violations, []
        handle = _RemedyHandle(self)
        for violation in pending:
            try:
                enacted = trigger_remedy(violation, self.norms, handle, self.fired_remedies)
            except UnknownRole as exc:
                self.trace.emit(
                    "system", "event", {"type": "unknown-role", "role": str(exc)}
                )
                continue
            for description in enacted:
                self.remedied_violations.add(violation)
                self.trace.emit(
                    violation.violator,
                    "remedy",
                    {"norm": violation.norm_id, "action": description},
                )

    # -- run loop --------------------------------------------------------------------

    def quiescent(self) -> bool:
        return (
            all(state.quiescent() for state in self.agents.values())
            and not self.in_flight
            and not self.outbox
            and not self.pending_violations
            and not self.store.pending_deadlines()
            and not self.obligations.pending()
        )

    def run(self, max_cycles: int) -> None:
        while self.cycle < max_cycles:
            self.step_system()
            if self.quiescent():
                break

    # -- reporting --------------------------------------------------------------------

    def summary(self, success_conditions=()) -> RunSummary:
        summary = RunSummary(cycles=self.cycle)
        summary.goals_completed = self.trace.count("event", type="goal-completed")
        summary.goals_failed = self.trace.count("event", type="goal-failed")
        for entry in self.trace.find("norm-violation"):
            if entry.payload.get("stage") == DESIRE:
                summary.preventions += 1
            else:
                summary.violations += 1
        summary.remedied = len(self.remedied_violations)
        for commitment in self.store.commitments.values():
            summary.commitment_states[commitment.id] = commitment.state
            if commitment.state == C_VIOLATED and commitment.id not in self.store.remediated:
                summary.success = False
                summary.failures.append(f"violated commitment {commitment.id} was never remediated")
        for condition in success_conditions:
            agent = self.agents.get(condition.agent)
            if agent is None or not derivable(agent.beliefs, (condition.literal(),)):
                summary.success = False
                summary.failures.append(
                    f"{condition.agent} does not believe {condition.belief}"
                )
        if summary.unremedied > 0:
            summary.success = False
            summary.failures.append(f"{summary.unremedied} violation(s) without a remedy")
        return summary


def register_agent(system: System, name: str, roles: list[str], program: AgentProgram) -> System:
    system.register_agent(name, roles, program)
    return system


def step_system(system: System) -> System:
    system.step_system()
    return system


@dataclass
class _RemedyHandle:
    """Runtime half of norm remediation: goals, commitments, escalation."""

    system: System

    def post_goal(self, agent_name: str, goal: Literal) -> None:
        state = self.system.agents.get(agent_name)
        if state is None:
            raise UnknownRole(agent_name)
        state.events.appendleft(Event(GOAL_ADDED, goal, source="self"))

    def create_commitment(self, debtor, creditor, antecedent, consequent, deadline=None):
        return self.system.adopt_commitment(debtor, creditor, antecedent, consequent, deadline)

    def escalate(self, role: str, violation: Violation) -> None:
        human = self.system.agent_for_role(role)
        if human is None:
            raise UnknownRole(role)
        content = Literal(
            "escalation",
            (TextConstant(violation.norm_id), Atom(violation.violator)),
        )
        self.system.outbox.append(
            Message(violation.violator, human.name, "tell", content, self.system.cycle)
        )


def build_system(scenario: ScenarioSpec, oracle=None) -> System:
    """Assemble a fresh system from a scenario bundle (pure per call)."""
    system = System(
        env=scenario.build_environment(),
        oracle=oracle if oracle is not None else scenario.oracle,
        norms=scenario.norms,
        cycles_per_hour=scenario.cycles_per_hour,
        obligation_window=scenario.obligation_window,
    )
    system.secondary_policy = scenario.secondary_policy
    system.vocabulary = scenario.vocabulary

    programs = {spec.name: spec.program for spec in scenario.agents}
    commitments = []
    for raw in scenario.commitments:
        commitment = system.adopt_commitment(
            raw["debtor"], raw["creditor"], raw["antecedent"], raw["consequent"], raw["deadline"]
        )
        commitments.append(commitment)

    if scenario.install_protocol:
        for commitment in commitments:
            programs = install_protocol(commitment, scenario.vocabulary, programs)

    for spec in scenario.agents:
        system.register_agent(spec.name, list(spec.roles), programs[spec.name])

    if scenario.install_protocol:
        # r = true protocols trigger off the commitment becoming active
        from .logic import assert_belief

        for commitment in commitments:
            if commitment.antecedent == TRUE and commitment.creditor in system.agents:
                creditor = system.agents[commitment.creditor]
                fact = Literal("commitment_active", (Atom(commitment.id),))
                creditor.beliefs = assert_belief(creditor.beliefs, fact)
                creditor.events.append(Event(BELIEF_ADDED, fact, source="self"))
    return system


def run_scenario(scenario: ScenarioSpec, max_cycles: int | None = None, oracle=None) -> System:
    """Steps a fresh system until quiescence or the cycle budget runs out."""
    system = build_system(scenario, oracle)
    system.run(scenario.max_cycles if max_cycles is None else max_cycles)
    return system
