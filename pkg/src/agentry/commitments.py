"""Social commitments: lifecycle, NL translation, protocol generation.

A commitment C(debtor, creditor, r, u) says the debtor commits to the
creditor that once the antecedent r holds, the consequent u will be
brought about. Lifecycle states and legal transitions:

    Null -> Active            creation
    Active -> Detached        r derivable from the creditor's beliefs
                              (r = true detaches at the creation cycle)
    Active -> Expired         creditor releases the commitment
    Active -> Cancelled       debtor cancels before detach
    Detached -> Satisfied     u derivable from the creditor's beliefs
    Detached -> Violated      deadline lapses, or debtor cancels after detach

Satisfied, Violated, Expired, and Cancelled are terminal. The creditor's
beliefs are the single authority for detachment and satisfaction, and the
store's append-only history replays to its current state.

Violations are remediated exactly once, through secondary-commitment
templates (reassignment) or escalation to a human role; a secondary
commitment that itself fails always escalates rather than chaining.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

from .lang import (
    AgentProgram,
    Atom,
    BeliefAddition,
    GoalAddition,
    Literal,
    Plan,
    PlanStep,
    SendMessage,
    TRUE,
    Variable,
    parse_literal,
    parse_plan_step,
    render_literal,
)
from .logic import BeliefBase, first_answer, derivable
from .oracle import OracleRefusal, translate

NULL = "null"
ACTIVE = "active"
DETACHED = "detached"
SATISFIED = "satisfied"
VIOLATED = "violated"
EXPIRED = "expired"
CANCELLED = "cancelled"

TERMINAL_STATES = frozenset({SATISFIED, VIOLATED, EXPIRED, CANCELLED})
LEGAL_TRANSITIONS = frozenset(
    {
        (NULL, ACTIVE),
        (ACTIVE, DETACHED),
        (ACTIVE, EXPIRED),
        (ACTIVE, CANCELLED),
        (DETACHED, SATISFIED),
        (DETACHED, VIOLATED),
    }
)


class SelfCommitment(Exception):
    """Debtor and creditor must differ."""


class IllegalTransition(Exception):
    """Attempted a transition outside the lifecycle state machine."""


class TranslationRejected(Exception):
    """The oracle's reply could not be parsed into a commitment proposal."""

    def __init__(self, reason: str, raw_reply: str = ""):
        self.reason = reason
        self.raw_reply = raw_reply
        super().__init__(reason)


class UnknownVocabulary(Exception):
    """Protocol generation hit predicates with no declared templates."""

    def __init__(self, predicates: list[str]):
        self.predicates = predicates
        super().__init__(f"no protocol vocabulary for: {', '.join(predicates)}")


@dataclass
class Commitment:
    id: str
    debtor: str
    creditor: str
    antecedent: Literal
    consequent: Literal
    state: str = ACTIVE
    deadline: int | None = None
    created_at: int = 0
    updated_at: int = 0
    detached_at: int | None = None
    bound_consequent: Literal | None = None
    derived_from: str | None = None

    def describe(self) -> str:
        parts = f"{self.debtor}, {self.creditor}, {render_literal(self.antecedent)}, {render_literal(self.consequent)}"
        return f"C({parts})"


@dataclass
class CommitmentStore:
    commitments: dict[str, Commitment] = field(default_factory=dict)
    history: list[tuple[str, str, str, int]] = field(default_factory=list)
    remediated: set[str] = field(default_factory=set)
    _next_id: int = 1

    def fresh_id(self) -> str:
        cid = f"c{self._next_id}"
        self._next_id += 1
        return cid

    def get(self, cid: str) -> Commitment:
        return self.commitments[cid]

    def transition(self, cid: str, to_state: str, cycle: int) -> Commitment:
        commitment = self.commitments[cid]
        move = (commitment.state, to_state)
        if move not in LEGAL_TRANSITIONS:
            raise IllegalTransition(f"{cid}: {commitment.state} -> {to_state}")
        commitment.state = to_state
        commitment.updated_at = cycle
        if to_state == DETACHED:
            commitment.detached_at = cycle
        self.history.append((cid, move[0], move[1], cycle))
        return commitment

    def non_terminal(self) -> list[Commitment]:
        return [c for c in self.commitments.values() if c.state not in TERMINAL_STATES]

    def pending_deadlines(self) -> bool:
        return any(c.state == DETACHED and c.deadline is not None for c in self.non_terminal())

    def replay(self) -> dict[str, str]:
        """Final state per commitment as implied by the history alone."""
        states: dict[str, str] = {}
        for cid, from_state, to_state, _ in self.history:
            if states.get(cid, NULL) != from_state:
                raise IllegalTransition(f"history out of order for {cid}")
            states[cid] = to_state
        return states


def create_commitment(
    store: CommitmentStore,
    debtor: str,
    creditor: str,
    antecedent: Literal,
    consequent: Literal,
    deadline: int | None = None,
    cycle: int = 0,
    derived_from: str | None = None,
) -> Commitment:
    """Create an Active commitment (recording Null -> Active in history)."""
    if debtor == creditor:
        raise SelfCommitment(f"{debtor} cannot commit to itself")
    commitment = Commitment(
        id=store.fresh_id(),
        debtor=debtor,
        creditor=creditor,
        antecedent=antecedent,
        consequent=consequent,
        deadline=deadline,
        created_at=cycle,
        updated_at=cycle,
        derived_from=derived_from,
    )
    store.commitments[commitment.id] = commitment
    store.history.append((commitment.id, NULL, ACTIVE, cycle))
    return commitment


def advance_lifecycle(
    store: CommitmentStore,
    beliefs_by_agent: dict[str, BeliefBase],
    cycle: int,
) -> list[tuple[str, str, str]]:
    """Run one lifecycle sweep; returns (id, from, to) for every change.

    Detachment and satisfaction are judged against the creditor's beliefs.
    A detachment's antecedent bindings carry into the consequent, so
    C(x, y, pr_submitted(T), test_results_available(T)) detached by
    pr_submitted(t1) is satisfied only by test results for t1. A commitment
    may chain Active -> Detached -> Satisfied within one sweep.
    """
    changes: list[tuple[str, str, str]] = []
    for commitment in list(store.commitments.values()):
        if commitment.state == ACTIVE:
            beliefs = beliefs_by_agent.get(commitment.creditor)
            if commitment.antecedent == TRUE:
                store.transition(commitment.id, DETACHED, cycle)
                commitment.bound_consequent = commitment.consequent
                changes.append((commitment.id, ACTIVE, DETACHED))
            elif beliefs is not None:
                answer = first_answer(beliefs, (commitment.antecedent,))
                if answer is not None:
                    store.transition(commitment.id, DETACHED, cycle)
                    commitment.bound_consequent = answer.apply_literal(commitment.consequent)
                    changes.append((commitment.id, ACTIVE, DETACHED))
        if commitment.state == DETACHED:
            beliefs = beliefs_by_agent.get(commitment.creditor)
            goal = commitment.bound_consequent or commitment.consequent
            if beliefs is not None and derivable(beliefs, (goal,)):
                store.transition(commitment.id, SATISFIED, cycle)
                changes.append((commitment.id, DETACHED, SATISFIED))
            elif (
                commitment.deadline is not None
                and commitment.detached_at is not None
                and cycle - commitment.detached_at > commitment.deadline
            ):
                store.transition(commitment.id, VIOLATED, cycle)
                changes.append((commitment.id, DETACHED, VIOLATED))
    return changes


def cancel_by_debtor(store: CommitmentStore, cid: str, cycle: int) -> Commitment:
    """Debtor cancel: Cancelled before detach, Violated after."""
    commitment = store.get(cid)
    if commitment.state == ACTIVE:
        return store.transition(cid, CANCELLED, cycle)
    if commitment.state == DETACHED:
        return store.transition(cid, VIOLATED, cycle)
    raise IllegalTransition(f"{cid}: debtor cannot cancel from {commitment.state}")


def cancel_by_creditor(store: CommitmentStore, cid: str, cycle: int) -> Commitment:
    """Creditor release: the commitment expires (only while Active)."""
    commitment = store.get(cid)
    if commitment.state == ACTIVE:
        return store.transition(cid, EXPIRED, cycle)
    raise IllegalTransition(f"{cid}: creditor cannot release from {commitment.state}")


# --------------------------------------------------------------------------
# Natural-language translation
# --------------------------------------------------------------------------

TRANSLATION_PROMPT = (
    "Translate this instruction into a commitment as JSON with keys "
    "debtor, creditor, antecedent, consequent, and optional deadline_hours. "
    "Speaker: {speaker}. Addressee: {addressee}. Instruction: {utterance}"
)


@dataclass(frozen=True)
class CommitmentProposal:
    debtor: str
    creditor: str
    antecedent: Literal
    consequent: Literal
    deadline_cycles: int | None
    sentence: str
    raw_reply: str


def translate_instruction(
    utterance: str,
    speaker: str,
    addressee: str,
    oracle,
    cycles_per_hour: int = 1,
    cycle: int = 0,
) -> CommitmentProposal:
    """Turn an informal instruction into a commitment proposal.

    The proposal still needs explicit confirmation before
    :func:`create_commitment` runs; malformed oracle replies raise
    :class:`TranslationRejected` (carrying the raw reply) and are never
    silently repaired.
    """
    if not utterance.strip():
        raise TranslationRejected("empty utterance")
    prompt = TRANSLATION_PROMPT.format(speaker=speaker, addressee=addressee, utterance=utterance)
    try:
        reply = translate(oracle, prompt, issuer=speaker, cycle=cycle)
    except OracleRefusal as exc:
        raise TranslationRejected(f"oracle refused: {exc}") from exc
    try:
        data = json.loads(reply)
        debtor = data["debtor"]
        creditor = data["creditor"]
        antecedent = parse_literal(data["antecedent"])
        consequent = parse_literal(data["consequent"])
        deadline_hours = data.get("deadline_hours")
    except Exception as exc:
        raise TranslationRejected(f"unparseable oracle reply: {exc}", raw_reply=reply) from exc
    deadline_cycles = None
    within = ""
    if deadline_hours is not None:
        deadline_cycles = int(round(float(deadline_hours) * cycles_per_hour))
        within = f" within {deadline_hours} hours"
    sentence = (
        f"{debtor} commits to {creditor}: once {render_literal(antecedent)} holds, "
        f"{render_literal(consequent)} will be achieved{within}."
    )
    return CommitmentProposal(
        debtor, creditor, antecedent, consequent, deadline_cycles, sentence, reply
    )


# --------------------------------------------------------------------------
# Protocol generation
# --------------------------------------------------------------------------

def _parse_steps(raw_steps: Sequence[str], debtor: str, creditor: str) -> tuple[PlanStep, ...]:
    steps = []
    for raw in raw_steps:
        text = raw.replace("$debtor", debtor).replace("$creditor", creditor)
        steps.append(parse_plan_step(text))
    return tuple(steps)


def generate_protocol(
    commitment: Commitment, vocabulary: dict[str, dict]
) -> tuple[tuple[Plan, ...], tuple[Plan, ...]]:
    """Coordination plans realizing a commitment, per declared vocabulary.

    The creditor gets a plan that reacts to the belief establishing the
    antecedent (or to the commitment becoming active, when r = true),
    performs the establishing steps, and requests the consequent from the
    debtor with an ``achieve``. The debtor gets a plan that carries out the
    request and records completion, plus a plan that reports back with a
    ``tell``. Returns (debtor plans, creditor plans).
    """
    missing = []
    r_entry = None
    if commitment.antecedent != TRUE:
        r_entry = vocabulary.get(commitment.antecedent.predicate)
        if r_entry is None:
            missing.append(commitment.antecedent.predicate)
    u_entry = vocabulary.get(commitment.consequent.predicate)
    if u_entry is None:
        missing.append(commitment.consequent.predicate)
    if missing:
        raise UnknownVocabulary(missing)

    debtor, creditor = commitment.debtor, commitment.creditor
    request_goal = parse_literal(u_entry["request_goal"])

    if r_entry is not None:
        creditor_trigger = BeliefAddition(parse_literal(r_entry["establishing_trigger"]))
        establish = _parse_steps(r_entry.get("establish_steps", ()), debtor, creditor)
    else:
        creditor_trigger = BeliefAddition(Literal("commitment_active", (Atom(commitment.id),)))
        establish = ()
    notify = SendMessage(Variable(debtor), "achieve", request_goal)
    creditor_plan = Plan(creditor_trigger, (), establish + (notify,), 0)

    done_belief = parse_literal(u_entry["done_belief"])
    achieve_steps = _parse_steps(u_entry.get("achieve_steps", ()), debtor, creditor)
    from .lang import AddBelief

    debtor_plan_work = Plan(
        GoalAddition(request_goal), (), achieve_steps + (AddBelief(done_belief),), 0
    )
    report_steps = _parse_steps(u_entry["report_steps"], debtor, creditor)
    debtor_plan_report = Plan(BeliefAddition(done_belief), (), report_steps, 1)
    return (debtor_plan_work, debtor_plan_report), (creditor_plan,)


def install_protocol(
    commitment: Commitment,
    vocabulary: dict[str, dict],
    programs: dict[str, AgentProgram],
) -> dict[str, AgentProgram]:
    """Append generated plans to the debtor's and creditor's plan libraries."""
    debtor_plans, creditor_plans = generate_protocol(commitment, vocabulary)
    out = dict(programs)
    if commitment.debtor in out:
        out[commitment.debtor] = out[commitment.debtor].with_extra_plans(debtor_plans)
    if commitment.creditor in out:
        out[commitment.creditor] = out[commitment.creditor].with_extra_plans(creditor_plans)
    return out


# --------------------------------------------------------------------------
# Violation handling
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Escalation:
    """A violated commitment with no applicable template goes to a human."""

    commitment_id: str
    role: str


def handle_violation(
    commitment: Commitment,
    policy: dict,
    store: CommitmentStore,
    cycle: int,
) -> Commitment | Escalation:
    """Remediate one Violated commitment, exactly once per commitment.

    ``policy`` holds ``templates`` (each with a ``match`` of a commitment id
    or ``*``) and an ``escalation_role``. Secondary commitments never match
    templates themselves, so a failing remedy escalates instead of chaining.
    """
    if commitment.state != VIOLATED:
        raise IllegalTransition(f"{commitment.id} is {commitment.state}, not violated")
    if commitment.id in store.remediated:
        raise IllegalTransition(f"{commitment.id} was already remediated")
    store.remediated.add(commitment.id)
    role = policy.get("escalation_role", "human")
    if commitment.derived_from is None:
        for template in policy.get("templates", []):
            match = template.get("match", "*")
            if match not in ("*", commitment.id):
                continue
            antecedent = template.get("antecedent", "inherit")
            consequent = template.get("consequent", "inherit")
            return create_commitment(
                store,
                template["debtor"],
                template["creditor"],
                commitment.antecedent if antecedent == "inherit" else parse_literal(antecedent),
                (commitment.bound_consequent or commitment.consequent)
                if consequent == "inherit"
                else parse_literal(consequent),
                template.get("deadline"),
                cycle,
                derived_from=commitment.id,
            )
    return Escalation(commitment.id, role)


def load_commitment_file(path: str | Path) -> dict:
    """Parse a commitment bundle: commitments, secondary policy, vocabulary."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    parsed = []
    for raw in data.get("commitments", []):
        parsed.append(
            {
                "debtor": raw["debtor"],
                "creditor": raw["creditor"],
                "antecedent": parse_literal(raw.get("antecedent", "true")),
                "consequent": parse_literal(raw["consequent"]),
                "deadline": raw.get("deadline"),
            }
        )
    return {
        "commitments": parsed,
        "secondary": data.get("secondary", {}),
        "vocabulary": data.get("vocabulary", {}),
    }
