"""Parser for the agent language.

Surface syntax (Jason-style):

    project_repo("https://github.com/codebase.git").      // initial belief
    incomplete_task(T) :- task_status(T, adopted).        // rule
    !complete_project.                                    // initial goal
    +!prepare_project : project_repo(URL) <-              // plan
        clone_repo(URL);
        get_backlog_item(T);
        +current_task(T);
        +task_status(T, adopted).

Plan triggers are ``+!g`` (goal addition) or ``+b`` (belief addition).
Context conditions are ``&``-conjunctions of literals, ``not`` literals,
and ``query_LLM(<prompt>)`` conditions, where a prompt is a ``+``-joined
sequence of strings, variables, atoms, and numbers. Body steps are
separated by ``;``: external actions, ``.name(...)`` internal actions,
``+b`` / ``-b`` / ``-+b`` belief updates, ``!g`` subgoals, ``?g`` test
goals, ``.send(To, performative, content)``, ``query_LLM(...)``, and
``ask_LLM(<prompt>, Var)``. Comments run from ``//`` to end of line.

Parsing never raises anything but :class:`ParseError` (or its subclass
:class:`RangeRestrictionError`); malformed input of any shape gets a
structured error with line, column, and the expected-token set.
"""

from __future__ import annotations

from dataclasses import dataclass

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
    Variable,
    Wildcard,
    literal_variables,
)

MAX_SOURCE_BYTES = 64 * 1024
MAX_TERM_DEPTH = 200


class ParseError(Exception):
    """Syntax error with position and the set of expected tokens."""

    def __init__(self, message: str, line: int, column: int, expected: frozenset[str] = frozenset()):
        self.message = message
        self.line = line
        self.column = column
        self.expected = expected
        where = f"line {line}, column {column}"
        if expected:
            message = f"{message} (expected {', '.join(sorted(expected))})"
        super().__init__(f"{where}: {message}")


class RangeRestrictionError(ParseError):
    """A rule head uses a variable that never occurs in the rule body."""

    def __init__(self, variable: str, rule_head: str, line: int, column: int):
        self.variable = variable
        self.rule_head = rule_head
        super().__init__(
            f"variable {variable} in head of rule {rule_head} does not occur in the body",
            line,
            column,
        )


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int


_PUNCT2 = {
    ":-": "RULE_ARROW",
    "<-": "BODY_ARROW",
    "-+": "REPLACE",
    "+!": "GOAL_TRIGGER",
}
_PUNCT1 = {
    "(": "LPAREN",
    ")": "RPAREN",
    ",": "COMMA",
    ";": "SEMI",
    "&": "AMP",
    ":": "COLON",
    "+": "PLUS",
    "-": "MINUS",
    "!": "BANG",
    "?": "QUERY",
}


def _tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    i = 0
    line = 1
    col = 1
    n = len(source)

    def error(msg: str) -> ParseError:
        return ParseError(msg, line, col)

    while i < n:
        ch = source[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if source.startswith("//", i):
            while i < n and source[i] != "\n":
                i += 1
            continue
        start_line, start_col = line, col
        # String constant.
        if ch == '"':
            i += 1
            col += 1
            buf: list[str] = []
            while True:
                if i >= n or source[i] == "\n":
                    raise ParseError("unterminated string", start_line, start_col)
                c = source[i]
                if c == "\\":
                    if i + 1 >= n:
                        raise ParseError("unterminated string escape", line, col)
                    esc = source[i + 1]
                    buf.append({"n": "\n", "t": "\t", '"': '"', "\\": "\\"}.get(esc, esc))
                    i += 2
                    col += 2
                    continue
                if c == '"':
                    i += 1
                    col += 1
                    break
                buf.append(c)
                i += 1
                col += 1
            tokens.append(Token("STRING", "".join(buf), start_line, start_col))
            continue
        # Number.
        if ch.isdigit():
            j = i
            while j < n and source[j].isdigit():
                j += 1
            if j < n and source[j] == "." and j + 1 < n and source[j + 1].isdigit():
                j += 1
                while j < n and source[j].isdigit():
                    j += 1
            tokens.append(Token("NUMBER", source[i:j], start_line, start_col))
            col += j - i
            i = j
            continue
        # Identifier (atom or variable).
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            text = source[i:j]
            if text == "not":
                kind = "NOT"
            elif text == "_":
                kind = "WILDCARD"
            elif text[0].isupper() or (text[0] == "_" and len(text) > 1):
                kind = "VARIABLE"
            else:
                kind = "ATOM"
            tokens.append(Token(kind, text, start_line, start_col))
            col += j - i
            i = j
            continue
        # Internal action prefix: '.' glued to a lowercase name.
        if ch == ".":
            if i + 1 < n and (source[i + 1].isalpha() and source[i + 1].islower()):
                j = i + 1
                while j < n and (source[j].isalnum() or source[j] == "_"):
                    j += 1
                tokens.append(Token("DOT_NAME", source[i + 1 : j], start_line, start_col))
                col += j - i
                i = j
                continue
            tokens.append(Token("END", ".", start_line, start_col))
            i += 1
            col += 1
            continue
        # Multi-char then single-char punctuation.
        two = source[i : i + 2]
        if len(two) == 2 and two in _PUNCT2:
            tokens.append(Token(_PUNCT2[two], two, start_line, start_col))
            i += 2
            col += 2
            continue
        if ch in _PUNCT1:
            tokens.append(Token(_PUNCT1[ch], ch, start_line, start_col))
            i += 1
            col += 1
            continue
        raise error(f"unexpected character {ch!r}")

    tokens.append(Token("EOF", "", line, col))
    return tokens


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    # -- token plumbing ----------------------------------------------------

    @property
    def cur(self) -> Token:
        return self.tokens[self.pos]

    def at(self, *kinds: str) -> bool:
        return self.cur.kind in kinds

    def advance(self) -> Token:
        tok = self.cur
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def expect(self, kind: str, what: str) -> Token:
        if self.cur.kind != kind:
            raise self.fail(what)
        return self.advance()

    def fail(self, *expected: str) -> ParseError:
        tok = self.cur
        found = "end of input" if tok.kind == "EOF" else repr(tok.text)
        return ParseError(
            f"unexpected {found}", tok.line, tok.column, frozenset(expected)
        )

    # -- terms ---------------------------------------------------------------

    def term(self, depth: int = 0) -> Term:
        if depth > MAX_TERM_DEPTH:
            raise ParseError("term nesting too deep", self.cur.line, self.cur.column)
        tok = self.cur
        if tok.kind == "VARIABLE":
            self.advance()
            return Variable(tok.text)
        if tok.kind == "WILDCARD":
            self.advance()
            return Wildcard()
        if tok.kind == "STRING":
            self.advance()
            return TextConstant(tok.text)
        if tok.kind == "NUMBER":
            self.advance()
            return NumberConstant(float(tok.text))
        if tok.kind == "MINUS":
            self.advance()
            num = self.expect("NUMBER", "number")
            return NumberConstant(-float(num.text))
        if tok.kind == "ATOM":
            self.advance()
            if self.at("LPAREN"):
                self.advance()
                args = self.term_list(depth + 1)
                self.expect("RPAREN", ")")
                return Compound(tok.text, args)
            return Atom(tok.text)
        raise self.fail("term")

    def term_list(self, depth: int = 0) -> tuple[Term, ...]:
        terms = [self.term(depth)]
        while self.at("COMMA"):
            self.advance()
            terms.append(self.term(depth))
        return tuple(terms)

    def literal(self, allow_not: bool = False) -> Literal:
        negated = False
        if allow_not and self.at("NOT"):
            self.advance()
            negated = True
        tok = self.expect("ATOM", "predicate")
        args: tuple[Term, ...] = ()
        if self.at("LPAREN"):
            self.advance()
            args = self.term_list()
            self.expect("RPAREN", ")")
        return Literal(tok.text, args, negated)

    # -- prompts -------------------------------------------------------------

    def prompt_expr(self) -> PromptExpr:
        parts = [self.term()]
        while self.at("PLUS"):
            self.advance()
            parts.append(self.term())
        return PromptExpr(tuple(parts))

    # -- contexts ------------------------------------------------------------

    def context(self) -> tuple[ContextCondition, ...]:
        if self.at("ATOM") and self.cur.text == "true":
            after = self.tokens[self.pos + 1]
            if after.kind != "LPAREN":
                self.advance()
                if self.at("AMP"):
                    raise self.fail("<-")
                return ()
        conds = [self.context_condition()]
        while self.at("AMP"):
            self.advance()
            conds.append(self.context_condition())
        return tuple(conds)

    def context_condition(self) -> ContextCondition:
        if self.at("ATOM") and self.cur.text == "query_LLM":
            self.advance()
            self.expect("LPAREN", "(")
            prompt = self.prompt_expr()
            self.expect("RPAREN", ")")
            return QueryLLM(prompt)
        return self.literal(allow_not=True)

    # -- plan bodies -----------------------------------------------------------

    def step(self) -> PlanStep:
        tok = self.cur
        if tok.kind == "BANG":
            self.advance()
            return SubGoal(self.literal())
        if tok.kind == "QUERY":
            self.advance()
            return TestGoal(self.literal())
        if tok.kind == "PLUS":
            self.advance()
            lit = self.literal()
            if lit.negated:
                raise ParseError("belief updates take positive literals", tok.line, tok.column)
            return AddBelief(lit)
        if tok.kind == "MINUS":
            self.advance()
            return RemoveBelief(self.literal())
        if tok.kind == "REPLACE":
            self.advance()
            return ReplaceBelief(self.literal())
        if tok.kind == "DOT_NAME":
            self.advance()
            self.expect("LPAREN", "(")
            if tok.text == "send":
                recipient = self.term()
                self.expect("COMMA", ",")
                perf = self.expect("ATOM", "performative")
                if perf.text not in PERFORMATIVES:
                    raise ParseError(
                        f"unknown performative {perf.text!r}",
                        perf.line,
                        perf.column,
                        frozenset(PERFORMATIVES),
                    )
                self.expect("COMMA", ",")
                content = self.literal()
                self.expect("RPAREN", ")")
                return SendMessage(recipient, perf.text, content)
            args = self.term_list()
            self.expect("RPAREN", ")")
            return InternalAction(tok.text, args)
        if tok.kind == "ATOM":
            if tok.text == "query_LLM":
                self.advance()
                self.expect("LPAREN", "(")
                prompt = self.prompt_expr()
                self.expect("RPAREN", ")")
                return QueryLLM(prompt)
            if tok.text == "ask_LLM":
                self.advance()
                self.expect("LPAREN", "(")
                prompt = self.prompt_expr()
                self.expect("COMMA", ",")
                var = self.expect("VARIABLE", "result variable")
                self.expect("RPAREN", ")")
                return AskLLM(prompt, Variable(var.text))
            return ExternalAction(self.literal())
        raise self.fail("plan step")

    def body(self) -> tuple[PlanStep, ...]:
        steps = [self.step()]
        while self.at("SEMI"):
            self.advance()
            steps.append(self.step())
        return tuple(steps)

    # -- statements ------------------------------------------------------------

    def plan(self, index: int) -> Plan:
        if self.at("GOAL_TRIGGER"):
            self.advance()
            trigger: GoalAddition | BeliefAddition = GoalAddition(self.literal())
        else:
            self.expect("PLUS", "+")
            trigger = BeliefAddition(self.literal())
        context: tuple[ContextCondition, ...] = ()
        if self.at("COLON"):
            self.advance()
            context = self.context()
        self.expect("BODY_ARROW", "<-")
        body = self.body()
        self.expect("END", ".")
        return Plan(trigger, context, body, index)

    def rule_or_belief(self) -> Rule | Literal:
        start = self.cur
        head = self.literal()
        if self.at("RULE_ARROW"):
            self.advance()
            body = [self.literal(allow_not=True)]
            while self.at("AMP"):
                self.advance()
                body.append(self.literal(allow_not=True))
            self.expect("END", ".")
            rule = Rule(head, tuple(body))
            body_vars: set[str] = set()
            for lit in rule.body:
                body_vars |= literal_variables(lit)
            for var in sorted(literal_variables(head)):
                if var not in body_vars:
                    raise RangeRestrictionError(var, head.predicate, start.line, start.column)
            return rule
        self.expect("END", ".")
        if head.negated:
            raise ParseError("beliefs must be positive", start.line, start.column)
        return head

    def program(self, name: str) -> AgentProgram:
        beliefs: list[Literal] = []
        rules: list[Rule] = []
        plans: list[Plan] = []
        goals: list[Literal] = []
        while not self.at("EOF"):
            if self.at("GOAL_TRIGGER", "PLUS"):
                plans.append(self.plan(len(plans)))
            elif self.at("BANG"):
                self.advance()
                goals.append(self.literal())
                self.expect("END", ".")
            elif self.at("ATOM"):
                parsed = self.rule_or_belief()
                if isinstance(parsed, Rule):
                    rules.append(parsed)
                else:
                    beliefs.append(parsed)
            else:
                raise self.fail("belief", "rule", "plan", "initial goal")
        return AgentProgram(name, tuple(beliefs), tuple(rules), tuple(plans), tuple(goals))


def parse_agent_source(source: str, name: str = "") -> AgentProgram:
    """Parse agent source text into an :class:`AgentProgram`.

    Raises :class:`ParseError` (with line/column and expected tokens) on any
    malformed input, and :class:`RangeRestrictionError` when a rule head
    variable never occurs in the rule body.
    """
    if len(source.encode("utf-8", errors="replace")) > MAX_SOURCE_BYTES:
        raise ParseError("source exceeds 64 KiB", 1, 1)
    return _Parser(_tokenize(source)).program(name)


def parse_literal(text: str) -> Literal:
    """Parse a single literal, e.g. ``task_status(T, adopted)``."""
    parser = _Parser(_tokenize(text))
    lit = parser.literal(allow_not=True)
    parser.expect("EOF", "end of literal")
    return lit


def parse_literal_conjunction(text: str) -> tuple[Literal, ...]:
    """Parse ``p(X) & not q(X)`` style conjunctions (``true`` is empty)."""
    parser = _Parser(_tokenize(text))
    if parser.at("ATOM") and parser.cur.text == "true" and parser.tokens[parser.pos + 1].kind == "EOF":
        return ()
    lits = [parser.literal(allow_not=True)]
    while parser.at("AMP"):
        parser.advance()
        lits.append(parser.literal(allow_not=True))
    parser.expect("EOF", "end of conjunction")
    return tuple(lits)


def parse_term(text: str) -> Term:
    parser = _Parser(_tokenize(text))
    term = parser.term()
    parser.expect("EOF", "end of term")
    return term


def parse_plan_step(text: str) -> PlanStep:
    """Parse one plan body step (used by protocol templates)."""
    parser = _Parser(_tokenize(text))
    step = parser.step()
    parser.expect("EOF", "end of step")
    return step
