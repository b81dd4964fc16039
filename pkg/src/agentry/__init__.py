"""agentry: a normative BDI multi-agent runtime.

Agents written in an AgentSpeak-dialect language deliberate over beliefs,
goals, and plans; self-regulate against deontic norms (obligations,
prohibitions, permissions); and coordinate through social commitments —
all against a deterministic simulated software-engineering environment
with a scriptable LLM oracle at the reasoning boundary.
"""

from .lang import AgentProgram, Literal, parse_agent_source, parse_literal, pretty_print
from .logic import BeliefBase, Substitution, assert_belief, query, retract_belief, unify
from .runtime import System, build_system, run_scenario
from .scenario import ScenarioSpec, load_scenario

__version__ = "0.1.0"

__all__ = [
    "AgentProgram",
    "BeliefBase",
    "Literal",
    "ScenarioSpec",
    "Substitution",
    "System",
    "assert_belief",
    "build_system",
    "load_scenario",
    "parse_agent_source",
    "parse_literal",
    "pretty_print",
    "query",
    "retract_belief",
    "run_scenario",
    "unify",
    "__version__",
]
