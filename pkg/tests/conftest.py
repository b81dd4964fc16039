from __future__ import annotations

from pathlib import Path

import pytest

from agentry.conformance import SCENARIOS_DIR
from agentry.envsim import Environment
from agentry.interpreter import AgentServices
from agentry.oracle import ScriptedOracle
from agentry.tracing import Trace


def scenario_path(name: str) -> Path:
    return SCENARIOS_DIR / name


@pytest.fixture
def empty_env() -> Environment:
    return Environment.from_dict({})


@pytest.fixture
def collected_messages():
    return []


@pytest.fixture
def services(empty_env, collected_messages) -> AgentServices:
    """Bare interpreter services: empty environment, refusing oracle."""
    return AgentServices(
        env=empty_env,
        oracle=ScriptedOracle(),
        outbox=collected_messages.append,
        trace=Trace(),
    )


def make_services(env=None, oracle=None, norms=(), outbox=None, violations=None):
    sink = violations.append if violations is not None else (lambda v: None)
    return AgentServices(
        env=env if env is not None else Environment.from_dict({}),
        oracle=oracle if oracle is not None else ScriptedOracle(),
        outbox=outbox if outbox is not None else (lambda m: None),
        norms=norms,
        trace=Trace(),
        violation_sink=sink,
    )
