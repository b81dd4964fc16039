"""The LLM boundary: scripted, record/replay, and optional live backends.

Agents reach the oracle through exactly three request kinds:

* ``boolean-query`` — context conditions (feasibility checks),
* ``generate``      — text generation bound into plan variables,
* ``translate``     — natural-language instruction to commitment proposal.

The scripted backend is a pure function of (script, request), which is what
every shipped scenario and test uses. A live backend can be wrapped in a
recorder whose cassette then replays runs byte-identically.
"""

from __future__ import annotations

import json
import os
import re
import urllib.request
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

BOOLEAN_QUERY = "boolean-query"
GENERATE = "generate"
TRANSLATE = "translate"
REQUEST_KINDS = (BOOLEAN_QUERY, GENERATE, TRANSLATE)


class OracleRefusal(Exception):
    """The oracle declined to answer (no match, or ambiguous live reply)."""


class OracleUnavailable(Exception):
    """The backend itself cannot serve requests (missing config, I/O error)."""


class CassetteMiss(Exception):
    """Replay saw a request that was never recorded."""


@dataclass(frozen=True)
class OracleRequest:
    kind: str
    prompt: str
    issuer: str = ""
    cycle: int = 0


@dataclass(frozen=True)
class ScriptEntry:
    """One matcher/response pair; ``pattern`` entries are regular expressions."""

    response: Union[bool, str]
    match: str | None = None
    pattern: str | None = None
    kind: str | None = None

    def matches(self, request: OracleRequest) -> bool:
        if self.kind is not None and self.kind != request.kind:
            return False
        if self.match is not None:
            return self.match == request.prompt
        if self.pattern is not None:
            return re.search(self.pattern, request.prompt) is not None
        return False


@dataclass
class ScriptedOracle:
    """Deterministic test double: first matching entry wins."""

    entries: tuple[ScriptEntry, ...] = ()
    default: Union[bool, str, None] = None  # None means refuse

    def answer(self, request: OracleRequest) -> Union[bool, str]:
        for entry in self.entries:
            if entry.matches(request):
                return entry.response
        if self.default is None:
            raise OracleRefusal(f"no script entry matches {request.kind} prompt {request.prompt!r}")
        return self.default

    @staticmethod
    def from_file(path: str | Path) -> "ScriptedOracle":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        return ScriptedOracle.from_dict(data)

    @staticmethod
    def from_dict(data: dict) -> "ScriptedOracle":
        entries = []
        for raw in data.get("entries", []):
            kind = raw.get("kind")
            if kind is not None and kind not in REQUEST_KINDS:
                raise ValueError(f"unknown oracle request kind {kind!r}")
            if ("match" in raw) == ("pattern" in raw):
                raise ValueError("script entry needs exactly one of 'match' or 'pattern'")
            entries.append(
                ScriptEntry(
                    response=raw["response"],
                    match=raw.get("match"),
                    pattern=raw.get("pattern"),
                    kind=kind,
                )
            )
        default = data.get("default", "refuse")
        if default == "refuse":
            parsed_default = None
        elif isinstance(default, dict):
            parsed_default = default["response"]
        else:
            raise ValueError("oracle default must be 'refuse' or {'response': ...}")
        return ScriptedOracle(tuple(entries), parsed_default)


def query_boolean(oracle, prompt: str, issuer: str = "", cycle: int = 0) -> bool:
    """Ask a yes/no question; non-boolean script payloads count as refusals."""
    if not prompt:
        raise ValueError("empty prompt")
    answer = oracle.answer(OracleRequest(BOOLEAN_QUERY, prompt, issuer, cycle))
    if not isinstance(answer, bool):
        raise OracleRefusal(f"boolean query answered with non-boolean {answer!r}")
    return answer


def generate(oracle, prompt: str, issuer: str = "", cycle: int = 0) -> str:
    """Free-text generation; callers must norm-check the output before use."""
    if not prompt:
        raise ValueError("empty prompt")
    answer = oracle.answer(OracleRequest(GENERATE, prompt, issuer, cycle))
    if not isinstance(answer, str):
        raise OracleRefusal(f"generation answered with non-text {answer!r}")
    return answer


def translate(oracle, prompt: str, issuer: str = "", cycle: int = 0) -> str:
    if not prompt:
        raise ValueError("empty prompt")
    answer = oracle.answer(OracleRequest(TRANSLATE, prompt, issuer, cycle))
    if not isinstance(answer, str):
        raise OracleRefusal(f"translation answered with non-text {answer!r}")
    return answer


# --------------------------------------------------------------------------
# Record / replay
# --------------------------------------------------------------------------

def _request_key(request: OracleRequest) -> tuple[str, str]:
    return (request.kind, request.prompt)


@dataclass
class RecordingOracle:
    """Wraps a backend and appends every (request, response) to a cassette."""

    backend: object
    cassette_path: Path

    def answer(self, request: OracleRequest) -> Union[bool, str]:
        response = self.backend.answer(request)
        record = {"kind": request.kind, "prompt": request.prompt, "response": response}
        with open(self.cassette_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(record, ensure_ascii=True) + "\n")
        return response


@dataclass
class ReplayOracle:
    """Serves recorded responses by request equality, FIFO per request."""

    queues: dict[tuple[str, str], list[Union[bool, str]]] = field(default_factory=dict)

    @staticmethod
    def from_file(path: str | Path) -> "ReplayOracle":
        queues: dict[tuple[str, str], list[Union[bool, str]]] = {}
        text = Path(path).read_text(encoding="utf-8") if Path(path).exists() else ""
        for line in text.splitlines():
            if not line.strip():
                continue
            record = json.loads(line)
            queues.setdefault((record["kind"], record["prompt"]), []).append(record["response"])
        return ReplayOracle(queues)

    def answer(self, request: OracleRequest) -> Union[bool, str]:
        queue = self.queues.get(_request_key(request))
        if not queue:
            raise CassetteMiss(f"no recorded response for {request.kind} prompt {request.prompt!r}")
        if len(queue) == 1:
            return queue[0]
        return queue.pop(0)


def record_replay(live_backend, cassette_file: str | Path, mode: str = "replay"):
    """Build a record- or replay-mode oracle over one cassette file."""
    path = Path(cassette_file)
    if mode == "record":
        path.parent.mkdir(parents=True, exist_ok=True)
        path.touch()
        return RecordingOracle(live_backend, path)
    if mode == "replay":
        if not path.exists():
            raise OracleUnavailable(f"cassette {path} does not exist")
        return ReplayOracle.from_file(path)
    raise ValueError(f"unknown record_replay mode {mode!r}")


# --------------------------------------------------------------------------
# Optional live backend
# --------------------------------------------------------------------------

ENDPOINT_VAR = "AGENTRY_LLM_ENDPOINT"
CREDENTIAL_VAR = "AGENTRY_LLM_CREDENTIAL"
MODEL_VAR = "AGENTRY_LLM_MODEL"


@dataclass
class LiveOracle:
    """Remote completion service; configured only via environment variables.

    Never used by tests or shipped scenarios. Boolean queries accept only
    replies whose first token is yes/no (case-insensitive); anything else
    is a refusal, which keeps hallucinated prose out of context conditions.
    """

    endpoint: str
    credential: str
    model: str
    timeout: float = 30.0

    @staticmethod
    def from_environment() -> "LiveOracle":
        endpoint = os.environ.get(ENDPOINT_VAR)
        if not endpoint:
            raise OracleUnavailable(f"{ENDPOINT_VAR} is not set")
        return LiveOracle(
            endpoint=endpoint,
            credential=os.environ.get(CREDENTIAL_VAR, ""),
            model=os.environ.get(MODEL_VAR, ""),
        )

    def answer(self, request: OracleRequest) -> Union[bool, str]:
        payload = json.dumps(
            {"model": self.model, "kind": request.kind, "prompt": request.prompt}
        ).encode("utf-8")
        http_request = urllib.request.Request(
            self.endpoint,
            data=payload,
            headers={
                "Content-Type": "application/json",
                "Authorization": f"Bearer {self.credential}",
            },
        )
        try:
            with urllib.request.urlopen(http_request, timeout=self.timeout) as response:
                reply = json.loads(response.read().decode("utf-8"))
        except OSError as exc:
            raise OracleUnavailable(f"live oracle request failed: {exc}") from exc
        text = reply.get("text", "")
        if request.kind == BOOLEAN_QUERY:
            return extract_boolean(text)
        return text


def extract_boolean(reply: str) -> bool:
    """Map a free-text reply to a boolean; refuse unless it leads with yes/no."""
    first = reply.strip().split(None, 1)
    token = first[0].strip(".,!:;").lower() if first else ""
    if token == "yes":
        return True
    if token == "no":
        return False
    raise OracleRefusal(f"ambiguous boolean reply {reply!r}")
