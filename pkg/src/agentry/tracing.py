"""Append-only run trace: the system's episodic memory and audit log.

Entries are strictly ordered by (cycle, sequence number) and serialize to
newline-delimited JSON with a stable field order, so byte-identical traces
across runs are the determinism contract and digests make regressions
bit-exact.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from .lang import Literal

KINDS = (
    "percept",
    "event",
    "plan-selected",
    "step",
    "belief-change",
    "message",
    "norm-violation",
    "remedy",
    "commitment-transition",
    "llm-call",
)


@dataclass(frozen=True)
class Message:
    sender: str
    receiver: str
    performative: str
    content: Literal
    sent_at: int


@dataclass(frozen=True)
class TraceEntry:
    cycle: int
    seq: int
    agent: str
    kind: str
    payload: dict

    def to_json(self) -> str:
        record = {
            "cycle": self.cycle,
            "seq": self.seq,
            "agent": self.agent,
            "kind": self.kind,
            "payload": self.payload,
        }
        return json.dumps(record, ensure_ascii=True, separators=(", ", ": "))


@dataclass
class Trace:
    entries: list[TraceEntry] = field(default_factory=list)
    cycle: int = 0
    _seq: int = 0

    def emit(self, agent: str, kind: str, payload: dict) -> TraceEntry:
        if kind not in KINDS:
            raise ValueError(f"unknown trace kind {kind!r}")
        entry = TraceEntry(self.cycle, self._seq, agent, kind, payload)
        self._seq += 1
        self.entries.append(entry)
        return entry

    def advance_cycle(self, cycle: int) -> None:
        self.cycle = cycle
        self._seq = 0

    def serialize(self) -> str:
        return "".join(e.to_json() + "\n" for e in self.entries)

    def digest(self) -> str:
        return hashlib.sha256(self.serialize().encode("utf-8")).hexdigest()

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.serialize(), encoding="utf-8")

    def count(self, kind: str, **payload_filters) -> int:
        return sum(1 for e in self.entries if e.kind == kind and _payload_matches(e, payload_filters))

    def find(self, kind: str, **payload_filters) -> list[TraceEntry]:
        return [e for e in self.entries if e.kind == kind and _payload_matches(e, payload_filters)]


def _payload_matches(entry: TraceEntry, filters: dict) -> bool:
    return all(entry.payload.get(k) == v for k, v in filters.items())


def load_trace(path: str | Path) -> list[TraceEntry]:
    entries = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        record = json.loads(line)
        entries.append(
            TraceEntry(record["cycle"], record["seq"], record["agent"], record["kind"], record["payload"])
        )
    return entries
