"""Canonical wire model: steering commands, event messages and their JSON.

Every message is a single self-describing JSON object carrying ``"v": 1``
and a ``"type"`` tag. Field names, their order and enum spellings are the
public contract: serialization is byte-stable and deserialization rejects
unknown fields, so golden documents can be compared verbatim.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Union

__all__ = [
    "WireError",
    "WIRE_VERSION",
    "Configure",
    "Start",
    "Pause",
    "Step",
    "AddFish",
    "RemoveFish",
    "SetParams",
    "SnapshotRequest",
    "Reset",
    "Command",
    "SnapshotMsg",
    "JobCompleted",
    "RunFinished",
    "ErrorMsg",
    "EventMsg",
    "document",
    "serialize",
    "deserialize",
]

WIRE_VERSION = 1

SET_PARAM_KEYS = ("visual", "step", "try_number", "delta", "population",
                  "iterations", "vision_draw", "dispatch_epsilon")


class WireError(ValueError):
    """Unparseable message text or schema violation (with field path)."""


@dataclass(frozen=True)
class Configure:
    config: dict


@dataclass(frozen=True)
class Start:
    pass


@dataclass(frozen=True)
class Pause:
    pass


@dataclass(frozen=True)
class Step:
    n: int


@dataclass(frozen=True)
class AddFish:
    task_name: str
    field: str
    keywords: tuple[str, ...]

    def __post_init__(self):
        # Canonical form: case-folded, sorted, deduplicated.
        object.__setattr__(self, "keywords", tuple(sorted({kw.casefold() for kw in self.keywords})))


@dataclass(frozen=True)
class RemoveFish:
    fish_id: int


@dataclass(frozen=True)
class SetParams:
    params: dict


@dataclass(frozen=True)
class SnapshotRequest:
    pass


@dataclass(frozen=True)
class Reset:
    pass


Command = Union[Configure, Start, Pause, Step, AddFish, RemoveFish, SetParams, SnapshotRequest, Reset]

COMMAND_TYPES = (Configure, Start, Pause, Step, AddFish, RemoveFish, SetParams, SnapshotRequest, Reset)


@dataclass(frozen=True)
class SnapshotMsg:
    snapshot: dict


@dataclass(frozen=True)
class JobCompleted:
    job: dict


@dataclass(frozen=True)
class RunFinished:
    summary: dict


@dataclass(frozen=True)
class ErrorMsg:
    code: str
    message: str


EventMsg = Union[SnapshotMsg, JobCompleted, RunFinished, ErrorMsg]

EVENT_TYPES = (SnapshotMsg, JobCompleted, RunFinished, ErrorMsg)


def document(value) -> dict:
    if isinstance(value, Configure):
        return {"v": WIRE_VERSION, "type": "configure", "config": value.config}
    if isinstance(value, Start):
        return {"v": WIRE_VERSION, "type": "start"}
    if isinstance(value, Pause):
        return {"v": WIRE_VERSION, "type": "pause"}
    if isinstance(value, Step):
        return {"v": WIRE_VERSION, "type": "step", "n": value.n}
    if isinstance(value, AddFish):
        return {"v": WIRE_VERSION, "type": "add_fish", "task_name": value.task_name,
                "field": value.field, "keywords": list(value.keywords)}
    if isinstance(value, RemoveFish):
        return {"v": WIRE_VERSION, "type": "remove_fish", "fish_id": value.fish_id}
    if isinstance(value, SetParams):
        return {"v": WIRE_VERSION, "type": "set_params", "params": value.params}
    if isinstance(value, SnapshotRequest):
        return {"v": WIRE_VERSION, "type": "snapshot_request"}
    if isinstance(value, Reset):
        return {"v": WIRE_VERSION, "type": "reset"}
    if isinstance(value, SnapshotMsg):
        return {"v": WIRE_VERSION, "type": "snapshot", "snapshot": value.snapshot}
    if isinstance(value, JobCompleted):
        return {"v": WIRE_VERSION, "type": "job_completed", "job": value.job}
    if isinstance(value, RunFinished):
        return {"v": WIRE_VERSION, "type": "run_finished", "summary": value.summary}
    if isinstance(value, ErrorMsg):
        return {"v": WIRE_VERSION, "type": "error", "code": value.code, "message": value.message}
    raise WireError(f"cannot serialize {type(value).__name__}")


def serialize(value) -> str:
    """Canonical single-line JSON for any Command or EventMsg."""
    return json.dumps(document(value), separators=(",", ":"), allow_nan=False)


def _require(doc: dict, key: str, kind, path: str):
    if key not in doc:
        raise WireError(f"schema error at {path}: required field missing")
    value = doc[key]
    if kind is int and isinstance(value, bool):
        raise WireError(f"schema error at {path}: expected an integer, got {value!r}")
    if not isinstance(value, kind):
        raise WireError(f"schema error at {path}: expected {kind.__name__}, got {value!r}")
    return value


def _check_fields(doc: dict, allowed: set[str]):
    for key in doc:
        if key not in allowed:
            raise WireError(f"schema error at {key}: unknown field")


def deserialize(text: str) -> Union[Command, EventMsg]:
    """Parse one canonical message; strict about version, type and fields."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise WireError(f"parse error at position {exc.pos}: {exc.msg}")
    if not isinstance(doc, dict):
        raise WireError("schema error at root: expected an object")
    version = _require(doc, "v", int, "v")
    if version != WIRE_VERSION:
        raise WireError(f"schema error at v: unsupported version {version}")
    kind = _require(doc, "type", str, "type")

    if kind == "configure":
        _check_fields(doc, {"v", "type", "config"})
        return Configure(config=_require(doc, "config", dict, "config"))
    if kind == "start":
        _check_fields(doc, {"v", "type"})
        return Start()
    if kind == "pause":
        _check_fields(doc, {"v", "type"})
        return Pause()
    if kind == "step":
        _check_fields(doc, {"v", "type", "n"})
        n = _require(doc, "n", int, "n")
        if n < 1:
            raise WireError(f"schema error at n: must be a positive integer, got {n}")
        return Step(n=n)
    if kind == "add_fish":
        _check_fields(doc, {"v", "type", "task_name", "field", "keywords"})
        task_name = _require(doc, "task_name", str, "task_name")
        if not task_name:
            raise WireError("schema error at task_name: must be non-empty")
        field_name = _require(doc, "field", str, "field")
        if not field_name:
            raise WireError("schema error at field: must be non-empty")
        keywords = _require(doc, "keywords", list, "keywords")
        for i, kw in enumerate(keywords):
            if not isinstance(kw, str) or not kw:
                raise WireError(f"schema error at keywords[{i}]: expected a non-empty string, got {kw!r}")
        return AddFish(task_name=task_name, field=field_name, keywords=tuple(keywords))
    if kind == "remove_fish":
        _check_fields(doc, {"v", "type", "fish_id"})
        fish_id = _require(doc, "fish_id", int, "fish_id")
        if fish_id < 0:
            raise WireError(f"schema error at fish_id: must be nonnegative, got {fish_id}")
        return RemoveFish(fish_id=fish_id)
    if kind == "set_params":
        _check_fields(doc, {"v", "type", "params"})
        params = _require(doc, "params", dict, "params")
        for key, value in params.items():
            if key not in SET_PARAM_KEYS:
                raise WireError(f"schema error at params.{key}: unknown parameter")
            if key == "vision_draw":
                if not isinstance(value, str):
                    raise WireError(f"schema error at params.{key}: expected a string, got {value!r}")
            elif isinstance(value, bool) or not isinstance(value, (int, float)):
                raise WireError(f"schema error at params.{key}: expected a number, got {value!r}")
        return SetParams(params=params)
    if kind == "snapshot_request":
        _check_fields(doc, {"v", "type"})
        return SnapshotRequest()
    if kind == "reset":
        _check_fields(doc, {"v", "type"})
        return Reset()
    if kind == "snapshot":
        _check_fields(doc, {"v", "type", "snapshot"})
        return SnapshotMsg(snapshot=_require(doc, "snapshot", dict, "snapshot"))
    if kind == "job_completed":
        _check_fields(doc, {"v", "type", "job"})
        return JobCompleted(job=_require(doc, "job", dict, "job"))
    if kind == "run_finished":
        _check_fields(doc, {"v", "type", "summary"})
        return RunFinished(summary=_require(doc, "summary", dict, "summary"))
    if kind == "error":
        _check_fields(doc, {"v", "type", "code", "message"})
        return ErrorMsg(code=_require(doc, "code", str, "code"),
                        message=_require(doc, "message", str, "message"))
    raise WireError(f"schema error at type: unknown message type {kind!r}")
