"""Session configuration document: parsing, validation, workload generation.

One JSON document configures a whole session: ``mode`` and ``seed`` at the
top level, a ``swarm`` section with the optimizer knobs, a ``grid`` section
with users, resources and the job template, a ``scheduling`` section with
canvas dispatch settings and an optional ``dispatcher`` section pointing at
the keyword field/item folders. Validation collects every problem with its
field path before failing.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import afsa
from .gridsim import GridConfigError, GridUser, Gridlet, MachineSpec, PESpec, POLICIES, ResourceSpec

__all__ = [
    "ConfigError",
    "SwarmSettings",
    "JobTemplate",
    "GridSettings",
    "SchedulingSettings",
    "DispatcherSettings",
    "SessionConfig",
    "parse_config",
    "load_config",
    "generate_jobs",
    "task_length",
]

MODES = ("optimizer", "canvas")

_MASK64 = (1 << 64) - 1
_JOBS_STREAM = 0x4A4F42
_TASK_STREAM = 0x544153


class ConfigError(ValueError):
    """Config document rejected; ``errors`` lists per-field diagnostics."""

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass(frozen=True)
class SwarmSettings:
    visual: float = 2.5
    step: float = 0.3
    try_number: int = 5
    delta: float = 0.618
    population: int = 20
    iterations: int = 200
    vision_draw: str = "symmetric"
    seed: Optional[int] = None


@dataclass(frozen=True)
class JobTemplate:
    """Constant job length, or a uniform range sampled per job."""

    length_mi: Optional[float] = None
    length_range: Optional[tuple[float, float]] = None


@dataclass(frozen=True)
class GridSettings:
    users: tuple[GridUser, ...]
    resources: tuple[ResourceSpec, ...]
    job_template: JobTemplate


@dataclass(frozen=True)
class SchedulingSettings:
    dispatch_epsilon: float = 1.0
    time_per_iteration: float = 1.0


@dataclass(frozen=True)
class DispatcherSettings:
    fields_root: str
    items_root: Optional[str] = None
    strict: bool = True


@dataclass(frozen=True)
class SessionConfig:
    mode: str
    seed: int
    swarm: SwarmSettings
    grid: GridSettings
    scheduling: SchedulingSettings
    dispatcher: Optional[DispatcherSettings]


class _Reader:
    """Path-tracking accessor over a raw JSON object."""

    def __init__(self, errors: list[str]):
        self.errors = errors

    def fail(self, path: str, message: str):
        self.errors.append(f"{path}: {message}")

    def check_keys(self, path: str, obj: dict, allowed: set[str]):
        for key in obj:
            if key not in allowed:
                self.fail(f"{path}.{key}" if path else key, "unknown field")

    def number(self, path: str, value, default=None, minimum=None, positive=False):
        if value is None:
            return default
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            self.fail(path, f"expected a number, got {value!r}")
            return default
        value = float(value)
        if positive and not value > 0:
            self.fail(path, f"must be positive, got {value}")
            return default
        if minimum is not None and value < minimum:
            self.fail(path, f"must be >= {minimum}, got {value}")
            return default
        return value

    def integer(self, path: str, value, default=None, minimum=None):
        if value is None:
            return default
        if isinstance(value, bool) or not isinstance(value, int):
            self.fail(path, f"expected an integer, got {value!r}")
            return default
        if minimum is not None and value < minimum:
            self.fail(path, f"must be >= {minimum}, got {value}")
            return default
        return value

    def string(self, path: str, value, default=None, choices=None):
        if value is None:
            return default
        if not isinstance(value, str):
            self.fail(path, f"expected a string, got {value!r}")
            return default
        if choices is not None and value not in choices:
            self.fail(path, f"must be one of {choices}, got {value!r}")
            return default
        return value


def _parse_swarm(reader: _Reader, raw: dict) -> SwarmSettings:
    reader.check_keys("swarm", raw, {"visual", "step", "try_number", "delta", "population",
                                     "iterations", "vision_draw", "seed"})
    settings = SwarmSettings(
        visual=reader.number("swarm.visual", raw.get("visual"), default=2.5, positive=True),
        step=reader.number("swarm.step", raw.get("step"), default=0.3, positive=True),
        try_number=reader.integer("swarm.try_number", raw.get("try_number"), default=5, minimum=1),
        delta=reader.number("swarm.delta", raw.get("delta"), default=0.618),
        population=reader.integer("swarm.population", raw.get("population"), default=20, minimum=1),
        iterations=reader.integer("swarm.iterations", raw.get("iterations"), default=200, minimum=1),
        vision_draw=reader.string("swarm.vision_draw", raw.get("vision_draw"), default="symmetric",
                                  choices=afsa.VISION_DRAW_MODES),
        seed=reader.integer("swarm.seed", raw.get("seed")),
    )
    if not reader.errors:
        try:
            # Full relational validation (step <= visual, delta range) on a probe box.
            afsa.SwarmParams(
                visual=settings.visual, step=settings.step, try_number=settings.try_number,
                delta=settings.delta, population_size=settings.population,
                max_iterations=settings.iterations, bounds=((0.0, 1.0),),
                vision_draw=settings.vision_draw,
            )
        except afsa.ParameterError as exc:
            reader.fail("swarm", str(exc))
    return settings


def _parse_template(reader: _Reader, raw) -> JobTemplate:
    if raw is None:
        return JobTemplate(length_mi=1000.0)
    if not isinstance(raw, dict):
        reader.fail("grid.job_template", f"expected an object, got {raw!r}")
        return JobTemplate(length_mi=1000.0)
    reader.check_keys("grid.job_template", raw, {"length_mi", "length_range"})
    if "length_mi" in raw and "length_range" in raw:
        reader.fail("grid.job_template", "length_mi and length_range are mutually exclusive")
        return JobTemplate(length_mi=1000.0)
    if "length_range" in raw:
        pair = raw["length_range"]
        if (not isinstance(pair, (list, tuple)) or len(pair) != 2
                or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in pair)):
            reader.fail("grid.job_template.length_range", f"expected [low, high], got {pair!r}")
            return JobTemplate(length_mi=1000.0)
        low, high = float(pair[0]), float(pair[1])
        if not 0 < low <= high:
            reader.fail("grid.job_template.length_range", f"must satisfy 0 < low <= high, got [{low}, {high}]")
        return JobTemplate(length_range=(low, high))
    length = reader.number("grid.job_template.length_mi", raw.get("length_mi"), default=1000.0, positive=True)
    return JobTemplate(length_mi=length)


def _parse_grid(reader: _Reader, raw) -> GridSettings:
    if not isinstance(raw, dict):
        reader.fail("grid", "section is required and must be an object")
        return GridSettings(users=(), resources=(), job_template=JobTemplate(length_mi=1000.0))
    reader.check_keys("grid", raw, {"users", "resources", "job_template"})
    users = []
    raw_users = raw.get("users", [])
    if not isinstance(raw_users, list):
        reader.fail("grid.users", f"expected a list, got {raw_users!r}")
        raw_users = []
    for i, entry in enumerate(raw_users):
        path = f"grid.users[{i}]"
        if not isinstance(entry, dict):
            reader.fail(path, f"expected an object, got {entry!r}")
            continue
        reader.check_keys(path, entry, {"name", "jobs"})
        name = reader.string(f"{path}.name", entry.get("name"), default=f"user{i}")
        jobs = reader.integer(f"{path}.jobs", entry.get("jobs"), default=0, minimum=0)
        users.append(GridUser(id=f"u{i}", name=name, job_count=jobs))
    resources = []
    raw_resources = raw.get("resources")
    if not isinstance(raw_resources, list) or not raw_resources:
        reader.fail("grid.resources", "at least one resource is required")
        raw_resources = []
    for i, entry in enumerate(raw_resources):
        path = f"grid.resources[{i}]"
        if not isinstance(entry, dict):
            reader.fail(path, f"expected an object, got {entry!r}")
            continue
        reader.check_keys(path, entry, {"name", "policy", "machines", "plane_position"})
        name = reader.string(f"{path}.name", entry.get("name"), default=f"resource{i}")
        policy = reader.string(f"{path}.policy", entry.get("policy"), default="space_shared", choices=POLICIES)
        machines = []
        raw_machines = entry.get("machines")
        if not isinstance(raw_machines, list) or not raw_machines:
            reader.fail(f"{path}.machines", "at least one machine is required")
            raw_machines = []
        for j, machine in enumerate(raw_machines):
            mpath = f"{path}.machines[{j}]"
            if not isinstance(machine, dict):
                reader.fail(mpath, f"expected an object, got {machine!r}")
                continue
            reader.check_keys(mpath, machine, {"pes"})
            pes = []
            raw_pes = machine.get("pes")
            if not isinstance(raw_pes, list) or not raw_pes:
                reader.fail(f"{mpath}.pes", "at least one PE is required")
                raw_pes = []
            for k, pe in enumerate(raw_pes):
                ppath = f"{mpath}.pes[{k}]"
                if not isinstance(pe, dict):
                    reader.fail(ppath, f"expected an object, got {pe!r}")
                    continue
                reader.check_keys(ppath, pe, {"rating"})
                rating = reader.number(f"{ppath}.rating", pe.get("rating"), positive=True)
                if rating is None and "rating" not in pe:
                    reader.fail(f"{ppath}.rating", "required field")
                if rating is not None:
                    pes.append(PESpec(rating=rating))
            if pes:
                machines.append(MachineSpec(pes=tuple(pes)))
        plane = entry.get("plane_position")
        plane_position = None
        if plane is not None:
            if (not isinstance(plane, (list, tuple)) or len(plane) != 2
                    or any(isinstance(v, bool) or not isinstance(v, int) or v < 0 for v in plane)):
                reader.fail(f"{path}.plane_position", f"expected [x, y] nonnegative integers, got {plane!r}")
            else:
                plane_position = (plane[0], plane[1])
        if machines:
            try:
                resources.append(ResourceSpec(id=f"r{i}", name=name, machines=tuple(machines),
                                              policy=policy, plane_position=plane_position))
            except GridConfigError as exc:
                reader.fail(path, str(exc))
    template = _parse_template(reader, raw.get("job_template"))
    return GridSettings(users=tuple(users), resources=tuple(resources), job_template=template)


def _parse_scheduling(reader: _Reader, raw) -> SchedulingSettings:
    if raw is None:
        return SchedulingSettings()
    if not isinstance(raw, dict):
        reader.fail("scheduling", f"expected an object, got {raw!r}")
        return SchedulingSettings()
    reader.check_keys("scheduling", raw, {"dispatch_epsilon", "time_per_iteration"})
    return SchedulingSettings(
        dispatch_epsilon=reader.number("scheduling.dispatch_epsilon", raw.get("dispatch_epsilon"),
                                       default=1.0, positive=True),
        time_per_iteration=reader.number("scheduling.time_per_iteration", raw.get("time_per_iteration"),
                                         default=1.0, positive=True),
    )


def _parse_dispatcher(reader: _Reader, raw) -> Optional[DispatcherSettings]:
    if raw is None:
        return None
    if not isinstance(raw, dict):
        reader.fail("dispatcher", f"expected an object, got {raw!r}")
        return None
    reader.check_keys("dispatcher", raw, {"fields_root", "items_root", "strict"})
    fields_root = reader.string("dispatcher.fields_root", raw.get("fields_root"))
    if fields_root is None:
        reader.fail("dispatcher.fields_root", "required field")
        return None
    strict = raw.get("strict", True)
    if not isinstance(strict, bool):
        reader.fail("dispatcher.strict", f"expected a boolean, got {strict!r}")
        strict = True
    return DispatcherSettings(
        fields_root=fields_root,
        items_root=reader.string("dispatcher.items_root", raw.get("items_root")),
        strict=strict,
    )


def parse_config(document: dict, seed_override: Optional[int] = None) -> SessionConfig:
    """Validate a raw config document; raises ConfigError listing every
    offending field."""
    errors: list[str] = []
    reader = _Reader(errors)
    if not isinstance(document, dict):
        raise ConfigError(["config: expected a JSON object"])
    reader.check_keys("", document, {"mode", "seed", "swarm", "grid", "scheduling", "dispatcher"})
    mode = reader.string("mode", document.get("mode"), default="optimizer", choices=MODES)
    seed = reader.integer("seed", document.get("seed"), default=0)
    raw_swarm = document.get("swarm", {})
    if not isinstance(raw_swarm, dict):
        reader.fail("swarm", f"expected an object, got {raw_swarm!r}")
        raw_swarm = {}
    swarm = _parse_swarm(reader, raw_swarm)
    grid = _parse_grid(reader, document.get("grid"))
    scheduling = _parse_scheduling(reader, document.get("scheduling"))
    dispatcher = _parse_dispatcher(reader, document.get("dispatcher"))
    if errors:
        raise ConfigError(errors)
    if seed_override is not None:
        seed = seed_override
    if swarm.seed is not None:
        seed = swarm.seed
    return SessionConfig(mode=mode, seed=seed, swarm=swarm, grid=grid,
                         scheduling=scheduling, dispatcher=dispatcher)


def load_config(path, seed_override: Optional[int] = None) -> SessionConfig:
    """Read and validate a config document from a JSON file."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        document = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([f"config: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}"])
    return parse_config(document, seed_override=seed_override)


def generate_jobs(grid: GridSettings, seed: int) -> list[Gridlet]:
    """Instantiate every configured user's jobs, deterministic in ``seed``."""
    rng = np.random.default_rng([seed & _MASK64, _JOBS_STREAM])
    jobs = []
    for user in grid.users:
        for index in range(user.job_count):
            if grid.job_template.length_range is not None:
                low, high = grid.job_template.length_range
                length = float(rng.uniform(low, high))
            else:
                length = float(grid.job_template.length_mi)
            jobs.append(Gridlet(id=f"{user.id}-j{index:03d}", owner=user.id, length=length))
    return jobs


def task_length(template: JobTemplate, seed: int, counter: int) -> float:
    """Length for an interactively added task; deterministic per counter."""
    if template.length_range is None:
        return float(template.length_mi)
    rng = np.random.default_rng([seed & _MASK64, _TASK_STREAM, counter])
    low, high = template.length_range
    return float(rng.uniform(low, high))
