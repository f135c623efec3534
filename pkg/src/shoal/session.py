"""Live steering sessions over the swarm, the dispatcher and the grid.

A session owns one swarm plus one grid simulation and advances them one
iteration at a time; steering commands (add/remove fish, reconfigure,
start/pause/step) apply only at iteration boundaries so the random
substreams stay reproducible. Subscribers receive immutable snapshot and
job-completion events in application order; a recorded command log plus
the config and seed replays the whole session byte-for-byte.
"""

from __future__ import annotations

import dataclasses
import itertools
import json
import logging
import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from . import afsa, dispatcher, gridsim, scheduling, wire
from .config import (ConfigError, SessionConfig, SwarmSettings, generate_jobs,
                     parse_config, task_length)

__all__ = [
    "CommandError",
    "Subscription",
    "Session",
    "SessionManager",
    "ReplayResult",
    "replay",
    "simulated_makespan",
]

log = logging.getLogger(__name__)

SNAPSHOT_TAIL = 50
DEFAULT_PLANE_MAX = 31


class CommandError(ValueError):
    """Rejected command; the session state is unchanged."""

    def __init__(self, message: str, code: str = "invalid"):
        super().__init__(message)
        self.code = code


class Subscription:
    """Ordered event feed; adjacent snapshots coalesce unless disabled."""

    def __init__(self, coalesce: bool = True):
        self.coalesce = coalesce
        self.events: list = []
        self._wakeup = None  # asyncio.Event, created on first async consumer

    def push(self, event) -> None:
        if (self.coalesce and self.events and isinstance(event, wire.SnapshotMsg)
                and isinstance(self.events[-1], wire.SnapshotMsg)):
            self.events[-1] = event
        else:
            self.events.append(event)
        if self._wakeup is not None:
            self._wakeup.set()

    def drain(self) -> list:
        out, self.events = self.events, []
        return out

    async def next(self):
        """Await the next event; server-side push consumer."""
        import asyncio
        if self._wakeup is None:
            self._wakeup = asyncio.Event()
        while not self.events:
            self._wakeup.clear()
            await self._wakeup.wait()
        return self.events.pop(0)


def simulated_makespan(stats) -> Optional[float]:
    """Max over resources of (max finish - min submit); None without jobs."""
    by_resource: dict[str, list] = {}
    for row in stats:
        by_resource.setdefault(row.resource_id, []).append(row)
    if not by_resource:
        return None
    return max(max(r.finish_time for r in rows) - min(r.submit_time for r in rows)
               for rows in by_resource.values())


class Session:
    """One steerable swarm+grid run, reproducible from (config, seed, log)."""

    def __init__(self, session_id: str, config: SessionConfig):
        self.id = session_id
        self.config = config
        self.subscribers: list[Subscription] = []
        self.command_log: list[dict] = []
        self._build()

    # -- construction ---------------------------------------------------

    def _swarm_params(self, settings: SwarmSettings, bounds, population: int) -> afsa.SwarmParams:
        return afsa.SwarmParams(
            visual=settings.visual,
            step=min(settings.step, settings.visual),
            try_number=settings.try_number,
            delta=settings.delta,
            population_size=max(1, population),
            max_iterations=settings.iterations,
            bounds=bounds,
            vision_draw=settings.vision_draw,
        )

    def _build(self) -> None:
        config = self.config
        self.seed = config.seed
        self.mode = config.mode
        self.settings = config.swarm
        self.scheduling_settings = config.scheduling
        self.resources = config.grid.resources
        self.running = False
        self.finished = False
        self.clock = 0.0
        self.task_counter = 0
        self.history: list[float] = []
        self.fields: dict[str, dispatcher.KeywordField] = {}
        if config.dispatcher is not None:
            try:
                for field in dispatcher.load_fields(config.dispatcher.fields_root):
                    self.fields[field.name] = field
            except dispatcher.DispatcherError as exc:
                raise ConfigError([f"dispatcher.fields_root: {exc}"])
        self.grid = gridsim.build_grid(self.resources)
        jobs = generate_jobs(config.grid, self.seed)
        if self.mode == "optimizer":
            if not jobs:
                raise ConfigError(["grid.users: optimizer mode needs at least one configured job"])
            self.problem = scheduling.ScheduleProblem(jobs=tuple(jobs), resources=self.resources)
            bounds = ((0.0, float(len(self.resources))),) * len(jobs)
            self.swarm_params = self._swarm_params(self.settings, bounds, self.settings.population)
            self.objective = scheduling.assignment_objective(self.problem)
            self.swarm = afsa.init_swarm(self.swarm_params, self.objective, self.seed)
            self.canvas_fish: dict[int, scheduling.CanvasFish] = {}
            self.tasks: dict[str, gridsim.Gridlet] = {}
        else:
            for i, resource in enumerate(self.resources):
                if resource.plane_position is None:
                    raise ConfigError([f"grid.resources[{i}].plane_position: required in canvas mode"])
            bounds = self._plane_bounds()
            self.swarm_params = self._swarm_params(self.settings, bounds, max(1, len(jobs)))
            self.problem = None
            self.objective = self._canvas_objective()
            self.swarm = afsa.SwarmState(
                fish=[], bulletin_position=np.zeros(2), bulletin_fitness=math.inf,
                iteration=0, seed=self.seed, next_fish_id=0,
            )
            self.canvas_fish = {}
            self.tasks = {}
            for job in jobs:
                self.tasks[job.id] = job
                fish = afsa.add_fish(self.swarm, self.swarm_params, self.objective, task_ref=job.id)
                self.canvas_fish[fish.id] = scheduling.CanvasFish(fish=fish)
            self.swarm_params = replace(self.swarm_params,
                                        population_size=max(1, len(self.swarm.fish)))

    def _plane_bounds(self):
        max_x, max_y = DEFAULT_PLANE_MAX, DEFAULT_PLANE_MAX
        for field in self.fields.values():
            size_x, size_y = dispatcher.plane_size(field)
            max_x = max(max_x, size_x - 1)
            max_y = max(max_y, size_y - 1)
        for resource in self.resources:
            if resource.plane_position is not None:
                max_x = max(max_x, resource.plane_position[0])
                max_y = max(max_y, resource.plane_position[1])
        return ((0.0, float(max_x)), (0.0, float(max_y)))

    def _canvas_objective(self) -> afsa.Objective:
        loads = {r.id: gridsim.pending_mi(self.grid, r.id) for r in self.resources}
        return scheduling.canvas_objective_fn(self.resources, loads)

    # -- iteration ------------------------------------------------------

    def step(self, n: int) -> None:
        for _ in range(n):
            self._step_one()

    def _step_one(self) -> None:
        if self.mode == "optimizer":
            self._step_optimizer()
        else:
            self._step_canvas()

    def _step_optimizer(self) -> None:
        if self.finished:
            raise CommandError("run already finished; reset or reconfigure to run again", code="finished")
        afsa.step_iteration(self.swarm, self.swarm_params, self.objective)
        self.history.append(self.swarm.bulletin_fitness)
        finishing = self.swarm.iteration >= self.swarm_params.max_iterations
        if finishing:
            self._finish_optimizer()
        self._publish(wire.SnapshotMsg(snapshot=self.snapshot()))
        if finishing:
            self._publish(wire.RunFinished(summary=self._summary()))

    def _finish_optimizer(self) -> None:
        assignment = scheduling.decode(self.swarm.bulletin_position, len(self.resources))
        self.grid = gridsim.build_grid(self.resources)
        for job, index in zip(self.problem.jobs, assignment.mapping):
            gridsim.submit(self.grid, job, self.resources[index].id)
        _, stats = gridsim.run_until_idle(self.grid)
        self.clock = self.grid.clock
        for row in stats:
            self._publish(wire.JobCompleted(job=_job_doc(row)))
        self.final_assignment = assignment
        self.finished = True
        log.info("session %s finished: estimated makespan %.6f, simulated %.6f",
                 self.id, self.swarm.bulletin_fitness, simulated_makespan(stats) or 0.0)

    def _step_canvas(self) -> None:
        self.objective = self._canvas_objective()
        if self.swarm.fish:
            afsa.reevaluate(self.swarm, self.objective)
            afsa.step_iteration(self.swarm, self.swarm_params, self.objective)
        else:
            self.swarm.iteration += 1
        self.clock = self.swarm.iteration * self.scheduling_settings.time_per_iteration
        for fish_id in sorted(fid for fid, cf in self.canvas_fish.items()
                              if cf.state == scheduling.SWIMMING):
            cf = self.canvas_fish[fish_id]
            resource_id = scheduling.dispatch_on_convergence(
                cf, self.resources, self.scheduling_settings.dispatch_epsilon)
            if resource_id is not None:
                afsa.remove_fish(self.swarm, fish_id)
                job = self.tasks[cf.fish.task_ref]
                gridsim.submit(self.grid, dataclasses.replace(job, submit_time=self.clock), resource_id)
                log.debug("session %s: fish %d dispatched task %s to %s at t=%.3f",
                          self.id, fish_id, job.id, resource_id, self.clock)
        self.swarm_params = replace(self.swarm_params,
                                    population_size=max(1, len(self.swarm.fish)))
        for row in gridsim.advance_to(self.grid, self.clock):
            for cf in self.canvas_fish.values():
                if cf.fish.task_ref == row.job_id:
                    cf.state = scheduling.COMPLETED
            self._publish(wire.JobCompleted(job=_job_doc(row)))
        self._publish(wire.SnapshotMsg(snapshot=self.snapshot()))
        if (not self.finished and self.canvas_fish
                and all(cf.state == scheduling.COMPLETED for cf in self.canvas_fish.values())
                and not self.grid.pending):
            self.finished = True
            self.running = False
            self._publish(wire.RunFinished(summary=self._summary()))

    def _summary(self) -> dict:
        stats = self.grid.completed
        makespan = simulated_makespan(stats)
        summary = {
            "iterations": self.swarm.iteration,
            "jobs_completed": len(stats),
            "simulated_makespan": makespan,
        }
        if self.mode == "optimizer":
            summary["estimated_makespan"] = self.swarm.bulletin_fitness
        return summary

    # -- commands -------------------------------------------------------

    def apply(self, command: wire.Command) -> dict:
        """Apply one steering command atomically; errors leave state as-is."""
        at_iteration = self.swarm.iteration
        name = type(command).__name__
        if isinstance(command, wire.Configure):
            self.config = parse_config(command.config)
            self._build()
        elif isinstance(command, wire.Start):
            if not self.finished:
                self.running = True
        elif isinstance(command, wire.Pause):
            self.running = False
        elif isinstance(command, wire.Step):
            self.step(command.n)
        elif isinstance(command, wire.AddFish):
            self._add_fish(command)
        elif isinstance(command, wire.RemoveFish):
            self._remove_fish(command.fish_id)
        elif isinstance(command, wire.SetParams):
            self._set_params(command.params)
        elif isinstance(command, wire.SnapshotRequest):
            self._publish(wire.SnapshotMsg(snapshot=self.snapshot()))
        elif isinstance(command, wire.Reset):
            self._build()
        else:
            raise CommandError(f"unsupported command {name}")
        self.command_log.append({"at_iteration": at_iteration, "command": wire.document(command)})
        return {"v": wire.WIRE_VERSION, "type": "ack", "command": wire.document(command)["type"],
                "session_id": self.id, "iteration": self.swarm.iteration}

    def _add_fish(self, command: wire.AddFish) -> None:
        if self.mode == "optimizer":
            fish = afsa.add_fish(self.swarm, self.swarm_params, self.objective,
                                 task_ref=command.task_name)
            self.swarm_params = replace(self.swarm_params, population_size=len(self.swarm.fish))
            log.debug("session %s: added candidate fish %d", self.id, fish.id)
            return
        if not self.fields:
            raise CommandError("no dispatcher fields configured for this session")
        field = self.fields.get(command.field)
        if field is None:
            raise CommandError(f"unknown field '{command.field}'", code="unknown_field")
        if command.task_name in self.tasks:
            raise CommandError(f"duplicate task name '{command.task_name}'")
        strict = self.config.dispatcher.strict if self.config.dispatcher else True
        try:
            item = dispatcher.make_item(field, command.task_name, command.keywords, strict=strict)
            coords = dispatcher.coordinates(field, item)
        except dispatcher.DispatcherError as exc:
            raise CommandError(str(exc), code="unknown_keyword")
        length = task_length(self.config.grid.job_template, self.seed, self.task_counter)
        self.task_counter += 1
        job = gridsim.Gridlet(id=command.task_name, owner="interactive", length=length,
                              coordinates=(coords.x, coords.y))
        self.tasks[job.id] = job
        objective = self._canvas_objective()
        fish = afsa.add_fish(self.swarm, self.swarm_params, objective,
                             position=(float(coords.x), float(coords.y)), task_ref=job.id)
        self.canvas_fish[fish.id] = scheduling.CanvasFish(fish=fish)
        self.swarm_params = replace(self.swarm_params, population_size=len(self.swarm.fish))
        self.finished = False
        log.debug("session %s: added fish %d carrying task %s at (%d, %d)",
                  self.id, fish.id, job.id, coords.x, coords.y)

    def _remove_fish(self, fish_id: int) -> None:
        if self.mode == "canvas":
            cf = self.canvas_fish.get(fish_id)
            if cf is None:
                raise CommandError(f"unknown fish id {fish_id}", code="unknown_fish")
            if cf.state != scheduling.SWIMMING:
                raise CommandError(
                    f"fish {fish_id} was dispatched; its job already entered the grid",
                    code="fish_dispatched")
            afsa.remove_fish(self.swarm, fish_id)
            del self.canvas_fish[fish_id]
            self.tasks.pop(cf.fish.task_ref, None)
            self.swarm_params = replace(self.swarm_params,
                                        population_size=max(1, len(self.swarm.fish)))
            return
        if len(self.swarm.fish) <= 1:
            raise CommandError("cannot remove the last fish")
        try:
            afsa.remove_fish(self.swarm, fish_id)
        except KeyError:
            raise CommandError(f"unknown fish id {fish_id}", code="unknown_fish")
        self.swarm_params = replace(self.swarm_params, population_size=len(self.swarm.fish))

    def _set_params(self, overrides: dict) -> None:
        settings = self.settings
        fields = {}
        for key in ("visual", "step", "delta"):
            if key in overrides:
                fields[key] = float(overrides[key])
        for key in ("try_number", "iterations", "population"):
            if key in overrides:
                fields[key] = int(overrides[key])
        if "vision_draw" in overrides:
            fields["vision_draw"] = overrides["vision_draw"]
        new_settings = replace(settings, **fields)
        try:
            new_params = self._swarm_params(new_settings, self.swarm_params.bounds,
                                            len(self.swarm.fish) or new_settings.population)
        except afsa.ParameterError as exc:
            raise CommandError(str(exc))
        if "population" in fields and self.mode == "canvas":
            raise CommandError("population cannot be set in canvas mode; add or remove fish instead")
        if "dispatch_epsilon" in overrides:
            self.scheduling_settings = replace(self.scheduling_settings,
                                               dispatch_epsilon=float(overrides["dispatch_epsilon"]))
        self.settings = new_settings
        self.swarm_params = new_params
        if self.mode == "optimizer":
            target = new_settings.population if "population" in fields else len(self.swarm.fish)
            while len(self.swarm.fish) < target:
                afsa.add_fish(self.swarm, self.swarm_params, self.objective)
            while len(self.swarm.fish) > max(1, target):
                victim = max(f.id for f in self.swarm.fish)
                afsa.remove_fish(self.swarm, victim)
            self.swarm_params = replace(self.swarm_params, population_size=len(self.swarm.fish))

    # -- snapshots ------------------------------------------------------

    def snapshot(self) -> dict:
        """Immutable full view of the session at the current iteration."""
        fish_entries = []
        if self.mode == "canvas":
            for fish_id in sorted(self.canvas_fish):
                cf = self.canvas_fish[fish_id]
                fish_entries.append(_fish_doc(cf.fish, cf.state))
        else:
            for fish in sorted(self.swarm.fish, key=lambda f: f.id):
                fish_entries.append(_fish_doc(fish, scheduling.SWIMMING))
        resource_entries = []
        for resource in self.resources:
            resource_entries.append({
                "id": resource.id,
                "name": resource.name,
                "plane_position": list(resource.plane_position) if resource.plane_position else None,
                "policy": resource.policy,
                "running": gridsim.running_count(self.grid, resource.id),
                "queued_mi": gridsim.pending_mi(self.grid, resource.id),
            })
        bulletin = None
        if math.isfinite(self.swarm.bulletin_fitness):
            bulletin = {
                "position": [float(v) for v in self.swarm.bulletin_position],
                "fitness": self.swarm.bulletin_fitness,
            }
        return {
            "v": wire.WIRE_VERSION,
            "session_id": self.id,
            "mode": self.mode,
            "iteration": self.swarm.iteration,
            "sim_clock": self.clock,
            "running": self.running,
            "fish": fish_entries,
            "resources": resource_entries,
            "bulletin": bulletin,
            "completed": [_job_doc(row) for row in self.grid.completed[-SNAPSHOT_TAIL:]],
        }

    # -- events ---------------------------------------------------------

    def subscribe(self, coalesce: bool = True) -> Subscription:
        subscription = Subscription(coalesce=coalesce)
        self.subscribers.append(subscription)
        subscription.push(wire.SnapshotMsg(snapshot=self.snapshot()))
        return subscription

    def unsubscribe(self, subscription: Subscription) -> None:
        if subscription in self.subscribers:
            self.subscribers.remove(subscription)

    def _publish(self, event) -> None:
        for subscription in self.subscribers:
            subscription.push(event)


def _fish_doc(fish: afsa.ArtificialFish, state: str) -> dict:
    return {
        "id": fish.id,
        "position": [float(v) for v in fish.position],
        "fitness": fish.fitness,
        "task_ref": fish.task_ref,
        "state": state,
    }


def _job_doc(row: gridsim.JobStats) -> dict:
    return {
        "job_id": row.job_id,
        "resource": row.resource_id,
        "submit": row.submit_time,
        "start": row.start_time,
        "finish": row.finish_time,
        "waiting": row.waiting_time,
        "exec": row.exec_time,
    }


class SessionManager:
    """Owns live sessions; ids are unique for the manager's lifetime."""

    def __init__(self):
        self.sessions: dict[str, Session] = {}
        self._ids = itertools.count(1)

    def create_session(self, document: dict, seed: Optional[int] = None) -> str:
        config = parse_config(document, seed_override=seed)
        session_id = f"s{next(self._ids)}"
        self.sessions[session_id] = Session(session_id, config)
        log.info("created session %s (mode=%s, seed=%d)", session_id, config.mode, config.seed)
        return session_id

    def get(self, session_id: str) -> Session:
        session = self.sessions.get(session_id)
        if session is None:
            raise CommandError(f"unknown session '{session_id}'", code="unknown_session")
        return session

    def apply_command(self, session_id: str, command: wire.Command) -> dict:
        return self.get(session_id).apply(command)

    def subscribe(self, session_id: str, coalesce: bool = True) -> Subscription:
        return self.get(session_id).subscribe(coalesce=coalesce)


@dataclass(frozen=True)
class ReplayResult:
    snapshot_stream: str
    jobs_csv: str
    resources_csv: str


def replay(document: dict, seed: Optional[int], command_log: list[dict], iterations: int) -> ReplayResult:
    """Re-execute a recorded session: same config, seed and command log at
    the same iteration boundaries reproduce the snapshot stream and stats
    byte-for-byte."""
    manager = SessionManager()
    session = manager.get(manager.create_session(document, seed))
    subscription = session.subscribe(coalesce=False)
    pending = sorted(command_log, key=lambda entry: entry["at_iteration"])
    cursor = 0
    while session.swarm.iteration < iterations:
        while cursor < len(pending) and pending[cursor]["at_iteration"] <= session.swarm.iteration:
            session.apply(_command_from_doc(pending[cursor]["command"]))
            cursor += 1
        session.step(1)
    while cursor < len(pending):
        session.apply(_command_from_doc(pending[cursor]["command"]))
        cursor += 1
    stream = "".join(wire.serialize(event) + "\n" for event in subscription.drain())
    jobs_csv, resources_csv = gridsim.stats_report(session.grid.completed)
    return ReplayResult(snapshot_stream=stream, jobs_csv=jobs_csv, resources_csv=resources_csv)


def _command_from_doc(doc: dict) -> wire.Command:
    return wire.deserialize(json.dumps(doc))
