"""Deterministic discrete-event grid simulator.

Resources contain machines, machines contain processing elements (PEs)
rated in MIPS; jobs (gridlets) carry a compute demand in millions of
instructions. A space-shared resource runs each job exclusively on its
fastest free PE and queues the rest FCFS; a time-shared resource splits
its total rating equally among all resident jobs (egalitarian processor
sharing). The engine pops events in (time, sequence) order, so identical
configurations and submissions replay identically.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Optional, Sequence

__all__ = [
    "GridConfigError",
    "SubmitError",
    "POLICIES",
    "PESpec",
    "MachineSpec",
    "ResourceSpec",
    "GridUser",
    "Gridlet",
    "JobStats",
    "SimState",
    "build_grid",
    "submit",
    "step_event",
    "advance_to",
    "run_until_idle",
    "pending_mi",
    "running_count",
    "stats_report",
]

POLICIES = ("space_shared", "time_shared")

JOB_ARRIVAL = "job_arrival"
JOB_COMPLETION = "job_completion"
RESCHEDULE = "reschedule"


class GridConfigError(ValueError):
    """Invalid grid topology: missing resources, bad ratings or policy."""


class SubmitError(ValueError):
    """Rejected submission: duplicate job id or unknown resource."""


@dataclass(frozen=True)
class PESpec:
    """One processing element and its MIPS rating."""

    rating: float

    def __post_init__(self):
        if not self.rating > 0:
            raise GridConfigError(f"PE rating must be positive, got {self.rating}")


@dataclass(frozen=True)
class MachineSpec:
    """A machine is a non-empty bundle of PEs, possibly heterogeneous."""

    pes: tuple[PESpec, ...]

    def __post_init__(self):
        if not self.pes:
            raise GridConfigError("machine must have at least one PE")


@dataclass(frozen=True)
class ResourceSpec:
    """A grid resource: machines plus the allocation policy that shares them."""

    id: str
    name: str
    machines: tuple[MachineSpec, ...]
    policy: str
    plane_position: Optional[tuple[int, int]] = None

    def __post_init__(self):
        if not self.machines:
            raise GridConfigError(f"resource '{self.name}' must have at least one machine")
        if self.policy not in POLICIES:
            raise GridConfigError(f"resource '{self.name}' policy must be one of {POLICIES}, got {self.policy!r}")

    @property
    def pe_ratings(self) -> list[float]:
        """All PE ratings, machine-major order."""
        return [pe.rating for machine in self.machines for pe in machine.pes]

    @property
    def total_rating(self) -> float:
        return sum(self.pe_ratings)


@dataclass(frozen=True)
class GridUser:
    """A job owner; job_count drives workload generation."""

    id: str
    name: str
    job_count: int

    def __post_init__(self):
        if self.job_count < 0:
            raise GridConfigError(f"user '{self.name}' job count must be nonnegative, got {self.job_count}")


@dataclass(frozen=True)
class Gridlet:
    """One job: a compute demand in MI plus its submission time."""

    id: str
    owner: str
    length: float
    submit_time: float = 0.0
    coordinates: Optional[tuple[int, int]] = None

    def __post_init__(self):
        if not self.length > 0:
            raise GridConfigError(f"job '{self.id}' length must be positive, got {self.length}")
        if self.submit_time < 0:
            raise GridConfigError(f"job '{self.id}' submit time must be nonnegative, got {self.submit_time}")


@dataclass(frozen=True)
class JobStats:
    """Per-job timing: waiting = start - submit, exec = finish - start."""

    job_id: str
    resource_id: str
    submit_time: float
    start_time: float
    finish_time: float
    waiting_time: float
    exec_time: float

    @classmethod
    def build(cls, job_id: str, resource_id: str, submit: float, start: float, finish: float) -> "JobStats":
        return cls(
            job_id=job_id,
            resource_id=resource_id,
            submit_time=submit,
            start_time=start,
            finish_time=finish,
            waiting_time=start - submit,
            exec_time=finish - start,
        )


@dataclass
class _Resident:
    """A job currently sharing a time-shared resource."""

    job: Gridlet
    remaining: float
    start: float


class _ResourceRuntime:
    """Mutable per-resource execution state."""

    def __init__(self, spec: ResourceSpec):
        self.spec = spec
        self.pe_ratings = spec.pe_ratings
        self.free_pes = set(range(len(self.pe_ratings)))
        self.running: dict[int, tuple[Gridlet, float]] = {}  # pe index -> (job, start)
        self.waiting: list[Gridlet] = []
        self.residents: dict[str, _Resident] = {}
        self.last_update = 0.0
        self.epoch = 0


@dataclass
class SimState:
    """Event clock, pending queue and per-resource runtimes."""

    clock: float = 0.0
    pending: list = field(default_factory=list)
    seq: int = 0
    specs: dict[str, ResourceSpec] = field(default_factory=dict)
    runtimes: dict[str, _ResourceRuntime] = field(default_factory=dict)
    jobs: dict[str, Gridlet] = field(default_factory=dict)
    targets: dict[str, str] = field(default_factory=dict)
    completed: list[JobStats] = field(default_factory=list)


def build_grid(resources: Sequence[ResourceSpec]) -> SimState:
    """Construct an idle simulation over validated resource specs."""
    specs = list(resources)
    if not specs:
        raise GridConfigError("grid needs at least one resource")
    state = SimState()
    for spec in specs:
        if spec.id in state.specs:
            raise GridConfigError(f"duplicate resource id '{spec.id}'")
        state.specs[spec.id] = spec
        state.runtimes[spec.id] = _ResourceRuntime(spec)
    return state


def _push(state: SimState, time: float, kind: str, payload: tuple) -> None:
    heapq.heappush(state.pending, (time, state.seq, kind, payload))
    state.seq += 1


def submit(state: SimState, job: Gridlet, resource_id: str) -> None:
    """Enqueue a job arrival at max(clock, submit_time); invalid
    submissions raise and leave the state untouched."""
    if job.id in state.jobs:
        raise SubmitError(f"duplicate job id '{job.id}'")
    if resource_id not in state.specs:
        raise SubmitError(f"unknown resource '{resource_id}'")
    state.jobs[job.id] = job
    state.targets[job.id] = resource_id
    _push(state, max(state.clock, job.submit_time), JOB_ARRIVAL, (job.id,))


def _fastest_free_pe(rt: _ResourceRuntime) -> int:
    return max(rt.free_pes, key=lambda i: (rt.pe_ratings[i], -i))


def _space_assign(state: SimState, rt: _ResourceRuntime, job: Gridlet) -> None:
    pe = _fastest_free_pe(rt)
    rt.free_pes.discard(pe)
    rt.running[pe] = (job, state.clock)
    finish = state.clock + job.length / rt.pe_ratings[pe]
    _push(state, finish, JOB_COMPLETION, (rt.spec.id, job.id, pe))


def _ts_progress(rt: _ResourceRuntime, now: float) -> None:
    dt = now - rt.last_update
    if dt > 0 and rt.residents:
        rate = rt.spec.total_rating / len(rt.residents)
        for resident in rt.residents.values():
            resident.remaining = max(0.0, resident.remaining - dt * rate)
    rt.last_update = now


def _ts_project(state: SimState, rt: _ResourceRuntime) -> None:
    """Re-project the earliest completion; older projections go stale."""
    rt.epoch += 1
    if not rt.residents:
        return
    finisher = min(rt.residents.values(), key=lambda r: (r.remaining, r.job.id))
    rate = rt.spec.total_rating / len(rt.residents)
    _push(state, state.clock + finisher.remaining / rate, JOB_COMPLETION,
          (rt.spec.id, finisher.job.id, rt.epoch))


def _handle_arrival(state: SimState, job_id: str) -> None:
    job = state.jobs[job_id]
    rt = state.runtimes[state.targets[job_id]]
    if rt.spec.policy == "space_shared":
        if rt.free_pes:
            _space_assign(state, rt, job)
        else:
            rt.waiting.append(job)
    else:
        _ts_progress(rt, state.clock)
        rt.residents[job.id] = _Resident(job=job, remaining=job.length, start=state.clock)
        _push(state, state.clock, RESCHEDULE, (rt.spec.id,))


def _handle_completion(state: SimState, resource_id: str, job_id: str, marker: int) -> None:
    rt = state.runtimes[resource_id]
    if rt.spec.policy == "space_shared":
        pe = marker
        job, start = rt.running.pop(pe)
        rt.free_pes.add(pe)
        state.completed.append(JobStats.build(job.id, resource_id, job.submit_time, start, state.clock))
        if rt.waiting:
            rt.waiting.sort(key=lambda j: (j.submit_time, j.id))
            _space_assign(state, rt, rt.waiting.pop(0))
    else:
        if marker != rt.epoch:
            return  # stale projection
        _ts_progress(rt, state.clock)
        resident = rt.residents.pop(job_id)
        state.completed.append(JobStats.build(job_id, resource_id, resident.job.submit_time,
                                              resident.start, state.clock))
        _push(state, state.clock, RESCHEDULE, (resource_id,))


def _handle_reschedule(state: SimState, resource_id: str) -> None:
    rt = state.runtimes[resource_id]
    _ts_progress(rt, state.clock)
    _ts_project(state, rt)


def step_event(state: SimState) -> bool:
    """Pop and apply the earliest pending event; False signals idle."""
    if not state.pending:
        return False
    time, _, kind, payload = heapq.heappop(state.pending)
    state.clock = max(state.clock, time)
    if kind == JOB_ARRIVAL:
        _handle_arrival(state, *payload)
    elif kind == JOB_COMPLETION:
        _handle_completion(state, *payload)
    elif kind == RESCHEDULE:
        _handle_reschedule(state, *payload)
    else:
        raise RuntimeError(f"unknown event kind {kind!r}")
    return True


def advance_to(state: SimState, time: float) -> list[JobStats]:
    """Process every event due up to ``time``, settle the clock there and
    return the jobs that completed along the way."""
    before = len(state.completed)
    while state.pending and state.pending[0][0] <= time:
        step_event(state)
    if time > state.clock:
        state.clock = time
    for rt in state.runtimes.values():
        if rt.spec.policy == "time_shared":
            _ts_progress(rt, state.clock)
    return state.completed[before:]


def run_until_idle(state: SimState) -> tuple[SimState, list[JobStats]]:
    """Drain the event queue; every submitted job lands in the stats."""
    while step_event(state):
        pass
    return state, list(state.completed)


def pending_mi(state: SimState, resource_id: str) -> float:
    """Unfinished work (MI) resident at or queued for a resource, at the
    current clock, computed without mutating run state."""
    rt = state.runtimes[resource_id]
    total = 0.0
    if rt.spec.policy == "space_shared":
        for pe, (job, start) in rt.running.items():
            total += max(0.0, job.length - (state.clock - start) * rt.pe_ratings[pe])
        total += sum(job.length for job in rt.waiting)
    else:
        if rt.residents:
            rate = rt.spec.total_rating / len(rt.residents)
            dt = max(0.0, state.clock - rt.last_update)
            for resident in rt.residents.values():
                total += max(0.0, resident.remaining - dt * rate)
    return total


def running_count(state: SimState, resource_id: str) -> int:
    rt = state.runtimes[resource_id]
    if rt.spec.policy == "space_shared":
        return len(rt.running)
    return len(rt.residents)


def _busy_time(rows: list[JobStats]) -> float:
    """Length of the union of [start, finish] intervals."""
    total = 0.0
    edge = float("-inf")
    for row in sorted(rows, key=lambda r: (r.start_time, r.finish_time)):
        lo = max(row.start_time, edge)
        if row.finish_time > lo:
            total += row.finish_time - lo
            edge = row.finish_time
    return total


def stats_report(stats: Sequence[JobStats]) -> tuple[str, str]:
    """Render the per-job table and the per-resource aggregates.

    Jobs: ``job_id,resource,submit,start,finish,waiting,exec`` sorted by
    job id, six decimal places. Resources: ``resource,jobs,busy_time,
    makespan`` where busy time is the non-idle wall-clock span and
    makespan is max finish minus min submit on that resource.
    """
    job_lines = ["job_id,resource,submit,start,finish,waiting,exec"]
    for row in sorted(stats, key=lambda r: r.job_id):
        job_lines.append(
            f"{row.job_id},{row.resource_id},{row.submit_time:.6f},{row.start_time:.6f},"
            f"{row.finish_time:.6f},{row.waiting_time:.6f},{row.exec_time:.6f}"
        )
    by_resource: dict[str, list[JobStats]] = {}
    for row in stats:
        by_resource.setdefault(row.resource_id, []).append(row)
    resource_lines = ["resource,jobs,busy_time,makespan"]
    for resource_id in sorted(by_resource):
        rows = by_resource[resource_id]
        makespan = max(r.finish_time for r in rows) - min(r.submit_time for r in rows)
        resource_lines.append(f"{resource_id},{len(rows)},{_busy_time(rows):.6f},{makespan:.6f}")
    return "\n".join(job_lines) + "\n", "\n".join(resource_lines) + "\n"
