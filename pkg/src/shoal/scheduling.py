"""Swarm-driven job scheduling.

Two operating modes bind the fish swarm to the grid:

* optimizer mode: each fish encodes an entire job-to-resource assignment
  (one coordinate per job, floored to a resource index) and the swarm
  minimizes the estimated makespan;
* canvas mode: each fish carries a single task and swims on the
  dispatcher's integer plane, drawn toward under-loaded resources; coming
  within an epsilon of a resource dispatches the task there.

A brute-force enumerator over small instances serves as the exact
reference the heuristic is measured against.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from . import afsa
from .gridsim import Gridlet, ResourceSpec

__all__ = [
    "SchedulingError",
    "ScheduleProblem",
    "Assignment",
    "CanvasFish",
    "OptimizeResult",
    "decode",
    "estimate_makespan",
    "brute_force_optimum",
    "assignment_objective",
    "default_swarm_params",
    "optimize",
    "canvas_objective",
    "canvas_objective_fn",
    "dispatch_on_convergence",
]

BRUTE_FORCE_LIMIT = 1 << 20

# Fish states on the canvas plane.
SWIMMING = "swimming"
DISPATCHED = "dispatched"
COMPLETED = "completed"


class SchedulingError(ValueError):
    """Invalid problem, oversized exhaustive search or missing placement."""


@dataclass(frozen=True)
class ScheduleProblem:
    """The jobs to place and the resources available to run them."""

    jobs: tuple[Gridlet, ...]
    resources: tuple[ResourceSpec, ...]

    def __post_init__(self):
        if not self.jobs:
            raise SchedulingError("problem needs at least one job")
        if not self.resources:
            raise SchedulingError("problem needs at least one resource")


@dataclass(frozen=True)
class Assignment:
    """One resource index per job, in problem job order."""

    mapping: tuple[int, ...]


@dataclass
class CanvasFish:
    """A task-carrying fish on the plane and its dispatch lifecycle."""

    fish: afsa.ArtificialFish
    state: str = SWIMMING
    dispatched_to: Optional[str] = None


@dataclass(frozen=True)
class OptimizeResult:
    assignment: Assignment
    makespan: float
    history: tuple[float, ...]


def decode(position: Sequence[float], resource_count: int) -> Assignment:
    """Map a continuous position onto the assignment lattice: clamp each
    coordinate to [0, M) and floor it."""
    top = resource_count - 1e-9
    mapping = []
    for value in position:
        clamped = min(max(float(value), 0.0), top)
        mapping.append(int(clamped))
    return Assignment(tuple(mapping))


def estimate_makespan(problem: ScheduleProblem, assignment: Assignment) -> float:
    """Max over resources of assigned work divided by total rating.

    Exact for single-PE space-shared resources; an analytic stand-in for
    the simulated makespan everywhere else.
    """
    loads = [0.0] * len(problem.resources)
    for job, resource_index in zip(problem.jobs, assignment.mapping):
        loads[resource_index] += job.length
    worst = 0.0
    for load, resource in zip(loads, problem.resources):
        finish = load / resource.total_rating
        if finish > worst:
            worst = finish
    return worst


def brute_force_optimum(problem: ScheduleProblem) -> tuple[Assignment, float]:
    """Exhaustively enumerate all assignments; returns the lexicographically
    smallest optimum. Guarded to at most 2**20 combinations."""
    n_jobs = len(problem.jobs)
    n_resources = len(problem.resources)
    if n_resources ** n_jobs > BRUTE_FORCE_LIMIT:
        raise SchedulingError(
            f"instance too large for exhaustive search: {n_resources}^{n_jobs} > {BRUTE_FORCE_LIMIT}"
        )
    best_mapping = None
    best_makespan = math.inf
    for mapping in itertools.product(range(n_resources), repeat=n_jobs):
        makespan = estimate_makespan(problem, Assignment(mapping))
        if makespan < best_makespan:
            best_makespan = makespan
            best_mapping = mapping
    return Assignment(best_mapping), best_makespan


def assignment_objective(problem: ScheduleProblem) -> afsa.Objective:
    """Fitness surface for optimizer mode: decoded estimated makespan."""
    resource_count = len(problem.resources)
    lengths = [job.length for job in problem.jobs]
    inverse_rating = [1.0 / resource.total_rating for resource in problem.resources]
    last = resource_count - 1

    def evaluate(position: np.ndarray) -> float:
        loads = [0.0] * resource_count
        for value, length in zip(position.tolist(), lengths):
            if value <= 0.0:
                index = 0
            elif value >= last:
                index = last
            else:
                index = int(value)
            loads[index] += length
        worst = 0.0
        for index in range(resource_count):
            finish = loads[index] * inverse_rating[index]
            if finish > worst:
                worst = finish
        return worst

    return afsa.Objective(dimension=len(problem.jobs), evaluate=evaluate)


def default_swarm_params(problem: ScheduleProblem, population: int = 20,
                         iterations: int = 100) -> afsa.SwarmParams:
    """Search-space-scaled defaults: perception spans the whole index range
    so prey acts as a near-global sampler on the flat plateaus the floor
    decoding creates."""
    resource_count = len(problem.resources)
    bounds = ((0.0, float(resource_count)),) * len(problem.jobs)
    return afsa.SwarmParams(
        visual=float(resource_count),
        step=max(1.0, resource_count / 2.0),
        try_number=5,
        delta=0.618,
        population_size=population,
        max_iterations=iterations,
        bounds=bounds,
        vision_draw="symmetric",
    )


def optimize(problem: ScheduleProblem, swarm_params: Optional[afsa.SwarmParams] = None,
             seed: int = 0) -> OptimizeResult:
    """Run the swarm over the assignment space and decode the bulletin best.

    ``swarm_params`` bounds are always replaced by the problem's own
    [0, resource_count] box; pass None for scaled defaults.
    """
    if swarm_params is None:
        swarm_params = default_swarm_params(problem)
    else:
        bounds = ((0.0, float(len(problem.resources))),) * len(problem.jobs)
        visual = swarm_params.visual
        step = min(swarm_params.step, visual)
        swarm_params = replace(swarm_params, bounds=bounds, visual=visual, step=step)
    objective = assignment_objective(problem)
    state = afsa.init_swarm(swarm_params, objective, seed)
    state, history = afsa.run(state, swarm_params, objective, swarm_params.max_iterations)
    assignment = decode(state.bulletin_position, len(problem.resources))
    # Report the canonical estimate of the decoded assignment so comparisons
    # against the exhaustive oracle use one arithmetic path.
    return OptimizeResult(assignment=assignment, makespan=estimate_makespan(problem, assignment),
                          history=tuple(history))


def canvas_objective(position: Sequence[float], resources: Sequence[ResourceSpec],
                     loads: dict[str, float]) -> float:
    """Distance to the nearest resource, inflated by that resource's load
    factor; low near idle resources, lowest at an idle one."""
    best = math.inf
    point = np.asarray(position, dtype=float)
    for resource in resources:
        if resource.plane_position is None:
            raise SchedulingError(f"resource '{resource.id}' has no plane position")
        anchor = np.asarray(resource.plane_position, dtype=float)
        pressure = 1.0 + loads.get(resource.id, 0.0) / resource.total_rating
        score = float(np.linalg.norm(point - anchor)) * pressure
        if score < best:
            best = score
    return best


def canvas_objective_fn(resources: Sequence[ResourceSpec], loads: dict[str, float]) -> afsa.Objective:
    frozen = dict(loads)
    resources = tuple(resources)
    return afsa.Objective(dimension=2, evaluate=lambda p: canvas_objective(p, resources, frozen))


def dispatch_on_convergence(canvas_fish: CanvasFish, resources: Sequence[ResourceSpec],
                            epsilon: float) -> Optional[str]:
    """Dispatch a swimming fish to the nearest resource strictly inside its
    epsilon ball (ties to the lowest resource id); None means keep swimming."""
    if canvas_fish.state != SWIMMING:
        return None
    position = canvas_fish.fish.position
    nearest = None
    nearest_distance = math.inf
    for resource in resources:
        if resource.plane_position is None:
            raise SchedulingError(f"resource '{resource.id}' has no plane position")
        distance = float(np.linalg.norm(position - np.asarray(resource.plane_position, dtype=float)))
        if distance < nearest_distance or (distance == nearest_distance and
                                           nearest is not None and resource.id < nearest):
            nearest = resource.id
            nearest_distance = distance
    if nearest is not None and nearest_distance < epsilon:
        canvas_fish.state = DISPATCHED
        canvas_fish.dispatched_to = nearest
        return nearest
    return None
