"""Artificial fish swarm optimizer.

A population of "fish" searches a box-bounded real vector space for the
minimum of an objective. Each fish perceives candidates and neighbors
inside a radius (``visual``), moves at most ``step`` per update, and picks
its next position through three behaviors: prey (local retry search),
swarm (move to the neighborhood center when it improves and is not
crowded) and follow (move toward the best neighbor under the same gates),
all falling back to a bounded random move. A bulletin board remembers the
best solution ever committed.

Every random draw comes from a counter-based substream keyed by
``(seed, iteration, fish id, behavior tag)``, so runs are bit-reproducible
and the swarm/follow candidate evaluations never perturb each other.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional

import math

import numpy as np

__all__ = [
    "ParameterError",
    "SwarmParams",
    "ArtificialFish",
    "Objective",
    "SwarmState",
    "init_swarm",
    "candidate_in_vision",
    "move_toward",
    "neighbors",
    "behavior_prey",
    "behavior_swarm",
    "behavior_follow",
    "behavior_move",
    "step_iteration",
    "run",
    "add_fish",
    "remove_fish",
    "reevaluate",
    "state_to_dict",
    "history_csv",
    "sphere",
]

VISION_DRAW_MODES = ("symmetric", "literal")

# Distance below which a move target counts as "already there".
DEGENERATE_DISTANCE = 1e-12

# Behavior tags keying the random substreams.
_TAG_INIT = 0
_TAG_SWARM = 1
_TAG_FOLLOW = 2
_TAG_SPAWN = 3

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_INV64 = 2.0 ** -64


class ParameterError(ValueError):
    """Invalid swarm parameters, bounds or objective wiring."""


def _mix64(z: int) -> int:
    """One splitmix64 output step; bijective avalanche over 64 bits."""
    z = (z + _GOLDEN) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


class Substream:
    """Counter-based uniform source, cheap to key and platform-independent.

    Exposes the ``uniform(low, high, size)`` subset of the numpy Generator
    API the swarm draws through, so tests can inject fixed draws with the
    same shape of stub.
    """

    __slots__ = ("state",)

    def __init__(self, state: int):
        self.state = state & _MASK64

    def _next(self) -> int:
        self.state = (self.state + _GOLDEN) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def uniform(self, low=0.0, high=1.0, size=None):
        if size is None:
            return low + (high - low) * (self._next() * _INV64)
        if isinstance(size, int) and type(low) is float and type(high) is float:
            span = (high - low) * _INV64
            return np.array([low + span * self._next() for _ in range(size)])
        shape = size if isinstance(size, tuple) else (int(size),)
        count = int(np.prod(shape))
        draws = np.array([self._next() for _ in range(count)], dtype=float).reshape(shape) * _INV64
        return np.asarray(low, dtype=float) + (np.asarray(high, dtype=float) - np.asarray(low, dtype=float)) * draws


def _substream(seed: int, iteration: int, fish_id: int, tag: int) -> Substream:
    """Deterministic per-(iteration, fish, behavior) random source.

    The packing keeps substreams disjoint for iterations < 2**40 and fish
    ids < 2**16; seeds are taken modulo 2**64. Forked substreams never
    share state, so evaluating one behavior cannot perturb another.
    """
    packed = ((iteration & 0xFFFFFFFFFF) << 24) | ((fish_id & 0xFFFF) << 8) | (tag & 0xFF)
    return Substream(_mix64(_mix64(seed & _MASK64) ^ packed))


@dataclass(frozen=True)
class SwarmParams:
    """Swarm tuning: perception radius, step length, prey retries, crowd
    factor, population sizing and per-dimension closed bounds."""

    visual: float
    step: float
    try_number: int
    delta: float
    population_size: int
    max_iterations: int
    bounds: tuple[tuple[float, float], ...]
    vision_draw: str = "symmetric"

    def __post_init__(self):
        object.__setattr__(self, "bounds", tuple((float(lo), float(hi)) for lo, hi in self.bounds))
        if not self.visual > 0:
            raise ParameterError(f"visual must be positive, got {self.visual}")
        if not self.step > 0:
            raise ParameterError(f"step must be positive, got {self.step}")
        if self.step > self.visual:
            raise ParameterError(f"step must not exceed visual, got step={self.step} visual={self.visual}")
        if not 0.0 < self.delta < 1.0:
            raise ParameterError(f"delta out of (0,1): {self.delta}")
        if int(self.try_number) < 1:
            raise ParameterError(f"try_number must be a positive integer, got {self.try_number}")
        if int(self.population_size) < 1:
            raise ParameterError(f"population_size must be a positive integer, got {self.population_size}")
        if int(self.max_iterations) < 1:
            raise ParameterError(f"max_iterations must be a positive integer, got {self.max_iterations}")
        if not self.bounds:
            raise ParameterError("bounds must cover at least one dimension")
        for i, (lo, hi) in enumerate(self.bounds):
            if not (math.isfinite(lo) and math.isfinite(hi)):
                raise ParameterError(f"bounds[{i}] must be finite, got [{lo}, {hi}]")
            if not lo < hi:
                raise ParameterError(f"bounds[{i}] must satisfy lo < hi, got [{lo}, {hi}]")
        if self.vision_draw not in VISION_DRAW_MODES:
            raise ParameterError(f"vision_draw must be one of {VISION_DRAW_MODES}, got {self.vision_draw!r}")

    @property
    def dimension(self) -> int:
        return len(self.bounds)

    @cached_property
    def lower(self) -> np.ndarray:
        return np.array([lo for lo, _ in self.bounds], dtype=float)

    @cached_property
    def upper(self) -> np.ndarray:
        return np.array([hi for _, hi in self.bounds], dtype=float)


@dataclass
class ArtificialFish:
    """One candidate solution: a position, its cached fitness and an
    optional task the fish carries."""

    id: int
    position: np.ndarray
    fitness: float
    task_ref: Optional[str] = None


@dataclass(frozen=True)
class Objective:
    """Minimization target over real vectors of a fixed dimension."""

    dimension: int
    evaluate: Callable[[np.ndarray], float]


def sphere(dimension: int) -> Objective:
    """Sum-of-squares benchmark surface, minimum 0 at the origin."""
    return Objective(dimension, lambda p: float(np.dot(p, p)))


@dataclass
class SwarmState:
    """Live swarm: the fish, the bulletin-board best, the iteration count
    and the seed every substream derives from."""

    fish: list[ArtificialFish]
    bulletin_position: np.ndarray
    bulletin_fitness: float
    iteration: int
    seed: int
    next_fish_id: int


def _clamp(position: np.ndarray, params: SwarmParams) -> np.ndarray:
    return np.minimum(np.maximum(position, params.lower), params.upper)


def init_swarm(params: SwarmParams, objective: Objective, seed: int) -> SwarmState:
    """Place ``population_size`` fish uniformly inside the bounds and seed
    the bulletin with the best of them. Fully determined by ``seed``."""
    if objective.dimension != params.dimension:
        raise ParameterError(
            f"objective dimension {objective.dimension} does not match bounds dimension {params.dimension}"
        )
    rng = _substream(seed, 0, 0, _TAG_INIT)
    positions = rng.uniform(params.lower, params.upper, (params.population_size, params.dimension))
    fish = []
    for i in range(params.population_size):
        position = positions[i].copy()
        fish.append(ArtificialFish(id=i, position=position, fitness=objective.evaluate(position)))
    best = min(fish, key=lambda f: (f.fitness, f.id))
    return SwarmState(
        fish=fish,
        bulletin_position=best.position.copy(),
        bulletin_fitness=best.fitness,
        iteration=0,
        seed=seed,
        next_fish_id=params.population_size,
    )


def candidate_in_vision(fish: ArtificialFish, params: SwarmParams, rng) -> np.ndarray:
    """Draw a position within the fish's perception radius, clamped to
    bounds.

    The default symmetric mode scales per-dimension draws from [-1, 1];
    ``vision_draw="literal"`` uses one-sided [0, 1] draws instead.
    """
    if params.vision_draw == "literal":
        scale = rng.uniform(0.0, 1.0, params.dimension)
    else:
        scale = rng.uniform(-1.0, 1.0, params.dimension)
    return _clamp(fish.position + params.visual * np.asarray(scale, dtype=float), params)


def move_toward(fish: ArtificialFish, target, params: SwarmParams, rng) -> np.ndarray:
    """Advance the fish toward ``target`` by a random fraction of ``step``
    along the unit direction, clamped to bounds.

    A target closer than ``DEGENERATE_DISTANCE`` returns the position
    unchanged: the fish is already there, not an error.
    """
    offset = np.asarray(target, dtype=float) - fish.position
    distance = math.sqrt(float(offset @ offset))
    if distance < DEGENERATE_DISTANCE:
        return fish.position.copy()
    fraction = float(rng.uniform(0.0, 1.0))
    return _clamp(fish.position + offset * (params.step * fraction / distance), params)


def _near(fish: ArtificialFish, state: SwarmState, params: SwarmParams):
    """Neighbor fish strictly inside the perception radius, plus the stacked
    matrix of their positions (None when there are none)."""
    others = [other for other in state.fish if other.id != fish.id]
    if not others:
        return [], None
    matrix = np.stack([other.position for other in others])
    diff = matrix - fish.position
    squared = np.einsum("ij,ij->i", diff, diff)
    mask = squared < params.visual * params.visual
    if not mask.any():
        return [], None
    near = [other for other, keep in zip(others, mask) if keep]
    return near, matrix[mask]


def neighbors(fish: ArtificialFish, state: SwarmState, params: SwarmParams) -> list[ArtificialFish]:
    """All other fish strictly closer than ``visual``."""
    return _near(fish, state, params)[0]


def behavior_prey(fish: ArtificialFish, state: SwarmState, params: SwarmParams,
                  objective: Objective, rng) -> np.ndarray:
    """Retry up to ``try_number`` vision candidates; move toward the first
    strict improvement, else random-walk via :func:`behavior_move`."""
    for _ in range(params.try_number):
        candidate = candidate_in_vision(fish, params, rng)
        if objective.evaluate(candidate) < fish.fitness:
            return move_toward(fish, candidate, params, rng)
    return behavior_move(fish, state, params, rng)


def behavior_move(fish: ArtificialFish, state: SwarmState, params: SwarmParams, rng) -> np.ndarray:
    """Random move of at most ``step`` per coordinate, clamped to bounds."""
    u = np.asarray(rng.uniform(-1.0, 1.0, params.dimension), dtype=float)
    return _clamp(fish.position + params.step * u, params)


def _swarm_step(fish, state, params, objective, rng, near, matrix) -> np.ndarray:
    if not near:
        return behavior_prey(fish, state, params, objective, rng)
    center = matrix.mean(axis=0)
    center_fitness = objective.evaluate(center)
    if center_fitness < fish.fitness and len(near) / params.population_size <= params.delta:
        return move_toward(fish, center, params, rng)
    return behavior_prey(fish, state, params, objective, rng)


def _follow_step(fish, state, params, objective, rng, near) -> np.ndarray:
    if not near:
        return behavior_prey(fish, state, params, objective, rng)
    leader = min(near, key=lambda other: (other.fitness, other.id))
    if leader.fitness < fish.fitness and len(near) / params.population_size <= params.delta:
        return move_toward(fish, leader.position, params, rng)
    return behavior_prey(fish, state, params, objective, rng)


def behavior_swarm(fish: ArtificialFish, state: SwarmState, params: SwarmParams,
                   objective: Objective, rng) -> np.ndarray:
    """Move toward the neighborhood center when it improves on the fish and
    the neighborhood is not crowded; otherwise prey."""
    near, matrix = _near(fish, state, params)
    return _swarm_step(fish, state, params, objective, rng, near, matrix)


def behavior_follow(fish: ArtificialFish, state: SwarmState, params: SwarmParams,
                    objective: Objective, rng) -> np.ndarray:
    """Move toward the fittest neighbor (ties broken by lowest id) when it
    improves on the fish and is not crowded; otherwise prey."""
    near, _ = _near(fish, state, params)
    return _follow_step(fish, state, params, objective, rng, near)


def step_iteration(state: SwarmState, params: SwarmParams, objective: Objective) -> SwarmState:
    """Advance every fish once, in id order.

    Each fish evaluates a swarm candidate and a follow candidate on
    independent substreams, commits the better one (ties favor follow),
    and the bulletin updates from committed fitness only.
    """
    for fish in sorted(state.fish, key=lambda f: f.id):
        rng_swarm = _substream(state.seed, state.iteration, fish.id, _TAG_SWARM)
        rng_follow = _substream(state.seed, state.iteration, fish.id, _TAG_FOLLOW)
        # The fish has not moved between the two forks, so they share one
        # neighbor query; each fork still draws from its own substream.
        near, matrix = _near(fish, state, params)
        candidate_swarm = _swarm_step(fish, state, params, objective, rng_swarm, near, matrix)
        candidate_follow = _follow_step(fish, state, params, objective, rng_follow, near)
        fitness_swarm = objective.evaluate(candidate_swarm)
        fitness_follow = objective.evaluate(candidate_follow)
        if fitness_swarm < fitness_follow:
            fish.position, fish.fitness = candidate_swarm, fitness_swarm
        else:
            fish.position, fish.fitness = candidate_follow, fitness_follow
        if fish.fitness < state.bulletin_fitness:
            state.bulletin_fitness = fish.fitness
            state.bulletin_position = fish.position.copy()
    state.iteration += 1
    return state


def run(state: SwarmState, params: SwarmParams, objective: Objective,
        iterations: int) -> tuple[SwarmState, list[float]]:
    """Apply ``iterations`` swarm steps; the returned history holds the
    bulletin fitness after each step and is non-increasing."""
    history = []
    for _ in range(iterations):
        step_iteration(state, params, objective)
        history.append(state.bulletin_fitness)
    return state, history


def add_fish(state: SwarmState, params: SwarmParams, objective: Objective,
             position=None, task_ref: Optional[str] = None) -> ArtificialFish:
    """Append one fish; without an explicit position it spawns uniformly
    inside the bounds on a substream keyed by its new id."""
    fish_id = state.next_fish_id
    state.next_fish_id += 1
    if position is None:
        rng = _substream(state.seed, state.iteration, fish_id, _TAG_SPAWN)
        position = rng.uniform(params.lower, params.upper, params.dimension)
    else:
        position = _clamp(np.asarray(position, dtype=float), params)
    fish = ArtificialFish(id=fish_id, position=position, fitness=objective.evaluate(position), task_ref=task_ref)
    state.fish.append(fish)
    if fish.fitness < state.bulletin_fitness:
        state.bulletin_fitness = fish.fitness
        state.bulletin_position = fish.position.copy()
    return fish


def remove_fish(state: SwarmState, fish_id: int) -> ArtificialFish:
    """Delete and return the fish with ``fish_id``; the bulletin keeps its
    history."""
    for index, fish in enumerate(state.fish):
        if fish.id == fish_id:
            return state.fish.pop(index)
    raise KeyError(f"unknown fish id {fish_id}")


def reevaluate(state: SwarmState, objective: Objective) -> SwarmState:
    """Refresh every fitness under a new objective and reset the bulletin
    to the current best; used when the fitness surface itself changed."""
    for fish in state.fish:
        fish.fitness = objective.evaluate(fish.position)
    best = min(state.fish, key=lambda f: (f.fitness, f.id))
    state.bulletin_fitness = best.fitness
    state.bulletin_position = best.position.copy()
    return state


def state_to_dict(state: SwarmState) -> dict:
    """Plain-data view of the swarm, stable across runs with equal inputs."""
    return {
        "iteration": state.iteration,
        "seed": state.seed,
        "bulletin": {
            "position": [float(v) for v in state.bulletin_position],
            "fitness": state.bulletin_fitness,
        },
        "fish": [
            {
                "id": fish.id,
                "position": [float(v) for v in fish.position],
                "fitness": fish.fitness,
                "task_ref": fish.task_ref,
            }
            for fish in state.fish
        ],
    }


def history_csv(history: list[float]) -> str:
    """Per-iteration bulletin fitness as ``iteration,best_fitness`` rows."""
    lines = ["iteration,best_fitness"]
    for i, value in enumerate(history, start=1):
        lines.append(f"{i},{value!r}")
    return "\n".join(lines) + "\n"
