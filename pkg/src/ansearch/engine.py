"""Across-neighbourhood search: population loop, superior-solution memory,
and the Gaussian position update.

Each individual keeps the best point it has found (its "superior" solution);
an update samples every coordinate from a Gaussian centred on a superior
value and scaled by the distance between that value and the current
position.  On a randomly chosen subset of dimensions (the across-search
degree) the individual borrows a random peer's superior instead of its own,
mixing good components from several memories at once.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .core import RngStream, SearchBounds, ObjectiveProblem, init_position

SUCCESS_THRESHOLD = 1e-5

_EMPTY_DIMS = np.empty(0, dtype=np.intp)


@dataclass(frozen=True)
class AnsParams:
    """Tunable parameters plus budget controls.

    ``superior_count`` must equal ``population_size`` in this version: each
    individual contributes exactly one superior solution to the shared pool.
    ``across_degree`` of 0 disables peer borrowing entirely (accepted, though
    defaults never use it); it may not exceed the problem dimensionality.
    """

    population_size: int = 20
    across_degree: int = 1
    sigma: float = 0.5
    max_evals: int = 300_000
    max_generations: Optional[int] = None
    superior_count: Optional[int] = None
    frozen_superiors: bool = False

    def __post_init__(self):
        if self.population_size < 1:
            raise ValueError("population_size must be >= 1")
        if self.superior_count is None:
            object.__setattr__(self, "superior_count", self.population_size)
        if self.superior_count != self.population_size:
            raise ValueError("superior_count must equal population_size in this version")
        if self.across_degree < 0:
            raise ValueError("across_degree must be >= 0")
        if not self.sigma > 0:
            raise ValueError("sigma must be > 0")
        if self.max_evals < 1:
            raise ValueError("max_evals must be >= 1")
        if self.max_generations is not None and self.max_generations < 1:
            raise ValueError("max_generations must be >= 1 when given")


@dataclass
class Individual:
    pos: np.ndarray
    pos_fitness: float
    superior: np.ndarray
    superior_fitness: float


@dataclass
class Snapshot:
    generation: int
    positions: np.ndarray  # (m, D)
    superiors: np.ndarray  # (m, D)


@dataclass
class PopulationState:
    """Population arrays; row i of ``superiors`` is individual i's memory."""

    positions: np.ndarray          # (m, D)
    position_fitness: np.ndarray   # (m,)
    superiors: np.ndarray          # (m, D)
    superior_fitness: np.ndarray   # (m,)
    global_best: np.ndarray
    global_best_fitness: float
    generation: int = 0
    evals_used: int = 0
    evals_to_success: Optional[int] = None

    def individual(self, i: int) -> Individual:
        """Copy-free view of one individual (arrays alias state rows)."""
        return Individual(self.positions[i], float(self.position_fitness[i]),
                          self.superiors[i], float(self.superior_fitness[i]))


@dataclass
class RunResult:
    best_fitness: float
    best_position: np.ndarray
    evals_to_success: Optional[int]
    history: List[Tuple[int, float]]   # (evals_used, global best) per generation
    seed: Union[int, Sequence[int]]
    evals_used: int
    generations: int
    snapshots: Optional[List[Snapshot]] = field(default=None)


def select_across_dimensions(rng: RngStream, dim: int, degree: int) -> np.ndarray:
    """Distinct dimension indices, uniform without replacement."""
    if not 0 <= degree <= dim:
        raise ValueError(f"across-search degree {degree} outside [0, {dim}]")
    if degree == 0:
        return _EMPTY_DIMS
    if degree == 1:
        return np.array([rng.integer(dim)], dtype=np.intp)
    return rng.permutation(dim)[:degree]


def select_peer_superior(rng: RngStream, count: int, self_index: int) -> int:
    """Uniform index into the superior pool, excluding the caller's own."""
    if count < 2:
        raise ValueError("peer selection needs at least 2 superiors")
    j = rng.integer(count - 1)
    return j + 1 if j >= self_index else j


def _peer_indices(rng: RngStream, count: int, self_index: int, k: int) -> np.ndarray:
    # One independent peer per selected dimension.
    if k == 1:
        return np.array([select_peer_superior(rng, count, self_index)], dtype=np.intp)
    if count < 2:
        raise ValueError("peer selection needs at least 2 superiors")
    idx = rng.integers(count - 1, size=k)
    idx[idx >= self_index] += 1
    return idx


def update_position(position: np.ndarray, superiors: np.ndarray, self_index: int,
                    params: AnsParams, rng: RngStream, bounds: SearchBounds,
                    boundary: str = "clamp") -> np.ndarray:
    """One position update.

    Per-dimension rule: new value = s_d + G(0, sigma^2) * |s_d - current_d|
    where s_d is the individual's own superior except on the across-search
    dimensions, which each read an independently chosen peer superior.

    Draw order (fixed for reproducibility): dimension subset, then one peer
    index per selected dimension, then one standard Gaussian per dimension.
    """
    dim = position.shape[0]
    base = superiors[self_index].copy()
    if params.across_degree:
        dims = select_across_dimensions(rng, dim, params.across_degree)
        peers = _peer_indices(rng, superiors.shape[0], self_index, dims.shape[0])
        base[dims] = superiors[peers, dims]
    gauss = rng.standard_gaussian(dim)
    new_pos = base + (params.sigma * gauss) * np.abs(base - position)
    if boundary == "clamp":
        return np.clip(new_pos, bounds.lo, bounds.hi)
    return new_pos


def update_superior(indiv: Individual, new_pos: np.ndarray, new_fitness: float) -> Individual:
    """Overwrite the position; adopt it as superior only on strict improvement.

    Ties keep the incumbent superior, so plateaus cause no memory churn.
    """
    if new_fitness < indiv.superior_fitness:
        return Individual(new_pos, new_fitness, new_pos, new_fitness)
    return Individual(new_pos, new_fitness, indiv.superior, indiv.superior_fitness)


def initialize(problem: ObjectiveProblem, params: AnsParams, rng: RngStream,
               success_threshold: float = SUCCESS_THRESHOLD) -> PopulationState:
    """Draw and evaluate the initial population; superiors start as copies
    of the initial positions.  Evaluation stops early if the budget is
    smaller than the population (unevaluated rows keep +inf fitness)."""
    m = params.population_size
    dim = problem.bounds.dim
    positions = np.empty((m, dim))
    fitness = np.full(m, np.inf)
    state = PopulationState(
        positions=positions,
        position_fitness=fitness,
        superiors=positions.copy(),
        superior_fitness=fitness.copy(),
        global_best=np.zeros(dim),
        global_best_fitness=np.inf,
    )
    for i in range(m):
        positions[i] = init_position(rng, problem.bounds)
        if state.evals_used >= params.max_evals:
            continue
        fit = problem.evaluate(positions[i], rng)
        state.evals_used += 1
        fitness[i] = fit
        if state.evals_to_success is None and fit < success_threshold:
            state.evals_to_success = state.evals_used
    state.superiors[:] = positions
    state.superior_fitness[:] = fitness
    best = int(np.argmin(fitness))
    state.global_best = positions[best].copy()
    state.global_best_fitness = float(fitness[best])
    return state


def step(state: PopulationState, problem: ObjectiveProblem, params: AnsParams,
         rng: RngStream, boundary: str = "clamp",
         success_threshold: float = SUCCESS_THRESHOLD) -> PopulationState:
    """One generation: every individual moves, is evaluated, and may refresh
    its superior and the global best.

    Individuals are processed in index order and read the superior pool
    live, so updates earlier in the sweep are visible to later individuals
    (set ``frozen_superiors`` to give the whole sweep a fixed pool instead).
    Stops cleanly mid-sweep when the evaluation budget runs out.
    """
    superiors = state.superiors
    sup_fitness = state.superior_fitness
    positions = state.positions
    pos_fitness = state.position_fitness
    bounds = problem.bounds
    max_evals = params.max_evals
    peer_pool = superiors.copy() if params.frozen_superiors else superiors

    for i in range(params.population_size):
        if state.evals_used >= max_evals:
            break
        new_pos = update_position(positions[i], peer_pool, i, params, rng, bounds, boundary)
        fit = problem.evaluate(new_pos, rng)
        state.evals_used += 1
        if state.evals_to_success is None and fit < success_threshold:
            state.evals_to_success = state.evals_used
        positions[i] = new_pos
        pos_fitness[i] = fit
        if fit < sup_fitness[i]:
            superiors[i] = new_pos
            sup_fitness[i] = fit
            if fit < state.global_best_fitness:
                state.global_best = new_pos.copy()
                state.global_best_fitness = fit
    state.generation += 1
    return state


def run(problem: ObjectiveProblem, params: AnsParams, seed: Union[int, Sequence[int], RngStream],
        snapshot_gens: Optional[Sequence[int]] = None, boundary: str = "clamp",
        success_threshold: float = SUCCESS_THRESHOLD) -> RunResult:
    """Full optimization run, terminated by whichever budget hits first
    (``max_evals`` is always enforced; ``max_generations`` counts update
    sweeps after initialization when given)."""
    if boundary not in ("clamp", "none"):
        raise ValueError(f"unknown boundary policy {boundary!r}")
    if params.across_degree > problem.bounds.dim:
        raise ValueError(f"across_degree {params.across_degree} exceeds dimensionality "
                         f"{problem.bounds.dim}")
    if isinstance(seed, RngStream):
        rng = seed
        seed_value = rng.seed
    else:
        rng = RngStream(seed)
        seed_value = seed

    wanted_gens = set(int(g) for g in snapshot_gens) if snapshot_gens else None
    snapshots: Optional[List[Snapshot]] = [] if wanted_gens else None

    state = initialize(problem, params, rng, success_threshold)
    history: List[Tuple[int, float]] = [(state.evals_used, state.global_best_fitness)]
    if wanted_gens and 0 in wanted_gens:
        snapshots.append(Snapshot(0, state.positions.copy(), state.superiors.copy()))

    while state.evals_used < params.max_evals and (
            params.max_generations is None or state.generation < params.max_generations):
        step(state, problem, params, rng, boundary, success_threshold)
        history.append((state.evals_used, state.global_best_fitness))
        if wanted_gens and state.generation in wanted_gens:
            snapshots.append(Snapshot(state.generation, state.positions.copy(),
                                      state.superiors.copy()))

    return RunResult(
        best_fitness=state.global_best_fitness,
        best_position=state.global_best.copy(),
        evals_to_success=state.evals_to_success,
        history=history,
        seed=seed_value,
        evals_used=state.evals_used,
        generations=state.generation,
        snapshots=snapshots,
    )
