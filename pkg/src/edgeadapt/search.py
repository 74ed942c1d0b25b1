"""NSGA-II and random samplers over a discrete space, both writing through a TrialStore."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .objectives import DIRECTIONS, Evaluator, Trial, TrialStore, unique_trials
from .pareto import crowding_distance, non_dominated_sort
from .space import SearchSpace, cardinality, decode_index


@dataclass(frozen=True)
class SearchBudget:
    max_unique_trials: int
    population_size: int = 50
    seed: int = 0

    @classmethod
    def from_fraction(cls, space: SearchSpace, fraction: float, **kwargs) -> "SearchBudget":
        """Budget of ``floor(fraction * |space|)`` unique trials (at least one)."""
        if not 0 < fraction <= 1:
            raise ValueError(f"budget fraction must lie in (0, 1], got {fraction}")
        count = max(1, math.floor(fraction * cardinality(space) + 1e-9))
        return cls(count, **kwargs)

    def check(self, space: SearchSpace) -> None:
        n = cardinality(space)
        if not 0 < self.max_unique_trials <= n:
            raise ValueError(f"budget {self.max_unique_trials} outside (0, {n}]")
        if self.population_size < 2:
            raise ValueError("population size must be at least 2")


def _conf(space: SearchSpace, genes: Sequence[int]) -> tuple:
    return tuple(p.domain[g] for p, g in zip(space.parameters, genes))


def _genes(space: SearchSpace, conf: Sequence) -> np.ndarray:
    return np.array([p.position(v) for p, v in zip(space.parameters, conf)])


def _rank_and_crowding(trials: list[Trial], directions) -> tuple[np.ndarray, np.ndarray]:
    objs = [t.objectives for t in trials]
    rank = np.empty(len(trials), dtype=int)
    crowd = np.empty(len(trials))
    for r, front in enumerate(non_dominated_sort(objs, directions)):
        rank[front] = r
        crowd[front] = crowding_distance([objs[i] for i in front], directions)
    return rank, crowd


def _environmental_selection(trials: list[Trial], size: int, directions) -> list[Trial]:
    if len(trials) <= size:
        return trials
    objs = [t.objectives for t in trials]
    chosen: list[int] = []
    for front in non_dominated_sort(objs, directions):
        if len(chosen) + len(front) <= size:
            chosen.extend(front)
            continue
        crowd = crowding_distance([objs[i] for i in front], directions)
        order = np.argsort(-crowd, kind="stable")
        chosen.extend(front[i] for i in order[: size - len(chosen)])
        break
    return [trials[i] for i in sorted(chosen)]


def nsga2_search(
    space: SearchSpace,
    evaluator: Evaluator,
    budget: SearchBudget,
    *,
    store: TrialStore | None = None,
    directions: Sequence[str] = DIRECTIONS,
    crossover_prob: float = 0.9,
    mutation_prob: float | None = None,
    stall_limit: int = 50,
) -> TrialStore:
    """Generational NSGA-II that stops once the store holds the budgeted unique trials.

    Duplicate proposals are answered from the store and do not consume budget.
    After ``stall_limit`` generations without a new configuration, offspring
    are drawn uniformly from the space until progress resumes.
    """
    budget.check(space)
    rng = np.random.default_rng(budget.seed)
    store = store if store is not None else TrialStore(space, evaluator)
    if store.evaluator is None:
        store.evaluator = evaluator
    target = budget.max_unique_trials
    sizes = np.array(space.sizes)
    n_params = len(sizes)
    p_mut = 1.0 / n_params if mutation_prob is None else mutation_prob

    def done() -> bool:
        return unique_trials(store) >= target

    initial = rng.choice(cardinality(space), size=min(budget.population_size, target), replace=False)
    population: list[Trial] = []
    for idx in initial:
        if done():
            break
        trial, _ = store.record(decode_index(space, int(idx)), "nsga2", budget.seed)
        population.append(trial)

    def tournament(rank, crowd) -> int:
        i, j = rng.choice(len(population), size=2, replace=False)
        if rank[i] != rank[j]:
            return i if rank[i] < rank[j] else j
        if crowd[i] != crowd[j]:
            return i if crowd[i] > crowd[j] else j
        return i if rng.random() < 0.5 else j

    stalled = 0
    while not done():
        before = unique_trials(store)
        rank, crowd = _rank_and_crowding(population, directions)
        offspring: list[Trial] = []
        while len(offspring) < budget.population_size and not done():
            if stalled >= stall_limit:
                children = [rng.integers(sizes)]
            else:
                g1 = _genes(space, population[tournament(rank, crowd)].config)
                g2 = _genes(space, population[tournament(rank, crowd)].config)
                if rng.random() < crossover_prob:
                    mask = rng.random(n_params) < 0.5
                    children = [np.where(mask, g1, g2), np.where(mask, g2, g1)]
                else:
                    children = [g1.copy(), g2.copy()]
                for child in children:
                    hit = rng.random(n_params) < p_mut
                    child[hit] = rng.integers(sizes[hit])
            for child in children:
                if done() or len(offspring) >= budget.population_size:
                    break
                trial, _ = store.record(_conf(space, child), "nsga2", budget.seed)
                offspring.append(trial)

        stalled = 0 if unique_trials(store) > before else stalled + 1
        merged: dict[int, Trial] = {}
        for t in population + offspring:
            merged.setdefault(t.index, t)
        population = _environmental_selection(list(merged.values()), budget.population_size, directions)
    return store


def random_search(
    space: SearchSpace,
    evaluator: Evaluator,
    budget: SearchBudget,
    *,
    store: TrialStore | None = None,
) -> TrialStore:
    """Uniform draws with replacement, deduplicated, until the budget is met."""
    budget.check(space)
    rng = np.random.default_rng(budget.seed)
    store = store if store is not None else TrialStore(space, evaluator)
    if store.evaluator is None:
        store.evaluator = evaluator
    n = cardinality(space)
    while unique_trials(store) < budget.max_unique_trials:
        store.record(decode_index(space, int(rng.integers(n))), "random", budget.seed)
    return store


SAMPLERS = {"nsga2": nsga2_search, "random": random_search}
