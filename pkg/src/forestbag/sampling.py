"""Monte-Carlo approximation of ambiguity and conditional explanation queries.

The stage-1 loop samples equivalence classes uniformly (one independent
uniform cell index per feature), discards-and-counts the ambiguous ones, and
scores every query against the deterministic completion of the surviving
samples: rejection sampling for the conditionals, plain Monte Carlo for the
non-ambiguity rate. Conditional forward sampling fixes the conditioned
feature cells and draws only the rest, which is what the pair miner uses.

All randomness flows through a counter-based Philox generator; worker w draws
from the jumped substream (seed, w), and counters merge by addition, so a run
is reproducible from (seed, workers, config) alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .factors import PartialAssignment, PlausibilityModel, Assignment, complete_assignment
from .partition import DomainPartition


@dataclass(frozen=True)
class QuerySpec:
    """A conditional probability query (target | condition)."""

    target: PartialAssignment
    condition: PartialAssignment

    def __post_init__(self):
        if self.target.feature_scope() & self.condition.feature_scope() or (
                self.target.cls is not None and self.condition.cls is not None):
            raise ValueError("target and condition scopes must be disjoint")


@dataclass(frozen=True)
class SamplerConfig:
    seed: int
    max_iterations: int = 100_000
    min_samples_per_query: int = 100
    workers: int = 1
    mode: str = "rejection"  # stage 1; the pair miner switches to "conditional"
    epsilon: float = 0.1
    delta: float = 0.05
    p_floor: float = 0.5
    batch_size: int = 4096
    progress_every: int = 0

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("empty sampling budget: max_iterations must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.mode not in ("rejection", "conditional"):
            raise ValueError(f"unknown sampling mode {self.mode!r}")


@dataclass
class Counters:
    n_ambiguous: int = 0
    n_nonambiguous: int = 0
    pos: list[int] = field(default_factory=list)  # per query
    neg: list[int] = field(default_factory=list)

    @property
    def iterations(self) -> int:
        return self.n_ambiguous + self.n_nonambiguous

    def merge(self, other: "Counters") -> None:
        self.n_ambiguous += other.n_ambiguous
        self.n_nonambiguous += other.n_nonambiguous
        self.pos = [a + b for a, b in zip(self.pos, other.pos)]
        self.neg = [a + b for a, b in zip(self.neg, other.neg)]


@dataclass(frozen=True)
class Estimate:
    """A sampled probability; value is absent (None) when no sample supports it."""

    value: float | None
    samples: int
    bound: tuple[float, float] | None = None  # (epsilon, delta) when the plan was met


@dataclass
class Stage1Result:
    nonambiguous: Estimate  # share of sampled classes the forest can decide
    estimates: list[Estimate]
    counters: Counters
    iterations: int


def chernoff_sample_size(p_lower: float, epsilon: float, delta: float) -> int:
    """Samples needed for a relative (1 +/- epsilon) bound at confidence 1 - delta.

    p_lower must lower-bound the true probability; a smaller floor is
    conservative (more samples).
    """
    if not 0 < p_lower <= 1:
        raise ValueError("p_lower must be in (0, 1]")
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if not 0 < delta < 1:
        raise ValueError("delta must be in (0, 1)")
    return math.ceil(3.0 * math.log(2.0 / delta) / (p_lower * epsilon * epsilon))


def worker_rngs(seed: int, workers: int) -> list[np.random.Generator]:
    base = np.random.Philox(key=seed)
    return [np.random.Generator(base.jumped(w)) for w in range(workers)]


def sample_equivalence_class(partition: DomainPartition,
                             rng: np.random.Generator) -> tuple[int, ...]:
    """One uniform cell index per feature (collapsed features always draw 0)."""
    highs = np.asarray(partition.effective_counts)
    return tuple(int(v) for v in rng.integers(0, highs))


def _estimate(pos: int, total: int, config: SamplerConfig) -> Estimate:
    if total == 0:
        return Estimate(None, 0)
    planned = chernoff_sample_size(config.p_floor, config.epsilon, config.delta)
    bound = (config.epsilon, config.delta) if total >= planned else None
    return Estimate(pos / total, total, bound)


def _compile_queries(queries: Sequence[QuerySpec]):
    compiled = []
    for q in queries:
        compiled.append((q.condition.features, q.condition.cls,
                         q.target.features, q.target.cls))
    return compiled


def run_stage1(model: PlausibilityModel, queries: Sequence[QuerySpec],
               config: SamplerConfig,
               progress: Callable[[int, Counters], None] | None = None) -> Stage1Result:
    """Sample equivalence classes and score every query on the survivors.

    Stops at max_iterations, or earlier once the non-ambiguity estimate has
    its planned sample size and every query has min_samples_per_query
    conditioned samples.
    """
    compiled = _compile_queries(queries)
    counters = Counters(pos=[0] * len(queries), neg=[0] * len(queries))
    rngs = worker_rngs(config.seed, config.workers)
    highs = np.asarray(model.partition.effective_counts, dtype=np.int64)
    evaluator = model.evaluator
    planned = chernoff_sample_size(config.p_floor, config.epsilon, config.delta)

    done = 0
    batch_index = 0
    next_progress = config.progress_every
    while done < config.max_iterations:
        size = min(config.batch_size, config.max_iterations - done)
        rng = rngs[batch_index % config.workers]
        batch_index += 1
        draws = rng.integers(0, highs, size=(size, len(highs)))
        for row in draws:
            eq = tuple(int(v) for v in row)
            y = evaluator.outcome(eq)
            if y is None:
                counters.n_ambiguous += 1
                continue
            counters.n_nonambiguous += 1
            for qi, (cond_f, cond_c, targ_f, targ_c) in enumerate(compiled):
                if cond_c is not None and y != cond_c:
                    continue
                if any(eq[i] != j for i, j in cond_f):
                    continue
                hit = (targ_c is None or y == targ_c) and all(eq[i] == j for i, j in targ_f)
                if hit:
                    counters.pos[qi] += 1
                else:
                    counters.neg[qi] += 1
        done += size
        if progress is not None and config.progress_every and done >= next_progress:
            progress(done, counters)
            next_progress += config.progress_every
        if done >= planned and all(
                p + n >= config.min_samples_per_query
                for p, n in zip(counters.pos, counters.neg)):
            break

    estimates = [
        _estimate(p, p + n, config) for p, n in zip(counters.pos, counters.neg)
    ]
    return Stage1Result(
        nonambiguous=ambiguity_estimate(counters, config),
        estimates=estimates,
        counters=counters,
        iterations=done,
    )


def ambiguity_estimate(counters: Counters, config: SamplerConfig | None = None) -> Estimate:
    """Share of sampled equivalence classes the forest can decide."""
    total = counters.iterations
    if total == 0:
        return Estimate(None, 0)
    if config is None:
        return Estimate(counters.n_nonambiguous / total, total)
    return _estimate(counters.n_nonambiguous, total, config)


def conditional_forward_sample(model: PlausibilityModel, condition: PartialAssignment,
                               rng: np.random.Generator) -> Assignment | None:
    """Fix the conditioned feature cells, draw the rest, complete deterministically.

    Returns None (rejected) when the completed sample is ambiguous.
    """
    if condition.cls is not None:
        raise ValueError("conditional forward sampling conditions on feature variables only")
    fixed = dict(condition.features)
    highs = model.partition.effective_counts
    eq = tuple(fixed[i] if i in fixed else int(rng.integers(0, highs[i]))
               for i in range(len(highs)))
    return complete_assignment(model, eq)


def conditional_class_counts(model: PlausibilityModel, condition: PartialAssignment,
                             rng: np.random.Generator, budget: int,
                             batch_size: int = 1024) -> tuple[list[int], int]:
    """Draw `budget` conditional samples; count accepted outcomes per class.

    Returns (per-class counts, accepted total). Rejected (ambiguous) draws
    consume budget but are not counted.
    """
    if condition.cls is not None:
        raise ValueError("conditional forward sampling conditions on feature variables only")
    fixed = dict(condition.features)
    highs = np.asarray(model.partition.effective_counts, dtype=np.int64)
    free = [i for i in range(len(highs)) if i not in fixed]
    template = [fixed.get(i, 0) for i in range(len(highs))]
    counts = [0] * model.n_classes
    accepted = 0
    remaining = budget
    evaluator = model.evaluator
    while remaining > 0:
        size = min(batch_size, remaining)
        remaining -= size
        if free:
            draws = rng.integers(0, highs[free], size=(size, len(free)))
        else:
            draws = np.zeros((size, 0), dtype=np.int64)
        for row in draws:
            eq = list(template)
            for pos, i in enumerate(free):
                eq[i] = int(row[pos])
            y = evaluator.outcome(eq)
            if y is not None:
                counts[y] += 1
                accepted += 1
    return counts, accepted


def with_seed(config: SamplerConfig, seed: int) -> SamplerConfig:
    return replace(config, seed=seed)
