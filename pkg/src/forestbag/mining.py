"""Two-stage mining of almost-sufficient and almost-necessary reasons.

Stage 1 runs the sampler over all atomic queries: for every class y and every
cell s of a used feature, (class=y | cell=s) scores sufficiency and
(cell=s | class=y) scores necessity, alongside the unconditioned class priors
used for the lift test. Stage 2 scans feature pairs with conditional forward
sampling and streams every size-2 candidate that clears the sufficiency
threshold with enough relative lift over the prior. A redundancy filter drops
pairs dominated by an already-reported singleton, and a greedy shortener
reduces sufficient reasons toward unshortenable ones.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Sequence

import numpy as np

from .bag import Bag, FeatureArg, forces_class_exact
from .factors import PartialAssignment, PlausibilityModel
from .partition import class_count
from .sampling import (
    Estimate,
    QuerySpec,
    SamplerConfig,
    Stage1Result,
    conditional_class_counts,
    run_stage1,
)

log = logging.getLogger(__name__)

SUFFICIENT = "sufficient"
NECESSARY = "necessary"


@dataclass(frozen=True)
class MinerConfig:
    delta: float = 0.9
    lift: float = 1.1
    pair_budget: int = 400
    stream: bool = True

    def __post_init__(self):
        if not 0 < self.delta <= 1:
            raise ValueError("delta must be in (0, 1]")
        if self.lift < 1:
            raise ValueError("lift must be >= 1")
        if self.pair_budget < 1:
            raise ValueError("pair_budget must be >= 1")


@dataclass(frozen=True)
class ReasonReport:
    kind: str
    cls: int
    conditions: tuple[tuple[int, int], ...]  # (feature index, cell index)
    probability: float
    samples: int
    flags: tuple[str, ...] = ()


def render_record(report: ReasonReport, forest, partition) -> dict:
    return {
        "kind": report.kind,
        "class": forest.classes[report.cls],
        "conditions": [
            {"feature": forest.features[i].name, "set": partition.sets[i][j].render()}
            for i, j in report.conditions
        ],
        "p": report.probability,
        "samples": report.samples,
        "flags": list(report.flags),
    }


def _render_conditions(report: ReasonReport, forest, partition) -> str:
    parts = []
    for i, j in report.conditions:
        cell = partition.sets[i][j]
        value = cell.value if cell.kind == "categorical" else cell.render()
        parts.append(f"'{forest.features[i].name}'={value}")
    return ", ".join(parts)

def render_text(report: ReasonReport, forest, partition) -> str:
    conditions = _render_conditions(report, forest, partition)
    label = forest.classes[report.cls]
    if report.kind == SUFFICIENT:
        head = f"P( {label} | {conditions} )"
    else:
        head = f"P( {conditions} | {label} )"
    flags = f" [{','.join(report.flags)}]" if report.flags else ""
    return f"{head}={report.probability:.2f} ({report.samples} samples){flags}"


def stage1_atomic_queries(model: PlausibilityModel) -> list[QuerySpec]:
    """Sufficient and necessary queries for every (class, used-feature cell) pair."""
    queries = []
    eff = model.partition.effective_counts
    for y in range(model.n_classes):
        for i, used in enumerate(model.partition.used):
            if not used:
                continue
            for j in range(eff[i]):
                cell = PartialAssignment.of({i: j})
                label = PartialAssignment.of(cls=y)
                queries.append(QuerySpec(target=label, condition=cell))
                queries.append(QuerySpec(target=cell, condition=label))
    return queries


def prior_queries(model: PlausibilityModel) -> list[QuerySpec]:
    empty = PartialAssignment.of()
    return [QuerySpec(target=PartialAssignment.of(cls=y), condition=empty)
            for y in range(model.n_classes)]


def is_almost_sufficient(estimate: Estimate, prior: Estimate, config: MinerConfig) -> bool:
    """Clears the threshold and lifts the class prior by the configured factor."""
    if estimate.value is None or prior.value is None:
        return False
    return estimate.value >= config.delta and estimate.value > config.lift * prior.value


def is_almost_necessary(estimate: Estimate, config: MinerConfig) -> bool:
    # No prior test: sampling is uniform over cells, so the prior cannot help.
    return estimate.value is not None and estimate.value >= config.delta


def merge_necessary(reports: Sequence[ReasonReport]) -> ReasonReport | None:
    """Combine per-feature necessary reasons for one class into a single reason.

    The merged probability is the minimum of the members' (conservative).
    Returns None when there is nothing to merge.
    """
    if not reports:
        return None
    cls = reports[0].cls
    assert all(r.cls == cls and r.kind == NECESSARY for r in reports)
    conditions = tuple(c for r in reports for c in r.conditions)
    return ReasonReport(
        NECESSARY, cls, conditions,
        probability=min(r.probability for r in reports),
        samples=min(r.samples for r in reports),
    )


@dataclass
class Stage1Mining:
    stage1: Stage1Result
    priors: list[Estimate]
    atomic_sufficient: list[ReasonReport]
    atomic_necessary: list[ReasonReport]
    merged_necessary: list[ReasonReport]
    condition_samples: dict[tuple[int, int], int]


def run_stage1_mining(model: PlausibilityModel, sampler_config: SamplerConfig,
                      config: MinerConfig) -> Stage1Mining:
    """Stage 1: priors, atomic queries, almost-reason selection and merging."""
    priors_q = prior_queries(model)
    atomics = stage1_atomic_queries(model)
    result = run_stage1(model, priors_q + atomics, sampler_config)
    priors = result.estimates[:len(priors_q)]
    atomic_estimates = result.estimates[len(priors_q):]

    sufficient: list[ReasonReport] = []
    necessary: list[ReasonReport] = []
    condition_samples: dict[tuple[int, int], int] = {}
    for q, est in zip(atomics, atomic_estimates):
        if q.condition.cls is None:
            # Sufficient direction: condition is the single feature cell.
            (i, j), = q.condition.features
            y = q.target.cls
            condition_samples[(i, j)] = est.samples
            if is_almost_sufficient(est, priors[y], config):
                sufficient.append(ReasonReport(
                    SUFFICIENT, y, ((i, j),), est.value, est.samples))
        else:
            (i, j), = q.target.features
            y = q.condition.cls
            if is_almost_necessary(est, config):
                necessary.append(ReasonReport(
                    NECESSARY, y, ((i, j),), est.value, est.samples))

    merged = []
    for y in range(model.n_classes):
        merged_report = merge_necessary([r for r in necessary if r.cls == y])
        if merged_report is not None:
            merged.append(merged_report)
    return Stage1Mining(result, priors, sufficient, necessary, merged, condition_samples)


def _pair_candidates(model: PlausibilityModel):
    eff = model.partition.effective_counts
    used = model.partition.used
    k = len(eff)
    for i in range(k):
        if not used[i]:
            continue
        for j in range(i + 1, k):
            if not used[j]:
                continue
            for ci in range(eff[i]):
                for cj in range(eff[j]):
                    yield i, ci, j, cj


def stage2_pairs(model: PlausibilityModel, stage1: Stage1Mining, config: MinerConfig,
                 sampler_config: SamplerConfig,
                 sink: Callable[[ReasonReport], None] | None = None) -> list[ReasonReport]:
    """Scan all feature-cell pairs with conditional forward sampling.

    Every candidate gets its own Philox substream (offset past the stage-1
    workers), so the emitted sequence depends only on the seed. Candidates
    whose cells never showed up in stage 1 are skipped and logged; candidates
    whose every completion is rejected exhaust their budget silently.
    """
    base = np.random.Philox(key=sampler_config.seed)
    reports: list[ReasonReport] = []
    for index, (i, ci, j, cj) in enumerate(_pair_candidates(model)):
        if (stage1.condition_samples.get((i, ci), 0) == 0
                or stage1.condition_samples.get((j, cj), 0) == 0):
            log.info("skipping pair (%d:%d, %d:%d): no stage-1 samples", i, ci, j, cj)
            continue
        rng = np.random.Generator(base.jumped(sampler_config.workers + index))
        condition = PartialAssignment.of({i: ci, j: cj})
        counts, accepted = conditional_class_counts(
            model, condition, rng, config.pair_budget)
        if accepted == 0:
            continue
        for y in range(model.n_classes):
            est = Estimate(counts[y] / accepted, accepted)
            if is_almost_sufficient(est, stage1.priors[y], config):
                report = ReasonReport(
                    SUFFICIENT, y, ((i, ci), (j, cj)), est.value, accepted)
                reports.append(report)
                if sink is not None:
                    sink(report)
    return reports


def filter_redundant(reports: Iterable[ReasonReport]) -> list[ReasonReport]:
    """Drop size-2 sufficient reasons dominated by a reported singleton.

    A pair (c1, c2) for class y is redundant when c1 or c2 alone is reported
    sufficient for y with at least the pair's probability.
    """
    reports = list(reports)
    singles: dict[tuple[int, tuple[int, int]], float] = {}
    for r in reports:
        if r.kind == SUFFICIENT and len(r.conditions) == 1:
            key = (r.cls, r.conditions[0])
            singles[key] = max(singles.get(key, 0.0), r.probability)
    out = []
    for r in reports:
        if r.kind == SUFFICIENT and len(r.conditions) == 2:
            dominated = any(
                singles.get((r.cls, c), -1.0) >= r.probability for c in r.conditions)
            if dominated:
                continue
        out.append(r)
    return out


def minimize_sufficient(model: PlausibilityModel, bag: Bag, report: ReasonReport,
                        config: MinerConfig, sampler_config: SamplerConfig,
                        cap: int) -> ReasonReport:
    """Greedily drop conditions while the rest still forces the class.

    Uses the exact completion check while the class space fits under the cap
    (result flagged minimal), otherwise a sampled threshold check at the
    configured delta (no minimal flag).
    """
    exact = class_count(model.partition) <= cap
    conditions = sorted(report.conditions)
    base = np.random.Philox(key=sampler_config.seed)
    step = 0
    for condition in list(conditions):
        reduced = [c for c in conditions if c != condition]
        if not reduced:
            break
        if exact:
            args = [FeatureArg(i, j) for i, j in reduced]
            check = forces_class_exact(bag, args, report.cls, cap)
            ok = check.holds and not check.vacuous
        else:
            rng = np.random.Generator(base.jumped(1_000_000 + step))
            step += 1
            counts, accepted = conditional_class_counts(
                model, PartialAssignment.of(dict(reduced)), rng, config.pair_budget)
            ok = accepted > 0 and counts[report.cls] / accepted >= config.delta
        if ok:
            conditions = reduced
    flags = tuple(dict.fromkeys(report.flags + (("minimal",) if exact else ())))
    return replace(report, conditions=tuple(conditions), flags=flags)
