"""Factor-model view of a forest: deterministic 0/1 factors over explanation variables.

Variables are one feature variable per feature (domain: partition cells,
unused features collapsed), one tree variable per tree (domain: its rules)
and a single class variable. Each tree contributes a factor that is 1 exactly
when the tree variable names the rule activated by the feature assignment;
the class factor is 1 exactly when the class variable names the strict
majority winner of the assigned rules' votes. The product of all factors is
therefore 0/1, and its normalization constant counts the non-ambiguous
equivalence classes.

Factors are never tabulated; every evaluation walks the compiled trees on
demand.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import NamedTuple, Sequence

from .forest import Forest
from .partition import (
    CapExceededError,
    DomainPartition,
    ForestEvaluator,
    class_count,
    enumerate_classes,
)


class UnsatisfiableConditionError(ValueError):
    """The conditioning event has no probability mass (not probability zero)."""


class Assignment(NamedTuple):
    features: tuple[int, ...]  # partition-cell index per feature
    rules: tuple[int, ...]     # rule index per tree
    cls: int


@dataclass(frozen=True)
class PartialAssignment:
    """Assignment to a subset of the feature variables and/or the class variable."""

    features: tuple[tuple[int, int], ...] = ()
    cls: int | None = None

    @staticmethod
    def of(features: dict[int, int] | None = None, cls: int | None = None) -> "PartialAssignment":
        items = tuple(sorted((features or {}).items()))
        return PartialAssignment(items, cls)

    def matches(self, eq: Sequence[int], outcome: int | None) -> bool:
        if self.cls is not None and outcome != self.cls:
            return False
        return all(eq[i] == j for i, j in self.features)

    def feature_scope(self) -> set[int]:
        return {i for i, _ in self.features}

    def is_empty(self) -> bool:
        return not self.features and self.cls is None


@dataclass
class PlausibilityModel:
    forest: Forest
    partition: DomainPartition
    evaluator: ForestEvaluator

    @property
    def feature_domain_sizes(self) -> tuple[int, ...]:
        return self.partition.effective_counts

    @property
    def tree_domain_sizes(self) -> tuple[int, ...]:
        return tuple(len(t.rules) for t in self.forest.trees)

    @property
    def n_classes(self) -> int:
        return len(self.forest.classes)


def build_model(forest: Forest, partition: DomainPartition) -> PlausibilityModel:
    return PlausibilityModel(forest, partition, ForestEvaluator(forest, partition))


def tree_factor_eval(model: PlausibilityModel, tree_index: int, assignment: Assignment) -> int:
    """1 iff the tree variable names the rule the feature assignment activates."""
    active = model.evaluator.active_rule_index(tree_index, assignment.features)
    return 1 if assignment.rules[tree_index] == active else 0


def class_factor_eval(model: PlausibilityModel, assignment: Assignment) -> int:
    """1 iff the class variable names the strict majority winner of the assigned rules."""
    counts = [0] * model.n_classes
    for t, r in enumerate(assignment.rules):
        counts[model.evaluator.rule_classes[t][r]] += 1
    best = max(counts)
    if counts.count(best) > 1:
        return 0
    return 1 if counts[assignment.cls] == best else 0


def plausibility(model: PlausibilityModel, assignment: Assignment) -> int:
    for t in range(len(model.forest.trees)):
        if not tree_factor_eval(model, t, assignment):
            return 0
    return class_factor_eval(model, assignment)


def assignment_count(model: PlausibilityModel) -> int:
    n = model.n_classes
    for size in model.feature_domain_sizes + model.tree_domain_sizes:
        n *= size
    return n


def enumerate_assignments(model: PlausibilityModel):
    """Every full assignment; only feasible for very small models."""
    feature_space = product(*(range(c) for c in model.feature_domain_sizes))
    for features in feature_space:
        for rules in product(*(range(c) for c in model.tree_domain_sizes)):
            for cls in range(model.n_classes):
                yield Assignment(features, rules, cls)


def complete_assignment(model: PlausibilityModel, eq: Sequence[int]) -> Assignment | None:
    """Deterministic completion of a feature assignment; None when the vote ties."""
    cls = model.evaluator.outcome(eq)
    if cls is None:
        return None
    return Assignment(tuple(eq), model.evaluator.rule_indices(eq), cls)


def partition_function_exact(model: PlausibilityModel, cap: int) -> int:
    """Total plausibility mass = number of non-ambiguous equivalence classes."""
    total = class_count(model.partition)
    if total > cap:
        raise CapExceededError(
            f"{total} equivalence classes exceed the cap of {cap}; use the sampler")
    return sum(1 for eq in enumerate_classes(model.partition)
               if model.evaluator.outcome(eq) is not None)


def query_exact(model: PlausibilityModel, target: PartialAssignment,
                condition: PartialAssignment, cap: int) -> Fraction:
    """Exact conditional probability under the normalized factor model.

    Counts equivalence classes with positive plausibility mass; raises
    UnsatisfiableConditionError when the condition has none.
    """
    if target.feature_scope() & condition.feature_scope() or (
            target.cls is not None and condition.cls is not None):
        raise ValueError("target and condition scopes must be disjoint")
    total = class_count(model.partition)
    if total > cap:
        raise CapExceededError(
            f"{total} equivalence classes exceed the cap of {cap}; use the sampler")
    num = den = 0
    for eq in enumerate_classes(model.partition):
        y = model.evaluator.outcome(eq)
        if y is None:
            continue
        if condition.matches(eq, y):
            den += 1
            if target.matches(eq, y):
                num += 1
    if den == 0:
        raise UnsatisfiableConditionError("condition holds in no stable state")
    return Fraction(num, den)
