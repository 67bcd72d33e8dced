"""Finite quotient of the input space induced by a forest's feature conditions.

Every feature domain splits into the finest sets the forest can tell apart:
declared singletons for categorical features, half-open threshold intervals
(lo, hi] for numeric ones. An input's characteristic vector picks one set per
feature; two inputs are indistinguishable exactly when their vectors agree,
and all inputs in one equivalence class are classified identically.

Features a forest never tests are collapsed to a single representative set
for enumeration and sampling, so reports can never mention them.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass
from itertools import product
from typing import NamedTuple, Sequence

from .forest import CATEGORICAL, NUMERIC, OP_EQ, Forest, Leaf, iter_tests

INF = math.inf


class CapExceededError(RuntimeError):
    """Exact enumeration was refused because the class space exceeds the cap."""


@dataclass(frozen=True)
class PartitionSet:
    """One cell of a feature's domain partition.

    Categorical cells hold a single value; numeric cells are intervals
    (lo, hi] with lo/hi possibly infinite.
    """

    kind: str
    value: str | None = None
    lo: float = -INF
    hi: float = INF

    def contains(self, v) -> bool:
        if self.kind == CATEGORICAL:
            return v == self.value
        return self.lo < v <= self.hi

    def render(self) -> str:
        if self.kind == CATEGORICAL:
            return "{%s}" % self.value
        lo = "-inf" if self.lo == -INF else _fmt(self.lo)
        if self.hi == INF:
            return f"({lo}, inf)"
        return f"({lo}, {_fmt(self.hi)}]"

    def representative(self):
        """An arbitrary concrete value inside the cell."""
        if self.kind == CATEGORICAL:
            return self.value
        if self.hi != INF:
            return self.hi
        if self.lo != -INF:
            return self.lo + 1.0
        return 0.0


def _fmt(v: float) -> str:
    return f"{int(v)}" if v == int(v) else f"{v}"


@dataclass(frozen=True)
class DomainPartition:
    """Per-feature partition sets plus the thresholds they came from."""

    sets: tuple[tuple[PartitionSet, ...], ...]
    thresholds: tuple[tuple[float, ...], ...]  # sorted, numeric features only
    used: tuple[bool, ...]

    @property
    def counts(self) -> tuple[int, ...]:
        return tuple(len(s) for s in self.sets)

    @property
    def effective_counts(self) -> tuple[int, ...]:
        """Cell counts with unused features collapsed to one representative."""
        return tuple(len(s) if u else 1 for s, u in zip(self.sets, self.used))


def build_partition(forest: Forest) -> DomainPartition:
    """Partition every feature domain along the conditions occurring in the forest."""
    k = len(forest.features)
    thresholds: list[set[float]] = [set() for _ in range(k)]
    used = [False] * k
    for test in iter_tests(forest):
        used[test.feature] = True
        if test.op != OP_EQ:
            thresholds[test.feature].add(float(test.value))
    sets: list[tuple[PartitionSet, ...]] = []
    sorted_thresholds: list[tuple[float, ...]] = []
    for i, feat in enumerate(forest.features):
        if feat.kind == CATEGORICAL:
            sets.append(tuple(PartitionSet(CATEGORICAL, value=v) for v in feat.values))
            sorted_thresholds.append(())
        else:
            ts = sorted(thresholds[i])
            bounds = [-INF] + ts + [INF]
            sets.append(tuple(
                PartitionSet(NUMERIC, lo=lo, hi=hi) for lo, hi in zip(bounds, bounds[1:])))
            sorted_thresholds.append(tuple(ts))
    return DomainPartition(tuple(sets), tuple(sorted_thresholds), tuple(used))


def characteristic(partition: DomainPartition, x: Sequence) -> tuple[int, ...]:
    """Index of the partition set containing each feature value (0-based)."""
    out = []
    for i, cells in enumerate(partition.sets):
        if cells[0].kind == CATEGORICAL:
            for j, cell in enumerate(cells):
                if cell.value == x[i]:
                    out.append(j)
                    break
            else:
                raise ValueError(f"value {x[i]!r} not declared for feature {i}")
        else:
            # (lo, hi] cells: boundary values belong to the left interval.
            out.append(bisect_left(partition.thresholds[i], float(x[i])))
    return tuple(out)


def indistinguishable(partition: DomainPartition, x1: Sequence, x2: Sequence) -> bool:
    return characteristic(partition, x1) == characteristic(partition, x2)


def class_count(partition: DomainPartition) -> int:
    """Number of enumerable equivalence classes (unused features collapsed)."""
    n = 1
    for c in partition.effective_counts:
        n *= c
    return n


def enumerate_classes(partition: DomainPartition):
    """All equivalence-class index vectors, in lexicographic order."""
    return product(*(range(c) for c in partition.effective_counts))


def representative_input(partition: DomainPartition, eq: Sequence[int]) -> list:
    """A concrete input lying in the given equivalence class."""
    return [cells[j].representative() for cells, j in zip(partition.sets, eq)]


class ForestEvaluator:
    """Symbolic forest evaluation over equivalence-class index vectors.

    Each tree is compiled into nested tuples whose tests compare partition
    indices directly: by construction every cell either wholly satisfies or
    wholly violates every condition in the forest, so a numeric test X <= t
    holds iff the cell index is at most t's rank among the feature's
    thresholds, and a categorical test X = v iff the index equals v's rank.
    Leaves carry the rule index in leaf order.
    """

    def __init__(self, forest: Forest, partition: DomainPartition):
        self.forest = forest
        self.partition = partition
        self.compiled = []
        self.rule_classes = []
        for tree in forest.trees:
            counter = [0]
            self.compiled.append(self._compile(tree.root, counter))
            self.rule_classes.append([r.conclusion for r in tree.rules])
        self.n_classes = len(forest.classes)

    def _compile(self, node, counter):
        if isinstance(node, Leaf):
            idx = counter[0]
            counter[0] += 1
            return idx
        lit = node.test
        feat = self.forest.features[lit.feature]
        if feat.kind == CATEGORICAL:
            limit = feat.values.index(lit.value)
            is_eq = True
        else:
            # Satisfied iff the cell's upper bound is at most the threshold.
            limit = self.partition.thresholds[lit.feature].index(float(lit.value))
            is_eq = False
        return (
            lit.feature,
            limit,
            is_eq,
            self._compile(node.true_branch, counter),
            self._compile(node.false_branch, counter),
        )

    def active_rule_index(self, tree_index: int, eq: Sequence[int]) -> int:
        node = self.compiled[tree_index]
        while type(node) is tuple:
            feature, limit, is_eq, t_branch, f_branch = node
            v = eq[feature]
            if (v == limit) if is_eq else (v <= limit):
                node = t_branch
            else:
                node = f_branch
        return node

    def rule_indices(self, eq: Sequence[int]) -> tuple[int, ...]:
        return tuple(self.active_rule_index(t, eq) for t in range(len(self.compiled)))

    def votes(self, eq: Sequence[int]) -> list[int]:
        counts = [0] * self.n_classes
        for compiled, classes in zip(self.compiled, self.rule_classes):
            node = compiled
            while type(node) is tuple:
                feature, limit, is_eq, t_branch, f_branch = node
                v = eq[feature]
                if (v == limit) if is_eq else (v <= limit):
                    node = t_branch
                else:
                    node = f_branch
            counts[classes[node]] += 1
        return counts

    def outcome(self, eq: Sequence[int]) -> int | None:
        """Majority-vote class of every input in the class, or None on a tie."""
        counts = self.votes(eq)
        best = max(counts)
        if counts.count(best) > 1:
            return None
        return counts.index(best)


def classify_class(forest: Forest, partition: DomainPartition, eq: Sequence[int]) -> int | None:
    return ForestEvaluator(forest, partition).outcome(eq)


class AmbiguityCount(NamedTuple):
    ambiguous: int
    total: int


DEFAULT_CLASS_CAP = 1 << 22


def count_ambiguous_exact(forest: Forest, partition: DomainPartition,
                          cap: int = DEFAULT_CLASS_CAP) -> AmbiguityCount:
    """Count equivalence classes the forest leaves undecided, by enumeration."""
    total = class_count(partition)
    if total > cap:
        raise CapExceededError(
            f"{total} equivalence classes exceed the cap of {cap}; use the sampler")
    evaluator = ForestEvaluator(forest, partition)
    ambiguous = sum(1 for eq in enumerate_classes(partition) if evaluator.outcome(eq) is None)
    return AmbiguityCount(ambiguous, total)
