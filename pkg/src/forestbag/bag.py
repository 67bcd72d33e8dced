"""Bipolar argumentation encoding of a forest's decision process.

Arguments come in three layers: one class argument per class, one rule
argument per tree rule and one feature argument per partition cell (cells of
unused features are collapsed to a single argument). Feature arguments of the
same feature attack each other, a feature argument attacks every rule whose
premise its cell contradicts, and rule arguments support their conclusion's
class argument while attacking all other class arguments.

Labellings map arguments to in/out/und. The majority-style semantics used
here accepts an argument when all its attackers are rejected or its accepted
supporters outnumber its non-rejected attackers, and rejects it in the
symmetric case; stable labellings additionally leave nothing undecided. The
stable labellings are in bijection with the non-ambiguous equivalence
classes, which is what makes exact reason checks a finite enumeration.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

from .forest import CATEGORICAL, Forest
from .partition import (
    CapExceededError,
    DomainPartition,
    ForestEvaluator,
    characteristic,
    class_count,
    enumerate_classes,
)

IN = "in"
OUT = "out"
UND = "und"


@dataclass(frozen=True)
class ClassArg:
    cls: int


@dataclass(frozen=True)
class RuleArg:
    tree: int
    rule: int


@dataclass(frozen=True)
class FeatureArg:
    feature: int
    part: int


Argument = ClassArg | RuleArg | FeatureArg
Labelling = dict


@dataclass
class Bag:
    forest: Forest
    partition: DomainPartition
    arguments: tuple[Argument, ...]
    attacks: frozenset[tuple[Argument, Argument]]
    supports: frozenset[tuple[Argument, Argument]]
    attackers: dict
    supporters: dict
    evaluator: ForestEvaluator

    @property
    def class_args(self) -> list[ClassArg]:
        return [a for a in self.arguments if isinstance(a, ClassArg)]

    @property
    def rule_args(self) -> list[RuleArg]:
        return [a for a in self.arguments if isinstance(a, RuleArg)]

    @property
    def feature_args(self) -> list[FeatureArg]:
        return [a for a in self.arguments if isinstance(a, FeatureArg)]


def _consistent_cells(partition: DomainPartition, forest: Forest, feature: int,
                      literals) -> frozenset[int]:
    """Cell indices consistent with every given literal on one feature.

    Every cell wholly satisfies or wholly violates every condition in the
    forest, so consistency reduces to index comparisons against the
    condition value's rank.
    """
    n = partition.effective_counts[feature]
    if forest.features[feature].kind == CATEGORICAL:
        allowed = set(range(n))
        values = forest.features[feature].values
        for lit in literals:
            rank = values.index(lit.value)
            if lit.positive:
                allowed &= {rank}
            else:
                allowed.discard(rank)
        return frozenset(allowed)
    lo, hi = 0, n - 1  # cells form intervals, so a conjunction is one range
    for lit in literals:
        rank = partition.thresholds[feature].index(float(lit.value))
        if lit.positive:
            hi = min(hi, rank)
        else:
            lo = max(lo, rank + 1)
    return frozenset(range(lo, hi + 1))


def _premise_by_feature(rule) -> dict[int, list]:
    grouped: dict[int, list] = {}
    for lit in rule.premise:
        grouped.setdefault(lit.feature, []).append(lit)
    return grouped


def build_bag(forest: Forest, partition: DomainPartition) -> Bag:
    """Construct the explanation graph for a forest and its domain partition."""
    classes = [ClassArg(y) for y in range(len(forest.classes))]
    rules = [RuleArg(t, r) for t, tree in enumerate(forest.trees)
             for r in range(len(tree.rules))]
    eff = partition.effective_counts
    features = [FeatureArg(i, j) for i in range(len(forest.features))
                for j in range(eff[i])]
    arguments = tuple(classes + rules + features)

    attacks: set[tuple[Argument, Argument]] = set()
    supports: set[tuple[Argument, Argument]] = set()

    for i in range(len(forest.features)):
        args_i = [a for a in features if a.feature == i]
        for a in args_i:
            for b in args_i:
                if a is not b:
                    attacks.add((a, b))

    for t, tree in enumerate(forest.trees):
        for r, rule in enumerate(tree.rules):
            rule_arg = RuleArg(t, r)
            for i, literals in _premise_by_feature(rule).items():
                allowed = _consistent_cells(partition, forest, i, literals)
                for j in range(eff[i]):
                    if j not in allowed:
                        attacks.add((FeatureArg(i, j), rule_arg))
            for y in range(len(forest.classes)):
                if y == rule.conclusion:
                    supports.add((rule_arg, ClassArg(y)))
                else:
                    attacks.add((rule_arg, ClassArg(y)))

    attackers = {a: [] for a in arguments}
    supporters = {a: [] for a in arguments}
    for src, dst in attacks:
        attackers[dst].append(src)
    for src, dst in supports:
        supporters[dst].append(src)
    return Bag(forest, partition, arguments, frozenset(attacks), frozenset(supports),
               attackers, supporters, ForestEvaluator(forest, partition))


def bag_stats(forest: Forest, partition: DomainPartition) -> dict:
    """Argument and edge counts of the explanation graph, without building it.

    Same numbers as build_bag, but linear in the forest: same-feature attacks
    and rule-class edges are counted arithmetically, feature-rule attacks via
    the per-rule consistent-cell ranges.
    """
    eff = partition.effective_counts
    n_rules = sum(len(t.rules) for t in forest.trees)
    attacks = sum(n * (n - 1) for n in eff)
    attacks += n_rules * (len(forest.classes) - 1)
    for tree in forest.trees:
        for rule in tree.rules:
            for i, literals in _premise_by_feature(rule).items():
                attacks += eff[i] - len(_consistent_cells(partition, forest, i, literals))
    return {
        "class_arguments": len(forest.classes),
        "rule_arguments": n_rules,
        "feature_arguments": sum(eff),
        "attacks": attacks,
        "supports": n_rules,
    }


def attackers_dominate(bag: Bag, labelling: Labelling, arg: Argument) -> bool:
    """Strictly more accepted attackers than non-rejected supporters."""
    n_att = sum(1 for b in bag.attackers[arg] if labelling[b] == IN)
    n_sup = sum(1 for b in bag.supporters[arg] if labelling[b] != OUT)
    return n_att > n_sup


def supporters_dominate(bag: Bag, labelling: Labelling, arg: Argument) -> bool:
    n_sup = sum(1 for b in bag.supporters[arg] if labelling[b] == IN)
    n_att = sum(1 for b in bag.attackers[arg] if labelling[b] != OUT)
    return n_sup > n_att


def is_bicomplete(bag: Bag, labelling: Labelling) -> bool:
    for arg in bag.arguments:
        accept = (all(labelling[b] == OUT for b in bag.attackers[arg])
                  or supporters_dominate(bag, labelling, arg))
        if (labelling[arg] == IN) != accept:
            return False
        if (labelling[arg] == OUT) != attackers_dominate(bag, labelling, arg):
            return False
    return True


def is_bistable(bag: Bag, labelling: Labelling) -> bool:
    if any(labelling[a] == UND for a in bag.arguments):
        return False
    return is_bicomplete(bag, labelling)


def effective_class(bag: Bag, x: Sequence) -> tuple[int, ...]:
    """Equivalence-class vector for a concrete input, unused features collapsed."""
    chi = characteristic(bag.partition, x)
    return tuple(j if used else 0 for j, used in zip(chi, bag.partition.used))


def labelling_from_class(bag: Bag, eq: Sequence[int]) -> Labelling:
    """The labelling induced by an equivalence class.

    Feature and rule arguments are forced by the class vector; class
    arguments are accepted or rejected by domination and left undecided on a
    vote tie.
    """
    labelling: Labelling = {}
    for arg in bag.feature_args:
        labelling[arg] = IN if eq[arg.feature] == arg.part else OUT
    active = bag.evaluator.rule_indices(eq)
    for arg in bag.rule_args:
        labelling[arg] = IN if active[arg.tree] == arg.rule else OUT
    for arg in bag.class_args:
        if supporters_dominate(bag, labelling, arg):
            labelling[arg] = IN
        elif attackers_dominate(bag, labelling, arg):
            labelling[arg] = OUT
        else:
            labelling[arg] = UND
    return labelling


def labelling_from_input(forest: Forest, bag: Bag, x: Sequence) -> Labelling:
    return labelling_from_class(bag, effective_class(bag, x))


def labelling_from_assignment(bag: Bag, feature_eq: Sequence[int],
                              rule_indices: Sequence[int], cls: int) -> Labelling:
    """Labelling induced by a full model assignment (all three layers forced)."""
    labelling: Labelling = {}
    for arg in bag.feature_args:
        labelling[arg] = IN if feature_eq[arg.feature] == arg.part else OUT
    for arg in bag.rule_args:
        labelling[arg] = IN if rule_indices[arg.tree] == arg.rule else OUT
    for arg in bag.class_args:
        labelling[arg] = IN if arg.cls == cls else OUT
    return labelling


def _check_cap(bag: Bag, cap: int):
    total = class_count(bag.partition)
    if total > cap:
        raise CapExceededError(
            f"{total} equivalence classes exceed the cap of {cap}; use the sampler")


def enumerate_bistable(bag: Bag, cap: int) -> list[tuple[tuple[int, ...], int]]:
    """All (equivalence class, accepted class) pairs with a stable labelling.

    Iterates equivalence classes rather than labelling space; the bijection
    with non-ambiguous classes makes this complete.
    """
    _check_cap(bag, cap)
    out = []
    for eq in enumerate_classes(bag.partition):
        y = bag.evaluator.outcome(eq)
        if y is not None:
            out.append((eq, y))
    return out


class ReasonCheck(NamedTuple):
    holds: bool
    vacuous: bool


def _feature_constraints(feature_args: Iterable[FeatureArg]) -> dict[int, int] | None:
    """Map feature -> cell index; None when two arguments contradict."""
    constraints: dict[int, int] = {}
    for arg in feature_args:
        if not isinstance(arg, FeatureArg):
            raise TypeError("reason candidates must be feature arguments")
        if arg.feature in constraints and constraints[arg.feature] != arg.part:
            return None
        constraints[arg.feature] = arg.part
    return constraints


def _matches(eq: Sequence[int], constraints: dict[int, int]) -> bool:
    return all(eq[i] == j for i, j in constraints.items())


def is_sufficient_reason_exact(bag: Bag, feature_args: Iterable[FeatureArg],
                               cls: int, cap: int) -> ReasonCheck:
    """Every stable labelling accepting the feature arguments accepts the class.

    Vacuously true (and flagged) when no stable labelling accepts them all.
    """
    _check_cap(bag, cap)
    constraints = _feature_constraints(feature_args)
    if constraints is None:
        return ReasonCheck(True, True)
    found = False
    for eq in enumerate_classes(bag.partition):
        if not _matches(eq, constraints):
            continue
        y = bag.evaluator.outcome(eq)
        if y is None:
            continue
        found = True
        if y != cls:
            return ReasonCheck(False, False)
    return ReasonCheck(True, not found)


def is_necessary_reason_exact(bag: Bag, feature_args: Iterable[FeatureArg],
                              cls: int, cap: int) -> ReasonCheck:
    """Every stable labelling accepting the class accepts the feature arguments."""
    _check_cap(bag, cap)
    constraints = _feature_constraints(feature_args)
    found = False
    for eq in enumerate_classes(bag.partition):
        if bag.evaluator.outcome(eq) != cls:
            continue
        found = True
        if constraints is None or not _matches(eq, constraints):
            return ReasonCheck(False, False)
    return ReasonCheck(True, not found)


def forces_class_exact(bag: Bag, feature_args: Iterable[FeatureArg],
                       cls: int, cap: int) -> ReasonCheck:
    """Every completion of the feature arguments is classified as the class.

    Stricter than is_sufficient_reason_exact: equivalence classes on which the
    forest ties count as counterexamples here, because their inputs are not
    classified as the class. This is the check used to shorten explanations.
    """
    _check_cap(bag, cap)
    constraints = _feature_constraints(feature_args)
    if constraints is None:
        return ReasonCheck(True, True)
    found = False
    for eq in enumerate_classes(bag.partition):
        if not _matches(eq, constraints):
            continue
        found = True
        if bag.evaluator.outcome(eq) != cls:
            return ReasonCheck(False, False)
    return ReasonCheck(True, not found)


def maximal_necessary_features(bag: Bag, cls: int, cap: int) -> tuple[set[FeatureArg], bool]:
    """Union of all singleton-necessary feature arguments for a class.

    Returns (arguments, vacuous). When no stable labelling accepts the class,
    every feature argument is vacuously necessary and the flag is set.
    """
    _check_cap(bag, cap)
    shared: list[int | None] = [None] * len(bag.forest.features)
    found = False
    for eq in enumerate_classes(bag.partition):
        if bag.evaluator.outcome(eq) != cls:
            continue
        if not found:
            shared = list(eq)
            found = True
        else:
            for i, j in enumerate(eq):
                if shared[i] != j:
                    shared[i] = None
    if not found:
        return set(bag.feature_args), True
    # Collapsed unused features share their index trivially; never report them.
    args = {FeatureArg(i, j) for i, j in enumerate(shared)
            if j is not None and bag.partition.used[i]}
    return args, False


def _arg_detail(bag: Bag, arg: Argument) -> str:
    if isinstance(arg, ClassArg):
        return bag.forest.classes[arg.cls]
    if isinstance(arg, RuleArg):
        return f"tree={arg.tree} rule={arg.rule}"
    name = bag.forest.features[arg.feature].name
    cell = bag.partition.sets[arg.feature][arg.part]
    return f"{name}:{cell.render()}"


def render_bag(bag: Bag) -> str:
    """Line-oriented graph dump with stable ordering, for diffing."""
    ids = {arg: n for n, arg in enumerate(bag.arguments)}
    kind = {ClassArg: "class", RuleArg: "rule", FeatureArg: "feature"}
    lines = [f"arg {ids[a]} {kind[type(a)]} {_arg_detail(bag, a)}" for a in bag.arguments]
    lines += [f"att {a} {b}" for a, b in sorted((ids[s], ids[d]) for s, d in bag.attacks)]
    lines += [f"sup {a} {b}" for a, b in sorted((ids[s], ids[d]) for s, d in bag.supports)]
    return "\n".join(lines) + "\n"
