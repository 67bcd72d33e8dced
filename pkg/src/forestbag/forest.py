"""Random forest classifiers represented as exhaustive, exclusive rule sets.

A forest is a list of decision trees over declared features. Each tree is
equivalent to the set of rules obtained by reading one root-to-leaf path per
leaf: the true branch of a test contributes the positive literal, the false
branch its negation. Exactly one rule per tree fires on any full input (the
active rule). The forest classifies by strict majority vote over the trees'
active-rule conclusions and returns None on a tie.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterator, Sequence

CATEGORICAL = "categorical"
NUMERIC = "numeric"

OP_EQ = "eq"
OP_LE = "le"


class ForestFormatError(ValueError):
    """Raised when an interchange document or forest structure is invalid."""


@dataclass(frozen=True)
class Feature:
    name: str
    kind: str
    values: tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind not in (CATEGORICAL, NUMERIC):
            raise ForestFormatError(f"unknown feature kind {self.kind!r}")
        if self.kind == CATEGORICAL:
            if not self.values:
                raise ForestFormatError(f"categorical feature {self.name!r} declares no values")
            if len(set(self.values)) != len(self.values):
                raise ForestFormatError(f"categorical feature {self.name!r} has duplicate values")
        elif self.values:
            raise ForestFormatError(f"numeric feature {self.name!r} must not declare values")


@dataclass(frozen=True)
class Literal:
    """A feature condition (X=v or X<=v) or its negation."""

    feature: int
    op: str
    value: object
    positive: bool = True

    def negated(self) -> "Literal":
        return Literal(self.feature, self.op, self.value, not self.positive)

    def holds(self, x: Sequence) -> bool:
        if self.op == OP_EQ:
            sat = x[self.feature] == self.value
        else:
            sat = x[self.feature] <= self.value
        return sat if self.positive else not sat


@dataclass(frozen=True)
class Rule:
    premise: tuple[Literal, ...]
    conclusion: int

    def fires(self, x: Sequence) -> bool:
        return all(lit.holds(x) for lit in self.premise)


@dataclass(frozen=True)
class Leaf:
    conclusion: int


@dataclass(frozen=True)
class Split:
    test: Literal  # always positive
    true_branch: "Leaf | Split"
    false_branch: "Leaf | Split"


@dataclass(frozen=True)
class Tree:
    root: Leaf | Split
    rules: tuple[Rule, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if not self.rules:
            object.__setattr__(self, "rules", tuple(derive_rules(self.root)))

    def active_rule_index(self, x: Sequence) -> int:
        """Index (in leaf order) of the unique rule whose premise x satisfies."""
        node = self.root
        index = 0
        while isinstance(node, Split):
            if node.test.holds(x):
                node = node.true_branch
            else:
                index += _leaf_count(node.true_branch)
                node = node.false_branch
        return index


def _leaf_count(node) -> int:
    if isinstance(node, Leaf):
        return 1
    return _leaf_count(node.true_branch) + _leaf_count(node.false_branch)


def derive_rules(root) -> list[Rule]:
    """One rule per leaf; premise is the conjunction of path literals."""
    rules: list[Rule] = []

    def walk(node, path: list[Literal]):
        if isinstance(node, Leaf):
            rules.append(Rule(tuple(path), node.conclusion))
            return
        walk(node.true_branch, path + [node.test])
        walk(node.false_branch, path + [node.test.negated()])

    walk(root, [])
    return rules


@dataclass(frozen=True)
class Forest:
    features: tuple[Feature, ...]
    classes: tuple[str, ...]
    trees: tuple[Tree, ...]

    def __post_init__(self):
        names = [f.name for f in self.features]
        if len(set(names)) != len(names):
            raise ForestFormatError("feature names must be unique")
        if len(self.classes) < 2:
            raise ForestFormatError("a forest needs at least two classes")
        if len(set(self.classes)) != len(self.classes):
            raise ForestFormatError("class labels must be unique")
        for t, tree in enumerate(self.trees):
            self._check_node(tree.root, t)

    def _check_node(self, node, tree_index: int):
        if isinstance(node, Leaf):
            if not 0 <= node.conclusion < len(self.classes):
                raise ForestFormatError(f"tree {tree_index}: leaf class {node.conclusion} out of range")
            return
        lit = node.test
        if not 0 <= lit.feature < len(self.features):
            raise ForestFormatError(f"tree {tree_index}: unknown feature index {lit.feature}")
        feat = self.features[lit.feature]
        if lit.op == OP_EQ:
            if feat.kind != CATEGORICAL:
                raise ForestFormatError(
                    f"tree {tree_index}: 'eq' test on non-categorical feature {feat.name!r}")
            if lit.value not in feat.values:
                raise ForestFormatError(
                    f"tree {tree_index}: value {lit.value!r} not declared for feature {feat.name!r}")
        elif lit.op == OP_LE:
            if feat.kind != NUMERIC:
                raise ForestFormatError(
                    f"tree {tree_index}: 'le' test on non-numeric feature {feat.name!r}")
        else:
            raise ForestFormatError(f"tree {tree_index}: unknown operator {lit.op!r}")
        self._check_node(node.true_branch, tree_index)
        self._check_node(node.false_branch, tree_index)

    def feature_index(self, name: str) -> int:
        for i, f in enumerate(self.features):
            if f.name == name:
                return i
        raise KeyError(name)

    def class_index(self, label: str) -> int:
        return self.classes.index(label)


def tree_rules(tree: Tree) -> list[Rule]:
    return list(tree.rules)


def active_rule(tree: Tree, x: Sequence) -> Rule:
    return tree.rules[tree.active_rule_index(x)]


def votes(forest: Forest, x: Sequence) -> list[int]:
    """Vote count per class over the trees' active rules."""
    counts = [0] * len(forest.classes)
    for tree in forest.trees:
        counts[active_rule(tree, x).conclusion] += 1
    return counts


def classify(forest: Forest, x: Sequence) -> int | None:
    """Class index with a strictly maximal vote count, or None on a tie."""
    counts = votes(forest, x)
    best = max(counts)
    if counts.count(best) > 1:
        return None
    return counts.index(best)


# Interchange format.
#
# { "features": [ {"name":"A","kind":"categorical","values":["0","1"]},
#                 {"name":"Age","kind":"numeric"} ],
#   "classes": ["Pos","Neg"],
#   "trees": [ {"root": <node>} ] }
# <node> := {"test":{"feature":<idx>,"op":"eq"|"le","value":<v>},
#            "true":<node>,"false":<node>}
#         | {"leaf":<class idx>}


def _parse_node(obj, path: str):
    if not isinstance(obj, dict):
        raise ForestFormatError(f"{path}: node must be an object")
    if "leaf" in obj:
        conclusion = obj["leaf"]
        if not isinstance(conclusion, int) or isinstance(conclusion, bool):
            raise ForestFormatError(f"{path}: leaf class index must be an integer")
        return Leaf(conclusion)
    if "test" not in obj:
        raise ForestFormatError(f"{path}: node needs either 'leaf' or 'test'")
    test = obj["test"]
    for key in ("feature", "op", "value"):
        if key not in test:
            raise ForestFormatError(f"{path}: test is missing {key!r}")
    if "true" not in obj or "false" not in obj:
        raise ForestFormatError(f"{path}: internal node needs 'true' and 'false' branches")
    op = test["op"]
    value = test["value"]
    if op == OP_LE:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ForestFormatError(f"{path}: 'le' test value must be numeric")
        value = float(value)
    lit = Literal(test["feature"], op, value)
    return Split(lit,
                 _parse_node(obj["true"], path + ".true"),
                 _parse_node(obj["false"], path + ".false"))


def parse_forest(document: str) -> Forest:
    """Parse an interchange-format document and validate all invariants."""
    try:
        data = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ForestFormatError(f"malformed document: {exc}") from exc
    if not isinstance(data, dict):
        raise ForestFormatError("document root must be an object")
    for key in ("features", "classes", "trees"):
        if key not in data:
            raise ForestFormatError(f"document is missing {key!r}")
    features = []
    for i, f in enumerate(data["features"]):
        if "name" not in f or "kind" not in f:
            raise ForestFormatError(f"feature {i} is missing 'name' or 'kind'")
        features.append(Feature(f["name"], f["kind"], tuple(f.get("values", ()))))
    trees = []
    for t, entry in enumerate(data["trees"]):
        if "root" not in entry:
            raise ForestFormatError(f"tree {t} has no root (empty tree)")
        trees.append(Tree(_parse_node(entry["root"], f"trees[{t}]")))
    if not isinstance(data["classes"], list):
        raise ForestFormatError("'classes' must be a list")
    return Forest(tuple(features), tuple(str(c) for c in data["classes"]), tuple(trees))


def _node_to_obj(node):
    if isinstance(node, Leaf):
        return {"leaf": node.conclusion}
    return {
        "test": {"feature": node.test.feature, "op": node.test.op, "value": node.test.value},
        "true": _node_to_obj(node.true_branch),
        "false": _node_to_obj(node.false_branch),
    }


def serialize_forest(forest: Forest) -> str:
    doc = {
        "features": [
            {"name": f.name, "kind": f.kind, **({"values": list(f.values)} if f.kind == CATEGORICAL else {})}
            for f in forest.features
        ],
        "classes": list(forest.classes),
        "trees": [{"root": _node_to_obj(t.root)} for t in forest.trees],
    }
    return json.dumps(doc, indent=2)


def load_forest(path: str) -> Forest:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_forest(fh.read())


def iter_tests(forest: Forest) -> Iterator[Literal]:
    """All test conditions occurring in the forest, in tree order."""
    def walk(node):
        if isinstance(node, Split):
            yield node.test
            yield from walk(node.true_branch)
            yield from walk(node.false_branch)

    for tree in forest.trees:
        yield from walk(tree.root)
