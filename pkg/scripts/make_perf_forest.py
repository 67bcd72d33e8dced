#!/usr/bin/env python3
"""Generate the committed 100-tree benchmark forest (tests/fixtures/perf100.forest.json).

Deterministic: rerunning reproduces the committed fixture byte for byte.
"""

import random
from pathlib import Path

from forestbag.forest import (
    CATEGORICAL,
    NUMERIC,
    OP_EQ,
    OP_LE,
    Feature,
    Forest,
    Leaf,
    Literal,
    Split,
    Tree,
    serialize_forest,
)

SEED = 20240
N_TREES = 100
MAX_DEPTH = 6
OUT = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "perf100.forest.json"


def build_features(rnd):
    features = []
    thresholds = {}
    for i in range(6):
        name = f"m{i}"
        features.append(Feature(name, NUMERIC))
        thresholds[len(features) - 1] = sorted(
            rnd.sample([round(0.5 * k, 1) for k in range(2, 40)], k=5))
    for i in range(4):
        features.append(Feature(f"c{i}", CATEGORICAL, ("0", "1", "2")))
    return tuple(features), thresholds


def random_node(rnd, features, thresholds, depth):
    if depth == 0 or rnd.random() < 0.2:
        return Leaf(rnd.randrange(2))
    i = rnd.randrange(len(features))
    feat = features[i]
    if feat.kind == CATEGORICAL:
        test = Literal(i, OP_EQ, rnd.choice(feat.values))
    else:
        test = Literal(i, OP_LE, rnd.choice(thresholds[i]))
    return Split(test,
                 random_node(rnd, features, thresholds, depth - 1),
                 random_node(rnd, features, thresholds, depth - 1))


def main():
    rnd = random.Random(SEED)
    features, thresholds = build_features(rnd)
    trees = tuple(Tree(random_node(rnd, features, thresholds, MAX_DEPTH))
                  for _ in range(N_TREES))
    forest = Forest(features, ("neg", "pos"), trees)
    OUT.write_text(serialize_forest(forest) + "\n")
    rules = sum(len(t.rules) for t in forest.trees)
    print(f"wrote {OUT} ({len(forest.trees)} trees, {rules} rules)")


if __name__ == "__main__":
    main()
