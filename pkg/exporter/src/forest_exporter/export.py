"""Convert fitted scikit-learn tree ensembles into the forest interchange format.

Numeric splits map node-for-node to `le` tests (left child = satisfied).
One-hot categorical columns are declared as categorical {0,1} features; their
0.5 splits become `eq "1"` tests whose satisfied branch is the right child.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from sklearn.base import is_classifier

CATEGORICAL = "categorical"
NUMERIC = "numeric"


class ExportError(ValueError):
    """Raised for ensembles the interchange format cannot represent."""


@dataclass(frozen=True)
class FeatureSpec:
    """One training-matrix column: name plus interchange kind."""

    name: str
    kind: str

    def __post_init__(self):
        if self.kind not in (CATEGORICAL, NUMERIC):
            raise ExportError(f"unknown feature kind {self.kind!r}")


def _convert_node(tree, index: int, features: list[FeatureSpec]) -> dict:
    if tree.children_left[index] < 0:
        counts = tree.value[index][0]
        return {"leaf": int(np.argmax(counts))}
    feature = int(tree.feature[index])
    threshold = float(tree.threshold[index])
    spec = features[feature]
    left = _convert_node(tree, int(tree.children_left[index]), features)
    right = _convert_node(tree, int(tree.children_right[index]), features)
    if spec.kind == CATEGORICAL:
        if not 0.0 < threshold < 1.0:
            raise ExportError(
                f"split on one-hot column {spec.name!r} at {threshold} is not binary")
        # x = 1 lies right of the 0.5 split, so "eq 1" is the right branch.
        return {"test": {"feature": feature, "op": "eq", "value": "1"},
                "true": right, "false": left}
    return {"test": {"feature": feature, "op": "le", "value": threshold},
            "true": left, "false": right}


def export_forest(ensemble, features: list[FeatureSpec],
                  class_names: list[str] | None = None) -> str:
    """Interchange-format document for a fitted axis-aligned tree ensemble.

    class_names, when given, relabels ensemble.classes_ position by position
    (the default is str() of each class).
    """
    if not is_classifier(ensemble):
        raise ExportError("only classification ensembles are supported")
    if not hasattr(ensemble, "estimators_"):
        raise ExportError("ensemble is not fitted")
    classes = list(ensemble.classes_)
    if class_names is None:
        class_names = [str(c) for c in classes]
    if len(class_names) != len(classes):
        raise ExportError("class_names must match the ensemble's classes")
    n_features = ensemble.n_features_in_
    if len(features) != n_features:
        raise ExportError(
            f"{len(features)} feature specs for an ensemble over {n_features} columns")
    trees = []
    for estimator in ensemble.estimators_:
        if not hasattr(estimator, "tree_"):
            raise ExportError("ensemble members must be decision trees")
        trees.append({"root": _convert_node(estimator.tree_, 0, features)})
    document = {
        "features": [
            {"name": f.name, "kind": f.kind,
             **({"values": ["0", "1"]} if f.kind == CATEGORICAL else {})}
            for f in features
        ],
        "classes": class_names,
        "trees": trees,
    }
    return json.dumps(document, indent=2)


def export_manifest(ensemble, features: list[FeatureSpec], dataset: str,
                    training_seed: int, class_names: list[str] | None = None) -> dict:
    from . import __version__

    if class_names is None:
        class_names = [str(c) for c in ensemble.classes_]
    return {
        "dataset": dataset,
        "training_seed": training_seed,
        "exporter_version": __version__,
        "model": {
            "trees": len(ensemble.estimators_),
            "max_depth": int(max(e.tree_.max_depth for e in ensemble.estimators_)),
            "features": [f.name for f in features],
            "classes": class_names,
        },
    }
