"""Train the experiment forests and export them as committed fixtures."""

from __future__ import annotations

import json
from functools import lru_cache
from pathlib import Path

import numpy as np
from sklearn.datasets import load_iris
from sklearn.ensemble import RandomForestClassifier

from .datasets import ensure_csv, read_csv
from .export import CATEGORICAL, NUMERIC, FeatureSpec, export_forest, export_manifest

DATASETS = ("iris", "mushroom", "pima")

N_TREES = 100
MAX_DEPTH = 8


def one_hot(columns, rows):
    """Expand categorical columns into 0/1 columns named column_value."""
    values = {c: sorted({r[c] for r, _ in rows}) for c in columns}
    names = [f"{c}_{v}" for c in columns for v in values[c]]
    matrix = np.zeros((len(rows), len(names)), dtype=float)
    index = {name: j for j, name in enumerate(names)}
    for i, (row, _) in enumerate(rows):
        for c in columns:
            matrix[i, index[f"{c}_{row[c]}"]] = 1.0
    return names, matrix


def load_dataset(name: str):
    """(feature specs, X, y labels) for a supported dataset name."""
    if name == "iris":
        data = load_iris()
        specs = [FeatureSpec(n, NUMERIC) for n in data.feature_names]
        y = np.asarray([data.target_names[t] for t in data.target])
        return specs, data.data.astype(float), y
    if name == "mushroom":
        columns, rows = read_csv(ensure_csv("mushroom"))
        names, matrix = one_hot(columns, rows)
        specs = [FeatureSpec(n, CATEGORICAL) for n in names]
        y = np.asarray([label for _, label in rows])
        return specs, matrix, y
    if name == "pima":
        columns, rows = read_csv(ensure_csv("pima"))
        matrix = np.asarray([[float(r[c]) for c in columns] for r, _ in rows])
        specs = [FeatureSpec(c, NUMERIC) for c in columns]
        y = np.asarray(["Pos" if label == "1" else "Neg" for _, label in rows])
        return specs, matrix, y
    raise ValueError(f"unknown dataset {name!r} (supported: {', '.join(DATASETS)})")


@lru_cache(maxsize=4)
def train(name: str, seed: int) -> tuple[RandomForestClassifier, list[FeatureSpec]]:
    specs, matrix, y = load_dataset(name)
    model = RandomForestClassifier(n_estimators=N_TREES, max_depth=MAX_DEPTH,
                                   random_state=seed)
    model.fit(matrix, y)
    return model, specs


def make_fixtures(name: str, seed: int) -> tuple[str, dict]:
    """Train, export, and describe one dataset's forest."""
    model, specs = train(name, seed)
    document = export_forest(model, specs)
    manifest = export_manifest(model, specs, name, seed)
    return document, manifest


def write_fixtures(out_dir: Path, name: str, seed: int) -> Path:
    document, manifest = make_fixtures(name, seed)
    out_dir.mkdir(parents=True, exist_ok=True)
    doc_path = out_dir / f"{name}.forest.json"
    doc_path.write_text(document + "\n")
    (out_dir / f"{name}.manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return doc_path
