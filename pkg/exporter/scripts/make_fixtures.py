#!/usr/bin/env python3
"""Regenerate the committed dataset CSVs and exported forest fixtures.

Deterministic end to end: dataset synthesis, training, and export all run
from fixed seeds, so reruns reproduce the committed artifacts.
"""

from pathlib import Path

from forest_exporter.datasets import DATA_DIR, ensure_csv
from forest_exporter.fixtures import DATASETS, write_fixtures

FIXTURE_DIR = Path(__file__).resolve().parents[2] / "fixtures"
TRAINING_SEED = 0


def main():
    for name in ("mushroom", "pima"):
        path = DATA_DIR / f"{name}.csv"
        if path.exists():
            path.unlink()
        print(f"regenerated {ensure_csv(name)}")
    for name in DATASETS:
        print(f"wrote {write_fixtures(FIXTURE_DIR, name, TRAINING_SEED)}")


if __name__ == "__main__":
    main()
