"""Dataset access: iris from scikit-learn, mushroom and PIMA regenerated.

The original mushroom and diabetes tables are not redistributable from this
environment, so deterministic generators reproduce their schema and the
dependencies that matter for the experiments (odor almost determines
edibility; glucose and BMI drive the diabetes label). Generated CSVs are
committed under data/ and reloaded from there when present.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

DATA_DIR = Path(__file__).resolve().parent.parent.parent / "data"

MUSHROOM_ROWS = 2400
PIMA_ROWS = 768

MUSHROOM_COLUMNS = ["cap-shape", "cap-surface", "bruises", "odor", "gill-size",
                    "gill-color", "stalk-surface-above-ring", "ring-type",
                    "spore-print-color"]

# Per-class value distributions. Poisonousness is redundantly encoded (odor,
# spore print, gill color/size, ring type, stalk surface, bruises), like the
# original table, with foul odor implying poisonous outright.
MUSHROOM_PROFILE = {
    "odor": (list("fyspcmn"), [0.50, 0.10, 0.10, 0.10, 0.05, 0.03, 0.12],
             list("nal"), [0.62, 0.20, 0.18]),
    "spore-print-color": (list("hwkn"), [0.50, 0.30, 0.10, 0.10],
                          list("knwh"), [0.44, 0.44, 0.10, 0.02]),
    "gill-color": (list("bghknpuw"), [0.42, 0.10, 0.10, 0.08, 0.10, 0.08, 0.06, 0.06],
                   list("bghknpuw"), [0.02, 0.14, 0.14, 0.14, 0.16, 0.16, 0.12, 0.12]),
    "gill-size": (list("nb"), [0.62, 0.38], list("nb"), [0.16, 0.84]),
    "ring-type": (list("lep"), [0.38, 0.34, 0.28], list("lep"), [0.04, 0.22, 0.74]),
    "stalk-surface-above-ring": (list("ksf"), [0.55, 0.35, 0.10],
                                 list("ksf"), [0.10, 0.68, 0.22]),
    "bruises": (list("ft"), [0.72, 0.28], list("ft"), [0.36, 0.64]),
    "cap-shape": (list("bcfksx"), [1 / 6.0] * 6, list("bcfksx"), [1 / 6.0] * 6),
    "cap-surface": (list("fgsy"), [0.25] * 4, list("fgsy"), [0.25] * 4),
}


def generate_mushroom(rows: int = MUSHROOM_ROWS, seed: int = 8124):
    """Rows of (columns dict, label) with redundant poisonousness indicators."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(rows):
        poisonous = rng.random() < 0.48
        row = {}
        for column in MUSHROOM_COLUMNS:
            pv, pp, ev, ep = MUSHROOM_PROFILE[column]
            values, probs = (pv, pp) if poisonous else (ev, ep)
            row[column] = values[rng.choice(len(values), p=probs)]
        out.append((row, "poisonous" if poisonous else "edible"))
    return out


PIMA_COLUMNS = ["Pregnancies", "Glucose", "BloodPressure", "SkinThickness",
                "Insulin", "BMI", "DiabetesPedigreeFunction", "Age"]


def generate_pima(rows: int = PIMA_ROWS, seed: int = 768):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(rows):
        pregnancies = int(rng.poisson(3.8))
        glucose = float(np.clip(rng.normal(121, 31), 45, 199))
        blood_pressure = float(np.clip(rng.normal(69, 12), 30, 120))
        skin = float(np.clip(rng.normal(23, 10), 0, 60))
        insulin = float(np.clip(rng.gamma(2.0, 55.0), 0, 600))
        bmi = float(np.clip(rng.normal(32, 7), 15, 60))
        pedigree = float(np.clip(rng.gamma(2.2, 0.22), 0.05, 2.4))
        age = float(np.clip(rng.normal(33, 11), 21, 81))
        score = (0.045 * (glucose - 121) + 0.09 * (bmi - 32) + 0.03 * (age - 33)
                 + 1.1 * (pedigree - 0.47) + 0.05 * (pregnancies - 3.8))
        label = 1 if rng.random() < 1.0 / (1.0 + np.exp(-(score - 0.55))) else 0
        row = dict(zip(PIMA_COLUMNS, [pregnancies, round(glucose, 1),
                                      round(blood_pressure, 1), round(skin, 1),
                                      round(insulin, 1), round(bmi, 2),
                                      round(pedigree, 3), round(age, 1)]))
        out.append((row, str(label)))
    return out


def write_csv(path: Path, rows, columns):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns + ["class"])
        for values, label in rows:
            writer.writerow([values[c] for c in columns] + [label])


def read_csv(path: Path):
    with open(path, "r", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        columns = header[:-1]
        rows = [(dict(zip(columns, record[:-1])), record[-1]) for record in reader]
    return columns, rows


def ensure_csv(name: str) -> Path:
    """Return the committed CSV for a generated dataset, creating it if absent."""
    path = DATA_DIR / f"{name}.csv"
    if not path.exists():
        DATA_DIR.mkdir(parents=True, exist_ok=True)
        if name == "mushroom":
            write_csv(path, generate_mushroom(), MUSHROOM_COLUMNS)
        elif name == "pima":
            write_csv(path, generate_pima(), PIMA_COLUMNS)
        else:
            raise ValueError(f"no generator for dataset {name!r}")
    return path
