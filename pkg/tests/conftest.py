import json
from dataclasses import dataclass
from pathlib import Path

import pytest

from forestbag.bag import Bag, build_bag
from forestbag.factors import PlausibilityModel, build_model
from forestbag.forest import Forest, parse_forest
from forestbag.partition import DomainPartition, build_partition

FIXTURES = Path(__file__).parent / "fixtures"

CAP = 1 << 22


@dataclass
class Context:
    forest: Forest
    partition: DomainPartition
    bag: Bag
    model: PlausibilityModel


def make_context(forest: Forest) -> Context:
    partition = build_partition(forest)
    return Context(forest, partition, build_bag(forest, partition),
                   build_model(forest, partition))


@pytest.fixture(scope="session")
def medical_document() -> str:
    return (FIXTURES / "medical.forest.json").read_text()


@pytest.fixture(scope="session")
def medical(medical_document) -> Context:
    """Two-tree medical fixture: A, B, C binary, Age numeric, classes Pos/Neg.

    Tree 1 votes Pos when A=1 or B=1; tree 2 votes Pos when B=1 and Age<=35.
    Feature C is deliberately never tested.
    """
    return make_context(parse_forest(medical_document))


@pytest.fixture(scope="session")
def stump() -> Context:
    doc = json.dumps({
        "features": [{"name": "X", "kind": "categorical", "values": ["0", "1"]}],
        "classes": ["a", "b"],
        "trees": [{"root": {"leaf": 0}}],
    })
    return make_context(parse_forest(doc))
