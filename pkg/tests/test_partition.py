import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from forestbag.forest import classify, parse_forest
from forestbag.partition import (
    CapExceededError,
    ForestEvaluator,
    build_partition,
    characteristic,
    class_count,
    classify_class,
    count_ambiguous_exact,
    enumerate_classes,
    indistinguishable,
    representative_input,
)
from forestbag.cnf import parse_dimacs, reduce_3cnf_to_forest

from forest_gen import random_forest, random_input


def test_medical_partition_sets(medical):
    rendered = [[s.render() for s in cells] for cells in medical.partition.sets]
    assert rendered[0] == ["{0}", "{1}"]
    assert rendered[1] == ["{0}", "{1}"]
    assert rendered[2] == ["{0}", "{1}"]  # declared, but unused
    assert rendered[3] == ["(-inf, 35]", "(35, inf)"]
    assert medical.partition.used == (True, True, False, True)
    assert medical.partition.effective_counts == (2, 2, 1, 2)


def test_unused_numeric_feature_single_cell():
    doc = {
        "features": [{"name": "X", "kind": "numeric"},
                     {"name": "Y", "kind": "numeric"}],
        "classes": ["a", "b"],
        "trees": [{"root": {"test": {"feature": 0, "op": "le", "value": 1.5},
                            "true": {"leaf": 0}, "false": {"leaf": 1}}}],
    }
    partition = build_partition(parse_forest(json.dumps(doc)))
    assert [s.render() for s in partition.sets[1]] == ["(-inf, inf)"]
    assert partition.counts == (2, 1)


def test_two_thresholds_three_cells():
    doc = {
        "features": [{"name": "Age", "kind": "numeric"}],
        "classes": ["a", "b"],
        "trees": [
            {"root": {"test": {"feature": 0, "op": "le", "value": 35},
                      "true": {"leaf": 0}, "false": {"leaf": 1}}},
            {"root": {"test": {"feature": 0, "op": "le", "value": 50},
                      "true": {"leaf": 0}, "false": {"leaf": 1}}},
        ],
    }
    partition = build_partition(parse_forest(json.dumps(doc)))
    assert [s.render() for s in partition.sets[0]] == [
        "(-inf, 35]", "(35, 50]", "(50, inf)"]


def test_characteristic_and_boundaries(medical):
    partition = medical.partition
    assert characteristic(partition, ["1", "1", "0", 25]) == (1, 1, 0, 0)
    assert characteristic(partition, ["1", "1", "0", 35])[3] == 0
    assert characteristic(partition, ["1", "1", "0", 35.0001])[3] == 1


def test_characteristic_rejects_undeclared_value(medical):
    with pytest.raises(ValueError, match="not declared"):
        characteristic(medical.partition, ["2", "1", "0", 25])


def test_indistinguishable(medical):
    partition = medical.partition
    assert indistinguishable(partition, ["1", "1", "0", 20], ["1", "1", "0", 30])
    assert not indistinguishable(partition, ["1", "1", "0", 20], ["1", "1", "0", 40])
    x = ["0", "1", "1", 50]
    assert indistinguishable(partition, x, x)


def test_class_count(medical, stump):
    assert class_count(medical.partition) == 8  # C collapses
    assert class_count(stump.partition) == 1


def test_class_count_two_binary_used():
    doc = {
        "features": [{"name": "A", "kind": "categorical", "values": ["0", "1"]},
                     {"name": "B", "kind": "categorical", "values": ["0", "1"]}],
        "classes": ["x", "y"],
        "trees": [
            {"root": {"test": {"feature": 0, "op": "eq", "value": "1"},
                      "true": {"leaf": 0}, "false": {"leaf": 1}}},
            {"root": {"test": {"feature": 1, "op": "eq", "value": "1"},
                      "true": {"leaf": 0}, "false": {"leaf": 1}}},
        ],
    }
    partition = build_partition(parse_forest(json.dumps(doc)))
    assert class_count(partition) == 4


def test_classify_class_examples(medical):
    forest, partition = medical.forest, medical.partition
    pos, neg = 0, 1
    assert classify_class(forest, partition, (1, 1, 0, 0)) == pos
    assert classify_class(forest, partition, (1, 0, 0, 0)) is None
    for age in (0, 1):
        assert classify_class(forest, partition, (0, 0, 0, age)) == neg


def test_count_ambiguous_medical(medical):
    assert count_ambiguous_exact(medical.forest, medical.partition) == (4, 8)


def test_count_ambiguous_stump(stump):
    assert count_ambiguous_exact(stump.forest, stump.partition) == (0, 1)


def test_count_ambiguous_single_clause():
    formula = parse_dimacs("p cnf 3 1\n1 2 3 0\n")
    forest = reduce_3cnf_to_forest(formula)
    partition = build_partition(forest)
    assert count_ambiguous_exact(forest, partition) == (7, 8)


def test_cap_refusal(medical):
    with pytest.raises(CapExceededError):
        count_ambiguous_exact(medical.forest, medical.partition, cap=4)


def test_cells_disjoint_cover_domain(medical):
    for i, cells in enumerate(medical.partition.sets):
        if cells[0].kind == "categorical":
            values = [c.value for c in cells]
            assert len(set(values)) == len(values)
        else:
            assert cells[0].lo == float("-inf")
            assert cells[-1].hi == float("inf")
            for left, right in zip(cells, cells[1:]):
                assert left.hi == right.lo  # abut exactly at thresholds


@pytest.mark.parametrize("seed", range(10))
def test_quotient_respects_forest(seed):
    """Inputs in one equivalence class are classified like the class itself."""
    forest = random_forest(seed, numeric_share=0.4, n_classes=3)
    partition = build_partition(forest)
    evaluator = ForestEvaluator(forest, partition)
    rnd = random.Random(seed + 99)
    for _ in range(100):
        x = random_input(rnd, forest)
        chi = characteristic(partition, x)
        eq = tuple(j if used else 0 for j, used in zip(chi, partition.used))
        assert classify(forest, x) == evaluator.outcome(eq)


@given(st.integers(0, 5000), st.integers(0, 5000), st.integers(0, 5000), st.integers(0, 5000))
@settings(max_examples=40, deadline=None)
def test_indistinguishability_is_equivalence(forest_seed, s1, s2, s3):
    forest = random_forest(forest_seed, numeric_share=0.5)
    partition = build_partition(forest)
    rnds = [random.Random(s) for s in (s1, s2, s3)]
    a, b, c = (random_input(r, forest) for r in rnds)
    assert indistinguishable(partition, a, a)
    assert indistinguishable(partition, a, b) == indistinguishable(partition, b, a)
    if indistinguishable(partition, a, b) and indistinguishable(partition, b, c):
        assert indistinguishable(partition, a, c)


def test_ambiguous_count_matches_classwise_sum(medical):
    evaluator = ForestEvaluator(medical.forest, medical.partition)
    total = sum(1 for eq in enumerate_classes(medical.partition)
                if evaluator.outcome(eq) is None)
    assert total == count_ambiguous_exact(medical.forest, medical.partition).ambiguous


def test_representative_input_lands_in_class(medical):
    for eq in enumerate_classes(medical.partition):
        x = representative_input(medical.partition, eq)
        assert characteristic(medical.partition, x) == eq
