"""Acceptance gate: every criterion prints one PASS/FAIL line (run with -s)."""

import json
import random
import time
from contextlib import contextmanager

from forestbag.bag import (
    IN,
    FeatureArg,
    is_bicomplete,
    is_bistable,
    is_necessary_reason_exact,
    is_sufficient_reason_exact,
    labelling_from_assignment,
    labelling_from_class,
    maximal_necessary_features,
)
from forestbag.cli import main
from forestbag.cnf import count_sat_bruteforce, parse_dimacs, reduce_3cnf_to_forest
from forestbag.factors import (
    PartialAssignment,
    UnsatisfiableConditionError,
    assignment_count,
    build_model,
    enumerate_assignments,
    partition_function_exact,
    plausibility,
    query_exact,
)
from forestbag.forest import load_forest
from forestbag.mining import MinerConfig, ReasonReport, minimize_sufficient
from forestbag.partition import build_partition, class_count, count_ambiguous_exact, enumerate_classes
from forestbag.sampling import QuerySpec, SamplerConfig, chernoff_sample_size, run_stage1

from conftest import CAP, FIXTURES, make_context
from forest_gen import random_forest
from test_cnf import random_3cnf

POS, NEG = 0, 1


@contextmanager
def criterion(name: str, budget: float | None = None):
    started = time.monotonic()
    try:
        yield
    except BaseException:
        print(f"{name}: FAIL ({time.monotonic() - started:.2f}s)")
        raise
    elapsed = time.monotonic() - started
    if budget is not None:
        assert elapsed < budget, f"{name} exceeded its {budget}s runtime budget"
    print(f"{name}: PASS ({elapsed:.2f}s)")


def test_p1_fixture_oracle_suite(medical):
    with criterion("P1 fixture oracle suite", budget=1.0):
        assert class_count(medical.partition) == 8
        assert partition_function_exact(medical.model, CAP) == 4
        counts = count_ambiguous_exact(medical.forest, medical.partition, CAP)
        assert counts.ambiguous * 2 == counts.total  # exactly 50% ambiguous
        p = query_exact(medical.model, PartialAssignment.of(cls=POS),
                        PartialAssignment.of({1: 1, 3: 0}), CAP)
        assert p == 1
        p = query_exact(medical.model, PartialAssignment.of({0: 0}),
                        PartialAssignment.of(cls=NEG), CAP)
        assert p == 1
        args, vacuous = maximal_necessary_features(medical.bag, NEG, CAP)
        assert not vacuous
        assert args == {FeatureArg(0, 0), FeatureArg(1, 0)}


def test_p2_faithfulness_property_suite():
    with criterion("P2 faithfulness property suite", budget=30.0):
        for seed in range(50):
            forest = random_forest(seed, max_features=5, max_trees=5, max_depth=3)
            context = make_context(forest)
            bag = context.bag
            for eq in enumerate_classes(context.partition):
                labelling = labelling_from_class(bag, eq)
                assert is_bicomplete(bag, labelling)
                outcome = context.model.evaluator.outcome(eq)
                assert is_bistable(bag, labelling) == (outcome is not None)
                accepted = [a for a in bag.class_args if labelling[a] == IN]
                if outcome is None:
                    assert accepted == []
                else:
                    assert [a.cls for a in accepted] == [outcome]
                for i in range(len(forest.features)):
                    cells = [a for a in bag.feature_args if a.feature == i]
                    assert sum(1 for a in cells if labelling[a] == IN) == 1
                for t in range(len(forest.trees)):
                    rules = [a for a in bag.rule_args if a.tree == t]
                    assert sum(1 for a in rules if labelling[a] == IN) == 1


def test_p3_markov_bag_bridge(medical):
    with criterion("P3 Markov/graph bridge"):
        candidates = []
        for seed in range(40):
            forest = random_forest(seed, max_features=3, max_trees=3, max_depth=2)
            context = make_context(forest)
            if assignment_count(context.model) <= 1 << 12:
                candidates.append(context)
        candidates.sort(key=lambda c: -assignment_count(c.model))
        contexts = [medical] + candidates[:10]
        assert len(contexts) == 11
        assert assignment_count(contexts[1].model) >= 128  # exercise real spaces
        for context in contexts:
            z = 0
            for a in enumerate_assignments(context.model):
                value = plausibility(context.model, a)
                assert value in (0, 1)
                labelling = labelling_from_assignment(context.bag, a.features,
                                                      a.rules, a.cls)
                assert (value == 1) == is_bistable(context.bag, labelling)
                z += value
            assert z == partition_function_exact(context.model, CAP)


def test_p4_sampler_convergence(medical):
    with criterion("P4 sampler convergence", budget=60.0):
        planned = chernoff_sample_size(0.5, 0.1, 0.05)
        assert planned == 2214
        hits = 0
        for seed in range(50):
            config = SamplerConfig(seed=seed, max_iterations=planned)
            result = run_stage1(medical.model, [], config)
            assert result.iterations == planned
            if 0.45 <= result.nonambiguous.value <= 0.55:
                hits += 1
        assert hits >= 44
        queries = [
            QuerySpec(target=PartialAssignment.of(cls=POS),
                      condition=PartialAssignment.of({1: 1, 3: 0})),
            QuerySpec(target=PartialAssignment.of({0: 0}),
                      condition=PartialAssignment.of(cls=NEG)),
            QuerySpec(target=PartialAssignment.of(cls=POS),
                      condition=PartialAssignment.of()),
        ]
        exact_values = [1.0, 1.0, 0.5]
        config = SamplerConfig(seed=424242, max_iterations=50_000,
                               min_samples_per_query=50_000)
        result = run_stage1(medical.model, queries, config)
        assert result.iterations == 50_000
        assert abs(result.nonambiguous.value - 0.5) <= 0.02
        for estimate, target in zip(result.estimates, exact_values):
            assert abs(estimate.value - target) <= 0.02


def test_p5_parsimony_of_reduction():
    with criterion("P5 parsimonious counting reduction", budget=60.0):
        cases = [
            (parse_dimacs("p cnf 3 1\n1 2 3 0\n"), 7),
            (parse_dimacs("p cnf 1 2\n1 0\n-1 0\n"), 0),
        ]
        for formula, expected in cases:
            forest = reduce_3cnf_to_forest(formula)
            counted = count_ambiguous_exact(forest, build_partition(forest)).ambiguous
            assert counted == expected == count_sat_bruteforce(formula)
        rnd = random.Random(20240)
        for _ in range(50):
            n = rnd.randint(2, 15)
            m = rnd.randint(1, 30)
            formula = random_3cnf(rnd, n, m)
            forest = reduce_3cnf_to_forest(formula)
            ambiguous = count_ambiguous_exact(forest, build_partition(forest)).ambiguous
            assert ambiguous == count_sat_bruteforce(formula)


def test_p6_miner_oracle_equivalence(medical):
    with criterion("P6 miner/oracle equivalence"):
        contexts = [medical] + [
            make_context(random_forest(seed, max_features=4, max_trees=3, max_depth=2))
            for seed in range(20)
        ]
        for context in contexts:
            eff = context.partition.effective_counts
            for y in range(context.model.n_classes):
                for i, used in enumerate(context.partition.used):
                    if not used:
                        continue
                    for j in range(eff[i]):
                        arg = [FeatureArg(i, j)]
                        sufficient = is_sufficient_reason_exact(context.bag, arg, y, CAP)
                        try:
                            decided = query_exact(
                                context.model, PartialAssignment.of(cls=y),
                                PartialAssignment.of({i: j}), CAP) == 1
                            assert decided == sufficient.holds and not sufficient.vacuous
                        except UnsatisfiableConditionError:
                            assert sufficient.vacuous and sufficient.holds
                        necessary = is_necessary_reason_exact(context.bag, arg, y, CAP)
                        try:
                            decided = query_exact(
                                context.model, PartialAssignment.of({i: j}),
                                PartialAssignment.of(cls=y), CAP) == 1
                            assert decided == necessary.holds and not necessary.vacuous
                        except UnsatisfiableConditionError:
                            assert necessary.vacuous and necessary.holds
        report = ReasonReport("sufficient", POS, ((0, 1), (1, 1), (3, 0)), 1.0, 1000)
        minimized = minimize_sufficient(
            medical.model, medical.bag, report, MinerConfig(),
            SamplerConfig(seed=1, max_iterations=1000), CAP)
        assert minimized.conditions == ((1, 1), (3, 0))  # (B=1, Age<=35)
        assert "minimal" in minimized.flags


def test_p7_stage1_performance():
    with criterion("P7 stage-1 throughput on the 100-tree fixture", budget=10.0):
        forest = load_forest(str(FIXTURES / "perf100.forest.json"))
        partition = build_partition(forest)
        model = build_model(forest, partition)
        from forestbag.mining import stage1_atomic_queries

        queries = stage1_atomic_queries(model)
        config = SamplerConfig(seed=9, max_iterations=10_000,
                               min_samples_per_query=10_000, workers=1)
        result = run_stage1(model, queries, config)
        assert result.iterations == 10_000


def test_p8_cli_determinism(capsys):
    with criterion("P8 seeded CLI reproducibility"):
        medical_path = str(FIXTURES / "medical.forest.json")

        def run(*argv):
            code = main(list(argv))
            out = capsys.readouterr().out
            assert code == 0
            return out

        sample_args = ("sample", medical_path, "--seed", "99", "--samples", "20000",
                       "--workers", "2", "--format", "json")
        first, second = run(*sample_args), run(*sample_args)
        assert first == second
        json.loads(first)
        mine_args = ("mine", medical_path, "--seed", "99", "--samples", "20000",
                     "--workers", "2", "--minimize", "--format", "json")
        first, second = run(*mine_args), run(*mine_args)
        assert first == second
        json.loads(first)
