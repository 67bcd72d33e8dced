#!/usr/bin/env python3
"""End-to-end walkthrough on the two-tree medical fixture.

Prints the exact oracle values, the sampled stage-1 estimates, and the mined
stage-2 reasons side by side.
"""

from pathlib import Path

from forestbag.bag import build_bag, maximal_necessary_features
from forestbag.factors import PartialAssignment, build_model, partition_function_exact, query_exact
from forestbag.forest import load_forest
from forestbag.mining import (
    MinerConfig,
    filter_redundant,
    minimize_sufficient,
    render_text,
    run_stage1_mining,
    stage2_pairs,
)
from forestbag.partition import build_partition, class_count, count_ambiguous_exact
from forestbag.sampling import SamplerConfig

FIXTURE = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "medical.forest.json"
CAP = 1 << 22


def main():
    forest = load_forest(str(FIXTURE))
    partition = build_partition(forest)
    model = build_model(forest, partition)
    bag = build_bag(forest, partition)

    print("== exact ==")
    counts = count_ambiguous_exact(forest, partition)
    print(f"equivalence classes: {class_count(partition)}")
    print(f"non-ambiguous (Z): {partition_function_exact(model, CAP)}")
    print(f"ambiguous: {counts.ambiguous}")
    p = query_exact(model, PartialAssignment.of(cls=0), PartialAssignment.of({1: 1, 3: 0}), CAP)
    print(f"P( Pos | B=1, Age<=35 ) = {p}")
    p = query_exact(model, PartialAssignment.of({0: 0}), PartialAssignment.of(cls=1), CAP)
    print(f"P( A=0 | Neg ) = {p}")
    for cls in (0, 1):
        args, _ = maximal_necessary_features(bag, cls, CAP)
        rendered = ", ".join(sorted(
            f"{forest.features[a.feature].name} ∈ {partition.sets[a.feature][a.part].render()}"
            for a in args))
        print(f"maximal necessary for {forest.classes[cls]}: {rendered}")

    print("== sampled (seed 7) ==")
    sampler_config = SamplerConfig(seed=7, max_iterations=50_000)
    miner_config = MinerConfig()
    mined = run_stage1_mining(model, sampler_config, miner_config)
    print(f"non-ambiguous ~ {mined.stage1.nonambiguous.value:.3f} "
          f"({mined.stage1.nonambiguous.samples} samples)")
    for report in mined.atomic_sufficient + mined.merged_necessary:
        print("  " + render_text(report, forest, partition))

    print("== stage 2 pairs ==")
    pairs = stage2_pairs(model, mined, miner_config, sampler_config)
    for report in pairs:
        print("  " + render_text(report, forest, partition))
    survivors = filter_redundant(mined.atomic_sufficient + pairs)
    print(f"after redundancy filter: {len(survivors)} of "
          f"{len(mined.atomic_sufficient) + len(pairs)} remain")
    for report in survivors:
        if len(report.conditions) == 2:
            shortened = minimize_sufficient(model, bag, report, miner_config,
                                            sampler_config, CAP)
            print("  minimized: " + render_text(shortened, forest, partition))


if __name__ == "__main__":
    main()
