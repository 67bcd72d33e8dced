"""Command-line surface: inspect forests, exact oracles, sampling, mining, CNF conversion.

Structured output is a single JSON envelope {"manifest": ..., "results": ...}
whose content is fully determined by the command line (wall-clock duration is
text-only, so reruns with the same seed are byte-identical). Exit codes:
0 success, 1 usage error, 2 input error, 3 cap refusal.
"""

from __future__ import annotations

import hashlib
import json
import sys
import time
from dataclasses import dataclass

import click

from . import __version__
from .bag import Bag, bag_stats, build_bag, render_bag
from .cnf import DimacsError, parse_dimacs, reduce_3cnf_to_forest
from .factors import (
    PartialAssignment,
    PlausibilityModel,
    UnsatisfiableConditionError,
    build_model,
    partition_function_exact,
    query_exact,
)
from .forest import CATEGORICAL, Forest, ForestFormatError, parse_forest, serialize_forest
from .mining import (
    MinerConfig,
    filter_redundant,
    minimize_sufficient,
    render_record,
    render_text,
    run_stage1_mining,
    stage2_pairs,
)
from .partition import (
    CapExceededError,
    DomainPartition,
    build_partition,
    class_count,
    count_ambiguous_exact,
)
from .sampling import QuerySpec, SamplerConfig

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_CAP = 3

DEFAULT_CAP = 1 << 22


class InputError(Exception):
    """Bad input file or query; maps to exit code 2."""


@dataclass
class Manifest:
    command: str
    version: str
    config: dict
    inputs: dict
    duration: float | None = None

    def to_dict(self) -> dict:
        # Duration is deliberately excluded: structured output must be
        # byte-identical across reruns with the same seed and config.
        return {
            "command": self.command,
            "version": self.version,
            "config": self.config,
            "inputs": self.inputs,
        }


@dataclass
class Loaded:
    forest: Forest
    partition: DomainPartition
    digest: str
    model: PlausibilityModel | None = None
    bag: Bag | None = None


def _load(path: str) -> Loaded:
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    try:
        forest = parse_forest(raw.decode("utf-8"))
    except (UnicodeDecodeError, ForestFormatError) as exc:
        raise InputError(f"{path}: {exc}") from exc
    return Loaded(forest, build_partition(forest), hashlib.sha256(raw).hexdigest())


def _emit(manifest: Manifest, results, fmt: str, text_lines):
    if fmt == "json":
        click.echo(json.dumps({"manifest": manifest.to_dict(), "results": results}))
    else:
        for line in text_lines:
            click.echo(line)
        if manifest.duration is not None:
            click.echo(f"duration: {manifest.duration:.3f}s")


def _resolve_seed(seed: int | None) -> int:
    if seed is not None:
        return seed
    import secrets

    drawn = secrets.randbits(62)
    click.echo(f"seed drawn from system entropy: {drawn} (pass --seed to replay)", err=True)
    return drawn


def _parse_term(term: str, forest: Forest, partition: DomainPartition):
    """One `name OP value` term -> ('feature', i, cell) or ('class', y)."""
    for op in ("<=", ">", "="):
        if op in term:
            name, value = term.split(op, 1)
            name, value = name.strip(), value.strip()
            break
    else:
        raise InputError(f"cannot parse query term {term!r}")
    feature_names = [f.name for f in forest.features]
    if name in feature_names:
        i = feature_names.index(name)
        feat = forest.features[i]
        if feat.kind == CATEGORICAL and op == "=" and value in feat.values:
            if not partition.used[i]:
                raise InputError(f"feature {name!r} is never tested by this forest")
            return ("feature", i, feat.values.index(value))
        if feat.kind != CATEGORICAL:
            if not partition.used[i]:
                raise InputError(f"feature {name!r} is never tested by this forest")
            try:
                v = float(value)
            except ValueError as exc:
                raise InputError(f"numeric value expected in {term!r}") from exc
            thresholds = partition.thresholds[i]
            if op == "=":
                from bisect import bisect_left

                return ("feature", i, bisect_left(thresholds, v))
            if v not in thresholds:
                raise InputError(
                    f"{name} {op} {value}: {value} is not a threshold of this forest "
                    f"(thresholds: {list(thresholds)})")
            rank = thresholds.index(v)
            return ("feature", i, rank if op == "<=" else rank + 1)
    if op == "=" and value in forest.classes:
        return ("class", forest.class_index(value))
    raise InputError(f"cannot resolve query term {term!r}")


def _parse_side(side: str, forest: Forest, partition: DomainPartition) -> PartialAssignment:
    features: dict[int, int] = {}
    cls = None
    for term in filter(None, (t.strip() for t in side.split(","))):
        parsed = _parse_term(term, forest, partition)
        if parsed[0] == "class":
            if cls is not None:
                raise InputError("query side assigns the class twice")
            cls = parsed[1]
        else:
            _, i, j = parsed
            if features.get(i, j) != j:
                raise InputError(f"query side assigns feature {forest.features[i].name!r} twice")
            features[i] = j
    return PartialAssignment.of(features, cls)


def parse_query(spec: str, forest: Forest, partition: DomainPartition) -> QuerySpec:
    """Grammar: `target|condition`, each a comma list of `name OP value` terms."""
    target_str, _, cond_str = spec.partition("|")
    target = _parse_side(target_str, forest, partition)
    condition = _parse_side(cond_str, forest, partition)
    if target.is_empty():
        raise InputError(f"query {spec!r} has an empty target")
    try:
        return QuerySpec(target=target, condition=condition)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def _render_query(q: QuerySpec, forest: Forest, partition: DomainPartition) -> str:
    def side(pa: PartialAssignment) -> str:
        parts = []
        if pa.cls is not None:
            parts.append(forest.classes[pa.cls])
        parts += [
            f"{forest.features[i].name} ∈ {partition.sets[i][j].render()}"
            for i, j in pa.features
        ]
        return ", ".join(parts)

    return f"P( {side(q.target)} | {side(q.condition)} )"


@click.group()
@click.version_option(__version__)
def cli():
    """Explain random-forest classifiers via argumentation and sampling."""


format_option = click.option("--format", "fmt", type=click.Choice(["text", "json"]),
                             default="text", show_default=True)
cap_option = click.option("--max-exact-classes", type=int, default=DEFAULT_CAP,
                          show_default=True, help="Refuse exact enumeration above this.")


@cli.command()
@click.argument("forest_path")
@click.option("--dump-bag", is_flag=True,
              help="Print the argumentation graph in a diffable line format.")
@format_option
def inspect(forest_path, fmt, dump_bag):
    """Summarize a forest: features, partition sizes, rules, graph size."""
    started = time.monotonic()
    loaded = _load(forest_path)
    forest, partition = loaded.forest, loaded.partition
    if dump_bag:
        click.echo(render_bag(build_bag(forest, partition)), nl=False)
        return
    stats = bag_stats(forest, partition)
    eff = partition.effective_counts
    features = [
        {
            "name": f.name,
            "kind": f.kind,
            "used": partition.used[i],
            "cells": eff[i],
            "sets": [s.render() for s in partition.sets[i][: eff[i]]],
        }
        for i, f in enumerate(forest.features)
    ]
    results = {
        "classes": list(forest.classes),
        "features": features,
        "trees": len(forest.trees),
        "rules": sum(len(t.rules) for t in forest.trees),
        "equivalence_classes": class_count(partition),
        "bag": stats,
    }
    manifest = Manifest("inspect", __version__, {}, {forest_path: loaded.digest},
                        time.monotonic() - started)
    lines = [
        f"classes: {', '.join(forest.classes)}",
        f"trees: {results['trees']}  rules: {results['rules']}",
        f"equivalence classes: {results['equivalence_classes']}",
    ]
    for row in features:
        marker = "" if row["used"] else "  (unused, collapsed)"
        lines.append(f"  {row['name']} [{row['kind']}] cells={row['cells']}: "
                     + " ".join(row["sets"]) + marker)
    b = results["bag"]
    lines.append(f"graph: {b['class_arguments']} class + {b['rule_arguments']} rule + "
                 f"{b['feature_arguments']} feature arguments, "
                 f"{b['attacks']} attacks, {b['supports']} supports")
    _emit(manifest, results, fmt, lines)


@cli.command()
@click.argument("forest_path")
@click.option("--query", "queries", multiple=True,
              help='e.g. "C=Pos|B=1,Age<=35" (operators =, <=, >).')
@cap_option
@format_option
def exact(forest_path, queries, max_exact_classes, fmt):
    """Exact counts and conditional probabilities by full enumeration."""
    started = time.monotonic()
    loaded = _load(forest_path)
    forest, partition = loaded.forest, loaded.partition
    model = build_model(forest, partition)
    z = partition_function_exact(model, max_exact_classes)
    counts = count_ambiguous_exact(forest, partition, max_exact_classes)
    query_results = []
    for raw in queries:
        q = parse_query(raw, forest, partition)
        try:
            p = query_exact(model, q.target, q.condition, max_exact_classes)
            query_results.append({
                "query": raw, "p": float(p),
                "numerator": p.numerator, "denominator": p.denominator,
            })
        except UnsatisfiableConditionError:
            query_results.append({"query": raw, "p": None, "error": "unsatisfiable condition"})
    results = {
        "partition_function": z,
        "equivalence_classes": counts.total,
        "ambiguous_classes": counts.ambiguous,
        "ambiguous_percent": 100.0 * counts.ambiguous / counts.total,
        "queries": query_results,
    }
    manifest = Manifest("exact", __version__, {"max_exact_classes": max_exact_classes},
                        {forest_path: loaded.digest}, time.monotonic() - started)
    lines = [
        f"equivalence classes: {counts.total}",
        f"non-ambiguous (partition function): {z}",
        f"ambiguous: {counts.ambiguous} ({results['ambiguous_percent']:.1f}%)",
    ]
    for raw, res in zip(queries, query_results):
        q = parse_query(raw, forest, partition)
        rendered = _render_query(q, forest, partition)
        if res.get("p") is None:
            lines.append(f"{rendered} = undefined ({res['error']})")
        else:
            lines.append(f"{rendered} = {res['p']:.6g} "
                         f"({res['numerator']}/{res['denominator']})")
    _emit(manifest, results, fmt, lines)


def _estimate_dict(est) -> dict:
    return {"value": est.value, "samples": est.samples,
            "bound": list(est.bound) if est.bound else None}


def _sampler_config(seed, samples, min_samples, workers) -> SamplerConfig:
    try:
        return SamplerConfig(seed=seed, max_iterations=samples,
                             min_samples_per_query=min_samples, workers=workers)
    except ValueError as exc:
        raise click.UsageError(str(exc)) from exc


def _miner_config(delta, lift, budget) -> MinerConfig:
    try:
        return MinerConfig(delta=delta, lift=lift, pair_budget=budget)
    except ValueError as exc:
        raise click.UsageError(str(exc)) from exc


sample_options = [
    click.option("--seed", type=int, default=None, help="Omit to draw one from entropy."),
    click.option("--samples", type=int, default=100_000, show_default=True,
                 help="Stage-1 iteration budget."),
    click.option("--min-samples", type=int, default=100, show_default=True),
    click.option("--delta", type=float, default=0.9, show_default=True),
    click.option("--lift", type=float, default=1.1, show_default=True),
    click.option("--workers", type=int, default=1, show_default=True),
]


def _with_options(options):
    def wrap(fn):
        for option in reversed(options):
            fn = option(fn)
        return fn
    return wrap


@cli.command()
@click.argument("forest_path")
@_with_options(sample_options)
@format_option
def sample(forest_path, seed, samples, min_samples, delta, lift, workers, fmt):
    """Stage 1: sampled non-ambiguity and atomic almost-reasons."""
    started = time.monotonic()
    loaded = _load(forest_path)
    forest, partition = loaded.forest, loaded.partition
    model = build_model(forest, partition)
    seed = _resolve_seed(seed)
    sampler_config = _sampler_config(seed, samples, min_samples, workers)
    miner_config = _miner_config(delta, lift, 400)
    mined = run_stage1_mining(model, sampler_config, miner_config)

    def record(report):
        return render_record(report, forest, partition)

    results = {
        "iterations": mined.stage1.iterations,
        "nonambiguous": _estimate_dict(mined.stage1.nonambiguous),
        "priors": {forest.classes[y]: _estimate_dict(e) for y, e in enumerate(mined.priors)},
        "sufficient": [record(r) for r in mined.atomic_sufficient],
        "necessary": [record(r) for r in mined.atomic_necessary],
        "merged_necessary": [record(r) for r in mined.merged_necessary],
    }
    manifest = Manifest(
        "sample", __version__,
        {"seed": seed, "samples": samples, "min_samples": min_samples,
         "delta": delta, "lift": lift, "workers": workers},
        {forest_path: loaded.digest}, time.monotonic() - started)
    na = mined.stage1.nonambiguous
    lines = [f"iterations: {mined.stage1.iterations}"]
    if na.value is not None:
        lines.append(f"non-ambiguous: {100.0 * na.value:.1f}% ({na.samples} samples)")
    for title, group in (("almost sufficient:", mined.atomic_sufficient),
                         ("almost necessary:", mined.atomic_necessary),
                         ("merged necessary:", mined.merged_necessary)):
        lines.append(title)
        for r in group:
            lines.append("  " + render_text(r, forest, partition))
    _emit(manifest, results, fmt, lines)


@cli.command()
@click.argument("forest_path")
@_with_options(sample_options)
@click.option("--budget", type=int, default=400, show_default=True,
              help="Conditional samples per size-2 candidate.")
@click.option("--minimize", is_flag=True, help="Greedily shorten surviving reasons.")
@cap_option
@format_option
def mine(forest_path, seed, samples, min_samples, delta, lift, workers,
         budget, minimize, max_exact_classes, fmt):
    """Stage 2: stream size-2 almost-sufficient reasons (redundancy-filtered)."""
    started = time.monotonic()
    loaded = _load(forest_path)
    forest, partition = loaded.forest, loaded.partition
    model = build_model(forest, partition)
    seed = _resolve_seed(seed)
    sampler_config = _sampler_config(seed, samples, min_samples, workers)
    miner_config = _miner_config(delta, lift, budget)
    mined = run_stage1_mining(model, sampler_config, miner_config)

    streamed = fmt == "text" and miner_config.stream

    def sink(report):
        if streamed:
            click.echo("  " + render_text(report, forest, partition))

    if streamed:
        click.echo("size-2 sufficient candidates:")
    pairs = stage2_pairs(model, mined, miner_config, sampler_config, sink)
    surviving = filter_redundant(mined.atomic_sufficient + pairs)
    kept_pairs = [r for r in surviving if len(r.conditions) == 2]
    if minimize:
        bag = build_bag(forest, partition)
        kept_pairs = [
            minimize_sufficient(model, bag, r, miner_config, sampler_config,
                                max_exact_classes)
            for r in kept_pairs
        ]
    results = {
        "iterations": mined.stage1.iterations,
        "nonambiguous": _estimate_dict(mined.stage1.nonambiguous),
        "pairs_streamed": [render_record(r, forest, partition) for r in pairs],
        "reports": [render_record(r, forest, partition) for r in kept_pairs],
    }
    manifest = Manifest(
        "mine", __version__,
        {"seed": seed, "samples": samples, "min_samples": min_samples, "delta": delta,
         "lift": lift, "workers": workers, "budget": budget, "minimize": minimize,
         "max_exact_classes": max_exact_classes},
        {forest_path: loaded.digest}, time.monotonic() - started)
    lines = ["after redundancy filter:"]
    for r in kept_pairs:
        lines.append("  " + render_text(r, forest, partition))
    _emit(manifest, results, fmt, lines)


@cli.command("cnf2forest")
@click.argument("dimacs_path")
@click.argument("out_path")
@format_option
def cnf2forest(dimacs_path, out_path, fmt):
    """Convert a DIMACS 3CNF formula into an interchange-format forest."""
    started = time.monotonic()
    try:
        with open(dimacs_path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {dimacs_path}: {exc}") from exc
    try:
        formula = parse_dimacs(raw.decode("utf-8"))
    except (UnicodeDecodeError, DimacsError) as exc:
        raise InputError(f"{dimacs_path}: {exc}") from exc
    forest = reduce_3cnf_to_forest(formula)
    document = serialize_forest(forest)
    try:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(document)
    except OSError as exc:
        raise InputError(f"cannot write {out_path}: {exc}") from exc
    max_leaves = max(len(t.rules) for t in forest.trees)
    results = {
        "variables": formula.num_vars,
        "clauses": len(formula.clauses),
        "trees": len(forest.trees),
        "max_leaves_per_tree": max_leaves,
        "all_features_binary": True,
        "notes": list(formula.notes),
    }
    manifest = Manifest("cnf2forest", __version__, {},
                        {dimacs_path: hashlib.sha256(raw).hexdigest()},
                        time.monotonic() - started)
    lines = [
        f"{formula.num_vars} variables, {len(formula.clauses)} clauses "
        f"-> {len(forest.trees)} trees (max {max_leaves} leaves/tree)",
        f"wrote {out_path}",
    ]
    lines += [f"note: {n}" for n in formula.notes]
    _emit(manifest, results, fmt, lines)


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
        return EXIT_OK
    except click.UsageError as exc:
        click.echo(f"usage error: {exc.format_message()}", err=True)
        return EXIT_USAGE
    except click.ClickException as exc:
        exc.show()
        return EXIT_USAGE
    except click.exceptions.Abort:
        return EXIT_USAGE
    except InputError as exc:
        click.echo(f"input error: {exc}", err=True)
        return EXIT_INPUT
    except (ForestFormatError, DimacsError) as exc:
        click.echo(f"input error: {exc}", err=True)
        return EXIT_INPUT
    except CapExceededError as exc:
        click.echo(f"refused: {exc}", err=True)
        return EXIT_CAP


if __name__ == "__main__":
    sys.exit(main())
