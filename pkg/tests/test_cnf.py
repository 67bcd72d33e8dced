import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from forestbag.cnf import (
    CnfFormula,
    DimacsError,
    count_sat_bruteforce,
    parse_dimacs,
    reduce_3cnf_to_forest,
)
from forestbag.forest import CATEGORICAL, Leaf, Split, classify
from forestbag.partition import build_partition, count_ambiguous_exact


def test_parse_simple():
    formula = parse_dimacs("p cnf 3 1\n1 2 3 0\n")
    assert formula.num_vars == 3
    assert formula.clauses == ((1, 2, 3),)
    assert formula.notes == ()


def test_parse_comments_and_multiline_clause():
    formula = parse_dimacs("c a comment\np cnf 4 2\n1 -2\n3 0\n-4 1 2 0\n")
    assert formula.clauses == ((1, -2, 3), (-4, 1, 2))


def test_parse_pads_short_clauses():
    formula = parse_dimacs("p cnf 1 2\n1 0\n-1 0\n")
    assert formula.clauses == ((1, 1, 1), (-1, -1, -1))
    assert len(formula.notes) == 2


def test_parse_missing_terminator():
    with pytest.raises(DimacsError, match="terminating 0"):
        parse_dimacs("p cnf 2 1\n1 2\n")


def test_parse_bad_header():
    with pytest.raises(DimacsError, match="header"):
        parse_dimacs("p sat 3 1\n1 2 3 0\n")
    with pytest.raises(DimacsError, match="header"):
        parse_dimacs("1 2 3 0\n")


def test_parse_literal_out_of_range():
    with pytest.raises(DimacsError, match="out of range"):
        parse_dimacs("p cnf 2 1\n1 5 0\n")


def test_parse_rejects_wide_clause():
    with pytest.raises(DimacsError, match="more than 3"):
        parse_dimacs("p cnf 4 1\n1 2 3 4 0\n")


def test_reduction_single_clause_structure():
    forest = reduce_3cnf_to_forest(parse_dimacs("p cnf 3 1\n1 2 3 0\n"))
    assert len(forest.trees) == 2  # clause tree + stump
    assert len(forest.classes) == 2
    assert all(f.kind == CATEGORICAL and f.values == ("0", "1") for f in forest.features)
    clause_tree, stump = forest.trees
    assert len(clause_tree.rules) == 4  # rule count equals leaf count
    assert sum(1 for r in clause_tree.rules if r.conclusion == 1) == 3
    assert len(stump.rules) == 1 and stump.rules[0].conclusion == 0


def test_reduction_negative_literal_swaps_branches():
    # (-1 v 2 v 3): the root's satisfied branch is the false branch
    forest = reduce_3cnf_to_forest(parse_dimacs("p cnf 3 1\n-1 2 3 0\n"))
    root = forest.trees[0].root
    assert isinstance(root, Split)
    assert root.test.feature == 0
    assert isinstance(root.false_branch, Leaf) and root.false_branch.conclusion == 1
    assert isinstance(root.true_branch, Split)


def test_reduction_votes_track_satisfaction():
    forest = reduce_3cnf_to_forest(parse_dimacs("p cnf 3 2\n1 2 3 0\n-1 -2 -3 0\n"))
    # x = (1,0,0): both clauses satisfied -> 2 vs 2 tie
    assert classify(forest, ["1", "0", "0"]) is None
    # x = (0,0,0): first clause falsified -> "0" wins 3 to 1
    assert classify(forest, ["0", "0", "0"]) == 0


def test_reduction_repeated_literals_kept_verbatim():
    forest = reduce_3cnf_to_forest(parse_dimacs("p cnf 1 1\n1 0\n"))
    clause_tree = forest.trees[0]
    # three stacked tests on the same variable, applied verbatim
    depth = 0
    node = clause_tree.root
    while isinstance(node, Split):
        assert node.test.feature == 0
        node = node.false_branch
        depth += 1
    assert depth == 3


def test_b4l_shape_bounds():
    rnd = random.Random(5)
    formula = random_3cnf(rnd, n=8, m=12)
    forest = reduce_3cnf_to_forest(formula)
    assert len(forest.trees) == 2 * len(formula.clauses)
    assert all(len(t.rules) <= 4 for t in forest.trees)
    assert all(f.kind == CATEGORICAL for f in forest.features)


def test_count_sat_examples():
    assert count_sat_bruteforce(parse_dimacs("p cnf 3 1\n1 2 3 0\n")) == 7
    assert count_sat_bruteforce(parse_dimacs("p cnf 1 2\n1 0\n-1 0\n")) == 0
    assert count_sat_bruteforce(CnfFormula(5, ())) == 32  # vacuous conjunction


def test_count_sat_cap():
    with pytest.raises(ValueError, match="cap"):
        count_sat_bruteforce(CnfFormula(30, ()), cap_vars=22)


def random_3cnf(rnd: random.Random, n: int, m: int) -> CnfFormula:
    """Random 3CNF over exactly n variables: each occurs in some clause.

    The first ceil(n/3) clauses tile a shuffled variable list so coverage is
    guaranteed; m is raised to that floor when necessary.
    """
    m = max(m, (n + 2) // 3)
    variables = list(range(1, n + 1))
    rnd.shuffle(variables)
    clauses = []
    for start in range(0, n, 3):
        vs = variables[start:start + 3]
        while len(vs) < 3:
            vs.append(vs[-1])
        clauses.append(tuple(v if rnd.random() < 0.5 else -v for v in vs))
    while len(clauses) < m:
        vs = rnd.sample(range(1, n + 1), k=min(3, n))
        while len(vs) < 3:
            vs.append(vs[-1])
        clauses.append(tuple(v if rnd.random() < 0.5 else -v for v in vs))
    return CnfFormula(n, tuple(clauses))


@pytest.mark.parametrize("seed", range(12))
def test_parsimony_random_formulas(seed):
    """Satisfying-assignment count equals the reduced forest's ambiguous-class
    count, clause by clause (the executable counting reduction)."""
    rnd = random.Random(seed)
    n = rnd.randint(2, 10)
    m = rnd.randint(1, 12)
    formula = random_3cnf(rnd, n, m)
    forest = reduce_3cnf_to_forest(formula)
    partition = build_partition(forest)
    ambiguous = count_ambiguous_exact(forest, partition).ambiguous
    assert ambiguous == count_sat_bruteforce(formula)


def test_parsimony_handpicked():
    sat = parse_dimacs("p cnf 3 1\n1 2 3 0\n")
    unsat = parse_dimacs("p cnf 1 2\n1 0\n-1 0\n")
    for formula, expected in ((sat, 7), (unsat, 0)):
        forest = reduce_3cnf_to_forest(formula)
        counted = count_ambiguous_exact(forest, build_partition(forest)).ambiguous
        assert counted == expected == count_sat_bruteforce(formula)


@given(st.lists(st.integers(min_value=1, max_value=6), min_size=1, max_size=3),
       st.integers(0, 1_000_000))
@settings(max_examples=40, deadline=None)
def test_padding_preserves_models(variables, salt):
    """A padded clause is logically the clause itself."""
    rnd = random.Random(salt)
    lits = [v if rnd.random() < 0.5 else -v for v in variables]
    text = "p cnf 6 1\n" + " ".join(map(str, lits)) + " 0\n"
    formula = parse_dimacs(text)
    direct = CnfFormula(6, (tuple(lits + [lits[-1]] * (3 - len(lits)))[:3],))
    assert count_sat_bruteforce(formula) == count_sat_bruteforce(direct)
