"""3CNF formulas as forests: clause trees plus stumps, counting preserved.

Each clause becomes a depth-3 decision tree over its three atoms: a
satisfied literal jumps to a leaf labelled "1", an unsatisfied one falls
through to the next literal and finally to "0" (negative literals swap the
branches). Together with one single-leaf "0" stump per clause, an assignment
is ambiguous for the forest exactly when it satisfies the formula, so the
number of satisfying assignments equals the number of ambiguous classes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .forest import CATEGORICAL, OP_EQ, Feature, Forest, Leaf, Literal, Split, Tree


class DimacsError(ValueError):
    """Raised on malformed DIMACS CNF input."""


@dataclass(frozen=True)
class CnfFormula:
    num_vars: int
    clauses: tuple[tuple[int, int, int], ...]
    notes: tuple[str, ...] = ()


def parse_dimacs(text: str) -> CnfFormula:
    """Parse DIMACS CNF; clauses are normalized to 3 literals by padding.

    Clauses with fewer than 3 literals repeat their last literal (recorded in
    the formula's notes); clauses with more than 3 distinct literals are
    rejected, since the reduction is defined for 3CNF only.
    """
    num_vars = None
    declared_clauses = None
    clauses: list[tuple[int, int, int]] = []
    notes: list[str] = []
    current: list[int] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise DimacsError(f"line {lineno}: malformed header {line!r}")
            try:
                num_vars, declared_clauses = int(parts[2]), int(parts[3])
            except ValueError as exc:
                raise DimacsError(f"line {lineno}: malformed header {line!r}") from exc
            continue
        if num_vars is None:
            raise DimacsError(f"line {lineno}: clause before header")
        for token in line.split():
            try:
                lit = int(token)
            except ValueError as exc:
                raise DimacsError(f"line {lineno}: bad literal {token!r}") from exc
            if lit == 0:
                clauses.append(_normalize_clause(current, len(clauses), notes))
                current = []
            else:
                if not 1 <= abs(lit) <= num_vars:
                    raise DimacsError(f"line {lineno}: literal {lit} out of range")
                current.append(lit)
    if num_vars is None:
        raise DimacsError("missing 'p cnf' header")
    if current:
        raise DimacsError("clause without terminating 0")
    if declared_clauses is not None and declared_clauses != len(clauses):
        notes.append(f"header declares {declared_clauses} clauses, found {len(clauses)}")
    return CnfFormula(num_vars, tuple(clauses), tuple(notes))


def _normalize_clause(lits: list[int], index: int, notes: list[str]) -> tuple[int, int, int]:
    if not lits:
        raise DimacsError(f"clause {index}: empty clause is not 3CNF")
    if len(lits) == 3:
        return tuple(lits)
    distinct = list(dict.fromkeys(lits))
    if len(distinct) > 3:
        raise DimacsError(f"clause {index}: more than 3 distinct literals")
    notes.append(f"clause {index}: normalized to 3 literals")
    return tuple(distinct + [distinct[-1]] * (3 - len(distinct)))


def _clause_tree(clause: tuple[int, int, int]) -> Tree:
    """Depth-3 tree voting "1" iff the clause is satisfied."""
    node: Leaf | Split = Leaf(0)
    for lit in reversed(clause):
        test = Literal(abs(lit) - 1, OP_EQ, "1")
        satisfied, fallthrough = Leaf(1), node
        if lit > 0:
            node = Split(test, satisfied, fallthrough)
        else:
            node = Split(test, fallthrough, satisfied)
    return Tree(node)


def reduce_3cnf_to_forest(formula: CnfFormula) -> Forest:
    """One clause tree per clause plus one "0" stump per clause.

    Applied verbatim: repeated literals yield repeated tests on one path.
    """
    features = tuple(
        Feature(f"x{i}", CATEGORICAL, ("0", "1")) for i in range(1, formula.num_vars + 1))
    trees = [_clause_tree(c) for c in formula.clauses]
    trees += [Tree(Leaf(0)) for _ in formula.clauses]
    return Forest(features, ("0", "1"), tuple(trees))


def count_sat_bruteforce(formula: CnfFormula, cap_vars: int = 22) -> int:
    """Exhaustive satisfying-assignment count over all 2^n assignments."""
    n = formula.num_vars
    if n > cap_vars:
        raise ValueError(f"{n} variables exceed the brute-force cap of {cap_vars}")
    assignments = np.arange(1 << n, dtype=np.int64)
    bits = {v: (assignments >> (v - 1)) & 1 for v in range(1, n + 1)}
    satisfied = np.ones(1 << n, dtype=bool)
    for clause in formula.clauses:
        clause_sat = np.zeros(1 << n, dtype=bool)
        for lit in clause:
            clause_sat |= bits[abs(lit)] == (1 if lit > 0 else 0)
        satisfied &= clause_sat
    return int(satisfied.sum())
