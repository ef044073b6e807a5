"""Reducing polyhedrally-guarded polynomial entailments to linear programs.

An entailment  "for all x: P(x) implies C(x) >= 0"  with polyhedral premise P
and polynomial conclusion C (affine in unknown template parameters) is
witnessed by writing C as a nonnegative combination of finite products of the
premise rows (Handelman's positivstellensatz).  Matching coefficients
monomial by monomial turns the search for such a combination into a linear
program over the lambda multipliers and the template parameters.

Strict premise atoms are relaxed to their closures first: proving the
conclusion on the larger closed set is sound.  Handelman's theorem is
complete only for compact premises; unbounded premises are attempted anyway
and simply yield "no witness found" when the LP is infeasible.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations_with_replacement

from .errors import InputError
from .poly import ParamExpr, Polyhedron, Polynomial
from .simplex import LinearProblem, solve_lp


@dataclass(frozen=True)
class PQE:
    """Premise-conclusion entailment: premise(x) implies conclusion(x) >= 0."""

    premise: Polyhedron
    conclusion: Polynomial
    label: str = ""

    def grounded(self, assignment) -> "PQE":
        return PQE(self.premise, self.conclusion.subs_params(assignment), self.label)


@dataclass(frozen=True)
class HandelmanWitness:
    """Nonnegative multipliers for products of premise rows reproducing the
    conclusion exactly.  ``products[k]`` is a multiset of premise-row indices;
    the empty multiset stands for the constant 1."""

    degree: int
    products: tuple  # of tuples of row indices
    lambdas: tuple  # of Fraction


@dataclass(frozen=True)
class Reduction:
    pqe: PQE
    degree: int
    lambda_names: tuple
    products: tuple


def default_degree(pqe: PQE) -> int:
    return max(1, pqe.conclusion.degree())


def premise_products(premise: Polyhedron, degree: int):
    """All products of at most ``degree`` (closed) premise rows, as
    (index_multiset, Polynomial) pairs in deterministic order."""
    rows = [q.closed().as_poly() for q in premise.inequalities]
    out = []
    for size in range(degree + 1):
        for combo in combinations_with_replacement(range(len(rows)), size):
            p = Polynomial.const(1)
            for i in combo:
                p = p * rows[i]
            out.append((combo, p))
    return out


def _monomial_items(poly: Polynomial):
    for e, c in poly.monomials():
        key = tuple(
            (poly.variables[i], x) for i, x in enumerate(e) if x
        )
        yield key, c


def handelman_reduce(pqe: PQE, degree: int, lp: LinearProblem, prefix: str = "") -> Reduction:
    """Add fresh nonnegative lambda variables and the per-monomial equality
    rows forcing  conclusion == sum_k lambda_k * product_k  to ``lp``.

    Template parameters of the conclusion are registered as free variables
    unless the caller has already given them bounds.
    """
    for theta in sorted(pqe.conclusion.params()):
        lp.ensure_var(theta, lo=None)
    prods = premise_products(pqe.premise, degree)
    names = []
    for k in range(len(prods)):
        name = f"{prefix}l{k}"
        lp.add_var(name, lo=Fraction(0))
        names.append(name)

    table = {}

    def cell(key):
        return table.setdefault(key, [Fraction(0), {}])

    for key, c in _monomial_items(pqe.conclusion):
        entry = cell(key)
        if isinstance(c, ParamExpr):
            cst, lin = c.affine_parts()
            entry[0] += cst
            for t, a in lin.items():
                entry[1][t] = entry[1].get(t, Fraction(0)) + a
        else:
            entry[0] += c
    for name, (_, p) in zip(names, prods):
        for key, c in _monomial_items(p):
            entry = cell(key)
            entry[1][name] = entry[1].get(name, Fraction(0)) - c

    for key in sorted(table):
        const, lin = table[key]
        lp.add_row(lin, const, "=")
    return Reduction(pqe, degree, tuple(names), tuple(c for c, _ in prods))


def witness_from_solution(reduction: Reduction, solution) -> HandelmanWitness:
    return HandelmanWitness(
        reduction.degree,
        reduction.products,
        tuple(solution[n] for n in reduction.lambda_names),
    )


def prove_pqe(pqe: PQE, degree: int | None = None, deadline=None):
    """Search a witness for one parameter-free entailment; None if the LP at
    this degree has no solution."""
    if pqe.conclusion.has_params():
        raise InputError("prove_pqe needs a parameter-free conclusion")
    if degree is None:
        degree = default_degree(pqe)
    lp = LinearProblem()
    red = handelman_reduce(pqe, degree, lp)
    sol = solve_lp(lp, deadline)
    if sol is None:
        return None
    w = witness_from_solution(red, sol)
    if not verify_witness(pqe, w):
        raise AssertionError(f"solver returned an invalid witness for {pqe.label}")
    return w


def verify_witness(pqe: PQE, witness: HandelmanWitness) -> bool:
    """Exact recheck, independent of the LP: all lambdas nonnegative and the
    residual  conclusion - sum lambda_k product_k  identically zero."""
    if pqe.conclusion.has_params():
        raise InputError("cannot verify a witness against a symbolic conclusion")
    by_combo = dict(premise_products(pqe.premise, witness.degree))
    acc = Polynomial.zero()
    for combo, lam in zip(witness.products, witness.lambdas):
        if lam < 0:
            return False
        if combo not in by_combo:
            return False
        acc = acc + by_combo[combo].scale(lam)
    return (pqe.conclusion - acc).is_zero()
