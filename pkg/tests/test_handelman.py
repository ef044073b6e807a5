from fractions import Fraction

import pytest

from lfpcert.errors import InputError
from lfpcert.handelman import (
    PQE,
    HandelmanWitness,
    default_degree,
    handelman_reduce,
    premise_products,
    prove_pqe,
    verify_witness,
    witness_from_solution,
)
from lfpcert.poly import LinearInequality, ParamExpr, Polyhedron, Polynomial
from lfpcert.simplex import LinearProblem, solve_lp

F = Fraction
X = Polynomial.var("x")


def box(*atoms):
    return Polyhedron(tuple(LinearInequality(c, d, s) for c, d, s in atoms))


def test_known_multipliers():
    # x >= 1 entails 3x^2 + 15x - 6 >= 0, witnessed at degree 2 by
    # 12 + 21(x-1) + 3(x-1)^2
    pqe = PQE(box(({"x": 1}, -1, False)), 3 * X * X + 15 * X - 6)
    lp = LinearProblem()
    red = handelman_reduce(pqe, 2, lp)
    sol = solve_lp(lp)
    assert sol is not None
    w = witness_from_solution(red, sol)
    assert w.products == ((), (0,), (0, 0))
    assert w.lambdas == (F(12), F(21), F(3))
    assert verify_witness(pqe, w)


def test_products_enumeration():
    prem = box(({"x": 1}, -1, False), ({"x": -1}, 2, False))
    prods = premise_products(prem, 2)
    combos = [c for c, _ in prods]
    assert combos == [(), (0,), (1,), (0, 0), (0, 1), (1, 1)]
    # (x - 1)(2 - x) = -x^2 + 3x - 2
    assert prods[4][1] == -(X * X) + 3 * X - 2


def test_strict_premise_uses_closure():
    # premise x > 1 is handled as x >= 1; conclusion x - 1 >= 0 still provable
    pqe = PQE(box(({"x": 1}, -1, True)), X - 1)
    w = prove_pqe(pqe, 1)
    assert w is not None and verify_witness(pqe, w)


def test_unprovable_at_low_degree():
    # x >= 0 entails x^2 >= 0, but degree 1 products cannot express x^2
    pqe = PQE(box(({"x": 1}, 0, False)), X * X)
    assert prove_pqe(pqe, 1) is None
    w = prove_pqe(pqe, 2)
    assert w is not None


def test_false_entailment_has_no_witness():
    # x >= 0 does not entail x - 1 >= 0
    pqe = PQE(box(({"x": 1}, 0, False)), X - 1)
    assert prove_pqe(pqe, 3) is None


def test_empty_premise_constant_conclusion():
    pqe = PQE(Polyhedron.top(), Polynomial.const(5))
    w = prove_pqe(pqe, 2)
    assert w is not None and w.lambdas[0] == 5
    assert prove_pqe(PQE(Polyhedron.top(), X), 2) is None


def test_two_variable_entailment():
    # x >= 0, y >= 0, x + y <= 1 entails 1 - x*y >= 0 ... at degree 2:
    # 1 - xy = (1 - x - y) + x(1-x-y) + y(1-x-y) + x^2 ... check solver finds some witness
    prem = box(
        ({"x": 1}, 0, False),
        ({"y": 1}, 0, False),
        ({"x": -1, "y": -1}, 1, False),
    )
    Yv = Polynomial.var("y")
    pqe = PQE(prem, 1 - X * Yv)
    w = prove_pqe(pqe, 2)
    assert w is not None and verify_witness(pqe, w)


def test_symbolic_conclusion_ties_parameters():
    # find theta with  x >= 2  entailing  theta*x - 6 >= 0 and theta <= 3:
    # equality rows force lambda structure; minimizing nothing, any feasible
    # theta in [3, 3] when we also require 3 - theta >= 0 via a plain row
    t = ParamExpr.param("theta")
    pqe = PQE(box(({"x": 1}, -2, False)), X.scale(t) - 6)
    lp = LinearProblem()
    lp.ensure_var("theta", lo=None)
    lp.add_row({"theta": -1}, 3, ">=")  # theta <= 3
    red = handelman_reduce(pqe, 1, lp, prefix="p0_")
    sol = solve_lp(lp)
    assert sol is not None
    # theta*x - 6 = l0 + l1(x - 2): theta = l1, -6 = l0 - 2*l1 with l0 >= 0
    # means theta >= 3; with theta <= 3 the only choice is 3
    assert sol["theta"] == 3
    grounded = pqe.grounded({"theta": sol["theta"]})
    assert verify_witness(grounded, witness_from_solution(red, sol))


def test_verify_rejects_bad_witness():
    pqe = PQE(box(({"x": 1}, -1, False)), X - 1)
    good = prove_pqe(pqe, 1)
    assert good is not None
    bad = HandelmanWitness(good.degree, good.products, (F(1),) + good.lambdas[1:])
    assert not verify_witness(pqe, bad)
    neg = HandelmanWitness(1, ((),), (F(-1),))
    assert not verify_witness(PQE(box(({"x": 1}, 0, False)), Polynomial.zero()), neg)


def test_default_degree():
    assert default_degree(PQE(Polyhedron.top(), X * X * X)) == 3
    assert default_degree(PQE(Polyhedron.top(), Polynomial.const(1))) == 1


def test_prove_pqe_rejects_symbolic():
    t = ParamExpr.param("a")
    with pytest.raises(InputError):
        prove_pqe(PQE(Polyhedron.top(), Polynomial.const(t)), 1)
