from fractions import Fraction as F

import pytest

from lfpcert.simplex import Deadline, LinearProblem, TimeoutExpired, solve_lp


def test_trivial_feasible():
    lp = LinearProblem()
    lp.add_var("l0")
    lp.add_var("l1")
    lp.add_row({"l0": 1, "l1": 1}, F(-1), "=")  # l0 + l1 = 1
    sol = solve_lp(lp)
    assert sol is not None
    assert sol["l0"] + sol["l1"] == 1
    assert sol["l0"] >= 0 and sol["l1"] >= 0


def test_trivial_infeasible():
    lp = LinearProblem()
    lp.add_var("l0")
    lp.add_row({"l0": 1}, F(1), "=")  # l0 = -1 but l0 >= 0
    assert solve_lp(lp) is None


def test_free_variable_elimination():
    lp = LinearProblem()
    lp.add_var("t", lo=None)  # free
    lp.add_var("l", lo=F(0))
    lp.add_row({"t": 1, "l": -1}, F(-3), "=")  # t = 3 + l
    lp.add_row({"t": 1}, F(-5), ">=")  # t >= 5
    sol = solve_lp(lp)
    assert sol is not None
    assert sol["t"] == 3 + sol["l"]
    assert sol["t"] >= 5


def test_boxed_variable():
    lp = LinearProblem()
    lp.add_var("a", lo=F(0), hi=F(1))
    lp.add_row({"a": 1}, F(-2), ">=")  # a >= 2: impossible inside [0,1]
    assert solve_lp(lp) is None

    lp2 = LinearProblem()
    lp2.add_var("a", lo=F(0), hi=F(1))
    lp2.add_row({"a": 2}, F(-1), ">=")  # a >= 1/2
    sol = solve_lp(lp2)
    assert sol is not None
    assert F(1, 2) <= sol["a"] <= 1


def test_upper_bound_only():
    lp = LinearProblem()
    lp.add_var("x", lo=None, hi=F(4))
    lp.add_row({"x": 1}, F(0), ">=")  # x >= 0
    lp.set_objective({"x": 1})
    sol = solve_lp(lp)
    assert sol is not None
    assert sol["x"] == 4


def test_objective_maximize():
    # max x + y st x + 2y <= 4, 3x + y <= 6, x,y >= 0 -> (8/5, 6/5), opt 14/5
    lp = LinearProblem()
    lp.add_var("x")
    lp.add_var("y")
    lp.add_row({"x": -1, "y": -2}, F(4), ">=")
    lp.add_row({"x": -3, "y": -1}, F(6), ">=")
    lp.set_objective({"x": 1, "y": 1})
    sol = solve_lp(lp)
    assert sol is not None
    assert sol["x"] + sol["y"] == F(14, 5)
    assert sol["x"] == F(8, 5) and sol["y"] == F(6, 5)


def test_equalities_mixed_with_inequalities():
    # Handelman-like shape: residual coeff matching
    # conclusion 3x^2+15x-6 vs lambda0 + lambda1 (x-1) + lambda2 (x-1)^2
    # rows: l2 = 3 ; l1 - 2 l2 = 15 ; l0 - l1 + l2 = -6
    lp = LinearProblem()
    for v in ("l0", "l1", "l2"):
        lp.add_var(v)
    lp.add_row({"l2": 1}, F(-3), "=")
    lp.add_row({"l1": 1, "l2": -2}, F(-15), "=")
    lp.add_row({"l0": 1, "l1": -1, "l2": 1}, F(6), "=")
    sol = solve_lp(lp)
    assert sol == {"l0": F(12), "l1": F(21), "l2": F(3)}


def test_degenerate_rows_and_redundancy():
    lp = LinearProblem()
    lp.add_var("x")
    lp.add_row({"x": 1}, F(0), ">=")
    lp.add_row({"x": 2}, F(0), ">=")
    lp.add_row({"x": 1}, F(0), "=")
    sol = solve_lp(lp)
    assert sol is not None and sol["x"] == 0


def test_infeasible_equality_chain():
    lp = LinearProblem()
    lp.add_var("a", lo=None)
    lp.add_var("b", lo=None)
    lp.add_row({"a": 1, "b": 1}, F(-2), "=")
    lp.add_row({"a": 1, "b": 1}, F(-3), "=")
    assert solve_lp(lp) is None


def test_unbounded_objective_still_feasible():
    lp = LinearProblem()
    lp.add_var("x")
    lp.set_objective({"x": 1})
    lp.add_row({"x": 1}, F(0), ">=")
    sol = solve_lp(lp)
    # objective is unbounded; solver must still return a feasible point
    assert sol is not None and sol["x"] >= 0


def test_deadline_expires():
    lp = LinearProblem()
    for i in range(40):
        lp.add_var(f"x{i}")
    for i in range(39):
        lp.add_row({f"x{i}": 1, f"x{i+1}": -1}, F(-1), ">=")
    dl = Deadline(seconds=-1)  # already expired
    with pytest.raises(TimeoutExpired):
        solve_lp(lp, dl)
