from fractions import Fraction

import pytest

from lfpcert.errors import NonLinearGuard
from lfpcert.poly import LinearInequality, ParamExpr, Polyhedron, Polynomial


F = Fraction


def lin(coeffs, const, strict=False):
    return LinearInequality(coeffs, const, strict)


# ---------------------------------------------------------------------------
# ParamExpr
# ---------------------------------------------------------------------------
def test_param_arithmetic():
    a = ParamExpr.param("a")
    b = ParamExpr.param("b")
    e = 2 * a + 3 * b - 1
    assert e.terms == {("a",): F(2), ("b",): F(3), (): F(-1)}
    assert e.is_affine()
    assert not e.is_const()

    q = a * b + a * a
    assert q.terms == {("a", "b"): F(1), ("a", "a"): F(1)}
    assert not q.is_affine()


def test_param_subs():
    a = ParamExpr.param("a")
    b = ParamExpr.param("b")
    e = a * b + 2 * a + 5
    got = e.subs({"a": F(1, 2)})
    assert got == ParamExpr.param("b") * F(1, 2) + 6
    full = got.subs({"b": 4})
    assert full.is_const() and full.const_value() == 8


def test_param_degree_cap():
    a = ParamExpr.param("a")
    with pytest.raises(ValueError):
        (a * a) * a


def test_param_affine_parts():
    e = 3 * ParamExpr.param("x") - 2
    c, lin_part = e.affine_parts()
    assert c == -2 and lin_part == {"x": F(3)}
    with pytest.raises(ValueError):
        (ParamExpr.param("x") * ParamExpr.param("y")).affine_parts()


# ---------------------------------------------------------------------------
# Polynomial
# ---------------------------------------------------------------------------
def test_poly_basic_arith():
    x = Polynomial.var("x")
    y = Polynomial.var("y")
    p = (x + y) * (x - y)
    assert p == x * x - y * y
    assert p.degree() == 2
    assert (p - p).is_zero()


def test_poly_canonical_drops_unused():
    p = Polynomial(("x", "y"), {(1, 0): F(2)})
    assert p.variables == ("x",)
    q = Polynomial.var("x").scale(2)
    assert p == q


def test_poly_substitute_composition():
    x = Polynomial.var("x")
    p = x * x + 3 * x + 1
    # x -> x - 1
    q = p.substitute({"x": x - 1})
    # (x-1)^2 + 3(x-1) + 1 = x^2 + x - 1
    assert q == x * x + x - 1


def test_poly_substitute_multivar():
    x, y = Polynomial.var("x"), Polynomial.var("y")
    p = x * y + y
    q = p.substitute({"x": y, "y": x})
    assert q == x * y + x


def test_poly_evaluate_exact():
    x = Polynomial.var("x")
    p = x**3 - x.scale(F(1, 3))
    assert p.evaluate({"x": F(1, 2)}) == F(1, 8) - F(1, 6)


def test_poly_param_coeffs():
    a = ParamExpr.param("a")
    x = Polynomial.var("x")
    p = x.scale(a) + 1
    assert p.has_params() and p.params() == {"a"}
    grounded = p.subs_params({"a": F(3)})
    assert not grounded.has_params()
    assert grounded == 3 * x + 1
    v = p.evaluate({"x": F(2)})
    assert isinstance(v, ParamExpr)
    assert v == 2 * a + 1


def test_poly_pow():
    x = Polynomial.var("x")
    assert (x + 1) ** 3 == x**3 + 3 * x**2 + 3 * x + 1
    assert (x + 1) ** 0 == Polynomial.const(1)


# ---------------------------------------------------------------------------
# LinearInequality
# ---------------------------------------------------------------------------
def test_from_poly_rejects_nonlinear():
    x = Polynomial.var("x")
    with pytest.raises(NonLinearGuard):
        LinearInequality.from_poly(x * x - 1, strict=False)


def test_integer_tightening_strict():
    # x > 0 over the integers becomes x >= 1
    x = Polynomial.var("x")
    q = LinearInequality.from_poly(x, strict=True, sorts={"x": "int"})
    assert not q.strict
    assert q.coeffs == {"x": F(1)} and q.const == F(-1)


def test_integer_tightening_fractional_bound():
    # 2x - 1 >= 0 over int: x >= 1/2 becomes x >= 1
    x = Polynomial.var("x")
    q = LinearInequality.from_poly(2 * x - 1, strict=False, sorts={"x": "int"})
    assert q.coeffs == {"x": F(1)} and q.const == F(-1) and not q.strict


def test_real_atoms_keep_strictness():
    x = Polynomial.var("x")
    q = LinearInequality.from_poly(x, strict=True, sorts={"x": "real"})
    assert q.strict


def test_negation_integer_complement():
    # not (x >= 1) over int is x <= 0
    q = lin({"x": 1}, -1).negate(sorts={"x": "int"})
    assert q.coeffs == {"x": F(-1)} and q.const == F(0) and not q.strict
    assert q.evaluate({"x": 0}) and not q.evaluate({"x": 1})


def test_negation_real_flips_strictness():
    q = lin({"x": 1}, 0, strict=False).negate(sorts={"x": "real"})
    assert q.strict and q.coeffs == {"x": F(-1)}
    assert not q.evaluate({"x": 0})


def test_canonical_key_scaling():
    assert lin({"x": 2, "y": -4}, 6) == lin({"x": 1, "y": -2}, 3)
    assert lin({"x": 1}, 0) != lin({"x": 1}, 0, strict=True)


# ---------------------------------------------------------------------------
# Polyhedron
# ---------------------------------------------------------------------------
def test_polyhedron_feasibility():
    # x >= 1 and -x >= 0: empty
    p = Polyhedron((lin({"x": 1}, -1), lin({"x": -1}, 0)))
    assert not p.feasible()
    # x > 0 and 1 - x > 0 over the reals: open unit interval, nonempty
    q = Polyhedron((lin({"x": 1}, 0, strict=True), lin({"x": -1}, 1, strict=True)))
    assert q.feasible()


def test_polyhedron_strict_point_excluded():
    # x >= 0 and -x >= 0 and x > 0: only candidate x = 0 fails the strict atom
    p = Polyhedron(
        (lin({"x": 1}, 0), lin({"x": -1}, 0), lin({"x": 1}, 0, strict=True))
    )
    assert not p.feasible()


def test_polyhedron_integer_gap():
    # over int, 0 < x < 1 tightens to 1 <= x <= 0: empty
    x = Polynomial.var("x")
    sorts = {"x": "int"}
    a = LinearInequality.from_poly(x, strict=True, sorts=sorts)
    b = LinearInequality.from_poly(1 - x, strict=True, sorts=sorts)
    assert not Polyhedron((a, b)).feasible()


def test_polyhedron_implies():
    sorts = {"x": "int"}
    ge2 = Polyhedron((lin({"x": 1}, -2),))
    ge1 = Polyhedron((lin({"x": 1}, -1),))
    assert ge2.implies(ge1, sorts)
    assert not ge1.implies(ge2, sorts)


def test_complement_cells_partition():
    sorts = {"x": "int", "y": "int"}
    box = Polyhedron((lin({"x": 1}, 0), lin({"y": 1}, 0)))
    cells = box.complement_cells(sorts)
    assert len(cells) == 2
    pts = [{"x": a, "y": b} for a in range(-2, 3) for b in range(-2, 3)]
    for s in pts:
        inside = box.evaluate(s)
        hits = sum(c.evaluate(s) for c in cells)
        assert hits == (0 if inside else 1)


def test_polyhedron_dedupes_and_drops_trivial():
    p = Polyhedron((lin({}, 5), lin({"x": 2}, -2), lin({"x": 1}, -1)))
    assert len(p.inequalities) == 1
    assert Polyhedron((lin({}, -1),)).is_trivially_false()
