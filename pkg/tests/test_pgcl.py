"""Parser tests: token positions, sugar, precedence, and error reporting."""

from fractions import Fraction

import pytest

from lfpcert.eqsys import BAnd, BNot, BOr, Cmp, TRUE
from lfpcert.pgcl import (
    Assign,
    IfStmt,
    Nondet,
    Observe,
    ProbChoice,
    Score,
    Seq,
    Skip,
    Tick,
    While,
    parse_pgcl,
)
from lfpcert.poly import Polynomial

X = Polynomial.var("x")
Y = Polynomial.var("y")


def test_random_walk_ast():
    p = parse_pgcl("while(x>0){ {x:=x-1} [1/3] {x:=x+1} }")
    assert p.variables == (("x", "int"),)
    loop = p.body
    assert isinstance(loop, While)
    assert (loop.line, loop.col) == (1, 1)
    assert loop.cond == Cmp(X, ">", Polynomial.const(0))
    body = loop.body
    assert body == ProbChoice(
        Polynomial.const(Fraction(1, 3)), Assign("x", X - 1), Assign("x", X + 1)
    )


def test_sequencing_and_trailing_semicolon():
    p = parse_pgcl("skip; x := 1; skip;")
    assert p.body == Seq(Seq(Skip(), Assign("x", Polynomial.const(1))), Skip())
    q = parse_pgcl("while(x>0){ x := x - 1; }")
    assert q.body.body == Assign("x", X - 1)


def test_declarations_and_first_use_order():
    p = parse_pgcl("int a, b; real t; b := a + 1; c := t")
    assert p.variables == (
        ("a", "int"),
        ("b", "int"),
        ("t", "real"),
        ("c", "int"),  # undeclared variables default to int, first-use order
    )
    with pytest.raises(SyntaxError, match="declared twice"):
        parse_pgcl("int x; int x; skip")


def test_diverge_is_while_true_skip():
    assert parse_pgcl("diverge").body == While(TRUE, Skip(), 1, 1)
    w = parse_pgcl("while(true){skip}").body
    assert (w.cond, w.body) == (TRUE, Skip())


def test_tick_forms():
    assert parse_pgcl("tick").body == Tick(Fraction(1))
    assert parse_pgcl("tick(3)").body == Tick(Fraction(3))
    assert parse_pgcl("tick(-1)").body == Tick(Fraction(-1))
    assert parse_pgcl("tick(2/5)").body == Tick(Fraction(2, 5))
    with pytest.raises(SyntaxError, match="rational constant"):
        parse_pgcl("tick(x)")


def test_score_and_observe():
    assert parse_pgcl("score(1/2)").body == Score(Polynomial.const(Fraction(1, 2)))
    assert parse_pgcl("score(x*x)").body == Score(X * X)
    obs = parse_pgcl("observe(x = 0 || x = 1)").body
    assert isinstance(obs, Observe)
    assert isinstance(obs.cond, BOr)


def test_if_else_and_nondet():
    p = parse_pgcl("if(x > 0){ x := x - 1 } else { skip }")
    assert p.body == IfStmt(Cmp(X, ">", Polynomial.const(0)), Assign("x", X - 1), Skip())
    q = parse_pgcl("if(x > 0){ skip }")
    assert q.body.other == Skip()
    r = parse_pgcl("{tick(-1)} <> {tick(1)}")
    assert r.body == Nondet(Tick(Fraction(-1)), Tick(Fraction(1)))
    s = parse_pgcl("{x := 1; y := 2}")  # bare block groups a sequence
    assert s.body == Seq(Assign("x", Polynomial.const(1)), Assign("y", Polynomial.const(2)))


def test_boolean_grammar_nesting():
    p = parse_pgcl("if((x+1)*2 > y && (y <= 3 || !(x = 0))){skip}")
    cond = p.body.cond
    assert cond == BAnd(
        (
            Cmp(Polynomial.const(2) + X * 2, ">", Y),
            BOr((Cmp(Y, "<=", Polynomial.const(3)), BNot(Cmp(X, "=", Polynomial.const(0))))),
        )
    )
    # parenthesized arithmetic on both sides of a comparison still parses
    q = parse_pgcl("while((x) < (y)){ x := x + 1 }")
    assert q.body.cond == Cmp(X, "<", Y)


def test_polynomial_expressions():
    p = parse_pgcl("int x; x := (1/2)*x + 3*x*x")
    e = p.body.expr
    assert e == Polynomial.const(Fraction(1, 2)) * X + Polynomial.const(3) * X * X
    q = parse_pgcl("x := x - y - 1")
    assert q.body.expr == X - Y - 1
    r = parse_pgcl("x := -x * x")
    assert r.body.expr == -X * X


def test_probability_expression_is_kept_symbolic():
    p = parse_pgcl("{x := 1} [x] {x := 0}")
    assert p.body.prob == X  # range checking happens at translation time


def test_comments_and_layout():
    src = """
    // counter with a comment
    int x;  // inline
    while(x > 0){
      x := x - 1
    }
    """
    p = parse_pgcl(src)
    assert (p.body.line, p.body.col) == (4, 5)


@pytest.mark.parametrize(
    "src, pos",
    [
        ("while(x>0){", "1:12"),
        ("x := := 1", "1:6"),
        ("if x>0 {skip}", "1:4"),
        ("skip }", "1:6"),
        ("x := 1 ~ 2", "1:8"),
    ],
)
def test_syntax_errors_carry_position(src, pos):
    with pytest.raises(SyntaxError, match=pos):
        parse_pgcl(src)


def test_keywords_are_not_identifiers():
    with pytest.raises(SyntaxError):
        parse_pgcl("skip := 1")
    with pytest.raises(SyntaxError):
        parse_pgcl("int while; skip")
