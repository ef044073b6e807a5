from fractions import Fraction

from lfpcert.eqsys import (
    EquationSystem,
    PredDecl,
    Query,
    call,
    cmp,
    const,
    fif,
    fmin,
    fsum,
    scale,
)
from lfpcert.poly import Polynomial
from lfpcert.synth import CONFIGS, config_with, synthesize, synthesize_upper

F = Fraction
X = Polynomial.var("x")


def walk_system():
    f = fif(
        cmp(X, ">", 0),
        fsum(
            scale(F(2, 3), call("X", X - 1)),
            scale(F(1, 3), call("X", X + 1)),
            const(1),
        ),
        const(0),
    )
    return EquationSystem.from_surface((PredDecl("X", (("x", "int"),)),), {"X": f})


def coin_system():
    c = Polynomial.var("c")
    f = fif(
        cmp(c, "=", 1),
        fsum(const(1), scale(F(1, 2), call("X", 0)), scale(F(1, 2), call("X", 1))),
        const(0),
    )
    return EquationSystem.from_surface((PredDecl("X", (("c", "int"),)),), {"X": f})


def test_walk_lower_synthesis():
    res = synthesize(walk_system(), Query(call("X", 1), ">=", F(3)), CONFIGS["A"])
    assert res.status == "valid"
    assert res.report.valid
    # the witness pinned to the query evaluates to at least the bound
    eta = res.certificate.eta["X"]
    got = next(v for g, v in eta.pieces if g.evaluate({"x": 1}))
    assert got.evaluate({"x": 1}) >= 3


def test_walk_upper_synthesis():
    res = synthesize(walk_system(), Query(call("X", 1), "<=", F(3)), CONFIGS["A"])
    assert res.status == "valid"
    assert res.report.valid


def test_walk_lower_overclaim_unknown():
    res = synthesize(
        walk_system(), Query(call("X", 1), ">=", F(301, 100)), CONFIGS["A"]
    )
    assert res.status == "unknown"
    assert res.certificate is None


def test_walk_upper_underclaim_unknown():
    res = synthesize(
        walk_system(), Query(call("X", 1), "<=", F(299, 100)), CONFIGS["A"]
    )
    assert res.status == "unknown"


def test_coin_flip_both_directions_config_b():
    sys = coin_system()
    res = synthesize(sys, Query(call("X", 1), ">=", F(2)), CONFIGS["B"])
    assert res.status == "valid"
    res = synthesize(sys, Query(call("X", 1), "<=", F(2)), CONFIGS["B"])
    assert res.status == "valid"


def test_divergent_counter_needs_scaling():
    # X() = X() + 1 diverges; scaling the rhs by 1/2 certifies X() >= 1
    sys = EquationSystem.from_surface(
        (PredDecl("X", ()),), {"X": fsum(call("X"), const(1))}
    )
    query = Query(call("X"), ">=", F(1))
    res = synthesize(sys, query, CONFIGS["B"])
    assert res.status == "unknown"
    res = synthesize(sys, query, CONFIGS["C1"])
    assert res.status == "valid"
    assert res.certificate.eprime is not None


def test_two_predicate_lower_synthesis():
    x, y = Polynomial.var("x"), Polynomial.var("y")
    fx = fif(
        cmp(x, "!=", y),
        fsum(
            scale(F(1, 3), call("XY", y, y)),
            scale(F(1, 3), call("XY", y, x)),
            scale(F(1, 3), call("D")),
        ),
        const(1),
    )
    sys = EquationSystem.from_surface(
        (PredDecl("XY", (("x", "int"), ("y", "int"))), PredDecl("D", ())),
        {"XY": fx, "D": call("D")},
    )
    res = synthesize(sys, Query(call("XY", 1, 2), ">=", F(1, 2)), CONFIGS["A"])
    assert res.status == "valid"


def test_demonic_walk_window_synthesis():
    f = fif(
        cmp(X, ">", 0),
        fsum(
            scale(F(1, 2), call("X", X - 1)),
            scale(F(1, 2), fmin(call("X", X + 1), call("X", X))),
        ),
        const(1),
    )
    sys = EquationSystem.from_surface((PredDecl("X", (("x", "int"),)),), {"X": f})
    cfg = config_with(CONFIGS["C2"], deg_r=2)
    res = synthesize(sys, Query(call("X", 1), ">=", F(7, 8)), cfg)
    assert res.status == "valid"
    assert res.certificate.eprime is not None
    assert res.candidate


def test_synthesis_is_deterministic():
    q = Query(call("X", 1), ">=", F(3))
    a = synthesize(walk_system(), q, CONFIGS["A"])
    b = synthesize(walk_system(), q, CONFIGS["A"])
    assert a.certificate.u == b.certificate.u
    assert a.certificate.r == b.certificate.r
    assert a.certificate.eta == b.certificate.eta


def test_upper_entry_point_matches_relation():
    res = synthesize_upper(
        coin_system(), Query(call("X", 1), "<=", F(2)), CONFIGS["B"]
    )
    assert res.status == "valid"
