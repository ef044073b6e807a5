from fractions import Fraction

import pytest

from lfpcert.certify import (
    AltScale,
    Certificate,
    EPrime,
    ScaledCell,
    apply_eprime,
    build_constraints,
    check_certificate,
    check_numeric,
    check_upper,
    emit_smt,
    grid_states,
)
from lfpcert.eqsys import (
    EquationSystem,
    PiecewisePoly,
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
from lfpcert.errors import CertificateFormatError, InputError
from lfpcert.poly import ExpPoly, LinearInequality, Polyhedron, Polynomial

F = Fraction
X = Polynomial.var("x")
ZERO = Polynomial.zero()


def poly_ge(coeffs, c):
    return Polyhedron((LinearInequality(coeffs, c),))


POS = poly_ge({"x": 1}, -1)  # x >= 1
NONPOS = poly_ge({"x": -1}, 0)  # x <= 0


def pw(*pieces):
    return PiecewisePoly(("x",), tuple(pieces))


# ---------------------------------------------------------------------------
# expected steps of the left-biased walk: lfp is 3x on x > 0
# ---------------------------------------------------------------------------
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


def walk_lower_cert(eta_top=3):
    return Certificate(
        "lower",
        u={"X": pw((POS, 6 * X), (NONPOS, ZERO))},
        r={"X": pw((POS, 9 * X * X + 27 * X), (NONPOS, ZERO))},
        eta={"X": pw((POS, eta_top * X), (NONPOS, ZERO))},
    )


def test_walk_lower_certificate_valid():
    sys = walk_system()
    rep = check_certificate(sys, Query(call("X", 1), ">=", F(3)), walk_lower_cert())
    assert rep.valid, rep.failures
    assert rep.degree == 2 and rep.checked > 0


def test_walk_upper_certificate_valid():
    sys = walk_system()
    cert = Certificate("upper", u={"X": pw((POS, 3 * X), (NONPOS, ZERO))})
    rep = check_upper(sys, Query(call("X", 1), "<=", F(3)), cert)
    assert rep.valid, rep.failures


def test_walk_tampered_ranking_fails():
    sys = walk_system()
    cert = Certificate(
        "lower",
        u={"X": pw((POS, 6 * X), (NONPOS, ZERO))},
        r={"X": pw((POS, (9 * X * X + 27 * X).scale(F(1, 2))), (NONPOS, ZERO))},
        eta={"X": pw((POS, 3 * X), (NONPOS, ZERO))},
    )
    rep = check_certificate(sys, Query(call("X", 1), ">=", F(3)), cert)
    assert not rep.valid
    assert any(label.startswith("rank") for label, _ in rep.failures)


def test_walk_overclaiming_query_fails():
    sys = walk_system()
    rep = check_certificate(
        sys, Query(call("X", 1), ">=", F(301, 100)), walk_lower_cert()
    )
    assert not rep.valid
    assert any(label.startswith("query") for label, _ in rep.failures)


def test_direction_query_mismatch():
    sys = walk_system()
    with pytest.raises(InputError):
        build_constraints(sys, Query(call("X", 1), "<=", F(3)), walk_lower_cert())


def test_obligation_count_convention():
    # one equation, two branches, single-piece witnesses:
    # 4 families x 2 branches + 3 nonneg x 2 branches + 1 query = 15
    sys = walk_system()
    one = PiecewisePoly(("x",), ((Polyhedron.top(), Polynomial.const(1)),))
    cert = Certificate("lower", u={"X": one}, r={"X": one}, eta={"X": one})
    cset = build_constraints(sys, Query(call("X", 1), ">=", F(1)), cert)
    assert len(cset.entries) == 15
    labels = [q.label for _, q in cset.entries]
    assert labels[:2] == ["prefix[X.b0]", "prefix[X.b1]"]
    assert labels[-1] == "query"


# ---------------------------------------------------------------------------
# the walk paired with its second moment
# ---------------------------------------------------------------------------
def moment_system():
    first = fif(
        cmp(X, ">", 0),
        fsum(
            scale(F(2, 3), call("X1", X - 1)),
            scale(F(1, 3), call("X1", X + 1)),
            const(1),
        ),
        const(0),
    )
    second = fif(
        cmp(X, ">", 0),
        fsum(
            scale(F(2, 3), call("X2", X - 1)),
            scale(F(1, 3), call("X2", X + 1)),
            scale(
                2,
                fsum(
                    scale(F(2, 3), call("X1", X - 1)),
                    scale(F(1, 3), call("X1", X + 1)),
                ),
            ),
            const(1),
        ),
        const(0),
    )
    return EquationSystem.from_surface(
        (PredDecl("X1", (("x", "int"),)), PredDecl("X2", (("x", "int"),))),
        {"X1": first, "X2": second},
    )


def test_second_moment_lower_certificate():
    sys = moment_system()
    cert = Certificate(
        "lower",
        u={
            "X1": pw((POS, 6 * X), (NONPOS, ZERO)),
            "X2": pw((POS, 18 * X * X + 45 * X), (NONPOS, ZERO)),
        },
        r={
            "X1": pw((POS, 9 * X * X + 27 * X), (NONPOS, ZERO)),
            "X2": pw(
                (
                    POS,
                    36 * X**3
                    + (X * X).scale(F(585, 2))
                    + X.scale(F(1683, 2)),
                ),
                (NONPOS, ZERO),
            ),
        },
        eta={
            "X1": pw((POS, 3 * X), (NONPOS, ZERO)),
            "X2": pw((POS, 9 * X * X + 24 * X), (NONPOS, ZERO)),
        },
    )
    rep = check_certificate(sys, Query(call("X2", 1), ">=", F(33)), cert)
    assert rep.valid, rep.failures


def test_second_moment_upper_certificate():
    sys = moment_system()
    cert = Certificate(
        "upper",
        u={
            "X1": pw((POS, 3 * X), (NONPOS, ZERO)),
            "X2": pw((POS, 9 * X * X + 24 * X), (NONPOS, ZERO)),
        },
    )
    rep = check_certificate(sys, Query(call("X2", 1), "<=", F(33)), cert)
    assert rep.valid, rep.failures


# ---------------------------------------------------------------------------
# coin flip: expected flips until tails, starting from heads, is 2
# ---------------------------------------------------------------------------
def coin_system():
    c = Polynomial.var("c")
    f = fif(
        cmp(c, "=", 1),
        fsum(const(1), scale(F(1, 2), call("X", 0)), scale(F(1, 2), call("X", 1))),
        const(0),
    )
    return EquationSystem.from_surface((PredDecl("X", (("c", "int"),)),), {"X": f})


def coin_pieces(v):
    c = "c"
    eq1 = Polyhedron(
        (LinearInequality({c: 1}, -1), LinearInequality({c: -1}, 1))
    )
    lo = Polyhedron((LinearInequality({c: -1}, 0),))
    hi = Polyhedron((LinearInequality({c: 1}, -2),))
    return PiecewisePoly(
        (c,), ((eq1, Polynomial.const(v)), (lo, ZERO), (hi, ZERO))
    )


def test_coin_flip_bundle():
    sys = coin_system()
    lower = Certificate(
        "lower", u={"X": coin_pieces(2)}, r={"X": coin_pieces(4)}, eta={"X": coin_pieces(2)}
    )
    rep = check_certificate(sys, Query(call("X", 1), ">=", F(2)), lower)
    assert rep.valid, rep.failures
    upper = Certificate("upper", u={"X": coin_pieces(2)})
    rep = check_certificate(sys, Query(call("X", 1), "<=", F(2)), upper)
    assert rep.valid, rep.failures


# ---------------------------------------------------------------------------
# two-predicate system with a restriction zeroing a diverging call
# ---------------------------------------------------------------------------
def diagonal_system():
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
    return EquationSystem.from_surface(
        (PredDecl("XY", (("x", "int"), ("y", "int"))), PredDecl("D", ())),
        {"XY": fx, "D": call("D")},
    )


def diag_witness(off_diag, diag):
    gt = Polyhedron((LinearInequality({"x": 1, "y": -1}, -1),))
    lt = Polyhedron((LinearInequality({"x": -1, "y": 1}, -1),))
    eq = Polyhedron(
        (LinearInequality({"x": 1, "y": -1}, 0), LinearInequality({"x": -1, "y": 1}, 0))
    )
    return PiecewisePoly(
        ("x", "y"),
        (
            (gt, Polynomial.const(off_diag)),
            (lt, Polynomial.const(off_diag)),
            (eq, Polynomial.const(diag)),
        ),
    )


def zero_pw():
    return PiecewisePoly((), ((Polyhedron.top(), ZERO),))


def diag_eprime(call_scale):
    sys = diagonal_system()
    cells = []
    for bi, br in enumerate(sys.equations["XY"].branches):
        alts = br.body.calls if hasattr(br.body, "calls") else ()
        if alts:
            scales = AltScale((F(1), F(1), call_scale), F(1))
        else:
            scales = AltScale((), F(1))
        cells.append(("XY", ScaledCell(br.guard, bi, (scales,))))
    return EPrime(tuple(cells))


def test_diagonal_restricted_certificate():
    sys = diagonal_system()
    cert = Certificate(
        "lower",
        u={"XY": diag_witness(F(1, 2), 1), "D": zero_pw()},
        r={"XY": diag_witness(F(3, 2), 1), "D": zero_pw()},
        eta={"XY": diag_witness(F(1, 2), 1), "D": zero_pw()},
        eprime=diag_eprime(F(0)),
    )
    rep = check_certificate(sys, Query(call("XY", 1, 2), ">=", F(1, 2)), cert)
    assert rep.valid, rep.failures


def test_scale_outside_unit_interval_rejected():
    sys = diagonal_system()
    cert = Certificate(
        "lower",
        u={"XY": diag_witness(F(1, 2), 1), "D": zero_pw()},
        r={"XY": diag_witness(F(3, 2), 1), "D": zero_pw()},
        eta={"XY": diag_witness(F(1, 2), 1), "D": zero_pw()},
        eprime=diag_eprime(F(2)),
    )
    rep = check_certificate(sys, Query(call("XY", 1, 2), ">=", F(1, 2)), cert)
    assert not rep.valid
    assert any("scale factor" in reason for _, reason in rep.failures)


def test_apply_eprime_requires_full_cover():
    sys = walk_system()
    partial = EPrime(
        (("X", ScaledCell(poly_ge({"x": 1}, -2), 0, (AltScale((F(1), F(1)), F(1)),))),)
    )
    with pytest.raises(CertificateFormatError):
        apply_eprime(sys, partial, audit=True)


# ---------------------------------------------------------------------------
# demonic choice with a window restriction
# ---------------------------------------------------------------------------
def demonic_system():
    f = fif(
        cmp(X, ">", 0),
        fsum(
            scale(F(1, 2), call("X", X - 1)),
            scale(F(1, 2), fmin(call("X", X + 1), call("X", X))),
        ),
        const(1),
    )
    return EquationSystem.from_surface((PredDecl("X", (("x", "int"),)),), {"X": f})


def window_eprime():
    # keep the walk on 1 <= x <= 8, zero it beyond
    inside = Polyhedron(
        (LinearInequality({"x": 1}, -1), LinearInequality({"x": -1}, 8))
    )
    beyond = poly_ge({"x": 1}, -9)
    keep = AltScale((F(1), F(1)), F(1))
    drop = AltScale((F(0), F(0)), F(0))
    return EPrime(
        (
            ("X", ScaledCell(inside, 0, (keep, keep))),
            ("X", ScaledCell(beyond, 0, (drop, drop))),
            ("X", ScaledCell(NONPOS, 1, (AltScale((), F(1)),))),
        )
    )


def test_demonic_window_certificate():
    sys = demonic_system()
    inside = Polyhedron(
        (LinearInequality({"x": 1}, -1), LinearInequality({"x": -1}, 8))
    )
    beyond = poly_ge({"x": 1}, -9)
    one = PiecewisePoly(("x",), ((Polyhedron.top(), Polynomial.const(1)),))
    r = PiecewisePoly(
        ("x",),
        (
            (inside, -(X * X) + 20 * X + 1),
            (beyond, Polynomial.const(1)),
            (NONPOS, Polynomial.const(1)),
        ),
    )
    eta = PiecewisePoly(
        ("x",),
        (
            (inside, 1 - X.scale(F(1, 9))),
            (beyond, ZERO),
            (NONPOS, Polynomial.const(1)),
        ),
    )
    cert = Certificate(
        "lower", u={"X": one}, r={"X": r}, eta={"X": eta}, eprime=window_eprime()
    )
    rep = check_certificate(sys, Query(call("X", 1), ">=", F(8, 9)), cert)
    assert rep.valid, rep.failures


def test_demonic_upper_certificate():
    sys = demonic_system()
    one = PiecewisePoly(("x",), ((Polyhedron.top(), Polynomial.const(1)),))
    rep = check_certificate(
        sys, Query(call("X", 1), "<=", F(1)), Certificate("upper", u={"X": one})
    )
    assert rep.valid, rep.failures


def test_upper_certificate_rejects_restriction():
    one = PiecewisePoly(("x",), ((Polyhedron.top(), Polynomial.const(1)),))
    with pytest.raises(CertificateFormatError):
        Certificate("upper", u={"X": one}, eprime=window_eprime())


# ---------------------------------------------------------------------------
# pointwise checking with exponential witnesses
# ---------------------------------------------------------------------------
def gambler_system():
    f = fif(
        cmp(X, ">", 0),
        fsum(scale(F(1, 3), call("X", X - 1)), scale(F(2, 3), call("X", X + 1))),
        const(1),
    )
    return EquationSystem.from_surface((PredDecl("X", (("x", "int"),)),), {"X": f})


def geo(coeff, base):
    return ExpPoly(ZERO, ((Polynomial.const(coeff), F(*base), X),))


def gambler_cert(r_coeff=18):
    u = pw((POS, geo(1, (1, 2))), (NONPOS, Polynomial.const(1)))
    r = pw((POS, geo(r_coeff, (2, 3))), (NONPOS, Polynomial.const(1)))
    return Certificate("lower", u=u and {"X": u}, r={"X": r}, eta={"X": u})


def test_gambler_numeric_consistent():
    sys = gambler_system()
    states = grid_states(sys, {"x": (-3, 50)})
    rep = check_numeric(
        sys, Query(call("X", 1), ">=", F(1, 2)), gambler_cert(), states
    )
    assert rep.consistent, rep.violations
    assert rep.checked > 100


def test_gambler_numeric_catches_halved_ranking():
    sys = gambler_system()
    states = grid_states(sys, {"x": (-3, 50)})
    rep = check_numeric(
        sys, Query(call("X", 1), ">=", F(1, 2)), gambler_cert(9), states
    )
    assert not rep.consistent
    bad_states = {s["x"] for label, s, _ in rep.violations if label.startswith("rank")}
    assert 2 in bad_states
    assert 1 not in bad_states


def test_exponential_witness_rejected_by_algebraic_checker():
    sys = gambler_system()
    with pytest.raises(InputError):
        check_certificate(sys, Query(call("X", 1), ">=", F(1, 2)), gambler_cert())


def test_grid_states_shapes():
    sys = diagonal_system()
    states = grid_states(sys, {"x": (0, 2), "y": (0, 1)})
    assert len(states["XY"]) == 6
    assert states["D"] == [{}]


# ---------------------------------------------------------------------------
# SMT export
# ---------------------------------------------------------------------------
def test_emit_smt_smoke():
    sys = moment_system()
    cert = Certificate(
        "upper",
        u={
            "X1": pw((POS, 3 * X), (NONPOS, ZERO)),
            "X2": pw((POS, 9 * X * X + 24 * X), (NONPOS, ZERO)),
        },
    )
    cset = build_constraints(sys, Query(call("X2", 1), "<=", F(100, 3)), cert)
    text = emit_smt(cset, 2, scale_params=("a0",), comment="moment obligations")
    assert text.startswith("(set-logic QF_NRA)")
    assert "(check-sat)" in text and "(get-model)" in text
    assert "(declare-const a0 Real)" in text
    assert "(/ " in text
