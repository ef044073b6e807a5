"""Translating programs into quantitative fixed-point equation systems.

Each translation walks the program backwards, threading a continuation
formula and accumulating one equation per loop.  Loop predicates are named
after the source span of their ``while`` keyword (``while@line:col``) and
initially range over every program variable; a final pass drops parameters
that the equations provably never read, which is what leaves the inner loop
of a guarded diverge as a nullary predicate.

Also provided are the under-approximating system transforms (scaling all
right-hand sides by a factor below one, strengthening branch guards) and the
decomposition of signed tick costs into a pair of nonnegative-cost systems.
"""

from __future__ import annotations

from fractions import Fraction

from .eqsys import (
    AffineAtom,
    BAnd,
    BNot,
    BOr,
    Branch,
    Call,
    CallTerm,
    ChoiceBody,
    Cmp,
    Const,
    EquationSystem,
    If,
    Min,
    NormalFormula,
    PredDecl,
    Scale,
    Sum,
    ZERO_ATOM,
    bexpr_cells,
    branch_alternatives,
    call,
    const,
    fif,
    fmin,
    fsum,
    scale,
)
from .errors import InputError, NotOneBounded, ScoreNotAllowed
from .handelman import PQE, prove_pqe
from .pgcl import (
    Assign,
    IfStmt,
    Nondet,
    Observe,
    PgclProgram,
    ProbChoice,
    Score,
    Seq,
    Skip,
    Tick,
    While,
    parse_pgcl,
)
from .poly import Polyhedron, Polynomial

_ONE = Polynomial.const(1)


# ---------------------------------------------------------------------------
# formula substitution (assignment rule)
# ---------------------------------------------------------------------------
def _subst_formula(f, var, e):
    if isinstance(f, Call):
        return Call(f.pred, tuple(a.substitute({var: e}) for a in f.args))
    if isinstance(f, Const):
        return Const(f.value.substitute({var: e}))
    if isinstance(f, Sum):
        return Sum(tuple(_subst_formula(p, var, e) for p in f.parts))
    if isinstance(f, Scale):
        return Scale(f.factor.substitute({var: e}), _subst_formula(f.inner, var, e))
    if isinstance(f, If):
        cond = _subst_bexpr(f.cond, var, e)
        decided = _decide_bexpr(cond)
        if decided is not None:
            return _subst_formula(f.then if decided else f.other, var, e)
        return If(
            cond,
            _subst_formula(f.then, var, e),
            _subst_formula(f.other, var, e),
        )
    if isinstance(f, Min):
        return Min(tuple(_subst_formula(p, var, e) for p in f.parts))
    raise InputError(f"cannot substitute into {f!r}")


def _subst_bexpr(b, var, e):
    if isinstance(b, Cmp):
        return Cmp(b.lhs.substitute({var: e}), b.op, b.rhs.substitute({var: e}))
    if isinstance(b, BAnd):
        return BAnd(tuple(_subst_bexpr(p, var, e) for p in b.parts))
    if isinstance(b, BOr):
        return BOr(tuple(_subst_bexpr(p, var, e) for p in b.parts))
    if isinstance(b, BNot):
        return BNot(_subst_bexpr(b.inner, var, e))
    raise InputError(f"cannot substitute into guard {b!r}")


def _decide_bexpr(b):
    """True/False once every comparison is variable-free, None otherwise.

    Assignments frequently make guards constant (e.g. an observation after the
    coin it watches has been resolved); collapsing them keeps normalization
    from juggling a conditional per resolved coin.
    """
    if isinstance(b, Cmp):
        d = b.lhs - b.rhs
        if not d.is_const():
            return None
        v = d.const_value()
        return {
            "<": v < 0, "<=": v <= 0, "=": v == 0,
            "!=": v != 0, ">=": v >= 0, ">": v > 0,
        }[b.op]
    if isinstance(b, BAnd):
        out = True
        for p in b.parts:
            r = _decide_bexpr(p)
            if r is False:
                return False
            if r is None:
                out = None
        return out
    if isinstance(b, BOr):
        out = False
        for p in b.parts:
            r = _decide_bexpr(p)
            if r is True:
                return True
            if r is None:
                out = None
        return out
    if isinstance(b, BNot):
        r = _decide_bexpr(b.inner)
        return None if r is None else not r
    return None


def _as_formula(post):
    if isinstance(post, (int, Fraction, Polynomial)):
        return const(post)
    return post


# ---------------------------------------------------------------------------
# the translator
# ---------------------------------------------------------------------------
class _Translator:
    """Single-formula modes: wp, ert, and the two conditional components."""

    def __init__(self, program, mode, cost=None, deadline=None):
        self.mode = mode
        self.cost = cost or (lambda a: a)
        self.vars = tuple(n for n, _ in program.variables)
        self.sortmap = dict(program.variables)
        self.eqs = {}
        self.ctx = []
        self.deadline = deadline

    # -- probability and score expressions must stay within [0, 1] -----------
    def _check_unit(self, p: Polynomial, what):
        if p.is_const():
            v = p.const_value()
            if not 0 <= v <= 1:
                raise TypeError(f"{what} {v} outside [0, 1]")
            return
        premise = Polyhedron(tuple(a for atoms in self.ctx for a in atoms))
        for concl in (p, _ONE - p):
            if prove_pqe(PQE(premise, concl), deadline=self.deadline) is None:
                raise TypeError(
                    f"{what} {p!r} not provably within [0, 1] under {premise!r}"
                )

    def _push_guard(self, cond, negated):
        cells = bexpr_cells(cond, self.sortmap, negated)
        self.ctx.append(cells[0] if len(cells) == 1 else [])

    def tx(self, c, F):
        if isinstance(c, Skip):
            return F
        if isinstance(c, Seq):
            return self.tx(c.first, self.tx(c.second, F))
        if isinstance(c, Assign):
            return _subst_formula(F, c.var, c.expr)
        if isinstance(c, ProbChoice):
            self._check_unit(c.prob, "probability")
            left = self.tx(c.left, F)
            right = self.tx(c.right, F)
            return fsum(scale(c.prob, left), scale(_ONE - c.prob, right))
        if isinstance(c, Nondet):
            return fmin(self.tx(c.left, F), self.tx(c.right, F))
        if isinstance(c, IfStmt):
            self._push_guard(c.cond, False)
            then = self.tx(c.then, F)
            self.ctx.pop()
            self._push_guard(c.cond, True)
            other = self.tx(c.other, F)
            self.ctx.pop()
            return fif(c.cond, then, other)
        if isinstance(c, While):
            name = f"while@{c.line}:{c.col}"
            head = call(name, *self.vars)
            self._push_guard(c.cond, False)
            body = self.tx(c.body, head)
            self.ctx.pop()
            self.eqs[name] = fif(c.cond, body, F)
            return head
        if isinstance(c, Tick):
            if self.mode != "ert":
                return F
            amount = self.cost(c.amount)
            return F if amount == 0 else fsum(F, const(amount))
        if isinstance(c, Score):
            if self.mode == "cwp1":
                self._check_unit(c.weight, "score weight")
                return scale(c.weight, F)
            if self.mode == "cwp2":
                self._check_unit(c.weight, "score weight")
                return fsum(const(_ONE - c.weight), scale(c.weight, F))
            raise ScoreNotAllowed(
                "score needs the conditional translation (use translate_cwp)"
            )
        if isinstance(c, Observe):
            if self.mode == "cwp1":
                return fif(c.cond, F, const(0))
            if self.mode == "cwp2":
                return fif(c.cond, F, const(1))
            raise ScoreNotAllowed(
                "observe needs the conditional translation (use translate_cwp)"
            )
        raise InputError(f"unknown statement {c!r}")


class _PairTranslator(_Translator):
    """Second-moment mode: continuations are (first, second moment) pairs."""

    def tx2(self, c, FF):
        F1, F2 = FF
        if isinstance(c, Skip):
            return FF
        if isinstance(c, Seq):
            return self.tx2(c.first, self.tx2(c.second, FF))
        if isinstance(c, Assign):
            return (
                _subst_formula(F1, c.var, c.expr),
                _subst_formula(F2, c.var, c.expr),
            )
        if isinstance(c, ProbChoice):
            self._check_unit(c.prob, "probability")
            l1, l2 = self.tx2(c.left, FF)
            r1, r2 = self.tx2(c.right, FF)
            q = _ONE - c.prob
            return (
                fsum(scale(c.prob, l1), scale(q, r1)),
                fsum(scale(c.prob, l2), scale(q, r2)),
            )
        if isinstance(c, Nondet):
            l1, l2 = self.tx2(c.left, FF)
            r1, r2 = self.tx2(c.right, FF)
            return fmin(l1, r1), fmin(l2, r2)
        if isinstance(c, IfStmt):
            self._push_guard(c.cond, False)
            t1, t2 = self.tx2(c.then, FF)
            self.ctx.pop()
            self._push_guard(c.cond, True)
            o1, o2 = self.tx2(c.other, FF)
            self.ctx.pop()
            return fif(c.cond, t1, o1), fif(c.cond, t2, o2)
        if isinstance(c, While):
            base = f"while@{c.line}:{c.col}"
            h1 = call(base + "#1", *self.vars)
            h2 = call(base + "#2", *self.vars)
            self._push_guard(c.cond, False)
            b1, b2 = self.tx2(c.body, (h1, h2))
            self.ctx.pop()
            self.eqs[base + "#1"] = fif(c.cond, b1, F1)
            self.eqs[base + "#2"] = fif(c.cond, b2, F2)
            return h1, h2
        if isinstance(c, Tick):
            a = self.cost(c.amount)
            if a == 0:
                return FF
            second = fsum(F2, scale(2 * a, F1), const(a * a))
            return fsum(F1, const(a)), second
        if isinstance(c, (Score, Observe)):
            raise ScoreNotAllowed(
                "score/observe need the conditional translation (use translate_cwp)"
            )
        raise InputError(f"unknown statement {c!r}")


# ---------------------------------------------------------------------------
# dropping parameters the equations never read
# ---------------------------------------------------------------------------
def minimize_parameters(system: EquationSystem, formulas=()):
    """Trim predicate parameters that no guard, weight, constant, or live call
    argument depends on; returns the rebuilt system and rewritten formulas."""
    params = {d.name: d.param_names() for d in system.decls}
    needed = {name: set() for name in params}
    changed = True
    while changed:
        changed = False
        for pred, nf in system.equations.items():
            req = set()
            for br in nf.branches:
                for ineq in br.guard.inequalities:
                    req |= set(ineq.coeffs)
                for alt in branch_alternatives(br.body):
                    req |= set(alt.const.variables)
                    for ct in alt.calls:
                        req |= set(ct.weight.variables)
                        live = needed[ct.pred]
                        for i, pn in enumerate(params[ct.pred]):
                            if pn in live:
                                req |= set(ct.args[i].variables)
            req &= set(params[pred])
            if req - needed[pred]:
                needed[pred] |= req
                changed = True
    if all(len(needed[n]) == len(params[n]) for n in params):
        return system, tuple(formulas)

    keep = {
        name: tuple(i for i, pn in enumerate(params[name]) if pn in needed[name])
        for name in params
    }

    def trim_atom(atom):
        calls = tuple(
            CallTerm(ct.pred, tuple(ct.args[i] for i in keep[ct.pred]), ct.weight)
            for ct in atom.calls
        )
        return AffineAtom(calls, atom.const)

    def trim_body(body):
        if isinstance(body, ChoiceBody):
            return ChoiceBody(tuple(trim_atom(a) for a in body.alternatives), body.mode)
        return trim_atom(body)

    equations = {
        pred: NormalFormula(
            tuple(Branch(br.guard, trim_body(br.body)) for br in nf.branches),
            nf.notes,
        )
        for pred, nf in system.equations.items()
    }
    decls = tuple(
        PredDecl(d.name, tuple(p for p in d.params if p[0] in needed[d.name]))
        for d in system.decls
    )
    out = EquationSystem(decls, equations, system.notes)
    return out, tuple(_trim_formula(f, keep) for f in formulas)


def _trim_formula(f, keep):
    if isinstance(f, Call):
        return Call(f.pred, tuple(f.args[i] for i in keep[f.pred]))
    if isinstance(f, Const):
        return f
    if isinstance(f, Sum):
        return Sum(tuple(_trim_formula(p, keep) for p in f.parts))
    if isinstance(f, Scale):
        return Scale(f.factor, _trim_formula(f.inner, keep))
    if isinstance(f, If):
        return If(f.cond, _trim_formula(f.then, keep), _trim_formula(f.other, keep))
    if isinstance(f, Min):
        return Min(tuple(_trim_formula(p, keep) for p in f.parts))
    raise InputError(f"cannot rewrite {f!r}")


# ---------------------------------------------------------------------------
# entry points
# ---------------------------------------------------------------------------
def _as_program(c) -> PgclProgram:
    return c if isinstance(c, PgclProgram) else parse_pgcl(c)


def _finish(tx, tops, deadline):
    decls = tuple(
        PredDecl(name, tuple((v, tx.sortmap[v]) for v in tx.vars)) for name in tx.eqs
    )
    system = EquationSystem.from_surface(decls, tx.eqs, deadline)
    return minimize_parameters(system, tops)


def bind_state(formula, assignment):
    """Substitute concrete values for program variables in a top formula."""
    for var, v in assignment.items():
        formula = _subst_formula(formula, var, Polynomial.const(Fraction(v)))
    return formula


def translate_wp(c, post, deadline=None):
    """Weakest preexpectation of ``post``: (formula, equation system)."""
    program = _as_program(c)
    tx = _Translator(program, "wp", deadline=deadline)
    top = tx.tx(program.body, _as_formula(post))
    system, (top,) = _finish(tx, (top,), deadline)
    return top, system


def translate_ert(c, deadline=None, cost=None):
    """Expected runtime: every tick adds its cost to the continuation."""
    program = _as_program(c)
    tx = _Translator(program, "ert", cost=cost, deadline=deadline)
    top = tx.tx(program.body, const(0))
    system, (top,) = _finish(tx, (top,), deadline)
    return top, system


def translate_rt2(c, deadline=None):
    """First and second moments of the runtime: (F1, F2, system)."""
    program = _as_program(c)
    tx = _PairTranslator(program, "ert", deadline=deadline)
    f1, f2 = tx.tx2(program.body, (const(0), const(0)))
    system, (f1, f2) = _finish(tx, (f1, f2), deadline)
    return f1, f2, system


def translate_cwp(c, post, deadline=None):
    """Conditional weakest preexpectation: ((F1, E1), (F2, E2)) whose least
    solutions are the unnormalized value and the lost normalization mass; the
    bound is assembled downstream as l1/(1-l2)."""
    program = _as_program(c)
    one = _Translator(program, "cwp1", deadline=deadline)
    f1 = one.tx(program.body, _as_formula(post))
    sys1, (f1,) = _finish(one, (f1,), deadline)
    two = _Translator(program, "cwp2", deadline=deadline)
    f2 = two.tx(program.body, const(0))
    sys2, (f2,) = _finish(two, (f2,), deadline)
    return (f1, sys1), (f2, sys2)


def split_negative_costs(c, deadline=None):
    """Decompose signed tick costs: ((F+, E+), (F-, E-)); the expected cost
    is the lfp of the first minus the lfp of the second."""
    program = _as_program(c)
    plus = translate_ert(program, deadline, cost=lambda a: max(a, 0))
    minus = translate_ert(program, deadline, cost=lambda a: max(-a, 0))
    return plus, minus


# ---------------------------------------------------------------------------
# under-approximating transforms
# ---------------------------------------------------------------------------
def gamma_scale(system: EquationSystem, gamma, deadline=None) -> EquationSystem:
    """Scale every right-hand side of a 1-bounded system by gamma in (0,1).
    The constant 1/(1-gamma) then ranks the scaled system."""
    gamma = Fraction(gamma)
    if not 0 < gamma < 1:
        raise InputError(f"scale factor {gamma} outside (0, 1)")
    for pred in system.predicates():
        for br in system.equations[pred].branches:
            for alt in branch_alternatives(br.body):
                total = alt.const
                for ct in alt.calls:
                    total = total + ct.weight
                if not total.is_const():
                    raise NotOneBounded(
                        f"{pred}: state-dependent branch weight {total!r}"
                    )
                if total.const_value() > 1:
                    raise NotOneBounded(
                        f"{pred}: branch weight {total.const_value()} exceeds 1"
                    )
    g = Polynomial.const(gamma)
    scaled = system.map_bodies(lambda a: a.scale(g))
    underapprox_audit(system, scaled, deadline)
    return scaled


def guard_strengthen(system: EquationSystem, restrictions, deadline=None):
    """Split each branch guard of the given predicates along a polyhedron:
    the part inside keeps its body, the part outside is truncated to 0."""
    equations = {}
    for pred, nf in system.equations.items():
        phi = restrictions.get(pred)
        if phi is None:
            equations[pred] = nf
            continue
        sorts = system.sorts(pred)
        branches = []
        for br in nf.branches:
            kept = br.guard.intersect(phi)
            if not kept.is_trivially_false() and kept.feasible(deadline):
                branches.append(Branch(kept, br.body))
            for cell in phi.complement_cells(sorts):
                g = br.guard.intersect(cell)
                if not g.is_trivially_false() and g.feasible(deadline):
                    branches.append(Branch(g, ZERO_ATOM))
        equations[pred] = NormalFormula(
            tuple(branches), nf.notes + ("guard strengthened",)
        )
    out = EquationSystem(system.decls, equations, system.notes)
    underapprox_audit(system, out, deadline)
    return out


def underapprox_audit(original, restricted, deadline=None):
    """Check branch-by-branch that the restricted system sits below the
    original: every restricted guard implies some original guard and the
    matched bodies never exceed the original weights."""
    for pred in restricted.predicates():
        sorts = original.sorts(pred)
        for br in restricted.equations[pred].branches:
            home = None
            for ob in original.equations[pred].branches:
                if br.guard.implies(ob.guard, sorts, deadline):
                    home = ob
                    break
            if home is None:
                raise InputError(
                    f"{pred}: restricted guard {br.guard!r} escapes the original"
                )
            alts = branch_alternatives(br.body)
            if alts == (ZERO_ATOM,):
                continue
            origs = branch_alternatives(home.body)
            if len(alts) != len(origs):
                raise InputError(f"{pred}: branch alternatives do not line up")
            for alt, orig in zip(alts, origs):
                _dominates(pred, br.guard, orig, alt, deadline)


def _dominates(pred, guard, big: AffineAtom, small: AffineAtom, deadline):
    big_calls = {(c.pred, c.args): c.weight for c in big.calls}
    pieces = [(big.const - small.const, "constant")]
    for ct in small.calls:
        w = big_calls.get((ct.pred, ct.args))
        if w is None:
            raise InputError(f"{pred}: call {ct.pred} not present in the original")
        pieces.append((w - ct.weight, f"weight of {ct.pred}"))
    for diff, what in pieces:
        if diff.is_const():
            if diff.const_value() < 0:
                raise InputError(f"{pred}: {what} increased by the restriction")
        elif prove_pqe(PQE(guard, diff), deadline=deadline) is None:
            raise InputError(
                f"{pred}: cannot show the restricted {what} stays below the original"
            )
