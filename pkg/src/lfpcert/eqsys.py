"""Systems of quantitative equations over the nonnegative extended reals.

An equation defines one predicate ``X(x1, ..., xn)`` as the least fixed point
of a formula built from calls, nonnegative constants, sums, nonnegative
scalings, guarded branches and demonic (min) choice.  ``normalize`` flattens a
surface formula into a guarded normal form: a list of branches with pairwise
disjoint polyhedral guards that jointly cover the whole state space, each
carrying a single affine body (or a min over affine bodies).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import reduce

from .errors import InputError, NonLinearPullback
from .poly import LinearInequality, ParamExpr, Polyhedron, Polynomial
from .xreal import xadd, xmax, xmin, xmul


# ---------------------------------------------------------------------------
# surface formulas and boolean guards
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class Call:
    pred: str
    args: tuple  # of Polynomial


@dataclass(frozen=True)
class Const:
    value: Polynomial


@dataclass(frozen=True)
class Sum:
    parts: tuple


@dataclass(frozen=True)
class Scale:
    factor: Polynomial
    inner: object


@dataclass(frozen=True)
class If:
    cond: object
    then: object
    other: object


@dataclass(frozen=True)
class Min:
    parts: tuple


@dataclass(frozen=True)
class Cmp:
    lhs: Polynomial
    op: str  # <, <=, =, !=, >=, >
    rhs: Polynomial


@dataclass(frozen=True)
class BAnd:
    parts: tuple


@dataclass(frozen=True)
class BOr:
    parts: tuple


@dataclass(frozen=True)
class BNot:
    inner: object


TRUE = BAnd(())
FALSE = BOr(())

_CMP_OPS = ("<", "<=", "=", "!=", ">=", ">")
_OPPOSITE = {">=": "<", ">": "<=", "<=": ">", "<": ">=", "=": "!=", "!=": "="}


def _as_polynomial(x) -> Polynomial:
    if isinstance(x, Polynomial):
        return x
    if isinstance(x, ParamExpr):
        return Polynomial.const(x)
    if isinstance(x, str):
        return Polynomial.var(x)
    return Polynomial.const(Fraction(x))


# convenience constructors, used heavily by the frontend and tests
def call(pred, *args):
    return Call(pred, tuple(_as_polynomial(a) for a in args))


def const(v):
    return Const(_as_polynomial(v))


def fsum(*parts):
    flat = []
    for p in parts:
        flat.extend(p.parts if isinstance(p, Sum) else (p,))
    return flat[0] if len(flat) == 1 else Sum(tuple(flat))


def scale(t, f):
    return Scale(_as_polynomial(t), f)


def fif(cond, then, other):
    return If(cond, then, other)


def fmin(*parts):
    flat = []
    for p in parts:
        flat.extend(p.parts if isinstance(p, Min) else (p,))
    return flat[0] if len(flat) == 1 else Min(tuple(flat))


def cmp(lhs, op, rhs):
    if op not in _CMP_OPS:
        raise InputError(f"unknown comparison operator {op!r}")
    return Cmp(_as_polynomial(lhs), op, _as_polynomial(rhs))


def band(*parts):
    return BAnd(tuple(parts))


def bor(*parts):
    return BOr(tuple(parts))


def bnot(b):
    return BNot(b)


def bexpr_cells(b, sorts, negated=False):
    """DNF of a guard as a list of cells, each a list of closed/strict atoms.

    Cells of one guard may overlap; disjointness is restored later by the
    branch-priority pass in ``normalize``.
    """
    if isinstance(b, BNot):
        return bexpr_cells(b.inner, sorts, not negated)
    if (isinstance(b, BAnd) and negated) or (isinstance(b, BOr) and not negated):
        cells = []
        for p in b.parts:
            cells.extend(bexpr_cells(p, sorts, negated))
        return cells
    if isinstance(b, (BAnd, BOr)):
        acc = [[]]
        for p in b.parts:
            acc = [c1 + c2 for c1 in acc for c2 in bexpr_cells(p, sorts, negated)]
        return acc
    if not isinstance(b, Cmp):
        raise InputError(f"not a guard expression: {b!r}")
    op = _OPPOSITE[b.op] if negated else b.op
    d = b.lhs - b.rhs

    def atom(p, strict):
        return LinearInequality.from_poly(p, strict, sorts)

    if op == ">=":
        return [[atom(d, False)]]
    if op == ">":
        return [[atom(d, True)]]
    if op == "<=":
        return [[atom(-d, False)]]
    if op == "<":
        return [[atom(-d, True)]]
    if op == "=":
        return [[atom(d, False), atom(-d, False)]]
    return [[atom(d, True)], [atom(-d, True)]]  # !=


# ---------------------------------------------------------------------------
# normal form
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class CallTerm:
    pred: str
    args: tuple  # of Polynomial
    weight: Polynomial


@dataclass(frozen=True)
class AffineAtom:
    """weight_1 * X_1(args_1) + ... + weight_k * X_k(args_k) + const."""

    calls: tuple  # of CallTerm
    const: Polynomial

    def add(self, other: "AffineAtom") -> "AffineAtom":
        merged = {}
        order = []
        for ct in self.calls + other.calls:
            key = (ct.pred, ct.args)
            if key in merged:
                merged[key] = merged[key] + ct.weight
            else:
                merged[key] = ct.weight
                order.append(key)
        calls = tuple(
            CallTerm(pred, args, merged[(pred, args)])
            for pred, args in order
            if not merged[(pred, args)].is_zero()
        )
        return AffineAtom(calls, self.const + other.const)

    def scale(self, t: Polynomial) -> "AffineAtom":
        if t.is_zero():
            return AffineAtom((), Polynomial.zero())
        calls = tuple(
            CallTerm(ct.pred, ct.args, ct.weight * t) for ct in self.calls
        )
        return AffineAtom(calls, self.const * t)

    def drop_const(self) -> "AffineAtom":
        return AffineAtom(self.calls, Polynomial.zero())


ZERO_ATOM = AffineAtom((), Polynomial.zero())


@dataclass(frozen=True)
class ChoiceBody:
    """Demonic min (or, after max_transform, max) over affine alternatives."""

    alternatives: tuple  # of AffineAtom
    mode: str = "min"


def branch_alternatives(body):
    """The affine alternatives of a branch body, as a tuple."""
    if isinstance(body, ChoiceBody):
        return body.alternatives
    return (body,)


@dataclass(frozen=True)
class Branch:
    guard: Polyhedron
    body: object  # AffineAtom | ChoiceBody


@dataclass(frozen=True)
class NormalFormula:
    branches: tuple  # of Branch
    notes: tuple = ()

    def evaluate(self, state, lookup):
        """Value at ``state`` (dict var -> Fraction) where ``lookup(pred,
        argvals)`` supplies the current interpretation of the predicates."""
        for br in self.branches:
            if br.guard.evaluate(state):
                return _body_value(br.body, state, lookup)
        raise InputError(f"no branch covers state {state}")

    def has_choice(self) -> bool:
        return any(isinstance(br.body, ChoiceBody) for br in self.branches)

    def map_bodies(self, fn) -> "NormalFormula":
        out = []
        for br in self.branches:
            if isinstance(br.body, ChoiceBody):
                body = ChoiceBody(
                    tuple(fn(a) for a in br.body.alternatives), br.body.mode
                )
            else:
                body = fn(br.body)
            out.append(Branch(br.guard, body))
        return NormalFormula(tuple(out), self.notes)

    def validate_partition(self, sorts, deadline=None):
        """Audit notes for overlapping or non-covering guards (empty = OK)."""
        notes = []
        guards = [br.guard for br in self.branches]
        for i in range(len(guards)):
            for j in range(i + 1, len(guards)):
                inter = guards[i].intersect(guards[j])
                if not inter.is_trivially_false() and inter.feasible(deadline):
                    notes.append(f"branches {i} and {j} overlap on {inter}")
        for cell in uncovered_cells(guards, sorts, deadline):
            notes.append(f"no branch covers {cell}")
        return notes


def _num(x, what="coefficient"):
    if isinstance(x, ParamExpr):
        if x.is_const():
            return x.const_value()
        raise InputError(f"template parameters in numeric {what}: {x}")
    return x


def _atom_value(atom: AffineAtom, state, lookup):
    acc = _num(atom.const.evaluate(state), "constant")
    for ct in atom.calls:
        w = _num(ct.weight.evaluate(state), "weight")
        argv = tuple(_num(a.evaluate(state), "argument") for a in ct.args)
        acc = xadd(acc, xmul(w, lookup(ct.pred, argv)))
    return acc


def _body_value(body, state, lookup):
    if isinstance(body, ChoiceBody):
        vals = [_atom_value(a, state, lookup) for a in body.alternatives]
        return reduce(xmin if body.mode == "min" else xmax, vals)
    return _atom_value(body, state, lookup)


# -- surface -> branches -----------------------------------------------------
def _as_choice(body):
    if isinstance(body, ChoiceBody):
        return body
    return ChoiceBody((body,), "min")


def _collapse(body):
    if isinstance(body, ChoiceBody):
        seen = []
        for a in body.alternatives:
            if a not in seen:
                seen.append(a)
        if len(seen) == 1:
            return seen[0]
        return ChoiceBody(tuple(seen), body.mode)
    return body


def _body_add(a, b):
    if isinstance(a, ChoiceBody) or isinstance(b, ChoiceBody):
        # min distributes over + of a second summand:
        #   min{f, g} + min{h, k} = min{f+h, f+k, g+h, g+k}
        alts = tuple(
            x.add(y)
            for x in branch_alternatives(a)
            for y in branch_alternatives(b)
        )
        return _collapse(ChoiceBody(alts, "min"))
    return a.add(b)


def _body_scale(body, t):
    if isinstance(body, ChoiceBody):
        # t >= 0, so t * min{...} = min{t * ...}
        return _collapse(
            ChoiceBody(tuple(a.scale(t) for a in body.alternatives), body.mode)
        )
    return body.scale(t)


def _formula_branches(f, sorts):
    """Branches as (atom_list, body) pairs; guards may overlap."""
    if isinstance(f, Call):
        return [([], AffineAtom((CallTerm(f.pred, f.args, Polynomial.const(1)),), Polynomial.zero()))]
    if isinstance(f, Const):
        return [([], AffineAtom((), f.value))]
    if isinstance(f, Sum):
        acc = [([], ZERO_ATOM)]
        for part in f.parts:
            pb = _formula_branches(part, sorts)
            acc = [
                (g1 + g2, _body_add(b1, b2)) for g1, b1 in acc for g2, b2 in pb
            ]
        return acc
    if isinstance(f, Scale):
        return [
            (g, _body_scale(b, f.factor))
            for g, b in _formula_branches(f.inner, sorts)
        ]
    if isinstance(f, If):
        out = []
        for cell in bexpr_cells(f.cond, sorts):
            for g, b in _formula_branches(f.then, sorts):
                out.append((cell + g, b))
        for cell in bexpr_cells(f.cond, sorts, negated=True):
            for g, b in _formula_branches(f.other, sorts):
                out.append((cell + g, b))
        return out
    if isinstance(f, Min):
        acc = None
        for part in f.parts:
            pb = [(g, _as_choice(b)) for g, b in _formula_branches(part, sorts)]
            if acc is None:
                acc = pb
            else:
                acc = [
                    (g1 + g2, ChoiceBody(c1.alternatives + c2.alternatives, "min"))
                    for g1, c1 in acc
                    for g2, c2 in pb
                ]
        return [(g, _collapse(c)) for g, c in acc]
    raise InputError(f"not a formula: {f!r}")


def uncovered_cells(guards, sorts, deadline=None):
    """Disjoint feasible cells of the complement of the union of ``guards``."""
    leftover = [Polyhedron.top()]
    for g in guards:
        nxt = []
        for c in leftover:
            inter = c.intersect(g)
            if inter.is_trivially_false() or not inter.feasible(deadline):
                nxt.append(c)
                continue
            for comp in g.complement_cells(sorts):
                c2 = c.intersect(comp)
                if not c2.is_trivially_false() and c2.feasible(deadline):
                    nxt.append(c2)
        leftover = nxt
        if not leftover:
            break
    return leftover


def normalize(formula, sorts, deadline=None) -> NormalFormula:
    """Flatten to disjoint, covering guarded branches.

    Later branches are restricted to the complement of earlier guards
    (branch-priority disjointification); any region left uncovered gets an
    explicit zero branch, recorded in ``notes``.
    """
    notes = []
    disjoint = []
    for atoms, body in _formula_branches(formula, sorts):
        g = Polyhedron(tuple(atoms))
        if g.is_trivially_false() or not g.feasible(deadline):
            notes.append(f"pruned branch with empty guard {g}")
            continue
        cells = [g]
        for prev, _ in disjoint:
            nxt = []
            for c in cells:
                inter = c.intersect(prev)
                if inter.is_trivially_false() or not inter.feasible(deadline):
                    nxt.append(c)
                    continue
                for comp in prev.complement_cells(sorts):
                    c2 = c.intersect(comp)
                    if not c2.is_trivially_false() and c2.feasible(deadline):
                        nxt.append(c2)
            cells = nxt
            if not cells:
                break
        if not cells:
            notes.append(f"branch with guard {g} shadowed by earlier branches")
        disjoint.extend((c, body) for c in cells)
    for cell in uncovered_cells([g for g, _ in disjoint], sorts, deadline):
        notes.append(f"coverage gap filled with 0 on {cell}")
        disjoint.append((cell, ZERO_ATOM))
    return NormalFormula(
        tuple(Branch(g, b) for g, b in disjoint), tuple(notes)
    )


# ---------------------------------------------------------------------------
# systems
# ---------------------------------------------------------------------------
SORTS = ("int", "real")


@dataclass(frozen=True)
class PredDecl:
    name: str
    params: tuple  # of (var, sort) pairs

    def param_names(self):
        return tuple(v for v, _ in self.params)

    def sorts(self):
        return {v: s for v, s in self.params}


class EquationSystem:
    """Declared predicates plus one normalized defining formula each."""

    def __init__(self, decls, equations, notes=()):
        self.decls = tuple(decls)
        self._by_name = {}
        for d in self.decls:
            if d.name in self._by_name:
                raise InputError(f"duplicate predicate {d.name}")
            for v, s in d.params:
                if s not in SORTS:
                    raise InputError(f"unknown sort {s!r} for {d.name}({v})")
            self._by_name[d.name] = d
        self.equations = dict(equations)
        missing = [d.name for d in self.decls if d.name not in self.equations]
        extra = [n for n in self.equations if n not in self._by_name]
        if missing or extra:
            raise InputError(
                f"equations do not match declarations (missing {missing}, unknown {extra})"
            )
        self.notes = tuple(notes)
        self._check_wellformed()

    @staticmethod
    def from_surface(decls, formulas, deadline=None) -> "EquationSystem":
        eqs = {}
        notes = []
        for d in decls:
            if d.name not in formulas:
                raise InputError(f"no defining formula for {d.name}")
            nf = normalize(formulas[d.name], d.sorts(), deadline)
            notes.extend(f"{d.name}: {n}" for n in nf.notes)
            eqs[d.name] = nf
        return EquationSystem(decls, eqs, tuple(notes))

    def __eq__(self, other):
        if not isinstance(other, EquationSystem):
            return NotImplemented
        return self.decls == other.decls and self.equations == other.equations

    __hash__ = None

    # -- accessors -------------------------------------------------------
    def predicates(self):
        return [d.name for d in self.decls]

    def decl(self, name) -> PredDecl:
        try:
            return self._by_name[name]
        except KeyError:
            raise InputError(f"unknown predicate {name}") from None

    def param_names(self, name):
        return self.decl(name).param_names()

    def sorts(self, name):
        return self.decl(name).sorts()

    def has_choice(self) -> bool:
        return any(nf.has_choice() for nf in self.equations.values())

    def evaluate(self, pred, state, lookup):
        return self.equations[pred].evaluate(state, lookup)

    def map_bodies(self, fn) -> "EquationSystem":
        return EquationSystem(
            self.decls,
            {n: nf.map_bodies(fn) for n, nf in self.equations.items()},
            self.notes,
        )

    # -- validation ------------------------------------------------------
    def _check_wellformed(self):
        for name, nf in self.equations.items():
            own = set(self.param_names(name))
            sorts = self.sorts(name)
            for br in nf.branches:
                used = set(br.guard.variables())
                for alt in branch_alternatives(br.body):
                    used |= set(alt.const.variables)
                    for ct in alt.calls:
                        used |= set(ct.weight.variables)
                        callee = self.decl(ct.pred)
                        if len(ct.args) != len(callee.params):
                            raise InputError(
                                f"{name}: call to {ct.pred} has {len(ct.args)} "
                                f"arguments, expected {len(callee.params)}"
                            )
                        for arg, (pv, ps) in zip(ct.args, callee.params):
                            used |= set(arg.variables)
                            if ps == "int":
                                _check_int_valued(arg, sorts, name, ct.pred, pv)
                free = used - own
                if free:
                    raise InputError(
                        f"{name}: unbound variables {sorted(free)} "
                        f"(parameters are {sorted(own)})"
                    )


def _check_int_valued(arg: Polynomial, sorts, caller, callee, param):
    """Integer-sorted parameters require an argument that is integer-valued on
    integer inputs; integer coefficients over int variables guarantee that."""
    ok = not arg.has_params()
    if ok:
        for e, c in arg.monomials():
            if c.denominator != 1:
                ok = False
            for i, k in enumerate(e):
                if k and sorts.get(arg.variables[i]) != "int":
                    ok = False
    if not ok:
        raise InputError(
            f"{caller}: argument {arg} for int parameter {param} of {callee} "
            "is not integer-valued"
        )


# -- transforms ---------------------------------------------------------
def d_transform(system: EquationSystem) -> EquationSystem:
    """Zero every constant, keeping call weights: the difference operator
    K(eta) - K(0), applied inside each min alternative as well."""
    return system.map_bodies(lambda a: a.drop_const())


def max_transform(system: EquationSystem) -> EquationSystem:
    """Replace demonic min choices by angelic max over the same alternatives."""

    def flip(nf: NormalFormula) -> NormalFormula:
        out = []
        for br in nf.branches:
            body = br.body
            if isinstance(body, ChoiceBody):
                body = ChoiceBody(body.alternatives, "max")
            out.append(Branch(br.guard, body))
        return NormalFormula(tuple(out), nf.notes)

    return EquationSystem(
        system.decls,
        {n: flip(nf) for n, nf in system.equations.items()},
        system.notes,
    )


def check_nonneg_weights(system: EquationSystem, deadline=None):
    """Audit notes for weights/constants not verifiably nonnegative on their
    guard (empty list = all verified)."""
    notes = []
    for name in system.predicates():
        nf = system.equations[name]
        sorts = system.sorts(name)
        for bi, br in enumerate(nf.branches):
            for alt in branch_alternatives(br.body):
                items = [(alt.const, "constant")]
                items.extend(
                    (ct.weight, f"weight of {ct.pred}") for ct in alt.calls
                )
                for poly, what in items:
                    note = _nonneg_note(poly, br.guard, sorts, deadline)
                    if note:
                        notes.append(f"{name} branch {bi}: {what} {poly} {note}")
    return notes


def _nonneg_note(poly: Polynomial, guard: Polyhedron, sorts, deadline):
    if poly.has_params():
        return "contains template parameters (checked after instantiation)"
    if poly.is_const():
        return None if poly.const_value() >= 0 else "is negative"
    if poly.degree() <= 1:
        neg = LinearInequality.from_poly(-poly, strict=True, sorts=sorts)
        if guard.intersect(Polyhedron((neg,))).feasible(deadline):
            return "can be negative on the branch guard"
        return None
    return f"has degree {poly.degree()}; nonnegativity not verified"


# ---------------------------------------------------------------------------
# piecewise polynomials and witness substitution
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class PiecewisePoly:
    """Finitely many (guard, polynomial) pieces over the named variables;
    guards should partition the state space."""

    variables: tuple
    pieces: tuple  # of (Polyhedron, Polynomial)

    @staticmethod
    def constant(variables, value) -> "PiecewisePoly":
        return PiecewisePoly(
            tuple(variables), ((Polyhedron.top(), _as_polynomial(value)),)
        )

    def evaluate(self, state):
        for g, p in self.pieces:
            if g.evaluate(state):
                return p.evaluate(state)
        raise InputError(f"no piece covers state {state}")

    def has_params(self) -> bool:
        return any(p.has_params() for _, p in self.pieces)

    def params(self):
        out = set()
        for _, p in self.pieces:
            out |= p.params()
        return out

    def subs_params(self, assignment) -> "PiecewisePoly":
        return PiecewisePoly(
            self.variables,
            tuple((g, p.subs_params(assignment)) for g, p in self.pieces),
        )

    def validate(self, sorts, deadline=None):
        notes = []
        for i in range(len(self.pieces)):
            for j in range(i + 1, len(self.pieces)):
                inter = self.pieces[i][0].intersect(self.pieces[j][0])
                if not inter.is_trivially_false() and inter.feasible(deadline):
                    notes.append(f"pieces {i} and {j} overlap on {inter}")
        for cell in uncovered_cells([g for g, _ in self.pieces], sorts, deadline):
            notes.append(f"no piece covers {cell}")
        return notes


def pull_back_piece(guard: Polyhedron, value: Polynomial, param_names, args, sorts):
    """Substitute call arguments into one witness piece: the piece guard and
    value, both over the callee's parameters, become a polyhedron and value
    over the caller's variables."""
    mapping = dict(zip(param_names, args))
    atoms = []
    for q in guard.inequalities:
        p2 = q.as_poly().substitute(mapping)
        if p2.has_params() or p2.degree() > 1:
            raise NonLinearPullback(
                f"guard atom {q} becomes nonlinear under argument substitution "
                f"{tuple(args)}"
            )
        atoms.append(LinearInequality.from_poly(p2, q.strict, sorts))
    return Polyhedron(tuple(atoms)), value.substitute(mapping)


def atom_witness_cells(guard, atom: AffineAtom, witness, sorts, deadline=None):
    """Substitute witnesses into one affine body under one branch guard.

    Returns (cells, dropped): ``cells`` are disjoint (refined_guard, poly)
    pairs covering the feasible part of ``guard``; ``dropped`` lists the
    infeasible refinements that were discarded.
    """
    cells = [(guard, atom.const)]
    dropped = []
    for ct in atom.calls:
        w = witness[ct.pred]
        pulled = [
            pull_back_piece(pg, pv, w.variables, ct.args, sorts)
            for pg, pv in w.pieces
        ]
        nxt = []
        for g, val in cells:
            for pg, pv in pulled:
                g2 = g.intersect(pg)
                if g2.is_trivially_false() or not g2.feasible(deadline):
                    dropped.append(g2)
                    continue
                nxt.append((g2, val + ct.weight * pv))
        cells = nxt
    return cells, dropped


def substitute_witness(system: EquationSystem, witness, deadline=None):
    """F_i[w/X] for every equation, as piecewise polynomials.

    ``witness`` maps predicate names to PiecewisePoly.  Raises on min choices:
    a min of polynomials is not a polynomial, so nondeterministic bodies must
    be handled alternative by alternative (see ``atom_witness_cells``).
    """
    for name in system.predicates():
        if name not in witness:
            raise InputError(f"witness missing predicate {name}")
        w = witness[name]
        if tuple(w.variables) != tuple(system.param_names(name)):
            raise InputError(
                f"witness for {name} is over {w.variables}, "
                f"expected {system.param_names(name)}"
            )
    out = {}
    for name in system.predicates():
        nf = system.equations[name]
        sorts = system.sorts(name)
        pieces = []
        for br in nf.branches:
            if isinstance(br.body, ChoiceBody):
                raise InputError(
                    "substitute_witness does not apply to min/max choices; "
                    "treat each alternative separately"
                )
            cells, _ = atom_witness_cells(br.guard, br.body, witness, sorts, deadline)
            pieces.extend(cells)
        out[name] = PiecewisePoly(system.param_names(name), tuple(pieces))
    return out


# ---------------------------------------------------------------------------
# queries
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class Query:
    """A closed formula compared against a rational bound."""

    formula: object
    relation: str  # ">=" (lower bound) or "<=" (upper bound)
    bound: Fraction

    def __post_init__(self):
        if self.relation not in (">=", "<="):
            raise InputError(f"query relation must be >= or <=, got {self.relation!r}")


@dataclass(frozen=True)
class QueriedEquationSystem:
    system: EquationSystem
    query: Query


def witness_value_at(w: PiecewisePoly, state):
    """Value of a witness at a concrete state; Fraction or ParamExpr."""
    for g, p in w.pieces:
        if g.evaluate(state):
            return p.evaluate(state)
    raise InputError(f"witness has no piece covering {state}")


def closed_formula_values(formula, system: EquationSystem, witness, deadline=None):
    """Substitute witnesses into a closed formula.

    Returns (values, mode): one value per nondeterministic alternative of the
    branch selected by the (constant) guards, and "min"/"max"/None.  Values
    are Fractions, or ParamExpr while templates are still symbolic.
    """
    nf = normalize(formula, {}, deadline)
    chosen = None
    for br in nf.branches:
        if br.guard.variables():
            raise InputError("query formula must be closed")
        if br.guard.evaluate({}):
            chosen = br
            break
    if chosen is None:
        raise InputError("query formula has no applicable branch")
    mode = chosen.body.mode if isinstance(chosen.body, ChoiceBody) else None
    values = []
    for alt in branch_alternatives(chosen.body):
        if alt.const.variables:
            raise InputError("query formula must be closed")
        val = alt.const.evaluate({})
        for ct in alt.calls:
            if ct.weight.variables or any(a.variables for a in ct.args):
                raise InputError("query formula must be closed")
            argv = dict(
                zip(system.param_names(ct.pred), (a.evaluate({}) for a in ct.args))
            )
            wval = witness_value_at(witness[ct.pred], argv)
            weight = ct.weight.evaluate({})
            val = val + weight * wval
        values.append(val)
    return values, mode
