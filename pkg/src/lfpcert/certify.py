"""Checking bound certificates for least fixed points of equation systems.

A lower-bound certificate carries a restricted system (per-branch scale
factors in [0,1] on call weights and constants, optionally on refined guard
cells), a prefixed point u of the restricted system, a ranking witness r
dominating u plus the constant-free transform applied to r, and an invariant
eta below both u and its own one-step unfolding; the query bound is read off
eta through the original query formula.  An upper-bound certificate is just a
prefixed point of the original system.

Every obligation is split over the cells obtained by intersecting branch
guards with witness piece guards and their pull-backs through call arguments,
yielding premise/conclusion entailments that ``handelman-reduce`` turns into
exact rational LPs.  Witnesses with exponential pieces cannot go through the
LP route; ``check_numeric`` verifies the same cell inequalities pointwise on
a finite grid instead.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .eqsys import (
    Branch,
    ChoiceBody,
    EquationSystem,
    NormalFormula,
    PiecewisePoly,
    Query,
    atom_witness_cells,
    branch_alternatives,
    closed_formula_values,
    uncovered_cells,
)
from .errors import CertificateFormatError, InputError
from .handelman import (
    PQE,
    default_degree,
    premise_products,
    prove_pqe,
    _monomial_items,
)
from .poly import ExpPoly, ParamExpr, Polyhedron, Polynomial
from .simplex import solve_lp  # noqa: F401  (re-exported: LP entry point)


# ---------------------------------------------------------------------------
# restricted systems
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class AltScale:
    """Scale factors for one affine alternative: one per call, one for the
    constant.  All must lie in [0, 1] for the restriction to stay below the
    original system."""

    call_scales: tuple  # of Fraction | ParamExpr
    const_scale: object  # Fraction | ParamExpr


@dataclass(frozen=True)
class ScaledCell:
    """One guard cell refining original branch ``branch_index`` of a
    predicate, with scale factors per alternative."""

    guard: Polyhedron
    branch_index: int
    alts: tuple  # of AltScale


@dataclass(frozen=True)
class EPrime:
    """A system restriction: per-predicate refinement cells with scales.
    Predicates not mentioned keep their original equation."""

    cells: tuple  # of (pred, ScaledCell)

    def for_pred(self, pred):
        return [sc for p, sc in self.cells if p == pred]

    def preds(self):
        seen = []
        for p, _ in self.cells:
            if p not in seen:
                seen.append(p)
        return seen

    def scale_values(self):
        for _, sc in self.cells:
            for alt in sc.alts:
                yield from alt.call_scales
                yield alt.const_scale

    def subs_params(self, assignment) -> "EPrime":
        def sub(v):
            if isinstance(v, ParamExpr):
                v = v.subs(assignment)
                if v.is_const():
                    return v.const_value()
            return v

        return EPrime(
            tuple(
                (
                    p,
                    ScaledCell(
                        sc.guard,
                        sc.branch_index,
                        tuple(
                            AltScale(
                                tuple(sub(c) for c in a.call_scales),
                                sub(a.const_scale),
                            )
                            for a in sc.alts
                        ),
                    ),
                )
                for p, sc in self.cells
            )
        )


def _scaled_atom(atom, alt_scale: AltScale):
    if len(alt_scale.call_scales) != len(atom.calls):
        raise CertificateFormatError(
            f"scale list has {len(alt_scale.call_scales)} entries for "
            f"{len(atom.calls)} calls"
        )
    from .eqsys import AffineAtom, CallTerm

    calls = tuple(
        CallTerm(ct.pred, ct.args, ct.weight.scale(s))
        for ct, s in zip(atom.calls, alt_scale.call_scales)
        if not ct.weight.scale(s).is_zero()
    )
    return AffineAtom(calls, atom.const.scale(alt_scale.const_scale))


def apply_eprime(system: EquationSystem, eprime: EPrime, audit=False, deadline=None):
    """The restricted system; with ``audit`` also verify cells partition each
    original branch guard.  Returns (system', notes)."""
    notes = []
    equations = dict(system.equations)
    for pred in eprime.preds():
        nf = system.equations.get(pred)
        if nf is None:
            raise CertificateFormatError(f"restriction names unknown predicate {pred}")
        sorts = system.sorts(pred)
        per_branch = {}
        new_branches = []
        for sc in eprime.for_pred(pred):
            if not 0 <= sc.branch_index < len(nf.branches):
                raise CertificateFormatError(
                    f"restriction cell for {pred} names branch {sc.branch_index}; "
                    f"the equation has {len(nf.branches)}"
                )
            orig = nf.branches[sc.branch_index]
            guard = sc.guard.intersect(orig.guard)
            if guard.is_trivially_false() or not guard.feasible(deadline):
                notes.append(f"{pred}: empty restriction cell on branch {sc.branch_index}")
                continue
            alts = branch_alternatives(orig.body)
            if len(sc.alts) != len(alts):
                raise CertificateFormatError(
                    f"restriction cell for {pred} branch {sc.branch_index} has "
                    f"{len(sc.alts)} alternatives, equation has {len(alts)}"
                )
            scaled = tuple(_scaled_atom(a, s) for a, s in zip(alts, sc.alts))
            body = (
                ChoiceBody(scaled, orig.body.mode)
                if isinstance(orig.body, ChoiceBody)
                else scaled[0]
            )
            new_branches.append(Branch(guard, body))
            per_branch.setdefault(sc.branch_index, []).append(guard)
        if audit:
            for bi, br in enumerate(nf.branches):
                cells = per_branch.get(bi, [])
                for i in range(len(cells)):
                    for j in range(i + 1, len(cells)):
                        inter = cells[i].intersect(cells[j])
                        if not inter.is_trivially_false() and inter.feasible(deadline):
                            raise CertificateFormatError(
                                f"restriction cells overlap on {pred} branch {bi}"
                            )
                # leftover of the branch guard not covered by any cell
                leftover = [br.guard]
                for c in cells:
                    nxt = []
                    for cell in leftover:
                        inter = cell.intersect(c)
                        if inter.is_trivially_false() or not inter.feasible(deadline):
                            nxt.append(cell)
                            continue
                        for comp in c.complement_cells(sorts):
                            c2 = cell.intersect(comp)
                            if not c2.is_trivially_false() and c2.feasible(deadline):
                                nxt.append(c2)
                    leftover = nxt
                if leftover:
                    raise CertificateFormatError(
                        f"restriction cells do not cover {pred} branch {bi} "
                        f"(missing {leftover[0]})"
                    )
        equations[pred] = NormalFormula(tuple(new_branches), nf.notes)
    return EquationSystem(system.decls, equations, system.notes), notes


def audit_scales(eprime: EPrime):
    """Failures for concrete scales outside [0, 1]."""
    failures = []
    for s in eprime.scale_values():
        if isinstance(s, ParamExpr):
            continue  # template scales are bounded in the LP instead
        if not 0 <= s <= 1:
            failures.append(("restriction", f"scale factor {s} outside [0, 1]"))
    return failures


# ---------------------------------------------------------------------------
# certificates and constraint generation
# ---------------------------------------------------------------------------
@dataclass
class Certificate:
    direction: str  # "lower" | "upper"
    u: dict  # pred -> PiecewisePoly
    r: dict | None = None  # lower only: ranking witness
    eta: dict | None = None  # lower only: invariant carrying the bound
    eprime: EPrime | None = None  # lower only: None = original system

    def __post_init__(self):
        if self.direction not in ("lower", "upper"):
            raise CertificateFormatError(f"bad direction {self.direction!r}")
        if self.direction == "lower" and (self.r is None or self.eta is None):
            raise CertificateFormatError("lower certificates need r and eta")
        if self.direction == "upper" and not (
            self.r is None and self.eta is None and self.eprime is None
        ):
            raise CertificateFormatError(
                "upper certificates carry only the prefixed point u"
            )

    def witnesses(self):
        roles = [("u", self.u)]
        if self.r is not None:
            roles.append(("r", self.r))
        if self.eta is not None:
            roles.append(("eta", self.eta))
        return roles

    def subs_params(self, assignment) -> "Certificate":
        sub = lambda m: (
            None if m is None else {p: w.subs_params(assignment) for p, w in m.items()}
        )
        return Certificate(
            self.direction,
            sub(self.u),
            sub(self.r),
            sub(self.eta),
            None if self.eprime is None else self.eprime.subs_params(assignment),
        )


@dataclass
class ConstraintSet:
    """Entailments (pred, PQE) in a fixed deterministic order; ``pred`` is
    None for the query rows."""

    entries: tuple
    notes: tuple = ()

    def pqes(self):
        return [q for _, q in self.entries]

    def grounded(self, assignment) -> "ConstraintSet":
        return ConstraintSet(
            tuple((p, q.grounded(assignment)) for p, q in self.entries), self.notes
        )


def _feasible(p: Polyhedron, deadline) -> bool:
    return not p.is_trivially_false() and p.feasible(deadline)


def build_constraints(
    system: EquationSystem,
    query: Query,
    cert: Certificate,
    deadline=None,
    allow_exp=False,
) -> ConstraintSet:
    """All proof obligations of a certificate as premise/conclusion cells.

    Lower bounds, in order: u prefixed under the restriction, r ranks the
    constant-free restriction above u, eta below u, eta below its unfolding,
    nonnegativity of u/r/eta, the query read off eta.  Upper bounds: u
    prefixed under the original system, nonnegativity, query read off u.
    """
    lower = cert.direction == "lower"
    if (query.relation == ">=") != lower:
        raise InputError(
            f"{cert.direction} certificate cannot establish a {query.relation} query"
        )
    if lower:
        if cert.eprime is not None:
            base, ep_notes = apply_eprime(system, cert.eprime, deadline=deadline)
        else:
            base, ep_notes = system, []
    else:
        base, ep_notes = system, []
    notes = list(ep_notes)
    entries = []

    def each_alt(sys_):
        for pred in sys_.predicates():
            nf = sys_.equations[pred]
            sorts = sys_.sorts(pred)
            for bi, br in enumerate(nf.branches):
                alts = branch_alternatives(br.body)
                for ai, alt in enumerate(alts):
                    tag = f"{pred}.b{bi}" + (f".a{ai}" if len(alts) > 1 else "")
                    yield pred, sorts, br, alt, tag

    def emit(family, pred, premise, conclusion):
        if isinstance(conclusion, ExpPoly):
            if conclusion.is_polynomial():
                conclusion = conclusion.poly
            elif not allow_exp:
                raise InputError(
                    "witness has exponential pieces; use pointwise checking"
                )
        entries.append((pred, PQE(premise, conclusion, family)))

    def body_cells(pred, sorts, br, alt, witness):
        cells, dropped = atom_witness_cells(br.guard, alt, witness, sorts, deadline)
        if dropped:
            notes.append(f"{len(dropped)} empty refinement cell(s) dropped")
        return cells

    # u prefixed: u >= F[u] on every cell
    for pred, sorts, br, alt, tag in each_alt(base):
        for cell, val in body_cells(pred, sorts, br, alt, cert.u):
            for ug, up in cert.u[pred].pieces:
                prem = cell.intersect(ug)
                if _feasible(prem, deadline):
                    emit(f"prefix[{tag}]", pred, prem, up - val)

    if lower:
        # r >= u + (F with constants zeroed)[r]
        for pred, sorts, br, alt, tag in each_alt(base):
            for cell, dval in body_cells(pred, sorts, br, alt.drop_const(), cert.r):
                for rg, rp in cert.r[pred].pieces:
                    for ug, up in cert.u[pred].pieces:
                        prem = cell.intersect(rg).intersect(ug)
                        if _feasible(prem, deadline):
                            emit(f"rank[{tag}]", pred, prem, rp - up - dval)
        # eta <= u
        for pred in base.predicates():
            nf = base.equations[pred]
            for bi, br in enumerate(nf.branches):
                for eg, ep in cert.eta[pred].pieces:
                    for ug, up in cert.u[pred].pieces:
                        prem = br.guard.intersect(eg).intersect(ug)
                        if _feasible(prem, deadline):
                            emit(f"le[{pred}.b{bi}]", pred, prem, up - ep)
        # eta <= F[eta]
        for pred, sorts, br, alt, tag in each_alt(base):
            for cell, fval in body_cells(pred, sorts, br, alt, cert.eta):
                for eg, ep in cert.eta[pred].pieces:
                    prem = cell.intersect(eg)
                    if _feasible(prem, deadline):
                        emit(f"inv[{tag}]", pred, prem, fval - ep)

    # nonnegativity, split over the branch cells
    for role, wmap in cert.witnesses():
        for pred in base.predicates():
            nf = base.equations[pred]
            for bi, br in enumerate(nf.branches):
                for wg, wp in wmap[pred].pieces:
                    prem = br.guard.intersect(wg)
                    if _feasible(prem, deadline):
                        emit(f"nonneg_{role}[{pred}.b{bi}]", pred, prem, wp)

    # query, through the original formula and the bound-carrying witness
    carrier = cert.eta if lower else cert.u
    values, _mode = closed_formula_values(query.formula, system, carrier, deadline)
    for k, v in enumerate(values):
        v = Polynomial.const(v) if isinstance(v, (Fraction, ParamExpr)) else v
        conclusion = v - query.bound if lower else Polynomial.const(query.bound) - v
        tag = "query" if len(values) == 1 else f"query.a{k}"
        entries.append((None, PQE(Polyhedron.top(), conclusion, tag)))
    return ConstraintSet(tuple(entries), tuple(notes))


# ---------------------------------------------------------------------------
# checking
# ---------------------------------------------------------------------------
@dataclass
class CheckReport:
    valid: bool
    failures: tuple  # of (label, reason)
    notes: tuple
    degree: int | None = None
    checked: int = 0

    def summary(self) -> str:
        if self.valid:
            return f"valid ({self.checked} obligations, degree {self.degree})"
        head = "; ".join(f"{l}: {r}" for l, r in self.failures[:4])
        more = "" if len(self.failures) <= 4 else f" (+{len(self.failures) - 4} more)"
        return f"unknown ({head}{more})"


def _audit_witnesses(system, cert, deadline):
    failures = []
    for role, wmap in cert.witnesses():
        for pred in system.predicates():
            if pred not in wmap:
                failures.append((role, f"no witness for predicate {pred}"))
                continue
            w = wmap[pred]
            if tuple(w.variables) != tuple(system.param_names(pred)):
                failures.append(
                    (role, f"{pred}: witness over {w.variables}, expected "
                           f"{system.param_names(pred)}")
                )
                continue
            for n in w.validate(system.sorts(pred), deadline):
                failures.append((role, f"{pred}: {n}"))
    return failures


def check_certificate(
    system: EquationSystem,
    query: Query,
    cert: Certificate,
    handelman_degree: int | None = None,
    deadline=None,
) -> CheckReport:
    """Validate a concrete certificate: audit witness partitions and scales,
    then discharge every obligation with an exact LP witness."""
    failures = _audit_witnesses(system, cert, deadline)
    if cert.eprime is not None:
        failures.extend(audit_scales(cert.eprime))
        try:
            apply_eprime(system, cert.eprime, audit=True, deadline=deadline)
        except CertificateFormatError as exc:
            failures.append(("restriction", str(exc)))
    if failures:
        return CheckReport(False, tuple(failures), (), None, 0)

    cset = build_constraints(system, query, cert, deadline)
    wdeg = 0
    for _, wmap in cert.witnesses():
        for w in wmap.values():
            for _, p in w.pieces:
                wdeg = max(wdeg, p.degree())
    used = 0
    for pred, pqe in cset.entries:
        if pqe.conclusion.has_params():
            raise InputError("check_certificate needs a fully concrete certificate")
        deg = handelman_degree or max(default_degree(pqe), wdeg)
        used = max(used, deg)
        if prove_pqe(pqe, deg, deadline) is None:
            failures.append((pqe.label, f"no degree-{deg} certificate on {pqe.premise}"))
    return CheckReport(
        not failures, tuple(failures), cset.notes, used, len(cset.entries)
    )


def check_upper(system, query, cert, handelman_degree=None, deadline=None):
    if cert.direction != "upper":
        raise InputError("check_upper expects an upper certificate")
    return check_certificate(system, query, cert, handelman_degree, deadline)


# ---------------------------------------------------------------------------
# pointwise checking on a grid
# ---------------------------------------------------------------------------
@dataclass
class NumericReport:
    consistent: bool
    violations: tuple  # of (label, state, value)
    checked: int
    notes: tuple = ()

    def summary(self) -> str:
        if self.consistent:
            return f"consistent ({self.checked} point checks)"
        label, state, value = self.violations[0]
        return (
            f"violated: {label} at {state} gives {value} < 0 "
            f"({len(self.violations)} violation(s) total)"
        )


def check_numeric(
    system: EquationSystem,
    query: Query,
    cert: Certificate,
    states,
    deadline=None,
) -> NumericReport:
    """Evaluate every obligation cell exactly at the given grid points.

    ``states`` maps predicate names to lists of {var: int} assignments.  This
    checks the same inequalities as ``check_certificate`` but pointwise, so
    exponential witness pieces are fine; it is exact on the grid and silent
    about everything outside it."""
    failures = _audit_witnesses(system, cert, deadline)
    if cert.eprime is not None:
        failures.extend(audit_scales(cert.eprime))
    if failures:
        return NumericReport(False, tuple((l, {}, r) for l, r in failures), 0)

    cset = build_constraints(system, query, cert, deadline, allow_exp=True)
    violations = []
    checked = 0
    for pred, pqe in cset.entries:
        if pred is None:
            value = pqe.conclusion.evaluate({})
            checked += 1
            if value < 0:
                violations.append((pqe.label, {}, value))
            continue
        for raw in states.get(pred, ()):
            state = {v: Fraction(x) for v, x in raw.items()}
            if not pqe.premise.evaluate(state):
                continue
            value = pqe.conclusion.evaluate(state)
            checked += 1
            if value < 0:
                violations.append((pqe.label, dict(raw), value))
    return NumericReport(not violations, tuple(violations), checked, cset.notes)


def grid_states(system: EquationSystem, ranges):
    """Per-predicate integer grids from {var: (lo, hi)} inclusive ranges."""
    out = {}
    for pred in system.predicates():
        names = system.param_names(pred)
        grids = []
        for v in names:
            if v not in ranges:
                raise InputError(f"no range given for variable {v} of {pred}")
            lo, hi = ranges[v]
            grids.append(range(int(lo), int(hi) + 1))
        combos = [{}]
        for v, g in zip(names, grids):
            combos = [dict(c, **{v: x}) for c in combos for x in g]
        out[pred] = combos
    return out


# ---------------------------------------------------------------------------
# SMT-LIB export
# ---------------------------------------------------------------------------
def _smt_q(f: Fraction) -> str:
    if f < 0:
        return f"(- {_smt_q(-f)})"
    if f.denominator == 1:
        return str(f.numerator)
    return f"(/ {f.numerator} {f.denominator})"


def _smt_pexpr(c) -> str:
    if not isinstance(c, ParamExpr):
        return _smt_q(Fraction(c))
    parts = []
    for k in sorted(c.terms):
        coeff = c.terms[k]
        factors = list(k)
        if coeff != 1 or not factors:
            factors = [_smt_q(coeff)] + factors
        parts.append(factors[0] if len(factors) == 1 else f"(* {' '.join(factors)})")
    if not parts:
        return "0"
    return parts[0] if len(parts) == 1 else f"(+ {' '.join(parts)})"


def emit_smt(cset: ConstraintSet, degree: int, scale_params=(), comment="") -> str:
    """A quantifier-free nonlinear-arithmetic script asserting all multiplier
    equalities; products of scale and template parameters stay symbolic, so
    the script covers instances the LP alternation cannot."""
    params = set()
    for _, pqe in cset.entries:
        params |= pqe.conclusion.params()
    lines = ["(set-logic QF_NRA)"]
    if comment:
        lines.append(f"; {comment}")
    for p in sorted(params):
        lines.append(f"(declare-const {p} Real)")
    for a in sorted(scale_params):
        if a not in params:
            lines.append(f"(declare-const {a} Real)")
        lines.append(f"(assert (and (>= {a} 0) (<= {a} 1)))")
    for i, (_, pqe) in enumerate(cset.entries):
        lines.append(f"; {pqe.label}")
        prods = premise_products(pqe.premise, degree)
        lams = []
        for k in range(len(prods)):
            nm = f"c{i}_l{k}"
            lams.append(nm)
            lines.append(f"(declare-const {nm} Real)")
            lines.append(f"(assert (>= {nm} 0))")
        table = {}
        for key, c in _monomial_items(pqe.conclusion):
            entry = table.setdefault(key, [None, []])
            entry[0] = c if entry[0] is None else entry[0] + c
        for nm, (_, p) in zip(lams, prods):
            for key, c in _monomial_items(p):
                entry = table.setdefault(key, [None, []])
                entry[1].append((nm, c))
        for key in sorted(table):
            conc, contrib = table[key]
            lhs = _smt_pexpr(conc if conc is not None else Fraction(0))
            terms = [
                nm if c == 1 else f"(* {_smt_q(c)} {nm})" for nm, c in contrib
            ]
            rhs = "0" if not terms else (terms[0] if len(terms) == 1 else f"(+ {' '.join(terms)})")
            lines.append(f"(assert (= {lhs} {rhs}))")
    lines.append("(check-sat)")
    lines.append("(get-model)")
    return "\n".join(lines) + "\n"
