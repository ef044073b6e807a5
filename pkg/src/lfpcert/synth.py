"""Template-based certificate synthesis by alternating linear programs.

Witnesses are piecewise polynomials whose pieces mirror the branch guards of
the normalized system, with unknown coefficients.  All proof obligations are
linear in those coefficients once the restriction scales are fixed, and
linear in the scales once the coefficients are fixed, so synthesis alternates
two LPs:

  phase W   scales grounded, maximize the query slack over the coefficients;
  phase A   coefficients grounded, maximize the total scale mass.

Configurations that restrict by a guard refinement enumerate a small grid of
candidate half-planes read off the guard atoms (both orientations, constants
shifted by 0/1/2/4/8/16) and try each in turn, starting from the seed that
keeps the refined region and zeroes everything beyond it.

A synthesized certificate is never trusted: it is re-validated through the
ordinary checker before being reported.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from itertools import combinations, product

from .certify import (
    AltScale,
    Certificate,
    ConstraintSet,
    EPrime,
    ScaledCell,
    build_constraints,
    check_certificate,
)
from .eqsys import EquationSystem, PiecewisePoly, Query, branch_alternatives
from .errors import InputError
from .handelman import PQE, default_degree, handelman_reduce
from .poly import LinearInequality, ParamExpr, Polyhedron, Polynomial
from .simplex import Deadline, LinearProblem, solve_lp

_SLACK = "__q"
_OFFSETS = (0, 1, 2, 4, 8, 16)


@dataclass(frozen=True)
class TemplateConfig:
    name: str
    deg_u: int
    deg_r: int
    deg_eta: int
    restriction: str = "none"  # none | weights | weights+guard
    outer_split: bool = False
    handelman_deg: int | None = None
    epsilon: Fraction = Fraction(0)
    rounds: int = 8


CONFIGS = {
    "A": TemplateConfig("A", 2, 3, 2),
    "B": TemplateConfig("B", 1, 1, 1),
    "C1": TemplateConfig("C1", 1, 1, 1, restriction="weights"),
    "C2": TemplateConfig("C2", 1, 1, 1, restriction="weights+guard"),
    "C3": TemplateConfig(
        "C3", 1, 1, 1, restriction="weights+guard", outer_split=True
    ),
}


@dataclass
class SynthesisResult:
    status: str  # "valid" | "unknown"
    certificate: Certificate | None
    report: object
    config: str
    candidate: str
    rounds: int
    notes: tuple

    def summary(self) -> str:
        if self.status == "valid":
            where = f" [{self.candidate}]" if self.candidate else ""
            return f"valid (config {self.config}{where}, {self.rounds} round(s))"
        return f"unknown (config {self.config})"


# ---------------------------------------------------------------------------
# templates
# ---------------------------------------------------------------------------
def _monomial_exps(nvars: int, deg: int):
    exps = [e for e in product(range(deg + 1), repeat=nvars) if sum(e) <= deg]
    exps.sort(key=lambda e: (sum(e), e))
    return exps


def _feasible(p: Polyhedron, deadline) -> bool:
    return not p.is_trivially_false() and p.feasible(deadline)


def _refine(guard, atoms, sorts, deadline):
    """Split a guard along candidate atoms; returns (cell, all_true) pairs."""
    cells = [(guard, True)]
    for atom in atoms:
        split = []
        for g, flag in cells:
            split.append((g.intersect(Polyhedron((atom,))), flag))
            split.append((g.intersect(Polyhedron((atom.negate(sorts),))), False))
        cells = split
    return [(g, flag) for g, flag in cells if _feasible(g, deadline)]


def _template_pw(role, pred, variables, guards, deg, names):
    pieces = []
    exps = _monomial_exps(len(variables), deg)
    for pi, g in enumerate(guards):
        terms = {}
        for mi, e in enumerate(exps):
            name = f"{role}_{pred}_p{pi}_m{mi}"
            names.append(name)
            terms[e] = ParamExpr.param(name)
        pieces.append((g, Polynomial(variables, terms)))
    return PiecewisePoly(tuple(variables), tuple(pieces))


def _witness_guards(system, pred, split_atoms, deadline):
    sorts = system.sorts(pred)
    guards = []
    for br in system.equations[pred].branches:
        guards.extend(g for g, _ in _refine(br.guard, split_atoms, sorts, deadline))
    return guards


def _scale_cells(system, split, deadline):
    """Restriction cells with fresh scale parameters, plus the seed that keeps
    only the all-true side of the refinement."""
    cells = []
    names = []
    indicator = {}
    for pred in system.predicates():
        sorts = system.sorts(pred)
        atoms = split.get(pred, ())
        for bi, br in enumerate(system.equations[pred].branches):
            alts = branch_alternatives(br.body)
            for ci, (g, inside) in enumerate(_refine(br.guard, atoms, sorts, deadline)):
                scaled = []
                for ai, alt in enumerate(alts):
                    stem = f"a_{pred}_b{bi}_c{ci}_a{ai}"
                    ws = []
                    for k in range(len(alt.calls)):
                        names.append(f"{stem}_w{k}")
                        indicator[f"{stem}_w{k}"] = Fraction(1 if inside else 0)
                        ws.append(ParamExpr.param(f"{stem}_w{k}"))
                    if alt.const.is_zero():
                        t = Fraction(1)
                    else:
                        names.append(f"{stem}_t")
                        indicator[f"{stem}_t"] = Fraction(1 if inside else 0)
                        t = ParamExpr.param(f"{stem}_t")
                    scaled.append(AltScale(tuple(ws), t))
                cells.append((pred, ScaledCell(g, bi, tuple(scaled))))
    return EPrime(tuple(cells)), names, indicator


def _build_template_cert(system, config, split, deadline):
    theta = []
    u, r, eta = {}, {}, {}
    for pred in system.predicates():
        variables = system.param_names(pred)
        guards = _witness_guards(system, pred, split.get(pred, ()), deadline)
        u[pred] = _template_pw("u", pred, variables, guards, config.deg_u, theta)
        r[pred] = _template_pw("r", pred, variables, guards, config.deg_r, theta)
        eta[pred] = _template_pw("e", pred, variables, guards, config.deg_eta, theta)
    if config.restriction == "none":
        return Certificate("lower", u=u, r=r, eta=eta), theta, None, [], {}
    eprime, scale_names, indicator = _scale_cells(system, split, deadline)
    cert = Certificate("lower", u=u, r=r, eta=eta, eprime=eprime)
    return cert, theta, eprime, scale_names, indicator


# ---------------------------------------------------------------------------
# candidate guard refinements
# ---------------------------------------------------------------------------
def _grid_atoms(system):
    """Half-planes read off the guard atoms of each predicate."""
    out = []
    for pred in system.predicates():
        sorts = system.sorts(pred)
        seen = set()
        base = []
        for br in system.equations[pred].branches:
            for atom in br.guard.inequalities:
                key = atom.canonical_key()
                if key not in seen:
                    seen.add(key)
                    base.append(atom)
        cand_seen = set()
        for atom in base:
            for sign in (1, -1):
                coeffs = {v: sign * c for v, c in atom.coeffs.items()}
                for off in _OFFSETS:
                    cand = LinearInequality(
                        coeffs, sign * atom.const + off
                    ).integer_tighten(sorts)
                    if cand.is_trivial() is not None:
                        continue
                    key = cand.canonical_key()
                    if key not in cand_seen:
                        cand_seen.add(key)
                        out.append((pred, cand))
    out.sort(key=lambda pc: (pc[0], repr(pc[1])))
    return out


def _candidates(system, config):
    if config.restriction != "weights+guard":
        yield "", {}
        return
    atoms = _grid_atoms(system)
    for pred, atom in atoms:
        yield f"{pred}: {atom!r}", {pred: (atom,)}
    if config.outer_split:
        for (p1, a1), (p2, a2) in combinations(atoms, 2):
            split = {p1: (a1,)}
            if p2 == p1:
                split[p1] = (a1, a2)
            else:
                split[p2] = (a2,)
            yield f"{p1}: {a1!r} / {p2}: {a2!r}", split


# ---------------------------------------------------------------------------
# the two LP phases
# ---------------------------------------------------------------------------
def _with_slack(cset: ConstraintSet, eps: Fraction) -> ConstraintSet:
    """Subtract (eps + slack) from every query row so the LP can maximize the
    margin by which the bound is beaten."""
    margin = Polynomial.const(ParamExpr.param(_SLACK)) + Polynomial.const(eps)
    entries = []
    for pred, pqe in cset.entries:
        if pqe.label.startswith("query"):
            pqe = PQE(pqe.premise, pqe.conclusion - margin, pqe.label)
        entries.append((pred, pqe))
    return ConstraintSet(tuple(entries), cset.notes)


def _reduce_all(cset, wdeg, config, lp, deadline):
    top = 0
    for idx, (_, pqe) in enumerate(cset.entries):
        deg = config.handelman_deg or max(default_degree(pqe), wdeg)
        top = max(top, deg)
        handelman_reduce(pqe, deg, lp, prefix=f"c{idx}_")
        if deadline is not None:
            deadline.check()
    return top


def _phase_w(cset, scales, wdeg, config, deadline):
    """Ground the scales, solve for template coefficients and query slack."""
    lp = LinearProblem()
    lp.add_var(_SLACK, lo=None, hi=Fraction(1))
    used = _reduce_all(cset.grounded(scales), wdeg, config, lp, deadline)
    lp.set_objective({_SLACK: 1})
    sol = solve_lp(lp, deadline)
    if sol is None:
        return None
    return sol[_SLACK], sol, used


def _phase_a(cset, grounded_theta, scale_names, wdeg, config, deadline):
    """Ground the coefficients, pull the restriction scales back up."""
    lp = LinearProblem()
    for name in scale_names:
        lp.add_var(name, lo=Fraction(0), hi=Fraction(1))
    _reduce_all(cset.grounded(grounded_theta), wdeg, config, lp, deadline)
    lp.set_objective({name: 1 for name in scale_names})
    sol = solve_lp(lp, deadline)
    if sol is None:
        return None
    return {name: sol[name] for name in scale_names}


def _ground(sol, names):
    return {n: sol.get(n, Fraction(0)) for n in names}


# ---------------------------------------------------------------------------
# synthesis drivers
# ---------------------------------------------------------------------------
def synthesize(system, query, config=None, deadline=None) -> SynthesisResult:
    """Search for a certificate establishing the query; lower bounds alternate
    template and restriction LPs, upper bounds need a single LP."""
    config = config or CONFIGS["A"]
    if query.relation == "<=":
        return synthesize_upper(system, query, config, deadline)
    notes = []
    for desc, split in _candidates(system, config):
        cert_t, theta, _, scale_names, indicator = _build_template_cert(
            system, config, split, deadline
        )
        cset = _with_slack(
            build_constraints(system, query, cert_t, deadline=deadline),
            config.epsilon,
        )
        wdeg = max(config.deg_u, config.deg_r, config.deg_eta)
        seeds = [dict.fromkeys(scale_names, Fraction(1))]
        if indicator and any(v == 0 for v in indicator.values()):
            seeds.insert(0, indicator)
        seeds.append(dict.fromkeys(scale_names, Fraction(1, 2)))
        if not scale_names:
            seeds = seeds[:1]
        tried = set()
        for seed in seeds:
            frozen = tuple(sorted(seed.items()))
            if frozen in tried:
                continue
            tried.add(frozen)
            scales = seed
            best = None
            for rounds in range(1, config.rounds + 1):
                got = _phase_w(cset, scales, wdeg, config, deadline)
                if got is None:
                    break
                slack, sol, used_deg = got
                if slack >= 0:
                    assignment = dict(scales)
                    assignment.update(_ground(sol, theta))
                    cert = cert_t.subs_params(assignment)
                    report = check_certificate(
                        system, query, cert, handelman_degree=used_deg,
                        deadline=deadline,
                    )
                    if report.valid:
                        return SynthesisResult(
                            "valid", cert, report, config.name, desc, rounds,
                            tuple(notes),
                        )
                    notes.append(f"re-validation failed for candidate {desc!r}")
                    break
                if not scale_names:
                    break
                if best is not None and slack <= best:
                    break
                best = slack
                grounded = _ground(sol, theta)
                grounded[_SLACK] = sol[_SLACK]
                nxt = _phase_a(cset, grounded, scale_names, wdeg, config, deadline)
                if nxt is None or nxt == scales:
                    break
                scales = nxt
    return SynthesisResult(
        "unknown", None, None, config.name, "", 0, tuple(notes)
    )


def synthesize_upper(system, query, config=None, deadline=None) -> SynthesisResult:
    config = config or CONFIGS["A"]
    theta = []
    u = {}
    for pred in system.predicates():
        guards = _witness_guards(system, pred, (), deadline)
        u[pred] = _template_pw(
            "u", pred, system.param_names(pred), guards, config.deg_u, theta
        )
    cert_t = Certificate("upper", u=u)
    cset = _with_slack(
        build_constraints(system, query, cert_t, deadline=deadline), config.epsilon
    )
    lp = LinearProblem()
    lp.add_var(_SLACK, lo=None, hi=Fraction(1))
    used_deg = _reduce_all(cset, config.deg_u, config, lp, deadline)
    lp.set_objective({_SLACK: 1})
    sol = solve_lp(lp, deadline)
    if sol is not None and sol[_SLACK] >= 0:
        cert = cert_t.subs_params(_ground(sol, theta))
        report = check_certificate(
            system, query, cert, handelman_degree=used_deg, deadline=deadline
        )
        if report.valid:
            return SynthesisResult(
                "valid", cert, report, config.name, "", 1, ()
            )
    return SynthesisResult("unknown", None, None, config.name, "", 1, ())


def config_with(config: TemplateConfig, **overrides) -> TemplateConfig:
    """A copy of the configuration with some fields replaced (degree flags)."""
    return replace(config, **overrides)
