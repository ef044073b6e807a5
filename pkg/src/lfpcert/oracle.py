"""Ground truth by exact value iteration on truncated integer grids.

The equation operator is applied in rational arithmetic, either from the zero
expectation upwards or from a supplied prefixed point downwards, with a
declared policy for calls that step outside the grid.  Iterating from below
under the absorb-0 policy under-approximates the least fixed point; iterating
from a prefixed point with the boundary pinned to it over-approximates the
limit from above.  A small seeded simulator cross-checks program-level values
independently of the equation pipeline.
"""

from __future__ import annotations

import csv
import random
from dataclasses import dataclass
from fractions import Fraction

from .certify import grid_states
from .eqsys import EquationSystem, PiecewisePoly, d_transform
from .errors import InputError, NotPrefixed, PolicyRequired, ScoreNotAllowed
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
from .eqsys import BAnd, BNot, BOr, Cmp
from .xreal import INF, is_inf, xle, xmax, xsub

ABSORB_ZERO = ("absorb", Fraction(0))
ABSORB_INF = ("absorb", INF)


@dataclass(frozen=True)
class TruncationSpec:
    """Integer grid bounds {var: (lo, hi)} plus the out-of-range policy.

    The policy is one of
      "auto"            pick the direction default (absorb 0 going up,
                        pin to the supplied witness going down),
      None              refuse: any call leaving the grid raises,
      ("absorb", v)     constant v (0 or the infinite element),
      ("default", v)    constant v (any rational),
      ("witness",)      evaluate the start witness outside the grid,
    or a {predicate: policy} mapping of the above.
    """

    bounds: object
    policy: object = "auto"

    def __post_init__(self):
        for v, (lo, hi) in dict(self.bounds).items():
            if lo > hi:
                raise InputError(f"empty range for {v}: [{lo}, {hi}]")

    def policy_for(self, pred):
        if isinstance(self.policy, dict):
            return self.policy.get(pred, "auto")
        return self.policy


@dataclass
class IterationResult:
    direction: str  # "from-bottom" | "from-u"
    iterations: int
    values: dict  # pred -> {arg tuple: Fraction | INF}
    residual: object
    history: list | None = None  # optional snapshots, entry 0 = start


def _state_key(names, state):
    return tuple(Fraction(state[v]) for v in names)


def _in_bounds(bounds, names, argv):
    for v, a in zip(names, argv):
        lo, hi = bounds[v]
        if not (lo <= a <= hi):
            return False
    return True


def _make_lookup(system, spec, values, direction, witness):
    names = {p: system.param_names(p) for p in system.predicates()}

    def lookup(pred, argv):
        if _in_bounds(spec.bounds, names[pred], argv):
            return values[pred][argv]
        pol = spec.policy_for(pred)
        if pol == "auto":
            pol = ("absorb", Fraction(0)) if direction == "from-bottom" else ("witness",)
        if pol is None:
            raise PolicyRequired(
                f"call {pred}{argv} leaves the grid and no policy is set"
            )
        if pol[0] in ("absorb", "default"):
            return pol[1]
        if pol[0] == "witness":
            if witness is None:
                raise PolicyRequired(
                    f"witness policy for {pred} needs iteration started from u"
                )
            state = dict(zip(names[pred], argv))
            return witness[pred].evaluate(state)
        raise InputError(f"unknown grid policy {pol!r}")

    return lookup


def _as_witness_map(system, u):
    if isinstance(u, PiecewisePoly):
        preds = system.predicates()
        if len(preds) != 1:
            raise InputError("a bare witness needs a single-predicate system")
        return {preds[0]: u}
    return dict(u)


def _initial_values(system, grids, start):
    values = {}
    witness = None
    if start == "bottom":
        for pred, states in grids.items():
            names = system.param_names(pred)
            values[pred] = {_state_key(names, s): Fraction(0) for s in states}
        return values, witness, "from-bottom"
    witness = _as_witness_map(system, start)
    for pred, states in grids.items():
        names = system.param_names(pred)
        values[pred] = {
            _state_key(names, s): witness[pred].evaluate(s) for s in states
        }
    return values, witness, "from-u"


def _sweep(system, grids, lookup):
    out = {}
    for pred, states in grids.items():
        names = system.param_names(pred)
        nf = system.equations[pred]
        out[pred] = {
            _state_key(names, s): nf.evaluate(s, lookup) for s in states
        }
    return out


def _residual(old, new):
    worst = Fraction(0)
    for pred, table in new.items():
        for key, v in table.items():
            o = old[pred][key]
            worst = xmax(worst, xmax(xsub(v, o), xsub(o, v)))
    return worst


def kleene_iterate(
    system: EquationSystem,
    spec: TruncationSpec,
    start="bottom",
    max_iters=10000,
    tol=Fraction(0),
    deadline=None,
    keep_history=False,
) -> IterationResult:
    """Iterate the equation operator on the grid until the pointwise change
    drops to ``tol`` or ``max_iters`` sweeps have run."""
    grids = grid_states(system, spec.bounds)
    values, witness, direction = _initial_values(system, grids, start)
    history = [values] if keep_history else None
    residual = INF
    n = 0
    while n < max_iters:
        if deadline is not None:
            deadline.check()
        lookup = _make_lookup(system, spec, values, direction, witness)
        new = _sweep(system, grids, lookup)
        n += 1
        residual = _residual(values, new)
        values = new
        if keep_history:
            history.append(values)
        if xle(residual, tol):
            break
    return IterationResult(direction, n, values, residual, history)


@dataclass
class BracketResult:
    lower: IterationResult
    upper: IterationResult
    gaps: list  # per-sweep {pred: {key: value}}, entry 0 = u itself
    checked: int  # sweeps for which the gap identity was verified
    exact: bool  # identity held with equality (affine system)


def bracket(system, spec, u, iters, deadline=None) -> BracketResult:
    """Run K^n(0) and K^n(u) side by side and verify that their gap is the
    constant-free operator iterated on u (exactly for affine systems, as a
    lower bound on the gap when demonic choice is present)."""
    grids = grid_states(system, spec.bounds)
    witness = _as_witness_map(system, u)

    # the start must already sit above one application of the operator
    uvals, _, _ = _initial_values(system, grids, witness)
    lookup = _make_lookup(system, spec, uvals, "from-u", witness)
    first = _sweep(system, grids, lookup)
    for pred, table in first.items():
        for key, v in table.items():
            if not xle(v, uvals[pred][key]):
                raise NotPrefixed(
                    f"u is not a prefixed point on the grid: "
                    f"{pred}{key} maps {uvals[pred][key]} to {v}"
                )

    depth = min(iters, 20)
    lower = kleene_iterate(
        system, spec, "bottom", iters, tol=Fraction(0), deadline=deadline,
        keep_history=True,
    )
    upper = kleene_iterate(
        system, spec, witness, iters, tol=Fraction(0), deadline=deadline,
        keep_history=True,
    )
    gap_run = kleene_iterate(
        d_transform(system), spec, witness, depth, tol=Fraction(0),
        deadline=deadline, keep_history=True,
    )
    affine = not any(
        system.equations[p].has_choice() for p in system.predicates()
    )
    checked = 0
    depth = min(depth, len(lower.history), len(upper.history), len(gap_run.history))
    for n in range(depth):
        for pred in system.predicates():
            for key, up in upper.history[n][pred].items():
                gap = xsub(up, lower.history[n][pred][key])
                want = gap_run.history[n][pred][key]
                if affine:
                    if gap != want:
                        raise AssertionError(
                            f"gap identity broke at sweep {n}, {pred}{key}: "
                            f"{gap} != {want}"
                        )
                elif not xle(want, gap):
                    raise AssertionError(
                        f"gap bound broke at sweep {n}, {pred}{key}: "
                        f"{want} > {gap}"
                    )
        checked = n + 1
    return BracketResult(lower, upper, gap_run.history, checked, affine)


def write_trace_csv(result: IterationResult, fileobj):
    """Emit the iteration history as rows (pred, state, n, value)."""
    if result.history is None:
        raise InputError("iterate with keep_history=True to export a trace")
    writer = csv.writer(fileobj)
    writer.writerow(["pred", "state", "n", "value"])
    for n, snapshot in enumerate(result.history):
        for pred, table in snapshot.items():
            for key, v in table.items():
                state = ";".join(str(a) for a in key)
                writer.writerow([pred, state, n, "inf" if is_inf(v) else str(v)])


# ---------------------------------------------------------------------------
# seeded simulation
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class McResult:
    estimate: Fraction  # exact sample mean
    ci95: float
    trials: int
    horizon: int
    seed: int
    property: str


def _bval(b, state) -> bool:
    if isinstance(b, Cmp):
        d = (b.lhs - b.rhs).evaluate(state)
        return {
            "<": d < 0, "<=": d <= 0, "=": d == 0,
            "!=": d != 0, ">=": d >= 0, ">": d > 0,
        }[b.op]
    if isinstance(b, BAnd):
        return all(_bval(p, state) for p in b.parts)
    if isinstance(b, BOr):
        return any(_bval(p, state) for p in b.parts)
    if isinstance(b, BNot):
        return not _bval(b.inner, state)
    raise InputError(f"cannot evaluate guard {b!r}")


def _draw(rng, p: Fraction) -> bool:
    if not 0 <= p <= 1:
        raise TypeError(f"probability {p} outside [0, 1]")
    return rng.randrange(p.denominator) < p.numerator


def _simulate(body, state, rng, horizon):
    """One trial: (terminated, accumulated tick cost)."""
    stack = [body]
    steps = 0
    cost = Fraction(0)
    while stack:
        steps += 1
        if steps > horizon:
            return False, cost
        node = stack.pop()
        if isinstance(node, Skip):
            continue
        if isinstance(node, Seq):
            stack.append(node.second)
            stack.append(node.first)
        elif isinstance(node, Assign):
            state[node.var] = node.expr.evaluate(state)
        elif isinstance(node, ProbChoice):
            p = node.prob.evaluate(state)
            stack.append(node.left if _draw(rng, p) else node.right)
        elif isinstance(node, IfStmt):
            stack.append(node.then if _bval(node.cond, state) else node.other)
        elif isinstance(node, While):
            if _bval(node.cond, state):
                stack.append(node)
                stack.append(node.body)
        elif isinstance(node, Tick):
            cost += node.amount
        elif isinstance(node, Nondet):
            raise InputError("nondeterministic choice has no scheduler here")
        elif isinstance(node, (Score, Observe)):
            raise ScoreNotAllowed("conditioning cannot be simulated directly")
        else:
            raise InputError(f"unknown statement {node!r}")
    return True, cost


def monte_carlo(c, property="wp", trials=1000, horizon=1000, seed=0, state=None):
    """Estimate a program-level value by seeded simulation.

    property "wp": frequency of termination within the horizon (the weakest
    preexpectation of the constant post 1); "ert": mean accumulated tick cost.
    """
    program = c if isinstance(c, PgclProgram) else parse_pgcl(c)
    if property not in ("wp", "ert"):
        raise InputError(f"unknown property {property!r}")
    base = {name: Fraction(0) for name, _ in program.variables}
    if state:
        base.update({k: Fraction(v) for k, v in state.items()})
    rng = random.Random(seed)
    total = Fraction(0)
    total_sq = Fraction(0)
    for _ in range(trials):
        done, cost = _simulate(program.body, dict(base), rng, horizon)
        sample = (Fraction(1) if done else Fraction(0)) if property == "wp" else cost
        total += sample
        total_sq += sample * sample
    mean = total / trials
    var = max(total_sq / trials - mean * mean, Fraction(0))
    ci95 = 1.96 * float(var / trials) ** 0.5
    return McResult(mean, ci95, trials, horizon, seed, property)
