"""Exact rational linear programming.

Feasibility / optimization of

    maximize  c.x
    s.t.      rows:  a.x + const  (= | >=)  0
              per-variable bounds lo <= x <= hi  (lo may be None = free)

entirely over exact rationals.  Strategy:

1. presolve: substitute out equality rows by sparse Gaussian elimination
   (free variables make the cleanest pivots; sign-constrained pivots leave
   their nonnegativity behind as an inequality row),
2. two-phase dense simplex with Bland's rule on what remains.

The tableau uses gmpy2.mpq when available (much faster), fractions.Fraction
otherwise; callers only ever see Fraction.
"""

from __future__ import annotations

import time
from fractions import Fraction

try:  # pragma: no cover - exercised implicitly
    from gmpy2 import mpq as _mpq

    def _rat(x):
        return _mpq(x.numerator, x.denominator) if isinstance(x, Fraction) else _mpq(x)

    def _to_frac(x):
        return Fraction(int(x.numerator), int(x.denominator))

except ImportError:  # pragma: no cover
    _rat = Fraction

    def _to_frac(x):
        return x

_ZERO = _rat(0)
_ONE = _rat(1)


class TimeoutExpired(Exception):
    """Raised when a cooperative deadline passes."""


class Deadline:
    """Wall-clock budget threaded through long-running loops."""

    def __init__(self, seconds=None):
        self.expires_at = None if seconds is None else time.monotonic() + seconds

    def check(self):
        if self.expires_at is not None and time.monotonic() > self.expires_at:
            raise TimeoutExpired("time budget exhausted")

    def expired(self) -> bool:
        return self.expires_at is not None and time.monotonic() > self.expires_at


class LinearProblem:
    """Rows are dicts var->Fraction plus a constant; senses '=' or '>='."""

    def __init__(self):
        self.rows = []  # (coeffs: dict, const: Fraction, sense: str)
        self.bounds = {}  # var -> (lo | None, hi | None)
        self.objective = None  # dict var -> Fraction, maximized
        self._order = []  # insertion order of variables

    def add_var(self, name, lo=Fraction(0), hi=None):
        if name in self.bounds:
            raise ValueError(f"duplicate variable {name}")
        self.bounds[name] = (lo, hi)
        self._order.append(name)

    def ensure_var(self, name, lo=Fraction(0), hi=None):
        if name not in self.bounds:
            self.add_var(name, lo, hi)

    def add_row(self, coeffs, const, sense):
        if sense not in ("=", ">="):
            raise ValueError(f"bad sense {sense!r}")
        cleaned = {}
        for v, c in coeffs.items():
            c = Fraction(c)
            if c != 0:
                if v not in self.bounds:
                    raise ValueError(f"row references unknown variable {v}")
                cleaned[v] = c
        self.rows.append((cleaned, Fraction(const), sense))

    def set_objective(self, coeffs):
        self.objective = {v: Fraction(c) for v, c in coeffs.items() if c != 0}


def solve_lp(problem: LinearProblem, deadline: Deadline | None = None):
    """Return {var: Fraction} satisfying the problem (optimal when an
    objective is set), or None when infeasible."""
    return _Solver(problem, deadline or Deadline()).solve()


class _Solver:
    def __init__(self, problem, deadline):
        self.p = problem
        self.deadline = deadline

    def solve(self):
        # --- normalize bounds: shift so every constrained var is >= 0 ---
        # x = sign * x' + shift with x' >= 0, or free.
        self.var_map = {}  # name -> (sign, shift) for constrained, None for free
        rows = []  # (coeffs dict, const, sense)
        extra_rows = []
        for name in self.p._order:
            lo, hi = self.p.bounds[name]
            if lo is None and hi is None:
                self.var_map[name] = None
            elif lo is not None:
                self.var_map[name] = (Fraction(1), Fraction(lo))
                if hi is not None:
                    # x <= hi, stated in original coordinates (map_row shifts)
                    extra_rows.append(({name: Fraction(-1)}, Fraction(hi), ">="))
            else:
                # only an upper bound: x = hi - x'
                self.var_map[name] = (Fraction(-1), Fraction(hi))

        def map_row(coeffs, const):
            out, c = {}, Fraction(const)
            for v, a in coeffs.items():
                m = self.var_map[v]
                if m is None:
                    out[v] = out.get(v, Fraction(0)) + a
                else:
                    sign, shift = m
                    out[v] = out.get(v, Fraction(0)) + a * sign
                    c += a * shift
            return {v: a for v, a in out.items() if a != 0}, c

        for coeffs, const, sense in self.p.rows:
            cc, c = map_row(coeffs, const)
            rows.append([cc, c, sense])
        for coeffs, const, sense in extra_rows:
            cc, c = map_row(coeffs, const)
            rows.append([cc, c, sense])

        objective = {}
        obj_const = Fraction(0)
        if self.p.objective:
            objective, obj_const = map_row(self.p.objective, Fraction(0))

        free = {v for v, m in self.var_map.items() if m is None}

        # --- Gaussian elimination of equality rows (sparse) ---
        # substitutions: var -> (coeffs dict over surviving vars, const)
        subs = {}
        eq_rows = [r for r in rows if r[2] == "="]
        ineq_rows = [r for r in rows if r[2] == ">="]

        def apply_sub(target_coeffs, target_const, var, expr_coeffs, expr_const):
            a = target_coeffs.pop(var, None)
            if a is None or a == 0:
                return target_coeffs, target_const
            for v, c in expr_coeffs.items():
                nv = target_coeffs.get(v, Fraction(0)) + a * c
                if nv == 0:
                    target_coeffs.pop(v, None)
                else:
                    target_coeffs[v] = nv
            return target_coeffs, target_const + a * expr_const

        pending = list(eq_rows)
        # eliminate shortest rows first: cheap and keeps fill-in low
        while pending:
            self.deadline.check()
            pending.sort(key=lambda r: len(r[0]))
            coeffs, const, _ = pending.pop(0)
            if not coeffs:
                if const != 0:
                    return None
                continue
            # pivot preference: free var, else sign-constrained
            pivot = None
            for v in sorted(coeffs):
                if v in free:
                    pivot = v
                    break
            if pivot is None:
                pivot = min(coeffs)
            a = coeffs.pop(pivot)
            # pivot = (-const - sum coeffs)/a
            expr_coeffs = {v: -c / a for v, c in coeffs.items()}
            expr_const = -const / a
            if pivot not in free:
                # leave the nonnegativity of the eliminated var behind
                ineq_rows.append([dict(expr_coeffs), expr_const, ">="])
            # substitute everywhere
            for r in pending:
                r[0], r[1] = apply_sub(r[0], r[1], pivot, expr_coeffs, expr_const)
            for r in ineq_rows:
                r[0], r[1] = apply_sub(r[0], r[1], pivot, expr_coeffs, expr_const)
            objective, obj_const = apply_sub(objective, obj_const, pivot, expr_coeffs, expr_const)
            for v, (ec, e0) in subs.items():
                ec2, e02 = apply_sub(ec, e0, pivot, expr_coeffs, expr_const)
                subs[v] = (ec2, e02)
            subs[pivot] = (expr_coeffs, expr_const)
            free.discard(pivot)

        # --- split surviving free variables ---
        live = set()
        for r in ineq_rows:
            live.update(r[0])
        live.update(objective)
        split = {}
        for v in sorted(live & free):
            split[v] = (v + "+", v + "-")

        def split_row(coeffs):
            out = {}
            for v, c in coeffs.items():
                if v in split:
                    p, n = split[v]
                    out[p] = out.get(p, Fraction(0)) + c
                    out[n] = out.get(n, Fraction(0)) - c
                else:
                    out[v] = out.get(v, Fraction(0)) + c
            return {v: c for v, c in out.items() if c != 0}

        std_rows = [(split_row(r[0]), r[1]) for r in ineq_rows]
        std_obj = split_row(objective)

        # unreferenced free vars default to 0; idle constrained vars to lo.
        solution = self._simplex(std_rows, std_obj)
        if solution is None:
            return None

        # --- reassemble ---
        def value_of(v):
            if v in split:
                p, n = split[v]
                return solution.get(p, Fraction(0)) - solution.get(n, Fraction(0))
            if v in subs:
                ec, e0 = subs[v]
                return sum((c * value_of(w) for w, c in ec.items()), e0)
            return solution.get(v, Fraction(0))

        # subs may chain during construction; they were kept fully substituted,
        # so value_of recursion depth is 1.
        result = {}
        for name in self.p._order:
            m = self.var_map[name]
            raw = value_of(name)
            if m is None:
                result[name] = raw
            else:
                sign, shift = m
                result[name] = sign * raw + shift
        return result

    # ------------------------------------------------------------------
    def _simplex(self, rows, objective):
        """rows: list of (coeffs dict over nonneg vars, const) meaning
        coeffs.x + const >= 0; maximize objective.x.  Returns {var: Fraction}
        or None."""
        cols = sorted({v for r, _ in rows for v in r} | set(objective))
        col_index = {v: i for i, v in enumerate(cols)}
        n = len(cols)
        m = len(rows)
        if m == 0:
            return {v: Fraction(0) for v in cols}

        # a.x + c >= 0  ->  a.x - s = -c ; want rhs >= 0
        # columns: [vars | slacks | artificials], rhs separate
        A = []
        b = []
        art_rows = []
        for i, (coeffs, const) in enumerate(rows):
            row = [_ZERO] * (n + m)
            for v, c in coeffs.items():
                row[col_index[v]] = _rat(c)
            row[n + i] = -_ONE  # slack
            rhs = _rat(-const)
            if rhs <= 0:
                # negating makes the slack column +1 so it can start basic
                row = [-x for x in row]
                rhs = -rhs
            A.append(row)
            b.append(rhs)

        # artificials where the slack cannot start basic (slack coeff must be
        # +1 with rhs >= 0 to be basic; after possible negation it is -1 or +1)
        total = n + m
        basis = [None] * m
        for i in range(m):
            if A[i][n + i] == _ONE:
                basis[i] = n + i
        need_art = [i for i in range(m) if basis[i] is None]
        for k, i in enumerate(need_art):
            art_rows.append(i)
            for r in range(m):
                A[r].append(_ONE if r == i else _ZERO)
            basis[i] = total + k
        n_art = len(need_art)
        width = total + n_art

        # Phase 1: maximize -(sum of artificials)
        if n_art:
            cost = [_ZERO] * width
            for k in range(n_art):
                cost[total + k] = -_ONE
            self._run(A, b, basis, cost, width)
            val = sum(b[i] * (_ONE if basis[i] >= total else _ZERO) for i in range(m))
            if val != 0:
                return None
            # drive leftover artificials out of the basis
            for i in range(m):
                if basis[i] >= total:
                    piv = next((j for j in range(total) if A[i][j] != 0), None)
                    if piv is None:
                        continue  # redundant row
                    self._pivot(A, b, basis, i, piv)
            # drop artificial columns
            for i in range(m):
                A[i] = A[i][:total]
            width = total

        cost = [_ZERO] * width
        for v, c in objective.items():
            cost[col_index[v]] = _rat(c)
        self._run(A, b, basis, cost, width)

        values = {}
        for i in range(m):
            if basis[i] is not None and basis[i] < n:
                values[cols[basis[i]]] = _to_frac(b[i])
        for v in cols:
            values.setdefault(v, Fraction(0))
        return values

    def _run(self, A, b, basis, cost, width):
        """Primal simplex, Bland's rule. Mutates tableau in place."""
        m = len(A)
        while True:
            self.deadline.check()
            # reduced costs: c_j - c_B . B^-1 A_j ; tableau is kept in
            # canonical form wrt basis, so compute via current rows.
            # maintain canonical form: reduce cost row by basic columns
            red = list(cost)
            zval = _ZERO
            for i in range(m):
                cb = cost[basis[i]]
                if cb != 0:
                    row = A[i]
                    for j in range(width):
                        if row[j] != 0:
                            red[j] -= cb * row[j]
                    zval += cb * b[i]
            enter = None
            for j in range(width):
                if red[j] > 0:
                    enter = j
                    break
            if enter is None:
                return zval
            leave = None
            best = None
            for i in range(m):
                a = A[i][enter]
                if a > 0:
                    ratio = b[i] / a
                    if best is None or ratio < best or (
                        ratio == best and basis[i] < basis[leave]
                    ):
                        best = ratio
                        leave = i
            if leave is None:
                # unbounded objective: any large feasible point works for our
                # feasibility-centric callers; clamp by stopping here.
                return None
            self._pivot(A, b, basis, leave, enter)

    @staticmethod
    def _pivot(A, b, basis, i, j):
        m = len(A)
        piv = A[i][j]
        inv = _ONE / piv
        A[i] = [x * inv for x in A[i]]
        b[i] = b[i] * inv
        row_i = A[i]
        bi = b[i]
        for r in range(m):
            if r == i:
                continue
            f = A[r][j]
            if f != 0:
                row_r = A[r]
                for c in range(len(row_r)):
                    if row_i[c] != 0:
                        row_r[c] -= f * row_i[c]
                b[r] -= f * bi
        basis[i] = j
