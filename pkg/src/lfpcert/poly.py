"""Exact multivariate polynomials, linear inequalities and polyhedra.

Polynomial coefficients are either plain Fractions or ``ParamExpr`` values:
polynomial expressions in *unknown parameters* (template coefficients, E'
scale factors) of parameter-degree at most 2.  Degree 1 keeps an LP affine;
the degree-2 (bilinear) products appear only when an E' template multiplies
witness templates and are handled by alternation or SMT emission, never by
the LP pipeline directly.
"""

from __future__ import annotations

import math
from fractions import Fraction

from .errors import NonLinearGuard


# ---------------------------------------------------------------------------
# parameter expressions
# ---------------------------------------------------------------------------
class ParamExpr:
    """Polynomial in unknown parameters, degree <= 2, Fraction coefficients.

    terms maps a sorted tuple of parameter names (len <= 2) to a coefficient;
    the empty tuple keys the constant part.
    """

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        t = {}
        if terms:
            for k, c in terms.items():
                c = Fraction(c)
                if c != 0:
                    if len(k) > 2:
                        raise ValueError("parameter degree above 2 is unsupported")
                    t[tuple(sorted(k))] = t.get(tuple(sorted(k)), Fraction(0)) + c
        self.terms = {k: c for k, c in t.items() if c != 0}

    @staticmethod
    def const(c) -> "ParamExpr":
        return ParamExpr({(): Fraction(c)})

    @staticmethod
    def param(name: str) -> "ParamExpr":
        return ParamExpr({(name,): Fraction(1)})

    # -- queries ---------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def is_const(self) -> bool:
        return all(k == () for k in self.terms)

    def const_value(self) -> Fraction:
        if not self.is_const():
            raise ValueError(f"not a constant: {self}")
        return self.terms.get((), Fraction(0))

    def is_affine(self) -> bool:
        return all(len(k) <= 1 for k in self.terms)

    def params(self):
        out = set()
        for k in self.terms:
            out.update(k)
        return out

    def affine_parts(self):
        """(constant, {param: coeff}); raises if bilinear terms remain."""
        if not self.is_affine():
            raise ValueError("bilinear parameter expression reached the LP pipeline")
        lin = {k[0]: c for k, c in self.terms.items() if k}
        return self.terms.get((), Fraction(0)), lin

    # -- arithmetic ------------------------------------------------------
    def __add__(self, other):
        other = _pexpr(other)
        t = dict(self.terms)
        for k, c in other.terms.items():
            t[k] = t.get(k, Fraction(0)) + c
        return ParamExpr(t)

    __radd__ = __add__

    def __neg__(self):
        return ParamExpr({k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-_pexpr(other))

    def __rsub__(self, other):
        return _pexpr(other) + (-self)

    def __mul__(self, other):
        other = _pexpr(other)
        t = {}
        for k1, c1 in self.terms.items():
            for k2, c2 in other.terms.items():
                k = tuple(sorted(k1 + k2))
                if len(k) > 2:
                    raise ValueError(
                        "parameter product of degree above 2 (nested templates?)"
                    )
                t[k] = t.get(k, Fraction(0)) + c1 * c2
        return ParamExpr(t)

    __rmul__ = __mul__

    def subs(self, assignment) -> "ParamExpr":
        """Substitute some parameters by Fractions."""
        t = {}
        for k, c in self.terms.items():
            kept = []
            for name in k:
                if name in assignment:
                    c = c * Fraction(assignment[name])
                else:
                    kept.append(name)
            if c != 0:
                kk = tuple(sorted(kept))
                t[kk] = t.get(kk, Fraction(0)) + c
        return ParamExpr(t)

    def __eq__(self, other):
        if isinstance(other, ParamExpr):
            return self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self.is_const() and self.const_value() == other
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __repr__(self):
        if not self.terms:
            return "0"
        bits = []
        for k in sorted(self.terms):
            c = self.terms[k]
            name = "*".join(k)
            bits.append(f"{c}" if not k else (f"{c}*{name}" if c != 1 else name))
        return " + ".join(bits)


def _pexpr(x):
    if isinstance(x, ParamExpr):
        return x
    return ParamExpr.const(x)


def _czero(c) -> bool:
    return c.is_zero() if isinstance(c, ParamExpr) else c == 0


# ---------------------------------------------------------------------------
# polynomials
# ---------------------------------------------------------------------------
class Polynomial:
    """Multivariate polynomial; terms map exponent tuples (aligned with the
    sorted ``variables`` tuple) to Fraction or ParamExpr coefficients."""

    __slots__ = ("variables", "terms")

    def __init__(self, variables, terms):
        variables = tuple(variables)
        # canonicalize: drop unused variables, sort the rest
        used = [i for i in range(len(variables)) if any(e[i] for e in terms)]
        names = sorted(variables[i] for i in used)
        remap = [variables.index(n) for n in names]
        new_terms = {}
        for e, c in terms.items():
            if _czero(c):
                continue
            key = tuple(e[i] for i in remap)
            if key in new_terms:
                c = new_terms[key] + c
            if _czero(c):
                new_terms.pop(key, None)
            else:
                new_terms[key] = c
        self.variables = tuple(names)
        self.terms = new_terms

    # -- constructors ----------------------------------------------------
    @staticmethod
    def const(c) -> "Polynomial":
        if isinstance(c, ParamExpr):
            return Polynomial((), {(): c} if not c.is_zero() else {})
        c = Fraction(c)
        return Polynomial((), {(): c} if c != 0 else {})

    @staticmethod
    def var(name: str) -> "Polynomial":
        return Polynomial((name,), {(1,): Fraction(1)})

    @staticmethod
    def zero() -> "Polynomial":
        return Polynomial((), {})

    # -- queries ---------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def is_const(self) -> bool:
        return all(all(x == 0 for x in e) for e in self.terms)

    def const_value(self):
        if not self.is_const():
            raise ValueError(f"not constant: {self}")
        return self.terms.get((0,) * len(self.variables), Fraction(0))

    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def is_linear(self) -> bool:
        return self.degree() <= 1

    def has_params(self) -> bool:
        return any(isinstance(c, ParamExpr) for c in self.terms.values())

    def params(self):
        out = set()
        for c in self.terms.values():
            if isinstance(c, ParamExpr):
                out.update(c.params())
        return out

    def monomials(self):
        """Deterministically ordered (exponent_tuple, coeff) pairs."""
        return [(e, self.terms[e]) for e in sorted(self.terms)]

    # -- alignment helper -------------------------------------------------
    def _aligned(self, other):
        names = sorted(set(self.variables) | set(other.variables))
        return names, self._remap(names), other._remap(names)

    def _remap(self, names):
        idx = [names.index(v) for v in self.variables]
        out = {}
        for e, c in self.terms.items():
            key = [0] * len(names)
            for i, x in enumerate(e):
                key[idx[i]] = x
            out[tuple(key)] = c
        return out

    # -- arithmetic ------------------------------------------------------
    def __add__(self, other):
        if isinstance(other, ExpPoly):
            return NotImplemented
        other = _poly(other)
        names, a, b = self._aligned(other)
        t = dict(a)
        for e, c in b.items():
            t[e] = t.get(e, Fraction(0)) + c
        return Polynomial(names, t)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.variables, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, ExpPoly):
            return NotImplemented
        return self + (-_poly(other))

    def __rsub__(self, other):
        return _poly(other) + (-self)

    def __mul__(self, other):
        if isinstance(other, ExpPoly):
            return NotImplemented
        other = _poly(other)
        names, a, b = self._aligned(other)
        t = {}
        for e1, c1 in a.items():
            for e2, c2 in b.items():
                e = tuple(x + y for x, y in zip(e1, e2))
                prod = c1 * c2
                t[e] = t.get(e, Fraction(0)) + prod
        return Polynomial(names, t)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative polynomial power")
        out = Polynomial.const(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def scale(self, c):
        """Multiply by a Fraction or ParamExpr coefficient."""
        if _czero(c) if isinstance(c, ParamExpr) else c == 0:
            return Polynomial.zero()
        return Polynomial(self.variables, {e: k * c for e, k in self.terms.items()})

    # -- substitution / evaluation ----------------------------------------
    def substitute(self, mapping) -> "Polynomial":
        """mapping: var -> Polynomial | Fraction; untouched vars stay."""
        out = Polynomial.zero()
        for e, c in self.monomials():
            term = Polynomial.const(1)
            for i, x in enumerate(e):
                if x == 0:
                    continue
                v = self.variables[i]
                rep = mapping.get(v)
                base = _poly(rep) if rep is not None else Polynomial.var(v)
                term = term * base**x
            out = out + term.scale(c)
        return out

    def evaluate(self, state):
        """state: dict var -> Fraction. Returns Fraction or ParamExpr."""
        acc = None
        for e, c in self.monomials():
            v = Fraction(1)
            for i, x in enumerate(e):
                if x:
                    v *= Fraction(state[self.variables[i]]) ** x
            piece = c * v
            acc = piece if acc is None else acc + piece
        if acc is None:
            return Fraction(0)
        return acc

    def subs_params(self, assignment) -> "Polynomial":
        t = {}
        for e, c in self.terms.items():
            if isinstance(c, ParamExpr):
                c = c.subs(assignment)
                if c.is_const():
                    c = c.const_value()
            t[e] = c
        return Polynomial(self.variables, t)

    # -- misc --------------------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Polynomial.const(other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return (self - other).is_zero()

    def __hash__(self):
        return hash((self.variables, frozenset(self.terms.items())))

    def __repr__(self):
        if not self.terms:
            return "0"
        bits = []
        for e, c in self.monomials():
            mono = "*".join(
                f"{self.variables[i]}^{x}" if x > 1 else self.variables[i]
                for i, x in enumerate(e)
                if x
            )
            if isinstance(c, ParamExpr):
                cs = f"({c})"
            else:
                cs = f"{c}"
            bits.append(f"{cs}*{mono}" if mono and cs != "1" else (mono or cs))
        return " + ".join(bits)


def _poly(x):
    if isinstance(x, Polynomial):
        return x
    if isinstance(x, ParamExpr):
        return Polynomial.const(x)
    return Polynomial.const(Fraction(x))


# ---------------------------------------------------------------------------
# polynomials with exponential terms
# ---------------------------------------------------------------------------
class ExpPoly:
    """poly + sum of coeff(x) * base ** linform(x).

    Bases are positive rationals and exponents linear forms that must take
    integer values wherever evaluated, so evaluation stays exact.  These
    values support the same arithmetic a witness substitution performs
    (addition, scaling by a polynomial, argument substitution) but cannot be
    fed to the algebraic certificate checker: they exist for exact pointwise
    checking of non-polynomial witnesses."""

    __slots__ = ("poly", "exps")

    def __init__(self, poly, exps=()):
        poly = _poly(poly)
        merged = {}
        order = []
        for c, b, e in exps:
            c = _poly(c)
            b = Fraction(b)
            e = _poly(e)
            if b <= 0:
                raise ValueError(f"exponential base must be positive, got {b}")
            if e.has_params() or e.degree() > 1:
                raise ValueError(f"exponent must be a linear form, got {e}")
            if b == 1:
                poly = poly + c
                continue
            key = (b, e)
            if key in merged:
                merged[key] = merged[key] + c
            else:
                merged[key] = c
                order.append(key)
        self.poly = poly
        self.exps = tuple(
            (merged[k], k[0], k[1]) for k in order if not merged[k].is_zero()
        )

    def is_polynomial(self) -> bool:
        return not self.exps

    def is_zero(self) -> bool:
        return not self.exps and self.poly.is_zero()

    def has_params(self) -> bool:
        return self.poly.has_params() or any(c.has_params() for c, _, _ in self.exps)

    def params(self):
        out = self.poly.params()
        for c, _, _ in self.exps:
            out |= c.params()
        return out

    def subs_params(self, assignment) -> "ExpPoly":
        return ExpPoly(
            self.poly.subs_params(assignment),
            tuple((c.subs_params(assignment), b, e) for c, b, e in self.exps),
        )

    def __add__(self, other):
        if isinstance(other, ExpPoly):
            return ExpPoly(self.poly + other.poly, self.exps + other.exps)
        return ExpPoly(self.poly + _poly(other), self.exps)

    __radd__ = __add__

    def __neg__(self):
        return ExpPoly(-self.poly, tuple((-c, b, e) for c, b, e in self.exps))

    def __sub__(self, other):
        return self + (-other if isinstance(other, ExpPoly) else -_poly(other))

    def __rsub__(self, other):
        return (-self) + _poly(other)

    def __mul__(self, other):
        if isinstance(other, ExpPoly):
            raise ValueError("product of two exponential values is unsupported")
        other = _poly(other)
        return ExpPoly(
            self.poly * other, tuple((c * other, b, e) for c, b, e in self.exps)
        )

    __rmul__ = __mul__

    def substitute(self, mapping) -> "ExpPoly":
        return ExpPoly(
            self.poly.substitute(mapping),
            tuple(
                (c.substitute(mapping), b, e.substitute(mapping))
                for c, b, e in self.exps
            ),
        )

    def evaluate(self, state):
        acc = self.poly.evaluate(state)
        for c, b, e in self.exps:
            ev = e.evaluate(state)
            if not isinstance(ev, Fraction) or ev.denominator != 1:
                raise ValueError(f"non-integer exponent {ev} for base {b}")
            acc = acc + c.evaluate(state) * b ** int(ev)
        return acc

    def __eq__(self, other):
        if isinstance(other, ExpPoly):
            return (self - other).is_zero()
        if isinstance(other, (int, Fraction, Polynomial)):
            return not self.exps and self.poly == _poly(other)
        return NotImplemented

    def __hash__(self):
        if not self.exps:
            return hash(self.poly)
        return hash((self.poly, self.exps))

    def __repr__(self):
        bits = [] if self.poly.is_zero() else [repr(self.poly)]
        for c, b, e in self.exps:
            bits.append(f"({c})*({b})^({e})")
        return " + ".join(bits) if bits else "0"


# ---------------------------------------------------------------------------
# linear inequalities and polyhedra
# ---------------------------------------------------------------------------
class LinearInequality:
    """c . x + d >= 0 (or > 0 when strict). Coefficients are Fractions."""

    __slots__ = ("coeffs", "const", "strict")

    def __init__(self, coeffs, const, strict=False):
        self.coeffs = {v: Fraction(c) for v, c in coeffs.items() if c != 0}
        self.const = Fraction(const)
        self.strict = bool(strict)

    @staticmethod
    def from_poly(p: Polynomial, strict: bool, sorts=None) -> "LinearInequality":
        """Lift a linear polynomial to an inequality; integer-sorted atoms are
        tightened to closed integer form (x > 0 becomes x >= 1)."""
        if p.has_params():
            raise NonLinearGuard("guard atoms may not contain template parameters")
        if p.degree() > 1:
            raise NonLinearGuard(f"nonlinear guard atom: {p} {'>' if strict else '>='} 0")
        coeffs = {}
        const = Fraction(0)
        for e, c in p.monomials():
            if sum(e) == 0:
                const = Fraction(c)
            else:
                v = p.variables[e.index(1)]
                coeffs[v] = Fraction(c)
        ineq = LinearInequality(coeffs, const, strict)
        if sorts:
            ineq = ineq.integer_tighten(sorts)
        return ineq

    def integer_tighten(self, sorts) -> "LinearInequality":
        """Over all-integer variables, scale to integer coefficients and round
        the constant so the inequality is closed: a.x >= ceil(-d), and strict
        a.x > -d becomes a.x >= floor(-d) + 1."""
        if not self.coeffs:
            return self
        if not all(sorts.get(v) in ("int", "nat") for v in self.coeffs):
            return self
        denoms = [c.denominator for c in self.coeffs.values()]
        scale = math.lcm(*denoms)
        ints = {v: c * scale for v, c in self.coeffs.items()}
        g = math.gcd(*(abs(int(c)) for c in ints.values()))
        if g > 1:
            ints = {v: c / g for v, c in ints.items()}
            scale = Fraction(scale, g)
        d = self.const * scale
        # a.x + d >= 0  <=>  a.x >= -d
        if self.strict:
            bound = math.floor(-d) + 1
        else:
            bound = math.ceil(-d)
        return LinearInequality(ints, -Fraction(bound), strict=False)

    # -- queries -----------------------------------------------------------
    def is_trivial(self):
        """None when variables occur; else truth value."""
        if self.coeffs:
            return None
        return self.const > 0 if self.strict else self.const >= 0

    def evaluate(self, state) -> bool:
        v = self.const + sum(c * Fraction(state[x]) for x, c in self.coeffs.items())
        return v > 0 if self.strict else v >= 0

    def closed(self) -> "LinearInequality":
        return LinearInequality(self.coeffs, self.const, strict=False)

    def negate(self, sorts=None) -> "LinearInequality":
        neg = LinearInequality(
            {v: -c for v, c in self.coeffs.items()}, -self.const, not self.strict
        )
        if sorts:
            neg = neg.integer_tighten(sorts)
        return neg

    def as_poly(self) -> Polynomial:
        p = Polynomial.const(self.const)
        for v, c in sorted(self.coeffs.items()):
            p = p + Polynomial.var(v).scale(c)
        return p

    def canonical_key(self):
        """Identity up to positive scaling."""
        if not self.coeffs:
            if self.const == 0:
                return (self.strict, (), 0)
            return (self.strict, (), 1 if self.const > 0 else -1)
        items = sorted(self.coeffs.items())
        lead = items[0][1]
        s = abs(lead)
        return (
            self.strict,
            tuple((v, c / s) for v, c in items),
            self.const / s,
        )

    def __eq__(self, other):
        if not isinstance(other, LinearInequality):
            return NotImplemented
        return self.canonical_key() == other.canonical_key()

    def __hash__(self):
        return hash(self.canonical_key())

    def __repr__(self):
        return f"{self.as_poly()} {'>' if self.strict else '>='} 0"


class Polyhedron:
    """Conjunction of linear inequalities; empty conjunction = whole space."""

    __slots__ = ("inequalities",)

    def __init__(self, inequalities=()):
        seen = []
        keys = set()
        for q in inequalities:
            t = q.is_trivial()
            if t is True:
                continue
            k = q.canonical_key()
            if k in keys:
                continue
            keys.add(k)
            seen.append(q)
        self.inequalities = tuple(seen)

    @staticmethod
    def top() -> "Polyhedron":
        return Polyhedron(())

    def variables(self):
        out = set()
        for q in self.inequalities:
            out.update(q.coeffs)
        return out

    def is_trivially_false(self) -> bool:
        return any(q.is_trivial() is False for q in self.inequalities)

    def evaluate(self, state) -> bool:
        return all(q.evaluate(state) for q in self.inequalities)

    def intersect(self, other: "Polyhedron") -> "Polyhedron":
        return Polyhedron(self.inequalities + other.inequalities)

    def feasible(self, deadline=None) -> bool:
        """Exact feasibility over the reals, honouring strict atoms."""
        if self.is_trivially_false():
            return False
        rows = [q for q in self.inequalities if q.is_trivial() is None]
        if not rows:
            return True
        from .simplex import LinearProblem, solve_lp

        lp = LinearProblem()
        for v in sorted(self.variables()):
            lp.add_var(v, lo=None)
        any_strict = any(q.strict for q in rows)
        if any_strict:
            lp.add_var("__slack", lo=Fraction(0), hi=Fraction(1))
            lp.set_objective({"__slack": 1})
        for q in rows:
            coeffs = dict(q.coeffs)
            if q.strict:
                coeffs["__slack"] = Fraction(-1)
            lp.add_row(coeffs, q.const, ">=")
        sol = solve_lp(lp, deadline)
        if sol is None:
            return False
        if any_strict:
            return sol["__slack"] > 0
        return True

    def implies(self, other: "Polyhedron", sorts=None, deadline=None) -> bool:
        for q in other.inequalities:
            if self.intersect(Polyhedron((q.negate(sorts),))).feasible(deadline):
                return False
        return True

    def complement_cells(self, sorts=None):
        """Disjoint polyhedra covering the complement."""
        cells = []
        prefix = []
        for q in self.inequalities:
            cells.append(Polyhedron(tuple(prefix) + (q.negate(sorts),)))
            prefix.append(q)
        return cells

    def __eq__(self, other):
        if not isinstance(other, Polyhedron):
            return NotImplemented
        return set(q.canonical_key() for q in self.inequalities) == set(
            q.canonical_key() for q in other.inequalities
        )

    def __hash__(self):
        return hash(frozenset(q.canonical_key() for q in self.inequalities))

    def __repr__(self):
        if not self.inequalities:
            return "true"
        return " and ".join(repr(q) for q in self.inequalities)
