"""Line-oriented text formats for systems, certificates, and cwp manifests.

``*.eqs``   predicate declarations with sorts, one ``X(x) =mu ...`` equation
            per line in bracket-normal form, and an optional ``query`` line.
``*.cert``  certificates, one witness or scale-cell per line, mirroring
            :class:`~lfpcert.certify.Certificate` field by field.
``*.cwp``   a manifest tying the two systems of a conditional analysis to
            their certificate files and claimed bounds.

All numbers are exact rationals written ``p/q``.  Serialization is
deterministic: the same object always produces the same bytes.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

from .certify import AltScale, Certificate, EPrime, ScaledCell
from .eqsys import (
    AffineAtom,
    BAnd,
    BNot,
    BOr,
    Branch,
    CallTerm,
    ChoiceBody,
    Cmp,
    EquationSystem,
    NormalFormula,
    PredDecl,
    PiecewisePoly,
    Query,
    SORTS,
    TRUE,
    call,
    const,
    fif,
    fsum,
    normalize,
    scale,
)
from .errors import CertificateFormatError, InputError
from .poly import ExpPoly, LinearInequality, Polyhedron, Polynomial

# ---------------------------------------------------------------------------
# tokenizer
# ---------------------------------------------------------------------------
# Predicate names carry structured suffixes from the frontend: a source
# position (while@3:5) and a moment tag (#1/#2), so both belong to the token.
_TOKEN = re.compile(
    r"""\s*(?:
        (?P<num>\d+(?:/\d+)?)
      | (?P<name>[A-Za-z_][A-Za-z_0-9]*(?:@\d+:\d+)?(?:\#\d+)?)
      | (?P<op>>=|<=|!=|=mu|&&|\|\||\^|[-+*(){}\[\];,:=<>|!])
    )""",
    re.VERBOSE,
)


def _tokenize(line, where):
    toks = []
    pos = 0
    while pos < len(line):
        m = _TOKEN.match(line, pos)
        if not m:
            if line[pos:].strip():
                raise InputError(f"{where}: cannot read {line[pos:].strip()!r}")
            break
        pos = m.end()
        for kind in ("num", "name", "op"):
            text = m.group(kind)
            if text is not None:
                toks.append((kind, text))
                break
    return toks


class _Line:
    """Token cursor over one line of input."""

    def __init__(self, line, where):
        self.toks = _tokenize(line, where)
        self.pos = 0
        self.where = where

    def error(self, msg):
        raise InputError(f"{self.where}: {msg}")

    def peek(self):
        return self.toks[self.pos] if self.pos < len(self.toks) else (None, None)

    def take(self):
        kind, text = self.peek()
        if kind is None:
            self.error("unexpected end of line")
        self.pos += 1
        return kind, text

    def expect(self, text):
        kind, got = self.take()
        if got != text:
            self.error(f"expected {text!r}, found {got!r}")

    def at(self, text):
        return self.peek()[1] == text

    def eat(self, text):
        if self.at(text):
            self.pos += 1
            return True
        return False

    def done(self):
        return self.pos >= len(self.toks)

    def name(self):
        kind, text = self.take()
        if kind != "name":
            self.error(f"expected a name, found {text!r}")
        return text

    def rational(self):
        neg = self.eat("-")
        kind, text = self.take()
        if kind != "num":
            self.error(f"expected a rational, found {text!r}")
        v = Fraction(text)
        return -v if neg else v

    # -- arithmetic expressions -------------------------------------------
    # expr  := term (('+'|'-') term)*
    # term  := factor ('*' factor)*
    # factor:= '-' factor | atom ['^' (num | '(' expr ')')]
    # atom  := num | name | '(' expr ')'
    # Values are Polynomial, or ExpPoly once a constant base is raised to a
    # non-constant exponent.
    def expr(self):
        val = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            rhs = self.term()
            val = val + rhs if op == "+" else val - rhs
        return val

    def term(self):
        val = self.factor()
        while self.eat("*"):
            rhs = self.factor()
            try:
                val = val * rhs
            except ValueError as e:
                self.error(str(e))
        return val

    def factor(self):
        if self.eat("-"):
            return -self.factor()
        val = self.atom()
        if self.eat("^"):
            if self.eat("("):
                e = self.expr()
                self.expect(")")
            else:
                e = Polynomial.const(self.rational())
            return self._power(val, e)
        return val

    def atom(self):
        kind, text = self.take()
        if kind == "num":
            return Polynomial.const(Fraction(text))
        if kind == "name":
            return Polynomial.var(text)
        if text == "(":
            val = self.expr()
            self.expect(")")
            return val
        self.error(f"expected a value, found {text!r}")

    def _power(self, base, e):
        if isinstance(e, Polynomial) and e.is_const():
            k = e.const_value()
            if k.denominator == 1 and k >= 0 and isinstance(base, Polynomial):
                return base ** int(k)
        if not (isinstance(base, Polynomial) and base.is_const()):
            self.error(f"exponent base must be a positive rational, got {base}")
        b = base.const_value()
        if b <= 0:
            self.error(f"exponent base must be positive, got {b}")
        if isinstance(e, ExpPoly):
            self.error("nested exponentials are not supported")
        return ExpPoly(Polynomial.const(0), ((Polynomial.const(1), b, e),))

    def poly(self):
        val = self.expr()
        if isinstance(val, ExpPoly):
            if val.exps:
                self.error("exponential terms are not allowed here")
            val = val.poly
        return val

    # -- guards -------------------------------------------------------------
    _RELS = (">=", "<=", ">", "<", "=")

    def guard(self, sorts=None):
        if self.eat("true"):
            return Polyhedron.top()
        atoms = []
        while True:
            lhs = self.poly()
            kind, rel = self.take()
            if rel not in self._RELS:
                self.error(f"expected a comparison, found {rel!r}")
            rhs = self.poly()
            d = lhs - rhs
            if rel in (">=", ">"):
                atoms.append(LinearInequality.from_poly(d, rel == ">", sorts))
            elif rel in ("<=", "<"):
                atoms.append(LinearInequality.from_poly(-d, rel == "<", sorts))
            else:
                atoms.append(LinearInequality.from_poly(d, False, sorts))
                atoms.append(LinearInequality.from_poly(-d, False, sorts))
            if not self.eat("&&"):
                return Polyhedron(atoms)

    # -- affine bodies --------------------------------------------------------
    def _call_tail(self, pred):
        self.expect("(")
        args = []
        if not self.eat(")"):
            while True:
                args.append(self.poly())
                if self.eat(")"):
                    break
                self.expect(",")
        return tuple(args)

    def branch_body(self):
        kind, text = self.peek()
        if text in ("min", "max"):
            mode = self.take()[1]
            self.expect("{")
            alts = [self._alt_sum()]
            while self.eat(";"):
                alts.append(self._alt_sum())
            self.expect("}")
            return ChoiceBody(tuple(alts), mode)
        self.expect("(")
        atom = self._alt_sum()
        self.expect(")")
        return atom

    def _alt_sum(self):
        calls = []
        cval = Polynomial.const(0)
        saw_const = False
        while True:
            kind, text = self.peek()
            if kind == "name":
                pred = self.name()
                calls.append(CallTerm(pred, self._call_tail(pred), Polynomial.const(1)))
            elif text == "(":
                self.take()
                w = self.poly()
                self.expect(")")
                if self.peek()[0] == "name":
                    pred = self.name()
                    calls.append(CallTerm(pred, self._call_tail(pred), w))
                else:
                    cval = cval + w
                    saw_const = True
            elif kind == "num" or text == "-":
                cval = cval + self.poly()
                saw_const = True
                if self.peek()[0] == "name":
                    self.error("write weighted calls as (w) P(args)")
            else:
                self.error(f"expected a call or constant, found {text!r}")
            if not self.eat("+"):
                break
        if not calls and not saw_const:
            self.error("empty body")
        return AffineAtom(tuple(calls), cval)


# ---------------------------------------------------------------------------
# equation systems
# ---------------------------------------------------------------------------
def _parse_meta(line):
    """Key/value pairs from a ``# bench: k=v, k=v`` comment."""
    out = {}
    for part in line.split(":", 1)[1].split(","):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise InputError(f"malformed bench header entry {part!r}")
        k, v = part.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def parse_system(text, where="<eqs>"):
    """Parse an ``.eqs`` file: ``(system, query_or_None, meta)``."""
    decls = []
    sorts_by_pred = {}
    equations = {}
    query = None
    meta = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            if line.startswith("# bench:"):
                meta.update(_parse_meta(line))
            continue
        lp = _Line(line, f"{where}:{n}")
        if lp.at("pred"):
            lp.take()
            name = lp.name()
            lp.expect("(")
            params = []
            if not lp.eat(")"):
                while True:
                    v = lp.name()
                    lp.expect(":")
                    s = lp.name()
                    if s not in SORTS:
                        lp.error(f"unknown sort {s!r}")
                    params.append((v, s))
                    if lp.eat(")"):
                        break
                    lp.expect(",")
            if not lp.done():
                lp.error("trailing input after declaration")
            if name in sorts_by_pred:
                lp.error(f"duplicate predicate {name}")
            decls.append(PredDecl(name, tuple(params)))
            sorts_by_pred[name] = dict(params)
        elif lp.at("query"):
            if query is not None:
                lp.error("more than one query line")
            lp.take()
            query = _parse_query(lp)
        else:
            name = lp.name()
            if name not in sorts_by_pred:
                lp.error(f"equation for undeclared predicate {name}")
            if name in equations:
                lp.error(f"duplicate equation for {name}")
            lp.expect("(")
            seen = []
            if not lp.eat(")"):
                while True:
                    seen.append(lp.name())
                    if lp.eat(")"):
                        break
                    lp.expect(",")
            declared = [v for v, _ in next(d for d in decls if d.name == name).params]
            if seen != declared:
                lp.error(
                    f"equation parameters {tuple(seen)} do not match "
                    f"declaration {tuple(declared)}"
                )
            lp.expect("=mu")
            sorts = sorts_by_pred[name]
            branches = []
            while True:
                lp.expect("[")
                g = lp.guard(sorts)
                lp.expect("]")
                branches.append(Branch(g, lp.branch_body()))
                if not lp.eat("+"):
                    break
            if not lp.done():
                lp.error("trailing input after equation")
            equations[name] = NormalFormula(tuple(branches))
    if not decls:
        raise InputError(f"{where}: no predicate declarations")
    return EquationSystem(decls, equations), query, meta


def _parse_query(lp):
    parts = []
    while True:
        kind, text = lp.peek()
        if text in ("min", "max"):
            lp.error("choice operators are not supported in query lines")
        if kind == "name":
            pred = lp.name()
            args = lp._call_tail(pred)
            parts.append(call(pred, *args))
        elif text == "(":
            lp.take()
            w = lp.poly()
            lp.expect(")")
            if lp.peek()[0] == "name":
                pred = lp.name()
                parts.append(scale(w, call(pred, *lp._call_tail(pred))))
            else:
                parts.append(const(w))
        elif kind == "num" or text == "-":
            parts.append(const(lp.poly()))
        else:
            lp.error(f"expected a call or constant, found {text!r}")
        if not lp.eat("+"):
            break
    kind, rel = lp.take()
    if rel not in (">=", "<="):
        lp.error(f"query relation must be >= or <=, found {rel!r}")
    bound = lp.rational()
    if not lp.done():
        lp.error("trailing input after query")
    return Query(fsum(*parts), rel, bound)


def parse_query_line(text):
    """A query over declared predicates, e.g. ``X(1) >= 3`` or
    ``(1/2) X(0) + (1/2) X(1) <= 2``."""
    return _parse_query(_Line(text, "<query>"))


# -- post-expectations and query specifications --------------------------------
def _surface_cmp(lp):
    lhs = lp.poly()
    kind, rel = lp.take()
    if rel not in (">=", "<=", ">", "<", "=", "!="):
        lp.error(f"expected a comparison, found {rel!r}")
    return Cmp(lhs, rel, lp.poly())


def _surface_bfact(lp):
    if lp.eat("!"):
        return BNot(_surface_bfact(lp))
    if lp.at("true"):
        lp.take()
        return TRUE
    if lp.at("("):
        # A parenthesis may group a condition or start an arithmetic term;
        # try the condition reading first and fall back.
        saved = lp.pos
        lp.take()
        try:
            inner = _surface_bor(lp)
            lp.expect(")")
            return inner
        except InputError:
            lp.pos = saved
    return _surface_cmp(lp)


def _surface_band(lp):
    parts = [_surface_bfact(lp)]
    while lp.eat("&&"):
        parts.append(_surface_bfact(lp))
    return parts[0] if len(parts) == 1 else BAnd(tuple(parts))


def _surface_bor(lp):
    parts = [_surface_band(lp)]
    while lp.eat("||"):
        parts.append(_surface_band(lp))
    return parts[0] if len(parts) == 1 else BOr(tuple(parts))


def parse_post(text):
    """A post-expectation: a polynomial, or an indicator ``[condition]``."""
    lp = _Line(text, "<post>")
    if lp.eat("["):
        cond = _surface_bor(lp)
        lp.expect("]")
        if not lp.done():
            lp.error("trailing input after indicator")
        return fif(cond, const(1), const(0))
    v = lp.poly()
    if not lp.done():
        lp.error("trailing input after post-expectation")
    return const(v)


def parse_query_spec(text):
    """A query of the form ``X(1, 2) >= 3`` or bare ``>= 3``.

    Returns ``(args_or_None, relation, bound)``; the predicate name is a
    placeholder, the arguments bind the program variables in declaration
    order.
    """
    lp = _Line(text, "<query>")
    args = None
    if lp.peek()[0] == "name":
        lp.name()
        lp.expect("(")
        args = []
        if not lp.eat(")"):
            while True:
                args.append(lp.rational())
                if lp.eat(")"):
                    break
                lp.expect(",")
        args = tuple(args)
    kind, rel = lp.take()
    if rel not in (">=", "<="):
        lp.error(f"query relation must be >= or <=, found {rel!r}")
    bound = lp.rational()
    if not lp.done():
        lp.error("trailing input after query")
    return args, rel, bound


# -- writers ------------------------------------------------------------------
def _guard_text(g: Polyhedron) -> str:
    if not g.inequalities:
        return "true"
    return " && ".join(str(q) for q in g.inequalities)


def _atom_text(atom: AffineAtom, bare_unit=False) -> str:
    if not atom.calls:
        return str(atom.const)
    bits = []
    for ct in atom.calls:
        args = ", ".join(str(a) for a in ct.args)
        if bare_unit and ct.weight == Polynomial.const(1):
            bits.append(f"{ct.pred}({args})")
        else:
            bits.append(f"({ct.weight}) {ct.pred}({args})")
    if not atom.const.is_zero():
        bits.append(f"({atom.const})")
    return " + ".join(bits)


def _body_text(body) -> str:
    if isinstance(body, ChoiceBody):
        alts = " ; ".join(_atom_text(a) for a in body.alternatives)
        return f"{body.mode}{{ {alts} }}"
    return f"({_atom_text(body)})"


def _query_text(q: Query) -> str:
    nf = normalize(q.formula, {})
    chosen = None
    for br in nf.branches:
        if br.guard.variables():
            raise InputError("only closed queries can be serialized")
        if br.guard.evaluate({}):
            chosen = br
            break
    if chosen is None:
        raise InputError("query formula has no applicable branch")
    if isinstance(chosen.body, ChoiceBody):
        raise InputError("choice operators are not supported in query lines")
    return f"query {_atom_text(chosen.body, bare_unit=True)} {q.relation} {q.bound}"


def serialize_system(system: EquationSystem, query=None, header=()) -> str:
    lines = [h if h.startswith("#") else f"# {h}" for h in header]
    for d in system.decls:
        params = ", ".join(f"{v} : {s}" for v, s in d.params)
        lines.append(f"pred {d.name}({params})")
    for d in system.decls:
        nf = system.equations[d.name]
        rhs = " + ".join(
            f"[{_guard_text(br.guard)}] {_body_text(br.body)}" for br in nf.branches
        )
        args = ", ".join(d.param_names())
        lines.append(f"{d.name}({args}) =mu {rhs}")
    if query is not None:
        lines.append(_query_text(query))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# certificates
# ---------------------------------------------------------------------------
def _value_text(v) -> str:
    return str(v)


def parse_certificate(text, where="<cert>"):
    """Parse a ``.cert`` file: ``(certificate, meta)``."""
    direction = None
    roles = {"u": {}, "r": {}, "eta": {}}
    cells = []
    meta = {}
    saw_any = False
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            if line.startswith("# bench:"):
                meta.update(_parse_meta(line))
            continue
        saw_any = True
        lp = _Line(line, f"{where}:{n}")
        head = lp.name()
        if head == "direction":
            if direction is not None:
                raise CertificateFormatError(f"{lp.where}: duplicate direction line")
            direction = lp.name()
            if direction not in ("lower", "upper") or not lp.done():
                raise CertificateFormatError(
                    f"{lp.where}: direction must be lower or upper"
                )
        elif head in roles:
            pred = lp.name()
            lp.expect("(")
            params = []
            if not lp.eat(")"):
                while True:
                    params.append(lp.name())
                    if lp.eat(")"):
                        break
                    lp.expect(",")
            lp.expect("=")
            pieces = []
            while True:
                lp.expect("[")
                g = lp.guard()
                lp.expect("]")
                lp.expect("(")
                v = lp.expr()
                lp.expect(")")
                if isinstance(v, ExpPoly) and not v.exps:
                    v = v.poly
                pieces.append((g, v))
                if not lp.eat(";"):
                    break
            if not lp.done():
                lp.error("trailing input after witness")
            if pred in roles[head]:
                raise CertificateFormatError(
                    f"{lp.where}: duplicate {head} witness for {pred}"
                )
            roles[head][pred] = PiecewisePoly(tuple(params), tuple(pieces))
        elif head == "scale":
            pred = lp.name()
            lp.expect("branch")
            kind, text_ = lp.take()
            if kind != "num" or "/" in text_:
                lp.error(f"expected a branch index, found {text_!r}")
            idx = int(text_)
            lp.expect("[")
            g = lp.guard()
            lp.expect("]")
            lp.expect("=")
            alts = [_parse_alt_scale(lp)]
            while lp.eat("|"):
                alts.append(_parse_alt_scale(lp))
            if not lp.done():
                lp.error("trailing input after scale cell")
            cells.append((pred, ScaledCell(g, idx, tuple(alts))))
        else:
            lp.error(f"unknown certificate line {head!r}")
    if not saw_any:
        raise CertificateFormatError(f"{where}: empty certificate")
    if direction is None:
        raise CertificateFormatError(f"{where}: missing direction line")
    if not roles["u"]:
        raise CertificateFormatError(f"{where}: missing u witness")
    cert = Certificate(
        direction,
        roles["u"],
        r=roles["r"] or None,
        eta=roles["eta"] or None,
        eprime=EPrime(tuple(cells)) if cells else None,
    )
    return cert, meta


def _parse_alt_scale(lp):
    lp.expect("(")
    scales = []
    if not lp.at(";"):
        while True:
            scales.append(lp.rational())
            if lp.at(";"):
                break
            lp.expect(",")
    lp.expect(";")
    c = lp.rational()
    lp.expect(")")
    return AltScale(tuple(scales), c)


def serialize_certificate(cert: Certificate, header=()) -> str:
    lines = [h if h.startswith("#") else f"# {h}" for h in header]
    lines.append(f"direction {cert.direction}")
    for role, table in (("u", cert.u), ("r", cert.r), ("eta", cert.eta)):
        if not table:
            continue
        for pred, w in table.items():
            params = ", ".join(w.variables)
            pieces = " ; ".join(
                f"[{_guard_text(g)}] ({_value_text(v)})" for g, v in w.pieces
            )
            lines.append(f"{role} {pred}({params}) = {pieces}")
    if cert.eprime is not None:
        for pred, cell in cert.eprime.cells:
            alts = " | ".join(
                "({}; {})".format(
                    ", ".join(str(s) for s in a.call_scales)
                    + (" " if a.call_scales else ""),
                    a.const_scale,
                )
                for a in cell.alts
            )
            lines.append(
                f"scale {pred} branch {cell.branch_index} "
                f"[{_guard_text(cell.guard)}] = {alts}"
            )
    return "\n".join(lines) + "\n"


def certificate_has_exp(cert: Certificate) -> bool:
    """True when any witness piece carries a genuine exponential term."""
    for table in (cert.u, cert.r or {}, cert.eta or {}):
        for w in table.values():
            for _, v in w.pieces:
                if isinstance(v, ExpPoly) and v.exps:
                    return True
    return False


# ---------------------------------------------------------------------------
# cwp manifests
# ---------------------------------------------------------------------------
@dataclass
class CwpManifest:
    """The two systems of a conditional analysis plus their certificates.

    ``lower1``/``lower2``/``upper2`` are (path, claimed bound) pairs; bounds
    apply to each system's query formula at its stated state.  ``truncate``
    gives the grid for pointwise checking of exponential witnesses.
    """

    system1: str
    system2: str
    lower1: tuple
    lower2: tuple
    upper2: tuple | None = None
    truncate: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)


def parse_cwp_manifest(text, where="<cwp>"):
    sys1 = sys2 = None
    certs = {}
    truncate = {}
    meta = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            if line.startswith("# bench:"):
                meta.update(_parse_meta(line))
            continue
        parts = line.split()
        loc = f"{where}:{n}"
        if parts[0] == "system" and len(parts) == 3 and parts[1] in ("1", "2"):
            if parts[1] == "1":
                sys1 = parts[2]
            else:
                sys2 = parts[2]
        elif parts[0] == "cert" and len(parts) == 5:
            which, role, path, bound = parts[1:]
            if which not in ("1", "2") or role not in ("lower", "upper"):
                raise InputError(f"{loc}: unknown certificate role {which} {role}")
            if (which, role) == ("1", "upper"):
                raise InputError(f"{loc}: only lower certificates apply to system 1")
            try:
                b = Fraction(bound)
            except ValueError:
                raise InputError(f"{loc}: bad bound {bound!r}") from None
            certs[(which, role)] = (path, b)
        elif parts[0] == "truncate" and len(parts) == 4:
            try:
                truncate[parts[1]] = (Fraction(parts[2]), Fraction(parts[3]))
            except ValueError:
                raise InputError(f"{loc}: bad truncation bounds") from None
        else:
            raise InputError(f"{loc}: cannot read manifest line {line!r}")
    missing = [
        what
        for what, present in (
            ("system 1", sys1),
            ("system 2", sys2),
            ("cert 1 lower", certs.get(("1", "lower"))),
            ("cert 2 lower", certs.get(("2", "lower"))),
        )
        if present is None
    ]
    if missing:
        raise InputError(f"{where}: manifest is missing {', '.join(missing)}")
    return CwpManifest(
        system1=sys1,
        system2=sys2,
        lower1=certs[("1", "lower")],
        lower2=certs[("2", "lower")],
        upper2=certs.get(("2", "upper")),
        truncate=truncate,
        meta=meta,
    )


def serialize_cwp_manifest(m: CwpManifest, header=()) -> str:
    lines = [h if h.startswith("#") else f"# {h}" for h in header]
    lines.append(f"system 1 {m.system1}")
    lines.append(f"system 2 {m.system2}")
    lines.append(f"cert 1 lower {m.lower1[0]} {m.lower1[1]}")
    lines.append(f"cert 2 lower {m.lower2[0]} {m.lower2[1]}")
    if m.upper2 is not None:
        lines.append(f"cert 2 upper {m.upper2[0]} {m.upper2[1]}")
    for v in m.truncate:
        lo, hi = m.truncate[v]
        lines.append(f"truncate {v} {lo} {hi}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# path-based helpers
# ---------------------------------------------------------------------------
def load_system(path):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_system(fh.read(), where=str(path))


def load_certificate(path):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_certificate(fh.read(), where=str(path))


def load_cwp_manifest(path):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_cwp_manifest(fh.read(), where=str(path))
