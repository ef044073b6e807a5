"""Parsing for a small probabilistic guarded-command language.

Concrete grammar (EBNF; whitespace and // line comments are skipped):

    program ::= decl* stmt
    decl    ::= ("int" | "real") ident ("," ident)* ";"
    stmt    ::= atom (";" atom)* (";")?
    atom    ::= "skip"
              | "diverge"                         -- while(true){skip}
              | "tick" ("(" ["-"] rational ")")?  -- plain tick costs 1
              | "score" "(" expr ")"
              | "observe" "(" bexpr ")"
              | ident ":=" expr
              | "if" "(" bexpr ")" block ("else" block)?
              | "while" "(" bexpr ")" block
              | block ("[" expr "]" block | "<>" block)?
    block   ::= "{" stmt "}"
    bexpr   ::= bterm ("||" bterm)*
    bterm   ::= bfact ("&&" bfact)*
    bfact   ::= "!" bfact | "true" | "false"
              | "(" bexpr ")" | expr cmp expr
    cmp     ::= "<=" | "<" | ">=" | ">" | "=" | "!="
    expr    ::= term (("+" | "-") term)*
    term    ::= factor ("*" factor)*
    factor  ::= rational | ident | "(" expr ")" | "-" factor
    rational::= digits ("/" digits)?

Probabilities in "[p]" may be any expression; the translator checks that they
are provably within [0, 1].  Undeclared variables default to sort int.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .eqsys import FALSE, TRUE, BAnd, BNot, BOr, Cmp
from .poly import Polynomial

_KEYWORDS = {
    "skip", "diverge", "tick", "score", "observe", "if", "else", "while",
    "true", "false", "int", "real",
}

_TOKEN = re.compile(
    r"""(?P<ws>\s+|//[^\n]*)
      | (?P<num>\d+(?:/\d+)?)
      | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
      | (?P<op>:=|<=|>=|!=|&&|\|\||<>|[-+*(){}\[\];,<>=!])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # num | ident | op | eof
    text: str
    line: int
    col: int


def _tokenize(text):
    tokens = []
    line, col, pos = 1, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise SyntaxError(f"unexpected character {text[pos]!r} at {line}:{col}")
        lexeme = m.group(0)
        if m.lastgroup != "ws":
            kind = m.lastgroup
            if kind == "ident" and lexeme in _KEYWORDS:
                kind = "op"
            tokens.append(Token(kind, lexeme, line, col))
        newlines = lexeme.count("\n")
        if newlines:
            line += newlines
            col = len(lexeme) - lexeme.rfind("\n")
        else:
            col += len(lexeme)
        pos = m.end()
    tokens.append(Token("eof", "", line, col))
    return tokens


# ---------------------------------------------------------------------------
# abstract syntax
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class Skip:
    pass


@dataclass(frozen=True)
class Seq:
    first: object
    second: object


@dataclass(frozen=True)
class Assign:
    var: str
    expr: Polynomial


@dataclass(frozen=True)
class ProbChoice:
    prob: Polynomial
    left: object
    right: object


@dataclass(frozen=True)
class Nondet:
    left: object
    right: object


@dataclass(frozen=True)
class IfStmt:
    cond: object
    then: object
    other: object


@dataclass(frozen=True)
class While:
    cond: object
    body: object
    line: int
    col: int


@dataclass(frozen=True)
class Tick:
    amount: Fraction


@dataclass(frozen=True)
class Score:
    weight: Polynomial


@dataclass(frozen=True)
class Observe:
    cond: object


@dataclass(frozen=True)
class PgclProgram:
    variables: tuple  # of (name, sort), declaration/first-use order
    body: object


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------
class _Parser:
    def __init__(self, text):
        self.tokens = _tokenize(text)
        self.i = 0
        self.declared = []
        self.sorts = {}

    # -- token plumbing ----------------------------------------------------
    def peek(self, ahead=0) -> Token:
        return self.tokens[min(self.i + ahead, len(self.tokens) - 1)]

    def next(self) -> Token:
        t = self.tokens[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def at(self, text) -> bool:
        return self.peek().text == text and self.peek().kind in ("op",)

    def eat(self, text) -> Token:
        t = self.next()
        if t.text != text:
            raise SyntaxError(
                f"expected {text!r}, found {t.text or 'end of input'!r}"
                f" at {t.line}:{t.col}"
            )
        return t

    def fail(self, msg) -> SyntaxError:
        t = self.peek()
        return SyntaxError(f"{msg} at {t.line}:{t.col}")

    def touch_var(self, name):
        if name not in self.sorts:
            self.sorts[name] = "int"
            self.declared.append(name)

    # -- program -----------------------------------------------------------
    def program(self) -> PgclProgram:
        while self.at("int") or self.at("real"):
            sort = self.next().text
            while True:
                t = self.next()
                if t.kind != "ident":
                    raise SyntaxError(f"expected variable name at {t.line}:{t.col}")
                if t.text in self.sorts:
                    raise SyntaxError(
                        f"variable {t.text} declared twice at {t.line}:{t.col}"
                    )
                self.sorts[t.text] = sort
                self.declared.append(t.text)
                if not self.at(","):
                    break
                self.eat(",")
            self.eat(";")
        body = self.stmt()
        t = self.peek()
        if t.kind != "eof":
            raise SyntaxError(f"trailing input {t.text!r} at {t.line}:{t.col}")
        variables = tuple((v, self.sorts[v]) for v in self.declared)
        return PgclProgram(variables, body)

    def stmt(self):
        node = self.atom()
        while self.at(";"):
            self.eat(";")
            if self.peek().text in ("}", "") or self.peek().kind == "eof":
                break
            node = Seq(node, self.atom())
        return node

    def block(self):
        self.eat("{")
        node = self.stmt()
        self.eat("}")
        return node

    def atom(self):
        t = self.peek()
        if self.at("skip"):
            self.next()
            return Skip()
        if self.at("diverge"):
            self.next()
            return While(TRUE, Skip(), t.line, t.col)
        if self.at("tick"):
            self.next()
            if not self.at("("):
                return Tick(Fraction(1))
            self.eat("(")
            neg = False
            if self.at("-"):
                self.next()
                neg = True
            num = self.next()
            if num.kind != "num":
                raise SyntaxError(
                    f"tick needs a rational constant at {num.line}:{num.col}"
                )
            self.eat(")")
            amount = Fraction(num.text)
            return Tick(-amount if neg else amount)
        if self.at("score"):
            self.next()
            self.eat("(")
            e = self.expr()
            self.eat(")")
            return Score(e)
        if self.at("observe"):
            self.next()
            self.eat("(")
            b = self.bexpr()
            self.eat(")")
            return Observe(b)
        if self.at("if"):
            self.next()
            self.eat("(")
            cond = self.bexpr()
            self.eat(")")
            then = self.block()
            other = Skip()
            if self.at("else"):
                self.next()
                other = self.block()
            return IfStmt(cond, then, other)
        if self.at("while"):
            self.next()
            self.eat("(")
            cond = self.bexpr()
            self.eat(")")
            body = self.block()
            return While(cond, body, t.line, t.col)
        if self.at("{"):
            left = self.block()
            if self.at("["):
                self.eat("[")
                p = self.expr()
                self.eat("]")
                right = self.block()
                return ProbChoice(p, left, right)
            if self.at("<>"):
                self.eat("<>")
                right = self.block()
                return Nondet(left, right)
            return left
        if t.kind == "ident":
            self.next()
            self.eat(":=")
            e = self.expr()
            self.touch_var(t.text)
            return Assign(t.text, e)
        raise self.fail(f"expected a statement, found {t.text!r}")

    # -- boolean expressions -------------------------------------------------
    def bexpr(self):
        parts = [self.bterm()]
        while self.at("||"):
            self.next()
            parts.append(self.bterm())
        return parts[0] if len(parts) == 1 else BOr(tuple(parts))

    def bterm(self):
        parts = [self.bfact()]
        while self.at("&&"):
            self.next()
            parts.append(self.bfact())
        return parts[0] if len(parts) == 1 else BAnd(tuple(parts))

    def bfact(self):
        if self.at("!"):
            self.next()
            return BNot(self.bfact())
        if self.at("true"):
            self.next()
            return TRUE
        if self.at("false"):
            self.next()
            return FALSE
        if self.at("("):
            mark = self.i
            try:
                self.eat("(")
                inner = self.bexpr()
                self.eat(")")
            except SyntaxError:
                self.i = mark
            else:
                if self.peek().text not in ("<", "<=", ">", ">=", "=", "!="):
                    return inner
                self.i = mark
        return self.comparison()

    def comparison(self):
        lhs = self.expr()
        t = self.next()
        if t.text not in ("<", "<=", ">", ">=", "=", "!="):
            raise SyntaxError(f"expected a comparison at {t.line}:{t.col}")
        rhs = self.expr()
        return Cmp(lhs, t.text, rhs)

    # -- arithmetic expressions ----------------------------------------------
    def expr(self) -> Polynomial:
        node = self.term()
        while self.at("+") or self.at("-"):
            if self.next().text == "+":
                node = node + self.term()
            else:
                node = node - self.term()
        return node

    def term(self) -> Polynomial:
        node = self.factor()
        while self.at("*"):
            self.next()
            node = node * self.factor()
        return node

    def factor(self) -> Polynomial:
        t = self.peek()
        if self.at("-"):
            self.next()
            return -self.factor()
        if t.kind == "num":
            self.next()
            return Polynomial.const(Fraction(t.text))
        if t.kind == "ident":
            self.next()
            self.touch_var(t.text)
            return Polynomial.var(t.text)
        if self.at("("):
            self.eat("(")
            node = self.expr()
            self.eat(")")
            return node
        raise self.fail(f"expected an expression, found {t.text!r}")


def parse_pgcl(text: str) -> PgclProgram:
    """Parse source text; raises SyntaxError with line:column on bad input."""
    return _Parser(text).program()
