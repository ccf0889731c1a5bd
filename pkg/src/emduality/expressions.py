"""Tiny expression language for matrix entries of period maps.

Supports complex literals (via the imaginary unit ``i``), the chart symbols
``tau`` and ``conj(tau)`` on upper-half-plane charts, real coordinates
``x1..xk`` on flat charts, the four arithmetic operators, unary minus,
parentheses and integer powers (``^`` or ``**``).  Expressions evaluate to
complex numbers and carry exact directional derivatives.
"""

from __future__ import annotations

from dataclasses import dataclass

POLE_EPS = 1e-13


class ExprSyntaxError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{message} (line {line}, column {col})")
        self.line = line
        self.col = col


class UnknownSymbolError(ExprSyntaxError):
    pass


class ExprPoleError(ArithmeticError):
    """Evaluation hit a (near-)zero denominator."""


# ---------------------------------------------------------------- AST nodes

@dataclass(frozen=True)
class Num:
    value: complex


@dataclass(frozen=True)
class Sym:
    name: str


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * /
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: int


Expr = Num | Sym | Neg | BinOp | Pow


def evaluate(e: Expr, env: dict[str, complex]) -> complex:
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Sym):
        return env[e.name]
    if isinstance(e, Neg):
        return -evaluate(e.arg, env)
    if isinstance(e, Pow):
        b = evaluate(e.base, env)
        if e.exponent < 0 and abs(b) < POLE_EPS:
            raise ExprPoleError(f"base ~ 0 raised to power {e.exponent}")
        return b ** e.exponent
    l = evaluate(e.left, env)
    r = evaluate(e.right, env)
    if e.op == "+":
        return l + r
    if e.op == "-":
        return l - r
    if e.op == "*":
        return l * r
    if abs(r) < POLE_EPS:
        raise ExprPoleError("division by ~ 0")
    return l / r


def derivative(e: Expr, env: dict[str, complex], denv: dict[str, complex]) -> complex:
    """Directional derivative; denv gives the derivative of each symbol."""
    if isinstance(e, Num):
        return 0j
    if isinstance(e, Sym):
        return denv.get(e.name, 0j)
    if isinstance(e, Neg):
        return -derivative(e.arg, env, denv)
    if isinstance(e, Pow):
        if e.exponent == 0:
            return 0j
        b = evaluate(e.base, env)
        if e.exponent < 1 and abs(b) < POLE_EPS:
            raise ExprPoleError(f"base ~ 0 raised to power {e.exponent - 1}")
        return e.exponent * b ** (e.exponent - 1) * derivative(e.base, env, denv)
    l, r = e.left, e.right
    if e.op == "+":
        return derivative(l, env, denv) + derivative(r, env, denv)
    if e.op == "-":
        return derivative(l, env, denv) - derivative(r, env, denv)
    lv, rv = evaluate(l, env), evaluate(r, env)
    ld, rd = derivative(l, env, denv), derivative(r, env, denv)
    if e.op == "*":
        return ld * rv + lv * rd
    if abs(rv) < POLE_EPS:
        raise ExprPoleError("division by ~ 0")
    return (ld * rv - lv * rd) / (rv * rv)


def symbols_of(e: Expr) -> set[str]:
    if isinstance(e, Num):
        return set()
    if isinstance(e, Sym):
        return {e.name}
    if isinstance(e, Neg):
        return symbols_of(e.arg)
    if isinstance(e, Pow):
        return symbols_of(e.base)
    return symbols_of(e.left) | symbols_of(e.right)


# ---------------------------------------------------------------- printing

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "pow": 4, "atom": 5}


def _print(e: Expr) -> tuple[str, int]:
    if isinstance(e, Num):
        v = e.value
        if v.imag == 0:
            s = _fmt_real(v.real)
            return (s, _PREC["atom"] if v.real >= 0 else _PREC["neg"])
        if v.real == 0:
            if v.imag == 1:
                return ("i", _PREC["atom"])
            return (f"{_fmt_real(v.imag)}*i", _PREC["*"])
        re, im = _fmt_real(v.real), _fmt_real(v.imag)
        return (f"({re} + {im}*i)" if v.imag >= 0 else f"({re} - {_fmt_real(-v.imag)}*i)",
                _PREC["atom"])
    if isinstance(e, Sym):
        return ("conj(tau)" if e.name == "ctau" else e.name, _PREC["atom"])
    if isinstance(e, Neg):
        s, p = _print(e.arg)
        if p < _PREC["neg"]:
            s = f"({s})"
        return (f"-{s}", _PREC["neg"])
    if isinstance(e, Pow):
        s, p = _print(e.base)
        if p < _PREC["atom"]:
            s = f"({s})"
        exp = str(e.exponent) if e.exponent >= 0 else f"({e.exponent})"
        return (f"{s}^{exp}", _PREC["pow"])
    ls, lp = _print(e.left)
    rs, rp = _print(e.right)
    prec = _PREC[e.op]
    if lp < prec:
        ls = f"({ls})"
    # parenthesise right operands at equal precedence so the printed text
    # encodes the tree shape exactly (parse . print == id on parsed forms)
    if rp <= prec:
        rs = f"({rs})"
    return (f"{ls} {e.op} {rs}", prec)


def _fmt_real(x: float) -> str:
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def to_text(e: Expr) -> str:
    return _print(e)[0]


# ------------------------------------------------------- smart constructors
#
# The parser folds constant subtrees, so parsed expressions are in a normal
# form with no Num-only arithmetic left (except divisions by ~0, which stay
# unfolded and raise at evaluation time per the pole policy).

def make_neg(arg: Expr) -> Expr:
    if isinstance(arg, Num):
        return Num(-arg.value)
    return Neg(arg)


def make_pow(base: Expr, exponent: int) -> Expr:
    if isinstance(base, Num):
        if exponent >= 0 or abs(base.value) >= POLE_EPS:
            return Num(base.value ** exponent)
    return Pow(base, exponent)


def make_binop(op: str, left: Expr, right: Expr) -> Expr:
    if isinstance(left, Num) and isinstance(right, Num):
        if op == "+":
            return Num(left.value + right.value)
        if op == "-":
            return Num(left.value - right.value)
        if op == "*":
            return Num(left.value * right.value)
        if abs(right.value) >= POLE_EPS:
            return Num(left.value / right.value)
    return BinOp(op, left, right)


# ---------------------------------------------------------------- tokenizer

@dataclass(frozen=True)
class _Tok:
    kind: str  # num ident op lparen rparen eof
    text: str
    line: int
    col: int


def _tokenize(src: str, line_offset: int = 1) -> list[_Tok]:
    toks = []
    line, col = line_offset, 1
    i = 0
    while i < len(src):
        ch = src[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch.isspace():
            i += 1
            col += 1
            continue
        if ch.isdigit() or (ch == "." and i + 1 < len(src) and src[i + 1].isdigit()):
            j = i
            seen_dot = False
            while j < len(src) and (src[j].isdigit() or (src[j] == "." and not seen_dot)):
                seen_dot = seen_dot or src[j] == "."
                j += 1
            if j < len(src) and src[j] in "eE":
                k = j + 1
                if k < len(src) and src[k] in "+-":
                    k += 1
                if k < len(src) and src[k].isdigit():
                    j = k
                    while j < len(src) and src[j].isdigit():
                        j += 1
            toks.append(_Tok("num", src[i:j], line, col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < len(src) and (src[j].isalnum() or src[j] == "_"):
                j += 1
            toks.append(_Tok("ident", src[i:j], line, col))
            col += j - i
            i = j
            continue
        if src.startswith("**", i):
            toks.append(_Tok("op", "^", line, col))
            i += 2
            col += 2
            continue
        if ch in "+-*/^":
            toks.append(_Tok("op", ch, line, col))
        elif ch == "(":
            toks.append(_Tok("lparen", ch, line, col))
        elif ch == ")":
            toks.append(_Tok("rparen", ch, line, col))
        else:
            raise ExprSyntaxError(f"unexpected character {ch!r}", line, col)
        i += 1
        col += 1
    toks.append(_Tok("eof", "", line, col))
    return toks


class _Parser:
    def __init__(self, toks: list[_Tok], allowed: set[str]):
        self.toks = toks
        self.pos = 0
        self.allowed = allowed

    def peek(self) -> _Tok:
        return self.toks[self.pos]

    def next(self) -> _Tok:
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def expect(self, kind: str, text: str | None = None) -> _Tok:
        t = self.peek()
        if t.kind != kind or (text is not None and t.text != text):
            want = text or kind
            got = t.text or "end of input"
            raise ExprSyntaxError(f"expected {want!r}, got {got!r}", t.line, t.col)
        return self.next()

    def parse(self) -> Expr:
        e = self.expr()
        t = self.peek()
        if t.kind != "eof":
            raise ExprSyntaxError(f"trailing input {t.text!r}", t.line, t.col)
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.next().text
            e = make_binop(op, e, self.term())
        return e

    def term(self) -> Expr:
        e = self.factor()
        while self.peek().kind == "op" and self.peek().text in "*/":
            op = self.next().text
            e = make_binop(op, e, self.factor())
        return e

    def factor(self) -> Expr:
        if self.peek().kind == "op" and self.peek().text == "-":
            self.next()
            return make_neg(self.factor())
        if self.peek().kind == "op" and self.peek().text == "+":
            self.next()
            return self.factor()
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.peek().kind == "op" and self.peek().text == "^":
            self.next()
            sign = 1
            t = self.peek()
            if t.kind == "op" and t.text == "-":
                self.next()
                sign = -1
                t = self.peek()
            if t.kind == "lparen":
                self.next()
                inner_sign = 1
                t = self.peek()
                if t.kind == "op" and t.text == "-":
                    self.next()
                    inner_sign = -1
                    t = self.peek()
                numtok = self.expect("num")
                self.expect("rparen")
                return make_pow(base, sign * inner_sign * self._int_of(numtok))
            numtok = self.expect("num")
            return make_pow(base, sign * self._int_of(numtok))
        return base

    @staticmethod
    def _int_of(t: _Tok) -> int:
        try:
            val = float(t.text)
        except ValueError:
            raise ExprSyntaxError(f"bad number {t.text!r}", t.line, t.col)
        if val != int(val):
            raise ExprSyntaxError("exponent must be an integer", t.line, t.col)
        return int(val)

    def atom(self) -> Expr:
        t = self.next()
        if t.kind == "num":
            return Num(complex(float(t.text)))
        if t.kind == "ident":
            if t.text == "i":
                return Num(1j)
            if t.text == "conj":
                self.expect("lparen")
                inner = self.expect("ident")
                if inner.text != "tau":
                    raise UnknownSymbolError(
                        f"conj() takes only tau, got {inner.text!r}", inner.line, inner.col)
                self.expect("rparen")
                if "tau" not in self.allowed:
                    raise UnknownSymbolError("tau not available on this chart", t.line, t.col)
                return Sym("ctau")
            if t.text in self.allowed:
                return Sym(t.text)
            raise UnknownSymbolError(f"unknown symbol {t.text!r}", t.line, t.col)
        if t.kind == "lparen":
            e = self.expr()
            self.expect("rparen")
            return e
        got = t.text or "end of input"
        raise ExprSyntaxError(f"expected an operand, got {got!r}", t.line, t.col)


def parse(src: str, allowed: set[str] | None = None, line_offset: int = 1) -> Expr:
    """Parse an expression; allowed lists the free symbols permitted."""
    if allowed is None:
        allowed = {"tau"}
    return _Parser(_tokenize(src, line_offset), allowed).parse()
