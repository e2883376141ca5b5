"""Tiny expression language for scalar functions of s or (x, y, z).

Grammar (whitespace-insensitive, ^ is right-associative and binds
tighter than unary minus):

    expr   := term  (('+'|'-') term)*
    term   := unary (('*'|'/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?
    atom   := NUMBER | FUNC '(' expr ')' | VARIABLE | '(' expr ')'

Variables are s, x, y, z; functions are sin, cos, tan, sinh, cosh, exp,
ln, sqrt, abs.  ASTs are immutable; `diff` returns exact symbolic
derivatives with constant folding only.  Evaluation accepts floats or
numpy arrays and raises ExprEvalError on domain violations instead of
propagating NaN.
"""

from __future__ import annotations

import numpy as np

from .errors import ExprEvalError, ExprSyntaxError

VARIABLES = ("s", "x", "y", "z")
FUNCTIONS = {
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "sinh": np.sinh,
    "cosh": np.cosh,
    "exp": np.exp,
    "ln": np.log,
    "sqrt": np.sqrt,
    "abs": np.abs,
}


class Expr:
    """Base AST node."""

    def eval(self, **bindings):
        raise NotImplementedError

    def diff(self, var):
        raise NotImplementedError

    def __call__(self, **bindings):
        return self.eval(**bindings)


class Num(Expr):
    def __init__(self, value):
        self.value = float(value)

    def eval(self, **bindings):
        return self.value

    def diff(self, var):
        return Num(0.0)

    def __str__(self):
        if self.value < 0:
            return f"({self.value!r})"
        return repr(self.value)


class Var(Expr):
    def __init__(self, name):
        self.name = name

    def eval(self, **bindings):
        try:
            return bindings[self.name]
        except KeyError:
            raise ExprEvalError("unbound variable", self.name) from None

    def diff(self, var):
        return Num(1.0 if self.name == var else 0.0)

    def __str__(self):
        return self.name


class Neg(Expr):
    def __init__(self, arg):
        self.arg = arg

    def eval(self, **bindings):
        return -self.arg.eval(**bindings)

    def diff(self, var):
        return neg(self.arg.diff(var))

    def __str__(self):
        return f"(-{self.arg})"


class Bin(Expr):
    def __init__(self, op, left, right):
        self.op = op
        self.left = left
        self.right = right

    def eval(self, **bindings):
        a = self.left.eval(**bindings)
        b = self.right.eval(**bindings)
        if self.op == "+":
            return a + b
        if self.op == "-":
            return a - b
        if self.op == "*":
            return a * b
        if self.op == "/":
            if np.any(b == 0):
                raise ExprEvalError("division by zero", str(self.right))
            return a / b
        # power: integer literal exponents keep sign freedom of the base,
        # anything else requires a positive base for real semantics
        if isinstance(self.right, Num) and float(self.right.value).is_integer():
            return a ** int(self.right.value)
        if np.any(a <= 0):
            raise ExprEvalError("non-integer power of non-positive base", str(self.left))
        return a ** b

    def diff(self, var):
        da = self.left.diff(var)
        db = self.right.diff(var)
        if self.op == "+":
            return add(da, db)
        if self.op == "-":
            return sub(da, db)
        if self.op == "*":
            return add(mul(da, self.right), mul(self.left, db))
        if self.op == "/":
            return div(sub(mul(da, self.right), mul(self.left, db)),
                       pow_(self.right, Num(2.0)))
        if isinstance(self.right, Num):
            c = self.right.value
            return mul(mul(Num(c), pow_(self.left, Num(c - 1.0))), da)
        # d(u^v) = u^v * (v' ln u + v u'/u)
        return mul(pow_(self.left, self.right),
                   add(mul(db, Fun("ln", self.left)),
                       div(mul(self.right, da), self.left)))

    def __str__(self):
        return f"({self.left} {self.op} {self.right})"


class Fun(Expr):
    def __init__(self, name, arg):
        self.name = name
        self.arg = arg

    def eval(self, **bindings):
        u = self.arg.eval(**bindings)
        if self.name == "ln" and np.any(u <= 0):
            raise ExprEvalError("ln of non-positive value", str(self.arg))
        if self.name == "sqrt" and np.any(u < 0):
            raise ExprEvalError("sqrt of negative value", str(self.arg))
        return FUNCTIONS[self.name](u)

    def diff(self, var):
        u = self.arg
        du = u.diff(var)
        if self.name == "sin":
            outer = Fun("cos", u)
        elif self.name == "cos":
            outer = neg(Fun("sin", u))
        elif self.name == "tan":
            outer = div(Num(1.0), pow_(Fun("cos", u), Num(2.0)))
        elif self.name == "sinh":
            outer = Fun("cosh", u)
        elif self.name == "cosh":
            outer = Fun("sinh", u)
        elif self.name == "exp":
            outer = Fun("exp", u)
        elif self.name == "ln":
            outer = div(Num(1.0), u)
        elif self.name == "sqrt":
            outer = div(Num(1.0), mul(Num(2.0), Fun("sqrt", u)))
        else:  # abs: u/|u| is +-1 away from 0 and errors at 0 via div
            outer = div(u, Fun("abs", u))
        return mul(outer, du)

    def __str__(self):
        return f"{self.name}({self.arg})"


# ---------------------------------------------------------------------------
# smart constructors: constant folding and literal 0/1 identities


def _isnum(e, v=None):
    return isinstance(e, Num) and (v is None or e.value == v)


def add(a, b):
    if _isnum(a) and _isnum(b):
        return Num(a.value + b.value)
    if _isnum(a, 0.0):
        return b
    if _isnum(b, 0.0):
        return a
    return Bin("+", a, b)


def sub(a, b):
    if _isnum(a) and _isnum(b):
        return Num(a.value - b.value)
    if _isnum(b, 0.0):
        return a
    if _isnum(a, 0.0):
        return neg(b)
    return Bin("-", a, b)


def mul(a, b):
    if _isnum(a) and _isnum(b):
        return Num(a.value * b.value)
    if _isnum(a, 0.0) or _isnum(b, 0.0):
        return Num(0.0)
    if _isnum(a, 1.0):
        return b
    if _isnum(b, 1.0):
        return a
    return Bin("*", a, b)


def div(a, b):
    if _isnum(b) and b.value != 0.0 and _isnum(a):
        return Num(a.value / b.value)
    if _isnum(a, 0.0) and not _isnum(b, 0.0):
        return Num(0.0)
    if _isnum(b, 1.0):
        return a
    return Bin("/", a, b)


def pow_(a, b):
    if _isnum(b, 1.0):
        return a
    if _isnum(b, 0.0):
        return Num(1.0)
    if _isnum(a) and _isnum(b) and float(b.value).is_integer():
        return Num(a.value ** int(b.value))
    return Bin("^", a, b)


def neg(a):
    if _isnum(a):
        return Num(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


# ---------------------------------------------------------------------------
# parser


class _Parser:
    def __init__(self, text):
        self.text = text
        self.pos = 0

    def error(self, message):
        raise ExprSyntaxError(message, self.pos)

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self):
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def take(self, ch):
        if self.peek() == ch:
            self.pos += 1
            return True
        return False

    def parse(self):
        node = self.expr()
        self.skip_ws()
        if self.pos != len(self.text):
            self.error(f"unexpected character {self.text[self.pos]!r}")
        return node

    def expr(self):
        node = self.term()
        while True:
            if self.take("+"):
                node = Bin("+", node, self.term())
            elif self.take("-"):
                node = Bin("-", node, self.term())
            else:
                return node

    def term(self):
        node = self.unary()
        while True:
            if self.take("*"):
                node = Bin("*", node, self.unary())
            elif self.take("/"):
                node = Bin("/", node, self.unary())
            else:
                return node

    def unary(self):
        if self.take("-"):
            return Neg(self.unary())
        return self.power()

    def power(self):
        node = self.atom()
        if self.take("^"):
            return Bin("^", node, self.unary())
        return node

    def atom(self):
        ch = self.peek()
        if ch == "(":
            self.pos += 1
            node = self.expr()
            if not self.take(")"):
                self.error("expected ')'")
            return node
        if ch.isdigit() or ch == ".":
            return self.number()
        if ch.isalpha() or ch == "_":
            return self.ident()
        self.error("expected a number, variable, function or '('"
                   if ch else "unexpected end of input")

    def number(self):
        start = self.pos
        text = self.text
        while self.pos < len(text) and (text[self.pos].isdigit() or text[self.pos] == "."):
            self.pos += 1
        if self.pos < len(text) and text[self.pos] in "eE":
            mark = self.pos
            self.pos += 1
            if self.pos < len(text) and text[self.pos] in "+-":
                self.pos += 1
            if self.pos < len(text) and text[self.pos].isdigit():
                while self.pos < len(text) and text[self.pos].isdigit():
                    self.pos += 1
            else:
                self.pos = mark  # not an exponent after all
        try:
            return Num(float(text[start:self.pos]))
        except ValueError:
            self.pos = start
            self.error(f"bad number literal {text[start:self.pos + 1]!r}")

    def ident(self):
        start = self.pos
        text = self.text
        while self.pos < len(text) and (text[self.pos].isalnum() or text[self.pos] == "_"):
            self.pos += 1
        name = text[start:self.pos]
        if name in FUNCTIONS:
            if not self.take("("):
                self.error(f"function {name!r} needs parentheses")
            node = self.expr()
            if not self.take(")"):
                self.error("expected ')'")
            return Fun(name, node)
        if name in VARIABLES:
            return Var(name)
        self.pos = start
        self.error(f"unknown identifier {name!r}")


def parse(text):
    """Parse expression text into an Expr AST."""
    if not text or not text.strip():
        raise ExprSyntaxError("empty expression", 0)
    return _Parser(text).parse()


def differentiate(e, var):
    """Exact symbolic derivative of e with respect to var."""
    if var not in VARIABLES:
        raise ValueError(f"unknown variable {var!r}")
    return e.diff(var)


def evaluate(e, **bindings):
    """Evaluate an AST with the given variable bindings."""
    return e.eval(**bindings)
