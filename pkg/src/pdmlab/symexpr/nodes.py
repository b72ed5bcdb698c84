"""Expression tree for scalar functions of the coordinate ``x``.

Nodes are immutable and hashable.  Python ``==`` is *structural* equality;
mathematical equality is decided by :func:`pdmlab.symexpr.expr_equal`.

The smart constructors :func:`add`, :func:`mul` and :func:`power` flatten
nested sums/products and fold rational constants, but never collect like
terms.  Collection is the job of :mod:`pdmlab.symexpr.canonical`.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction


FUNCTION_NAMES = frozenset({"J", "J1", "J2", "J3", "eps", "psi"})
ELEMENTARY = frozenset({"sin", "cos", "exp", "log"})

# printing precedence
_P_ADD, _P_MUL, _P_NEG, _P_POW, _P_ATOM = 1, 2, 3, 4, 5


class Expr:
    __slots__ = ()

    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return add(self, neg(other))

    def __rsub__(self, other):
        return add(other, neg(self))

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __truediv__(self, other):
        return mul(self, power(other, -1))

    def __rtruediv__(self, other):
        return mul(other, power(self, -1))

    def __pow__(self, other):
        return power(self, other)

    def __neg__(self):
        return neg(self)

    def __str__(self):
        return _fmt(self)[0]


@dataclass(frozen=True, repr=False)
class Num(Expr):
    value: Fraction

    def __repr__(self):
        return f"Num({self.value})"


@dataclass(frozen=True, repr=False)
class X(Expr):
    def __repr__(self):
        return "X()"


@dataclass(frozen=True, repr=False)
class Param(Expr):
    name: str

    def __repr__(self):
        return f"Param({self.name!r})"


@dataclass(frozen=True, repr=False)
class Func(Expr):
    """Abstract function symbol ``name`` differentiated ``order`` times."""

    name: str
    order: int = 0

    def __post_init__(self):
        if self.name not in FUNCTION_NAMES:
            raise ValueError(f"unknown function symbol {self.name!r}")
        if self.order < 0:
            raise ValueError("derivative order must be >= 0")

    def __repr__(self):
        return f"Func({self.name!r}, {self.order})"


@dataclass(frozen=True, repr=False)
class Add(Expr):
    terms: tuple

    def __repr__(self):
        return "Add(" + ", ".join(map(repr, self.terms)) + ")"


@dataclass(frozen=True, repr=False)
class Mul(Expr):
    factors: tuple

    def __repr__(self):
        return "Mul(" + ", ".join(map(repr, self.factors)) + ")"


@dataclass(frozen=True, repr=False)
class Pow(Expr):
    base: Expr
    exp: Expr

    def __repr__(self):
        return f"Pow({self.base!r}, {self.exp!r})"


@dataclass(frozen=True, repr=False)
class Call(Expr):
    fn: str
    arg: Expr

    def __post_init__(self):
        if self.fn not in ELEMENTARY:
            raise ValueError(f"unknown elementary function {self.fn!r}")

    def __repr__(self):
        return f"Call({self.fn!r}, {self.arg!r})"


ZERO = Num(Fraction(0))
ONE = Num(Fraction(1))


def as_expr(value) -> Expr:
    if isinstance(value, Expr):
        return value
    if isinstance(value, bool):
        raise TypeError("bool is not an expression")
    if isinstance(value, (int, Fraction)):
        return Num(Fraction(value))
    if isinstance(value, float):
        # repr gives the shortest decimal that round-trips: 0.3 -> 3/10
        return Num(Fraction(repr(value)))
    if isinstance(value, str):
        from .parser import parse_expr

        return parse_expr(value)
    raise TypeError(f"cannot convert {type(value).__name__} to an expression")


def const(value) -> Num:
    return Num(Fraction(value))


def add(*terms) -> Expr:
    out = []
    total = Fraction(0)
    for t in map(as_expr, terms):
        parts = t.terms if isinstance(t, Add) else (t,)
        for p in parts:
            if isinstance(p, Num):
                total += p.value
            else:
                out.append(p)
    if total != 0 or not out:
        out.append(Num(total))
    return out[0] if len(out) == 1 else Add(tuple(out))


def mul(*factors) -> Expr:
    out = []
    coeff = Fraction(1)
    for f in map(as_expr, factors):
        parts = f.factors if isinstance(f, Mul) else (f,)
        for p in parts:
            if isinstance(p, Num):
                coeff *= p.value
            else:
                out.append(p)
    if coeff == 0:
        return ZERO
    if coeff != 1 or not out:
        out.insert(0, Num(coeff))
    return out[0] if len(out) == 1 else Mul(tuple(out))


def _is_int(e: Expr) -> bool:
    return isinstance(e, Num) and e.value.denominator == 1


def power(base, exp) -> Expr:
    base, exp = as_expr(base), as_expr(exp)
    if exp == ZERO:
        return ONE
    if exp == ONE:
        return base
    if base == ONE:
        return ONE
    if isinstance(base, Num) and _is_int(exp):
        n = exp.value.numerator
        if base.value != 0 or n > 0:
            return Num(base.value**n)
    if isinstance(base, Pow) and _is_int(exp):
        # (b^e)^n = b^(e*n) holds for integer n on every branch
        return power(base.base, mul(base.exp, exp))
    return Pow(base, exp)


def neg(e) -> Expr:
    return mul(-1, e)


def call(fn: str, arg) -> Expr:
    return Call(fn, as_expr(arg))


def sin(arg):
    return call("sin", arg)


def cos(arg):
    return call("cos", arg)


def exp(arg):
    return call("exp", arg)


def log(arg):
    return call("log", arg)


x = X()
J = Func("J")
J1 = Func("J1")
J2 = Func("J2")
J3 = Func("J3")
eps = Func("eps")
psi = Func("psi")


# ---------------------------------------------------------------- traversal


def walk(e: Expr):
    yield e
    if isinstance(e, Add):
        for t in e.terms:
            yield from walk(t)
    elif isinstance(e, Mul):
        for f in e.factors:
            yield from walk(f)
    elif isinstance(e, Pow):
        yield from walk(e.base)
        yield from walk(e.exp)
    elif isinstance(e, Call):
        yield from walk(e.arg)


def depends_on_x(e: Expr) -> bool:
    return any(isinstance(n, (X, Func)) for n in walk(e))


def function_symbols(e: Expr) -> set:
    return {(n.name, n.order) for n in walk(e) if isinstance(n, Func)}


def parameters(e: Expr) -> set:
    return {n.name for n in walk(e) if isinstance(n, Param)}


def rebuild(e: Expr, leaf) -> Expr:
    """Rebuild ``e`` bottom-up, replacing each leaf node by ``leaf(node)``."""
    if isinstance(e, Add):
        return add(*(rebuild(t, leaf) for t in e.terms))
    if isinstance(e, Mul):
        return mul(*(rebuild(f, leaf) for f in e.factors))
    if isinstance(e, Pow):
        return power(rebuild(e.base, leaf), rebuild(e.exp, leaf))
    if isinstance(e, Call):
        return Call(e.fn, rebuild(e.arg, leaf))
    return leaf(e)


# ------------------------------------------------------------ differentiation


def differentiate(e, times: int = 1) -> Expr:
    """Exact d/dx.  ``Func(name, k)`` becomes ``Func(name, k + 1)``."""
    e = as_expr(e)
    for _ in range(times):
        e = _d(e)
    return e


def _d(e: Expr) -> Expr:
    if isinstance(e, (Num, Param)):
        return ZERO
    if isinstance(e, X):
        return ONE
    if isinstance(e, Func):
        return Func(e.name, e.order + 1)
    if isinstance(e, Add):
        return add(*(_d(t) for t in e.terms))
    if isinstance(e, Mul):
        fs = e.factors
        return add(*(mul(*fs[:i], _d(f), *fs[i + 1 :]) for i, f in enumerate(fs)))
    if isinstance(e, Pow):
        b, p = e.base, e.exp
        if not depends_on_x(p):
            return mul(p, power(b, add(p, -1)), _d(b))
        return mul(e, add(mul(_d(p), log(b)), mul(p, _d(b), power(b, -1))))
    if isinstance(e, Call):
        u, du = e.arg, _d(e.arg)
        if e.fn == "sin":
            return mul(cos(u), du)
        if e.fn == "cos":
            return mul(-1, sin(u), du)
        if e.fn == "exp":
            return mul(e, du)
        return mul(du, power(u, -1))  # log
    raise TypeError(f"not an expression: {e!r}")


def substitute(e, functions=None, params=None) -> Expr:
    """Replace function symbols by expressions (derivatives follow) and
    parameters by expressions."""
    functions = {k: as_expr(v) for k, v in (functions or {}).items()}
    params = {k: as_expr(v) for k, v in (params or {}).items()}
    cache = {}

    def leaf(n):
        if isinstance(n, Func) and n.name in functions:
            key = (n.name, n.order)
            if key not in cache:
                cache[key] = differentiate(functions[n.name], n.order)
            return cache[key]
        if isinstance(n, Param) and n.name in params:
            return params[n.name]
        return n

    return rebuild(as_expr(e), leaf)


def taylor(f: Expr, shift, order: int = 2) -> Expr:
    """Truncated Taylor polynomial of ``f(x + shift)`` about ``x``."""
    shift = as_expr(shift)
    terms = []
    deriv = as_expr(f)
    fact = 1
    for n in range(order + 1):
        if n:
            deriv = differentiate(deriv)
            fact *= n
        terms.append(mul(Fraction(1, fact), power(shift, n), deriv))
    return add(*terms)




# ------------------------------------------------------------------ printing


def _fmt_num(v: Fraction):
    if v.denominator == 1:
        return (str(v.numerator), _P_ATOM if v >= 0 else _P_NEG)
    return (f"{v.numerator}/{v.denominator}", _P_MUL if v > 0 else _P_NEG)


def _wrap(part, min_prec):
    text, prec = part
    return f"({text})" if prec < min_prec else text


def _fmt(e: Expr):
    """Return (text, precedence) with the minimum parenthesisation that
    re-parses to the same value."""
    if isinstance(e, Num):
        return _fmt_num(e.value)
    if isinstance(e, X):
        return ("x", _P_ATOM)
    if isinstance(e, Param):
        return (e.name, _P_ATOM)
    if isinstance(e, Func):
        return (e.name + "'" * e.order, _P_ATOM)
    if isinstance(e, Call):
        return (f"{e.fn}({_fmt(e.arg)[0]})", _P_ATOM)
    if isinstance(e, Pow):
        if isinstance(e.exp, Num) and e.exp.value == -1:
            return ("1/" + _wrap(_fmt(e.base), _P_POW), _P_MUL)
        base = _wrap(_fmt(e.base), _P_ATOM)
        ex = _wrap(_fmt(e.exp), _P_ATOM)
        return (f"{base}^{ex}", _P_POW)
    if isinstance(e, Mul):
        fs = list(e.factors)
        sign = ""
        if isinstance(fs[0], Num) and fs[0].value < 0:
            sign = "-"
            c = -fs[0].value
            fs = fs[1:] if c == 1 else [Num(c)] + fs[1:]
        num, den = [], []
        for f in fs:
            if isinstance(f, Pow) and isinstance(f.exp, Num) and f.exp.value == -1:
                den.append(_wrap(_fmt(f.base), _P_POW))
            else:
                num.append(_wrap(_fmt(f), _P_NEG if not num else _P_POW))
        text = "*".join(num) if num else "1"
        for d in den:
            text += "/" + d
        prec = _P_MUL if den or len(num) > 1 else _P_NEG
        return (sign + text, prec)
    if isinstance(e, Add):
        pieces = []
        for i, t in enumerate(e.terms):
            text, prec = _fmt(t)
            if i and text.startswith("-") and prec >= _P_NEG - 1:
                pieces.append(" - " + text[1:])
            elif i:
                pieces.append(" + " + text)
            else:
                pieces.append(text)
        return ("".join(pieces), _P_ADD)
    raise TypeError(f"not an expression: {e!r}")
