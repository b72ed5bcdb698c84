"""Canonical polynomial form for the algebraic fragment of ScalarExpr.

A :class:`CanonicalPoly` is a sum of monomials over function symbols
``(name, order)``.  Each coefficient is a :class:`ParamPoly`, an ordinary
polynomial in the named parameters with exact rational coefficients.

Monomial exponents are themselves ``ParamPoly`` values.  Integers cover
terms like ``J'^2/J``; parameter-valued exponents are needed to house
``J^alpha`` before the constraint ``alpha + beta + gamma = 1`` collapses
them back to integers.  Two canonical forms are equal iff their term maps
are identical, so canonicalising a difference decides equality on the
fragment.
"""

from __future__ import annotations

from fractions import Fraction

from .nodes import (
    Add,
    Call,
    Expr,
    Func,
    Mul,
    Num,
    Param,
    Pow,
    X,
    add,
    as_expr,
    mul,
    power,
)


class FragmentError(ValueError):
    """The expression lies outside the canonicalisable fragment."""

    def __init__(self, message: str, node: Expr):
        self.node = node
        super().__init__(f"{message}: {node}")


def _merge(a: dict, b: dict, combine) -> dict:
    out = dict(a)
    for k, v in b.items():
        out[k] = combine(out[k], v) if k in out else v
    return out


class ParamPoly:
    """Polynomial in named scalar parameters with rational coefficients.

    Keys are sorted tuples ``((name, power), ...)``; the empty tuple is the
    constant term.
    """

    __slots__ = ("terms", "_key")

    def __init__(self, terms=None):
        terms = {k: Fraction(v) for k, v in (terms or {}).items() if v != 0}
        self.terms = terms
        self._key = tuple(sorted(terms.items()))

    @classmethod
    def const(cls, value) -> ParamPoly:
        return cls({(): Fraction(value)})

    @classmethod
    def var(cls, name: str) -> ParamPoly:
        return cls({((name, 1),): Fraction(1)})

    def __eq__(self, other):
        return isinstance(other, ParamPoly) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __lt__(self, other):
        return self._key < other._key

    def __bool__(self):
        return bool(self.terms)

    def is_constant(self) -> bool:
        return not self.terms or set(self.terms) == {()}

    def constant(self) -> Fraction:
        return self.terms.get((), Fraction(0))

    def __add__(self, other):
        return ParamPoly(_merge(self.terms, other.terms, lambda p, q: p + q))

    def __neg__(self):
        return ParamPoly({k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        out: dict = {}
        for ka, va in self.terms.items():
            for kb, vb in other.terms.items():
                k = _mono_mul(ka, kb)
                out[k] = out.get(k, 0) + va * vb
        return ParamPoly(out)

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power of a parameter polynomial")
        out = ParamPoly.const(1)
        for _ in range(n):
            out = out * self
        return out

    def degree_in(self, name: str) -> int:
        return max((dict(k).get(name, 0) for k in self.terms), default=0)

    def part_of_degree(self, name: str, deg: int) -> ParamPoly:
        return ParamPoly({k: v for k, v in self.terms.items() if dict(k).get(name, 0) == deg})

    def to_expr(self) -> Expr:
        out = []
        for k, v in self._key:
            out.append(mul(v, *(power(Param(n), p) for n, p in k)))
        return add(*out)

    def __repr__(self):
        return f"ParamPoly({self.to_expr()})"


def _mono_mul(a: tuple, b: tuple) -> tuple:
    d = dict(a)
    for name, p in b:
        d[name] = d.get(name, 0) + p
    return tuple(sorted((n, p) for n, p in d.items() if p != 0))


def _fmono_mul(a: tuple, b: tuple) -> tuple:
    d = dict(a)
    for sym, p in b:
        d[sym] = d[sym] + p if sym in d else p
    return tuple(sorted(((s, p) for s, p in d.items() if p), key=lambda t: (t[0], t[1]._key)))


class CanonicalPoly:
    """Finite map from function-symbol monomial to nonzero ParamPoly.

    A monomial is a sorted tuple ``(((name, order), exponent), ...)`` with
    ``exponent`` a nonzero ParamPoly.
    """

    __slots__ = ("terms", "_key")

    def __init__(self, terms=None):
        terms = {k: v for k, v in (terms or {}).items() if v}
        self.terms = terms
        self._key = tuple(sorted(terms.items(), key=lambda kv: _mono_key(kv[0])))

    @classmethod
    def const(cls, value) -> CanonicalPoly:
        return cls({(): ParamPoly.const(value)})

    @classmethod
    def coeff(cls, p: ParamPoly) -> CanonicalPoly:
        return cls({(): p})

    @classmethod
    def symbol(cls, name: str, order: int = 0) -> CanonicalPoly:
        return cls({(((name, order), ParamPoly.const(1)),): ParamPoly.const(1)})

    def __eq__(self, other):
        return isinstance(other, CanonicalPoly) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def is_zero(self) -> bool:
        return not self.terms

    def __len__(self):
        return len(self.terms)

    def __add__(self, other):
        return CanonicalPoly(_merge(self.terms, other.terms, lambda p, q: p + q))

    def __neg__(self):
        return CanonicalPoly({k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        out: dict = {}
        for ka, va in self.terms.items():
            for kb, vb in other.terms.items():
                k = _fmono_mul(ka, kb)
                out[k] = out[k] + va * vb if k in out else va * vb
        return CanonicalPoly(out)

    def scalar_part(self) -> ParamPoly | None:
        """The ParamPoly if this polynomial has no function symbols."""
        if not self.terms:
            return ParamPoly()
        if set(self.terms) == {()}:
            return self.terms[()]
        return None

    def truncate(self, name: str, max_degree: int) -> CanonicalPoly:
        """Drop every term of degree > ``max_degree`` in parameter ``name``."""
        out = {}
        for k, v in self.terms.items():
            out[k] = ParamPoly({pk: c for pk, c in v.terms.items() if dict(pk).get(name, 0) <= max_degree})
        return CanonicalPoly(out)

    def part_of_degree(self, name: str, deg: int) -> CanonicalPoly:
        return CanonicalPoly({k: v.part_of_degree(name, deg) for k, v in self.terms.items()})

    def collect_linear(self, name: str) -> dict:
        """Split a polynomial linear in the derivatives of ``name``.

        Returns ``{order: cofactor}``; raises if any term is not exactly
        linear in one derivative of ``name``.
        """
        out: dict = {}
        for mono, c in self.terms.items():
            hits = [(s, p) for s, p in mono if s[0] == name]
            if len(hits) != 1 or hits[0][1] != ParamPoly.const(1):
                raise ValueError(f"term is not linear in {name}: {_mono_expr(mono)}")
            (sym, _), = hits
            rest = tuple(t for t in mono if t[0] != sym)
            out.setdefault(sym[1], {})[rest] = c
        return {k: CanonicalPoly(v) for k, v in sorted(out.items())}

    def to_expr(self) -> Expr:
        return add(*(mul(c.to_expr(), _mono_expr(m)) for m, c in self._key))

    def __str__(self):
        return str(self.to_expr())

    def __repr__(self):
        return f"CanonicalPoly({self})"


def _mono_key(mono):
    return tuple((s, p._key) for s, p in mono)


def _mono_expr(mono) -> Expr:
    return mul(*(power(Func(n, k), p.to_expr()) for (n, k), p in mono))


def _power(base: CanonicalPoly, p: ParamPoly, node: Expr) -> CanonicalPoly:
    if p.is_constant() and p.constant().denominator == 1 and p.constant() >= 0:
        out = CanonicalPoly.const(1)
        for _ in range(int(p.constant())):
            out = out * base
        return out
    if base.is_zero():
        raise FragmentError("zero raised to a negative or symbolic power", node)
    if len(base) != 1:
        raise FragmentError("sum raised to a negative or symbolic power", node)
    (mono, c), = base.terms.items()
    integral = p.is_constant() and p.constant().denominator == 1
    if integral:
        if not c.is_constant():
            raise FragmentError("parameter polynomial in a denominator", node)
        n = int(p.constant())
        newc = ParamPoly.const(c.constant() ** n)
        return CanonicalPoly({tuple((s, e * p) for s, e in mono): newc})
    # non-integer power: only a bare function symbol, keeping one branch
    if c != ParamPoly.const(1) or len(mono) != 1 or mono[0][1] != ParamPoly.const(1):
        raise FragmentError("non-integer power of a compound expression", node)
    return CanonicalPoly({((mono[0][0], p),): ParamPoly.const(1)})


def canonicalize(e) -> CanonicalPoly:
    """Expand and collect ``e`` into canonical form (exact arithmetic)."""
    return _canon(as_expr(e))


def _canon(e: Expr) -> CanonicalPoly:
    if isinstance(e, Num):
        return CanonicalPoly.const(e.value)
    if isinstance(e, Param):
        return CanonicalPoly.coeff(ParamPoly.var(e.name))
    if isinstance(e, Func):
        return CanonicalPoly.symbol(e.name, e.order)
    if isinstance(e, Add):
        out = CanonicalPoly()
        for t in e.terms:
            out = out + _canon(t)
        return out
    if isinstance(e, Mul):
        out = CanonicalPoly.const(1)
        for f in e.factors:
            out = out * _canon(f)
            if out.is_zero():
                break
        return out
    if isinstance(e, Pow):
        p = _canon(e.exp).scalar_part()
        if p is None:
            raise FragmentError("exponent depends on a function symbol", e)
        return _power(_canon(e.base), p, e)
    if isinstance(e, X):
        raise FragmentError("coordinate x is outside the canonical fragment", e)
    if isinstance(e, Call):
        raise FragmentError("elementary call is outside the canonical fragment", e)
    raise TypeError(f"not an expression: {e!r}")


def is_canonicalizable(e: Expr) -> bool:
    try:
        canonicalize(e)
    except FragmentError:
        return False
    return True
