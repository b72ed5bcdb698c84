"""Linear ordinary differential operators in normal form.

An operator is stored as ``{k: c_k}`` meaning ``sum_k c_k(x) D^k`` with all
coefficients to the left of the derivatives.  Composition moves
derivatives right through multiplications with the general Leibniz rule

    D^k f = sum_j C(k, j) f^(j) D^(k-j).

Words such as ``J^alpha D J^beta D J^gamma`` are an input format only.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import Mapping

from .symexpr import (
    ZERO_EXPR,
    CanonicalPoly,
    Expr,
    FragmentError,
    Func,
    ProfileBinding,
    Verdict,
    add,
    as_expr,
    canonicalize,
    differentiate,
    expr_equal,
    mul,
    parse_expr,
)


@dataclass(frozen=True)
class LinDiffOp:
    """``sum_k coeffs[k] * D^k``; structurally-zero coefficients are dropped."""

    terms: tuple  # ((order, coefficient), ...) sorted by order

    def __init__(self, coeffs: Mapping[int, object] | None = None):
        items = []
        for k, c in sorted((coeffs or {}).items()):
            if k < 0:
                raise ValueError("derivative order must be >= 0")
            c = as_expr(c)
            if c != ZERO_EXPR:
                items.append((int(k), c))
        object.__setattr__(self, "terms", tuple(items))

    @property
    def coeffs(self) -> dict:
        return dict(self.terms)

    def coeff(self, k: int) -> Expr:
        return self.coeffs.get(k, ZERO_EXPR)

    @property
    def order(self) -> int:
        return self.terms[-1][0] if self.terms else -1

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other):
        return op_add(self, as_op(other))

    def __radd__(self, other):
        return op_add(as_op(other), self)

    def __sub__(self, other):
        return op_add(self, op_scale(-1, as_op(other)))

    def __neg__(self):
        return op_scale(-1, self)

    def __matmul__(self, other):
        return op_compose(self, as_op(other))

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for k, c in reversed(self.terms):
            d = "" if k == 0 else ("D" if k == 1 else f"D^{k}")
            parts.append(f"({c})" + (f"*{d}" if d else ""))
        return " + ".join(parts)

    def __repr__(self):
        return f"LinDiffOp({self})"


ZERO_OP = LinDiffOp()
IDENTITY = LinDiffOp({0: 1})
D = LinDiffOp({1: 1})


def multiplication(f) -> LinDiffOp:
    """The operator ``psi -> f * psi``."""
    return LinDiffOp({0: as_expr(f)})


def derivative(k: int = 1) -> LinDiffOp:
    return LinDiffOp({k: 1})


def as_op(value) -> LinDiffOp:
    if isinstance(value, LinDiffOp):
        return value
    return multiplication(value)


def op_add(A: LinDiffOp, B: LinDiffOp) -> LinDiffOp:
    out = dict(A.terms)
    for k, c in B.terms:
        out[k] = add(out[k], c) if k in out else c
    return LinDiffOp(out)


def op_scale(s, A: LinDiffOp) -> LinDiffOp:
    s = as_expr(s)
    return LinDiffOp({k: mul(s, c) for k, c in A.terms})


def op_compose(A: LinDiffOp, B: LinDiffOp) -> LinDiffOp:
    """``A o B`` in normal form."""
    out: dict = {}
    for k, ck in A.terms:
        for m, bm in B.terms:
            deriv = bm
            for j in range(k + 1):
                if j:
                    deriv = differentiate(deriv)
                out.setdefault(k - j + m, []).append(mul(comb(k, j), ck, deriv))
    return LinDiffOp({k: _collected(add(*v)) for k, v in out.items()})


def _collected(e: Expr) -> Expr:
    # keeps repeated compositions from growing uncollected trees
    try:
        return canonicalize(e).to_expr()
    except FragmentError:
        return e


def parse_word(text: str) -> list:
    """Split a whitespace-separated word such as ``J^alpha D J^beta D J^gamma``.

    ``D`` is the derivative; every other token is parsed as a multiplier.
    """
    return [D if tok == "D" else multiplication(parse_expr(tok)) for tok in text.split()]


def op_from_word(word) -> LinDiffOp:
    """Compose a word left to right.  Tokens are operators (``D``,
    ``multiplication(f)``) or anything :func:`as_op` accepts; a string is
    parsed with :func:`parse_word`."""
    if isinstance(word, str):
        word = parse_word(word)
    out = IDENTITY
    for tok in word:
        out = op_compose(out, as_op(tok))
    return out


def apply(A: LinDiffOp, target: str = "psi") -> Expr:
    """``A`` acting on the function symbol ``target``."""
    return add(*(mul(c, Func(target, k)) for k, c in A.terms))


def formal_adjoint(A: LinDiffOp) -> LinDiffOp:
    """``sum_k (-1)^k D^k o c_k`` renormalised."""
    out = ZERO_OP
    for k, c in A.terms:
        out = op_add(out, op_scale((-1) ** k, op_compose(derivative(k), multiplication(c))))
    return out


def canonical_coeffs(A: LinDiffOp) -> dict:
    """``{k: CanonicalPoly}`` with zero coefficients removed."""
    out = {}
    for k, c in A.terms:
        p = canonicalize(c)
        if not p.is_zero():
            out[k] = p
    return out


def simplify(A: LinDiffOp) -> LinDiffOp:
    """Same operator with canonical (expanded, collected) coefficients."""
    return LinDiffOp({k: p.to_expr() for k, p in canonical_coeffs(A).items()})


@dataclass(frozen=True)
class OpVerdict:
    equal: bool
    by_order: dict  # order -> Verdict

    def __bool__(self):
        return self.equal

    @property
    def method(self) -> str:
        methods = {v.method for v in self.by_order.values()}
        return "exact" if methods <= {"exact"} else "numeric"

    def differences(self) -> dict:
        return {k: v.difference for k, v in self.by_order.items() if v.difference is not None}


def op_equal(A: LinDiffOp, B: LinDiffOp, binding: ProfileBinding | None = None) -> OpVerdict:
    """Order-by-order :func:`expr_equal` of the coefficients."""
    A, B = as_op(A), as_op(B)
    ca, cb = A.coeffs, B.coeffs
    by_order = {k: expr_equal(ca.get(k, ZERO_EXPR), cb.get(k, ZERO_EXPR), binding) for k in sorted(set(ca) | set(cb))}
    return OpVerdict(all(v.equal for v in by_order.values()), by_order)


__all__ = [
    "CanonicalPoly", "D", "IDENTITY", "LinDiffOp", "OpVerdict", "Verdict", "ZERO_OP",
    "apply", "as_op", "canonical_coeffs", "derivative", "formal_adjoint", "multiplication",
    "op_add", "op_compose", "op_equal", "op_from_word", "op_scale", "parse_word", "simplify",
]
