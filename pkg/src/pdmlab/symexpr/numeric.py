"""Floating-point evaluation of expressions and the equality verdict."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .canonical import CanonicalPoly, FragmentError, canonicalize
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
    differentiate,
    function_symbols,
    neg,
)

SINGULAR_THRESHOLD = 1e-300
DEFAULT_PARAMS = {"pi": math.pi}


class EvalError(ArithmeticError):
    pass


class UnboundSymbolError(EvalError, KeyError):
    def __str__(self):
        return self.args[0]


class SingularityError(EvalError):
    pass


class UndecidableError(ValueError):
    pass


class ProfileBinding:
    """Concrete closed forms for function symbols plus parameter values.

    Derivatives of bound profiles are produced by symbolic differentiation
    and memoised per instance.  ``domain`` is the sampling interval used
    by numeric equality checks.
    """

    def __init__(self, functions: Mapping | None = None, params: Mapping | None = None, domain=(0.0, 1.0)):
        self.functions = {k: as_expr(v) for k, v in (functions or {}).items()}
        for name, f in self.functions.items():
            if function_symbols(f):
                raise ValueError(f"profile for {name} must be closed-form, got {f}")
        self.params = {**DEFAULT_PARAMS, **{k: float(v) for k, v in (params or {}).items()}}
        self.domain = (float(domain[0]), float(domain[1]))
        self._derivs: dict = {}

    def derivative(self, name: str, order: int) -> Expr:
        key = (name, order)
        if key not in self._derivs:
            if name not in self.functions:
                raise UnboundSymbolError(f"function symbol {name!r} is not bound")
            base = self.functions[name] if order == 0 else differentiate(self.derivative(name, order - 1))
            self._derivs[key] = base
        return self._derivs[key]

    def with_params(self, **params) -> ProfileBinding:
        return ProfileBinding(self.functions, {**self.params, **params}, self.domain)

    def __repr__(self):
        fs = ", ".join(f"{k}={v}" for k, v in self.functions.items())
        return f"ProfileBinding({fs}; {self.params})"


def _is_integral(v) -> bool:
    return bool(np.all(np.imag(v) == 0) and np.all(np.real(v) == np.round(np.real(v))))


def _ev(e: Expr, b: ProfileBinding, x):
    if isinstance(e, Num):
        return float(e.value)
    if isinstance(e, X):
        return x
    if isinstance(e, Param):
        try:
            return b.params[e.name]
        except KeyError:
            raise UnboundSymbolError(f"parameter {e.name!r} is not bound") from None
    if isinstance(e, Func):
        return _ev(b.derivative(e.name, e.order), b, x)
    if isinstance(e, Add):
        out = _ev(e.terms[0], b, x)
        for t in e.terms[1:]:
            out = out + _ev(t, b, x)
        return out
    if isinstance(e, Mul):
        out = _ev(e.factors[0], b, x)
        for f in e.factors[1:]:
            out = out * _ev(f, b, x)
        return out
    if isinstance(e, Pow):
        base = _ev(e.base, b, x)
        ex = _ev(e.exp, b, x)
        if np.any(np.real(ex) < 0) and np.any(np.abs(base) < SINGULAR_THRESHOLD):
            raise SingularityError(f"division by zero in {e}")
        if np.any(np.real(base) < 0) and not _is_integral(ex):
            # principal branch; J^a * J^b = J^(a+b) stays consistent on it
            base = np.asarray(base, dtype=complex)
        return np.power(base, ex)
    if isinstance(e, Call):
        u = _ev(e.arg, b, x)
        if e.fn == "sin":
            return np.sin(u)
        if e.fn == "cos":
            return np.cos(u)
        if e.fn == "exp":
            return np.exp(u)
        if np.any(np.abs(u) < SINGULAR_THRESHOLD):
            raise SingularityError(f"log of zero in {e}")
        if np.any(np.real(u) < 0):
            u = np.asarray(u, dtype=complex)
        return np.log(u)
    raise TypeError(f"not an expression: {e!r}")


def evaluate(e, binding: ProfileBinding | None = None, x=0.0):
    """Evaluate ``e`` at ``x`` (a float or an array of floats).

    Complex intermediates from fractional powers of negative values are
    allowed; the final value must be real to 1e-9 relative.
    """
    binding = binding or ProfileBinding()
    scalar = np.ndim(x) == 0
    xv = float(x) if scalar else np.asarray(x, dtype=float)
    with np.errstate(all="ignore"):
        v = _ev(as_expr(e), binding, xv)
    v = np.asarray(v)
    if np.iscomplexobj(v):
        if np.any(np.abs(v.imag) > 1e-9 * np.maximum(1.0, np.abs(v.real))):
            raise EvalError(f"non-real value of {e}")
        v = v.real
    if not np.all(np.isfinite(v)):
        raise SingularityError(f"non-finite value of {e}")
    if scalar:
        return float(v)
    return np.broadcast_to(v, np.shape(xv)).astype(float)


def quasi_random_points(n: int, lo: float, hi: float) -> np.ndarray:
    """Golden-ratio (Kronecker) low-discrepancy sequence on (lo, hi)."""
    g = (math.sqrt(5.0) - 1.0) / 2.0
    u = (0.5 + g * np.arange(1, n + 1)) % 1.0
    return lo + (hi - lo) * u


@dataclass(frozen=True)
class Verdict:
    equal: bool
    method: str  # "exact" or "numeric"
    difference: CanonicalPoly | None = None
    max_deviation: float | None = None
    detail: str = field(default="")

    def __bool__(self):
        return self.equal


NUMERIC_POINTS = 32
NUMERIC_RTOL = 1e-10


def expr_equal(e1, e2, binding: ProfileBinding | None = None) -> Verdict:
    """Decide ``e1 == e2``.

    Exact when both sides canonicalise; otherwise sampled at 32
    quasi-random points of ``binding.domain`` with relative tolerance
    1e-10 (relative to the largest sampled magnitude).
    """
    e1, e2 = as_expr(e1), as_expr(e2)
    diff = add(e1, neg(e2))
    try:
        d = canonicalize(diff)
    except FragmentError as err:
        if binding is None:
            raise UndecidableError(f"cannot decide equality without a binding ({err})") from err
    else:
        return Verdict(d.is_zero(), "exact", difference=d, detail="" if d.is_zero() else str(d))
    xs = quasi_random_points(NUMERIC_POINTS, *binding.domain)
    v1 = evaluate(e1, binding, xs)
    v2 = evaluate(e2, binding, xs)
    scale = max(np.max(np.abs(v1)), np.max(np.abs(v2)), np.finfo(float).tiny)
    dev = float(np.max(np.abs(v1 - v2)) / scale)
    return Verdict(dev <= NUMERIC_RTOL, "numeric", max_deviation=dev, detail=f"max relative deviation {dev:.3e}")
