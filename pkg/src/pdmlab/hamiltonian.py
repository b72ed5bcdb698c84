"""Effective Hamiltonian of the slowly varying chain, its re-orderings, and
exact verifiers for the ordering-invariance identities.

All builders return :class:`~pdmlab.diffop.LinDiffOp` values.  ``J`` and
``eps`` default to the abstract symbols, and ``a`` to the parameter ``a``.
Passing closed-form expressions instead gives the concrete operator.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .diffop import (
    D,
    LinDiffOp,
    OpVerdict,
    formal_adjoint,
    multiplication,
    op_add,
    op_equal,
    op_from_word,
    op_scale,
)
from .symexpr import (
    J as J_SYM,
    J1 as J1_SYM,
    J2 as J2_SYM,
    J3 as J3_SYM,
    Expr,
    Param,
    ProfileBinding,
    add,
    as_expr,
    canonicalize,
    differentiate,
    eps as EPS_SYM,
    evaluate,
    mul,
    power,
    psi as PSI_SYM,
    taylor,
)

A = Param("a")
HALF = Fraction(1, 2)
CONVENTIONS = ("left", "right", "midpoint")


@dataclass(frozen=True)
class OrderingParams:
    """Von Roos exponents.  ``beta`` is derived so the constraint
    ``alpha + beta + gamma = 1`` cannot be violated."""

    alpha: Expr = Param("alpha")
    gamma: Expr = Param("gamma")

    def __post_init__(self):
        object.__setattr__(self, "alpha", as_expr(self.alpha))
        object.__setattr__(self, "gamma", as_expr(self.gamma))

    @property
    def beta(self) -> Expr:
        return add(1, mul(-1, self.alpha), mul(-1, self.gamma))

    @classmethod
    def symbolic(cls) -> OrderingParams:
        return cls()


@dataclass(frozen=True)
class FactorTriple:
    """Factors ``(J1, J2, J3)``; their product *is* the hopping profile."""

    J1: Expr = J1_SYM
    J2: Expr = J2_SYM
    J3: Expr = J3_SYM

    def __post_init__(self):
        for name in ("J1", "J2", "J3"):
            object.__setattr__(self, name, as_expr(getattr(self, name)))

    @property
    def J(self) -> Expr:
        return mul(self.J1, self.J2, self.J3)

    @classmethod
    def from_ordering(cls, p: OrderingParams, J=J_SYM) -> FactorTriple:
        return cls(power(J, p.alpha), power(J, p.beta), power(J, p.gamma))


def _scalar_part(a, J, eps) -> Expr:
    """``a^2/2 J'' - a J' + 2 J + eps``: the potential that goes with D J D."""
    J1 = differentiate(J)
    return add(mul(HALF, power(a, 2), differentiate(J1)), mul(-1, a, J1), mul(2, J), eps)


def effective_hamiltonian(a=A, J=J_SYM, eps=EPS_SYM) -> LinDiffOp:
    """``a^2 D J D + a^2/2 J'' - a J' + 2J + eps`` in normal form."""
    a, J, eps = as_expr(a), as_expr(J), as_expr(eps)
    kinetic = op_scale(power(a, 2), op_from_word([D, multiplication(J), D]))
    return op_add(kinetic, multiplication(_scalar_part(a, J, eps)))


def _symmetrized(f1, f2, f3, a) -> LinDiffOp:
    left = op_from_word([multiplication(f1), D, multiplication(f2), D, multiplication(f3)])
    right = op_from_word([multiplication(f3), D, multiplication(f2), D, multiplication(f1)])
    return op_scale(mul(HALF, power(a, 2)), op_add(left, right))


def vonroos_kinetic(p: OrderingParams | None = None, a=A, J=J_SYM) -> LinDiffOp:
    p = p or OrderingParams()
    J = as_expr(J)
    return _symmetrized(power(J, p.alpha), power(J, p.beta), power(J, p.gamma), as_expr(a))


def vonroos_potential(p: OrderingParams | None = None, a=A, J=J_SYM, eps=EPS_SYM) -> Expr:
    """``a^2/2 (1-alpha-gamma) J'' + a^2 alpha gamma J'^2/J - a J' + 2J + eps``."""
    p = p or OrderingParams()
    a, J, eps = as_expr(a), as_expr(J), as_expr(eps)
    Jp = differentiate(J)
    return add(
        mul(HALF, power(a, 2), p.beta, differentiate(Jp)),
        mul(power(a, 2), p.alpha, p.gamma, power(Jp, 2), power(J, -1)),
        mul(-1, a, Jp),
        mul(2, J),
        eps,
    )


def general_kinetic(t: FactorTriple | None = None, a=A) -> LinDiffOp:
    t = t or FactorTriple()
    return _symmetrized(t.J1, t.J2, t.J3, as_expr(a))


def general_correction(t: FactorTriple) -> Expr:
    """``J1 (J2 J3')' + J3 (J2 J1')'``."""
    d = differentiate
    return add(mul(t.J1, d(mul(t.J2, d(t.J3)))), mul(t.J3, d(mul(t.J2, d(t.J1)))))


def general_potential(t: FactorTriple | None = None, a=A, eps=EPS_SYM) -> Expr:
    t = t or FactorTriple()
    a = as_expr(a)
    return add(_scalar_part(a, t.J, as_expr(eps)), mul(-HALF, power(a, 2), general_correction(t)))


# --------------------------------------------------------------- derivation


@dataclass(frozen=True)
class RecurrenceDerivation:
    convention: str
    operator: LinDiffOp
    first_order: LinDiffOp  # the O(a) part of ``operator``
    discarded_order: int = 3  # terms O(a^3) and beyond were dropped

    @property
    def first_order_term(self) -> Expr:
        return self.first_order.coeff(0)


def _hopping_offset(convention: str, a: Expr) -> Expr:
    if convention == "left":
        return as_expr(0)
    if convention == "right":
        return a
    if convention == "midpoint":
        return mul(HALF, a)
    raise ValueError(f"unknown site convention {convention!r}; expected one of {CONVENTIONS}")


def expand_recurrence(convention: str = "left", a=A) -> RecurrenceDerivation:
    """Continuum limit of ``J_i c_{i+1} + J_{i-1} c_{i-1} + eps_i c_i``.

    ``c_{i+-1}`` and the hopping integrals are replaced by second-order
    Taylor polynomials about ``x_i``; ``J_i`` sits at ``x_i + s`` with ``s``
    fixed by the convention.  The product is truncated at ``a^2``.
    """
    a = as_expr(a)
    if not isinstance(a, Param):
        raise TypeError("expand_recurrence needs the spacing as a symbolic parameter")
    s = _hopping_offset(convention, a)
    c_next = taylor(PSI_SYM, a)
    c_prev = taylor(PSI_SYM, mul(-1, a))
    J_here = taylor(J_SYM, s)
    J_prev = taylor(J_SYM, add(s, mul(-1, a)))
    lhs = add(mul(J_here, c_next), mul(J_prev, c_prev), mul(EPS_SYM, PSI_SYM))
    poly = canonicalize(lhs).truncate(a.name, 2)
    op = LinDiffOp({k: p.to_expr() for k, p in poly.collect_linear("psi").items()})
    first = poly.part_of_degree(a.name, 1)
    first_op = LinDiffOp({k: p.to_expr() for k, p in first.collect_linear("psi").items()}) if not first.is_zero() else LinDiffOp()
    return RecurrenceDerivation(convention, op, first_op)


# ----------------------------------------------------------------- verifiers


@dataclass(frozen=True)
class ProofReport:
    name: str
    equal: bool
    method: str
    differences: dict = field(default_factory=dict)  # order -> canonical difference (text)
    notes: str = ""

    def __bool__(self):
        return self.equal

    def summary(self) -> str:
        verdict = "exact-equal" if self.equal and self.method == "exact" else ("equal" if self.equal else "NOT equal")
        text = f"{self.name}: {verdict} ({self.method})"
        bad = {k: v for k, v in self.differences.items() if v != "0"}
        if bad:
            text += "; nonzero differences " + ", ".join(f"D^{k}: {v}" for k, v in bad.items())
        return text


def report_from(name: str, verdict: OpVerdict, notes: str = "") -> ProofReport:
    diffs = {k: str(v.difference) if v.difference is not None else v.detail for k, v in verdict.by_order.items()}
    return ProofReport(name, verdict.equal, verdict.method, diffs, notes)


def vonroos_total(p: OrderingParams | None = None, a=A, J=J_SYM, eps=EPS_SYM) -> LinDiffOp:
    return op_add(vonroos_kinetic(p, a, J), multiplication(vonroos_potential(p, a, J, eps)))


def general_total(t: FactorTriple | None = None, a=A, eps=EPS_SYM) -> LinDiffOp:
    return op_add(general_kinetic(t, a), multiplication(general_potential(t, a, eps)))


def verify_vonroos_invariance(p: OrderingParams | None = None, a=A) -> ProofReport:
    """T(alpha, gamma) + U(alpha, gamma) against the effective Hamiltonian,
    decided exactly and identically in the exponents."""
    v = op_equal(vonroos_total(p, a), effective_hamiltonian(a))
    return report_from("vonroos-invariance", v)


def verify_general_invariance(t: FactorTriple | None = None, a=A) -> ProofReport:
    t = t or FactorTriple()
    v = op_equal(general_total(t, a), effective_hamiltonian(a, J=t.J))
    return report_from("general-invariance", v)


def is_self_adjoint(op: LinDiffOp, binding: ProfileBinding | None = None) -> OpVerdict:
    return op_equal(formal_adjoint(op), op, binding)


def numeric_spot_check(lhs: LinDiffOp, rhs: LinDiffOp, binding: ProfileBinding, n: int = 100, seed: int = 0) -> float:
    """Largest relative deviation between coefficients of two operators at
    ``n`` random points of ``binding.domain``.

    Coefficients are evaluated as given.  Operators built from closed-form
    profiles in ``x`` keep raw coefficient trees, so the check is then
    independent of canonicalisation.  Deviations are measured relative to
    the largest sampled magnitude of each coefficient.
    """
    rng = random.Random(seed)
    lo, hi = binding.domain
    xs = np.array([rng.uniform(lo, hi) for _ in range(n)])
    worst = 0.0
    for k in sorted(set(lhs.coeffs) | set(rhs.coeffs)):
        u = evaluate(lhs.coeff(k), binding, xs)
        v = evaluate(rhs.coeff(k), binding, xs)
        scale = max(np.max(np.abs(u)), np.max(np.abs(v)), np.finfo(float).tiny)
        worst = max(worst, float(np.max(np.abs(u - v)) / scale))
    return worst
