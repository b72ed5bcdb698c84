"""Symbolic scalar calculus: parse, differentiate, evaluate, canonicalise."""

from .canonical import CanonicalPoly, FragmentError, ParamPoly, canonicalize, is_canonicalizable
from .nodes import (
    ELEMENTARY,
    ONE as ONE_EXPR,
    ZERO as ZERO_EXPR,
    FUNCTION_NAMES,
    Add,
    Call,
    Expr,
    Func,
    J,
    J1,
    J2,
    J3,
    Mul,
    Num,
    Param,
    Pow,
    X,
    add,
    as_expr,
    const,
    cos,
    depends_on_x,
    differentiate,
    eps,
    exp,
    function_symbols,
    log,
    mul,
    neg,
    parameters,
    power,
    psi,
    sin,
    substitute,
    taylor,
    x,
)
from .numeric import (
    EvalError,
    ProfileBinding,
    SingularityError,
    UnboundSymbolError,
    UndecidableError,
    Verdict,
    evaluate,
    expr_equal,
    quasi_random_points,
)
from .parser import ParseError, parse_expr

__all__ = [
    "ONE_EXPR", "ZERO_EXPR", "Add", "Call", "CanonicalPoly", "ELEMENTARY", "EvalError", "Expr", "FUNCTION_NAMES",
    "FragmentError", "Func", "J", "J1", "J2", "J3", "Mul", "Num", "Param", "ParamPoly",
    "ParseError", "Pow", "ProfileBinding", "SingularityError", "UnboundSymbolError",
    "UndecidableError", "Verdict", "X", "add", "as_expr", "canonicalize", "const", "cos",
    "depends_on_x", "differentiate", "eps", "evaluate", "exp", "expr_equal",
    "function_symbols", "is_canonicalizable", "log", "mul", "neg", "parameters",
    "parse_expr", "power", "psi", "quasi_random_points", "sin", "substitute", "taylor", "x",
]
