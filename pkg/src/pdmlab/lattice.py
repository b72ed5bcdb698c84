"""Exact tight-binding chain with open (hard-wall) ends."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .symexpr import Expr, ProfileBinding, as_expr, evaluate


class ProfileSignError(ValueError):
    """Hopping profile vanishes or changes sign where it is sampled."""


@dataclass(frozen=True, eq=False)
class SymTridiag:
    """Real symmetric tridiagonal matrix: ``diag`` (N) and ``off`` (N-1)."""

    diag: np.ndarray
    off: np.ndarray

    def __post_init__(self):
        d = np.array(self.diag, dtype=float).reshape(-1)
        e = np.array(self.off, dtype=float).reshape(-1)
        if d.size < 1 or e.size != d.size - 1:
            raise ValueError(f"need N >= 1 diagonal and N-1 off-diagonal entries, got {d.size} and {e.size}")
        if not (np.all(np.isfinite(d)) and np.all(np.isfinite(e))):
            raise ValueError("matrix entries must be finite")
        d.flags.writeable = False
        e.flags.writeable = False
        object.__setattr__(self, "diag", d)
        object.__setattr__(self, "off", e)

    @property
    def n(self) -> int:
        return self.diag.size

    def to_dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.off, 1) + np.diag(self.off, -1)

    def matvec(self, v: np.ndarray) -> np.ndarray:
        out = self.diag * v
        out[:-1] += self.off * v[1:]
        out[1:] += self.off * v[:-1]
        return out

    def gershgorin(self) -> tuple[float, float]:
        r = np.zeros(self.n)
        r[:-1] += np.abs(self.off)
        r[1:] += np.abs(self.off)
        return float(np.min(self.diag - r)), float(np.max(self.diag + r))

    def spectral_width(self) -> float:
        lo, hi = self.gershgorin()
        return max(hi - lo, np.finfo(float).tiny)

    def shifted(self, c: float) -> SymTridiag:
        return SymTridiag(self.diag + c, self.off)

    def __eq__(self, other):
        return (
            isinstance(other, SymTridiag)
            and np.array_equal(self.diag, other.diag)
            and np.array_equal(self.off, other.off)
        )


def check_sign_definite(values: np.ndarray, what: str = "J") -> int:
    """Return the common sign of ``values``; raise if any is zero or signs mix."""
    if values.size == 0:
        return 0
    signs = np.sign(values)
    if np.any(signs == 0) or np.any(signs != signs[0]):
        raise ProfileSignError(f"{what} must be nonzero and of one sign on the sampled positions")
    return int(signs[0])


@dataclass(frozen=True)
class ChainSpec:
    """Chain of ``N`` sites at ``x_i = x1 + (i-1) a``.

    With the default ``x1 = a`` the sites fill (0, L), ``L = (N+1) a``,
    and the missing sites 0 and N+1 act as Dirichlet walls.  ``params``
    binds extra parameters used by the profiles; ``a`` and ``L`` are
    always bound.
    """

    N: int
    a: float
    J_profile: Expr
    eps_profile: Expr = field(default_factory=lambda: as_expr(0))
    convention: str = "left"
    x1: float | None = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be >= 1")
        if not self.a > 0:
            raise ValueError("a must be > 0")
        if self.convention not in ("left", "right", "midpoint"):
            raise ValueError(f"unknown convention {self.convention!r}")
        object.__setattr__(self, "J_profile", as_expr(self.J_profile))
        object.__setattr__(self, "eps_profile", as_expr(self.eps_profile))

    @property
    def first_site(self) -> float:
        return self.a if self.x1 is None else float(self.x1)

    @property
    def length(self) -> float:
        return (self.N + 1) * self.a

    def positions(self) -> np.ndarray:
        return self.first_site + self.a * np.arange(self.N)

    def hopping_positions(self) -> np.ndarray:
        xs = self.positions()[:-1]
        shift = {"left": 0.0, "right": self.a, "midpoint": 0.5 * self.a}[self.convention]
        return xs + shift

    def binding(self) -> ProfileBinding:
        params = {"L": self.length, **self.params, "a": self.a}
        return ProfileBinding({"J": self.J_profile, "eps": self.eps_profile}, params, (0.0, self.length))


def build_chain(spec: ChainSpec) -> SymTridiag:
    """Matrix of ``J_i c_{i+1} + J_{i-1} c_{i-1} + eps_i c_i`` on sites 1..N."""
    b = spec.binding()
    diag = evaluate(spec.eps_profile, b, spec.positions())
    off = evaluate(spec.J_profile, b, spec.hopping_positions())
    check_sign_definite(off)
    return SymTridiag(diag, off)
