"""Continuum discretisation and a bisection eigensolver for symmetric
tridiagonal matrices.

The solver counts eigenvalues below a shift with the LDL^T pivot
recurrence ``q_i = (d_i - lam) - e_{i-1}^2 / q_{i-1}`` and bisects on the
Gershgorin interval.  Eigenvectors come from inverse iteration with a
pivoted tridiagonal solve.  ``dense_eig_oracle`` is an independent cyclic
Jacobi method used to validate the fast path.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .diffop import LinDiffOp, op_equal
from .hamiltonian import effective_hamiltonian
from .lattice import SymTridiag, check_sign_definite
from .symexpr import ProfileBinding, as_expr, differentiate, evaluate

DEFAULT_TOL = 1e-12
PIVOT_GUARD = np.finfo(float).tiny


class EigenError(ArithmeticError):
    pass


@dataclass(frozen=True)
class Grid:
    """Interior points ``x0 + j h``, ``j = 1..M``; Dirichlet zeros at
    ``j = 0`` and ``j = M + 1``."""

    x0: float
    h: float
    M: int

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("grid step must be > 0")
        if self.M < 1:
            raise ValueError("grid needs at least one interior point")

    @classmethod
    def for_box(cls, length: float, refine: int, a: float, x0: float = 0.0) -> Grid:
        """Grid with step ``a / refine`` on the box ``(x0, x0 + length)``."""
        h = a / refine
        M = int(round(length / h)) - 1
        return cls(x0, h, M)

    @property
    def right_wall(self) -> float:
        return self.x0 + (self.M + 1) * self.h

    def points(self) -> np.ndarray:
        return self.x0 + self.h * np.arange(1, self.M + 1)

    def midpoints(self) -> np.ndarray:
        """``x_j + h/2`` for ``j = 0..M``."""
        return self.x0 + self.h * (np.arange(self.M + 1) + 0.5)


@dataclass
class SpectrumResult:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None = None  # columns
    residuals: np.ndarray | None = None
    method: dict = field(default_factory=dict)


# ----------------------------------------------------------- discretisation


def discretize_operator(op: LinDiffOp, binding: ProfileBinding, grid: Grid) -> SymTridiag:
    """Symmetric matrix of a formally self-adjoint operator of order <= 2.

    The operator must have the divergence form ``D c2 D + c0``, i.e. its
    first-order coefficient must equal ``c2'``.  ``c2`` is sampled at cell
    midpoints and ``c0`` at nodes.
    """
    if op.order > 2:
        raise ValueError("only operators of order <= 2 can be discretised")
    c2, c1, c0 = op.coeff(2), op.coeff(1), op.coeff(0)
    if not op_equal(LinDiffOp({1: c1}), LinDiffOp({1: differentiate(c2)}), binding):
        raise ValueError("operator is not in divergence form (c1 != c2')")
    h = grid.h
    k = evaluate(c2, binding, grid.midpoints()) / h**2
    if op.order == 2:
        check_sign_definite(k, "second-order coefficient")
    v = evaluate(c0, binding, grid.points())
    diag = -(k[:-1] + k[1:]) + v
    off = k[1:-1]
    return SymTridiag(diag, off)


def discretize_effective(J_profile, eps_profile, a: float, grid: Grid, params: dict | None = None) -> SymTridiag:
    """Second-order divergence-form stencil of the effective Hamiltonian.

    Row j: ``(a^2/h^2) [J(x_j + h/2)(v_{j+1} - v_j) - J(x_j - h/2)(v_j - v_{j-1})]
    + V(x_j) v_j`` with ``V = a^2/2 J'' - a J' + 2J + eps`` differentiated
    symbolically.
    """
    if not grid.h < a:
        raise ValueError("grid step must be smaller than the lattice spacing")
    b = ProfileBinding(
        {"J": as_expr(J_profile), "eps": as_expr(eps_profile)},
        {"L": grid.right_wall - grid.x0, **(params or {}), "a": a},
        (grid.x0, grid.right_wall),
    )
    return discretize_operator(effective_hamiltonian(), b, grid)


# ------------------------------------------------------------------ solver


def _power_of_two_scale(T: SymTridiag) -> float:
    """``2^-e`` with ``max |entry| * 2^-e`` in [1/2, 1); multiplying by it is exact."""
    m = max(float(np.max(np.abs(T.diag))), float(np.max(np.abs(T.off))) if T.n > 1 else 0.0)
    if m == 0.0:
        return 1.0
    return 2.0 ** -np.frexp(m)[1]


def _scaled(T: SymTridiag):
    s = _power_of_two_scale(T)
    return T.diag * s, (T.off * s) ** 2, s


def sturm_count(T: SymTridiag, lam: float) -> int:
    """Number of eigenvalues strictly below ``lam``.

    The matrix is first scaled by a power of two so that its largest entry
    is below one (exact, and no squared off-diagonal can overflow).  Zero
    pivots are then replaced by ``+PIVOT_GUARD`` which, like a shift of
    ``lam`` towards -inf by a negligible amount, makes the count strict.
    """
    d, e2, s = _scaled(T)
    d, e2 = d.tolist(), e2.tolist()
    guard = PIVOT_GUARD
    lam = float(lam) * s
    count = 0
    q = d[0] - lam
    if abs(q) < guard:
        q = guard if q >= 0 else -guard
    if q < 0:
        count += 1
    for i in range(1, len(d)):
        q = d[i] - lam - e2[i - 1] / q
        if abs(q) < guard:
            q = guard if q >= 0 else -guard
        if q < 0:
            count += 1
    return count


def sturm_counts(T: SymTridiag, lams) -> np.ndarray:
    """Vectorised :func:`sturm_count` over an array of shifts."""
    d, e2, s = _scaled(T)
    lams = np.asarray(lams, dtype=float) * s
    guard = PIVOT_GUARD
    count = np.zeros(lams.shape, dtype=np.int64)
    q = np.copysign(np.maximum(np.abs(d[0] - lams), guard), d[0] - lams)
    count += q < 0
    for i in range(1, T.n):
        q = d[i] - lams - e2[i - 1] / q
        q = np.copysign(np.maximum(np.abs(q), guard), q)
        count += q < 0
    return count


def _bisect(T: SymTridiag, indices: np.ndarray, lo: float, hi: float, width: float):
    """Bracket eigenvalue number ``i`` (0-based, ascending) for each index."""
    k = indices.size
    lo_ = np.full(k, lo)
    hi_ = np.full(k, hi)
    sweeps = 0
    vectorised = k > 8
    while True:
        active = (hi_ - lo_) > width
        if not np.any(active):
            break
        mid = 0.5 * (lo_ + hi_)
        # bracket can no longer be split in floating point
        stuck = (mid <= lo_) | (mid >= hi_)
        active &= ~stuck
        if not np.any(active):
            break
        idx = np.flatnonzero(active)
        if vectorised:
            counts = sturm_counts(T, mid[idx])
        else:
            counts = np.array([sturm_count(T, m) for m in mid[idx]])
        below = counts > indices[idx]  # eigenvalue i lies below mid
        hi_[idx[below]] = mid[idx[below]]
        lo_[idx[~below]] = mid[idx[~below]]
        sweeps += 1
    return lo_, hi_, sweeps


def _collisions(vals: np.ndarray) -> np.ndarray:
    """Indices of eigenvalue estimates not strictly above their predecessor
    (and those predecessors)."""
    bad = np.flatnonzero(np.diff(vals) <= 0)
    return np.unique(np.concatenate([bad, bad + 1]))


def lowest_eigenvalues(T: SymTridiag, k: int, tol: float = DEFAULT_TOL, vectors: bool = False, seed: int = 0) -> SpectrumResult:
    """``k`` smallest eigenvalues by Sturm bisection.

    Each eigenvalue is bracketed to width ``<= tol * w`` where ``w`` is the
    Gershgorin width; the midpoint is returned.  With ``vectors=True`` the
    eigenvectors and residuals are added by inverse iteration.
    """
    if not 1 <= k <= T.n:
        raise ValueError(f"k must be in 1..{T.n}, got {k}")
    if not tol > 0:
        raise ValueError("tol must be > 0")
    # exact power-of-two scaling keeps squared off-diagonals from under/overflowing
    scale = _power_of_two_scale(T)
    S = SymTridiag(T.diag * scale, T.off * scale)
    glo, ghi = S.gershgorin()
    width = S.spectral_width()
    pad = 2 * np.finfo(float).eps * max(abs(glo), abs(ghi), 1.0)
    if glo == ghi:
        # all off-diagonals zero and equal diagonal entries (e.g. N = 1)
        lo = hi = np.full(k, glo)
        sweeps = 0
    else:
        lo, hi, sweeps = _bisect(S, np.arange(k), glo - pad, ghi + pad, tol * width)
    vals = 0.5 * (lo + hi)
    collided = _collisions(vals)
    if collided.size:
        # gaps below tol * width: refine those brackets to machine resolution
        rlo, rhi, extra = _bisect(S, collided, glo - pad, ghi + pad, 0.0)
        lo[collided], hi[collided] = rlo, rhi
        vals = 0.5 * (lo + hi)
        sweeps += extra
        numerically_unreduced = np.all(np.abs(S.off) > np.finfo(float).eps * width)
        if numerically_unreduced and _collisions(vals).size:
            raise EigenError("unreduced tridiagonal must have a simple spectrum; brackets collided")
    vals, lo, hi, width = vals / scale, lo / scale, hi / scale, T.spectral_width()
    res = SpectrumResult(
        vals,
        method={
            "method": "sturm-bisection",
            "tol": tol,
            "bracket": float(np.max(hi - lo)),
            "spectral_width": width,
            "sweeps": sweeps,
            "pivot_guard": PIVOT_GUARD,
            "scale": scale,
        },
    )
    if vectors:
        vecs = np.empty((T.n, k))
        resid = np.empty(k)
        iters = []
        for j, lam in enumerate(vals):
            v, r, it = _inverse_iteration(T, lam, tol * width, seed + j)
            vecs[:, j], resid[j] = v, r
            iters.append(it)
        res.eigenvectors, res.residuals = vecs, resid
        res.method.update(seed=seed, inverse_iterations=iters)
    return res


def _solve_tridiagonal(sub: np.ndarray, diag: np.ndarray, sup: np.ndarray, rhs: np.ndarray, guard: float) -> np.ndarray:
    """Gaussian elimination with partial pivoting on a tridiagonal system.

    Exactly singular pivots are replaced by ``guard`` so that inverse
    iteration at a converged eigenvalue still returns a direction.
    """
    n = diag.size
    d = diag.astype(float).copy()
    du = np.zeros(n)
    du[: n - 1] = sup
    du2 = np.zeros(n)  # second superdiagonal created by row swaps
    dl = np.zeros(n)
    dl[: n - 1] = sub
    b = rhs.astype(float).copy()
    for i in range(n - 1):
        if abs(d[i]) >= abs(dl[i]):
            if d[i] == 0.0:
                d[i] = guard
            m = dl[i] / d[i]
            d[i + 1] -= m * du[i]
            b[i + 1] -= m * b[i]
        else:
            # swap rows i and i+1
            m = d[i] / dl[i]
            d[i] = dl[i]
            tmp = d[i + 1]
            d[i + 1] = du[i] - m * tmp
            if i < n - 2:
                du2[i] = du[i + 1]
                du[i + 1] = -m * du[i + 1]
            du[i] = tmp
            b[i], b[i + 1] = b[i + 1], b[i] - m * b[i + 1]
    if d[n - 1] == 0.0:
        d[n - 1] = guard
    y = np.empty(n)
    y[n - 1] = b[n - 1] / d[n - 1]
    if n > 1:
        y[n - 2] = (b[n - 2] - du[n - 2] * y[n - 1]) / d[n - 2]
    for i in range(n - 3, -1, -1):
        y[i] = (b[i] - du[i] * y[i + 1] - du2[i] * y[i + 2]) / d[i]
    return y


MAX_INVERSE_ITERATIONS = 8


def _inverse_iteration(T: SymTridiag, lam: float, target: float, seed: int):
    n = T.n
    if n == 1:
        return np.ones(1), abs(T.diag[0] - lam), 0
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)
    guard = np.finfo(float).eps * T.spectral_width()
    r = np.inf
    for it in range(1, MAX_INVERSE_ITERATIONS + 1):
        y = _solve_tridiagonal(T.off, T.diag - lam, T.off, v, guard)
        nrm = np.linalg.norm(y)
        if not np.isfinite(nrm) or nrm == 0.0:
            raise EigenError("inverse iteration broke down")
        v = y / nrm
        r = float(np.linalg.norm(T.matvec(v) - lam * v))
        if r <= target:
            break
    else:
        raise EigenError(f"inverse iteration did not converge in {MAX_INVERSE_ITERATIONS} steps (residual {r:.3e})")
    if v[np.argmax(np.abs(v))] < 0:
        v = -v
    return v, r, it


def eigenvector(T: SymTridiag, lam: float, tol: float = DEFAULT_TOL, seed: int = 0) -> tuple[np.ndarray, float]:
    """Unit eigenvector for a converged eigenvalue, and its residual.

    Iteration stops once the residual is below ``max(tol, 1e-10)`` times the
    Gershgorin width, so eigenvalues from other sources (closed forms) need
    not be accurate to the bisection tolerance.  The largest-magnitude entry
    is made positive.
    """
    v, r, _ = _inverse_iteration(T, float(lam), max(tol, 1e-10) * T.spectral_width(), seed)
    return v, r


# ------------------------------------------------------------------ oracle

ORACLE_MAX_N = 64


def _round_robin(n: int):
    """Rounds of disjoint index pairs covering every pair once (circle method)."""
    players = list(range(n)) + ([None] if n % 2 else [])
    m = len(players)
    rounds = []
    for _ in range(m - 1):
        pairs = [(players[i], players[m - 1 - i]) for i in range(m // 2)]
        rounds.append([(min(p, q), max(p, q)) for p, q in pairs if p is not None and q is not None])
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def dense_eig_oracle(T: SymTridiag, max_sweeps: int = 60) -> SpectrumResult:
    """Full spectrum by cyclic Jacobi rotations on the dense matrix.

    Each round annihilates a set of disjoint off-diagonal pairs at once
    (round-robin ordering), so one round is one orthogonal similarity.
    """
    n = T.n
    if n > ORACLE_MAX_N:
        raise ValueError(f"oracle is limited to N <= {ORACLE_MAX_N}")
    A = T.to_dense()
    V = np.eye(n)
    scale = max(np.linalg.norm(A), np.finfo(float).tiny)
    rounds = _round_robin(n)
    sweeps = 0
    while sweeps < max_sweeps and np.linalg.norm(np.triu(A, 1)) > 1e-17 * scale:
        sweeps += 1
        for pairs in rounds:
            p = np.array([i for i, _ in pairs])
            q = np.array([j for _, j in pairs])
            apq = A[p, q]
            live = apq != 0.0
            if not np.any(live):
                continue
            p, q, apq = p[live], q[live], apq[live]
            theta = (A[q, q] - A[p, p]) / (2.0 * apq)
            t = np.where(theta >= 0, 1.0, -1.0) / (np.abs(theta) + np.sqrt(theta * theta + 1.0))
            c = 1.0 / np.sqrt(t * t + 1.0)
            sn = t * c
            G = np.eye(n)
            G[p, p] = c
            G[q, q] = c
            G[p, q] = sn
            G[q, p] = -sn
            A = G.T @ A @ G
            A = 0.5 * (A + A.T)
            V = V @ G
    vals = np.diag(A).copy()
    order = np.argsort(vals, kind="stable")
    vals, V = vals[order], V[:, order]
    resid = np.array([np.linalg.norm(T.matvec(V[:, j]) - vals[j] * V[:, j]) for j in range(n)])
    return SpectrumResult(vals, V, resid, {"method": "cyclic-jacobi", "sweeps": sweeps})
