"""Experiment configuration: INI-style ``key = value`` with sections.

Sections and keys::

    [experiment]  kind, seed
    [profiles]    J, eps
    [parameters]  <name> = <number>      (values for free profile parameters)
    [geometry]    N, a, L, x1, convention
    [ordering]    alpha, gamma           ("symbolic" or comma-separated numbers)
    [triple]      J1, J2, J3
    [solver]      k, tol, refine
    [output]      dir, csv, report

Unknown sections or keys are fatal and all of them are listed.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from fractions import Fraction

from .symexpr import (
    Expr,
    Num,
    ParseError,
    ProfileBinding,
    as_expr,
    evaluate,
    function_symbols,
    parameters,
    parse_expr,
)

KINDS = ("verify", "spectrum-chain", "spectrum-effective", "compare", "convergence", "ordering-sweep")
NUMERIC_KINDS = KINDS[1:]
CONVENTIONS = ("left", "right", "midpoint")

ALLOWED = {
    "experiment": {"kind", "seed"},
    "profiles": {"J", "eps"},
    "parameters": None,  # any identifier
    "geometry": {"N", "a", "L", "x1", "convention"},
    "ordering": {"alpha", "gamma"},
    "triple": {"J1", "J2", "J3"},
    "solver": {"k", "tol", "refine"},
    "output": {"dir", "csv", "report"},
}

DEFAULT_SWEEP = (Fraction(0), Fraction(1, 2), Fraction(1))


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    kind: str
    J: Expr | None = None
    eps: Expr = field(default_factory=lambda: as_expr(0))
    params: dict = field(default_factory=dict)
    N: list = field(default_factory=list)
    a: float | None = None
    L: float | None = None
    x1: float | None = None
    convention: str = "left"
    alpha: object = None  # None (unset), "symbolic", or list[Fraction]
    gamma: object = None
    triple: tuple | None = None
    k: int = 3
    tol: float = 1e-12
    refine: int = 8
    seed: int = 0
    out_dir: str = "pdmlab_out"
    csv_name: str | None = None
    report_name: str = "report.json"

    def spacing(self, N: int) -> float:
        """Lattice spacing for chain size ``N`` (``a`` given, or ``L/(N+1)``)."""
        if self.a is not None:
            return self.a
        return self.L / (N + 1)

    def first_site(self, N: int) -> float:
        return self.spacing(N) if self.x1 is None else self.x1

    @property
    def csv_file(self) -> str:
        return self.csv_name or f"{self.kind}.csv"

    def echo(self) -> dict:
        """Every effective value, defaults included."""

        def ordering(v):
            return "symbolic" if v is None or v == "symbolic" else [str(f) for f in v]

        a, L = self.a, self.L
        if len(self.N) == 1 and (a is not None or L is not None):
            a = self.spacing(self.N[0])
            L = (self.N[0] + 1) * a
        elif len(self.N) > 1:
            a = "L/(N+1)"
        return {
            "kind": self.kind,
            "profiles": {"J": None if self.J is None else str(self.J), "eps": str(self.eps)},
            "parameters": dict(self.params),
            "geometry": {
                "N": list(self.N),
                "a": a,
                "L": L,
                "x1": "a" if self.x1 is None else self.x1,
                "convention": self.convention,
            },
            "ordering": {"alpha": ordering(self.alpha), "gamma": ordering(self.gamma)},
            "triple": None if self.triple is None else [str(t) for t in self.triple],
            "solver": {"k": self.k, "tol": self.tol, "refine": self.refine},
            "seed": self.seed,
            "output": {"dir": self.out_dir, "csv": self.csv_file, "report": self.report_name},
        }


def _expr(section, key, text) -> Expr:
    try:
        return parse_expr(text)
    except ParseError as err:
        raise ConfigError(f"[{section}] {key}: {err}") from None


def _number(section, key, text, params=None) -> float:
    e = _expr(section, key, text)
    try:
        return evaluate(e, ProfileBinding(params=params or {}))
    except Exception as err:  # noqa: BLE001 - any evaluation failure is a config error here
        raise ConfigError(f"[{section}] {key}: not a number ({err})") from None


def _int(section, key, text, minimum=1) -> int:
    try:
        v = int(text.strip())
    except ValueError:
        raise ConfigError(f"[{section}] {key}: expected an integer, got {text!r}") from None
    if v < minimum:
        raise ConfigError(f"[{section}] {key}: must be >= {minimum}")
    return v


def _rationals(section, key, text) -> list:
    out = []
    for item in text.split(","):
        e = _expr(section, key, item)
        if not isinstance(e, Num):
            raise ConfigError(f"[{section}] {key}: expected rational numbers or 'symbolic', got {item.strip()!r}")
        out.append(e.value)
    return out


def parse_config(text: str) -> ExperimentConfig:
    cp = configparser.ConfigParser(
        interpolation=None,
        delimiters=("=",),
        comment_prefixes=("#",),
        inline_comment_prefixes=("#",),
        default_section="\0defaults",
    )
    cp.optionxform = str  # keys are case-sensitive (J vs j)
    try:
        cp.read_string(text)
    except configparser.Error as err:
        raise ConfigError(f"malformed config: {err}") from None

    unknown = []
    for sec in cp.sections():
        if sec not in ALLOWED:
            unknown.append(f"[{sec}]")
            continue
        allowed = ALLOWED[sec]
        for key in cp[sec]:
            if allowed is not None and key not in allowed:
                unknown.append(f"[{sec}] {key}")
    if unknown:
        raise ConfigError("unknown keys: " + ", ".join(unknown))

    def get(sec, key):
        return cp.get(sec, key, fallback=None)

    kind = get("experiment", "kind")
    if kind is None:
        raise ConfigError("missing required key [experiment] kind")
    kind = kind.strip()
    if kind not in KINDS:
        raise ConfigError(f"[experiment] kind: unknown kind {kind!r}; expected one of {', '.join(KINDS)}")
    cfg = ExperimentConfig(kind)

    if get("experiment", "seed") is not None:
        cfg.seed = _int("experiment", "seed", get("experiment", "seed"), minimum=0)

    if cp.has_section("parameters"):
        for name, value in cp["parameters"].items():
            if not name.isidentifier() or name in ("x", "a", "L"):
                raise ConfigError(f"[parameters] {name}: not a free parameter name")
            cfg.params[name] = _number("parameters", name, value)

    # geometry
    if get("geometry", "N") is not None:
        cfg.N = [_int("geometry", "N", t) for t in get("geometry", "N").split(",")]
    for key in ("a", "L", "x1"):
        if get("geometry", key) is not None:
            setattr(cfg, key, _number("geometry", key, get("geometry", key), cfg.params))
    if get("geometry", "convention") is not None:
        cfg.convention = get("geometry", "convention").strip()
        if cfg.convention not in CONVENTIONS:
            raise ConfigError(f"[geometry] convention: expected one of {', '.join(CONVENTIONS)}")

    # solver
    if get("solver", "k") is not None:
        cfg.k = _int("solver", "k", get("solver", "k"))
    if get("solver", "refine") is not None:
        cfg.refine = _int("solver", "refine", get("solver", "refine"))
    if get("solver", "tol") is not None:
        cfg.tol = _number("solver", "tol", get("solver", "tol"))
        if not cfg.tol > 0:
            raise ConfigError("[solver] tol: must be > 0")

    # ordering
    for key in ("alpha", "gamma"):
        text = get("ordering", key)
        if text is not None:
            setattr(cfg, key, "symbolic" if text.strip() == "symbolic" else _rationals("ordering", key, text))

    if cp.has_section("triple"):
        missing = [k for k in ("J1", "J2", "J3") if get("triple", k) is None]
        if missing:
            raise ConfigError("[triple] needs J1, J2 and J3; missing " + ", ".join(missing))
        cfg.triple = tuple(_expr("triple", k, get("triple", k)) for k in ("J1", "J2", "J3"))

    # profiles
    if get("profiles", "J") is not None:
        cfg.J = _expr("profiles", "J", get("profiles", "J"))
    if get("profiles", "eps") is not None:
        cfg.eps = _expr("profiles", "eps", get("profiles", "eps"))

    if get("output", "dir") is not None:
        cfg.out_dir = get("output", "dir").strip()
    if get("output", "csv") is not None:
        cfg.csv_name = get("output", "csv").strip()
    if get("output", "report") is not None:
        cfg.report_name = get("output", "report").strip()

    _validate(cfg)
    return cfg


def _validate(cfg: ExperimentConfig) -> None:
    if cfg.kind == "verify":
        for key in ("alpha", "gamma"):
            v = getattr(cfg, key)
            if isinstance(v, list) and len(v) != 1:
                raise ConfigError(f"[ordering] {key}: verify takes a single value or 'symbolic'")
        return

    if cfg.J is None:
        raise ConfigError(f"missing required key [profiles] J for kind {cfg.kind}")
    known = set(cfg.params) | {"a", "L", "pi"}
    for name, prof in (("J", cfg.J), ("eps", cfg.eps)):
        if function_symbols(prof):
            raise ConfigError(f"[profiles] {name}: profile must be a closed form in x, got {prof}")
        free = parameters(prof) - known
        if free:
            raise ConfigError(f"[profiles] {name}: unbound parameters {sorted(free)}; give values in [parameters]")

    if not cfg.N:
        raise ConfigError(f"missing required key [geometry] N for kind {cfg.kind}")
    if cfg.kind == "convergence":
        if len(cfg.N) < 3:
            raise ConfigError("[geometry] N: convergence needs at least 3 values")
        if any(n2 <= n1 for n1, n2 in zip(cfg.N, cfg.N[1:])):
            raise ConfigError("[geometry] N: values must be strictly increasing")
        if cfg.L is None:
            raise ConfigError("missing required key [geometry] L for kind convergence")
        if cfg.a is not None:
            raise ConfigError("[geometry] a: convergence derives a = L/(N+1); give L only")
    else:
        if len(cfg.N) != 1:
            raise ConfigError(f"[geometry] N: kind {cfg.kind} takes a single N")
        if cfg.a is None and cfg.L is None:
            raise ConfigError(f"missing required key [geometry] a or L for kind {cfg.kind}")
        if cfg.a is not None and cfg.L is not None:
            n = cfg.N[0]
            if abs((n + 1) * cfg.a - cfg.L) > 1e-12 * abs(cfg.L):
                raise ConfigError("[geometry] a and L disagree: need L = (N+1) a")
            cfg.a = None  # L wins; a is re-derived exactly
        if cfg.a is None and not cfg.L > 0:
            raise ConfigError("[geometry] L: must be > 0")
        if cfg.a is not None and not cfg.a > 0:
            raise ConfigError("[geometry] a: must be > 0")
    if cfg.k > min(cfg.N):
        raise ConfigError(f"[solver] k = {cfg.k} exceeds the chain size N = {min(cfg.N)}")

    if cfg.kind == "ordering-sweep":
        for key in ("alpha", "gamma"):
            v = getattr(cfg, key)
            if v == "symbolic":
                raise ConfigError(f"[ordering] {key}: ordering-sweep requires numeric grids, not 'symbolic'")
            if v is None:
                setattr(cfg, key, list(DEFAULT_SWEEP))
