"""Shared domain types, similarity exponents and regime classification."""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import cached_property
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from scipy.integrate import simpson
from scipy.interpolate import CubicHermiteSpline, PPoly

from .errors import DomainError

REGIME_RTOL = 1e-12
DEFAULT_MAX_NODES = 20000
MIN_NODES = 5


class Regime(str, Enum):
    S = "S"
    LS = "LS"
    HS = "HS"


class ProfileForm(str, Enum):
    F_FORM = "f_form"
    S = "F_form_S"
    GENERAL = "F_form_general"
    NORMALIZED = "F_form_normalized"
    SIGN_LIMIT = "sign_limit"


class Symmetry(str, Enum):
    EVEN = "even"
    ODD = "odd"


class RightBC(str, Enum):
    COMPACT = "compact_support"
    FARFIELD = "farfield_asymptotic"


def _check_np(n: float, p: float) -> None:
    if not (np.isfinite(n) and n > 0):
        raise DomainError(f"n must be a positive real, got {n!r}")
    if not (np.isfinite(p) and p > 1):
        raise DomainError(f"p must be a real > 1, got {p!r}")


def alpha(n: float) -> float:
    if n == math.inf:
        return 1.0
    if not n > 0:
        raise DomainError(f"n must be positive, got {n!r}")
    return n / (n + 1.0)


def nu_var(n: float) -> float:
    if not n > 0:
        raise DomainError(f"n must be positive, got {n!r}")
    return (n + 2.0) / (n + 1.0)


def classify_regime(n: float, p: float) -> Regime:
    _check_np(n, p)
    if abs(p - (n + 1.0)) <= REGIME_RTOL * (n + 1.0):
        return Regime.S
    return Regime.LS if p > n + 1.0 else Regime.HS


def beta(n: float, p: float) -> float:
    if classify_regime(n, p) is Regime.S:
        return 0.0
    return (p - (n + 1.0)) / (4.0 * (p - 1.0))


def equilibria(n: float, p: float) -> Tuple[float, float]:
    """Constant equilibria (f_*, F_*) of the profile equation, F_* = f_*^(n+1)."""
    _check_np(n, p)
    with np.errstate(over="ignore"):
        f_star = float(np.power(np.float64(p - 1.0), -1.0 / (p - 1.0)))
        F_star = float(np.power(np.float64(f_star), n + 1.0))
    return f_star, F_star


@dataclass(frozen=True)
class ProblemParams:
    n: float
    p: float
    alpha: float = field(init=False)
    beta: float = field(init=False)
    nu_var: float = field(init=False)
    regime: Regime = field(init=False)

    def __post_init__(self):
        _check_np(self.n, self.p)
        object.__setattr__(self, "n", float(self.n))
        object.__setattr__(self, "p", float(self.p))
        object.__setattr__(self, "alpha", alpha(self.n))
        object.__setattr__(self, "beta", beta(self.n, self.p))
        object.__setattr__(self, "nu_var", nu_var(self.n))
        object.__setattr__(self, "regime", classify_regime(self.n, self.p))

    @classmethod
    def variational(cls, n: float) -> "ProblemParams":
        return cls(n, n + 1.0)

    @property
    def f_star(self) -> float:
        return equilibria(self.n, self.p)[0]

    @property
    def F_star(self) -> float:
        return equilibria(self.n, self.p)[1]

    @property
    def source_exponent(self) -> float:
        # exponent q of (eps^2 + F^2)^(q/2) F in the F-form source term
        return self.p * (1.0 - self.alpha) - 1.0

    def with_p(self, p: float) -> "ProblemParams":
        return ProblemParams(self.n, p)


@dataclass(frozen=True, eq=False)
class Mesh:
    nodes: np.ndarray
    max_nodes: int = DEFAULT_MAX_NODES

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size < MIN_NODES:
            raise DomainError(f"mesh needs at least {MIN_NODES} nodes, got {nodes.size}")
        if nodes.size > self.max_nodes:
            raise DomainError(f"mesh has {nodes.size} nodes, cap is {self.max_nodes}")
        if not np.all(np.diff(nodes) > 0):
            raise DomainError("mesh nodes must be strictly increasing")
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)

    @classmethod
    def uniform(cls, a: float, b: float, count: int, max_nodes: int = DEFAULT_MAX_NODES) -> "Mesh":
        return cls(np.linspace(a, b, count), max_nodes)

    def __len__(self) -> int:
        return int(self.nodes.size)

    @property
    def spacing(self) -> np.ndarray:
        return np.diff(self.nodes)


_ENTRY_RE = re.compile(r"^([+-]?)(\d+)$")


@dataclass(frozen=True)
class MultiIndex:
    """Ordered crossing record; sign +1/-1 marks crossings of +F_*/-F_*, 0 marks zeros."""

    entries: Tuple[Tuple[int, int], ...] = ()
    tail_threshold: float = 1e-4

    def __post_init__(self):
        clean = []
        for sign, count in self.entries:
            if sign not in (-1, 0, 1) or int(count) < 1:
                raise DomainError(f"invalid multiindex entry {(sign, count)!r}")
            clean.append((int(sign), int(count)))
        object.__setattr__(self, "entries", tuple(clean))

    def __str__(self) -> str:
        parts = []
        for sign, count in self.entries:
            prefix = {1: "+", -1: "-", 0: ""}[sign]
            parts.append(f"{prefix}{count}")
        return "{" + ",".join(parts) + "}"

    @classmethod
    def parse(cls, text: str, tail_threshold: float = 1e-4) -> "MultiIndex":
        body = text.strip().strip("{}").replace(" ", "")
        entries = []
        for token in filter(None, body.split(",")):
            m = _ENTRY_RE.match(token)
            if not m:
                raise DomainError(f"cannot parse multiindex entry {token!r}")
            sign = {"+": 1, "-": -1, "": 0}[m.group(1)]
            entries.append((sign, int(m.group(2))))
        return cls(tuple(entries), tail_threshold)

    def negated(self) -> "MultiIndex":
        return MultiIndex(tuple((-s, c) for s, c in self.entries), self.tail_threshold)

    def same_pattern(self, other: "MultiIndex") -> bool:
        return self.entries == other.entries


@dataclass(frozen=True, eq=False)
class ProfileSolution:
    params: ProblemParams
    form: ProfileForm
    symmetry: Symmetry
    right_bc: RightBC
    eps: float
    mesh: Mesh
    F: np.ndarray
    dF: np.ndarray
    d2F: np.ndarray
    d3F: np.ndarray
    residual: float
    converged: bool = True
    y0: Optional[float] = None
    sigma: Optional[MultiIndex] = None
    C0: Optional[float] = None
    newton_iterations: int = 0
    drift: Optional[float] = None
    tol: Optional[float] = None
    provenance: Optional[Dict[str, Any]] = field(default=None, repr=False)

    def __post_init__(self):
        m = len(self.mesh)
        for name in ("F", "dF", "d2F", "d3F"):
            arr = np.array(getattr(self, name), dtype=float)
            if arr.shape != (m,):
                raise DomainError(f"{name} has shape {arr.shape}, mesh has {m} nodes")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if not self.residual >= 0:
            raise DomainError(f"residual must be non-negative, got {self.residual!r}")

    # -- derived views -------------------------------------------------
    @property
    def nodes(self) -> np.ndarray:
        return self.mesh.nodes

    @property
    def radius(self) -> float:
        return float(self.mesh.nodes[-1])

    @property
    def F0_at_origin(self) -> float:
        return float(self.F[0])

    def states(self) -> np.ndarray:
        return np.vstack([self.F, self.dF, self.d2F, self.d3F])

    def with_(self, **changes: Any) -> "ProfileSolution":
        return replace(self, **changes)

    @cached_property
    def _splines(self) -> Tuple[PPoly, ...]:
        x = self.mesh.nodes
        d2 = CubicHermiteSpline(x, self.d2F, self.d3F)
        return (
            CubicHermiteSpline(x, self.F, self.dF),
            CubicHermiteSpline(x, self.dF, self.d2F),
            d2,
            d2.derivative(),
        )

    def evaluate(self, y, order: int = 0) -> np.ndarray:
        """F^(order) at y in [0, R] from the cubic Hermite interpolants; F''' is the
        derivative of the F'' spline and so matches d3F at the nodes."""
        y = np.asarray(y, dtype=float)
        if order not in (0, 1, 2, 3):
            raise DomainError(f"order must be 0..3, got {order}")
        return self._splines[order](y)

    def fine_nodes(self, refine: int = 4) -> np.ndarray:
        x = self.mesh.nodes
        t = np.linspace(0.0, 1.0, refine + 1)[:-1]
        fine = (x[:-1, None] + np.diff(x)[:, None] * t[None, :]).ravel()
        return np.append(fine, x[-1])

    def full_domain(self, refine: int = 4) -> Dict[str, np.ndarray]:
        """Samples of F, F', F'' on [-R, R] built by reflection through y = 0."""
        y = self.fine_nodes(refine)
        vals = [self.evaluate(y, k) for k in range(3)]
        # parity of F^(k): even profile -> (+, -, +), odd profile -> (-, +, -)
        base = 1.0 if self.symmetry is Symmetry.EVEN else -1.0
        parity = [base, -base, base]
        left = y[:0:-1]
        out = {"y": np.concatenate([-left, y])}
        for key, v, s in zip(("F", "dF", "d2F"), vals, parity):
            out[key] = np.concatenate([s * v[:0:-1], v])
        return out

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.evaluate(self.fine_nodes(4)))))

    @property
    def l2_norm(self) -> float:
        y = self.fine_nodes(4)
        return float(np.sqrt(2.0 * simpson(self.evaluate(y) ** 2, x=y)))

    def profile_f(self) -> np.ndarray:
        """Original profile f = |F|^(1/(n+1)) sign F at the nodes."""
        return np.sign(self.F) * np.abs(self.F) ** (1.0 / (self.params.n + 1.0))


@dataclass
class BranchPoint:
    param: float
    F0_at_origin: float
    sup_norm: float
    l2_norm: float
    y0: Optional[float]
    sigma: MultiIndex
    solution_path: Optional[str] = None
    solution: Optional[ProfileSolution] = field(default=None, repr=False, compare=False)

    @classmethod
    def from_solution(cls, param: float, sol: ProfileSolution, path: Optional[str] = None) -> "BranchPoint":
        return cls(
            param=float(param),
            F0_at_origin=sol.F0_at_origin,
            sup_norm=sol.sup_norm,
            l2_norm=sol.l2_norm,
            y0=sol.y0,
            sigma=sol.sigma if sol.sigma is not None else MultiIndex(),
            solution_path=path,
            solution=sol,
        )


@dataclass
class Branch:
    parameter_name: str
    points: List[BranchPoint] = field(default_factory=list)
    termination: str = "range_end"
    settings: Dict[str, Any] = field(default_factory=dict)

    TERMINATIONS = ("range_end", "newton_failure", "jump_detected", "singularity")

    @property
    def params(self) -> np.ndarray:
        return np.array([pt.param for pt in self.points])

    def is_monotone(self) -> bool:
        d = np.diff(self.params)
        return bool(np.all(d > 0) or np.all(d < 0))
