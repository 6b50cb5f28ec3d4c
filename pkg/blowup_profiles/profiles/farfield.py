from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..core import ProblemParams, ProfileForm, ProfileSolution, Regime, RightBC, beta, classify_regime
from ..errors import DomainError
from .system import normalizing_scale


def _require_ls(n: float, p: float) -> None:
    if classify_regime(n, p) is not Regime.LS:
        raise DomainError(f"far-field asymptotics need p > n+1, got n={n:g}, p={p:g}")


@dataclass(frozen=True)
class FarField:
    """f(y) ~ C0 y^gamma + C1 exp(-b0 y^nu) as y -> infinity."""

    n: float
    p: float
    C0: float
    C1: float = 0.0
    gamma: float = field(init=False)
    nu: float = field(init=False)
    b0: float = field(init=False)

    def __post_init__(self):
        _require_ls(self.n, self.p)
        if self.C0 == 0:
            raise DomainError("C0 must be non-zero")
        d = self.p - (self.n + 1.0)
        object.__setattr__(self, "gamma", -4.0 / d)
        object.__setattr__(self, "nu", 4.0 * (self.p - 1.0) / (3.0 * d))
        b = beta(self.n, self.p)
        object.__setattr__(self, "b0", (b * abs(self.C0) ** (-self.n) / (self.n + 1.0)) ** (1.0 / 3.0) / self.nu)

    @classmethod
    def from_params(cls, params: ProblemParams, C0: float, C1: float = 0.0) -> "FarField":
        return cls(params.n, params.p, C0, C1)


def farfield_eval(ff: FarField, n: float, p: float, y, threshold: float = 1.0):
    _require_ls(n, p)
    if (n, p) != (ff.n, ff.p):
        raise DomainError("far-field record belongs to different (n, p)")
    y = np.asarray(y, dtype=float)
    if np.any(y < threshold):
        raise DomainError(f"far-field expansion is valid only for y >= {threshold:g}")
    return ff.C0 * y ** ff.gamma + ff.C1 * np.exp(-ff.b0 * y ** ff.nu)


def final_time_profile(C0: float, n: float, p: float, x):
    """Final-time profile u(x, T) = C0 |x|^(-4/(p-(n+1)))."""
    _require_ls(n, p)
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        return C0 * np.abs(x) ** (-4.0 / (p - (n + 1.0)))


def recover_C0(sol: ProfileSolution) -> Optional[float]:
    """C0 of the algebraic tail F ~ (C0 y^gamma)^(n+1), read off at y = R.

    Computed in log space; None when the value is not representable.
    """
    if sol.right_bc is not RightBC.FARFIELD or sol.drift is not None:
        return None
    n, p = sol.params.n, sol.params.p
    R, FR = sol.radius, float(sol.F[-1])
    if sol.form is ProfileForm.NORMALIZED:
        C, a = normalizing_scale(sol.params)
        R, FR = a * R, C * FR
    elif sol.form not in (ProfileForm.GENERAL, ProfileForm.F_FORM):
        return None
    if FR == 0.0:
        return None
    Gamma = -4.0 * (n + 1.0) / (p - (n + 1.0))
    log_c0 = (math.log(abs(FR)) - Gamma * math.log(R)) / (n + 1.0)
    if not math.isfinite(log_c0) or abs(log_c0) > 700.0:
        return None
    return math.copysign(math.exp(log_c0), FR)


def tail_slope(sol: ProfileSolution, start_fraction: float = 0.5) -> float:
    """Least-squares log-log slope of |f| = |F|^(1/(n+1)) over [start_fraction R, R]."""
    y = sol.nodes
    mask = y >= start_fraction * sol.radius
    F = np.abs(sol.F[mask])
    if np.any(F <= 0) or mask.sum() < 3:
        raise DomainError("tail is not strictly non-zero; no algebraic slope")
    logf = np.log(F) / (sol.params.n + 1.0)
    slope, _ = np.polyfit(np.log(y[mask]), logf, 1)
    return float(slope)
