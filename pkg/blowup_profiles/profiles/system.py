"""Profile problem definition and the regularized first-order BVP for each form.

Every form is written as

    F'''' = -D y g(F) F' - c g(F) F + h(F),
    g(F) = (eps^2 + F^2)^(-alpha/2),  h(F) = (eps^2 + F^2)^(q/2) F,

with the coefficients (alpha, D, c, q) below. The S and sign-limit forms have
D = 0, c = 1, q = 0; the general form keeps the physical constants and the
normalized form is scaled so that its equilibria are +-1.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

import numpy as np

from ..collocation import BvpProblem
from ..core import (DEFAULT_MAX_NODES, Mesh, ProblemParams, ProfileForm, Regime, RightBC, Symmetry)
from ..errors import DomainError

logger = logging.getLogger(__name__)

Y0_REFERENCE = 12.0


def default_radius(n: float) -> float:
    return max(15.0, 2.0 * n ** (-0.75) * Y0_REFERENCE)


@dataclass(frozen=True)
class RhsCoefficients:
    alpha: float
    drift: float
    linear: float
    source_exponent: float

    @property
    def decay_exponent(self) -> Optional[float]:
        """Algebraic decay F ~ y^Gamma of the far field, Gamma = -c / D (D > 0 only)."""
        if self.drift <= 0:
            return None
        return -self.linear / self.drift


def normalizing_scale(params: ProblemParams) -> Tuple[float, float]:
    """(C, a) with G(y) = C H(y / a) mapping normalized solutions H to general ones G."""
    C = params.F_star
    a = (C ** params.alpha * (params.p - 1.0)) ** 0.25
    return C, a


@dataclass(frozen=True)
class ProfileProblemSpec:
    params: ProblemParams
    form: ProfileForm = ProfileForm.S
    symmetry: Symmetry = Symmetry.EVEN
    radius: Optional[float] = None
    eps: float = 1e-10
    right_bc: Optional[RightBC] = None
    drift: Optional[float] = None
    max_nodes: int = DEFAULT_MAX_NODES
    coefficients: RhsCoefficients = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "form", ProfileForm(self.form))
        object.__setattr__(self, "symmetry", Symmetry(self.symmetry))
        if self.radius is None:
            object.__setattr__(self, "radius", default_radius(self.params.n))
        coeffs = _coefficients(self.params, self.form, self.drift)
        object.__setattr__(self, "coefficients", coeffs)
        if self.right_bc is None:
            object.__setattr__(self, "right_bc", RightBC.FARFIELD if coeffs.drift > 0 else RightBC.COMPACT)
        object.__setattr__(self, "right_bc", RightBC(self.right_bc))
        self.validate()

    def validate(self) -> None:
        if not (self.eps > 0 and math.isfinite(self.eps)):
            raise DomainError(f"eps must be positive for the regularized Newton solve, got {self.eps!r}")
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise DomainError(f"radius must be positive, got {self.radius!r}")
        if self.form is ProfileForm.S and self.params.regime is not Regime.S:
            raise DomainError(f"the S-form needs p = n+1, got n={self.params.n:g}, p={self.params.p:g}")
        if self.drift is not None and self.form in (ProfileForm.S, ProfileForm.SIGN_LIMIT):
            raise DomainError(f"form {self.form.value} has no drift term to override")
        d = self.coefficients.drift
        if self.right_bc is RightBC.FARFIELD and not d > 0:
            raise DomainError("far-field conditions need p > n+1 (positive drift)")
        if self.right_bc is RightBC.COMPACT and d > 0:
            raise DomainError("compact support needs p <= n+1")

    @property
    def equilibrium_level(self) -> float:
        """Positive constant equilibrium F_* of this form."""
        if self.form in (ProfileForm.GENERAL, ProfileForm.F_FORM):
            return self.params.F_star
        return 1.0

    def with_(self, **changes) -> "ProfileProblemSpec":
        return replace(self, **changes)

    @classmethod
    def from_solution(cls, sol, **changes) -> "ProfileProblemSpec":
        base = dict(params=sol.params, form=sol.form, symmetry=sol.symmetry, radius=sol.radius,
                    eps=sol.eps, right_bc=sol.right_bc, drift=sol.drift, max_nodes=sol.mesh.max_nodes)
        base.update(changes)
        return cls(**base)


def _coefficients(params: ProblemParams, form: ProfileForm, drift: Optional[float]) -> RhsCoefficients:
    b = params.beta if drift is None else float(drift)
    one_minus_a = 1.0 - params.alpha
    if form is ProfileForm.S:
        return RhsCoefficients(params.alpha, 0.0, 1.0, 0.0)
    if form is ProfileForm.SIGN_LIMIT:
        return RhsCoefficients(1.0, 0.0, 1.0, 0.0)
    q = params.source_exponent
    if abs(q) < 1e-14:
        q = 0.0
    if form in (ProfileForm.GENERAL, ProfileForm.F_FORM):
        return RhsCoefficients(params.alpha, b * one_minus_a, 1.0 / (params.p - 1.0), q)
    return RhsCoefficients(params.alpha, b * (params.p - 1.0) * one_minus_a, 1.0, q)


def _bc_functions(spec: ProfileProblemSpec):
    R = float(spec.radius)
    even = spec.symmetry is Symmetry.EVEN
    left_rows = (1, 3) if even else (0, 2)
    dya = np.zeros((4, 4))
    dya[0, left_rows[0]] = 1.0
    dya[1, left_rows[1]] = 1.0
    dyb = np.zeros((4, 4))
    if spec.right_bc is RightBC.COMPACT:
        dyb[2, 0] = 1.0
        dyb[3, 1] = 1.0
    else:
        G = spec.coefficients.decay_exponent
        # F ~ y^G  <=>  F = (y/G) F'  and  F' = (y/(G-1)) F''
        dyb[2, 0], dyb[2, 1] = 1.0, -R / G
        dyb[3, 1], dyb[3, 2] = 1.0, -R / (G - 1.0)

    def bc(ya, yb):
        return dya @ ya + dyb @ yb

    def bc_jac(ya, yb):
        return dya, dyb

    return bc, bc_jac


def _rhs_functions(spec: ProfileProblemSpec):
    co = spec.coefficients
    a, D, c, q = co.alpha, co.drift, co.linear, co.source_exponent
    eps2 = spec.eps ** 2

    def rhs(y, Y):
        F, F1, F2, F3 = Y
        s = eps2 + F * F
        g = s ** (-0.5 * a)
        source = F if q == 0.0 else s ** (0.5 * q) * F
        F4 = source - c * g * F
        if D:
            F4 = F4 - D * y * g * F1
        return np.vstack([F1, F2, F3, F4])

    def jac(y, Y):
        F, F1 = Y[0], Y[1]
        m = F.size
        s = eps2 + F * F
        J = np.zeros((4, 4, m))
        J[0, 1] = J[1, 2] = J[2, 3] = 1.0
        dgF = s ** (-0.5 * a - 1.0) * (eps2 + (1.0 - a) * F * F)
        dsource = 1.0 if q == 0.0 else s ** (0.5 * q - 1.0) * (eps2 + (1.0 + q) * F * F)
        J[3, 0] = dsource - c * dgF
        if D:
            g = s ** (-0.5 * a)
            dg = -a * F * s ** (-0.5 * a - 1.0)
            J[3, 0] -= D * y * dg * F1
            J[3, 1] = -D * y * g
        return J

    return rhs, jac


def build_system(spec: ProfileProblemSpec, mesh: Optional[Mesh] = None,
                 guess: Optional[np.ndarray] = None, nodes: int = 801) -> BvpProblem:
    """4-dim first-order BVP for ``spec`` on [0, R]."""
    if mesh is None:
        mesh = Mesh.uniform(0.0, float(spec.radius), nodes, spec.max_nodes)
    if guess is None:
        from .guess import default_guess
        guess = default_guess(spec).resample(mesh.nodes).states()
    rhs, jac = _rhs_functions(spec)
    bc, bc_jac = _bc_functions(spec)
    name = f"{spec.form.value}[n={spec.params.n:g},p={spec.params.p:g},{spec.symmetry.value}]"
    return BvpProblem(4, rhs, bc, mesh, guess, jac=jac, bc_jac=bc_jac, name=name)
