"""Interface analysis: the P_k operators, the oscillatory component of the
travelling-wave ansatz F = (y0 - y)^mu phi(ln(y0 - y)), its non-oscillatory
counterpart and the local expansions built on them.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.interpolate import CubicSpline

from .core import alpha
from .errors import DomainError
from .odeint import IvpSystem, PeriodicOrbit, find_periodic

logger = logging.getLogger(__name__)


class Direction(str, Enum):
    OSCILLATORY = "oscillatory"
    NON_OSCILLATORY = "non_oscillatory"


class ExponentOrder(str, Enum):
    TW = "tw_third_order"
    PROFILE = "profile_fourth_order"


class ExpansionBranch(str, Enum):
    OSCILLATORY = "oscillatory_2D"
    NON_OSCILLATORY = "nonoscillatory_1D"


def pk_coefficients(k: int, mu: float) -> np.ndarray:
    """Coefficients of P_k, highest derivative first: P_k(phi) = sum c_j phi^(k-j)."""
    if k < 0:
        raise DomainError(f"k must be non-negative, got {k}")
    c = np.array([1.0])
    for j in range(k):
        nxt = np.zeros(c.size + 1)
        nxt[:-1] += c  # P_j' shifts every derivative up by one
        nxt[1:] += (mu - j) * c
        c = nxt
    return c


def interface_exponent(n: float, order: ExponentOrder = ExponentOrder.TW) -> float:
    if not n > 0:
        raise DomainError(f"n must be positive, got {n!r}")
    order = ExponentOrder(order)
    factor = 3.0 if order is ExponentOrder.TW else 4.0
    if n == math.inf:
        return factor
    return factor * (n + 1.0) / n


def _falling3(mu: float) -> float:
    return mu * (mu - 1.0) * (mu - 2.0)


def nonosc_equilibria(n: float) -> Tuple[float, float]:
    mu = interface_exponent(n, ExponentOrder.TW)
    level = _falling3(mu) ** (-1.0 if n == math.inf else -(n + 1.0) / n)
    return level, -level


def amplitude_scale(n: float) -> float:
    """K with phi = K psi turning the component equation into one with O(1) orbits."""
    return abs(nonosc_equilibria(n)[0])


def component_system(n: float, direction: Direction = Direction.OSCILLATORY) -> IvpSystem:
    """3-dim first-order form of the component equation in psi = phi / K.

    P_3(psi) = -M |psi|^(-alpha) psi (oscillatory) or +M |psi|^(-alpha) psi,
    M = mu(mu-1)(mu-2). The singular term is evaluated exactly; it is continuous
    with value 0 at psi = 0.
    """
    direction = Direction(direction)
    mu = interface_exponent(n, ExponentOrder.TW)
    a = alpha(n)
    c2, c1, c0 = pk_coefficients(3, mu)[1:]
    sign = -1.0 if direction is Direction.OSCILLATORY else 1.0
    M = _falling3(mu)

    def rhs(s, x):
        psi, d1, d2 = x
        source = sign * M * np.sign(psi) * np.abs(psi) ** (1.0 - a)
        return np.array([d1, d2, -c2 * d2 - c1 * d1 - c0 * psi + source])

    return IvpSystem(3, rhs, name=f"component[n={n:g},{direction.value}]")


@dataclass(frozen=True, eq=False)
class OscComponent:
    n: float
    mu: float
    direction: Direction
    period: float
    samples: np.ndarray  # columns s, phi, phi', phi''
    amplitude: float
    residual: float = 0.0
    symmetry_defect: float = float("nan")
    scale: float = 1.0
    orbit: Optional[PeriodicOrbit] = field(default=None, repr=False)

    @property
    def s(self) -> np.ndarray:
        return self.samples[:, 0]

    @property
    def phi(self) -> np.ndarray:
        return self.samples[:, 1]

    def sign_changes(self) -> int:
        v = self.phi[:-1]
        return int(np.count_nonzero(np.signbit(v[1:]) != np.signbit(v[:-1])) +
                   (np.signbit(v[-1]) != np.signbit(v[0])))

    def periodic_phi(self) -> CubicSpline:
        values = self.phi.copy()
        values[-1] = values[0]
        return CubicSpline(self.s, values, bc_type="periodic")

    def min_lobe_peak(self) -> float:
        return float(min(np.max(self.phi), -np.min(self.phi)))


def _simpson_defect(s: np.ndarray, y: np.ndarray, dy: np.ndarray) -> float:
    """Max over sample pairs of |y(s_{2k+2}) - y(s_{2k}) - Simpson integral of dy|."""
    m = (s.size - 1) // 2 * 2
    h = s[2:m + 1:2] - s[0:m - 1:2]
    integral = h / 6.0 * (dy[0:m - 1:2] + 4.0 * dy[1:m:2] + dy[2:m + 1:2])
    return float(np.max(np.abs(y[2:m + 1:2] - y[0:m - 1:2] - integral)))


def _component_residual(system: IvpSystem, times: np.ndarray, states: np.ndarray) -> float:
    third = np.array([system.rhs(t, x)[2] for t, x in zip(times, states)])
    return max(_simpson_defect(times, states[:, 0], states[:, 1]),
               _simpson_defect(times, states[:, 1], states[:, 2]),
               _simpson_defect(times, states[:, 2], third))


def oscillatory_orbit(n: float, x0: Optional[Sequence[float]] = None, transient: float = 200.0,
                      tol: float = 1e-8, rtol: float = 1e-11, atol: float = 1e-13,
                      samples: int = 4001) -> OscComponent:
    """Stable periodic orbit of the oscillatory component.

    The search runs in the rescaled variable psi; the returned samples are in
    phi units (phi = K psi), so the amplitude collapses quickly as n drops.
    """
    mu = interface_exponent(n, ExponentOrder.TW)
    system = component_system(n, Direction.OSCILLATORY)
    x0 = np.asarray(x0 if x0 is not None else (1.0, 0.0, 0.0), dtype=float)
    orbit = find_periodic(system, x0, transient=transient, tol=tol, rtol=rtol, atol=atol, samples=samples)
    K = amplitude_scale(n)
    psi_amp = orbit.amplitude
    residual = _component_residual(system, orbit.times, orbit.states) / psi_amp

    half = orbit.trajectory(np.mod(orbit.times + 0.5 * orbit.period, orbit.period))
    defect = float(np.max(np.abs(half[:, 0] + orbit.states[:, 0]))) / psi_amp
    if defect > 1e-4:
        logger.info("[oscillatory] n=%g: half-period antisymmetry defect %.2e", n, defect)

    data = np.column_stack([orbit.times, K * orbit.states])
    comp = OscComponent(n=n, mu=mu, direction=Direction.OSCILLATORY, period=orbit.period, samples=data,
                        amplitude=K * psi_amp, residual=residual, symmetry_defect=defect, scale=K,
                        orbit=orbit)
    logger.info("[oscillatory] n=%g mu=%g period %.8g amplitude %.4g", n, mu, comp.period, comp.amplitude)
    return comp


def orbit_distance(a: OscComponent, b: OscComponent) -> float:
    """Sup distance between two orbits anchored on the same Poincare section."""
    if a.n != b.n:
        raise DomainError("orbits belong to different n")
    s = np.linspace(0.0, min(a.period, b.period), 2001)
    return float(np.max(np.abs(a.periodic_phi()(s) - b.periodic_phi()(s))))


@dataclass(frozen=True)
class CharSpectrum:
    mu: float
    roots: Tuple[complex, complex, complex]
    coefficients: Tuple[float, float, float, float]

    @property
    def stable(self) -> bool:
        return all(r.real < 0 for r in self.roots)

    def vieta_defect(self) -> float:
        recon = np.poly(np.array(self.roots))
        c = np.array(self.coefficients)
        return float(np.max(np.abs(recon - c) / np.maximum(1.0, np.abs(c))))


def char_spectrum(mu: float) -> CharSpectrum:
    """Linearization of the non-oscillatory component about its equilibria."""
    if not mu > 3:
        raise DomainError(f"mu must exceed 3, got {mu!r}")
    coeffs = (1.0, 3.0 * (mu - 1.0), 3.0 * mu * mu - 6.0 * mu + 2.0, 3.0 * (mu - 1.0) * (mu - 2.0))
    roots = sorted((complex(r) for r in np.roots(coeffs)), key=lambda z: (round(z.real, 12), z.imag))
    spec = CharSpectrum(mu=float(mu), roots=tuple(roots), coefficients=coeffs)
    if not spec.stable:
        logger.warning("[warn] char_spectrum(mu=%g) has a root with non-negative real part", mu)
    return spec


class LocalExpansion:
    """Leading-order interface expansion near y0, valid for |y - y0| <= window."""

    def __init__(self, n: float, y0: float, s0: float, branch: ExpansionBranch,
                 component: Optional[OscComponent] = None, window: float = 1.0):
        self.n = n
        self.y0 = float(y0)
        self.s0 = float(s0)
        self.branch = ExpansionBranch(branch)
        self.window = float(window)
        self.component = component
        if self.branch is ExpansionBranch.OSCILLATORY:
            if component is None:
                raise DomainError("oscillatory expansion needs a computed OscComponent")
            self.mu = component.mu
            self._phi = component.periodic_phi()
        else:
            self.mu = interface_exponent(n, ExponentOrder.TW)

    def _check(self, y: np.ndarray) -> None:
        d = y - self.y0
        if np.any(np.abs(d) > self.window):
            raise DomainError(f"y outside the validity window |y - {self.y0:g}| <= {self.window:g}")
        if self.branch is ExpansionBranch.OSCILLATORY and np.any(d >= 0):
            raise DomainError("oscillatory expansion is defined for y < y0")
        if self.branch is ExpansionBranch.NON_OSCILLATORY and np.any(d < 0):
            raise DomainError("non-oscillatory expansion is defined for y >= y0")

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        self._check(y)
        if self.branch is ExpansionBranch.OSCILLATORY:
            dist = self.y0 - y
            return dist ** self.mu * self._phi(np.log(dist) + self.s0)
        M = _falling3(self.mu)
        power = 3.0 if self.n == math.inf else 3.0 / self.n
        coef = M ** (-1.0 if self.n == math.inf else -1.0 / self.n)
        return (y - self.y0) ** power * coef


def local_expansion(n: float, y0: float, s0: float, branch: ExpansionBranch,
                    component: Optional[OscComponent] = None, window: float = 1.0) -> LocalExpansion:
    return LocalExpansion(n, y0, s0, branch, component, window)
