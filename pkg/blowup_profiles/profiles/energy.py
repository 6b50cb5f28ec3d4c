"""Variational energy and fibering values of profiles at p = n+1.

E(F) = -1/2 int F''^2 + 1/2 int F^2 - (1/nu) int |F|^nu,  nu = (n+2)/(n+1).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np
from scipy.integrate import simpson

from ..core import ProfileSolution, nu_var

logger = logging.getLogger(__name__)

Direction = Callable[[np.ndarray], Tuple[np.ndarray, np.ndarray]]


@dataclass(frozen=True)
class EnergyReport:
    E: float
    H0: float
    r0: Optional[float]
    H_tilde: Optional[float]
    nu: float
    curvature: float  # int F''^2
    mass: float  # int F^2
    power: float  # int |F|^nu

    @property
    def fibering_defined(self) -> bool:
        return self.H0 > 0


def energy_from_samples(y: np.ndarray, F: np.ndarray, d2F: np.ndarray, n: float) -> EnergyReport:
    nu = nu_var(n)
    curvature = float(simpson(d2F * d2F, x=y))
    mass = float(simpson(F * F, x=y))
    power = float(simpson(np.abs(F) ** nu, x=y))
    E = -0.5 * curvature + 0.5 * mass - power / nu
    H0 = mass - curvature
    r0 = H_tilde = None
    if H0 > 0:
        H_tilde = power / H0 ** (0.5 * nu)
        r0 = H_tilde ** (1.0 / (2.0 - nu))
    else:
        logger.info("[energy] H0 = %.3g <= 0: fibering undefined", H0)
    return EnergyReport(E, H0, r0, H_tilde, nu, curvature, mass, power)


def energy(profile: ProfileSolution, n: Optional[float] = None, refine: int = 4) -> EnergyReport:
    data = profile.full_domain(refine)
    return energy_from_samples(data["y"], data["F"], data["d2F"], profile.params.n if n is None else n)


def first_variation(profile: ProfileSolution, direction: Direction, refine: int = 4) -> float:
    """dE(F; v) = -int F'' v'' + int F v - int |F|^(nu-2) F v."""
    data = profile.full_domain(refine)
    y, F, d2F = data["y"], data["F"], data["d2F"]
    v, d2v = direction(y)
    nu = profile.params.nu_var
    nonlinear = np.sign(F) * np.abs(F) ** (nu - 1.0)
    return float(simpson(-d2F * d2v + F * v - nonlinear * v, x=y))


def directional_derivative(profile: ProfileSolution, direction: Direction, h: float = 1e-6,
                           refine: int = 4) -> float:
    """Central difference (E(F + h v) - E(F - h v)) / 2h on the full symmetric domain."""
    data = profile.full_domain(refine)
    y, F, d2F = data["y"], data["F"], data["d2F"]
    v, d2v = direction(y)
    n = profile.params.n
    plus = energy_from_samples(y, F + h * v, d2F + h * d2v, n).E
    minus = energy_from_samples(y, F - h * v, d2F - h * d2v, n).E
    return (plus - minus) / (2.0 * h)
