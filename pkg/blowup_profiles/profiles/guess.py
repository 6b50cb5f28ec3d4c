from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable

import numpy as np

from ..core import Symmetry
from ..errors import DomainError

if TYPE_CHECKING:
    from .system import ProfileProblemSpec


@dataclass(frozen=True, eq=False)
class InitialProfile:
    """Node values of F and its first three derivatives used to start Newton."""

    nodes: np.ndarray
    F: np.ndarray
    dF: np.ndarray
    d2F: np.ndarray
    d3F: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.nodes, dtype=float)
        if x.ndim != 1 or x.size < 2 or not np.all(np.diff(x) > 0):
            raise DomainError("initial profile nodes must be strictly increasing")
        for name in ("F", "dF", "d2F", "d3F"):
            v = np.asarray(getattr(self, name), dtype=float)
            if v.shape != x.shape or not np.all(np.isfinite(v)):
                raise DomainError(f"initial profile component {name} is not finite on the nodes")
            object.__setattr__(self, name, v)
        object.__setattr__(self, "nodes", x)

    @classmethod
    def from_function(cls, nodes, fn: Callable[[np.ndarray], tuple]) -> "InitialProfile":
        nodes = np.asarray(nodes, dtype=float)
        return cls(nodes, *fn(nodes))

    def states(self) -> np.ndarray:
        return np.vstack([self.F, self.dF, self.d2F, self.d3F])

    def resample(self, nodes) -> "InitialProfile":
        """Linear resampling; zero outside the covered range."""
        nodes = np.asarray(nodes, dtype=float)
        vals = [np.interp(nodes, self.nodes, v, left=0.0, right=0.0) for v in (self.F, self.dF, self.d2F, self.d3F)]
        return InitialProfile(nodes, *vals)

    def negated(self) -> "InitialProfile":
        return InitialProfile(self.nodes, -self.F, -self.dF, -self.d2F, -self.d3F)


def cap_profile(y, amplitude: float, half_width: float):
    """amplitude * cos^2(pi y / (2 L)) on |y| < L, zero beyond, with three derivatives."""
    y = np.asarray(y, dtype=float)
    k = math.pi / (2.0 * half_width)
    inside = np.abs(y) < half_width
    c, s = np.cos(2 * k * y), np.sin(2 * k * y)
    F = np.where(inside, 0.5 * amplitude * (1.0 + c), 0.0)
    dF = np.where(inside, -amplitude * k * s, 0.0)
    d2F = np.where(inside, -2.0 * amplitude * k * k * c, 0.0)
    d3F = np.where(inside, 4.0 * amplitude * k ** 3 * s, 0.0)
    return F, dF, d2F, d3F


def dipole_profile(y, amplitude: float, half_width: float):
    """amplitude * sin(pi y / L) on |y| < L, zero beyond: an odd single-dipole shape."""
    y = np.asarray(y, dtype=float)
    k = math.pi / half_width
    inside = np.abs(y) < half_width
    s, c = np.sin(k * y), np.cos(k * y)
    return (np.where(inside, amplitude * s, 0.0), np.where(inside, amplitude * k * c, 0.0),
            np.where(inside, -amplitude * k * k * s, 0.0), np.where(inside, -amplitude * k ** 3 * c, 0.0))


def default_guess(spec: "ProfileProblemSpec", nodes: int = 801) -> InitialProfile:
    R = float(spec.radius)
    amplitude = 1.5 * spec.equilibrium_level
    L = 0.6 * R
    y = np.linspace(0.0, R, nodes)
    if spec.symmetry is Symmetry.ODD:
        return InitialProfile.from_function(y, lambda v: dipole_profile(v, amplitude, L))
    return InitialProfile.from_function(y, lambda v: cap_profile(v, amplitude, L))
