from __future__ import annotations

from typing import Optional, Sequence, Tuple

import numpy as np

from ..core import ProfileSolution, Symmetry
from ..errors import DomainError
from .guess import InitialProfile
from .shooting import SpatialOrbit


def _extended(base: ProfileSolution, y: np.ndarray) -> np.ndarray:
    """Rows F..F''' of ``base`` on the whole line, zero beyond its radius."""
    a = np.abs(y)
    inside = a <= base.radius
    clipped = np.minimum(a, base.radius)
    s = np.sign(y)
    s[s == 0] = 1.0
    odd_profile = base.symmetry is Symmetry.ODD
    rows = []
    for k in range(4):
        v = base.evaluate(clipped, k)
        # parity of F^(k): even profile flips odd derivatives, odd profile flips even ones
        if (k % 2 == 1) != odd_profile:
            v = s * v
        rows.append(np.where(inside, v, 0.0))
    return np.vstack(rows)


def glue_guess(components: Sequence[Tuple[int, float]], base: ProfileSolution,
               radius: Optional[float] = None, nodes: int = 4001) -> InitialProfile:
    """Superposition sum_i sign_i F_base(y - shift_i) on [-R', R'] covering every copy."""
    if not components:
        raise DomainError("need at least one component to glue")
    shifts = [float(s) for _, s in components]
    if any(b < a for a, b in zip(shifts[:-1], shifts[1:])):
        raise DomainError("component shifts must be ordered")
    for sign, _ in components:
        if sign not in (1, -1):
            raise DomainError(f"component sign must be +1 or -1, got {sign!r}")
    R = radius or max(abs(s) for s in shifts) + base.radius
    y = np.linspace(-R, R, nodes)
    total = np.zeros((4, y.size))
    for sign, shift in components:
        total += sign * _extended(base, y - shift)
    return InitialProfile(y, *total)


def plus_2k_guess(k: int, base: ProfileSolution, orbit: SpatialOrbit, nodes: int = 4001) -> InitialProfile:
    """Even seed with 2k crossings of +F_*: a window of the periodic orbit closed by F_0 tails.

    For odd k the window is centred on a maximum of the orbit, for even k on a
    minimum; both ends sit on a maximum where the decaying F_0 half takes over.
    """
    if k < 1:
        raise DomainError(f"k must be at least 1, got {k}")
    if base.symmetry is not Symmetry.EVEN:
        raise DomainError("the closing tails come from an even base profile")
    T = orbit.period
    j = k // 2
    if k % 2:
        phase, W = 0.0, j * T
    else:
        phase, W = 0.5 * T, (j - 0.5) * T
    if phase + W > orbit.window:
        raise DomainError(f"orbit window {orbit.window:.4g} too short for k={k}")
    R = W + base.radius
    y = np.linspace(-R, R, nodes)
    out = np.zeros((4, y.size))
    core = np.abs(y) <= W
    if core.any():
        yc = y[core]
        side = np.where(yc < 0, -1.0, 1.0)
        out[:, core] = orbit.derivatives(side * (phase + np.abs(yc)))
    s = np.sign(y[~core])
    out[:, ~core] = _extended(base, y[~core] - s * W)
    return InitialProfile(y, *out)
