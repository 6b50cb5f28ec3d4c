"""Spatially periodic solutions of the S-form equation by shooting from the origin."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
from scipy.integrate import trapezoid

from ..core import alpha
from ..errors import DomainError, IntegrationError
from ..odeint import IvpSystem, PeriodicOrbit, Trajectory, detect_events, integrate

logger = logging.getLogger(__name__)

SHOOT_F0 = 1.5
SHOOT_D2_GUESS = -0.3787329255
# maximum of the periodic orbit F_* the n = 1 profiles oscillate about; one member of the
# one-parameter family that the F(0) = 1.5 shot also belongs to
F_STAR_PEAK = 1.535


def s_form_system(n: float) -> IvpSystem:
    """F'''' = F - |F|^(-alpha) F, evaluated without regularization."""
    a = alpha(n)

    def rhs(y, x):
        F = x[0]
        return np.array([x[1], x[2], x[3], F - np.sign(F) * abs(F) ** (1.0 - a)])

    return IvpSystem(4, rhs, name=f"S-form[n={n:g}]")


@dataclass(frozen=True, eq=False)
class SpatialOrbit:
    n: float
    sign: int
    d2_origin: float
    window: float
    peak_value: float
    mean: float
    maxima: Tuple[float, ...]
    orbit: PeriodicOrbit
    trajectory: Trajectory = field(repr=False)

    @property
    def period(self) -> float:
        return self.orbit.period

    def __call__(self, y) -> np.ndarray:
        """F at |y| (the orbit is even about the origin), valid for |y| <= window."""
        y = np.abs(np.asarray(y, dtype=float))
        if np.any(y > self.window):
            raise DomainError(f"orbit is only resolved on |y| <= {self.window:.6g}")
        out = self.trajectory(y)
        return out[..., 0] if out.ndim > 1 else out[0]

    def derivatives(self, y) -> np.ndarray:
        """Rows F, F', F'', F''' at |y|, with the odd derivatives reflected."""
        y = np.asarray(y, dtype=float)
        vals = np.atleast_2d(self.trajectory(np.abs(y)))
        s = np.sign(y)
        s[s == 0] = 1.0
        return np.vstack([vals[:, 0], s * vals[:, 1], vals[:, 2], s * vals[:, 3]])


def _escape(system: IvpSystem, state0, y_max: float, sign: int, rtol: float, atol: float) -> Tuple[float, int]:
    """Where and how the shot leaves the neighbourhood of the periodic orbit.

    +1: runs away above 3 |F(0)|, -1: crosses zero, 0: bounded up to y_max.
    """
    top = 3.0 * abs(state0[0])

    def up(t, x):
        return top - sign * x[0]
    up.terminal = True
    up.direction = -1

    def down(t, x):
        return sign * x[0]
    down.terminal = True
    down.direction = -1

    traj = integrate(system, state0, (0.0, y_max), rtol, atol, events=(up, down))
    if traj.status != "event":
        return y_max, 0
    t_up, t_down = (float(te[0]) if te.size else np.inf for te in traj.event_times)
    return (t_up, 1) if t_up < t_down else (t_down, -1)


def periodic_spatial(n: float, F0: float = SHOOT_F0, d2_guess: float = SHOOT_D2_GUESS, sign: int = 1,
                     y_max: float = 400.0, rtol: float = 1e-12, atol: float = 1e-14,
                     bisections: int = 80) -> SpatialOrbit:
    """Shoot from F(0) = sign*F0, F'(0) = F'''(0) = 0 and bisect F''(0) to maximize the bounded window."""
    if not n > 0:
        raise DomainError(f"n must be positive, got {n!r}")
    if sign not in (1, -1):
        raise DomainError("sign must be +1 or -1")
    system = s_form_system(n)

    def shot(c):
        return np.array([sign * F0, 0.0, sign * c, 0.0])

    c0 = d2_guess
    lo = hi = None
    delta = 1e-6
    while delta <= 0.2:
        e_lo, e_hi = _escape(system, shot(c0 - delta), y_max, sign, rtol, atol), \
            _escape(system, shot(c0 + delta), y_max, sign, rtol, atol)
        if e_lo[1] != e_hi[1]:
            lo, hi = (c0 - delta, e_lo), (c0 + delta, e_hi)
            break
        delta *= 4.0
    if lo is None:
        raise IntegrationError(f"[periodic] no bounded window found around F''(0) = {d2_guess}")

    for _ in range(bisections):
        mid_c = 0.5 * (lo[0] + hi[0])
        if mid_c in (lo[0], hi[0]):
            break
        e_mid = _escape(system, shot(mid_c), y_max, sign, rtol, atol)
        if e_mid[1] == 0:
            lo = hi = (mid_c, e_mid)
            break
        if e_mid[1] == lo[1][1]:
            lo = (mid_c, e_mid)
        else:
            hi = (mid_c, e_mid)
    best_c, best = max((lo, hi), key=lambda item: item[1][0])
    window = best[0]
    traj = integrate(system, shot(best_c), (0.0, window), rtol, atol)
    logger.info("[periodic] n=%g F''(0)=%.12f bounded on [0, %.3f]", n, best_c, window)
    return _analyse(n, sign, best_c, window, traj)


def _analyse(n: float, sign: int, c: float, window: float, traj: Trajectory) -> SpatialOrbit:
    # maxima of sign*F: F' crosses zero with sign*F' going from + to -
    peaks = [(0.0, traj(0.0))] + detect_events(traj, lambda t, x: sign * x[1], direction=-1)
    values = np.array([sign * st[0] for _, st in peaks])
    top = float(values.max())
    tops = [t for (t, _), v in zip(peaks, values) if v >= top - 1e-3 * abs(top)]
    if len(tops) >= 2:
        start, period = tops[0], float(np.median(np.diff(tops)))
    else:
        start = tops[0]
        period = float(peaks[-1][0] - peaks[0][0]) if len(peaks) > 1 else window
        logger.warning("[warn] only one dominant maximum inside the bounded window; period is approximate")
    if start + period > window:
        period = window - start
    times = np.linspace(start, start + period, 2001)
    states = traj(times)
    orbit = PeriodicOrbit(period=period, anchor=np.array(states[0]), times=times - start, states=states,
                          return_error=float(np.max(np.abs(states[-1] - states[0]))), trajectory=traj)
    mean = float(trapezoid(states[:, 0], times) / period)
    return SpatialOrbit(n=n, sign=sign, d2_origin=float(c), window=float(window), peak_value=sign * top,
                        mean=mean, maxima=tuple(float(t) for t, _ in peaks), orbit=orbit, trajectory=traj)
