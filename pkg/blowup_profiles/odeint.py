"""Adaptive Runge-Kutta integration, event detection and Poincare return maps.

All integration goes through ``scipy.integrate.solve_ivp`` with the RK45
(Dormand-Prince 5(4)) pair and its 4th-order dense output.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .errors import DomainError, IntegrationError, NoPeriodicOrbit

logger = logging.getLogger(__name__)

Rhs = Callable[[float, np.ndarray], np.ndarray]
EventFn = Callable[[float, np.ndarray], float]


@dataclass(frozen=True)
class IvpSystem:
    dimension: int
    rhs: Rhs
    name: str = "ivp"


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # shape (len(times), dimension)
    interpolant: Callable = field(repr=False)
    status: str = "completed"
    event_times: Tuple[np.ndarray, ...] = ()

    def __call__(self, t):
        out = np.asarray(self.interpolant(np.asarray(t, dtype=float)))
        return out.T if out.ndim == 2 else out

    @property
    def t_final(self) -> float:
        return float(self.times[-1])

    @property
    def y_final(self) -> np.ndarray:
        return np.array(self.states[-1])


@dataclass(frozen=True, eq=False)
class PeriodicOrbit:
    period: float
    anchor: np.ndarray
    times: np.ndarray
    states: np.ndarray
    distances: Tuple[float, ...] = ()
    return_error: float = 0.0
    trajectory: Optional[Trajectory] = field(default=None, repr=False)

    @property
    def amplitude(self) -> float:
        return float(np.max(np.abs(self.states[:, 0])))

    @property
    def max_value(self) -> float:
        return float(np.max(self.states[:, 0]))


def _finite_rhs(system: IvpSystem) -> Rhs:
    def fun(t, y):
        dy = np.asarray(system.rhs(t, y), dtype=float)
        if not np.all(np.isfinite(dy)):
            raise IntegrationError(f"[{system.name}] non-finite right-hand side at t={t:.6g}")
        return dy
    return fun


def integrate(system: IvpSystem, y0: Sequence[float], t_span: Tuple[float, float],
              rtol: float = 1e-10, atol: float = 1e-12, max_step: float = np.inf,
              bound: Optional[float] = None, events: Sequence[EventFn] = ()) -> Trajectory:
    """Integrate an IVP with dense output.

    With ``bound`` set, integration stops as soon as max|y| reaches it and the
    trajectory comes back with status ``"bound"``. Terminal ``events`` stop it
    with status ``"event"``; their crossing times land in ``event_times``.
    """
    if not (rtol > 0 and atol > 0):
        raise DomainError(f"rtol and atol must be positive, got {rtol}, {atol}")
    t0, t1 = float(t_span[0]), float(t_span[1])
    if t0 == t1 or not (math.isfinite(t0) and math.isfinite(t1)):
        raise DomainError(f"degenerate time span {t_span!r}")
    y0 = np.asarray(y0, dtype=float)
    if y0.shape != (system.dimension,):
        raise DomainError(f"initial state has shape {y0.shape}, system dimension is {system.dimension}")

    events = list(events)
    if bound is not None:
        def leave(t, y):
            return bound - np.max(np.abs(y))
        leave.terminal = True
        leave.direction = -1
        events.append(leave)

    sol = solve_ivp(_finite_rhs(system), (t0, t1), y0, method="RK45", rtol=rtol, atol=atol,
                    dense_output=True, events=events or None, max_step=max_step)
    status = {0: "completed", 1: "event"}.get(sol.status, "failed")
    fired = tuple(np.asarray(te) for te in (sol.t_events or ()))
    if sol.status == 1 and bound is not None and fired[-1].size:
        status = "bound"
    traj = Trajectory(times=sol.t, states=sol.y.T, interpolant=sol.sol, status=status,
                      event_times=fired[:len(fired) - (bound is not None)])
    if sol.status == -1:
        raise IntegrationError(f"[{system.name}] step-size underflow near t={sol.t[-1]:.6g}: {sol.message}", traj)
    return traj


def detect_events(trajectory: Trajectory, event: EventFn, scale: float = 1.0,
                  direction: int = 0, samples_per_step: int = 4) -> List[Tuple[float, np.ndarray]]:
    """Sign changes of ``event`` along the trajectory, refined on the dense output."""
    t = trajectory.times
    if t.size < 2:
        return []
    frac = np.linspace(0.0, 1.0, samples_per_step + 1)[:-1]
    grid = np.append((t[:-1, None] + np.diff(t)[:, None] * frac[None, :]).ravel(), t[-1])
    states = trajectory(grid)
    g = np.array([event(ti, xi) for ti, xi in zip(grid, states)])
    pos = g >= 0
    found = []
    for i in np.nonzero(pos[:-1] != pos[1:])[0]:
        rising = g[i + 1] > g[i]
        if direction > 0 and not rising or direction < 0 and rising:
            continue
        a, b = grid[i], grid[i + 1]
        if a > b:
            a, b = b, a

        def h(s):
            return event(s, trajectory(s))

        ts = brentq(h, a, b, xtol=1e-15 * max(1.0, abs(a)), rtol=4 * np.finfo(float).eps, maxiter=200)
        if abs(h(ts)) > 1e-12 * scale:
            logger.debug("[events] crossing at t=%.12g refined only to |g|=%.3g", ts, abs(h(ts)))
        found.append((float(ts), np.asarray(trajectory(ts))))
    return found


def _first_component(t, x):
    return x[0]


def find_periodic(system: IvpSystem, x0: Sequence[float], transient: float = 200.0,
                  section: Optional[EventFn] = None, direction: int = 1, tol: float = 1e-8,
                  max_returns: int = 400, chunk: Optional[float] = None,
                  rtol: float = 1e-11, atol: float = 1e-13, bound: float = 1e8,
                  samples: int = 2001) -> PeriodicOrbit:
    """Locate an attracting periodic orbit through its Poincare return map.

    After ``transient`` time units, returns to ``section`` (default: first
    component crossing zero upward) are collected until two successive returns
    are within ``tol`` of each other.
    """
    section = section or _first_component
    head = integrate(system, x0, (0.0, transient), rtol, atol, bound=bound)
    if head.status == "bound":
        raise IntegrationError(f"[{system.name}] orbit unbounded during the transient", head)

    t, state = head.t_final, head.y_final
    chunk = chunk or max(transient / 4.0, 10.0)
    returns: List[Tuple[float, np.ndarray]] = []
    distances: List[float] = []
    empty = 0
    while len(returns) <= max_returns:
        seg = integrate(system, state, (t, t + chunk), rtol, atol, bound=bound)
        if seg.status == "bound":
            raise IntegrationError(f"[{system.name}] orbit left |x| <= {bound:g}", seg)
        hits = [(te, xe) for te, xe in detect_events(seg, section, direction=direction)
                if not returns or te - returns[-1][0] > 1e-9 * max(1.0, abs(te))]
        if not hits:
            empty += 1
            x_end = seg.y_final
            speed = float(np.linalg.norm(system.rhs(seg.t_final, x_end)))
            if speed <= 1e-6 * max(1.0, float(np.linalg.norm(x_end))):
                raise NoPeriodicOrbit(f"[{system.name}] no periodic orbit; converged to equilibrium",
                                      "converged_to_equilibrium", distances, state=x_end, trajectory=seg)
            if empty >= 3:
                raise NoPeriodicOrbit(f"[{system.name}] no section crossings in {3 * chunk:g} time units",
                                      "no_crossings", distances, state=x_end, trajectory=seg)
        else:
            empty = 0
        for te, xe in hits:
            if returns:
                d = float(np.linalg.norm(xe - returns[-1][1]) / max(1.0, float(np.linalg.norm(xe))))
                distances.append(d)
                if d <= tol:
                    period = te - returns[-1][0]
                    logger.info("[periodic] %s: period %.10g after %d returns", system.name, period, len(returns))
                    return _one_period(system, xe, period, tuple(distances), rtol, atol, samples)
            returns.append((te, xe))
        t, state = seg.t_final, seg.y_final
    raise NoPeriodicOrbit(f"[{system.name}] return map did not converge; last distance "
                          f"{distances[-1] if distances else float('nan'):.3g}", "not_converged", distances,
                          state=state)


def _one_period(system: IvpSystem, anchor: np.ndarray, period: float, distances, rtol, atol,
                samples: int) -> PeriodicOrbit:
    one = integrate(system, anchor, (0.0, period), rtol, atol)
    times = np.linspace(0.0, period, samples)
    states = one(times)
    return PeriodicOrbit(period=float(period), anchor=np.array(anchor), times=times, states=states,
                         distances=distances, return_error=float(np.max(np.abs(one.y_final - anchor))),
                         trajectory=one)
