"""Two-point BVP solver on a finite interval.

Collocation itself is ``scipy.integrate.solve_bvp``: three-stage Lobatto IIIA
(4th order), damped Newton with at most 4 step halvings per iteration and at
most 4 Jacobian evaluations per mesh, residual-driven refinement up to
``max_nodes``. This module adds the problem/solution records, Newton
bookkeeping, the residual measure used across the package and an explicit
equidistributing refinement step.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np
from scipy.integrate import solve_bvp as _scipy_solve_bvp
from scipy.interpolate import CubicHermiteSpline

from .core import Mesh
from .errors import DomainError, MeshOverflow, NewtonFailure

logger = logging.getLogger(__name__)

# interior 5-point Lobatto abscissae, as offsets from the interval midpoint in units of h/2
_LOBATTO_OFFSET = math.sqrt(3.0 / 7.0)
MAX_INSERT_PER_INTERVAL = 8
# smallest equidistribution weight: an interval far below target merges with at most one neighbour
MIN_DENSITY = 0.5
_FD_STEP = np.finfo(float).eps ** 0.5


@dataclass(frozen=True, eq=False)
class BvpProblem:
    dimension: int
    rhs: Callable[[np.ndarray, np.ndarray], np.ndarray]
    bc: Callable[[np.ndarray, np.ndarray], np.ndarray]
    mesh: Mesh
    guess: np.ndarray
    jac: Optional[Callable] = field(default=None, repr=False)
    bc_jac: Optional[Callable] = field(default=None, repr=False)
    name: str = "bvp"

    def __post_init__(self):
        guess = np.asarray(self.guess, dtype=float)
        if guess.shape != (self.dimension, len(self.mesh)):
            raise DomainError(f"[{self.name}] guess shape {guess.shape} != ({self.dimension}, {len(self.mesh)})")
        if not np.all(np.isfinite(guess)):
            raise DomainError(f"[{self.name}] initial guess is not finite")
        n_bc = np.asarray(self.bc(guess[:, 0], guess[:, -1])).size
        if n_bc != self.dimension:
            raise DomainError(f"[{self.name}] {n_bc} boundary residuals for a {self.dimension}-dim system")
        object.__setattr__(self, "guess", guess)

    def with_guess(self, mesh: Mesh, guess: np.ndarray) -> "BvpProblem":
        return BvpProblem(self.dimension, self.rhs, self.bc, mesh, guess, self.jac, self.bc_jac, self.name)


@dataclass(frozen=True, eq=False)
class BvpSolution:
    mesh: Mesh
    states: np.ndarray
    interpolant: CubicHermiteSpline = field(repr=False)
    residual: float
    newton_iterations: int
    interval_residuals: np.ndarray = field(repr=False)
    refinement_passes: int = 0
    status: int = 0
    message: str = ""

    @property
    def converged(self) -> bool:
        return self.status == 0

    def __call__(self, x) -> np.ndarray:
        return self.interpolant(np.asarray(x, dtype=float))


def _interval_residuals(rhs, x: np.ndarray, spline: CubicHermiteSpline) -> np.ndarray:
    """RMS of (y' - f)/(1 + |f|) per interval, from a 5-point Lobatto rule."""
    h = np.diff(x)
    mid = x[:-1] + 0.5 * h
    s = 0.5 * h * _LOBATTO_OFFSET
    dspline = spline.derivative()
    sq = []
    for pts in (mid - s, mid, mid + s):
        f = rhs(pts, spline(pts))
        r = (dspline(pts) - f) / (1.0 + np.abs(f))
        sq.append(np.sum(r * r, axis=0))
    return np.sqrt(0.5 * (32.0 / 45.0 * sq[1] + 49.0 / 90.0 * (sq[0] + sq[2])))


def _assemble(problem: BvpProblem, x: np.ndarray, y: np.ndarray, jacobians: int, passes: int, status: int,
              message: str, max_nodes: int) -> BvpSolution:
    mesh = Mesh(x, max(max_nodes, x.size))
    spline = CubicHermiteSpline(x, y, problem.rhs(x, y), axis=1)
    per = _interval_residuals(problem.rhs, x, spline)
    return BvpSolution(mesh=mesh, states=np.array(y), interpolant=spline, residual=float(np.max(per)),
                       newton_iterations=int(jacobians), interval_residuals=per,
                       refinement_passes=int(passes), status=int(status), message=str(message))


def _difference_bc_jac(bc: Callable) -> Callable:
    """Forward-difference boundary Jacobian, the same estimate scipy makes internally."""

    def bc_jac(ya, yb):
        r0 = np.asarray(bc(ya, yb), dtype=float)
        blocks = []
        for which in (0, 1):
            base = np.array(ya if which == 0 else yb, dtype=float)
            block = np.empty((r0.size, base.size))
            for i in range(base.size):
                step = _FD_STEP * (1.0 + abs(base[i]))
                shifted = base.copy()
                shifted[i] += step
                r = bc(shifted, yb) if which == 0 else bc(ya, shifted)
                block[:, i] = (np.asarray(r, dtype=float) - r0) / step
            blocks.append(block)
        return blocks[0], blocks[1]

    return bc_jac


def solve_bvp(problem: BvpProblem, rtol: float = 1e-10, atol: float = 1e-10,
              max_nodes: Optional[int] = None) -> BvpSolution:
    """Collocation solve with refinement up to ``max_nodes``.

    ``newton_iterations`` on the result counts Newton linearizations (Jacobian
    evaluations) over every refinement pass; ``refinement_passes`` counts
    the mesh passes scipy made.
    """
    if not (rtol > 0 and atol > 0):
        raise DomainError(f"rtol and atol must be positive, got {rtol}, {atol}")
    cap = int(max_nodes or problem.mesh.max_nodes)
    bc_jac = problem.bc_jac or _difference_bc_jac(problem.bc)
    jacobians = 0

    def counted_bc_jac(ya, yb):
        nonlocal jacobians
        jacobians += 1
        return bc_jac(ya, yb)

    res = _scipy_solve_bvp(problem.rhs, problem.bc, problem.mesh.nodes, problem.guess,
                           fun_jac=problem.jac, bc_jac=counted_bc_jac, tol=rtol, bc_tol=atol,
                           max_nodes=cap, verbose=0)
    sol = _assemble(problem, res.x, res.y, jacobians, res.niter, res.status, res.message, cap)
    diag = {"status": res.status, "message": res.message, "nodes": int(res.x.size),
            "residual": sol.residual, "newton_iterations": jacobians, "refinement_passes": int(res.niter)}
    if res.status == 1:
        raise MeshOverflow(f"[{problem.name}] mesh needs more than {cap} nodes", sol, diag)
    if res.status != 0:
        raise NewtonFailure(f"[{problem.name}] {res.message}", sol, diag)
    logger.debug("[collocation] %s: %d nodes, residual %.3g, %d Newton iterations over %d passes",
                 problem.name, res.x.size, sol.residual, jacobians, res.niter)
    return sol


def _residual_of(problem: BvpProblem, x: np.ndarray, y: np.ndarray) -> float:
    if y.shape[0] != problem.dimension:
        raise DomainError(f"solution has {y.shape[0]} components, problem has {problem.dimension}")
    spline = CubicHermiteSpline(x, y, problem.rhs(x, y), axis=1)
    return float(np.max(_interval_residuals(problem.rhs, x, spline)))


def residual_norm(solution: BvpSolution, problem: BvpProblem) -> float:
    """Scaled collocation residual recomputed from the stored node values."""
    return _residual_of(problem, solution.mesh.nodes, np.asarray(solution.states, dtype=float))


def guess_residual(problem: BvpProblem) -> float:
    """Same measure for the problem's own mesh and guess, without solving."""
    return _residual_of(problem, problem.mesh.nodes, problem.guess)


def refine_mesh(solution: BvpSolution, target: float, max_nodes: Optional[int] = None) -> Mesh:
    """Equidistributing remesh once some interval misses ``target``.

    The rms residual of the collocation polynomial shrinks like h^3, so interval
    i is given the weight w_i = (r_i/target)^(1/3), clipped to
    [MIN_DENSITY, MAX_INSERT_PER_INTERVAL + 1], and the new nodes split the
    cumulative weight into equal parts. Intervals far below the target are
    coarsened; the mesh is returned unchanged when every interval meets it.
    """
    if not target > 0:
        raise DomainError(f"target must be positive, got {target}")
    x = solution.mesh.nodes
    cap = int(max_nodes or solution.mesh.max_nodes)
    r = np.asarray(solution.interval_residuals, dtype=float)
    if not np.any(r > target):
        return solution.mesh
    weight = np.clip((r / target) ** (1.0 / 3.0), MIN_DENSITY, MAX_INSERT_PER_INTERVAL + 1)
    cum = np.concatenate([[0.0], np.cumsum(weight)])
    total = int(math.ceil(cum[-1] - 1e-9)) + 1
    if total > cap:
        raise MeshOverflow(f"refinement needs {total} nodes, cap is {cap}", solution,
                           {"nodes": total, "max_nodes": cap})
    nodes = np.interp(np.linspace(0.0, cum[-1], total), cum, x)
    nodes[0], nodes[-1] = x[0], x[-1]
    return Mesh(nodes, cap)
