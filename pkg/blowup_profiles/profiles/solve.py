from __future__ import annotations

import logging
import math
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from ..collocation import BvpSolution, solve_bvp
from ..config import SolverSettings
from ..core import Mesh, ProfileSolution, RightBC
from ..errors import ConvergenceError, DomainError, MeshOverflow, NewtonFailure
from .farfield import recover_C0
from .guess import InitialProfile, default_guess
from .multiindex import classify, interface_estimate
from .system import ProfileProblemSpec, build_system

logger = logging.getLogger(__name__)

Guess = Union[InitialProfile, ProfileSolution, None]


def _start(spec: ProfileProblemSpec, guess: Guess, nodes: int) -> Tuple[Mesh, np.ndarray]:
    R = float(spec.radius)
    if isinstance(guess, ProfileSolution):
        if abs(guess.radius - R) <= 1e-12 * R and guess.nodes[0] == 0.0:
            return Mesh(guess.nodes, spec.max_nodes), guess.states()
        guess = InitialProfile(guess.nodes, guess.F, guess.dF, guess.d2F, guess.d3F)
    if guess is None:
        guess = default_guess(spec, nodes)
    x = guess.nodes
    if x[0] == 0.0 and abs(x[-1] - R) <= 1e-12 * R and x.size >= 5:
        return Mesh(x, spec.max_nodes), guess.states()
    # restrict to y >= 0 and resample onto a uniform mesh of [0, R]
    mesh = Mesh.uniform(0.0, R, nodes, spec.max_nodes)
    return mesh, guess.resample(mesh.nodes).states()


def _to_solution(spec: ProfileProblemSpec, bvp: BvpSolution, converged: bool,
                 tol: Optional[float] = None) -> ProfileSolution:
    F, dF, d2F, d3F = bvp.states
    return ProfileSolution(params=spec.params, form=spec.form, symmetry=spec.symmetry, right_bc=spec.right_bc,
                           eps=spec.eps, mesh=bvp.mesh, F=F, dF=dF, d2F=d2F, d3F=d3F,
                           residual=bvp.residual, converged=converged,
                           newton_iterations=bvp.newton_iterations, drift=spec.drift, tol=tol)


def annotate(sol: ProfileSolution, tail_threshold: Optional[float] = None) -> ProfileSolution:
    """Attach multiindex, interface estimate (compact support) or C0 (far field)."""
    changes = {"sigma": classify(sol, tail_threshold)}
    if sol.right_bc is RightBC.COMPACT:
        try:
            changes["y0"] = interface_estimate(sol).y0
        except DomainError as exc:
            logger.warning("[warn] interface estimate failed: %s", exc)
    else:
        changes["C0"] = recover_C0(sol)
    return sol.with_(**changes)


def _failure(rung: ProfileProblemSpec, exc: ConvergenceError, eps_k: float, tol_k: float) -> ConvergenceError:
    partial = _to_solution(rung, exc.solution, converged=False, tol=tol_k) if exc.solution is not None else None
    exc.diagnostics.update(eps=eps_k, tol=tol_k)
    return type(exc)(f"[solve] eps={eps_k:.1e}: {exc}", partial, exc.diagnostics)


def solve_profile(spec: ProfileProblemSpec, guess: Guess = None, tol: Optional[float] = None,
                  max_nodes: Optional[int] = None, ladder: Optional[Sequence[float]] = None,
                  settings: Optional[SolverSettings] = None, relax: bool = True) -> ProfileSolution:
    """Converged profile for ``spec``.

    Unless ``ladder`` is given, eps is marched down from the preset's ladder
    start to ``spec.eps`` one decade at a time with tolerance max(tol, eps_k);
    a ProfileSolution guess at the same eps is solved directly.

    A rung whose Newton iteration fails is approached through the geometric
    midpoint of the eps step (``max_rung_splits`` times at most). A rung that
    overflows the node cap is retried with the tolerance raised by
    ``tol_relax_factor`` (``max_tol_relaxations`` times at most, only with
    ``relax``). The tolerance reached is kept as ``tol`` on the result.
    """
    settings = settings or SolverSettings()
    tol = settings.tol if tol is None else tol
    cap = int(max_nodes or spec.max_nodes)
    if cap != spec.max_nodes:
        spec = spec.with_(max_nodes=cap)
    if ladder is None:
        warm = isinstance(guess, ProfileSolution) and guess.eps == spec.eps
        rungs = [spec.eps] if warm else list(settings.eps_ladder(spec.eps))
    else:
        rungs = [r for r in ladder if r > spec.eps] + [spec.eps]

    mesh, states = _start(spec, guess, settings.initial_nodes)
    bvp: Optional[BvpSolution] = None
    solved_eps: Optional[float] = None
    floor = 0.0
    splits = relaxations = 0
    while rungs:
        eps_k = rungs[0]
        last = len(rungs) == 1
        rung = spec if last else spec.with_(eps=eps_k)
        tol_k = max(tol if last else max(tol, eps_k), floor)
        try:
            bvp = solve_bvp(build_system(rung, mesh, states), tol_k, tol_k, cap)
        except NewtonFailure as exc:
            if solved_eps is None or splits >= settings.max_rung_splits or solved_eps < 1.5 * eps_k:
                raise _failure(rung, exc, eps_k, tol_k) from exc
            splits += 1
            mid = math.sqrt(solved_eps * eps_k)
            logger.info("[solve] eps=%.1e: %s; stepping through eps=%.1e first", eps_k, exc, mid)
            rungs.insert(0, mid)
            continue
        except MeshOverflow as exc:
            if not relax or relaxations >= settings.max_tol_relaxations:
                raise _failure(rung, exc, eps_k, tol_k) from exc
            relaxations += 1
            floor = tol_k * settings.tol_relax_factor
            logger.warning("[warn] eps=%.1e: tolerance %.1e needs more than %d nodes, retrying at %.1e",
                           eps_k, tol_k, cap, floor)
            continue
        rungs.pop(0)
        solved_eps = eps_k
        mesh, states = bvp.mesh, bvp.states
        zeros = int(np.count_nonzero(np.diff(np.signbit(states[0]))))
        logger.info("[solve] eps=%.1e tol=%.1e converged, %d nodes, residual %.2e, %d Newton iterations, "
                    "%d sign changes", eps_k, tol_k, len(mesh), bvp.residual, bvp.newton_iterations, zeros)
    reached = max(tol, floor)
    if reached > tol:
        logger.warning("[warn] eps=%.1e solved to tolerance %.1e instead of %.1e", spec.eps, reached, tol)
    sol = _to_solution(spec, bvp, converged=True, tol=reached)
    return annotate(sol, settings.tail_threshold)
