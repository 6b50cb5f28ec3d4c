"""Parameter continuation of profile solutions in p or in the drift mu."""
from __future__ import annotations

import logging
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np

from .collocation import guess_residual
from .config import SolverSettings
from .core import Branch, BranchPoint, Mesh, ProblemParams, ProfileForm, ProfileSolution
from .errors import ConvergenceError, DomainError, NewtonFailure, RescaleError
from .io import load_branch, load_profile, save_branch, save_profile
from .profiles.system import ProfileProblemSpec, build_system, normalizing_scale
from .profiles.solve import solve_profile

logger = logging.getLogger(__name__)

PARAMETERS = ("p", "mu")
SINGULAR_SUP = 1e12
RESCALE_FLOOR = 1e-12
GENERAL_FORMS = (ProfileForm.GENERAL, ProfileForm.F_FORM)

PathLike = Union[str, Path]


# ============== bifurcation points ==============
def bifurcation_points(n: float, l_max: int) -> List[Tuple[int, float]]:
    """(l, n+1 - 4/l) for every integer 4/n < l <= l_max."""
    if not n > 0:
        raise DomainError(f"n must be positive, got {n!r}")
    out = []
    for l in range(1, int(l_max) + 1):
        if l * n > 4.0:
            out.append((l, n + 1.0 - 4.0 / l))
    return out


def mu_points(l_max: int) -> List[float]:
    if l_max < 2:
        raise DomainError(f"l_max must be at least 2, got {l_max}")
    return [1.0 / l for l in range(2, int(l_max) + 1, 2)]


# ============== scaling transfer ==============
def _form_residual(sol: ProfileSolution) -> float:
    spec = ProfileProblemSpec.from_solution(sol)
    return guess_residual(build_system(spec, sol.mesh, sol.states()))


def rescale_form(sol: ProfileSolution, target: Union[str, ProfileForm]) -> ProfileSolution:
    """Move a solution between the general and normalized F-forms via F = C H(y/a).

    The rescaled profile is checked against the target equation; a residual
    more than ten times the source residual raises RescaleError.
    """
    target = ProfileForm(target)
    source = ProfileForm.GENERAL if sol.form is ProfileForm.F_FORM else sol.form
    allowed = (ProfileForm.GENERAL, ProfileForm.NORMALIZED)
    if target not in allowed or source not in allowed:
        raise DomainError(f"rescaling maps between {allowed[0].value} and {allowed[1].value}, "
                          f"got {sol.form.value} -> {target.value}")
    if source is target:
        return sol
    C, a = normalizing_scale(sol.params)
    to_normalized = target is ProfileForm.NORMALIZED
    x_scale = 1.0 / a if to_normalized else a
    rows = []
    for k, v in enumerate(sol.states()):
        rows.append(v * (a ** k / C if to_normalized else C / a ** k))
    eps = sol.eps / C if to_normalized else sol.eps * C
    y0 = None if sol.y0 is None else sol.y0 * x_scale
    out = sol.with_(form=target, mesh=Mesh(sol.nodes * x_scale, sol.mesh.max_nodes), eps=eps, y0=y0,
                    F=rows[0], dF=rows[1], d2F=rows[2], d3F=rows[3])
    before = _form_residual(sol)
    after = _form_residual(out)
    if after > 10.0 * before + RESCALE_FLOOR:
        raise RescaleError(f"rescaled residual {after:.3e} exceeds 10x source residual {before:.3e}")
    logger.debug("[rescale] %s -> %s: C=%.6g a=%.6g residual %.2e -> %.2e",
                 sol.form.value, target.value, C, a, before, after)
    return out.with_(residual=after)


# ============== jumps ==============
def _relative_distance(a: ProfileSolution, b: ProfileSolution, samples: int = 2001) -> float:
    R = min(a.radius, b.radius)
    y = np.linspace(0.0, R, samples)
    scale = max(a.sup_norm, b.sup_norm, 1e-300)
    return float(np.max(np.abs(a.evaluate(y) - b.evaluate(y))) / scale)


def detect_jump(prev: BranchPoint, nxt: ProfileSolution, threshold: float = 0.3) -> bool:
    """True when the multiindex changes or the profiles differ by more than ``threshold`` in sup norm."""
    if nxt.sigma is not None and not prev.sigma.same_pattern(nxt.sigma):
        logger.info("[branch] multiindex %s -> %s", prev.sigma, nxt.sigma)
        return True
    if prev.solution is None:
        return False
    dist = _relative_distance(prev.solution, nxt)
    if dist > threshold:
        logger.info("[branch] relative sup distance %.3f above %.3f", dist, threshold)
        return True
    return False


# ============== continuation ==============
def _param_value(sol: ProfileSolution, param: str) -> float:
    if param == "p":
        return float(sol.params.p)
    return float(sol.drift if sol.drift is not None else sol.params.beta)


def _spec_for(cur: ProfileSolution, param: str, value: float) -> ProfileProblemSpec:
    if param == "p":
        return ProfileProblemSpec.from_solution(cur, params=ProblemParams(cur.params.n, value), right_bc=None)
    return ProfileProblemSpec.from_solution(cur, drift=value, right_bc=None)


def _continuable(sol: ProfileSolution) -> ProfileSolution:
    """S-form starts continue in the normalized form, which coincides with it at p = n+1."""
    if sol.form is ProfileForm.S:
        return sol.with_(form=ProfileForm.NORMALIZED)
    if sol.form is ProfileForm.SIGN_LIMIT:
        raise DomainError("the n = infinity limit has no parameter to continue in")
    return sol


class _Archive:
    """Branch file plus a sibling <stem>_points/ directory with one profile per accepted point."""

    def __init__(self, path: Optional[PathLike], command: str, tol: float):
        self.path = Path(path) if path is not None else None
        self.provenance = {"command": command, "tolerances": {"tol": tol}}

    def accept(self, branch: Branch, value: float, sol: ProfileSolution) -> None:
        rel = None
        if self.path is not None:
            rel = f"{self.path.stem}_points/point_{len(branch.points):04d}.json"
            save_profile(sol, self.path.parent / rel, self.provenance)
            # only the newest point keeps its solution in memory once it is on disk
            if branch.points:
                branch.points[-1].solution = None
        branch.points.append(BranchPoint.from_solution(value, sol, rel))
        self.flush(branch)

    def flush(self, branch: Branch) -> None:
        if self.path is not None:
            save_branch(branch, self.path)


def _march(branch: Branch, cur: ProfileSolution, value: float, target: float, dp0: float,
           settings: SolverSettings, tol: float, archive: _Archive) -> Branch:
    cs = settings.continuation
    param = branch.parameter_name
    n1 = cur.params.n + 1.0
    direction = float(np.sign(target - value))
    dp = abs(dp0)
    dp_cap = cs.max_growth * abs(dp0)
    successes = 0
    halvings = 0
    close = 1e-13 * max(1.0, abs(target))
    branch.termination = "range_end"

    while direction and (target - value) * direction > close:
        new = value + direction * min(dp, abs(target - value))
        if param == "p" and (value - n1) * (new - n1) < 0 and abs(value - n1) > close:
            new = n1
        try:
            guess = cur
            at_crossing = new == n1 or abs(value - n1) <= close
            if param == "p" and at_crossing and cur.form in GENERAL_FORMS:
                # steps onto or off p = n+1 continue in the normalized scaling of the S-form
                guess = rescale_form(cur, ProfileForm.NORMALIZED)
                logger.info("[branch] rescaled to the normalized form at p=%.8g", value)
            spec = _spec_for(guess, param, new)
            sol = solve_profile(spec, guess=guess, tol=max(tol, cur.tol or 0.0), ladder=(), settings=settings,
                                relax=False)
            if sol.newton_iterations > cs.max_newton_iterations:
                raise NewtonFailure(f"{sol.newton_iterations} Newton iterations")
        except (ConvergenceError, DomainError, RescaleError) as exc:
            halvings += 1
            dp *= 0.5
            successes = 0
            logger.info("[branch] %s=%.8g rejected (%s); step -> %.3g", param, new, exc, dp)
            if halvings > cs.max_halvings or dp < cs.dp_min:
                branch.termination = "newton_failure"
                break
            continue
        if not np.all(np.isfinite(sol.F)) or sol.sup_norm > SINGULAR_SUP:
            branch.termination = "singularity"
            break
        jumped = detect_jump(branch.points[-1], sol, cs.jump_threshold)
        archive.accept(branch, new, sol)
        logger.info("[branch] %s=%.8g F(0)=%.8g sigma=%s", param, new, sol.F0_at_origin, sol.sigma)
        value, cur, halvings = new, sol, 0
        if jumped:
            branch.termination = "jump_detected"
            break
        successes += 1
        if successes >= cs.successes_to_grow:
            dp = min(dp * cs.growth, dp_cap)
            successes = 0

    archive.flush(branch)
    logger.info("[branch] %d points, termination %s", len(branch.points), branch.termination)
    return branch


def continue_branch(start: ProfileSolution, param: str, range_: Tuple[float, float], dp0: float, *,
                    tol: Optional[float] = None, settings: Optional[SolverSettings] = None,
                    archive: Optional[PathLike] = None) -> Branch:
    """Follow ``start`` in ``param`` towards the end of ``range_`` farther from its current value.

    Failures and jumps end the branch with a termination reason instead of raising.
    """
    if param not in PARAMETERS:
        raise DomainError(f"param must be one of {PARAMETERS}, got {param!r}")
    if not start.converged:
        raise DomainError("continuation needs a converged starting solution")
    if not dp0 > 0:
        raise DomainError(f"dp0 must be positive, got {dp0!r}")
    settings = settings or SolverSettings()
    tol = settings.tol if tol is None else tol
    cur = _continuable(start)
    value = _param_value(cur, param)
    lo, hi = sorted(float(v) for v in range_)
    if param == "p" and lo <= 1.0:
        raise DomainError(f"p-range must stay above 1, got {range_!r}")
    target = hi if abs(hi - value) >= abs(lo - value) else lo

    branch = Branch(parameter_name=param, settings={"dp0": float(dp0), "tol": float(tol), "target": target,
                                                    "form": cur.form.value, "symmetry": cur.symmetry.value,
                                                    "n": float(cur.params.n)})
    store = _Archive(archive, f"branch --param {param}", tol)
    store.accept(branch, value, cur)
    return _march(branch, cur, value, target, dp0, settings, tol, store)


def resume_branch(path: PathLike, target: float, dp0: float, *, tol: Optional[float] = None,
                  settings: Optional[SolverSettings] = None) -> Branch:
    """Reload a persisted branch and keep going from its last accepted point."""
    path = Path(path)
    branch = load_branch(path)
    if not branch.points:
        raise DomainError(f"{path} holds no accepted points")
    last = branch.points[-1]
    if last.solution_path is None:
        raise DomainError(f"{path}: last point has no stored solution")
    cur = load_profile(path.parent / last.solution_path)
    last.solution = cur
    settings = settings or SolverSettings()
    tol = float(branch.settings.get("tol", settings.tol)) if tol is None else tol
    branch.settings["target"] = float(target)
    archive = _Archive(path, f"branch --param {branch.parameter_name}", tol)
    logger.info("[branch] resuming at %s=%.8g with %d points", branch.parameter_name, last.param,
                len(branch.points))
    return _march(branch, cur, last.param, float(target), dp0, settings, tol, archive)
