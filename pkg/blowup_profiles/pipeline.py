"""One function per CLI subcommand: run the computation, write the requested files, return a summary line."""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import asdict
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import io
from .config import SolverSettings
from .continuation import continue_branch, resume_branch
from .core import ProblemParams, ProfileForm, ProfileSolution, RightBC, Symmetry
from .errors import ConvergenceError, DomainError
from .oscillatory import Direction, char_spectrum, interface_exponent, oscillatory_orbit
from .profiles import (InitialProfile, ProfileProblemSpec, classify, default_radius, energy, glue_guess,
                       interface_estimate, periodic_spatial, plus_2k_guess, solve_profile)
from .spectral import KERNEL_AT_ORIGIN, SpectralBasis, adjoint_eigen_defect

logger = logging.getLogger(__name__)


def _provenance(command: str, settings: SolverSettings, **extra: Any) -> Dict[str, Any]:
    tol = {"eps": settings.eps, "tol": settings.tol, "max_nodes": settings.max_nodes}
    tol.update(extra)
    return {"command": command, "tolerances": tol}


def _fmt_opt(v: Optional[float], spec: str = ".6g") -> str:
    return "-" if v is None else format(v, spec)


def _profile_summary(sol: ProfileSolution) -> str:
    return (f"[solve] n={sol.params.n:g} p={sol.params.p:g} {sol.form.value} {sol.symmetry.value} "
            f"F(0)={sol.F0_at_origin:.10g} sigma={sol.sigma} y0={_fmt_opt(sol.y0)} C0={_fmt_opt(sol.C0)} "
            f"nodes={len(sol.mesh)} residual={sol.residual:.2e}")


# ============== solve ==============
def parse_components(text: str) -> List[Tuple[int, float]]:
    """'+1@-6,-1@6' -> [(1, -6.0), (-1, 6.0)]."""
    out = []
    for token in filter(None, (t.strip() for t in text.split(","))):
        sign_txt, _, shift_txt = token.partition("@")
        if sign_txt not in ("+1", "-1", "1") or not shift_txt:
            raise DomainError(f"cannot parse glue component {token!r}; expected sign@shift")
        out.append((-1 if sign_txt == "-1" else 1, float(shift_txt)))
    return out


def _seed(spec: ProfileProblemSpec, guess_path: Optional[str], glue: Optional[str], plus_2k: Optional[int],
          base_path: Optional[str], negate: bool):
    guess = None
    if guess_path:
        guess = io.load_profile(guess_path)
    elif glue or plus_2k:
        if not base_path:
            raise DomainError("--glue and --plus-2k need --base with a stored F0 profile")
        base = io.load_profile(base_path)
        if glue:
            guess = glue_guess(parse_components(glue), base)
        else:
            orbit = periodic_spatial(spec.params.n)
            guess = plus_2k_guess(plus_2k, base, orbit)
    if negate:
        if guess is None:
            raise DomainError("--negate needs a seed (--guess, --glue or --plus-2k)")
        if isinstance(guess, ProfileSolution):
            guess = InitialProfile(guess.nodes, guess.F, guess.dF, guess.d2F, guess.d3F)
        guess = guess.negated()
    if isinstance(guess, InitialProfile) and spec.radius < float(np.max(guess.nodes)):
        spec = spec.with_(radius=float(np.max(guess.nodes)))
    return spec, guess


def run_solve(n: float, p: float, settings: SolverSettings, out: Optional[str] = None, *,
              form: str = ProfileForm.S.value, symmetry: str = Symmetry.EVEN.value, radius: Optional[float] = None,
              right_bc: Optional[str] = None, drift: Optional[float] = None, guess: Optional[str] = None,
              glue: Optional[str] = None, plus_2k: Optional[int] = None, base: Optional[str] = None,
              negate: bool = False, csv: Optional[str] = None, log_interface: bool = False) -> str:
    params = ProblemParams(n, p)
    form = ProfileForm(form)
    if form is ProfileForm.S and params.regime.value != "S":
        form = ProfileForm.GENERAL
        logger.info("[solve] p != n+1: solving the general F-form")
    spec = ProfileProblemSpec(params=params, form=form, symmetry=Symmetry(symmetry),
                              radius=radius or default_radius(n), eps=settings.eps,
                              right_bc=RightBC(right_bc) if right_bc else None, drift=drift,
                              max_nodes=settings.max_nodes)
    spec, seed = _seed(spec, guess, glue, plus_2k, base, negate)
    prov = _provenance("solve", settings, n=n, p=p, form=form.value, symmetry=spec.symmetry.value)
    try:
        sol = solve_profile(spec, guess=seed, settings=settings)
    except ConvergenceError as exc:
        if out and isinstance(exc.solution, ProfileSolution):
            io.save_profile(exc.solution, out, prov)
            logger.warning("[warn] unconverged iterate written to %s", out)
        raise
    if out:
        io.save_profile(sol, out, prov)
    if csv:
        io.profile_csv(sol, csv, log_interface=log_interface)
    return _profile_summary(sol)


# ============== branch ==============
def _branch_job(job: Dict[str, Any]) -> Tuple[str, str]:
    """Worker entry point; one branch archive per seed."""
    settings = SolverSettings.from_dict(job["settings"])
    if job.get("resume"):
        branch = resume_branch(job["out"], job["target"], job["dp"], settings=settings)
    else:
        start = io.load_profile(job["seed"])
        lo_hi = (_start_value(start, job["param"]), job["target"])
        branch = continue_branch(start, job["param"], lo_hi, job["dp"], settings=settings, archive=job["out"])
    if job.get("csv"):
        io.branch_csv(branch, job["csv"])
    first, last = branch.points[0], branch.points[-1]
    return job["out"], (f"[branch] {branch.parameter_name}: {first.param:g} -> {last.param:g}, "
                        f"{len(branch.points)} points, F(0) {first.F0_at_origin:.8g} -> {last.F0_at_origin:.8g}, "
                        f"termination {branch.termination}")


def _start_value(sol: ProfileSolution, param: str) -> float:
    if param == "p":
        return float(sol.params.p)
    return float(sol.drift if sol.drift is not None else sol.params.beta)


def _branch_outputs(seeds: Sequence[str], out: str, csv: Optional[str]) -> List[Tuple[str, str, Optional[str]]]:
    if len(seeds) == 1:
        return [(seeds[0], out, csv)]
    out_p = Path(out)
    rows = []
    for seed in seeds:
        stem = f"{out_p.stem}_{Path(seed).stem}"
        csv_path = str(Path(csv).with_name(f"{Path(csv).stem}_{Path(seed).stem}.csv")) if csv else None
        rows.append((seed, str(out_p.with_name(stem + out_p.suffix)), csv_path))
    return rows


def run_branch(seeds: Sequence[str], param: str, to: float, dp: float, out: str, settings: SolverSettings, *,
               csv: Optional[str] = None, resume: bool = False,
               parallel: int = 1) -> str:
    if not seeds and not resume:
        raise DomainError("branch needs at least one --from profile (or --resume)")
    settings_dict = asdict(settings)
    if resume:
        jobs = [{"resume": True, "out": out, "target": to, "dp": dp, "settings": settings_dict, "csv": csv}]
    else:
        jobs = [{"seed": seed, "param": param, "target": to, "dp": dp, "out": o, "csv": c,
                 "settings": settings_dict} for seed, o, c in _branch_outputs(seeds, out, csv)]
    if parallel <= 1 or len(jobs) == 1:
        return "\n".join(_branch_job(job)[1] for job in jobs)
    lines: Dict[str, str] = {}
    with ProcessPoolExecutor(max_workers=parallel) as ex:
        futures = {ex.submit(_branch_job, job): job["out"] for job in jobs}
        for fut in as_completed(futures):
            path, line = fut.result()
            lines[path] = line
            logger.info("%s (%s)", line, path)
    return "\n".join(lines[job["out"]] for job in jobs)


# ============== oscillate ==============
def run_oscillate(n: float, settings: SolverSettings, *, direction: str = Direction.OSCILLATORY.value,
                  x0: Optional[Sequence[float]] = None, csv: Optional[str] = None, orbit_csv: Optional[str] = None,
                  mu: Optional[float] = None) -> str:
    if Direction(direction) is Direction.NON_OSCILLATORY:
        mu_val = interface_exponent(n) if mu is None else mu
        spec = char_spectrum(mu_val)
        roots = ", ".join(f"{r.real:.10g}{r.imag:+.10g}i" for r in spec.roots)
        return f"[oscillate] non-oscillatory mu={mu_val:g}: roots {roots}; stable={spec.stable}"
    os_ = settings.oscillatory
    comp = oscillatory_orbit(n, x0, transient=os_.transient, tol=os_.return_tol, rtol=os_.rtol, atol=os_.atol)
    if csv:
        io.component_csv(comp, csv)
    if orbit_csv and comp.orbit is not None:
        io.orbit_csv(comp.orbit.times, comp.orbit.states, orbit_csv)
    return (f"[oscillate] n={n:g} mu={comp.mu:.6g} period={comp.period:.10g} amplitude={comp.amplitude:.6g} "
            f"sign_changes={comp.sign_changes()} residual={comp.residual:.2e}")


# ============== spectral / kernel ==============
def _basis(settings: SolverSettings, l_max: Optional[int]) -> SpectralBasis:
    sp = settings.spectral
    return SpectralBasis(l_max=sp.l_max if l_max is None else l_max, cutoff=sp.cutoff, panels=sp.panels,
                         panel_order=sp.panel_order)


def run_spectral(settings: SolverSettings, *, l_max: Optional[int] = None, gram_csv: Optional[str] = None) -> str:
    basis = _basis(settings, l_max)
    gram = basis.biorthogonality()
    off = float(np.max(np.abs(gram - np.eye(gram.shape[0]))))
    moments = basis.biorthogonality(method="moments")
    drift = float(np.max(np.abs(gram - moments)))
    defect = max(adjoint_eigen_defect(l) for l in range(basis.l_max + 1))
    if gram_csv:
        io.matrix_csv(gram, gram_csv)
    return (f"[spectral] l_max={basis.l_max} mass={basis.mass():.12g} K(0)={float(basis.kernel(0.0)):.12g} "
            f"(exact {KERNEL_AT_ORIGIN:.12g}) gram_defect={off:.2e} moment_drift={drift:.2e} "
            f"adjoint_defect={defect:.2e}")


def run_kernel(settings: SolverSettings, csv: str, *, y_max: float = 10.0, samples: int = 201) -> str:
    basis = _basis(settings, None)
    y = np.linspace(0.0, y_max, samples)
    io.kernel_csv(basis.kernel_table(y), csv)
    return f"[kernel] {samples} rows on [0, {y_max:g}] -> {csv}"


# ============== classify / periodic ==============
def run_classify(path: str, settings: SolverSettings, *, tail_threshold: Optional[float] = None) -> str:
    sol = io.load_profile(path)
    thr = settings.tail_threshold if tail_threshold is None else tail_threshold
    sigma = classify(sol, thr)
    parts = [f"[classify] {path}: sigma={sigma}"]
    if sol.right_bc is RightBC.COMPACT:
        try:
            est = interface_estimate(sol)
            parts.append(f"y0={est.y0:.6g} zeros_near_interface={est.zero_count} slope={_fmt_opt(est.slope)}")
        except DomainError as exc:
            logger.warning("[warn] interface estimate failed: %s", exc)
    if sol.form is ProfileForm.S and sol.params.regime.value == "S":
        rep = energy(sol)
        parts.append(f"E={rep.E:.10g} H0={rep.H0:.6g}")
    return " ".join(parts)


def run_periodic(n: float, *, F0: Optional[float] = None, csv: Optional[str] = None) -> str:
    kwargs = {} if F0 is None else {"F0": F0}
    orbit = periodic_spatial(n, **kwargs)
    if csv:
        io.orbit_csv(orbit.orbit.times, orbit.orbit.states, csv)
    return (f"[periodic] n={n:g} F''(0)={orbit.d2_origin:.10g} window={orbit.window:.4g} "
            f"period={orbit.period:.8g} max={orbit.orbit.max_value:.6g} mean={orbit.mean:.6g}")
