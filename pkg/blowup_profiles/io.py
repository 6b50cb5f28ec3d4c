"""JSON archives for profiles and branches, plus the CSV tables the CLI writes."""
from __future__ import annotations

import csv
import json
import os
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

import numpy as np

from .core import (Branch, BranchPoint, Mesh, MultiIndex, ProblemParams, ProfileForm, ProfileSolution,
                   RightBC, Symmetry)
from .errors import ArchiveError, SchemaMismatch

SCHEMA_VERSION = 1

PathLike = Union[str, Path]


# ============== JSON ==============
def _opt_float(v) -> Optional[float]:
    return None if v is None else float(v)


def _dump(obj: Dict[str, Any], path: PathLike) -> str:
    """Write ``obj`` as sorted JSON via a temp file, so a crash never leaves half an archive."""
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    tmp = out.with_name(out.name + ".tmp")
    tmp.write_text(json.dumps(obj, sort_keys=True, indent=1) + "\n", encoding="utf-8")
    os.replace(tmp, out)
    return str(out)


def _load(path: PathLike, kind: str) -> Dict[str, Any]:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise ArchiveError(f"archive not found: {path}") from exc
    except (OSError, json.JSONDecodeError) as exc:
        raise ArchiveError(f"cannot read archive {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ArchiveError(f"{path}: top level is not an object")
    version = data.get("version")
    if version != SCHEMA_VERSION:
        raise SchemaMismatch(f"{path}: schema version {version!r}, expected {SCHEMA_VERSION}")
    if data.get("kind", kind) != kind:
        raise ArchiveError(f"{path}: holds a {data.get('kind')!r} archive, expected {kind!r}")
    return data


def profile_to_dict(sol: ProfileSolution, provenance: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    return {
        "version": SCHEMA_VERSION,
        "kind": "profile",
        "params": {"n": float(sol.params.n), "p": float(sol.params.p)},
        "form": sol.form.value,
        "symmetry": sol.symmetry.value,
        "right_bc": sol.right_bc.value,
        "eps": float(sol.eps),
        "radius": sol.radius,
        "drift": _opt_float(sol.drift),
        "mesh": {"nodes": sol.nodes.tolist(), "max_nodes": int(sol.mesh.max_nodes)},
        "F": sol.F.tolist(),
        "dF": sol.dF.tolist(),
        "d2F": sol.d2F.tolist(),
        "d3F": sol.d3F.tolist(),
        "residual": float(sol.residual),
        "tol": _opt_float(sol.tol),
        "converged": bool(sol.converged),
        "newton_iterations": int(sol.newton_iterations),
        "y0": _opt_float(sol.y0),
        "sigma": None if sol.sigma is None else str(sol.sigma),
        "tail_threshold": None if sol.sigma is None else float(sol.sigma.tail_threshold),
        "C0": _opt_float(sol.C0),
        "provenance": provenance if provenance is not None else (sol.provenance or {}),
    }


def profile_from_dict(data: Dict[str, Any]) -> ProfileSolution:
    try:
        sigma = None
        if data.get("sigma") is not None:
            sigma = MultiIndex.parse(data["sigma"], data.get("tail_threshold") or 1e-4)
        mesh = Mesh(np.asarray(data["mesh"]["nodes"], dtype=float), int(data["mesh"]["max_nodes"]))
        return ProfileSolution(
            params=ProblemParams(data["params"]["n"], data["params"]["p"]),
            form=ProfileForm(data["form"]),
            symmetry=Symmetry(data["symmetry"]),
            right_bc=RightBC(data["right_bc"]),
            eps=float(data["eps"]),
            mesh=mesh,
            F=data["F"], dF=data["dF"], d2F=data["d2F"], d3F=data["d3F"],
            residual=float(data["residual"]),
            converged=bool(data["converged"]),
            y0=_opt_float(data.get("y0")),
            sigma=sigma,
            C0=_opt_float(data.get("C0")),
            newton_iterations=int(data.get("newton_iterations", 0)),
            drift=_opt_float(data.get("drift")),
            tol=_opt_float(data.get("tol")),
            provenance=data.get("provenance") or {},
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ArchiveError(f"malformed profile archive: {exc}") from exc


def save_profile(sol: ProfileSolution, path: PathLike, provenance: Optional[Dict[str, Any]] = None) -> str:
    return _dump(profile_to_dict(sol, provenance), path)


def load_profile(path: PathLike) -> ProfileSolution:
    return profile_from_dict(_load(path, "profile"))


def _point_dict(pt: BranchPoint) -> Dict[str, Any]:
    return {
        "param": float(pt.param),
        "F0_at_origin": float(pt.F0_at_origin),
        "sup_norm": float(pt.sup_norm),
        "l2_norm": float(pt.l2_norm),
        "y0": _opt_float(pt.y0),
        "sigma": str(pt.sigma),
        "solution_path": pt.solution_path,
    }


def save_branch(branch: Branch, path: PathLike) -> str:
    """Branch table; solution paths are stored relative to the branch file."""
    return _dump({
        "version": SCHEMA_VERSION,
        "kind": "branch",
        "parameter_name": branch.parameter_name,
        "termination": branch.termination,
        "settings": branch.settings,
        "points": [_point_dict(pt) for pt in branch.points],
    }, path)


def load_branch(path: PathLike, with_solutions: bool = False) -> Branch:
    data = _load(path, "branch")
    base = Path(path).parent
    try:
        points = []
        for raw in data["points"]:
            sol = None
            rel = raw.get("solution_path")
            if with_solutions and rel:
                sol = load_profile(base / rel)
            points.append(BranchPoint(
                param=float(raw["param"]), F0_at_origin=float(raw["F0_at_origin"]),
                sup_norm=float(raw["sup_norm"]), l2_norm=float(raw["l2_norm"]),
                y0=_opt_float(raw.get("y0")), sigma=MultiIndex.parse(raw["sigma"]),
                solution_path=rel, solution=sol,
            ))
        return Branch(parameter_name=data["parameter_name"], points=points,
                      termination=data["termination"], settings=data.get("settings") or {})
    except (KeyError, TypeError, ValueError) as exc:
        raise ArchiveError(f"malformed branch archive {path}: {exc}") from exc


# ============== CSV ==============
def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    return f"{float(v):.17g}"


def write_rows(path: PathLike, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return str(out)


def log_interface_rows(sol: ProfileSolution) -> List[List[float]]:
    """(log10(y0 - y), log10|F|) for nodes left of the interface with F != 0."""
    if sol.y0 is None:
        raise ArchiveError("log-interface output needs an interface estimate y0")
    y, F = sol.nodes, sol.F
    keep = (y < sol.y0) & (F != 0.0)
    return [[float(a), float(b)] for a, b in zip(np.log10(sol.y0 - y[keep]), np.log10(np.abs(F[keep])))]


def profile_csv(sol: ProfileSolution, path: PathLike, log_interface: bool = False) -> str:
    if log_interface:
        return write_rows(path, ("log10_dist", "log10_absF"), log_interface_rows(sol))
    return write_rows(path, ("y", "F", "dF", "d2F", "d3F"), zip(sol.nodes, sol.F, sol.dF, sol.d2F, sol.d3F))


def branch_csv(branch: Branch, path: PathLike) -> str:
    rows = ([pt.param, pt.F0_at_origin, pt.sup_norm, pt.l2_norm, pt.y0, str(pt.sigma)] for pt in branch.points)
    return write_rows(path, ("param", "F0_at_origin", "sup_norm", "l2_norm", "y0", "sigma"), rows)


def component_csv(component, path: PathLike) -> str:
    return write_rows(path, ("s", "phi", "dphi", "d2phi"), np.asarray(component.samples))


def orbit_csv(times: np.ndarray, states: np.ndarray, path: PathLike) -> str:
    states = np.atleast_2d(states)
    header = ["t"] + [f"x{k}" for k in range(states.shape[1])]
    return write_rows(path, header, ([t, *row] for t, row in zip(times, states)))


def kernel_csv(table: np.ndarray, path: PathLike) -> str:
    """Columns y, K, K', K'', K''' as returned by SpectralBasis.kernel_table."""
    table = np.atleast_2d(table)
    header = ["y"] + [f"K{k}" for k in range(table.shape[1] - 1)]
    return write_rows(path, header, table)


def matrix_csv(matrix: np.ndarray, path: PathLike) -> str:
    matrix = np.atleast_2d(matrix)
    header = ["row"] + [str(j) for j in range(matrix.shape[1])]
    return write_rows(path, header, ([i, *row] for i, row in enumerate(matrix)))
