import csv
import json

import numpy as np
import pytest

from blowup_profiles.core import Branch, BranchPoint, MultiIndex, ProfileForm, Symmetry
from blowup_profiles.errors import ArchiveError, SchemaMismatch
from blowup_profiles.io import (SCHEMA_VERSION, branch_csv, load_branch, load_profile, log_interface_rows,
                                matrix_csv, profile_csv, save_branch, save_profile, write_rows)

from .utils import cap_solution, file_fingerprint


def _rows(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.reader(fh))


def test_profile_archive_is_stable(tmp_path):
    sol = cap_solution(sigma=MultiIndex.parse("{+2}"), y0=9.0, provenance={"command": "solve"})
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    save_profile(sol, a)
    back = load_profile(a)
    save_profile(back, b)
    assert file_fingerprint(a) == file_fingerprint(b)
    assert np.array_equal(back.F, sol.F) and np.array_equal(back.d3F, sol.d3F)
    assert back.form is ProfileForm.S and back.symmetry is Symmetry.EVEN
    assert str(back.sigma) == "{+2}" and back.y0 == 9.0
    assert back.provenance == {"command": "solve"}


def test_attained_tolerance_round_trip(tmp_path):
    path = tmp_path / "t.json"
    save_profile(cap_solution(tol=1e-9), path)
    assert load_profile(path).tol == 1e-9
    save_profile(cap_solution(), path)
    assert load_profile(path).tol is None


def test_explicit_provenance_wins(tmp_path):
    path = tmp_path / "p.json"
    save_profile(cap_solution(provenance={"command": "old"}), path, {"command": "new"})
    assert json.loads(path.read_text())["provenance"] == {"command": "new"}


def test_archive_errors(tmp_path):
    with pytest.raises(ArchiveError):
        load_profile(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ArchiveError):
        load_profile(bad)

    path = tmp_path / "p.json"
    save_profile(cap_solution(), path)
    data = json.loads(path.read_text())
    data["version"] = SCHEMA_VERSION + 1
    path.write_text(json.dumps(data))
    with pytest.raises(SchemaMismatch):
        load_profile(path)

    data["version"] = SCHEMA_VERSION
    del data["F"]
    path.write_text(json.dumps(data))
    with pytest.raises(ArchiveError):
        load_profile(path)

    branch = tmp_path / "b.json"
    save_branch(Branch("p"), branch)
    with pytest.raises(ArchiveError):
        load_profile(branch)


def test_branch_round_trip(tmp_path):
    sol = cap_solution(sigma=MultiIndex.parse("{+2}"))
    branch = Branch("mu", settings={"dp0": 0.01})
    branch.points.append(BranchPoint.from_solution(0.5, sol))
    branch.points.append(BranchPoint.from_solution(0.25, sol))
    branch.termination = "jump_detected"
    path = tmp_path / "branch.json"
    save_branch(branch, path)
    back = load_branch(path)
    assert back.parameter_name == "mu" and back.termination == "jump_detected"
    assert [pt.param for pt in back.points] == [0.5, 0.25]
    assert back.points[0].solution is None
    assert back.settings == {"dp0": 0.01}

    csv_path = tmp_path / "branch.csv"
    branch_csv(back, csv_path)
    rows = _rows(csv_path)
    assert rows[0] == ["param", "F0_at_origin", "sup_norm", "l2_norm", "y0", "sigma"]
    assert rows[1][4] == "" and rows[1][5] == "{+2}"


def test_profile_csv_is_lossless(tmp_path):
    sol = cap_solution()
    path = tmp_path / "p.csv"
    profile_csv(sol, path)
    rows = _rows(path)
    assert rows[0] == ["y", "F", "dF", "d2F", "d3F"]
    assert len(rows) == len(sol.mesh) + 1
    assert np.array_equal(np.array([float(r[1]) for r in rows[1:]]), sol.F)


def test_log_interface_rows():
    sol = cap_solution(y0=9.0)
    rows = np.array(log_interface_rows(sol))
    assert rows.shape[1] == 2
    # F = 1.5 cos^2(pi y / 18) ~ 1.5 (pi/18)^2 (9 - y)^2 near the edge
    d, f = rows[-1]
    assert f == pytest.approx(np.log10(1.5 * (np.pi / 18.0) ** 2) + 2.0 * d, abs=1e-3)
    with pytest.raises(ArchiveError):
        log_interface_rows(cap_solution())


def test_matrix_and_plain_rows(tmp_path):
    path = tmp_path / "m.csv"
    matrix_csv(np.eye(2), path)
    assert _rows(path) == [["row", "0", "1"], ["0", "1", "0"], ["1", "0", "1"]]
    write_rows(tmp_path / "w.csv", ["a", "b"], [[0.1, None]])
    assert _rows(tmp_path / "w.csv")[1] == ["0.10000000000000001", ""]
