from hashlib import md5

import numpy as np

from blowup_profiles.core import Mesh, ProblemParams, ProfileForm, ProfileSolution, RightBC, Symmetry
from blowup_profiles.profiles.guess import cap_profile, dipole_profile


def file_fingerprint(path) -> str:
    h = md5()
    with open(path, "rb") as f:
        h.update(f.read())
    return h.hexdigest()


def cap_solution(n=1.0, p=2.0, amplitude=1.5, half_width=9.0, radius=15.0, nodes=601,
                 form=ProfileForm.S, symmetry=Symmetry.EVEN, right_bc=RightBC.COMPACT, **extra):
    """A ProfileSolution built from the analytic cap (or dipole) shape; not a solution of anything."""
    y = np.linspace(0.0, radius, nodes)
    shape = cap_profile if symmetry is Symmetry.EVEN else dipole_profile
    F, dF, d2F, d3F = shape(y, amplitude, half_width)
    return ProfileSolution(params=ProblemParams(n, p), form=form, symmetry=symmetry, right_bc=right_bc,
                           eps=1e-10, mesh=Mesh(y, 20000), F=F, dF=dF, d2F=d2F, d3F=d3F, residual=0.0, **extra)


def power_tail_solution(n=1.0, p=3.0, C0=2.0, radius=50.0, nodes=401):
    """General F-form samples of the exact far-field bundle F = (C0 y^gamma)^(n+1) on [1, R]."""
    g = -4.0 / (p - (n + 1.0)) * (n + 1.0)
    y = np.linspace(1.0, radius, nodes)
    c = C0 ** (n + 1.0)
    F = c * y ** g
    dF = c * g * y ** (g - 1)
    d2F = c * g * (g - 1) * y ** (g - 2)
    d3F = c * g * (g - 1) * (g - 2) * y ** (g - 3)
    return ProfileSolution(params=ProblemParams(n, p), form=ProfileForm.GENERAL, symmetry=Symmetry.EVEN,
                           right_bc=RightBC.FARFIELD, eps=1e-10, mesh=Mesh(y, 20000), F=F, dF=dF, d2F=d2F,
                           d3F=d3F, residual=0.0)


def sampled_solution(y, F, n=1.0, p=2.0, eps=1e-10, **extra):
    """S-form compact-support ProfileSolution from samples; derivatives by finite differences."""
    dF = np.gradient(F, y, edge_order=2)
    d2F = np.gradient(dF, y, edge_order=2)
    d3F = np.gradient(d2F, y, edge_order=2)
    return ProfileSolution(params=ProblemParams(n, p), form=ProfileForm.S, symmetry=Symmetry.EVEN,
                           right_bc=RightBC.COMPACT, eps=eps, mesh=Mesh(y, 20000), F=F, dF=dF, d2F=d2F,
                           d3F=d3F, residual=0.0, **extra)
