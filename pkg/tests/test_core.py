import math

import numpy as np
import pytest

from blowup_profiles.core import (Branch, BranchPoint, Mesh, MultiIndex, ProblemParams, ProfileForm,
                                  ProfileSolution, Regime, RightBC, Symmetry, alpha, beta, classify_regime,
                                  equilibria, nu_var)
from blowup_profiles.errors import DomainError
from .utils import cap_solution, power_tail_solution


def test_exponents_and_regimes():
    assert alpha(1.0) == 0.5
    assert alpha(math.inf) == 1.0
    assert nu_var(1.0) == pytest.approx(1.5)
    assert classify_regime(1.0, 2.0) is Regime.S
    assert classify_regime(1.0, 3.0) is Regime.LS
    assert classify_regime(1.0, 1.5) is Regime.HS
    assert beta(1.0, 2.0) == 0.0
    assert beta(1.0, 3.0) == pytest.approx(1.0 / 8.0)
    assert beta(1.0, 1.5) < 0


def test_equilibria_and_params():
    f_star, F_star = equilibria(1.0, 3.0)
    assert f_star == pytest.approx(2.0 ** -0.5)
    assert F_star == pytest.approx(0.5)
    params = ProblemParams.variational(1.0)
    assert params.regime is Regime.S and params.p == 2.0
    assert params.source_exponent == pytest.approx(0.0)
    assert params.with_p(3.0).regime is Regime.LS


@pytest.mark.parametrize("n,p", [(0.0, 2.0), (-1.0, 2.0), (1.0, 1.0), (1.0, 0.5)])
def test_invalid_params(n, p):
    with pytest.raises(DomainError):
        ProblemParams(n, p)


def test_mesh_validation():
    with pytest.raises(DomainError):
        Mesh(np.array([0.0, 1.0, 1.0, 2.0, 3.0]))
    with pytest.raises(DomainError):
        Mesh(np.linspace(0, 1, 4))
    with pytest.raises(DomainError):
        Mesh(np.linspace(0, 1, 50), max_nodes=10)
    m = Mesh.uniform(0.0, 2.0, 5)
    assert len(m) == 5 and np.allclose(m.spacing, 0.5)


def test_multiindex_text():
    sigma = MultiIndex.parse("{+2,2,+2}")
    assert sigma.entries == ((1, 2), (0, 2), (1, 2))
    assert str(sigma) == "{+2,2,+2}"
    assert str(sigma.negated()) == "{-2,2,-2}"
    assert sigma.same_pattern(MultiIndex.parse(" { +2 , 2 , +2 } "))
    with pytest.raises(DomainError):
        MultiIndex.parse("{+a}")
    with pytest.raises(DomainError):
        MultiIndex(((2, 1),))


def test_profile_solution_views():
    sol = cap_solution()
    assert sol.F0_at_origin == pytest.approx(1.5)
    assert sol.sup_norm == pytest.approx(1.5, abs=1e-9)
    # int_{-L}^{L} (1.5 cos^2(pi y / 2L))^2 dy = 1.5^2 * 3L/4
    assert sol.l2_norm == pytest.approx(math.sqrt(1.5 ** 2 * 0.75 * 9.0), rel=1e-5)
    full = sol.full_domain()
    assert np.allclose(full["F"], full["F"][::-1])
    assert np.allclose(full["dF"], -full["dF"][::-1])
    assert sol.states().shape == (4, len(sol.mesh))
    with pytest.raises(DomainError):
        sol.evaluate(1.0, order=4)


def test_odd_profile_reflects_with_sign():
    sol = cap_solution(symmetry=Symmetry.ODD)
    full = sol.full_domain()
    assert np.allclose(full["F"], -full["F"][::-1])
    assert sol.F0_at_origin == 0.0


def test_hermite_evaluation_is_fourth_order():
    errors = []
    for m in (21, 41, 81):
        y = np.linspace(0.0, math.pi, m)
        sol = ProfileSolution(params=ProblemParams(1.0, 2.0), form=ProfileForm.S, symmetry=Symmetry.EVEN,
                              right_bc=RightBC.COMPACT, eps=1e-10, mesh=Mesh(y), F=np.cos(y), dF=-np.sin(y),
                              d2F=-np.cos(y), d3F=np.sin(y), residual=0.0)
        mid = 0.5 * (y[:-1] + y[1:])
        errors.append(np.max(np.abs(sol.evaluate(mid) - np.cos(mid))))
    orders = np.log2(np.array(errors[:-1]) / np.array(errors[1:]))
    assert np.all(np.abs(orders - 4.0) < 0.3)


def test_third_derivative_uses_hermite_spline():
    sol = power_tail_solution()
    y = sol.mesh.nodes
    keep = y >= 5.0
    mid = 0.5 * (y[:-1] + y[1:])[keep[1:]]
    c, g = 2.0 ** 2, -8.0
    exact = c * g * (g - 1) * (g - 2) * mid ** (g - 3)
    linear = np.interp(mid, y, sol.d3F)
    hermite = sol.evaluate(mid, order=3)
    assert np.allclose(sol.evaluate(y, order=3), sol.d3F, rtol=1e-10, atol=1e-14)
    assert np.max(np.abs(hermite - exact)) < 0.2 * np.max(np.abs(linear - exact))


def test_branch_monotone_and_points():
    sol = cap_solution()
    pts = [BranchPoint.from_solution(p, sol) for p in (2.0, 1.9, 1.8)]
    branch = Branch("p", pts)
    assert branch.is_monotone()
    assert np.allclose(branch.params, [2.0, 1.9, 1.8])
    assert str(pts[0].sigma) == "{}"
    branch.points.append(BranchPoint.from_solution(1.85, sol))
    assert not branch.is_monotone()
