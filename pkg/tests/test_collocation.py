import math

import numpy as np
import pytest

from blowup_profiles.collocation import (MAX_INSERT_PER_INTERVAL, BvpProblem, BvpSolution, guess_residual,
                                         refine_mesh, residual_norm, solve_bvp)
from blowup_profiles.core import Mesh
from blowup_profiles.errors import DomainError, MeshOverflow


def _sine_problem(nodes=11, max_nodes=1000):
    # y'' = -y, y(0) = 0, y(pi/2) = 1  ->  y = sin
    def rhs(x, y):
        return np.vstack([y[1], -y[0]])

    def bc(ya, yb):
        return np.array([ya[0], yb[0] - 1.0])

    x = np.linspace(0.0, 0.5 * math.pi, nodes)
    guess = np.vstack([x / x[-1], np.ones_like(x)])
    return BvpProblem(2, rhs, bc, Mesh(x, max_nodes), guess, name="sine")


def test_solves_linear_bvp():
    sol = solve_bvp(_sine_problem(), rtol=1e-8, atol=1e-8)
    assert sol.converged
    x = sol.mesh.nodes
    assert np.max(np.abs(sol.states[0] - np.sin(x))) < 1e-6
    assert sol.residual < 1e-6
    assert residual_norm(sol, _sine_problem()) == pytest.approx(sol.residual)
    assert np.allclose(sol(x[:3])[0], sol.states[0, :3])


def test_mesh_cap_raises_with_partial_solution():
    problem = _sine_problem(nodes=5, max_nodes=5)
    with pytest.raises(MeshOverflow) as info:
        solve_bvp(problem, rtol=1e-12, atol=1e-12)
    assert info.value.solution is not None
    assert info.value.diagnostics["status"] == 1


def test_guess_validation():
    p = _sine_problem()
    with pytest.raises(DomainError):
        p.with_guess(p.mesh, np.zeros((3, len(p.mesh))))
    bad = np.array(p.guess)
    bad[0, 2] = np.nan
    with pytest.raises(DomainError):
        p.with_guess(p.mesh, bad)


def test_exact_guess_has_small_residual():
    p = _sine_problem(nodes=201)
    x = p.mesh.nodes
    exact = p.with_guess(p.mesh, np.vstack([np.sin(x), np.cos(x)]))
    assert guess_residual(exact) < 1e-7
    assert guess_residual(p) > 1e-3


def _fourth_order_problem(nodes, bc, guess, bc_jac=None, max_nodes=20000):
    # y'''' = y as a first-order system (y, y', y'', y''')
    def rhs(x, y):
        return np.vstack([y[1], y[2], y[3], y[0]])

    def jac(x, y):
        a = np.zeros((4, 4, x.size))
        a[0, 1] = a[1, 2] = a[2, 3] = a[3, 0] = 1.0
        return a

    x = np.linspace(0.0, 1.0, nodes)
    return BvpProblem(4, rhs, bc, Mesh(x, max_nodes), np.tile(np.asarray(guess, float)[:, None], x.size),
                      jac=jac, bc_jac=bc_jac, name="quartic")


def _exponential_bc(ya, yb):
    # y(0) = 1, y''(0) = 1, y(1) = e, y''(1) = e  ->  y = exp
    return np.array([ya[0] - 1.0, ya[2] - 1.0, yb[0] - math.e, yb[2] - math.e])


def _exponential_bc_jac(ya, yb):
    a, b = np.zeros((4, 4)), np.zeros((4, 4))
    a[0, 0] = a[1, 2] = 1.0
    b[2, 0] = b[3, 2] = 1.0
    return a, b


def test_quartic_cosh_benchmark():
    def bc(ya, yb):
        return np.array([ya[0] - 1.0, ya[1], yb[0] - math.cosh(1.0), yb[1] - math.sinh(1.0)])

    sol = solve_bvp(_fourth_order_problem(21, bc, [1.0, 0.5, 1.0, 0.5]), rtol=1e-10, atol=1e-10)
    x = sol.mesh.nodes
    assert np.max(np.abs(sol.states[0] - np.cosh(x))) < 1e-8
    assert np.max(np.abs(sol.states[1] - np.sinh(x))) < 1e-8


def test_fourth_order_convergence():
    steps, errors = [], []
    for nodes in (6, 11, 21, 41):
        problem = _fourth_order_problem(nodes, _exponential_bc, [1.0, 1.0, 1.0, 1.0], _exponential_bc_jac)
        # loose tolerance: the mesh stays put and only the discretization error is left
        sol = solve_bvp(problem, rtol=1e-2, atol=1e-8)
        assert len(sol.mesh) == nodes
        x = sol.mesh.nodes
        steps.append(1.0 / (nodes - 1))
        errors.append(np.max(np.abs(sol.states[0] - np.exp(x))))
    slope = np.polyfit(np.log(steps), np.log(errors), 1)[0]
    assert slope == pytest.approx(4.0, abs=0.3)


def test_warm_start_needs_few_newton_iterations():
    sol = solve_bvp(_sine_problem(), rtol=1e-8, atol=1e-8)
    assert sol.refinement_passes >= 1
    again = solve_bvp(_sine_problem().with_guess(sol.mesh, sol.states), rtol=1e-8, atol=1e-8)
    assert again.converged
    assert again.newton_iterations <= 2
    assert again.newton_iterations <= sol.newton_iterations


def test_solve_is_deterministic():
    first = solve_bvp(_sine_problem(), rtol=1e-8, atol=1e-8)
    second = solve_bvp(_sine_problem(), rtol=1e-8, atol=1e-8)
    assert np.array_equal(first.mesh.nodes, second.mesh.nodes)
    assert np.array_equal(first.states, second.states)
    assert first.newton_iterations == second.newton_iterations


def test_perturbed_states_raise_residual():
    p = _sine_problem()
    sol = solve_bvp(p, rtol=1e-8, atol=1e-8)
    shaken = np.array(sol.states)
    shaken[0, 1:-1] += 1e-3 * np.cos(7.0 * sol.mesh.nodes[1:-1])
    assert guess_residual(p.with_guess(sol.mesh, shaken)) > 10.0 * residual_norm(sol, p)


def _with_residuals(nodes, residuals, max_nodes=20000):
    mesh = Mesh(nodes, max_nodes)
    return BvpSolution(mesh, np.zeros((1, len(mesh))), None, float(np.max(residuals)), 1, np.asarray(residuals))


def test_refine_mesh_equidistributes():
    sol = solve_bvp(_sine_problem(), rtol=1e-6, atol=1e-6)
    x, r = sol.mesh.nodes, sol.interval_residuals
    finer = refine_mesh(sol, float(np.max(r)) / 1e3)
    i = int(np.argmax(r))
    inside = np.count_nonzero((finer.nodes > x[i]) & (finer.nodes < x[i + 1]))
    assert inside >= 5
    assert finer.nodes[0] == sol.mesh.nodes[0] and finer.nodes[-1] == sol.mesh.nodes[-1]
    assert np.all(np.diff(finer.nodes) > 0)


def test_refine_mesh_uniform_residual_keeps_uniform_spacing():
    sol = _with_residuals(np.linspace(0.0, 1.0, 21), np.full(20, 1e-3))
    finer = refine_mesh(sol, 1e-6)
    h = finer.spacing
    assert h.max() / h.min() <= 2.0
    assert len(finer) > len(sol.mesh)


def test_refine_mesh_concentrates_nodes_at_bad_end():
    r = np.full(40, 1e-12)
    r[-10:] = 1e-3
    sol = _with_residuals(np.linspace(0.0, 1.0, 41), r)
    finer = refine_mesh(sol, 1e-6)
    right = np.count_nonzero(finer.nodes >= 0.75)
    assert right >= 0.5 * len(finer)
    # at most MAX_INSERT_PER_INTERVAL + 1 new intervals per old one
    assert len(finer) <= 40 * (MAX_INSERT_PER_INTERVAL + 1) + 1


def test_refine_mesh_leaves_converged_mesh_and_respects_cap():
    sol = solve_bvp(_sine_problem(), rtol=1e-6, atol=1e-6)
    assert refine_mesh(sol, 1.0) is sol.mesh
    with pytest.raises(MeshOverflow):
        refine_mesh(sol, sol.residual / 1e6, max_nodes=len(sol.mesh) + 1)
