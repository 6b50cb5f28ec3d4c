"""Reference numbers for solved profiles and branches; every test here is slow."""
import math

import numpy as np
import pytest
from scipy.integrate import simpson

from blowup_profiles.cli import EXIT_OK, main
from blowup_profiles.config import SolverSettings
from blowup_profiles.continuation import continue_branch, _relative_distance
from blowup_profiles.core import MultiIndex, ProblemParams, ProfileForm, Symmetry
from blowup_profiles.io import load_profile
from blowup_profiles.profiles import (ProfileProblemSpec, default_radius, directional_derivative,
                                      first_variation, glue_guess, interface_estimate, periodic_spatial,
                                      plus_2k_guess, solve_profile, tail_slope)

pytestmark = pytest.mark.slow


def _solve_s(n, settings, **changes):
    spec = ProfileProblemSpec(ProblemParams(n, n + 1.0), eps=settings.eps, max_nodes=settings.max_nodes,
                              radius=changes.pop("radius", default_radius(n)), **changes)
    return solve_profile(spec, settings=settings)


# ============== S regime, n = 1 ==============
def test_f0_interface_at_tight_eps(tmp_path):
    out = tmp_path / "f0.json"
    rc = main(["solve", "--n", "1", "--p", "2", "--eps", "1e-10", "--tol", "1e-10", "--out", str(out)])
    assert rc == EXIT_OK
    sol = load_profile(out)
    assert sol.converged and sol.tol is not None
    tight = interface_estimate(sol)
    assert tight.y0 == pytest.approx(12.0, abs=1.0)
    assert tight.zero_count >= 4
    assert tight.slope == pytest.approx(8.0, abs=1.0)

    coarse = _solve_s(1.0, SolverSettings.load("quick", eps=1e-3, tol=1e-3))
    assert interface_estimate(coarse).zero_count < tight.zero_count


def test_f0_value_is_eps_robust():
    loose = _solve_s(1.0, SolverSettings.load("default", eps=1e-8, tol=1e-8))
    tight = _solve_s(1.0, SolverSettings.load("default", eps=1e-10, tol=1e-10))
    assert abs(tight.F0_at_origin - loose.F0_at_origin) < 1e-3


def _even_direction(rng):
    centres = rng.uniform(0.0, 8.0, size=3)
    widths = rng.uniform(0.5, 3.0, size=3)
    weights = rng.normal(size=3)

    def direction(y):
        v = np.zeros_like(y)
        d2v = np.zeros_like(y)
        for c, w, a in zip(centres, widths, weights):
            for shift in (c, -c):
                z = (y - shift) / w
                g = a * np.exp(-z * z)
                v += g
                d2v += g * (4.0 * z * z - 2.0) / (w * w)
        return v, d2v

    return direction


def test_f0_is_critical_in_random_directions(f0_profile):
    rng = np.random.default_rng(20)
    y = f0_profile.full_domain()["y"]
    for _ in range(10):
        direction = _even_direction(rng)
        norm = math.sqrt(simpson(direction(y)[0] ** 2, x=y))
        dd = directional_derivative(f0_profile, direction)
        assert abs(dd) <= 1e-4 * norm
        assert dd == pytest.approx(first_variation(f0_profile, direction), abs=1e-6 * norm)


# ============== small n ==============
def test_small_n_limit(quick_settings):
    sol = _solve_s(1e-2, quick_settings)
    assert sol.F0_at_origin == pytest.approx(1.435, rel=0.05)

    ns = np.array([0.1, 0.05, 0.02])
    y0 = np.array([interface_estimate(_solve_s(n, quick_settings)).y0 for n in ns])
    slope = np.polyfit(np.log(ns), np.log(y0), 1)[0]
    assert slope == pytest.approx(-0.75, abs=0.15)


# ============== LS regime ==============
def test_ls_profile_is_positive_with_algebraic_tail(quick_settings):
    spec = ProfileProblemSpec(ProblemParams(1.0, 3.0), form=ProfileForm.GENERAL, eps=quick_settings.eps,
                              max_nodes=quick_settings.max_nodes)
    sol = solve_profile(spec, settings=quick_settings)
    assert np.all(sol.F > 0)
    assert tail_slope(sol) == pytest.approx(-4.0, abs=0.2)


# ============== branches ==============
def test_p0_branch_grows_as_p_decreases(f0_profile, quick_settings, tmp_path):
    branch = continue_branch(f0_profile, "p", (1.7, 2.0), 0.05, settings=quick_settings,
                             archive=tmp_path / "down.json")
    assert branch.termination == "range_end"
    values = [pt.F0_at_origin for pt in branch.points]
    assert all(b > a for a, b in zip(values[:-1], values[1:]))


def test_plus_four_seed_jumps_near_p2(f0_profile, quick_settings, tmp_path):
    orbit = periodic_spatial(1.0)
    guess = plus_2k_guess(2, f0_profile, orbit)
    spec = ProfileProblemSpec(ProblemParams(1.0, 2.0), eps=quick_settings.eps, max_nodes=quick_settings.max_nodes,
                              radius=float(np.max(guess.nodes)))
    seed = solve_profile(spec, guess=guess, settings=quick_settings)
    assert str(seed.sigma) == "{+4}"
    branch = continue_branch(seed, "p", (1.9, 2.0), 2.5e-3, settings=quick_settings,
                             archive=tmp_path / "plus4.json")
    assert branch.termination == "jump_detected"
    assert abs(branch.points[-1].param - 2.0) <= 1e-2
    assert branch.points[-1].sigma.same_pattern(MultiIndex.parse("{+2,2,+2}"))


def _glued(base, components, settings, symmetry=Symmetry.EVEN):
    guess = glue_guess(components, base)
    spec = ProfileProblemSpec(base.params, eps=settings.eps, max_nodes=settings.max_nodes, symmetry=symmetry,
                              radius=float(np.max(guess.nodes)))
    return solve_profile(spec, guess=guess, settings=settings)


def test_two_hump_branches_merge_below_critical_p(quick_settings, tmp_path):
    base = _solve_s(0.5, quick_settings)
    orbit = periodic_spatial(0.5)
    guess = plus_2k_guess(2, base, orbit)
    spec = ProfileProblemSpec(ProblemParams(0.5, 1.5), eps=quick_settings.eps, max_nodes=quick_settings.max_nodes,
                              radius=float(np.max(guess.nodes)))
    plus4 = solve_profile(spec, guess=guess, settings=quick_settings)
    s = base.y0 or base.radius / 2
    twin = _glued(base, [(1, -s), (1, s)], quick_settings)

    ends = []
    for name, seed in (("plus4", plus4), ("twin", twin)):
        branch = continue_branch(seed, "p", (1.45, 1.5), 0.01, settings=quick_settings,
                                 archive=tmp_path / f"{name}.json")
        assert branch.termination in ("range_end", "jump_detected")
        ends.append(load_profile(tmp_path / branch.points[-1].solution_path))
    assert ends[0].params.p == pytest.approx(ends[1].params.p)
    assert _relative_distance(ends[0], ends[1]) < 0.05


# ============== gluing ==============
def test_glued_families_have_expected_parity(f0_profile, quick_settings):
    s0 = f0_profile.y0 or 12.0
    even_k, odd_k = set(), set()
    for s in (s0, 1.5 * s0):
        even = _glued(f0_profile, [(1, -s), (1, s)], quick_settings).sigma.entries
        assert even[0] == (1, 2) and even[-1] == (1, 2)
        k = even[1][1] if len(even) == 3 and even[1][0] == 0 else None
        assert k is not None and k % 2 == 0
        even_k.add(k)

        odd = _glued(f0_profile, [(-1, -s), (1, s)], quick_settings, Symmetry.ODD).sigma.entries
        assert odd[0] == (-1, 2) and odd[-1] == (1, 2)
        k = odd[1][1] if len(odd) == 3 and odd[1][0] == 0 else None
        assert k is not None and k % 2 == 1
        odd_k.add(k)
    assert len(even_k) >= 2 and len(odd_k) >= 2
