import math

import numpy as np
import pytest

from blowup_profiles.errors import DomainError
from blowup_profiles.spectral import (DECAY_RATE, KERNEL_AT_ORIGIN, SpectralBasis, adjoint_eigen_defect, adjoint_poly,
                                      default_basis, kernel_moment)


@pytest.fixture(scope="module")
def basis():
    return default_basis()


def test_kernel_mass_and_origin(basis):
    assert basis.mass() == pytest.approx(1.0, abs=1e-8)
    assert float(basis.kernel(0.0)) == pytest.approx(KERNEL_AT_ORIGIN, abs=1e-12)
    assert KERNEL_AT_ORIGIN == pytest.approx(math.gamma(1.25) / math.pi)


def test_kernel_is_even_and_decays(basis):
    y = np.linspace(0.0, 8.0, 41)
    assert np.allclose(basis.kernel(y), basis.kernel(-y), atol=1e-14)
    assert math.isfinite(basis.decay_constant())


@pytest.mark.parametrize("l", range(5))
def test_eigenfunctions(basis, l):
    y = np.linspace(-6.0, 6.0, 61)
    assert np.allclose(basis.apply_operator(l, y), -0.25 * l * basis.eigenfunction(l, y), atol=1e-9)


def test_adjoint_polynomials():
    assert np.allclose(adjoint_poly(0).coef, [1.0])
    # psi_4* = (y^4 + 24) / sqrt(24)
    assert np.allclose(adjoint_poly(4).coef, np.array([24.0, 0, 0, 0, 1.0]) / math.sqrt(24.0))
    for l in range(9):
        assert adjoint_eigen_defect(l) < 1e-12


def test_biorthogonality_is_identity(basis):
    gram = basis.biorthogonality(6)
    assert gram.shape == (7, 7)
    assert np.max(np.abs(gram - np.eye(7))) < 1e-6


def test_moment_pairing_matches_quadrature(basis):
    moments = basis.biorthogonality(6, method="moments")
    assert np.max(np.abs(moments - np.eye(7))) < 1e-12
    assert np.max(np.abs(basis.biorthogonality(6) - moments)) < 1e-6


def test_shifted_line_matches_real_line(basis):
    y = np.linspace(-10.0, 10.0, 81)
    rows = basis.shifted_derivs(4, y)
    for l in range(5):
        assert np.allclose(rows[l], basis.kernel_deriv(l, y), atol=1e-12)


def test_shifted_line_keeps_tail_accuracy(basis):
    # far out the real-line rule sits at the rounding floor; the shifted line
    # still follows exp(-d y^(4/3))
    y = np.array([40.0, 50.0, 60.0])
    tail = np.abs(basis.shifted_derivs(0, y)[0]) * np.exp(DECAY_RATE * y ** (4.0 / 3.0))
    assert np.all(tail < 10.0 * basis.decay_constant())
    assert np.all(np.abs(basis.shifted_derivs(0, y)[0]) < 1e-13)


def test_kernel_moments():
    assert kernel_moment(0) == 1.0
    assert kernel_moment(4) == -24.0
    assert kernel_moment(8) == pytest.approx(40320.0 / 2)
    assert kernel_moment(5) == 0.0


def test_basis_limits(basis):
    with pytest.raises(DomainError):
        basis.biorthogonality(basis.l_max + 1)
    with pytest.raises(DomainError):
        basis.kernel_deriv(basis.max_order + 1, 0.0)
    with pytest.raises(DomainError):
        SpectralBasis(l_max=-1)
    with pytest.raises(DomainError):
        basis.linear_pattern(0, 0.0, 0.0)
    with pytest.raises(DomainError):
        basis.biorthogonality(2, method="simpson")


def test_kernel_table_columns(basis):
    table = basis.kernel_table(np.linspace(0.0, 2.0, 5))
    assert table.shape == (5, 5)
    assert np.allclose(table[:, 0], np.linspace(0.0, 2.0, 5))
    assert np.allclose(table[:, 1], basis.kernel(table[:, 0]))
