import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import gauss_oracle
from tamed_spde.basis import BasisSet, basis_derivative_table, basis_eval, gauss_lobatto_rule, synthesize
from tamed_spde.operators import (
    AssemblyError,
    OperatorSpec,
    assemble_mass,
    assemble_mass_quadrature,
    assemble_stiffness,
    build_discretization,
    generalized_eigendecomposition,
    project_initial,
)


def test_mass_examples(gauss64):
    B = assemble_mass(5)
    assert B[0, 0] == pytest.approx(0.05, abs=1e-16)
    assert B[0, 1] == 0.0
    assert B[2, 0] == pytest.approx(-1 / (20 * math.sqrt(84)), abs=1e-16)
    assert B[2, 0] == pytest.approx(-5.4554e-3, abs=1e-7)
    x, w = gauss64
    assert np.sum(w * (3 / math.sqrt(6) * x * (1 - x)) ** 2) == pytest.approx(0.05, abs=1e-15)
    assert np.sum(w * basis_eval(2, x) * basis_eval(0, x)) == pytest.approx(B[2, 0], abs=1e-15)


@pytest.mark.parametrize("N", [3, 4, 8, 17, 32])
def test_mass_closed_form_matches_quadrature(N):
    np.testing.assert_allclose(assemble_mass(N), assemble_mass_quadrature(N), atol=1e-12, rtol=0)


def test_mass_pentadiagonal_structure():
    B = assemble_mass(20)
    i, j = np.nonzero(B)
    assert set(np.abs(i - j)) <= {0, 2}
    np.testing.assert_array_equal(B, B.T)


@pytest.mark.parametrize("N", [3, 16, 64, 128])
def test_mass_is_spd(N):
    assert np.linalg.eigvalsh(assemble_mass(N)).min() > 0


def test_stiffness_examples(gauss64):
    A = assemble_stiffness(6, OperatorSpec(1, 1.0))
    assert A[0, 0] == pytest.approx(0.5, abs=1e-14)
    assert A[0, 1] == pytest.approx(0.0, abs=1e-14)
    Api = assemble_stiffness(6, OperatorSpec(1, 1 / math.pi**2))
    assert Api[0, 0] == pytest.approx(0.5 / math.pi**2, abs=1e-15)
    # independent Gauss oracle of the derivative Gram matrix
    x, w = gauss64
    D = basis_derivative_table(5, x)
    np.testing.assert_allclose(A, (D * w) @ D.T, atol=1e-12)


def test_stiffness_derivative_matches_finite_differences():
    x = np.linspace(0.05, 0.95, 11)
    h = 1e-6
    D = basis_derivative_table(6, x)
    for m in range(6):
        fd = (basis_eval(m, x + h) - basis_eval(m, x - h)) / (2 * h)
        np.testing.assert_allclose(D[m], fd, atol=1e-8)


def test_eigen_smallest_case():
    # N = 3 keeps phi_0 and phi_1; B and A are diagonal, so lambda_m = b_mm / a_mm
    eig = generalized_eigendecomposition(assemble_mass(3), assemble_stiffness(3))
    np.testing.assert_allclose(eig.lam, [(1 / 84) / 0.5, (1 / 20) / 0.5], rtol=1e-14)
    assert 0.1 in np.round(eig.lam, 15)


@pytest.mark.parametrize("N", [3, 8, 24, 64])
def test_eigen_contract(N):
    B = assemble_mass(N)
    A = assemble_stiffness(N, OperatorSpec(1, 1 / math.pi**2))
    eig = generalized_eigendecomposition(B, A)
    H, lam = eig.H, eig.lam
    assert np.linalg.norm(B @ H - A @ H @ np.diag(lam)) <= 1e-10 * np.linalg.norm(B)
    np.testing.assert_allclose(H.T @ A @ H, np.eye(N - 1), atol=1e-10)
    np.testing.assert_allclose(H.T @ B @ H, np.diag(lam), atol=1e-10)
    assert np.all(lam > 0)
    assert np.all(np.diff(lam) >= 0)


def test_eigen_scaled_identity_reduces_to_standard_problem():
    B = assemble_mass(10)
    c = 0.37
    eig = generalized_eigendecomposition(B, c * np.eye(9))
    np.testing.assert_allclose(eig.lam, np.linalg.eigvalsh(B) / c, rtol=1e-12)
    np.testing.assert_allclose(eig.H.T @ eig.H, np.eye(9) / c, atol=1e-12)


def test_eigen_rejects_non_spd():
    B = assemble_mass(5)
    A = -np.eye(4)
    with pytest.raises(AssemblyError):
        generalized_eigendecomposition(B, A)


def test_operator_spec_validation():
    with pytest.raises(ValueError):
        OperatorSpec(1, 0.0)
    with pytest.raises(ValueError):
        OperatorSpec(3, 1.0)


def test_project_basis_member_and_zero():
    b = BasisSet(9, gauss_lobatto_rule(17))
    c = project_initial(lambda x: basis_eval(0, x), b)
    expected = np.zeros(8)
    expected[0] = 1.0
    np.testing.assert_allclose(c, expected, atol=1e-12)
    np.testing.assert_array_equal(project_initial(lambda x: 0 * x, b), np.zeros(8))


def test_project_sine_spectral_accuracy():
    N = 16
    b = BasisSet(N, gauss_lobatto_rule(N + 8))
    c = project_initial(lambda x: np.sin(np.pi * x), b)
    x, w = gauss_oracle(80)
    resid = sum(ci * basis_eval(m, x) for m, ci in enumerate(c)) - np.sin(np.pi * x)
    assert math.sqrt(np.sum(w * resid**2)) <= 1e-10


@given(st.integers(3, 20), st.integers(0, 1000))
@settings(max_examples=20, deadline=None)
def test_projection_reproduces_dirichlet_polynomials(N, seed):
    rng = np.random.default_rng(seed)
    coef = rng.standard_normal(N - 1)
    # a degree-N polynomial with zero boundary values is x(1-x) times a degree N-2 polynomial
    v = lambda x: x * (1 - x) * np.polynomial.polynomial.polyval(x, coef)
    b = BasisSet(N, gauss_lobatto_rule(N + 8))
    c = project_initial(v, b)
    np.testing.assert_allclose(synthesize(c, b), v(b.rule.nodes), atol=1e-11)


def test_project_2d_separable():
    b = BasisSet(8, gauss_lobatto_rule(16))
    C = project_initial(lambda x, y: basis_eval(1, x) * basis_eval(3, y), b, dim=2)
    expected = np.zeros((7, 7))
    expected[1, 3] = 1.0
    np.testing.assert_allclose(C, expected, atol=1e-12)


def test_discretization_transforms_consistent():
    d = build_discretization(OperatorSpec(1, 0.3), 12, noise_order_=60)
    assert d.noise_rule.order == 60 and d.rule.order == 20
    np.testing.assert_allclose(d.PhiH, d.basis.values_at_nodes.T @ d.H)
    np.testing.assert_allclose(d.HtL, d.H.T @ d.load)
