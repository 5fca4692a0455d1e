"""Mass and stiffness matrices of the Dirichlet basis and their generalized eigensystem."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .basis import (
    BasisSet,
    QuadratureRule,
    basis_derivative_table,
    gauss_lobatto_rule,
    load_matrix,
)


class AssemblyError(RuntimeError):
    """Raised when a matrix that must be SPD is not."""


@dataclass(frozen=True)
class OperatorSpec:
    dimension: int = 1
    diffusivity: float = 1.0

    def __post_init__(self):
        if self.dimension not in (1, 2):
            raise ValueError(f"dimension must be 1 or 2, got {self.dimension}")
        if not self.diffusivity > 0:
            raise ValueError(f"diffusivity must be positive, got {self.diffusivity}")


@dataclass(frozen=True)
class EigenSystem:
    """Generalized eigenpairs B h_i = lambda_i A h_i, normalized so H^T A H = I."""

    lam: np.ndarray
    H: np.ndarray
    N: int


def assemble_mass(N: int) -> np.ndarray:
    """Pentadiagonal mass matrix b_mn = (phi_m, phi_n) from its closed form."""
    if N < 3:
        raise ValueError(f"N must be >= 3, got {N}")
    n = N - 1
    m = np.arange(n, dtype=float)
    B = np.diag((1.0 / (2 * m + 1) + 1.0 / (2 * m + 5)) / (4.0 * (4 * m + 6)))
    if n > 2:
        mm = m[2:]
        off = -1.0 / (4.0 * np.sqrt((4 * mm + 6) * (4 * mm - 2)) * (2 * mm + 1))
        idx = np.arange(2, n)
        B[idx, idx - 2] = off
        B[idx - 2, idx] = off
    return B


def assemble_mass_quadrature(N: int, rule: QuadratureRule | None = None) -> np.ndarray:
    """Mass matrix by Gauss-Lobatto quadrature (exact for Np >= N + 1)."""
    rule = rule or gauss_lobatto_rule(N + 2)
    basis = BasisSet(N, rule)
    Phi = basis.values_at_nodes
    return (Phi * rule.weights) @ Phi.T


def assemble_stiffness(N: int, spec: OperatorSpec | None = None) -> np.ndarray:
    """nu * (phi'_m, phi'_n), integrated exactly on a Gauss-Lobatto rule."""
    if N < 3:
        raise ValueError(f"N must be >= 3, got {N}")
    nu = 1.0 if spec is None else spec.diffusivity
    rule = gauss_lobatto_rule(N + 2)
    D = basis_derivative_table(N - 1, rule.nodes)
    A = (D * rule.weights) @ D.T
    return nu * 0.5 * (A + A.T)


def generalized_eigendecomposition(B: np.ndarray, A: np.ndarray) -> EigenSystem:
    """Solve B h = lambda A h; eigenvalues ascending, H^T A H = I.

    The pencil is reduced by a Cholesky factor of A to a symmetric standard
    problem (LAPACK sygvd).
    """
    for name, M in (("stiffness", A), ("mass", B)):
        try:
            np.linalg.cholesky(M)
        except np.linalg.LinAlgError as exc:
            raise AssemblyError(f"{name} matrix is not symmetric positive definite") from exc
    lam, H = scipy.linalg.eigh(B, A)
    return EigenSystem(lam=lam, H=H, N=B.shape[0] + 1)


@dataclass(frozen=True, eq=False)
class Discretization:
    """Everything the time stepper needs for a given (operator, N): basis, eigensystem, transforms.

    ``rule`` carries the reaction term and the taming norm; ``noise_rule`` is a
    finer Gauss-Lobatto rule on which the noise field g(u) dW is formed and
    projected, so that oscillatory noise modes are not aliased.
    """

    spec: OperatorSpec
    N: int
    basis: BasisSet
    noise_basis: BasisSet
    mass: np.ndarray
    stiffness: np.ndarray
    eig: EigenSystem
    load: np.ndarray
    noise_load: np.ndarray
    # phi values times H: nodal values straight from eigen-coordinates
    PhiH: np.ndarray
    noise_PhiH: np.ndarray
    # H^T times load matrix: eigen-coordinate loads straight from nodal values
    HtL: np.ndarray
    noise_HtL: np.ndarray

    @property
    def rule(self) -> QuadratureRule:
        return self.basis.rule

    @property
    def noise_rule(self) -> QuadratureRule:
        return self.noise_basis.rule

    @property
    def dim(self) -> int:
        return self.spec.dimension

    @property
    def lam(self) -> np.ndarray:
        return self.eig.lam

    @property
    def H(self) -> np.ndarray:
        return self.eig.H


def noise_order(N: int, max_frequency: int) -> int:
    """Lobatto order resolving sin(j pi x) for j <= max_frequency against a degree-N basis."""
    if max_frequency <= 0:
        return N + 8
    return N + 8 + int(np.ceil(np.pi * max_frequency / 2.0)) + 16


def build_discretization(
    spec: OperatorSpec, N: int, *, order: int | None = None, noise_order_: int | None = None
) -> Discretization:
    order = N + 8 if order is None else order
    noise_order_ = order if noise_order_ is None else max(noise_order_, order)
    basis = BasisSet(N, gauss_lobatto_rule(order))
    noise_basis = basis if noise_order_ == order else BasisSet(N, gauss_lobatto_rule(noise_order_))
    B = assemble_mass(N)
    A = assemble_stiffness(N, spec)
    eig = generalized_eigendecomposition(B, A)
    load = load_matrix(basis)
    noise_load = load if noise_basis is basis else load_matrix(noise_basis)
    H = eig.H
    return Discretization(
        spec=spec,
        N=N,
        basis=basis,
        noise_basis=noise_basis,
        mass=B,
        stiffness=A,
        eig=eig,
        load=load,
        noise_load=noise_load,
        PhiH=basis.values_at_nodes.T @ H,
        noise_PhiH=noise_basis.values_at_nodes.T @ H,
        HtL=H.T @ load,
        noise_HtL=H.T @ noise_load,
    )


def project_initial(u0, basis: BasisSet, dim: int = 1) -> np.ndarray:
    """L2 projection onto span{phi_m} (tensor span in 2-d): solve B c = (u0, phi) (B C B = F in 2-d).

    ``u0`` is a callable of x (1-d) or (x, y) (2-d) evaluated at the basis nodes.
    """
    x = basis.rule.nodes
    B = assemble_mass(basis.N)
    L = load_matrix(basis)
    cho = scipy.linalg.cho_factor(B)
    if dim == 1:
        rhs = L @ np.asarray(u0(x), dtype=float)
        return scipy.linalg.cho_solve(cho, rhs)
    X, Y = np.meshgrid(x, x, indexing="ij")
    F = L @ np.asarray(u0(X, Y), dtype=float) @ L.T
    C = scipy.linalg.cho_solve(cho, F)
    return scipy.linalg.cho_solve(cho, C.T).T
