"""Shifted Legendre polynomials, the Dirichlet basis and Gauss-Lobatto transforms on [0, 1].

The Dirichlet basis is

    phi_m(x) = (L_m(x) - L_{m+2}(x)) / (2 sqrt(4m + 6)),   m = 0, 1, ...

with L_n the shifted Legendre polynomial L_n(x) = P_n(2x - 1).  Every phi_m
vanishes at both end points.  Nodal values live on Legendre-Gauss-Lobatto
nodes; coefficient space is either the Legendre coefficients of the nodal
interpolant or the phi_m expansion coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class QuadratureError(RuntimeError):
    pass


def legendre_table(n_max: int, x) -> np.ndarray:
    """Values of L_0..L_{n_max} (shifted to [0, 1]) at ``x``; shape (n_max+1, *x.shape)."""
    t = 2.0 * np.asarray(x, dtype=float) - 1.0
    out = np.empty((n_max + 1,) + t.shape)
    out[0] = 1.0
    if n_max >= 1:
        out[1] = t
    for n in range(1, n_max):
        out[n + 1] = ((2 * n + 1) * t * out[n] - n * out[n - 1]) / (n + 1)
    return out


def legendre_derivative_table(n_max: int, x) -> np.ndarray:
    """d/dx of the shifted Legendre polynomials, via L'_{n+1} = L'_{n-1} + (2n+1) L_n on [-1, 1]."""
    values = legendre_table(n_max, x)
    d = np.zeros_like(values)
    if n_max >= 1:
        d[1] = 1.0
    for n in range(1, n_max):
        d[n + 1] = d[n - 1] + (2 * n + 1) * values[n]
    # chain rule for t = 2x - 1
    return 2.0 * d


def shifted_legendre_eval(n: int, x: float) -> float:
    if n < 0:
        raise ValueError(f"Legendre degree must be non-negative, got {n}")
    return float(legendre_table(n, x)[n])


def basis_scale(m) -> np.ndarray:
    return 1.0 / (2.0 * np.sqrt(4.0 * np.asarray(m, dtype=float) + 6.0))


def basis_eval(m: int, x):
    """phi_m(x) for the Dirichlet basis."""
    if m < 0:
        raise ValueError(f"basis index must be non-negative, got {m}")
    table = legendre_table(m + 2, x)
    value = basis_scale(m) * (table[m] - table[m + 2])
    return float(value) if np.ndim(value) == 0 else value


def basis_table(n_modes: int, x) -> np.ndarray:
    """phi_0..phi_{n_modes-1} at ``x``; shape (n_modes, *x.shape)."""
    table = legendre_table(n_modes + 1, x)
    m = np.arange(n_modes)
    scale = basis_scale(m).reshape((-1,) + (1,) * np.ndim(x))
    return scale * (table[:n_modes] - table[2:n_modes + 2])


def basis_derivative_table(n_modes: int, x) -> np.ndarray:
    d = legendre_derivative_table(n_modes + 1, x)
    m = np.arange(n_modes)
    scale = basis_scale(m).reshape((-1,) + (1,) * np.ndim(x))
    return scale * (d[:n_modes] - d[2:n_modes + 2])


@dataclass(frozen=True)
class QuadratureRule:
    """Legendre-Gauss-Lobatto rule with ``order + 1`` nodes on [0, 1]."""

    nodes: np.ndarray
    weights: np.ndarray
    order: int

    @property
    def size(self) -> int:
        return self.order + 1

    def integrate(self, values) -> np.ndarray:
        """Integrate nodal values over the last axis (1-d) or last two axes (2-d tensor grid)."""
        values = np.asarray(values)
        if values.shape[-1] != self.size:
            raise ValueError(f"expected {self.size} nodal values, got {values.shape[-1]}")
        return values @ self.weights


def gauss_lobatto_rule(Np: int) -> QuadratureRule:
    """Gauss-Lobatto nodes and weights on [0, 1].

    Interior nodes are the roots of P'_Np on [-1, 1], found by Newton iteration
    started from the Chebyshev-Gauss-Lobatto points.
    """
    if Np < 1:
        raise ValueError(f"Gauss-Lobatto rule needs Np >= 1, got {Np}")
    n1 = Np + 1
    t = -np.cos(np.pi * np.arange(n1) / Np)
    P = np.zeros((n1, n1))
    t_old = np.full_like(t, 2.0)
    for _ in range(100):
        if np.max(np.abs(t - t_old)) <= 1e-14:
            break
        t_old = t
        P[:, 0] = 1.0
        P[:, 1] = t
        for k in range(1, Np):
            P[:, k + 1] = ((2 * k + 1) * t * P[:, k] - k * P[:, k - 1]) / (k + 1)
        t = t_old - (t * P[:, Np] - P[:, Np - 1]) / (n1 * P[:, Np])
    else:
        if np.max(np.abs(t - t_old)) > 1e-14:
            raise QuadratureError(f"Gauss-Lobatto Newton iteration did not converge for Np={Np}")
    t[0], t[-1] = -1.0, 1.0
    PN = legendre_table(Np, 0.5 * (t + 1.0))[Np]
    weights = 2.0 / (Np * n1 * PN**2)
    nodes = 0.5 * (t + 1.0)
    nodes[0], nodes[-1] = 0.0, 1.0
    return QuadratureRule(nodes=nodes, weights=0.5 * weights, order=Np)


def default_order(N: int) -> int:
    """Quadrature order used for nonlinear terms of a degree-N field."""
    return N + 8


@dataclass(frozen=True)
class BasisSet:
    """Dirichlet basis phi_0..phi_{N-2} tabulated on the nodes of ``rule``."""

    N: int
    rule: QuadratureRule
    values_at_nodes: np.ndarray = field(init=False, repr=False)
    legendre_at_nodes: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.N < 3:
            raise ValueError(f"cutoff N must be >= 3, got {self.N}")
        object.__setattr__(self, "values_at_nodes", basis_table(self.N - 1, self.rule.nodes))
        table = legendre_table(max(self.N, self.rule.order), self.rule.nodes)
        object.__setattr__(self, "legendre_at_nodes", table[: self.N + 1])

    @property
    def n_modes(self) -> int:
        return self.N - 1


def synthesize(coeffs, basis: BasisSet) -> np.ndarray:
    """Nodal values of sum_m c_m phi_m (1-d) or sum_mn c_mn phi_m(x) phi_n(y) (2-d).

    Leading axes of ``coeffs`` beyond the spatial ones are treated as a batch.
    Which case applies is decided by ``ndim``: pass ``dim`` explicitly through
    :func:`synthesize_nd` when a 1-d batch could be confused with a 2-d field.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    return synthesize_nd(coeffs, basis, dim=1 if coeffs.ndim == 1 else 2)


def synthesize_nd(coeffs, basis: BasisSet, dim: int) -> np.ndarray:
    coeffs = np.asarray(coeffs, dtype=float)
    n = basis.n_modes
    if coeffs.shape[-dim:] != (n,) * dim:
        raise ValueError(f"coefficient shape {coeffs.shape} does not match {dim}-d basis with N={basis.N}")
    Phi = basis.values_at_nodes.T
    if dim == 1:
        return coeffs @ Phi.T
    return Phi @ coeffs @ Phi.T


def analyze(values, rule: QuadratureRule) -> np.ndarray:
    """Shifted Legendre coefficients h_0..h_Np of the nodal interpolant (last axis).

    Discrete transform h_n = sum_i w_i v_i L_n(x_i) / gamma_n with
    gamma_n = 1/(2n+1), except gamma_Np = 1/Np for the top mode, where the
    Lobatto rule is not exact.
    """
    values = np.asarray(values, dtype=float)
    Np = rule.order
    L = legendre_table(Np, rule.nodes)
    gamma = 1.0 / (2.0 * np.arange(Np + 1) + 1.0)
    gamma[Np] = 1.0 / Np
    T = (L * rule.weights) / gamma[:, None]
    return values @ T.T


def legendre_synthesize(h, rule: QuadratureRule) -> np.ndarray:
    """Inverse of :func:`analyze`: nodal values of sum_n h_n L_n."""
    L = legendre_table(rule.order, rule.nodes)
    return np.asarray(h, dtype=float) @ L


def load_matrix(basis: BasisSet) -> np.ndarray:
    """Matrix mapping nodal values to (I v, phi_m) for m = 0..N-2.

    Built from the Legendre coefficients of the interpolant and the two-term
    expansion of phi_m:  (I v, phi_m) = k_m (h_m / (2m+1) - h_{m+2} / (2m+5)).
    """
    rule = basis.rule
    if rule.order < basis.N + 1:
        raise ValueError(f"quadrature order {rule.order} too small for N={basis.N}; need >= N+1")
    n1 = rule.size
    T = analyze(np.eye(n1), rule).T  # column j: Legendre coefficients of the j-th cardinal function
    m = np.arange(basis.n_modes)
    k = basis_scale(m)
    return k[:, None] * (T[m] / (2 * m + 1)[:, None] - T[m + 2] / (2 * m + 5)[:, None])


def load_vector(values, basis: BasisSet) -> np.ndarray:
    """(I v, phi_m) per direction; 1-d over the last axis of ``values``."""
    return np.asarray(values, dtype=float) @ load_matrix(basis).T
