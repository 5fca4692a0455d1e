"""Truncated Q-Wiener noise: spectrum, mode functions, Brownian lattices and their coarsening.

Brownian increments come from a counter-based stream (Philox-4x64 keyed by
the master seed and realization id), mapped to Gaussians by the inverse
normal CDF.  Entry (mode, step) of a lattice is therefore a pure function of
(master_seed, realization_id, mode, step, M_fine), independent of worker
layout.

Increments are rounded to multiples of 2**-40.  Partial sums of such numbers
are exact in binary64 as long as they stay below 2**13 in magnitude, so
coarsening by summation is associative: any factor chain gives bit-identical
coarse increments.  The rounding perturbs an increment by at most 5e-13.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .basis import QuadratureRule, basis_table

MODE_KINDS = ("sine", "sine_plus_basis_phase", "product_sine_basis")
QUANTUM = 2.0**-40


@dataclass(frozen=True)
class QWienerSpec:
    """Diagonal covariance Q with eigenpairs (q_j, e_j), truncated to J terms per direction.

    1-d: q_j = j^-s, j = 1..J.
    2-d: q_{j1 j2} = (j1^2 + j2^2)^(-s/2), j1, j2 = 1..J, flattened row-major.

    Mode functions e_j per ``mode_kind`` (x-factor times y-factor in 2-d):

    sine                   sin(j pi x)                     [ * sin(j2 pi y) ]
    sine_plus_basis_phase  sin(j pi x + phi_j(x))          [ * sin(j2 pi y + phi_j2(y)) ]
    product_sine_basis     2-d only: sin(j1 pi x + phi_j1(x)) * (sin(j2 pi y) + phi_j2(y))
    """

    dimension: int = 1
    J: int = 100
    decay: float = 5.001
    mode_kind: str = "sine"

    def __post_init__(self):
        if self.dimension not in (1, 2):
            raise ValueError(f"noise dimension must be 1 or 2, got {self.dimension}")
        if self.J < 0:
            raise ValueError(f"truncation J must be >= 0, got {self.J}")
        if self.mode_kind not in MODE_KINDS:
            raise ValueError(f"unknown mode kind {self.mode_kind!r}; expected one of {MODE_KINDS}")
        if self.mode_kind == "product_sine_basis" and self.dimension != 2:
            raise ValueError("mode kind 'product_sine_basis' is defined for 2-d noise only")
        if not self.decay > 0:
            raise ValueError(f"decay exponent must be positive, got {self.decay}")

    @property
    def n_modes(self) -> int:
        return self.J**self.dimension

    def eigenvalues(self) -> np.ndarray:
        j = np.arange(1, self.J + 1, dtype=float)
        if self.dimension == 1:
            return j ** (-self.decay)
        j1, j2 = np.meshgrid(j, j, indexing="ij")
        return ((j1**2 + j2**2) ** (-self.decay / 2.0)).ravel()

    def trace(self) -> float:
        return float(np.sum(self.eigenvalues()))

    def regularity_index(self) -> float:
        """Supremum of gamma with ||A^((gamma-1)/2) Q^(1/2)||_HS finite for sine-type modes.

        Used only to report the expected spatial rate N^-gamma.
        """
        if self.dimension == 1:
            return (self.decay + 1.0) / 2.0
        return self.decay / 2.0


def _factor_values(kind: str, j: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Per-direction mode factor, shape (len(j), len(x))."""
    arg = np.pi * np.outer(j, x)
    if kind == "sine":
        return np.sin(arg)
    phi = basis_table(int(j.max()) + 1, x)[j]
    if kind == "phase":
        return np.sin(arg + phi)
    return np.sin(arg) + phi


def mode_values(spec: QWienerSpec, rule: QuadratureRule) -> np.ndarray:
    """e_j at the rule's nodes: shape (modes, n) in 1-d, (modes, n, n) in 2-d."""
    x = rule.nodes
    n = rule.size
    if spec.J == 0:
        return np.zeros((0,) + (n,) * spec.dimension)
    j = np.arange(1, spec.J + 1)
    if spec.mode_kind == "sine":
        fx = fy = _factor_values("sine", j, x)
    elif spec.mode_kind == "sine_plus_basis_phase":
        fx = fy = _factor_values("phase", j, x)
    else:
        fx = _factor_values("phase", j, x)
        fy = _factor_values("additive", j, x)
    if spec.dimension == 1:
        return fx
    return np.einsum("ax,by->abxy", fx, fy).reshape(spec.n_modes, n, n)


def scaled_mode_values(spec: QWienerSpec, rule: QuadratureRule) -> np.ndarray:
    """sqrt(q_j) e_j at nodes, flattened to (modes, nodes)."""
    E = mode_values(spec, rule)
    return np.sqrt(spec.eigenvalues())[:, None] * E.reshape(E.shape[0], -1)


@dataclass(frozen=True)
class BrownianLattice:
    """Per-mode Brownian increments at the master resolution: ``increments[mode, step]``."""

    increments: np.ndarray
    T: float
    master_seed: int
    realization_id: int

    @property
    def M_fine(self) -> int:
        return self.increments.shape[1]

    @property
    def modes(self) -> int:
        return self.increments.shape[0]

    @property
    def dt(self) -> float:
        return self.T / self.M_fine


def _key(master_seed: int, realization_id: int) -> np.ndarray:
    mask = (1 << 64) - 1
    return np.array([master_seed & mask, realization_id & mask], dtype=np.uint64)


def standard_normals(master_seed: int, realization_id: int, count: int, start: int = 0) -> np.ndarray:
    """``count`` N(0,1) draws from position ``start`` of the keyed counter stream."""
    bitgen = np.random.Philox(key=_key(master_seed, realization_id))
    if start:
        # Philox advances in blocks of four 64-bit outputs
        block, offset = divmod(start, 4)
        bitgen.advance(block)
        raw = bitgen.random_raw(count + offset)[offset:]
    else:
        raw = bitgen.random_raw(count)
    u = ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53
    return ndtri(u)


def quantize(x: np.ndarray) -> np.ndarray:
    return np.round(x / QUANTUM) * QUANTUM


def sample_lattice(spec: QWienerSpec, M_fine: int, T: float, master_seed: int, realization_id: int) -> BrownianLattice:
    if M_fine < 1:
        raise ValueError(f"M_fine must be >= 1, got {M_fine}")
    if not T > 0:
        raise ValueError(f"horizon T must be positive, got {T}")
    modes = spec.n_modes
    z = standard_normals(master_seed, realization_id, modes * M_fine).reshape(modes, M_fine)
    inc = quantize(np.sqrt(T / M_fine) * z)
    inc.flags.writeable = False
    return BrownianLattice(increments=inc, T=float(T), master_seed=master_seed, realization_id=realization_id)


def coarsen(lattice: BrownianLattice | np.ndarray, factor: int) -> np.ndarray:
    """Sum consecutive blocks of ``factor`` fine increments (ascending order)."""
    inc = lattice.increments if isinstance(lattice, BrownianLattice) else np.asarray(lattice)
    M_fine = inc.shape[-1]
    if factor < 1 or M_fine % factor:
        raise ValueError(f"coarsening factor {factor} does not divide the lattice resolution {M_fine}")
    if factor == 1:
        return inc
    return inc.reshape(inc.shape[:-1] + (M_fine // factor, factor)).sum(axis=-1)


def increment_field(increments: np.ndarray, k: int, scaled_modes: np.ndarray) -> np.ndarray:
    """Nodal values of sum_j sqrt(q_j) e_j dbeta_j(t_k) from coarse increments ``[..., mode, step]``."""
    M = increments.shape[-1]
    if not 0 <= k < M:
        raise IndexError(f"step {k} outside 0..{M - 1}")
    return increments[..., k] @ scaled_modes
