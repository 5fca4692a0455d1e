"""Tamed semi-implicit Euler stepping in the diagonalizing eigenbasis.

The fully discrete scheme is, for every test function psi in V_N,

    (u^{k+1} - u^k, psi) + tau nu (grad u^{k+1}, grad psi)
        = tau (f(u^k), psi) / (1 + tau ||f(u^k)||^2) + (g(u^k) dW_k, psi).

In 1-d with u = sum c_m phi_m this reads (B + tau A) c^{k+1} = B c^k + r_k.
Writing c = H v with B H = A H diag(lam) and H^T A H = I gives

    v_m^{k+1} = (lam_m v_m^k + (H^T r_k)_m) / (lam_m + tau).

In 2-d, C = H V H^T and the Kronecker structure gives

    V_mn^{k+1} = (lam_m lam_n V_mn^k + (H^T R_k H)_mn) / (lam_m lam_n + tau (lam_m + lam_n)).

The noise load enters once, without a factor tau.  All state arrays may carry
leading batch axes (independent realizations advanced together).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable

import numpy as np

from .basis import BasisSet, QuadratureRule, gauss_lobatto_rule
from .dynamics import DiffusionSpec, ReactionSpec, f_eval, g_eval, l2_norm_sq
from .noise import BrownianLattice, QWienerSpec, coarsen, scaled_mode_values
from .operators import Discretization, OperatorSpec, build_discretization, noise_order, project_initial


class DivergenceError(RuntimeError):
    """A non-finite state appeared during time stepping."""

    def __init__(self, step: int, realizations=None):
        self.step = step
        self.realizations = list(realizations) if realizations is not None else []
        where = f" in realizations {self.realizations}" if self.realizations else ""
        super().__init__(f"non-finite state at step {step}{where}")


INITIAL_CONDITIONS = ("sine", "bubble", "zero")


def initial_condition(kind: str, dim: int) -> Callable:
    """sine: sin(pi x) [sin(pi y)];  bubble: x(1-x) [y(1-y)];  zero."""
    if kind == "sine":
        return (lambda x: np.sin(np.pi * x)) if dim == 1 else (lambda x, y: np.sin(np.pi * x) * np.sin(np.pi * y))
    if kind == "bubble":
        return (lambda x: x * (1 - x)) if dim == 1 else (lambda x, y: x * (1 - x) * y * (1 - y))
    if kind == "zero":
        return (lambda x: np.zeros_like(x)) if dim == 1 else (lambda x, y: np.zeros_like(x))
    raise ValueError(f"unknown initial condition {kind!r}; expected one of {INITIAL_CONDITIONS}")


@dataclass(frozen=True)
class RunConfig:
    operator: OperatorSpec = OperatorSpec(1, 1.0 / math.pi**2)
    reaction: ReactionSpec = ReactionSpec.allen_cahn()
    diffusion: DiffusionSpec = DiffusionSpec("constant_identity")
    noise: QWienerSpec = QWienerSpec()
    N: int = 16
    M: int = 100
    T: float = 1.0
    u0: str = "sine"
    master_seed: int = 0
    realization_id: int = 0

    def __post_init__(self):
        if self.N < 3:
            raise ValueError(f"N must be >= 3, got {self.N}")
        if self.M < 1:
            raise ValueError(f"M must be >= 1, got {self.M}")
        if not self.T > 0:
            raise ValueError(f"T must be positive, got {self.T}")
        if self.noise.dimension != self.operator.dimension:
            raise ValueError("noise and operator dimensions differ")
        if self.u0 not in INITIAL_CONDITIONS:
            raise ValueError(f"unknown initial condition {self.u0!r}")

    @property
    def dim(self) -> int:
        return self.operator.dimension

    @property
    def tau(self) -> float:
        return self.T / self.M

    @property
    def has_noise(self) -> bool:
        return self.noise.J > 0 and not self.diffusion.is_zero

    @property
    def gamma(self) -> float:
        """Predicted regularity index from the noise decay; used for reporting expected rates."""
        return self.noise.regularity_index()

    def with_(self, **changes) -> "RunConfig":
        return replace(self, **changes)


@lru_cache(maxsize=32)
def discretization_for(spec: OperatorSpec, N: int, max_frequency: int = 0) -> Discretization:
    return build_discretization(spec, N, noise_order_=noise_order(N, max_frequency))


def discretization(config: RunConfig) -> Discretization:
    J = config.noise.J if config.has_noise else 0
    return discretization_for(config.operator, config.N, J)


@lru_cache(maxsize=32)
def _scaled_modes(spec: QWienerSpec, order: int) -> np.ndarray:
    out = scaled_mode_values(spec, gauss_lobatto_rule(order))
    out.flags.writeable = False
    return out


def noise_modes(config: RunConfig, disc: Discretization) -> np.ndarray:
    """sqrt(q_j) e_j on the noise nodes, shape (modes, nodes)."""
    return _scaled_modes(config.noise, disc.noise_rule.order)


@dataclass(frozen=True, eq=False)
class SolverState:
    """Eigen-coordinates V at step k; ``nodal_u`` is synthesized on demand and cached."""

    k: int
    V: np.ndarray
    disc: Discretization
    snapshots: list | None = None
    _nodal: list = field(default_factory=list, repr=False)

    @property
    def dim(self) -> int:
        return self.disc.dim

    @property
    def coefficients(self) -> np.ndarray:
        """phi-expansion coefficients c = H v (1-d) or C = H V H^T (2-d)."""
        H = self.disc.H
        if self.dim == 1:
            return self.V @ H.T
        return H @ self.V @ H.T

    @property
    def nodal_u(self) -> np.ndarray:
        if not self._nodal:
            self._nodal.append(to_nodal(self.V, self.disc.PhiH, self.dim))
        return self._nodal[0]

    def nodal_on(self, rule: QuadratureRule) -> np.ndarray:
        Phi = BasisSet(self.disc.N, rule).values_at_nodes.T
        return to_nodal(self.V, Phi @ self.disc.H, self.dim)


def to_nodal(V: np.ndarray, PhiH: np.ndarray, dim: int) -> np.ndarray:
    if dim == 1:
        return V @ PhiH.T
    return PhiH @ V @ PhiH.T


def _to_eigen(disc: Discretization, load_nodes: np.ndarray, HtL: np.ndarray) -> np.ndarray:
    if disc.dim == 1:
        return load_nodes @ HtL.T
    return HtL @ load_nodes @ HtL.T


def _denominator(disc: Discretization, tau: float) -> tuple[np.ndarray, np.ndarray]:
    lam = disc.lam
    if disc.dim == 1:
        return lam, lam + tau
    ll = np.outer(lam, lam)
    return ll, ll + tau * (lam[:, None] + lam[None, :])


def tamed_step(
    disc: Discretization,
    V: np.ndarray,
    tau: float,
    reaction: ReactionSpec,
    diffusion: DiffusionSpec,
    dW: np.ndarray | None = None,
    *,
    check_taming: bool = False,
) -> np.ndarray:
    """One step of the tamed scheme in eigen-coordinates.

    ``dW`` holds the noise increment field on ``disc.noise_rule`` nodes (with
    the same leading batch axes as ``V``), or None for no noise.
    """
    dim = disc.dim
    num, den = _denominator(disc, tau)
    out = num * V
    if not reaction.is_zero:
        u = to_nodal(V, disc.PhiH, dim)
        fu = f_eval(reaction, u)
        fn2 = l2_norm_sq(fu, disc.rule, dim)
        theta = 1.0 / (1.0 + tau * fn2)
        if check_taming:
            drift = tau * np.sqrt(fn2) * theta
            if np.any(drift > 0.5 * math.sqrt(tau) * (1 + 1e-12)):
                raise AssertionError("tamed drift exceeds sqrt(tau)/2")
        theta = np.reshape(theta, np.shape(theta) + (1,) * dim)
        out = out + tau * theta * _to_eigen(disc, fu, disc.HtL)
    if dW is not None and not diffusion.is_zero:
        un = to_nodal(V, disc.noise_PhiH, dim)
        out = out + _to_eigen(disc, g_eval(diffusion, un) * dW, disc.noise_HtL)
    return out / den


def step_1d(state: SolverState, tau: float, reaction: ReactionSpec, diffusion: DiffusionSpec, dW=None) -> SolverState:
    V = tamed_step(state.disc, state.V, tau, reaction, diffusion, dW)
    _check_finite(V, state.k + 1)
    return SolverState(state.k + 1, V, state.disc)


step_2d = step_1d


def _check_finite(V: np.ndarray, step: int, realization_ids=None) -> None:
    if np.all(np.isfinite(V)):
        return
    bad = None
    if realization_ids is not None:
        axes = tuple(range(1, V.ndim))
        mask = ~np.all(np.isfinite(V), axis=axes) if axes else ~np.isfinite(V)
        bad = [rid for rid, b in zip(realization_ids, np.atleast_1d(mask)) if b]
    raise DivergenceError(step, bad)


def initial_state(config: RunConfig, disc: Discretization | None = None) -> SolverState:
    """Project u0 onto V_N and move to eigen-coordinates: v = H^T A c (H^{-1} = H^T A)."""
    disc = disc or discretization(config)
    c0 = project_initial(initial_condition(config.u0, config.dim), disc.basis, config.dim)
    HtA = disc.H.T @ disc.stiffness
    V0 = HtA @ c0 if config.dim == 1 else HtA @ c0 @ HtA.T
    return SolverState(0, V0, disc)


@dataclass
class PathResult:
    """Final eigen-coordinates of a batch of trajectories plus optional diagnostics."""

    V: np.ndarray
    disc: Discretization
    norms_sq: np.ndarray | None = None  # (M+1, batch): ||u^k||^2 per step
    snapshots: list | None = None  # [(k, nodal field)]

    def state(self, k: int, i: int | None = None) -> SolverState:
        """Final state of realization ``i`` (the whole batch when None), labelled step ``k``."""
        return SolverState(k, self.V if i is None else self.V[i], self.disc)


def solve_batch(
    config: RunConfig,
    increments: np.ndarray | None,
    *,
    disc: Discretization | None = None,
    realization_ids=None,
    record_norms: bool = False,
    snapshot_every: int | None = None,
    check_taming: bool = False,
) -> PathResult:
    """Advance a batch of realizations through M steps.

    ``increments`` has shape (batch, modes, M) at the run's own resolution
    (already coarsened), or is None for a deterministic run with batch 1.
    """
    disc = disc or discretization(config)
    dim = config.dim
    tau = config.tau
    V0 = initial_state(config, disc).V
    batch = 1 if increments is None else increments.shape[0]
    if increments is not None and increments.shape[-1] != config.M:
        raise ValueError(f"increment lattice has {increments.shape[-1]} steps, run needs M={config.M}")
    V = np.broadcast_to(V0, (batch,) + V0.shape).copy()
    use_noise = increments is not None and config.has_noise
    if use_noise:
        modes = noise_modes(config, disc)
        if increments.shape[1] != modes.shape[0]:
            raise ValueError(f"lattice has {increments.shape[1]} modes, noise spec has {modes.shape[0]}")
        n_noise = disc.noise_rule.size
        field_shape = (batch,) + (n_noise,) * dim
        # (batch, M, modes) contiguous per step
        inc_steps = np.ascontiguousarray(np.moveaxis(increments, -1, 1))

    norms = None
    if record_norms:
        norms = np.empty((config.M + 1, batch))
        norms[0] = l2_norm_sq(to_nodal(V, disc.PhiH, dim), disc.rule, dim)
    snaps = [] if snapshot_every else None
    if snaps is not None:
        snaps.append((0, to_nodal(V, disc.PhiH, dim)))

    for k in range(config.M):
        dW = (inc_steps[:, k, :] @ modes).reshape(field_shape) if use_noise else None
        V = tamed_step(disc, V, tau, config.reaction, config.diffusion, dW, check_taming=check_taming)
        _check_finite(V, k + 1, realization_ids)
        if norms is not None:
            norms[k + 1] = l2_norm_sq(to_nodal(V, disc.PhiH, dim), disc.rule, dim)
        if snaps is not None and ((k + 1) % snapshot_every == 0 or k + 1 == config.M):
            snaps.append((k + 1, to_nodal(V, disc.PhiH, dim)))
    return PathResult(V=V, disc=disc, norms_sq=norms, snapshots=snaps)


def solve_path(
    config: RunConfig,
    lattice: BrownianLattice | None,
    coarsen_factor: int = 1,
    *,
    snapshots: bool = False,
) -> SolverState:
    """Run one trajectory to t = T on ``lattice`` coarsened by ``coarsen_factor``."""
    increments = None
    if lattice is not None:
        if coarsen_factor * config.M != lattice.M_fine:
            raise ValueError(
                f"lattice resolution {lattice.M_fine} != coarsen_factor {coarsen_factor} * M {config.M}"
            )
        if not math.isclose(lattice.T, config.T):
            raise ValueError(f"lattice horizon {lattice.T} != run horizon {config.T}")
        increments = coarsen(lattice, coarsen_factor)[None]
    every = max(1, math.ceil(config.M / 100)) if snapshots else None
    result = solve_batch(config, increments, realization_ids=[config.realization_id], snapshot_every=every)
    snaps = [(k, u[0]) for k, u in result.snapshots] if snapshots else None
    return SolverState(config.M, result.V[0], result.disc, snaps)


def common_rule(*Ns: int) -> QuadratureRule:
    return gauss_lobatto_rule(max(Ns) + 8)


def l2_error(a: SolverState, b: SolverState, rule: QuadratureRule | None = None):
    """L2 distance of two fields (possibly different N, batched) on a shared Lobatto rule."""
    rule = rule or common_rule(a.disc.N, b.disc.N)
    if rule.order < max(a.disc.N, b.disc.N) + 2:
        raise ValueError("common rule too coarse for the fields compared")
    diff = a.nodal_on(rule) - b.nodal_on(rule)
    out = np.sqrt(l2_norm_sq(diff, rule, a.dim))
    return float(out) if np.ndim(out) == 0 else out
