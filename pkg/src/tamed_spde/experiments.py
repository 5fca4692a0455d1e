"""Monte Carlo strong-error studies with path-coupled surrogate references.

Every realization samples one Brownian lattice at the finest resolution a
study needs; coarse runs see the same path through :func:`~tamed_spde.noise.coarsen`.
Realizations are processed in fixed chunks of consecutive ids, so results do
not depend on how many workers execute the chunks.
"""

from __future__ import annotations

import logging
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .dynamics import l2_norm_sq
from .noise import coarsen, sample_lattice
from .stepper import RunConfig, SolverState, common_rule, discretization, solve_batch

log = logging.getLogger(__name__)

CHUNK = 10


class StudyError(ValueError):
    pass


@dataclass
class ErrorRow:
    axis_value: float
    K: int
    rms_error: float
    standard_error: float


@dataclass
class ErrorTable:
    axis_kind: str  # "spatial_N" or "temporal_M"
    rows: list[ErrorRow]
    reference: str
    T: float = 1.0
    fitted_slope: float = float("nan")
    intercept: float = float("nan")
    residual: float = float("nan")
    reliable: bool = True
    notes: list[str] = field(default_factory=list)

    def axis(self) -> np.ndarray:
        return np.array([r.axis_value for r in self.rows], dtype=float)

    def errors(self) -> np.ndarray:
        return np.array([r.rms_error for r in self.rows], dtype=float)


@dataclass
class FitResult:
    slope: float
    intercept: float
    residual: float


def fit_rate(table: ErrorTable) -> FitResult:
    """Least-squares slope of log(error) against log(N) (sign flipped) or log(tau).

    Temporal tables store M; tau = T / M, so log tau = log T - log M.
    Non-positive or non-finite errors are dropped with a warning.
    """
    x = table.axis()
    y = table.errors()
    ok = np.isfinite(y) & (y > 0)
    if not ok.all():
        warnings.warn(f"excluding {int((~ok).sum())} rows with zero or non-finite error from the rate fit")
    x, y = x[ok], y[ok]
    if len(x) < 3:
        raise StudyError(f"rate fit needs at least 3 usable rows, got {len(x)}")
    if table.axis_kind == "temporal_M":
        lx = math.log(table.T) - np.log(x)
    else:
        lx = np.log(x)
    ly = np.log(y)
    slope, intercept = np.polyfit(lx, ly, 1)
    residual = float(np.max(np.abs(ly - (slope * lx + intercept))))
    if table.axis_kind == "spatial_N":
        slope = -slope
    return FitResult(float(slope), float(intercept), residual)


def jackknife_rms(errors: np.ndarray) -> tuple[float, float, bool]:
    """RMS of ``errors`` with its jackknife standard error; the flag is False when K = 1."""
    e2 = np.asarray(errors, dtype=float) ** 2
    K = e2.size
    rms = math.sqrt(float(e2.mean()))
    if K < 2:
        return rms, 0.0, False
    loo = np.sqrt((e2.sum() - e2) / (K - 1))
    se = math.sqrt((K - 1) / K * float(np.sum((loo - loo.mean()) ** 2)))
    return rms, se, True


def _chunks(K: int, size: int = CHUNK) -> list[range]:
    return [range(s, min(s + size, K)) for s in range(0, K, size)]


def _map(fn, items, workers: int | None):
    if not workers or workers <= 1 or len(items) <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _lattice_batch(config: RunConfig, M_fine: int, ids: Sequence[int], master_seed: int):
    if not config.has_noise:
        return None
    return np.stack([sample_lattice(config.noise, M_fine, config.T, master_seed, i).increments for i in ids])


def _coupled_errors(
    configs: Sequence[RunConfig],
    reference: RunConfig,
    ids: Sequence[int],
    master_seed: int,
    control_offset: int | None = None,
) -> np.ndarray:
    """Final-time L2 errors, shape (len(configs), len(ids)), all runs on the reference lattice.

    With ``control_offset`` the coarse runs use realization ids shifted by that
    amount instead (an uncoupled control).
    """
    M_ref = reference.M
    fine = _lattice_batch(reference, M_ref, ids, master_seed)
    ref = solve_batch(reference, fine, realization_ids=list(ids))
    rule = common_rule(reference.N, *(c.N for c in configs))
    ref_nodal = SolverState(M_ref, ref.V, ref.disc).nodal_on(rule)
    if control_offset is not None:
        fine = _lattice_batch(reference, M_ref, [i + control_offset for i in ids], master_seed)
    out = np.empty((len(configs), len(ids)))
    for c_idx, cfg in enumerate(configs):
        inc = None if fine is None else coarsen(fine, M_ref // cfg.M)
        res = solve_batch(cfg, inc, realization_ids=list(ids))
        diff = SolverState(cfg.M, res.V, res.disc).nodal_on(rule) - ref_nodal
        out[c_idx] = np.sqrt(l2_norm_sq(diff, rule, cfg.dim))
    return out


def _check_pair(config: RunConfig, reference: RunConfig) -> None:
    if reference.M % config.M:
        raise StudyError(f"reference M={reference.M} is not a multiple of M={config.M}")
    same = config.with_(N=reference.N, M=reference.M, master_seed=reference.master_seed,
                        realization_id=reference.realization_id)
    if same != reference:
        raise StudyError("reference configuration may differ only in N and M")


def _run_study(configs, reference, K, master_seed, workers, control_offset=None, chunk=CHUNK) -> np.ndarray:
    for cfg in configs:
        _check_pair(cfg, reference)
    parts = _map(
        lambda ids: _coupled_errors(configs, reference, ids, master_seed, control_offset),
        _chunks(K, chunk),
        workers,
    )
    return np.concatenate(parts, axis=1)


def strong_error(
    config: RunConfig, reference: RunConfig, K: int, master_seed: int | None = None, *, workers: int | None = None
) -> tuple[float, float]:
    """RMS final-time error over K path-coupled realizations and its jackknife standard error."""
    master_seed = reference.master_seed if master_seed is None else master_seed
    if K < 1:
        raise StudyError("K must be >= 1")
    errors = _run_study([config], reference, K, master_seed, workers)[0]
    rms, se, defined = jackknife_rms(errors)
    if not defined:
        log.info("standard error undefined for K=1; reported as 0")
    return rms, se


def _table(axis_kind, values, errors, reference_desc, T, notes=()) -> ErrorTable:
    rows = []
    for v, e in sorted(zip(values, errors), key=lambda p: p[0]):
        rms, se, _ = jackknife_rms(e)
        rows.append(ErrorRow(float(v), len(e), rms, se))
    table = ErrorTable(axis_kind, rows, reference_desc, T=T, notes=list(notes))
    errs = table.errors()
    if np.all(errs < 1e-11):
        table.reliable = False
        table.notes.append("errors at machine-precision floor; slope is not meaningful")
    try:
        fit = fit_rate(table)
        table.fitted_slope, table.intercept, table.residual = fit.slope, fit.intercept, fit.residual
    except StudyError as exc:
        table.reliable = False
        table.notes.append(str(exc))
    return table


def spatial_study(
    base: RunConfig, Ns: Sequence[int], K: int, N_ref: int, *, master_seed: int | None = None,
    workers: int | None = None, chunk: int = CHUNK,
) -> ErrorTable:
    """Final-time RMS error for each N against a same-path N_ref surrogate, fixed M."""
    master_seed = base.master_seed if master_seed is None else master_seed
    Ns = sorted(int(n) for n in Ns)
    if N_ref <= max(Ns):
        raise StudyError(f"N_ref={N_ref} must exceed every studied N (max {max(Ns)})")
    reference = base.with_(N=N_ref)
    errors = _run_study([base.with_(N=n) for n in Ns], reference, K, master_seed, workers, chunk=chunk)
    return _table("spatial_N", Ns, errors, f"N_ref={N_ref}, M={base.M}", base.T)


def temporal_study(
    base: RunConfig,
    Ms: Sequence[int],
    K: int,
    M_ref: int,
    *,
    master_seed: int | None = None,
    workers: int | None = None,
    coupled: bool = True,
    chunk: int = CHUNK,
) -> ErrorTable:
    """Final-time RMS error for each M against a same-path M_ref surrogate, fixed N.

    ``coupled=False`` draws the coarse paths independently of the reference;
    it exists only as a control for the coupling machinery.
    """
    master_seed = base.master_seed if master_seed is None else master_seed
    Ms = sorted(int(m) for m in Ms)
    bad = [m for m in Ms if m < 1 or M_ref % m]
    if bad:
        raise StudyError(f"time-step counts {bad} do not divide M_ref={M_ref}")
    reference = base.with_(M=M_ref)
    offset = None if coupled else 1_000_003
    errors = _run_study([base.with_(M=m) for m in Ms], reference, K, master_seed, workers, offset, chunk)
    desc = f"N={base.N}, M_ref={M_ref}" + ("" if coupled else ", uncoupled control")
    return _table("temporal_M", Ms, errors, desc, base.T)


@dataclass
class StabilityRow:
    tau: float
    max_mean_norm_sq: float
    bound: float
    finite: bool

    @property
    def holds(self) -> bool:
        return self.finite and self.max_mean_norm_sq <= self.bound


def stability_bound(config: RunConfig, mean_initial_norm_sq: float) -> float:
    """exp((2K + 2c^2 TrQ) T) (E||u0||^2 + 1 / (K + c^2 TrQ)) with catalog K and c."""
    Kc = config.reaction.coercivity_constant()
    c = config.diffusion.lipschitz_constant
    trq = config.noise.trace() if config.has_noise else 0.0
    rate = Kc + c * c * trq
    growth = math.exp(2.0 * rate * config.T)
    if rate == 0:
        return mean_initial_norm_sq + 2.0 * config.T
    return growth * mean_initial_norm_sq + growth / rate


def mean_norm_history(
    config: RunConfig, K: int, master_seed: int = 0, workers: int | None = None, *, check_taming: bool = True
) -> np.ndarray:
    """Sample mean over K realizations of ||u^k||^2, k = 0..M."""
    disc = discretization(config)

    def run(ids):
        inc = _lattice_batch(config, config.M, ids, master_seed)
        res = solve_batch(config, inc, disc=disc, realization_ids=list(ids), record_norms=True, check_taming=check_taming)
        return res.norms_sq

    parts = _map(run, _chunks(K), workers)
    return np.concatenate(parts, axis=1).mean(axis=1)


def stability_sweep(
    base: RunConfig, taus: Sequence[float], K: int, *, master_seed: int | None = None, workers: int | None = None
) -> list[StabilityRow]:
    """Per tau: max over steps of the sample-mean squared norm against the stability bound."""
    master_seed = base.master_seed if master_seed is None else master_seed
    rows = []
    for tau in taus:
        if not tau > 0:
            raise StudyError(f"time step must be positive, got {tau}")
        M = max(1, round(base.T / tau))
        cfg = base.with_(M=M)
        history = mean_norm_history(cfg, K, master_seed, workers)
        finite = bool(np.all(np.isfinite(history)))
        rows.append(StabilityRow(cfg.tau, float(np.max(history)), stability_bound(cfg, float(history[0])), finite))
    return rows


def single_run_norms(config: RunConfig) -> list[tuple[float, float]]:
    """(t_k, ||u^k||) at roughly 100 snapshot times of one trajectory."""
    inc = _lattice_batch(config, config.M, [config.realization_id], config.master_seed)
    every = max(1, math.ceil(config.M / 100))
    res = solve_batch(config, inc, realization_ids=[config.realization_id], snapshot_every=every)
    disc = res.disc
    return [
        (k * config.tau, float(np.sqrt(l2_norm_sq(u[0], disc.rule, config.dim))))
        for k, u in res.snapshots
    ]
