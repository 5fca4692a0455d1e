import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tamed_spde.basis import gauss_lobatto_rule
from tamed_spde.dynamics import DiffusionSpec, ReactionSpec
from tamed_spde.experiments import (
    ErrorRow,
    ErrorTable,
    StudyError,
    _table as _table_from_errors,
    fit_rate,
    jackknife_rms,
    mean_norm_history,
    spatial_study,
    stability_bound,
    stability_sweep,
    strong_error,
    temporal_study,
)
from tamed_spde.noise import QWienerSpec
from tamed_spde.operators import OperatorSpec
from tamed_spde.stepper import RunConfig, discretization

HEAT = RunConfig(reaction=ReactionSpec.zero(), diffusion=DiffusionSpec("linear", 0.0))


def _table(kind, xs, ys, T=1.0):
    return ErrorTable(kind, [ErrorRow(x, 1, y, 0.0) for x, y in zip(xs, ys)], "synthetic", T=T)


@given(st.floats(0.1, 4.0), st.floats(1e-3, 1e3))
@settings(max_examples=30, deadline=None)
def test_fit_spatial_exact(rate, C):
    Ns = [12, 14, 16, 18, 20]
    fit = fit_rate(_table("spatial_N", Ns, [C * n**-rate for n in Ns]))
    assert fit.slope == pytest.approx(rate, abs=1e-12)
    assert fit.residual <= 1e-12


def test_fit_temporal_exact():
    T = 1.0
    Ms = [96, 144, 192, 256, 384]
    fit = fit_rate(_table("temporal_M", Ms, [3.0 * (T / m) ** 0.5 for m in Ms], T))
    assert fit.slope == pytest.approx(0.5, abs=1e-12)
    assert fit.intercept == pytest.approx(math.log(3.0), abs=1e-12)


def test_fit_rejects_short_tables():
    with pytest.raises(StudyError):
        fit_rate(_table("spatial_N", [4, 8], [1.0, 0.5]))
    with pytest.warns(UserWarning):
        with pytest.raises(StudyError):
            fit_rate(_table("spatial_N", [4, 8, 16], [1.0, 0.0, float("nan")]))


def test_jackknife():
    rms, se, ok = jackknife_rms([0.3])
    assert (rms, se, ok) == (0.3, 0.0, False)
    rms, se, ok = jackknife_rms([1.0, 1.0, 1.0])
    assert rms == 1.0 and se == pytest.approx(0.0, abs=1e-15) and ok
    rng = np.random.default_rng(1)
    e = rng.random(400)
    rms, se, _ = jackknife_rms(e)
    # delta-method estimate of sd(sqrt(mean e^2))
    delta = np.std(e**2, ddof=1) / math.sqrt(400) / (2 * rms)
    assert se == pytest.approx(delta, rel=0.05)


def test_strong_error_identical_configs():
    cfg = RunConfig(N=10, M=20, T=0.2)
    rms, se = strong_error(cfg, cfg, 4)
    assert rms == 0.0 and se == 0.0


def test_strong_error_heat_independent_of_K():
    a = strong_error(HEAT.with_(N=8, M=10), HEAT.with_(N=24, M=10), 1)
    b = strong_error(HEAT.with_(N=8, M=10), HEAT.with_(N=24, M=10), 7)
    assert a[0] == pytest.approx(b[0], rel=1e-14)
    assert b[1] == pytest.approx(0.0, abs=1e-15)


def test_strong_error_rejects_bad_pairs():
    with pytest.raises(StudyError):
        strong_error(RunConfig(M=7), RunConfig(M=20), 2)
    with pytest.raises(StudyError):
        strong_error(RunConfig(M=10), RunConfig(M=20, T=2.0), 2)


def test_bubble_projection_exact():
    from tamed_spde.stepper import initial_state

    r = gauss_lobatto_rule(40)
    for N in (3, 4, 8, 16):
        state = initial_state(HEAT.with_(N=N, u0="bubble"))
        assert np.max(np.abs(state.nodal_on(r) - r.nodes * (1 - r.nodes))) <= 1e-14


def test_floor_table_flagged_unreliable():
    with pytest.warns(UserWarning, match="excluding 1 rows"):
        table = _table_from_errors("spatial_N", [4, 6, 8], [np.full(3, 1e-15), np.full(3, 2e-16), np.zeros(3)], "x", 1.0)
    assert not table.reliable
    assert any("floor" in n for n in table.notes)


def test_bubble_heat_spatial_errors_not_at_floor():
    # u0 lies in V_N, but Galerkin heat flows at different N separate once t > 0
    table = spatial_study(HEAT.with_(u0="bubble", M=10), [4, 6, 8], 2, 16)
    assert [r.axis_value for r in table.rows] == [4, 6, 8]
    assert np.all(table.errors() > 1e-9)


def test_study_preconditions():
    with pytest.raises(StudyError, match="N_ref"):
        spatial_study(HEAT, [8, 10, 12], 1, 12)
    with pytest.raises(StudyError, match="divide"):
        temporal_study(HEAT.with_(N=8), [100, 96], 1, 9216)


def test_heat_temporal_first_order():
    table = temporal_study(HEAT.with_(N=16), [20, 40, 80, 160], 1, 2560)
    assert table.fitted_slope == pytest.approx(1.0, abs=0.1)


def test_stability_heat_monotone():
    cfg = HEAT.with_(N=16, M=40, T=4.0)
    hist = mean_norm_history(cfg, 1)
    assert np.all(np.diff(hist) <= 1e-15)


def test_stability_second_moment_oracle():
    # u0 = 0, f = 0, g = 1: each eigen-mode is a linear recursion with additive Gaussian forcing
    cfg = RunConfig(reaction=ReactionSpec.zero(), diffusion=DiffusionSpec("constant_identity"),
                    noise=QWienerSpec(1, 6, 2.0), N=12, M=20, T=1.0, u0="zero")
    disc = discretization(cfg)
    from tamed_spde.stepper import noise_modes

    modes = noise_modes(cfg, disc)
    G = disc.noise_HtL @ modes.T  # eigen-load per unit increment of each mode
    lam, tau = disc.lam, cfg.tau
    a = lam / (lam + tau)
    Gs = G / (lam + tau)[:, None]
    # covariance recursion Sigma' = D Sigma D + tau Gs Gs^T; ||u||^2 = v^T (H^T B H) v = v^T Lam v
    Sigma = np.zeros((lam.size, lam.size))
    expected = [0.0]
    for _ in range(cfg.M):
        Sigma = a[:, None] * Sigma * a[None, :] + tau * Gs @ Gs.T
        expected.append(float(np.sum(lam * np.diag(Sigma))))
    hist = mean_norm_history(cfg, 4000, master_seed=9, check_taming=False)
    np.testing.assert_allclose(hist[1:], expected[1:], rtol=0.08)
    assert np.all(np.diff(expected) > 0)
    bound = stability_bound(cfg, 0.0)
    assert hist.max() <= bound


def test_stability_bound_formula():
    cfg = RunConfig(T=10.0)
    trq = cfg.noise.trace()
    rate = 1.0 + trq
    assert stability_bound(cfg, 0.5) == pytest.approx(math.exp(2 * rate * 10) * (0.5 + 1 / rate), rel=1e-12)


def test_stability_sweep_rejects_bad_tau():
    with pytest.raises(StudyError):
        stability_sweep(RunConfig(N=8), [0.1, 0.0], 1)


def test_thread_count_invariance():
    cfg = RunConfig(N=8, M=40, T=0.25)
    one = spatial_study(cfg, [6, 7, 8], 6, 16, workers=1, chunk=2)
    many = spatial_study(cfg, [6, 7, 8], 6, 16, workers=3, chunk=2)
    assert [(r.rms_error, r.standard_error) for r in one.rows] == [(r.rms_error, r.standard_error) for r in many.rows]


@pytest.mark.slow
def test_coupling_tightens_standard_error():
    base = RunConfig(N=48, T=1.0)
    Ms = [96, 144, 192, 256, 384]
    coupled = temporal_study(base, Ms, 50, 9216)
    control = temporal_study(base, Ms, 50, 9216, coupled=False)
    for c, u in zip(coupled.rows, control.rows):
        assert c.standard_error < u.standard_error


def test_coupling_tightens_standard_error_small():
    base = RunConfig(N=16, T=1.0)
    Ms = [12, 24, 48]
    coupled = temporal_study(base, Ms, 50, 384)
    control = temporal_study(base, Ms, 50, 384, coupled=False)
    for c, u in zip(coupled.rows, control.rows):
        assert c.standard_error < u.standard_error
        assert c.rms_error < u.rms_error


def test_seed_shift_changes_values_not_structure():
    base = RunConfig(N=16, M=2500, T=0.25)
    Ns = [12, 14, 16, 18, 20]
    a = spatial_study(base, Ns, 20, 64, master_seed=0)
    b = spatial_study(base, Ns, 20, 64, master_seed=1)
    assert a.errors().tolist() != b.errors().tolist()
    assert a.fitted_slope >= 2.4 and b.fitted_slope >= 2.4
