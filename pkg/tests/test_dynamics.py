import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tamed_spde.basis import gauss_lobatto_rule
from tamed_spde.dynamics import (
    DiffusionSpec,
    InvalidReaction,
    ReactionSpec,
    f_eval,
    g_eval,
    l2_norm,
    taming_factor,
    validate_reaction,
)


def test_allen_cahn_values():
    ac = ReactionSpec.allen_cahn()
    assert f_eval(ac, 2.0) == -6.0
    assert f_eval(ac, 0.0) == 0.0
    x = np.linspace(0, 1, 200)
    u = np.sin(np.pi * x)
    np.testing.assert_allclose(f_eval(ac, u), u - u**3, atol=1e-13)


@given(st.lists(st.floats(-5, 5), min_size=2, max_size=10), st.floats(-10, 10))
@settings(max_examples=200)
def test_horner_matches_naive(coeffs, u):
    if len(coeffs) % 2 == 1:
        coeffs = coeffs[:-1]
    coeffs[-1] = -abs(coeffs[-1]) - 0.1
    spec = ReactionSpec(tuple(coeffs))
    naive = sum(a * u**j for j, a in enumerate(spec.coefficients))
    scale = sum(abs(a) * abs(u) ** j for j, a in enumerate(spec.coefficients))
    assert abs(f_eval(spec, u) - naive) <= 1e-12 * max(scale, 1.0)


def test_validate_reaction():
    validate_reaction(ReactionSpec.allen_cahn())
    validate_reaction((0.0,))
    with pytest.raises(InvalidReaction, match="even"):
        validate_reaction((0.0, 0.0, 1.0))
    with pytest.raises(InvalidReaction, match="not negative"):
        validate_reaction((0.0, 1.0, 0.0, 1.0))
    with pytest.raises(InvalidReaction):
        ReactionSpec((0.0, 1.0, 0.0, 1.0))


def test_coercivity_constant_allen_cahn():
    assert ReactionSpec.allen_cahn().coercivity_constant() == 1.0
    # 2 + u - u^2 peaks at u = 1/2
    assert ReactionSpec((0, 2, 1, -1)).coercivity_constant() == pytest.approx(2.25, abs=1e-14)
    assert ReactionSpec.zero().coercivity_constant() == 0.0


def test_g_catalog():
    u = np.array([0.0, 1.0, math.pi / 2, -3.0])
    np.testing.assert_array_equal(g_eval(DiffusionSpec("constant_identity"), u), np.ones(4))
    rational = g_eval(DiffusionSpec("rational"), u)
    assert rational[0] == 1.0 and rational[1] == 0.0
    assert g_eval(DiffusionSpec("sine"), u)[2] == pytest.approx(1.0)
    np.testing.assert_array_equal(g_eval(DiffusionSpec("linear", 2.0), u), 2 * u)
    with pytest.raises(ValueError):
        DiffusionSpec("cubic")


def test_rational_lipschitz_constant():
    u = np.linspace(-20, 20, 400001)
    g = g_eval(DiffusionSpec("rational"), u)
    slope = np.max(np.abs(np.diff(g) / np.diff(u)))
    assert slope == pytest.approx(DiffusionSpec("rational").lipschitz_constant, rel=1e-6)


def test_l2_norm_examples():
    r = gauss_lobatto_rule(32)
    assert l2_norm(np.zeros(33), r) == 0.0
    assert l2_norm(np.ones(33), r) == pytest.approx(1.0, abs=1e-14)
    assert l2_norm(np.sin(np.pi * r.nodes), r) == pytest.approx(1 / math.sqrt(2), abs=1e-10)


@given(st.one_of(st.just(0.0), st.floats(1e-100, 1e3), st.floats(-1e3, -1e-100)), st.integers(0, 100))
def test_l2_norm_homogeneity(c, seed):
    r = gauss_lobatto_rule(12)
    v = np.random.default_rng(seed).standard_normal(13)
    assert l2_norm(c * v, r) == pytest.approx(abs(c) * l2_norm(v, r), rel=1e-14, abs=1e-300)


def test_taming_factor_examples():
    assert taming_factor(0.3, 0.0) == 1.0
    assert taming_factor(0.01, 1e4) == pytest.approx(1 / 101, rel=1e-15)


@given(st.floats(1e-8, 1e3), st.floats(0, 1e8))
@settings(max_examples=300)
def test_tamed_drift_bound(tau, fnorm):
    drift = tau * fnorm * taming_factor(tau, fnorm**2)
    assert drift <= math.sqrt(tau) / 2 * (1 + 1e-12)
