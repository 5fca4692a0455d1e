"""Reaction polynomial f, noise coefficient g, and the L2 norm used by the taming denominator."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .basis import QuadratureRule


class InvalidReaction(ValueError):
    pass


@dataclass(frozen=True)
class ReactionSpec:
    """f(u) = sum_j a_j u^j, coefficients in ascending order a_0..a_P.

    The all-zero polynomial is accepted as "no reaction".  Otherwise the degree
    P must be odd with a_P < 0.
    """

    coefficients: tuple[float, ...] = (0.0, 1.0, 0.0, -1.0)

    def __post_init__(self):
        coeffs = tuple(float(a) for a in self.coefficients)
        # trailing zeros do not change the polynomial
        while len(coeffs) > 1 and coeffs[-1] == 0.0:
            coeffs = coeffs[:-1]
        object.__setattr__(self, "coefficients", coeffs)
        reason = reaction_violation(coeffs)
        if reason:
            raise InvalidReaction(reason)

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    @property
    def is_zero(self) -> bool:
        return all(a == 0.0 for a in self.coefficients)

    @classmethod
    def allen_cahn(cls) -> "ReactionSpec":
        return cls((0.0, 1.0, 0.0, -1.0))

    @classmethod
    def zero(cls) -> "ReactionSpec":
        return cls((0.0,))

    def coercivity_constant(self) -> float:
        """K with u f(u) <= K u^2 pointwise; (f(u), u) <= K ||u||^2 follows."""
        if self.is_zero:
            return 0.0
        a = np.asarray(self.coefficients, dtype=float)
        if a[0] == 0.0:
            # f(u)/u is the polynomial p(u) = a_1 + a_2 u + ...; its sup sits at a critical point
            p = np.polynomial.Polynomial(a[1:])
            crit = p.deriv().roots() if p.degree() > 0 else np.array([0.0])
            crit = np.real(crit[np.abs(np.imag(crit)) <= 1e-12])
            vals = p(np.concatenate([crit, [0.0]]))
            if p.degree() > 0 and (p.degree() % 2 == 1 or p.coef[-1] > 0):
                return float("inf")
            return float(max(np.max(vals), 0.0))
        # a_0 != 0: sup of f(u)/u on a wide grid (the ratio is unbounded near 0, reported as such)
        u = np.concatenate([-np.logspace(-6, 2, 4001), np.logspace(-6, 2, 4001)])
        with np.errstate(over="ignore"):
            ratio = f_eval(self, u) / u
        return float(max(np.max(ratio), 0.0))


def reaction_violation(coefficients) -> str | None:
    coeffs = list(coefficients)
    while len(coeffs) > 1 and coeffs[-1] == 0.0:
        coeffs.pop()
    if not coeffs or all(a == 0.0 for a in coeffs):
        return None
    P = len(coeffs) - 1
    if P % 2 == 0:
        return f"reaction degree {P} is even; Assumption 2.2 needs an odd degree with negative leading coefficient"
    if coeffs[-1] >= 0:
        return (f"reaction leading coefficient a_{P}={coeffs[-1]} is not negative; "
                "Assumption 2.2 needs an odd degree with negative leading coefficient")
    return None


def validate_reaction(spec_or_coeffs) -> None:
    """Raise :class:`InvalidReaction` unless the polynomial has odd degree and negative leading coefficient."""
    coeffs = getattr(spec_or_coeffs, "coefficients", spec_or_coeffs)
    reason = reaction_violation(coeffs)
    if reason:
        raise InvalidReaction(reason)


def f_eval(spec: ReactionSpec, u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    out = np.full_like(u, spec.coefficients[-1])
    for a in spec.coefficients[-2::-1]:
        out = out * u + a
    return out


DIFFUSION_KINDS = ("constant_identity", "linear", "sine", "rational")


@dataclass(frozen=True)
class DiffusionSpec:
    """Noise coefficient g from a fixed catalog.

    constant_identity  g(u) = 1          (additive noise)
    linear             g(u) = c u
    sine               g(u) = sin(u)
    rational           g(u) = (1 - u^2) / (1 + u^2)

    All entries are globally Lipschitz with at most linear growth.
    """

    kind: str = "constant_identity"
    c: float = 1.0

    def __post_init__(self):
        if self.kind not in DIFFUSION_KINDS:
            raise ValueError(f"unknown diffusion kind {self.kind!r}; expected one of {DIFFUSION_KINDS}")

    @property
    def is_zero(self) -> bool:
        return self.kind == "linear" and self.c == 0.0

    @property
    def lipschitz_constant(self) -> float:
        """Constant playing the role of c in the stability bound: max of Lipschitz and growth constants."""
        if self.kind == "linear":
            return abs(self.c)
        if self.kind == "rational":
            # sup |d/du (1-u^2)/(1+u^2)| = 4u/(1+u^2)^2 at u = 1/sqrt(3)
            return 9.0 / (4.0 * math.sqrt(3.0))
        return 1.0


def g_eval(spec: DiffusionSpec, u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if spec.kind == "constant_identity":
        return np.ones_like(u)
    if spec.kind == "linear":
        return spec.c * u
    if spec.kind == "sine":
        return np.sin(u)
    u2 = u * u
    return (1.0 - u2) / (1.0 + u2)


def l2_norm_sq(values, rule: QuadratureRule, dim: int = 1) -> np.ndarray:
    """Squared L2 norm by quadrature over the trailing ``dim`` axes (batched)."""
    v2 = np.square(values)
    w = rule.weights
    if dim == 1:
        return v2 @ w
    return (v2 @ w) @ w


def l2_norm(values, rule: QuadratureRule, dim: int = 1):
    out = np.sqrt(l2_norm_sq(values, rule, dim))
    return float(out) if np.ndim(out) == 0 else out


def taming_factor(tau: float, f_norm_sq):
    """1 / (1 + tau ||f||^2)."""
    return 1.0 / (1.0 + tau * np.asarray(f_norm_sq, dtype=float))
