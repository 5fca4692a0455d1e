"""Sectioned key=value experiment configuration (INI syntax) and its validation.

Every problem is reported at once: :func:`parse_config` raises
:class:`ConfigError` carrying the full list of violations.
"""

from __future__ import annotations

import ast
import configparser
import math
import operator
from dataclasses import dataclass, field

from .dynamics import DIFFUSION_KINDS, DiffusionSpec, ReactionSpec, reaction_violation
from .noise import MODE_KINDS, QWienerSpec
from .operators import OperatorSpec
from .stepper import INITIAL_CONDITIONS, RunConfig

STUDY_KINDS = ("single", "spatial", "temporal", "stability")

SCHEMA = {
    "problem": {"dimension", "diffusivity", "reaction", "diffusion", "diffusion_c", "u0"},
    "noise": {"decay", "mode_kind", "J"},
    "discretization": {"N", "M", "T"},
    "study": {"kind", "axis", "K", "N_ref", "M_ref"},
    "output": {"csv", "svg", "seed"},
}


class ConfigError(ValueError):
    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("invalid configuration:\n" + "\n".join(f"  - {v}" for v in self.violations))


@dataclass
class StudySpec:
    kind: str = "single"
    axis: list = field(default_factory=list)
    K: int = 1
    N_ref: int | None = None
    M_ref: int | None = None


@dataclass
class ConfigFile:
    run: RunConfig
    study: StudySpec
    csv: str | None
    svg: str | None
    seed: int
    text: str = ""


_OPS = {
    ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
    ast.Div: operator.truediv, ast.Pow: operator.pow, ast.BitXor: operator.pow,
    ast.USub: operator.neg, ast.UAdd: operator.pos,
}


def eval_number(text: str) -> float:
    """Evaluate a plain arithmetic expression; ``pi`` and ``^`` (as power) are allowed."""

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.BinOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.operand))
        raise ValueError(f"unsupported expression {text!r}")

    try:
        return ev(ast.parse(text.strip(), mode="eval"))
    except (SyntaxError, ZeroDivisionError) as exc:
        raise ValueError(f"cannot evaluate {text!r}: {exc}") from exc


def _split(text: str) -> list[str]:
    return [p.strip() for p in text.replace(";", ",").split(",") if p.strip()]


def parse_config(text: str) -> ConfigFile:
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError([f"syntax: {exc}"]) from exc

    errors: list[str] = []
    for section in parser.sections():
        if section not in SCHEMA:
            errors.append(f"unknown section [{section}]")
            continue
        for key in parser[section]:
            if key not in SCHEMA[section]:
                errors.append(f"unknown key '{key}' in [{section}]")

    def get(section, key, default=None):
        if parser.has_section(section) and key in parser[section]:
            return parser[section][key]
        return default

    def number(section, key, default, cast=float):
        raw = get(section, key)
        if raw is None:
            return default
        try:
            value = eval_number(raw)
        except ValueError as exc:
            errors.append(f"[{section}] {key}: {exc}")
            return default
        if cast is int:
            if value != int(value):
                errors.append(f"[{section}] {key}: expected an integer, got {raw!r}")
                return default
            return int(value)
        return value

    def choice(section, key, default, allowed):
        value = get(section, key, default)
        if value not in allowed:
            errors.append(f"[{section}] {key}: {value!r} is not one of {', '.join(allowed)}")
            return default
        return value

    dim = number("problem", "dimension", 1, int)
    if dim not in (1, 2):
        errors.append(f"[problem] dimension: must be 1 or 2, got {dim}")
        dim = 1
    nu = number("problem", "diffusivity", 1.0 / math.pi**2 if dim == 1 else 0.5)
    if not nu > 0:
        errors.append(f"[problem] diffusivity: must be positive, got {nu}")
        nu = 1.0

    reaction = ReactionSpec.allen_cahn()
    raw = get("problem", "reaction")
    if raw is not None:
        try:
            coeffs = [eval_number(p) for p in _split(raw)] or [0.0]
        except ValueError as exc:
            errors.append(f"[problem] reaction: {exc}")
        else:
            reason = reaction_violation(coeffs)
            if reason:
                errors.append(f"[problem] reaction: {reason}")
            else:
                reaction = ReactionSpec(tuple(coeffs))

    dkind = choice("problem", "diffusion", "constant_identity", DIFFUSION_KINDS)
    diffusion = DiffusionSpec(dkind, number("problem", "diffusion_c", 1.0))
    u0 = choice("problem", "u0", "sine", INITIAL_CONDITIONS)

    decay = number("noise", "decay", 5.001 if dim == 1 else 6.0)
    if not decay > 0:
        errors.append(f"[noise] decay: must be positive, got {decay}")
        decay = 5.001
    mode_kind = choice("noise", "mode_kind", "sine" if dim == 1 else "product_sine_basis", MODE_KINDS)
    if mode_kind == "product_sine_basis" and dim != 2:
        errors.append("[noise] mode_kind: 'product_sine_basis' needs dimension 2")
        mode_kind = "sine"
    J = number("noise", "J", 100 if dim == 1 else 10, int)
    if J < 0:
        errors.append(f"[noise] J: must be >= 0, got {J}")
        J = 0

    N = number("discretization", "N", 16, int)
    if N < 3:
        errors.append(f"[discretization] N: must be >= 3, got {N}")
        N = 3
    M = number("discretization", "M", 100, int)
    if M < 1:
        errors.append(f"[discretization] M: must be >= 1, got {M}")
        M = 1
    T = number("discretization", "T", 1.0)
    if not T > 0:
        errors.append(f"[discretization] T: must be positive, got {T}")
        T = 1.0

    seed = number("output", "seed", 0, int)

    kind = choice("study", "kind", "single", STUDY_KINDS)
    K = number("study", "K", 1, int)
    if K < 1:
        errors.append(f"[study] K: must be >= 1, got {K}")
        K = 1
    N_ref = number("study", "N_ref", None, int)
    M_ref = number("study", "M_ref", None, int)
    axis: list = []
    raw_axis = get("study", "axis")
    if raw_axis is not None:
        try:
            axis = [eval_number(p) for p in _split(raw_axis)]
        except ValueError as exc:
            errors.append(f"[study] axis: {exc}")
    if kind in ("spatial", "temporal"):
        if any(a != int(a) for a in axis):
            errors.append("[study] axis: spatial and temporal axes take integers")
        axis = [int(a) for a in axis]
        if len(axis) < 3:
            errors.append(f"[study] axis: a {kind} study needs at least 3 values for a rate fit")
    if kind == "spatial":
        if N_ref is None:
            errors.append("[study] N_ref: required for a spatial study")
        elif axis and N_ref <= max(axis):
            errors.append(f"[study] N_ref: {N_ref} must exceed every N in axis")
        if axis and min(axis) < 3:
            errors.append("[study] axis: every N must be >= 3")
    if kind == "temporal":
        if M_ref is None:
            errors.append("[study] M_ref: required for a temporal study")
        else:
            bad = [m for m in axis if m < 1 or M_ref % m]
            if bad:
                errors.append(f"[study] axis: M values {bad} do not divide M_ref={M_ref}")
    if kind == "stability":
        if not axis or any(not a > 0 for a in axis):
            errors.append("[study] axis: a stability study needs positive time steps")

    if errors:
        raise ConfigError(errors)

    run = RunConfig(
        operator=OperatorSpec(dim, nu),
        reaction=reaction,
        diffusion=diffusion,
        noise=QWienerSpec(dim, J, decay, mode_kind),
        N=N,
        M=M,
        T=T,
        u0=u0,
        master_seed=seed,
    )
    study = StudySpec(kind, axis, K, N_ref, M_ref)
    return ConfigFile(run, study, get("output", "csv"), get("output", "svg"), seed, text)
