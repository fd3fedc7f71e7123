"""Loading and validation of JSON run configurations.

A configuration has five sections: problem (bodies, dimension, period,
masses), potential (interaction constants), discretization (harmonics and
quadrature grid), solver (descent and multistart controls), and output
(directory and orbit-grouping tolerances). Unknown sections or keys are
rejected rather than ignored, and every rejection message names the violated
requirement. Optional keys are materialized with their defaults so the
resolved form embedded in outputs is complete.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import ConfigInvalid
from .potential import BLEND_HERMITE, BLEND_LINEAR, PotentialSpec
from .solver import SolveOptions, _require_valid_winding

__all__ = ["RunConfig", "load_config", "config_from_dict", "resolved_dict"]

_SECTION_KEYS = {
    "problem": ("n_bodies", "dim", "period", "masses"),
    "potential": ("a", "g", "alpha", "theta", "r1", "r2", "modulation_eps", "blend"),
    "discretization": ("harmonics", "n_t"),
    "solver": (
        "max_iters",
        "grad_tol",
        "seed",
        "winding_classes",
        "starts_per_class",
        "step_guard",
        "history_len",
    ),
    "output": ("directory", "action_rel_tol", "path_tol", "el_residual_tol"),
}
_REQUIRED_SECTIONS = ("problem", "potential", "output")


@dataclass(frozen=True)
class RunConfig:
    """A fully validated configuration with all defaults filled in."""

    spec: PotentialSpec
    dim: int
    harmonics: int
    n_t: int
    options: SolveOptions
    winding_classes: tuple
    starts_per_class: int
    output_dir: str
    action_rel_tol: float
    path_tol: float
    el_residual_tol: float


def _section(data: dict, name: str) -> dict:
    if name not in data:
        if name in _REQUIRED_SECTIONS:
            raise ConfigInvalid(f"missing required section {name!r}")
        return {}
    sec = data[name]
    if not isinstance(sec, dict):
        raise ConfigInvalid(f"section {name!r} must be an object")
    for key in sec:
        if key not in _SECTION_KEYS[name]:
            raise ConfigInvalid(f"unknown key {key!r} in section {name!r}")
    return sec


def _number(sec: dict, section: str, key: str, default=None) -> float:
    if key not in sec:
        if default is None:
            raise ConfigInvalid(f"missing required key {key!r} in section {section!r}")
        return default
    value = sec[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigInvalid(f"{section}.{key} must be a number, got {value!r}")
    return float(value)


def _integer(sec: dict, section: str, key: str, default=None, minimum=None) -> int:
    if key not in sec:
        if default is None:
            raise ConfigInvalid(f"missing required key {key!r} in section {section!r}")
        value = default
    else:
        value = sec[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigInvalid(f"{section}.{key} must be an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigInvalid(f"{section}.{key} must be >= {minimum}, got {value}")
    return value


def config_from_dict(data: dict) -> RunConfig:
    """Validate a parsed configuration object and fill in defaults."""
    if not isinstance(data, dict):
        raise ConfigInvalid("configuration root must be an object")
    for key in data:
        if key not in _SECTION_KEYS:
            raise ConfigInvalid(f"unknown section {key!r}")

    problem = _section(data, "problem")
    potential = _section(data, "potential")
    discretization = _section(data, "discretization")
    solver = _section(data, "solver")
    output = _section(data, "output")

    n_bodies = _integer(problem, "problem", "n_bodies", minimum=1)
    dim = _integer(problem, "problem", "dim", default=2, minimum=2)
    period = _number(problem, "problem", "period")
    masses = problem.get("masses")
    if masses is None:
        raise ConfigInvalid("missing required key 'masses' in section 'problem'")
    if not isinstance(masses, list) or not all(
        isinstance(m, (int, float)) and not isinstance(m, bool) for m in masses
    ):
        raise ConfigInvalid("problem.masses must be a list of numbers")
    if len(masses) != n_bodies:
        raise ConfigInvalid(
            f"problem.masses must list exactly n_bodies = {n_bodies} masses, got {len(masses)}"
        )

    blend = potential.get("blend", BLEND_HERMITE)
    if blend not in (BLEND_HERMITE, BLEND_LINEAR):
        raise ConfigInvalid(
            f"potential.blend must be {BLEND_HERMITE!r} or {BLEND_LINEAR!r}, got {blend!r}"
        )
    try:
        spec = PotentialSpec(
            masses=np.asarray(masses, dtype=float),
            a=_number(potential, "potential", "a"),
            g=_number(potential, "potential", "g"),
            alpha=_number(potential, "potential", "alpha"),
            theta=_number(potential, "potential", "theta"),
            r1=_number(potential, "potential", "r1"),
            r2=_number(potential, "potential", "r2"),
            modulation_eps=_number(potential, "potential", "modulation_eps", default=0.0),
            period=period,
            blend=blend,
        )
    except ValueError as exc:
        raise ConfigInvalid(str(exc)) from None

    harmonics = _integer(discretization, "discretization", "harmonics", default=8, minimum=1)
    n_t_floor = 4 * harmonics + 1
    n_t = _integer(
        discretization, "discretization", "n_t", default=4 * harmonics + 9, minimum=1
    )
    if n_t < n_t_floor:
        raise ConfigInvalid(
            f"discretization.n_t must be >= 4*harmonics + 1 = {n_t_floor} so the "
            f"quadrature resolves every retained harmonic; got {n_t}"
        )

    try:
        options = SolveOptions(
            max_iters=_integer(solver, "solver", "max_iters", default=500, minimum=1),
            grad_tol=_number(solver, "solver", "grad_tol", default=1e-9),
            history_len=_integer(solver, "solver", "history_len", default=10, minimum=1),
            seed=_integer(solver, "solver", "seed", default=0, minimum=0),
            step_guard=_number(solver, "solver", "step_guard", default=0.5),
        )
    except ValueError as exc:
        raise ConfigInvalid(str(exc)) from None

    winding = solver.get("winding_classes", [1])
    if not isinstance(winding, list) or not winding:
        raise ConfigInvalid("solver.winding_classes must be a non-empty list of odd integers")
    try:
        for w in winding:
            _require_valid_winding(w, harmonics)
    except ValueError as exc:
        raise ConfigInvalid(str(exc)) from None
    starts = _integer(solver, "solver", "starts_per_class", default=4, minimum=1)

    directory = output.get("directory")
    if not isinstance(directory, str) or not directory:
        raise ConfigInvalid("output.directory must be a non-empty string")
    action_rel_tol = _number(output, "output", "action_rel_tol", default=1e-6)
    path_tol = _number(output, "output", "path_tol", default=0.5)
    el_residual_tol = _number(output, "output", "el_residual_tol", default=1e-7)
    for name, value in (
        ("action_rel_tol", action_rel_tol),
        ("path_tol", path_tol),
        ("el_residual_tol", el_residual_tol),
    ):
        if not value > 0:
            raise ConfigInvalid(f"output.{name} must be positive, got {value}")

    return RunConfig(
        spec=spec,
        dim=dim,
        harmonics=harmonics,
        n_t=n_t,
        options=options,
        winding_classes=tuple(int(w) for w in winding),
        starts_per_class=starts,
        output_dir=directory,
        action_rel_tol=action_rel_tol,
        path_tol=path_tol,
        el_residual_tol=el_residual_tol,
    )


def load_config(path) -> RunConfig:
    """Read, parse, and validate a JSON configuration file."""
    try:
        with open(path, "r", encoding="utf-8") as handle:
            data = json.load(handle)
    except OSError as exc:
        raise ConfigInvalid(f"cannot read config file {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigInvalid(f"config file {path} is not valid JSON: {exc}") from None
    return config_from_dict(data)


def resolved_dict(cfg: RunConfig) -> dict:
    """The configuration with every default materialized, in canonical order."""
    spec = cfg.spec
    return {
        "problem": {
            "n_bodies": spec.n_bodies,
            "dim": cfg.dim,
            "period": spec.period,
            "masses": [float(m) for m in spec.masses],
        },
        "potential": {
            "a": spec.a,
            "g": spec.g,
            "alpha": spec.alpha,
            "theta": spec.theta,
            "r1": spec.r1,
            "r2": spec.r2,
            "modulation_eps": spec.modulation_eps,
            "blend": spec.blend,
        },
        "discretization": {"harmonics": cfg.harmonics, "n_t": cfg.n_t},
        "solver": {
            "max_iters": cfg.options.max_iters,
            "grad_tol": cfg.options.grad_tol,
            "seed": cfg.options.seed,
            "winding_classes": list(cfg.winding_classes),
            "starts_per_class": cfg.starts_per_class,
            "step_guard": cfg.options.step_guard,
            "history_len": cfg.options.history_len,
        },
        "output": {
            "directory": cfg.output_dir,
            "action_rel_tol": cfg.action_rel_tol,
            "path_tol": cfg.path_tol,
            "el_residual_tol": cfg.el_residual_tol,
        },
    }
