"""Time-modulated strong-force pair potentials with a sub-quadratic tail.

Each ordered pair (i, j) interacts through V_ij(t, xi) = mu(t) m_i m_j w(|xi|)
where the unit-mass radial profile w is

    w(r) = -a r^{-alpha}          for r <  r1   (attractive, strong force)
    w(r) = cubic Hermite blend    for r1 <= r < r2
    w(r) = g r^{theta}            for r >= r2   (growth exponent theta < 2)

and mu(t) = 1 + eps cos(4 pi t / T) is a half-period time modulation, so
V_ij(t + T/2, -xi) = V_ij(t, xi) holds for every pair. The Hermite blend
matches value and one-sided slope at both ends, making the profile C^1 on
(0, inf). A C^0-only linear blend is available as a verification hook.

The inner branch keeps the classical strong-force barrier: for alpha >= 2
there is a witness function U with U(r) -> -inf as r -> 0+ and
-V_ij(t, r) >= |U'(r)|^2 below r1, with equality at the modulation minimum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    CollisionSample,
    NonPositiveSeparation,
    OutOfWitnessRange,
    SelfPair,
    ShapeMismatch,
)

__all__ = [
    "PotentialSpec",
    "StrongForceWitness",
    "time_modulation",
    "pair_potential",
    "pair_force",
    "total_potential",
    "grid_potential",
    "grid_potential_hessian",
    "strong_force_witness",
    "strong_force_margin",
]

BLEND_HERMITE = "hermite"
BLEND_LINEAR = "linear"  # C^0 only; exists so the ledger's C^1 check has teeth


@dataclass(frozen=True)
class PotentialSpec:
    """Parameters of the interaction and the ambient problem.

    Attributes:
        masses: positive body masses, length N.
        a: inner coefficient, > 0.
        g: tail coefficient, > 0.
        alpha: inner decay exponent, >= 2 (strong force).
        theta: tail growth exponent, < 2.
        r1, r2: blend window, 0 < r1 < r2.
        modulation_eps: time modulation amplitude eps in [0, 1).
        period: period T of the modulation (and of the loops), > 0.
        blend: "hermite" (C^1, default) or "linear" (C^0 verification hook).
    """

    masses: np.ndarray
    a: float
    g: float
    alpha: float
    theta: float
    r1: float
    r2: float
    modulation_eps: float
    period: float
    blend: str = BLEND_HERMITE

    def __post_init__(self):
        masses = np.asarray(self.masses, dtype=float)
        if masses.ndim != 1 or masses.size < 1:
            raise ValueError("masses must be a 1-d array with at least one entry")
        if not np.all(masses > 0):
            raise ValueError("masses must all be positive")
        if not self.a > 0:
            raise ValueError(f"inner coefficient a must be positive, got {self.a}")
        if not self.g > 0:
            raise ValueError(f"tail coefficient g must be positive, got {self.g}")
        if not self.alpha >= 2:
            raise ValueError(f"inner exponent alpha must satisfy alpha >= 2, got {self.alpha}")
        if not self.theta < 2:
            raise ValueError(f"tail exponent theta must satisfy theta < 2, got {self.theta}")
        if not (0 < self.r1 < self.r2):
            raise ValueError(f"blend window needs 0 < r1 < r2, got r1={self.r1}, r2={self.r2}")
        if not (0 <= self.modulation_eps < 1):
            raise ValueError(
                f"modulation_eps must lie in [0, 1), got {self.modulation_eps}"
            )
        if not self.period > 0:
            raise ValueError(f"period must be positive, got {self.period}")
        if self.blend not in (BLEND_HERMITE, BLEND_LINEAR):
            raise ValueError(f"unknown blend {self.blend!r}")
        masses = masses.copy()
        masses.flags.writeable = False
        object.__setattr__(self, "masses", masses)

    @property
    def n_bodies(self) -> int:
        return self.masses.size


def time_modulation(spec: PotentialSpec, t):
    """mu(t) = 1 + eps cos(4 pi t / T); has period T/2, so mu(t + T/2) = mu(t)."""
    t = np.asarray(t)
    return 1.0 + spec.modulation_eps * np.cos((4.0 * np.pi / spec.period) * t)


def _blend_data(spec: PotentialSpec):
    """Unit-mass endpoint values and one-sided slopes of the blend window."""
    v0 = -spec.a * spec.r1 ** (-spec.alpha)
    d0 = spec.alpha * spec.a * spec.r1 ** (-spec.alpha - 1.0)
    v1 = spec.g * spec.r2**spec.theta
    d1 = spec.theta * spec.g * spec.r2 ** (spec.theta - 1.0)
    return v0, d0, v1, d1


def _blend_values(spec: PotentialSpec, r):
    v0, d0, v1, d1 = _blend_data(spec)
    h = spec.r2 - spec.r1
    s = (r - spec.r1) / h
    if spec.blend == BLEND_LINEAR:
        return v0 + (v1 - v0) * s
    h00 = (2.0 * s - 3.0) * s * s + 1.0
    h10 = ((s - 2.0) * s + 1.0) * s
    h01 = (3.0 - 2.0 * s) * s * s
    h11 = (s - 1.0) * s * s
    return h00 * v0 + h10 * (h * d0) + h01 * v1 + h11 * (h * d1)


def _blend_derivs(spec: PotentialSpec, r):
    v0, d0, v1, d1 = _blend_data(spec)
    h = spec.r2 - spec.r1
    s = (r - spec.r1) / h
    if spec.blend == BLEND_LINEAR:
        return (v1 - v0) / h + 0.0 * s
    dh00 = 6.0 * s * (s - 1.0)
    dh10 = (3.0 * s - 4.0) * s + 1.0
    dh01 = 6.0 * s * (1.0 - s)
    dh11 = (3.0 * s - 2.0) * s
    return (dh00 * v0 + dh01 * v1) / h + dh10 * d0 + dh11 * d1


def _profile_values(spec: PotentialSpec, r: np.ndarray) -> np.ndarray:
    """Unit-mass radial profile w(r) on an array of positive separations."""
    r = np.asarray(r)
    out = np.empty_like(r)
    inner = r < spec.r1
    tail = r >= spec.r2
    mid = ~(inner | tail)
    if inner.any():
        out[inner] = -spec.a * r[inner] ** (-spec.alpha)
    if mid.any():
        out[mid] = _blend_values(spec, r[mid])
    if tail.any():
        out[tail] = spec.g * r[tail] ** spec.theta
    return out


def _profile_derivs(spec: PotentialSpec, r: np.ndarray) -> np.ndarray:
    """Radial derivative w'(r) on an array of positive separations."""
    r = np.asarray(r)
    out = np.empty_like(r)
    inner = r < spec.r1
    tail = r >= spec.r2
    mid = ~(inner | tail)
    if inner.any():
        out[inner] = spec.alpha * spec.a * r[inner] ** (-spec.alpha - 1.0)
    if mid.any():
        out[mid] = _blend_derivs(spec, r[mid])
    if tail.any():
        out[tail] = spec.theta * spec.g * r[tail] ** (spec.theta - 1.0)
    return out


def _blend_second_derivs(spec: PotentialSpec, r):
    v0, d0, v1, d1 = _blend_data(spec)
    h = spec.r2 - spec.r1
    s = (r - spec.r1) / h
    if spec.blend == BLEND_LINEAR:
        return 0.0 * s
    d2h00 = 12.0 * s - 6.0
    d2h10 = 6.0 * s - 4.0
    d2h01 = 6.0 - 12.0 * s
    d2h11 = 6.0 * s - 2.0
    return (d2h00 * v0 + d2h01 * v1) / (h * h) + (d2h10 * d0 + d2h11 * d1) / h


def _profile_second_derivs(spec: PotentialSpec, r: np.ndarray) -> np.ndarray:
    """Second radial derivative w''(r) on an array of positive separations."""
    r = np.asarray(r)
    out = np.empty_like(r)
    inner = r < spec.r1
    tail = r >= spec.r2
    mid = ~(inner | tail)
    if inner.any():
        out[inner] = -spec.alpha * (spec.alpha + 1.0) * spec.a * r[inner] ** (-spec.alpha - 2.0)
    if mid.any():
        out[mid] = _blend_second_derivs(spec, r[mid])
    if tail.any():
        out[tail] = spec.theta * (spec.theta - 1.0) * spec.g * r[tail] ** (spec.theta - 2.0)
    return out


def _check_pair(spec: PotentialSpec, i: int, j: int):
    n = spec.n_bodies
    if not (0 <= i < n and 0 <= j < n):
        raise ShapeMismatch(f"pair ({i}, {j}) out of range for {n} bodies")
    if i == j:
        raise SelfPair(f"pair potential undefined for i == j == {i}")


def pair_potential(spec: PotentialSpec, t: float, i: int, j: int, r: float) -> float:
    """V_ij(t, r) = mu(t) m_i m_j w(r) for separation r > 0."""
    _check_pair(spec, i, j)
    if not r > 0:
        raise NonPositiveSeparation(f"separation must be positive, got {r}")
    w = _profile_values(spec, np.asarray([float(r)]))[0]
    return float(time_modulation(spec, t) * spec.masses[i] * spec.masses[j] * w)


def pair_force(spec: PotentialSpec, t: float, i: int, j: int, xi: np.ndarray) -> np.ndarray:
    """Gradient of V_ij with respect to the separation vector xi = x_i - x_j.

    Radial chain rule: grad = mu(t) m_i m_j w'(|xi|) xi / |xi|.
    """
    _check_pair(spec, i, j)
    xi = np.asarray(xi, dtype=float)
    r = float(np.linalg.norm(xi))
    if not r > 0:
        raise NonPositiveSeparation("separation vector must be nonzero")
    wp = _profile_derivs(spec, np.asarray([r]))[0]
    return float(time_modulation(spec, t)) * spec.masses[i] * spec.masses[j] * wp * (xi / r)


def total_potential(spec: PotentialSpec, t: float, positions: np.ndarray) -> float:
    """V(t, x) = sum_{i<j} V_ij(t, x_i - x_j) for one configuration (N, k)."""
    positions = np.asarray(positions, dtype=float)
    if positions.ndim != 2 or positions.shape[0] != spec.n_bodies:
        raise ShapeMismatch(
            f"positions shape {positions.shape} does not match (N={spec.n_bodies}, k)"
        )
    values, _, _ = grid_potential(
        spec, np.asarray([float(t)]), positions[None, :, :], need_forces=False
    )
    return float(values[0])


def grid_potential(
    spec: PotentialSpec,
    times: np.ndarray,
    positions: np.ndarray,
    need_forces: bool = False,
):
    """Vectorized V(t_j, x(t_j)) over a whole grid, optionally with body forces.

    Args:
        times: (n_t,) evaluation times.
        positions: (n_t, N, k) body positions.
        need_forces: also return grad_{x_i} V of shape (n_t, N, k).

    Returns:
        (values, forces_or_None, min_separation). Raises CollisionSample if two
        bodies coincide at any grid node. min_separation is +inf for N = 1.
    """
    n = spec.n_bodies
    if positions.shape[1] != n:
        raise ShapeMismatch(f"positions have {positions.shape[1]} bodies, spec has {n}")
    if n == 1:
        zeros = np.zeros(positions.shape[0], dtype=positions.dtype)
        forces = np.zeros_like(positions) if need_forces else None
        return zeros, forces, float("inf")

    diff = positions[:, :, None, :] - positions[:, None, :, :]  # (n_t, N, N, k)
    dist = np.sqrt((diff**2).sum(axis=-1))
    eye = np.eye(n, dtype=bool)
    off = ~eye
    min_sep = float(dist[:, off].min())
    if min_sep == 0.0:
        raise CollisionSample("two bodies coincide at a quadrature node")
    # Diagonal placeholder keeps the profile evaluation well-defined; the zeroed
    # mass-product matrix removes those entries from every sum.
    dist[:, eye] = 1.0
    mass_prod = np.outer(spec.masses, spec.masses)
    mass_prod[eye] = 0.0

    w = _profile_values(spec, dist)
    mu = time_modulation(spec, times)
    values = 0.5 * mu * np.einsum("pq,jpq->j", mass_prod, w)

    forces = None
    if need_forces:
        wp = _profile_derivs(spec, dist)
        radial = mass_prod[None, :, :] * wp / dist  # (n_t, N, N)
        forces = mu[:, None, None] * np.einsum("jpq,jpqd->jpd", radial, diff)
    return values, forces, min_sep


def grid_potential_hessian(spec: PotentialSpec, times: np.ndarray, positions: np.ndarray):
    """Position-space Hessian of V at each grid node, shape (n_t, N, k, N, k).

    Per interacting pair the block is mu m_i m_q (w'' u u^T + (w'/r)(I - u u^T))
    with u the unit separation vector; it enters the (i, i) diagonal with +1
    and the (i, q) off-diagonal with -1.
    """
    n = spec.n_bodies
    n_t, _, k = positions.shape
    if positions.shape[1] != n:
        raise ShapeMismatch(f"positions have {positions.shape[1]} bodies, spec has {n}")
    if n == 1:
        return np.zeros((n_t, 1, k, 1, k), dtype=positions.dtype)

    diff = positions[:, :, None, :] - positions[:, None, :, :]
    dist = np.sqrt((diff**2).sum(axis=-1))
    eye = np.eye(n, dtype=bool)
    if (dist[:, ~eye] == 0.0).any():
        raise CollisionSample("two bodies coincide at a quadrature node")
    dist[:, eye] = 1.0
    mass_prod = np.outer(spec.masses, spec.masses)
    mass_prod[eye] = 0.0

    unit = diff / dist[..., None]
    wp = _profile_derivs(spec, dist)
    wpp = _profile_second_derivs(spec, dist)
    mu = time_modulation(spec, times)
    aniso = mu[:, None, None] * mass_prod[None] * (wpp - wp / dist)  # u u^T weight
    iso = mu[:, None, None] * mass_prod[None] * (wp / dist)  # identity weight
    blocks = aniso[..., None, None] * np.einsum("jpqd,jpqe->jpqde", unit, unit)
    blocks += iso[..., None, None] * np.eye(k, dtype=positions.dtype)[None, None, None]

    hess = -np.transpose(blocks, (0, 1, 3, 2, 4)).copy()  # (j, i, d, q, e), pair term
    diag = blocks.sum(axis=2)  # (j, i, d, e)
    idx = np.arange(n)
    hess[:, idx, :, idx, :] += np.transpose(diag, (1, 0, 2, 3))
    return hess


@dataclass(frozen=True)
class StrongForceWitness:
    """Barrier witness U for the inner branch, valid on 0 < r < r1.

    For alpha = 2 the witness is logarithmic, U(r) = c ln r; for alpha > 2 it
    is the power form U(r) = -c r^{-beta} with beta = (alpha - 2)/2. In both
    cases U(r) -> -inf as r -> 0+ and |U'(r)|^2 equals the modulation minimum
    of -V_ij on the inner branch, so the strong-force inequality is tight.
    """

    form: str  # "log" or "power"
    c: float
    beta: float
    r1: float

    def value(self, r: float) -> float:
        if not 0 < r < self.r1:
            raise OutOfWitnessRange(f"witness valid on (0, {self.r1}), got r={r}")
        if self.form == "log":
            return self.c * float(np.log(r))
        return -self.c * r ** (-self.beta)

    def grad_norm_sq(self, r: float) -> float:
        """|U'(r)|^2, computed from the witness's own constants."""
        if not 0 < r < self.r1:
            raise OutOfWitnessRange(f"witness valid on (0, {self.r1}), got r={r}")
        if self.form == "log":
            return self.c**2 / r**2
        return (self.c * self.beta) ** 2 * r ** (-2.0 * self.beta - 2.0)


def strong_force_witness(spec: PotentialSpec, i: int, j: int) -> StrongForceWitness:
    """Witness for pair (i, j), rescaled by sqrt(1 - eps) to absorb modulation."""
    _check_pair(spec, i, j)
    scale = float(
        np.sqrt((1.0 - spec.modulation_eps) * spec.a * spec.masses[i] * spec.masses[j])
    )
    if spec.alpha == 2.0:
        return StrongForceWitness(form="log", c=scale, beta=0.0, r1=spec.r1)
    beta = 0.5 * (spec.alpha - 2.0)
    return StrongForceWitness(form="power", c=scale / beta, beta=beta, r1=spec.r1)


def strong_force_margin(spec: PotentialSpec, i: int, j: int, r: float) -> float:
    """min_t(-V_ij(t, r)) - |U'(r)|^2 on the inner branch; >= 0, tight at eps = 0.

    The modulation minimum min_t mu(t) = 1 - eps is attained (at t = T/4), so
    the minimum over t is exact rather than sampled.
    """
    _check_pair(spec, i, j)
    if not r > 0:
        raise NonPositiveSeparation(f"separation must be positive, got {r}")
    if r >= spec.r1:
        raise OutOfWitnessRange(f"margin defined below r1={spec.r1}, got r={r}")
    witness = strong_force_witness(spec, i, j)
    w = _profile_values(spec, np.asarray([float(r)]))[0]
    neg_v_min = -(1.0 - spec.modulation_eps) * spec.masses[i] * spec.masses[j] * w
    return float(neg_v_min - witness.grad_norm_sq(r))
