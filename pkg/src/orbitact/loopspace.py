"""Antiperiodic loops on a truncated odd-harmonic Fourier basis.

Every body traces

    x_i(t) = sum_{m odd} a_{i,m} cos(2 pi m t / T) + b_{i,m} sin(2 pi m t / T)

with m ranging over {1, 3, ..., 2M-1}. Because only odd harmonics appear,
x_i(t + T/2) = -x_i(t) holds identically and each component has zero mean
over a period, so membership in the antiperiodic loop space is a property
of the representation rather than a constraint to enforce. Orthogonality of
the basis turns kinetic energy, L^2 / H^1 norms, and the Wirtinger
comparison into closed sums over coefficients.

Coefficient layout is body-major, harmonic-minor, cosine before sine:
``coefficients[i, m_idx, 0, :]`` is the cosine vector of body ``i`` at
harmonic ``2*m_idx + 1`` and ``[..., 1, :]`` the sine vector. Flattening is
C-order of that array, which fixes the gradient layout used everywhere else.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GridTooCoarse, ShapeMismatch, SingleBody

__all__ = [
    "LoopConfiguration",
    "SampledPath",
    "default_grid_size",
    "sample_trajectory",
    "sample_acceleration",
    "evaluate_positions",
    "kinetic_energy",
    "harmonic_energies",
    "min_pairwise_distance",
    "h1_distance",
    "shift_loop",
]


def default_grid_size(harmonics: int) -> int:
    """Default number of uniform quadrature nodes for M retained harmonics.

    4M+1 nodes make the periodic trapezoid rule exact for products of two
    retained basis functions (degree up to 2(2M-1) = 4M-2); the +9 adds slack
    for the non-polynomial potential integrand.
    """
    return 4 * harmonics + 9


@dataclass(frozen=True)
class LoopConfiguration:
    """Fourier coefficients of one antiperiodic loop per body.

    Attributes:
        n_bodies: number of bodies N.
        dim: spatial dimension k (>= 1; solvers require >= 2).
        period: loop period T > 0.
        coefficients: array of shape (N, M, 2, k), immutable after init.
    """

    n_bodies: int
    dim: int
    period: float
    coefficients: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.asarray(self.coefficients)
        if not np.issubdtype(c.dtype, np.floating):
            c = c.astype(float)
        if c.ndim != 4 or c.shape[0] != self.n_bodies or c.shape[2] != 2 or c.shape[3] != self.dim:
            raise ShapeMismatch(
                f"coefficients shape {c.shape} does not match (N={self.n_bodies}, M, 2, k={self.dim})"
            )
        if c.shape[1] < 1:
            raise ShapeMismatch("at least one harmonic is required")
        if self.n_bodies < 1 or self.dim < 1:
            raise ShapeMismatch("n_bodies and dim must be positive")
        if not self.period > 0:
            raise ShapeMismatch(f"period must be positive, got {self.period}")
        if not np.all(np.isfinite(c)):
            raise ShapeMismatch("coefficients must be finite")
        c = c.copy()
        c.flags.writeable = False
        object.__setattr__(self, "coefficients", c)

    @property
    def harmonics(self) -> int:
        """Number of retained odd harmonics M."""
        return self.coefficients.shape[1]

    @property
    def odd_orders(self) -> np.ndarray:
        """The odd harmonic orders (1, 3, ..., 2M-1)."""
        return np.arange(1, 2 * self.harmonics, 2)

    def angular_frequencies(self) -> np.ndarray:
        """omega_m = 2 pi m / T for each retained harmonic."""
        return (2.0 * np.pi / self.period) * self.odd_orders.astype(self.coefficients.dtype)

    @classmethod
    def zeros(cls, n_bodies: int, dim: int, period: float, harmonics: int) -> "LoopConfiguration":
        return cls(n_bodies, dim, period, np.zeros((n_bodies, harmonics, 2, dim)))

    @classmethod
    def from_flat(
        cls, flat: np.ndarray, n_bodies: int, dim: int, period: float, harmonics: int
    ) -> "LoopConfiguration":
        flat = np.asarray(flat)
        expected = n_bodies * harmonics * 2 * dim
        if flat.size != expected:
            raise ShapeMismatch(f"flat vector has {flat.size} entries, expected {expected}")
        return cls(n_bodies, dim, period, flat.reshape(n_bodies, harmonics, 2, dim))

    def flat(self) -> np.ndarray:
        """Coefficients flattened body-major, harmonic-minor, cosine before sine."""
        return self.coefficients.reshape(-1).copy()

    def with_flat(self, flat: np.ndarray) -> "LoopConfiguration":
        return LoopConfiguration.from_flat(flat, self.n_bodies, self.dim, self.period, self.harmonics)


@dataclass(frozen=True)
class SampledPath:
    """Positions and velocities of all bodies on a uniform time grid."""

    times: np.ndarray
    positions: np.ndarray  # (n_t, N, k)
    velocities: np.ndarray  # (n_t, N, k)

    def __post_init__(self):
        for name in ("times", "positions", "velocities"):
            arr = np.asarray(getattr(self, name))
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def n_times(self) -> int:
        return self.times.shape[0]

    @property
    def n_bodies(self) -> int:
        return self.positions.shape[1]


def _basis(loop: LoopConfiguration, n_t: int):
    """Cosine/sine basis matrices of shape (M, n_t) on the uniform grid."""
    dtype = loop.coefficients.dtype
    t = np.arange(n_t, dtype=dtype) * (loop.period / n_t)
    angles = np.outer(loop.angular_frequencies(), t)
    return t, np.cos(angles), np.sin(angles)


def sample_trajectory(loop: LoopConfiguration, n_t: int | None = None) -> SampledPath:
    """Evaluate positions and velocities at n_t uniform times over [0, T).

    Raises GridTooCoarse when n_t < 4M + 1, the minimum for the grid to
    integrate products of retained harmonics exactly.
    """
    if n_t is None:
        n_t = default_grid_size(loop.harmonics)
    if n_t < 4 * loop.harmonics + 1:
        raise GridTooCoarse(f"n_t={n_t} < 4M+1={4 * loop.harmonics + 1} for M={loop.harmonics}")
    t, cos_b, sin_b = _basis(loop, n_t)
    a = loop.coefficients[:, :, 0, :]
    b = loop.coefficients[:, :, 1, :]
    omega = loop.angular_frequencies()
    pos = np.einsum("imd,mj->jid", a, cos_b) + np.einsum("imd,mj->jid", b, sin_b)
    vel = np.einsum("imd,mj->jid", b * omega[None, :, None], cos_b) - np.einsum(
        "imd,mj->jid", a * omega[None, :, None], sin_b
    )
    return SampledPath(times=t, positions=pos, velocities=vel)


def sample_acceleration(loop: LoopConfiguration, n_t: int | None = None) -> np.ndarray:
    """Second time derivative on the same grid as :func:`sample_trajectory`."""
    if n_t is None:
        n_t = default_grid_size(loop.harmonics)
    if n_t < 4 * loop.harmonics + 1:
        raise GridTooCoarse(f"n_t={n_t} < 4M+1={4 * loop.harmonics + 1} for M={loop.harmonics}")
    _, cos_b, sin_b = _basis(loop, n_t)
    omega_sq = loop.angular_frequencies() ** 2
    a = loop.coefficients[:, :, 0, :] * omega_sq[None, :, None]
    b = loop.coefficients[:, :, 1, :] * omega_sq[None, :, None]
    return -(np.einsum("imd,mj->jid", a, cos_b) + np.einsum("imd,mj->jid", b, sin_b))


def evaluate_positions(loop: LoopConfiguration, times: np.ndarray) -> np.ndarray:
    """Positions at arbitrary times, shape (len(times), N, k).

    Unlike :func:`sample_trajectory` this places no lower bound on the number
    of samples; it is meant for display and export, not quadrature.
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    angles = np.outer(loop.angular_frequencies(), times)
    cos_b, sin_b = np.cos(angles), np.sin(angles)
    a = loop.coefficients[:, :, 0, :]
    b = loop.coefficients[:, :, 1, :]
    return np.einsum("imd,mj->jid", a, cos_b) + np.einsum("imd,mj->jid", b, sin_b)


def harmonic_energies(loop: LoopConfiguration) -> np.ndarray:
    """|a_{i,m}|^2 + |b_{i,m}|^2 per body and harmonic, shape (N, M)."""
    return (loop.coefficients**2).sum(axis=(2, 3))


def kinetic_energy(loop: LoopConfiguration, masses: np.ndarray) -> float:
    """Total kinetic part sum_i (m_i/2) int_0^T |xdot_i|^2 dt, in closed form.

    Orthogonality gives int |xdot_i|^2 = (T/2) sum_m omega_m^2 (|a|^2+|b|^2),
    so the result is exact for the truncated series (no quadrature).
    """
    masses = np.asarray(masses, dtype=float)
    if masses.shape != (loop.n_bodies,):
        raise ShapeMismatch(f"masses shape {masses.shape} != ({loop.n_bodies},)")
    energies = harmonic_energies(loop)
    omega_sq = loop.angular_frequencies() ** 2
    return float(0.25 * loop.period * masses @ (energies @ omega_sq))


def l2_norms_squared(loop: LoopConfiguration) -> np.ndarray:
    """Per-body squared L^2 norms int_0^T |x_i|^2 dt, shape (N,)."""
    return 0.5 * loop.period * harmonic_energies(loop).sum(axis=1)


def velocity_l2_norms_squared(loop: LoopConfiguration) -> np.ndarray:
    """Per-body squared L^2 norms of the velocity, shape (N,)."""
    omega_sq = loop.angular_frequencies() ** 2
    return 0.5 * loop.period * (harmonic_energies(loop) @ omega_sq)


def min_pairwise_distance(path: SampledPath) -> float:
    """Smallest inter-body distance over all grid times and pairs i < j."""
    n = path.n_bodies
    if n < 2:
        raise SingleBody("pairwise distance requires at least two bodies")
    diff = path.positions[:, :, None, :] - path.positions[:, None, :, :]
    dist = np.sqrt((diff**2).sum(axis=-1))
    iu, ju = np.triu_indices(n, k=1)
    return float(dist[:, iu, ju].min())


def h1_distance(first: LoopConfiguration, second: LoopConfiguration) -> float:
    """H^1 distance ( int |dx|^2 + |dxdot|^2 dt )^{1/2} of the difference loop.

    Computed in closed form from the coefficient difference. Loops must agree
    on bodies, dimension, and period; the shorter harmonic tail is zero-padded.
    """
    if (
        first.n_bodies != second.n_bodies
        or first.dim != second.dim
        or first.period != second.period
    ):
        raise ShapeMismatch("loops differ in n_bodies, dim, or period")
    m = max(first.harmonics, second.harmonics)

    def padded(loop: LoopConfiguration) -> np.ndarray:
        c = loop.coefficients
        if loop.harmonics == m:
            return c
        pad = np.zeros((loop.n_bodies, m - loop.harmonics, 2, loop.dim), dtype=c.dtype)
        return np.concatenate([c, pad], axis=1)

    delta = padded(first) - padded(second)
    energies = (delta**2).sum(axis=(2, 3)).sum(axis=0)  # (M,)
    orders = np.arange(1, 2 * m, 2, dtype=float)
    omega_sq = ((2.0 * np.pi / first.period) * orders) ** 2
    return float(np.sqrt(0.5 * first.period * ((1.0 + omega_sq) @ energies)))


def shift_loop(loop: LoopConfiguration, tau: float) -> LoopConfiguration:
    """The time-translated loop t -> x(t + tau), again in coefficient form.

    Each harmonic block rotates: a' = a cos(omega tau) + b sin(omega tau),
    b' = -a sin(omega tau) + b cos(omega tau).
    """
    omega = loop.angular_frequencies()
    ct = np.cos(omega * tau)[None, :, None]
    st = np.sin(omega * tau)[None, :, None]
    a = loop.coefficients[:, :, 0, :]
    b = loop.coefficients[:, :, 1, :]
    shifted = np.stack([a * ct + b * st, -a * st + b * ct], axis=2)
    return LoopConfiguration(loop.n_bodies, loop.dim, loop.period, shifted)
