"""Cell layout, user placement and distance-based pathloss.

The network is a single circular cell of normalized radius 1 with a base
station at the origin and six single-antenna remote radio units (RRUs) on a
concentric ring.  Transmitter index 0 is always the center BS, indices 1..6
are the RRUs.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

N_RRU = 6
N_TX = N_RRU + 1

#: users closer than this to any transmit antenna are rejected / refused
MIN_ANTENNA_CLEARANCE = 1e-6

DEFAULT_ALPHA = 4.0
DEFAULT_RRU_RING_RADIUS = 2.0 / 3.0
DEFAULT_NEAR_DISTANCE = 0.2
NEAR_DISK_RADIUS = 0.3
FAR_RING_INNER = 0.8
FAR_RING_OUTER = 1.0


@dataclass(frozen=True)
class NetworkGeometry:
    """Positions of the 7 transmit antennas plus the pathloss exponent."""

    rru_positions: np.ndarray  # (6, 2) cartesian, cell radius units
    alpha: float = DEFAULT_ALPHA
    cell_radius: float = 1.0

    def __post_init__(self) -> None:
        pos = np.asarray(self.rru_positions, dtype=float)
        if pos.shape != (N_RRU, 2):
            raise ValueError(f"expected {N_RRU} RRU positions, got shape {pos.shape}")
        object.__setattr__(self, "rru_positions", pos)
        if not self.alpha > 0:
            raise ValueError("pathloss exponent must be positive")
        if self.cell_radius != 1.0:
            raise ValueError("cell radius is normalized to 1")
        radii = np.hypot(pos[:, 0], pos[:, 1])
        if np.any(radii > self.cell_radius):
            raise ValueError("RRU positions must lie inside the cell")
        # all 7 antennas pairwise distinct
        allpos = self.tx_positions
        d = np.linalg.norm(allpos[:, None, :] - allpos[None, :, :], axis=-1)
        if np.any(d[np.triu_indices(N_TX, k=1)] < MIN_ANTENNA_CLEARANCE):
            raise ValueError("transmit antenna positions must be distinct")

    @property
    def tx_positions(self) -> np.ndarray:
        """All transmitter coordinates, center BS first, shape (7, 2)."""
        return np.vstack([np.zeros((1, 2)), self.rru_positions])


def default_geometry(
    alpha: float = DEFAULT_ALPHA,
    ring_radius: float = DEFAULT_RRU_RING_RADIUS,
) -> NetworkGeometry:
    """Six RRUs evenly spaced on a ring of radius 2/3, one at (2/3, 0)."""
    if not 0.0 < ring_radius < 1.0:
        raise ValueError("RRU ring radius must lie strictly inside the cell")
    angles = 2.0 * np.pi * np.arange(N_RRU) / N_RRU
    ring = ring_radius * np.column_stack([np.cos(angles), np.sin(angles)])
    return NetworkGeometry(rru_positions=ring, alpha=alpha)


def pathloss(distance, alpha: float = DEFAULT_ALPHA):
    """Slow-fading power gain 1/d^alpha.

    Accepts scalars or arrays; every distance must be strictly positive.
    """
    d = np.asarray(distance, dtype=float)
    if np.any(d <= 0.0):
        raise ValueError("pathloss requires strictly positive distance")
    out = d ** (-alpha)
    return float(out) if np.isscalar(distance) else out


@dataclass(frozen=True)
class UserPlacement:
    """Coordinates of the far (user 1) and near (user 2) terminals."""

    user1: np.ndarray  # far user, shape (2,)
    user2: np.ndarray  # near user, shape (2,)
    cell_radius: float = field(default=1.0, repr=False)

    def __post_init__(self) -> None:
        for name in ("user1", "user2"):
            p = np.asarray(getattr(self, name), dtype=float).reshape(2)
            object.__setattr__(self, name, p)
            if np.hypot(p[0], p[1]) > self.cell_radius + 1e-12:
                raise ValueError(f"{name} lies outside the cell")

    @property
    def positions(self) -> np.ndarray:
        """Both user coordinates stacked, user 1 first, shape (2, 2)."""
        return np.vstack([self.user1, self.user2])


def slow_fading_matrix(geometry: NetworkGeometry, placement: UserPlacement) -> np.ndarray:
    """Pathloss gains L[i, j] for transmitter i=0..6 and user j=1, 2, shape (7, 2).

    Raises ValueError when a user sits within MIN_ANTENNA_CLEARANCE of any
    antenna, where 1/d^alpha would blow up.
    """
    d = np.linalg.norm(
        geometry.tx_positions[:, None, :] - placement.positions[None, :, :], axis=-1
    )
    if np.any(d < MIN_ANTENNA_CLEARANCE):
        raise ValueError("user placed on top of a transmit antenna")
    return pathloss(d, geometry.alpha)


def sample_placement_fig2(
    far_distance: float, near_distance: float = DEFAULT_NEAR_DISTANCE
) -> UserPlacement:
    """Deterministic on-axis placement: near user at (near, 0), far at (d, 0)."""
    if not 0.0 < far_distance <= 1.0:
        raise ValueError("far-user distance must lie in (0, 1]")
    if not 0.0 < near_distance <= 1.0:
        raise ValueError("near-user distance must lie in (0, 1]")
    return UserPlacement(
        user1=np.array([far_distance, 0.0]), user2=np.array([near_distance, 0.0])
    )


def _uniform_disk(rng: np.random.Generator, n: int, r_inner: float, r_outer: float):
    """Area-uniform points in the annulus r_inner <= r <= r_outer, shape (n, 2)."""
    u = rng.uniform(size=n)
    r = np.sqrt(r_inner**2 + (r_outer**2 - r_inner**2) * u)
    theta = rng.uniform(0.0, 2.0 * np.pi, size=n)
    return np.column_stack([r * np.cos(theta), r * np.sin(theta)])


def sample_placements_rings(
    rng: np.random.Generator,
    n: int,
    geometry: NetworkGeometry | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Batch of n random placements: near user area-uniform on the disk of
    radius 0.3, far user area-uniform on the ring between radii 0.8 and 1.

    Draws landing within MIN_ANTENNA_CLEARANCE of an antenna are rejected and
    resampled.  Returns (far_positions, near_positions), each (n, 2).
    """
    if geometry is None:
        geometry = default_geometry()
    tx = geometry.tx_positions

    def draw(r_in, r_out):
        pts = _uniform_disk(rng, n, r_in, r_out)
        for _ in range(100):
            d = np.linalg.norm(pts[:, None, :] - tx[None, :, :], axis=-1)
            bad = np.any(d < MIN_ANTENNA_CLEARANCE, axis=1)
            if not bad.any():
                return pts
            pts[bad] = _uniform_disk(rng, int(bad.sum()), r_in, r_out)
        raise RuntimeError("placement rejection sampling did not terminate")

    # far user first so a shared rng stream keeps near/far draw order stable
    far = draw(FAR_RING_INNER, FAR_RING_OUTER)
    near = draw(0.0, NEAR_DISK_RADIUS)
    return far, near


def sample_placement_rings(
    rng: np.random.Generator, geometry: NetworkGeometry | None = None
) -> UserPlacement:
    """Single random placement from the two-ring distribution."""
    far, near = sample_placements_rings(rng, 1, geometry)
    return UserPlacement(user1=far[0], user2=near[0])
