"""Rayleigh block-fading channel model and CSI-based user ordering.

Each link is h[i, j] = sqrt(L[i, j]) * g[i, j] with g ~ CN(0, 1) i.i.d., so
the instantaneous power gain is L[i, j] * |g[i, j]|^2 with |g|^2 ~ Exp(1).
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .geometry import N_TX, NetworkGeometry, UserPlacement, slow_fading_matrix


class CsiMode(Enum):
    """What the transmitter knows when ordering users and picking RRUs."""

    INSTANTANEOUS_CGI = "cgi"
    CDI_ONLY = "cdi"


@dataclass(frozen=True)
class ChannelRealization:
    """One fading draw over all 7 transmitters and both users.

    Arrays are indexed [transmitter, user-1] with transmitter 0 the center BS.
    ``gain`` is always recomputed as L * |g|^2 so the three fields stay
    consistent by construction.
    """

    L: np.ndarray  # (7, 2) slow-fading power gains
    g: np.ndarray  # (7, 2) complex small-scale coefficients
    gain: np.ndarray = None  # (7, 2) derived, always L * |g|^2

    def __post_init__(self) -> None:
        L = np.asarray(self.L, dtype=float)
        g = np.asarray(self.g, dtype=complex)
        if L.shape != (N_TX, 2) or g.shape != (N_TX, 2):
            raise ValueError(f"channel arrays must have shape ({N_TX}, 2)")
        if np.any(L <= 0.0):
            raise ValueError("slow-fading gains must be strictly positive")
        object.__setattr__(self, "L", L)
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "gain", L * np.abs(g) ** 2)


def sample_small_scale(rng: np.random.Generator, shape=(N_TX, 2)) -> np.ndarray:
    """CN(0, 1) draws: independent real/imag parts of variance 1/2 each."""
    re = rng.standard_normal(shape)
    im = rng.standard_normal(shape)
    return (re + 1j * im) / np.sqrt(2.0)


def sample_channel(
    geometry: NetworkGeometry,
    placement: UserPlacement,
    rng: np.random.Generator,
) -> ChannelRealization:
    """Draw one Rayleigh realization for the given geometry and placement."""
    L = slow_fading_matrix(geometry, placement)
    return ChannelRealization(L=L, g=sample_small_scale(rng))


def order_users(ch: ChannelRealization, mode: CsiMode) -> tuple[int, int]:
    """Return (weak, strong) user labels in {1, 2}.

    Under instantaneous CGI the strong user has the larger center-BS power
    gain; with CDI only, the larger center-BS channel variance.  Ties go to
    the lower user index as strong.
    """
    key = ch.gain[0] if mode is CsiMode.INSTANTANEOUS_CGI else ch.L[0]
    strong = 1 if key[0] >= key[1] else 2
    return (3 - strong, strong)
