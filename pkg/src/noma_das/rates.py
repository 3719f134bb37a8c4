"""Instantaneous and ergodic per-user rates for the transmission schemes.

Array-friendly kernels carry the SINR algebra; the per-realization wrappers
map a ChannelRealization plus a PowerBudget onto them.  User roles follow
the CSI ordering convention: the weak user (label 1) is decoded first under
NOMA, the strong user (label 2) applies SIC and is served second.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import NamedTuple

import numpy as np

from .channel import ChannelRealization, CsiMode
from .geometry import N_RRU
from .specfun import LN2, ergodic_capacity_C, mixture_capacity_rows, mixture_weights_rows

INV_LN2 = 1.0 / LN2


def log2_1p(x):
    """log2(1 + x) evaluated through log1p for small-SINR accuracy."""
    return np.log1p(x) * INV_LN2


class SchemeKind(Enum):
    NOMA_SINGLE_SELECTION = "noma_single_selection"
    NOMA_BLANKET = "noma_blanket"
    CONVENTIONAL_NOMA = "conventional_noma"
    CONVENTIONAL_SINGLE_SELECTION = "conventional_single_selection"
    JT_NOMA = "jt_noma"


@dataclass(frozen=True)
class PowerBudget:
    """Split of the total radiated power P across the 7 transmitters.

    The center BS radiates p_cen, each of the 6 RRUs radiates p_rru, and
    p_cen + 6 p_rru = p_total.  Under NOMA the center power is further split
    as p1 (weak-user message) + p2 (strong-user message); under joint
    transmission the ratio beta goes to the weak user at every antenna.
    """

    p_total: float
    p_cen: float
    p_rru: float
    p1: float | None = None
    beta: float | None = None

    def __post_init__(self) -> None:
        if min(self.p_total, self.p_cen, self.p_rru) < 0.0:
            raise ValueError("powers must be nonnegative")
        if abs(self.p_cen + N_RRU * self.p_rru - self.p_total) > 1e-9 * max(self.p_total, 1.0):
            raise ValueError("p_cen + 6 p_rru must equal p_total")
        if self.p1 is not None and not -1e-12 <= self.p1 <= self.p_cen + 1e-12:
            raise ValueError("p1 must lie in [0, p_cen]")
        if self.beta is not None and not 0.0 <= self.beta <= 1.0:
            raise ValueError("beta must lie in [0, 1]")

    @property
    def p2(self) -> float:
        if self.p1 is None:
            raise ValueError("p1 has not been allocated yet")
        return self.p_cen - self.p1

    def with_p1(self, p1: float) -> "PowerBudget":
        return replace(self, p1=float(p1))

    def with_beta(self, beta: float) -> "PowerBudget":
        return replace(self, beta=float(beta))

    @classmethod
    def das_split(cls, p_total: float, center_fraction: float = 0.5) -> "PowerBudget":
        """Center BS radiates center_fraction * P, the rest split over 6 RRUs."""
        if not 0.0 <= center_fraction <= 1.0:
            raise ValueError("center fraction must lie in [0, 1]")
        p_cen = center_fraction * p_total
        return cls(p_total=p_total, p_cen=p_cen, p_rru=(p_total - p_cen) / N_RRU)

    @classmethod
    def centralized(cls, p_total: float) -> "PowerBudget":
        """All power at the center BS (conventional NOMA)."""
        return cls(p_total=p_total, p_cen=p_total, p_rru=0.0)

    @classmethod
    def equal_split(cls, p_total: float) -> "PowerBudget":
        """Every transmitter, center included, radiates P/7."""
        return cls(p_total=p_total, p_cen=p_total / 7.0, p_rru=p_total / 7.0)


@dataclass(frozen=True)
class RateOutcome:
    """Per-realization rates: SIC pre-rates z1/z2 and delivered r1/r2."""

    z1: float
    z2: float
    r1: float
    r2: float
    outage: bool = False


def select_rru(ch: ChannelRealization, weak: int, mode: CsiMode) -> int:
    """Index in 1..6 of the RRU serving the weak user: the best instantaneous
    gain under CGI, the best channel variance under CDI.  Ties take the
    lowest index."""
    col = weak - 1
    key = ch.gain[1:, col] if mode is CsiMode.INSTANTANEOUS_CGI else ch.L[1:, col]
    return int(np.argmax(key)) + 1


# ---------------------------------------------------------------------------
# array kernels
# ---------------------------------------------------------------------------

def noma_rate_components(g0w, g0s, rru_w, rru_s, p1, p_cen, sigma2=1.0):
    """Z1, Z2, R2 for center-split NOMA with extra RRU power.

    g0w/g0s are the users' center-BS power gains, rru_w/rru_s the total RRU
    power already received by each user (gain times per-RRU transmit power,
    summed over whichever RRUs transmit).  Broadcasts over arrays.
    """
    p2 = p_cen - p1
    z1 = log2_1p((g0w * p1 + rru_w) / (g0w * p2 + sigma2))
    z2 = log2_1p((g0s * p1 + rru_s) / (g0s * p2 + sigma2))
    r2 = log2_1p(g0s * p2 / sigma2)
    return z1, z2, r2


def jt_rate_components(h_weak, h_strong, beta, sigma2=1.0):
    """Z1, Z2, R2 for joint transmission with composite gains h = sum Q_i gain_i."""
    z1 = log2_1p(beta * h_weak / ((1.0 - beta) * h_weak + sigma2))
    z2 = log2_1p(beta * h_strong / ((1.0 - beta) * h_strong + sigma2))
    r2 = log2_1p((1.0 - beta) * h_strong / sigma2)
    return z1, z2, r2


def single_selection_components(g0w, g0s, gq_w, gq_s, p_cen, p_rru, sigma2=1.0):
    """R1, R2 for orthogonal-message single selection (no SIC).

    The weak user listens to RRU q and sees the center as interference; the
    strong user listens to the center and sees RRU q as interference.
    """
    r1 = log2_1p(gq_w * p_rru / (g0w * p_cen + sigma2))
    r2 = log2_1p(g0s * p_cen / (gq_s * p_rru + sigma2))
    return r1, r2


# ---------------------------------------------------------------------------
# per-realization rate evaluation
# ---------------------------------------------------------------------------

def _require_p1(budget: PowerBudget) -> float:
    if budget.p1 is None:
        raise ValueError("budget.p1 must be set to evaluate NOMA rates")
    return budget.p1


def rates_noma_single(ch: ChannelRealization, budget: PowerBudget, weak: int,
                      strong: int, q: int, sigma2: float = 1.0) -> RateOutcome:
    """NOMA with the center BS plus the single selected RRU q boosting the
    weak user's message."""
    p1 = _require_p1(budget)
    g = ch.gain
    z1, z2, r2 = noma_rate_components(
        g[0, weak - 1], g[0, strong - 1],
        g[q, weak - 1] * budget.p_rru, g[q, strong - 1] * budget.p_rru,
        p1, budget.p_cen, sigma2,
    )
    return RateOutcome(z1=float(z1), z2=float(z2), r1=float(min(z1, z2)), r2=float(r2))


def rates_noma_blanket(ch: ChannelRealization, budget: PowerBudget, weak: int,
                       strong: int, sigma2: float = 1.0) -> RateOutcome:
    """NOMA with all six RRUs transmitting the weak user's message."""
    p1 = _require_p1(budget)
    g = ch.gain
    z1, z2, r2 = noma_rate_components(
        g[0, weak - 1], g[0, strong - 1],
        budget.p_rru * g[1:, weak - 1].sum(), budget.p_rru * g[1:, strong - 1].sum(),
        p1, budget.p_cen, sigma2,
    )
    return RateOutcome(z1=float(z1), z2=float(z2), r1=float(min(z1, z2)), r2=float(r2))


def rates_conventional_noma(ch: ChannelRealization, power_split: tuple[float, float],
                            weak: int, strong: int, sigma2: float = 1.0) -> RateOutcome:
    """Center-only NOMA: the full budget (p1, p2) radiates from the BS.

    Under the CGI ordering the strong user's SIC rate z2 never falls below
    z1, so the weak user's delivered rate is z1 itself.
    """
    p1, p2 = power_split
    if p1 < 0.0 or p2 < 0.0:
        raise ValueError("power split parts must be nonnegative")
    g0w, g0s = ch.gain[0, weak - 1], ch.gain[0, strong - 1]
    z1 = log2_1p(g0w * p1 / (g0w * p2 + sigma2))
    z2 = log2_1p(g0s * p1 / (g0s * p2 + sigma2))
    r2 = log2_1p(g0s * p2 / sigma2)
    return RateOutcome(z1=float(z1), z2=float(z2), r1=float(z1), r2=float(r2))


def rates_conventional_single_selection(ch: ChannelRealization, budget: PowerBudget,
                                        sigma2: float = 1.0,
                                        mode: CsiMode = CsiMode.INSTANTANEOUS_CGI) -> RateOutcome:
    """Orthogonal baseline: the center always serves user 2 (near) and user 1
    (far) is served by its best RRU, each treating the other transmission as
    interference.  Roles follow the fixed user labels, not channel ordering;
    ``mode`` only steers the RRU choice (gain vs variance).
    """
    q = select_rru(ch, 1, mode)
    g = ch.gain
    r1, r2 = single_selection_components(
        g[0, 0], g[0, 1], g[q, 0], g[q, 1],
        budget.p_cen, budget.p_rru, sigma2,
    )
    return RateOutcome(z1=float(r1), z2=float(r2), r1=float(r1), r2=float(r2))


def jt_composite_gains(ch: ChannelRealization, budget: PowerBudget) -> np.ndarray:
    """Power-weighted composite gains sum_i Q_i gain[i, j] per user, shape (2,)."""
    q = np.full(ch.gain.shape[0], budget.p_rru)
    q[0] = budget.p_cen
    return q @ ch.gain


def rates_jt_noma(ch: ChannelRealization, budget: PowerBudget, beta: float | None = None,
                  mode: CsiMode = CsiMode.INSTANTANEOUS_CGI,
                  sigma2: float = 1.0) -> RateOutcome:
    """Joint transmission: every antenna superposes both messages with power
    ratio beta to the weak user.

    Under CGI the realized composite gains order the users and set the rates;
    under CDI the closed-form ergodic triple (E[Z1], E[Z2], R2) is returned,
    with users ordered by composite statistical gain sum_i L[i, j] Q_i.
    """
    if beta is None:
        beta = budget.beta
    if beta is None:
        raise ValueError("beta must be given or set on the budget")
    if not 0.0 <= beta <= 1.0:
        raise ValueError("beta must lie in [0, 1]")
    if mode is CsiMode.INSTANTANEOUS_CGI:
        h = jt_composite_gains(ch, budget)
        strong = 1 if h[0] >= h[1] else 2
        h_weak, h_strong = h[2 - strong], h[strong - 1]
        z1, z2, r2 = jt_rate_components(h_weak, h_strong, beta, sigma2)
        return RateOutcome(z1=float(z1), z2=float(z2), r1=float(min(z1, z2)), r2=float(r2))
    ez1, ez2, r2 = jt_ergodic_rates(ch.L, budget, beta, sigma2)
    return RateOutcome(z1=float(ez1), z2=float(ez2),
                       r1=float(min(ez1, ez2)), r2=float(r2))


# ---------------------------------------------------------------------------
# ergodic (CDI) closed forms
# ---------------------------------------------------------------------------

class ErgodicRates(NamedTuple):
    ez1: float
    ez2: float
    r1_ub: float
    r2: float


def _tx_powers(budget: PowerBudget) -> np.ndarray:
    q = np.full(1 + N_RRU, budget.p_rru)
    q[0] = budget.p_cen
    return q


def _capacity_or_zero(x, sigma2):
    """C_1(x / sigma2) extended by continuity with value 0 at x = 0."""
    x = np.asarray(x, dtype=float)
    safe = np.where(x > 0.0, x, 1.0)
    out = np.where(x > 0.0, ergodic_capacity_C(1, safe / sigma2), 0.0)
    return out


def ergodic_noma_constants(L: np.ndarray, budget: PowerBudget, scheme: SchemeKind,
                           sigma2: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """P1-independent mixture capacities E[log2(1 + received / sigma2)] of the
    full center + RRU signal, per user.

    ``L`` has shape (n, 7, 2) with column order (far/weak, near/strong) fixed
    by the CDI ordering.  Returns arrays (m1, m2) of shape (n,).
    """
    L = np.asarray(L, dtype=float)
    if scheme is SchemeKind.NOMA_SINGLE_SELECTION:
        q = np.argmax(L[:, 1:, 0], axis=1) + 1
        rows = np.arange(L.shape[0])
        if budget.p_rru == 0.0:
            prods1 = L[:, 0, 0, None] * budget.p_cen
            prods2 = L[:, 0, 1, None] * budget.p_cen
        else:
            prods1 = np.stack([L[:, 0, 0] * budget.p_cen, L[rows, q, 0] * budget.p_rru], axis=1)
            prods2 = np.stack([L[:, 0, 1] * budget.p_cen, L[rows, q, 1] * budget.p_rru], axis=1)
    elif scheme is SchemeKind.NOMA_BLANKET or scheme is SchemeKind.CONVENTIONAL_NOMA:
        powers = _tx_powers(budget)
        keep = powers > 0.0
        prods1 = L[:, keep, 0] * powers[keep]
        prods2 = L[:, keep, 1] * powers[keep]
    else:
        raise ValueError(f"no ergodic NOMA closed form for scheme {scheme}")
    return (mixture_capacity_rows(prods1, sigma2), mixture_capacity_rows(prods2, sigma2))


def ergodic_noma_eval(m1, m2, L01, L02, p2, sigma2: float = 1.0):
    """Closed-form (E[Z1], E[Z2], R2) given the mixture constants.

    E[Z_j] = m_j - C_1(L0j p2 / sigma2); the subtracted term doubles as R2
    for j = 2 and vanishes when p2 = 0 (no strong-user message power).
    """
    sub1 = _capacity_or_zero(np.asarray(L01) * p2, sigma2)
    sub2 = _capacity_or_zero(np.asarray(L02) * p2, sigma2)
    return m1 - sub1, m2 - sub2, sub2


def ergodic_rates_noma(L: np.ndarray, budget: PowerBudget, scheme: SchemeKind,
                       sigma2: float = 1.0) -> ErgodicRates:
    """CDI ergodic rates for one geometry.

    ``L`` has shape (7, 2) with user 1 (column 0) the far/weak user per the
    CDI ordering.  Returns closed-form E[Z1], E[Z2], the max-min upper bound
    min(E[Z1], E[Z2]) and the exact ergodic R2, all in bits/s/Hz.
    """
    p2 = budget.p2
    Lb = np.asarray(L, dtype=float)[None, :, :]
    m1, m2 = ergodic_noma_constants(Lb, budget, scheme, sigma2)
    ez1, ez2, r2 = ergodic_noma_eval(m1, m2, Lb[:, 0, 0], Lb[:, 0, 1], p2, sigma2)
    return ErgodicRates(float(ez1[0]), float(ez2[0]),
                        float(min(ez1[0], ez2[0])), float(r2[0]))


def jt_ergodic_products(L: np.ndarray, budget: PowerBudget) -> np.ndarray:
    """Composite variance-power products L[i, j] Q_i, shape like L."""
    powers = _tx_powers(budget)
    return np.asarray(L, dtype=float) * powers[..., :, None]


def jt_ergodic_rates(L: np.ndarray, budget: PowerBudget, beta: float,
                     sigma2: float = 1.0) -> tuple[float, float, float]:
    """Closed-form (E[Z1], E[Z2], R2) for joint transmission under CDI.

    Users are ordered by composite statistical gain sum_i L[i, j] Q_i; the
    partial-fraction weights are shared between the full and the
    (1 - beta)-scaled mixtures because they are scale invariant.
    """
    prods = jt_ergodic_products(np.asarray(L, dtype=float)[None, :, :], budget)[0]
    strong_col = 0 if prods[:, 0].sum() >= prods[:, 1].sum() else 1
    weak_col = 1 - strong_col
    out = []
    for col in (weak_col, strong_col):
        resolved, w = mixture_weights_rows(prods[None, :, col])
        full = float(np.sum(w * ergodic_capacity_C(1, resolved / sigma2)))
        if beta < 1.0:
            scaled = float(np.sum(w * ergodic_capacity_C(1, (1.0 - beta) * resolved / sigma2)))
        else:
            scaled = 0.0
        out.append((full - scaled, scaled))
    (ez1, _), (ez2, r2) = out
    return ez1, ez2, r2
