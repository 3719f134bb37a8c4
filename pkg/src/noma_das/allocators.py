"""Power allocation: closed-form max-min and QoS-constrained max-sum splits,
the ergodic upper-bound bisection, the joint-transmission ratio search, and a
brute-force grid oracle used for validation.

The max-min solvers exploit that z1 and z2 are strictly increasing in p1
while r2 is strictly decreasing, so the optimum sits at the larger of the
two crossings z_j(p1) = r2(p1), clamped into [0, p_cen].  The crossings are
roots of quadratics in p2 = p_cen - p1, solved in the subtraction-free form.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelRealization, CsiMode, order_users
from .rates import (
    LN2,
    PowerBudget,
    SchemeKind,
    ergodic_noma_constants,
    ergodic_noma_eval,
    jt_composite_gains,
    jt_ergodic_products,
    jt_rate_components,
    log2_1p,
    select_rru,
)
from .specfun import ergodic_capacity_C, mixture_weights_rows


@dataclass(frozen=True)
class QosConstraint:
    """Minimum per-user rate r_t in bits/s/Hz required by both users."""

    r_t: float

    def __post_init__(self) -> None:
        if self.r_t < 0.0:
            raise ValueError("QoS rate must be nonnegative")


@dataclass(frozen=True)
class AllocationResult:
    """Outcome of a power-allocation solve.

    p1_opt is None when the QoS constraint cannot be met (outage); the
    objective then counts as 0.  solver_meta carries diagnostics such as
    iteration counts, the |r1 - r2| crossing residual, or the chosen beta.
    """

    p1_opt: float | None
    objective: float
    outage: bool = False
    solver_meta: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# instantaneous CGI, array kernels
# ---------------------------------------------------------------------------

def _rates_at_weak_share(g0w, g0s, rru_w, rru_s, u, p_cen, sigma2):
    """(z1, z2, r2) evaluated at p2 = u, p1 = p_cen - u.

    Algebraically identical to the p1-parameterized rates but conditioned on
    u directly, so a crossing with u within a few ulp of 0 keeps its residual
    at machine scale instead of inheriting the p_cen - p1 rounding.
    """
    a, b, w, s = g0w, g0s, rru_w, rru_s
    z1 = np.log2((a * p_cen + w + sigma2) / (a * u + sigma2))
    z2 = np.log2((b * p_cen + s + sigma2) / (b * u + sigma2))
    r2 = log2_1p(b * u / sigma2)
    return z1, z2, r2


def _maxmin_weak_share(g0w, g0s, rru_w, rru_s, p_cen, sigma2):
    """Optimal p2 = p_cen - p1 for the max-min problem, broadcast over arrays.

    Solves z1 = r2 and z2 = r2 as quadratics in u = p2 and takes the smaller
    root (the later crossing in p1); a crossing with u > p_cen means r2
    dominates on the whole interval and the boundary p1 = 0 wins, i.e.
    u = p_cen.
    """
    a, b, w, s = g0w, g0s, rru_w, rru_s
    c, s2 = p_cen, sigma2
    with np.errstate(divide="ignore", invalid="ignore"):
        # a b u^2 + s2 (a + b) u - s2 (a c + w) = 0, u = p2 at the z1 crossing
        disc1 = (s2 * (a + b)) ** 2 + 4.0 * a * b * s2 * (a * c + w)
        u1 = 2.0 * s2 * (a * c + w) / (s2 * (a + b) + np.sqrt(disc1))
        # b^2 u^2 + 2 b s2 u - s2 (b c + s) = 0, u = p2 at the z2 crossing
        u2 = s2 * (b * c + s) / (b * (s2 + np.sqrt(s2 * s2 + s2 * (b * c + s))))
    return np.minimum(np.minimum(u1, u2), c)


def maxmin_power_split(g0w, g0s, rru_w, rru_s, p_cen, sigma2=1.0):
    """Max-min optimal p1 and objective min(r1, r2), broadcasting over arrays."""
    u = _maxmin_weak_share(g0w, g0s, rru_w, rru_s, p_cen, sigma2)
    z1, z2, r2 = _rates_at_weak_share(g0w, g0s, rru_w, rru_s, u, p_cen, sigma2)
    return p_cen - u, np.minimum(np.minimum(z1, z2), r2)


def _maxsum_weak_share(g0w, g0s, rru_w, rru_s, p_cen, sigma2, r_t):
    """Candidate p2 for the QoS sum-rate problem: (unclamped, clamped).

    r1 + r2 is nonincreasing in p1, so the smallest p1 with r1 >= r_t wins;
    both z_j = r_t conditions are linear in u = p2.  The unclamped value
    carries the feasibility information (negative means z_j cannot reach
    r_t even with the whole center budget).
    """
    a, b, w, s = g0w, g0s, rru_w, rru_s
    c, s2 = p_cen, sigma2
    t = np.expm1(np.asarray(r_t, dtype=float) * LN2)
    g = 1.0 + t
    with np.errstate(divide="ignore", invalid="ignore"):
        u_z1 = (a * c + w - s2 * t) / (a * g)
        u_z2 = (b * c + s - s2 * t) / (b * g)
    u_r1 = np.minimum(u_z1, u_z2)
    return u_r1, np.clip(u_r1, 0.0, c)


def maxsum_power_split(g0w, g0s, rru_w, rru_s, p_cen, sigma2, r_t):
    """QoS-constrained sum-rate optimum, broadcasting over arrays.

    Returns (p1, objective, outage) with objective 0 on outage.
    """
    u_r1, u = _maxsum_weak_share(g0w, g0s, rru_w, rru_s, p_cen, sigma2, r_t)
    z1, z2, r2 = _rates_at_weak_share(g0w, g0s, rru_w, rru_s, u, p_cen, sigma2)
    r1 = np.minimum(z1, z2)
    feasible = (u_r1 >= 0.0) & (r2 >= np.asarray(r_t, dtype=float))
    objective = np.where(feasible, r1 + r2, 0.0)
    return p_cen - u, objective, ~feasible


def _jt_rates_at_strong_share(hw, hs, y, sigma2):
    """(z1, z2, r2) at strong-user share y = 1 - beta, conditioned on y."""
    z1 = np.log2((hw + sigma2) / (y * hw + sigma2))
    z2 = np.log2((hs + sigma2) / (y * hs + sigma2))
    r2 = log2_1p(y * hs / sigma2)
    return z1, z2, r2


def jt_maxmin_ratio(h1, h2, sigma2=1.0):
    """Max-min optimal beta and objective for joint transmission.

    With composite gains the weak user's pre-rate never exceeds the strong
    user's, so the optimum is the single crossing z1(beta) = r2(beta); in
    y = 1 - beta it is the positive root of y^2 hw hs + y s2 (hw + hs) -
    s2 hw = 0, which always lies in (0, 1).
    """
    hw = np.minimum(h1, h2)
    hs = np.maximum(h1, h2)
    s2 = sigma2
    with np.errstate(divide="ignore", invalid="ignore"):
        disc = (s2 * (hw + hs)) ** 2 + 4.0 * hw * hw * hs * s2
        y = 2.0 * s2 * hw / (s2 * (hw + hs) + np.sqrt(disc))
    y = np.where(hw > 0.0, y, 0.0)
    z1, z2, r2 = _jt_rates_at_strong_share(hw, hs, y, s2)
    return 1.0 - y, np.minimum(np.minimum(z1, z2), r2)


def jt_maxsum_ratio(h1, h2, sigma2, r_t):
    """QoS-constrained sum-rate optimum over beta for joint transmission.

    The sum rate is nonincreasing in beta, so the smallest feasible beta
    (largest y = 1 - beta with z1 >= r_t and r2 >= r_t) is optimal.
    """
    hw = np.minimum(h1, h2)
    hs = np.maximum(h1, h2)
    s2 = sigma2
    g = np.exp2(np.asarray(r_t, dtype=float))
    with np.errstate(divide="ignore", invalid="ignore"):
        y_z1 = (hw - (g - 1.0) * s2) / (g * hw)
        y_r2 = (g - 1.0) * s2 / hs
    y_star = np.minimum(y_z1, 1.0)
    feasible = (y_star >= y_r2) & (y_star >= 0.0)
    y = np.clip(y_star, 0.0, 1.0)
    z1, z2, r2 = _jt_rates_at_strong_share(hw, hs, y, s2)
    objective = np.where(feasible, np.minimum(z1, z2) + r2, 0.0)
    return 1.0 - y, objective, ~feasible


# ---------------------------------------------------------------------------
# per-realization CGI solvers
# ---------------------------------------------------------------------------

def _cgi_gain_args(ch: ChannelRealization, budget: PowerBudget, scheme: SchemeKind,
                   sigma2: float):
    weak, strong = order_users(ch, CsiMode.INSTANTANEOUS_CGI)
    g = ch.gain
    if scheme is SchemeKind.NOMA_SINGLE_SELECTION:
        q = select_rru(ch, weak, CsiMode.INSTANTANEOUS_CGI)
        rru_w = budget.p_rru * g[q, weak - 1]
        rru_s = budget.p_rru * g[q, strong - 1]
    elif scheme is SchemeKind.NOMA_BLANKET:
        rru_w = budget.p_rru * g[1:, weak - 1].sum()
        rru_s = budget.p_rru * g[1:, strong - 1].sum()
    else:
        raise ValueError(f"closed-form split applies to the NOMA schemes, not {scheme}")
    return g[0, weak - 1], g[0, strong - 1], rru_w, rru_s


def maxmin_cgi(ch: ChannelRealization, budget: PowerBudget, scheme: SchemeKind,
               sigma2: float = 1.0) -> AllocationResult:
    """Closed-form max-min power split for one CGI realization.

    The crossing residual is evaluated at the solver's weak-user share u
    (p1_opt = p_cen - u is derived for reporting), keeping it at machine
    scale even when the optimum sits within a few ulp of the p1 = p_cen end.
    """
    g0w, g0s, rru_w, rru_s = _cgi_gain_args(ch, budget, scheme, sigma2)
    c = budget.p_cen
    u = _maxmin_weak_share(g0w, g0s, rru_w, rru_s, c, sigma2)
    z1, z2, r2 = _rates_at_weak_share(g0w, g0s, rru_w, rru_s, u, c, sigma2)
    residual = float(abs(min(z1, z2) - r2)) if u < c else math.nan
    return AllocationResult(
        p1_opt=float(c - u), objective=float(min(min(z1, z2), r2)),
        solver_meta={"iterations": 0, "residual": residual},
    )


def maxsum_cgi(ch: ChannelRealization, budget: PowerBudget, scheme: SchemeKind,
               qos: QosConstraint, sigma2: float = 1.0) -> AllocationResult:
    """Closed-form QoS-constrained sum-rate split for one CGI realization."""
    g0w, g0s, rru_w, rru_s = _cgi_gain_args(ch, budget, scheme, sigma2)
    c = budget.p_cen
    u_r1, u = _maxsum_weak_share(g0w, g0s, rru_w, rru_s, c, sigma2, qos.r_t)
    z1, z2, r2 = _rates_at_weak_share(g0w, g0s, rru_w, rru_s, u, c, sigma2)
    if not (u_r1 >= 0.0 and r2 >= qos.r_t):
        return AllocationResult(p1_opt=None, objective=0.0, outage=True,
                                solver_meta={"iterations": 0, "residual": math.nan})
    residual = float(abs(min(z1, z2) - qos.r_t)) if u_r1 <= c else math.nan
    return AllocationResult(
        p1_opt=float(c - u), objective=float(min(z1, z2) + r2),
        solver_meta={"iterations": 0, "residual": residual},
    )


# ---------------------------------------------------------------------------
# ergodic (CDI) bisection
# ---------------------------------------------------------------------------

DEFAULT_BISECTION_EPSILON_REL = 1e-6


def maxmin_cdi_bisection(L: np.ndarray, budget: PowerBudget, scheme: SchemeKind,
                         sigma2: float = 1.0,
                         epsilon: float | None = None) -> AllocationResult:
    """Bisect the crossing of the ergodic bound min(E[Z1], E[Z2]) with R2.

    ``L`` is (7, 2) with user 1 (column 0) the far/weak user.  The bound is
    increasing in p1 and R2 decreasing, so the sign of their difference
    steers a plain bisection on [0, p_cen]; if the difference is already
    nonnegative at p1 = 0 there is no crossing and 0 is optimal.  The final
    midpoint is returned once the bracket is narrower than epsilon
    (default 1e-6 p_cen).
    """
    c = budget.p_cen
    if epsilon is None:
        epsilon = DEFAULT_BISECTION_EPSILON_REL * c
    if epsilon <= 0.0:
        raise ValueError("bisection epsilon must be positive")
    Lb = np.asarray(L, dtype=float)[None, :, :]
    m1, m2 = ergodic_noma_constants(Lb, budget, scheme, sigma2)
    l01, l02 = Lb[:, 0, 0], Lb[:, 0, 1]

    def gap(p1: float) -> float:
        ez1, ez2, r2 = ergodic_noma_eval(m1, m2, l01, l02, c - p1, sigma2)
        return float(min(ez1[0], ez2[0]) - r2[0])

    iterations = 0
    if gap(0.0) >= 0.0:
        p1 = 0.0
    else:
        u, v = 0.0, c
        p1 = 0.5 * (u + v)
        while v - u >= epsilon:
            p1 = 0.5 * (u + v)
            if gap(p1) < 0.0:
                u = p1
            else:
                v = p1
            iterations += 1
    ez1, ez2, r2 = ergodic_noma_eval(m1, m2, l01, l02, c - p1, sigma2)
    ub = float(min(ez1[0], ez2[0]))
    return AllocationResult(
        p1_opt=p1, objective=float(min(ub, r2[0])),
        solver_meta={"iterations": iterations, "residual": float(abs(ub - r2[0]))},
    )


def maxmin_cdi_bisection_batch(L: np.ndarray, budget: PowerBudget, scheme: SchemeKind,
                               sigma2: float = 1.0,
                               epsilon: float | None = None):
    """Vectorized counterpart of maxmin_cdi_bisection for (n, 7, 2) inputs.

    Returns (p1, r1_ub, r2) arrays evaluated at the per-row solution.
    """
    c = budget.p_cen
    if epsilon is None:
        epsilon = DEFAULT_BISECTION_EPSILON_REL * c
    L = np.asarray(L, dtype=float)
    m1, m2 = ergodic_noma_constants(L, budget, scheme, sigma2)
    l01, l02 = L[:, 0, 0], L[:, 0, 1]

    def gap(p1):
        ez1, ez2, r2 = ergodic_noma_eval(m1, m2, l01, l02, c - p1, sigma2)
        return np.minimum(ez1, ez2) - r2

    active = gap(np.zeros_like(l01)) < 0.0
    u = np.zeros_like(l01)
    v = np.full_like(l01, c)
    mid = 0.5 * (u + v)
    n_iter = max(1, int(math.floor(math.log2(c / epsilon))) + 1) if c > epsilon else 1
    for _ in range(n_iter):
        mid = 0.5 * (u + v)
        low = gap(mid) < 0.0
        u = np.where(active & low, mid, u)
        v = np.where(active & ~low, mid, v)
    p1 = np.where(active, mid, 0.0)
    ez1, ez2, r2 = ergodic_noma_eval(m1, m2, l01, l02, c - p1, sigma2)
    return p1, np.minimum(ez1, ez2), r2


# ---------------------------------------------------------------------------
# joint-transmission ratio search
# ---------------------------------------------------------------------------

DEFAULT_BETA_TOLERANCE = 1e-6
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section_max(f, lo: float, hi: float, tol: float) -> tuple[float, int]:
    """Golden-section maximization of a unimodal f on [lo, hi].

    Shrinks the bracket until its width drops below tol and returns the
    midpoint together with the iteration count.
    """
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    iterations = 0
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
        iterations += 1
    return 0.5 * (a + b), iterations


def jt_beta_search(ch: ChannelRealization, budget: PowerBudget, mode: CsiMode,
                   sigma2: float = 1.0, objective: str = "maxmin",
                   qos: QosConstraint | None = None,
                   beta_tolerance: float = DEFAULT_BETA_TOLERANCE) -> AllocationResult:
    """Optimize the joint-transmission power ratio beta in [0, 1].

    The max-min objective is unimodal in beta (weak-user rates increase,
    r2 decreases) and is refined by golden-section search to the requested
    bracket width.  The QoS sum-rate objective is not unimodal once outage
    zeroes it at both ends, but it is nonincreasing on the feasible window,
    so the feasibility boundary is taken in closed form instead (CGI only).
    p1_opt reports the weak user's share beta * p_total of the radiated
    power; solver_meta carries beta itself.
    """
    if mode is CsiMode.INSTANTANEOUS_CGI:
        h = jt_composite_gains(ch, budget)
        hw, hs = float(np.min(h)), float(np.max(h))

        def rate_triple(beta):
            return jt_rate_components(hw, hs, beta, sigma2)
    else:
        prods = jt_ergodic_products(ch.L, budget)
        cols = (0, 1) if prods[:, 0].sum() >= prods[:, 1].sum() else (1, 0)
        strong_col, weak_col = cols
        rw_res, rw_w = mixture_weights_rows(prods[None, :, weak_col])
        rs_res, rs_w = mixture_weights_rows(prods[None, :, strong_col])

        def _mix(res, wts, scale):
            if scale <= 0.0:
                return 0.0
            return float(np.sum(wts * ergodic_capacity_C(1, scale * res / sigma2)))

        def rate_triple(beta):
            y = 1.0 - beta
            z1 = _mix(rw_res, rw_w, 1.0) - _mix(rw_res, rw_w, y)
            z2 = _mix(rs_res, rs_w, 1.0) - _mix(rs_res, rs_w, y)
            r2 = _mix(rs_res, rs_w, y)
            return z1, z2, r2

    if objective == "maxmin":
        def score(beta):
            z1, z2, r2 = rate_triple(beta)
            return min(z1, z2, r2)

        beta, iterations = golden_section_max(score, 0.0, 1.0, beta_tolerance)
        z1, z2, r2 = rate_triple(beta)
        return AllocationResult(
            p1_opt=beta * budget.p_total, objective=min(z1, z2, r2),
            solver_meta={"iterations": iterations, "beta": beta,
                         "residual": abs(min(z1, z2) - r2)},
        )
    if objective == "maxsum":
        if qos is None:
            raise ValueError("maxsum objective needs a QoS constraint")
        if mode is not CsiMode.INSTANTANEOUS_CGI:
            raise ValueError("the QoS sum-rate problem is defined under CGI only")
        beta, obj, outage = jt_maxsum_ratio(hw, hs, sigma2, qos.r_t)
        if bool(outage):
            return AllocationResult(p1_opt=None, objective=0.0, outage=True,
                                    solver_meta={"iterations": 0, "beta": None,
                                                 "residual": math.nan})
        z1, z2, r2 = rate_triple(float(beta))
        return AllocationResult(
            p1_opt=float(beta) * budget.p_total, objective=float(obj),
            solver_meta={"iterations": 0, "beta": float(beta),
                         "residual": abs(min(z1, z2) - qos.r_t)},
        )
    raise ValueError(f"unknown objective {objective!r}")


# ---------------------------------------------------------------------------
# brute-force oracle
# ---------------------------------------------------------------------------

def brute_force_allocate(rate_curve, p_max: float, grid_points: int,
                         constraint=None) -> AllocationResult:
    """Exhaustive maximization of rate_curve over a uniform p1 grid on
    [0, p_max].

    The first grid point attaining the maximum wins ties.  ``constraint``
    (optional) maps p1 to a feasibility bool; with no feasible point the
    result is an outage with objective 0.  Both callables may be array-aware
    or plain scalar functions.
    """
    if grid_points < 2:
        raise ValueError("grid needs at least two points")
    if p_max < 0.0:
        raise ValueError("p_max must be nonnegative")
    grid = np.linspace(0.0, p_max, grid_points)

    def evaluate(fn):
        try:
            vals = np.asarray(fn(grid), dtype=float)
            if vals.shape != grid.shape:
                raise ValueError
        except (TypeError, ValueError):
            vals = np.array([float(fn(p)) for p in grid])
        return vals

    vals = evaluate(rate_curve)
    if constraint is not None:
        ok = evaluate(constraint).astype(bool)
        if not ok.any():
            return AllocationResult(p1_opt=None, objective=0.0, outage=True,
                                    solver_meta={"iterations": grid_points,
                                                 "residual": math.nan})
        vals = np.where(ok, vals, -np.inf)
    idx = int(np.argmax(vals))
    return AllocationResult(
        p1_opt=float(grid[idx]), objective=float(vals[idx]),
        solver_meta={"iterations": grid_points, "residual": 0.0},
    )
