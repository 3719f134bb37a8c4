"""Monte-Carlo sweep harness: experiment specs, the chunked trial engine,
figure presets, and CSV/plot emission.

Determinism contract: every chunk of trials owns an RNG stream seeded by
(seed, chunk index), chunk boundaries are fixed constants, and partial
results are reduced in chunk order, so output bytes are identical across
runs and worker counts.  Sweep points share the chunk streams on purpose;
see _chunk_rng.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from .allocators import (
    QosConstraint,
    jt_maxmin_ratio,
    jt_maxsum_ratio,
    maxmin_cdi_bisection_batch,
    maxmin_power_split,
    maxsum_power_split,
)
from .channel import CsiMode
from .config import ConfigError, SimulatorConfig
from .geometry import (
    DEFAULT_NEAR_DISTANCE,
    NetworkGeometry,
    UserPlacement,
    default_geometry,
    sample_placements_rings,
    slow_fading_matrix,
)
from .rates import PowerBudget, SchemeKind, jt_rate_components, log2_1p, noma_rate_components
from .specfun import ergodic_capacity_C, mixture_weights_rows

CGI_CHUNK_TRIALS = 8192
CDI_CHUNK_PLACEMENTS = 256
DEFAULT_TRIALS = 100_000
DEFAULT_CDI_PLACEMENTS = 2000
DEFAULT_FADING_DRAWS = 256

FIG2_DISTANCES = tuple(np.round(np.arange(0.30, 1.0001, 0.05), 2))
SNR_SWEEP_DB = tuple(float(x) for x in range(0, 31, 5))
FIG5_RT_VALUES = tuple(np.round(np.arange(0.0, 5.0001, 0.5), 1))


class SweepAxis(Enum):
    FAR_DISTANCE = "far_distance"
    TRANSMIT_SNR_DB = "transmit_snr_db"
    MIN_RATE_RT = "min_rate_rt"


@dataclass(frozen=True)
class SchemeVariant:
    """A scheme plus its power-split variant and, for bound sweeps, which
    side of the ergodic sandwich the row reports."""

    kind: SchemeKind
    power: str = "das_split"        # das_split | centralized | equal_split
    bound: str | None = None        # None | upper | lower

    def __post_init__(self) -> None:
        if self.power not in ("das_split", "centralized", "equal_split"):
            raise ConfigError(f"unknown power variant {self.power!r}")
        if self.bound not in (None, "upper", "lower"):
            raise ConfigError(f"unknown bound tag {self.bound!r}")

    @property
    def token(self) -> str:
        """Stable snake_case serialization used in CSV output."""
        token = self.kind.value
        if (self.kind is SchemeKind.CONVENTIONAL_SINGLE_SELECTION
                and self.power == "equal_split"):
            token += "_equal"
        if self.bound is not None:
            token += f"_{self.bound}"
        return token

    def budget(self, p_total: float, center_fraction: float) -> PowerBudget:
        if self.power == "centralized":
            return PowerBudget.centralized(p_total)
        if self.power == "equal_split":
            return PowerBudget.equal_split(p_total)
        return PowerBudget.das_split(p_total, center_fraction)


_CDI_KINDS = frozenset({
    SchemeKind.NOMA_SINGLE_SELECTION,
    SchemeKind.NOMA_BLANKET,
    SchemeKind.CONVENTIONAL_NOMA,
    SchemeKind.JT_NOMA,
})


@dataclass(frozen=True)
class ExperimentSpec:
    """Full description of one sweep experiment.

    ``sweep_values`` are distances, SNR dB values, or rate constraints
    depending on ``sweep_axis``; the off-axis quantities are pinned by
    ``snr_db`` and ``qos``.  ``trials`` counts channel draws per sweep point
    (CGI) or sampled placements (CDI); ``fading_draws`` is the per-placement
    Monte-Carlo depth for CDI lower bounds.
    """

    name: str
    sweep_axis: SweepAxis
    sweep_values: tuple[float, ...]
    schemes: tuple[SchemeVariant, ...]
    csi_mode: CsiMode
    objective: str                      # maxmin | maxsum
    placement: str                      # fig2 | rings
    trials: int
    seed: int
    qos: QosConstraint | None = None
    snr_db: float = 10.0
    near_distance: float = DEFAULT_NEAR_DISTANCE
    fading_draws: int = DEFAULT_FADING_DRAWS

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if self.fading_draws < 1:
            raise ConfigError("fading_draws must be at least 1")
        if not self.schemes:
            raise ConfigError("at least one scheme is required")
        values = np.asarray(self.sweep_values, dtype=float)
        if values.size == 0:
            raise ConfigError("sweep_values must be nonempty")
        if values.size > 1 and not np.all(np.diff(values) > 0.0):
            raise ConfigError("sweep_values must be strictly increasing")
        if self.objective not in ("maxmin", "maxsum"):
            raise ConfigError(f"unknown objective {self.objective!r}")
        if self.placement not in ("fig2", "rings"):
            raise ConfigError(f"unknown placement {self.placement!r}")
        if (self.placement == "fig2") != (self.sweep_axis is SweepAxis.FAR_DISTANCE):
            raise ConfigError("the fig2 placement and the far-distance axis go together")
        if self.objective == "maxsum":
            if self.csi_mode is not CsiMode.INSTANTANEOUS_CGI:
                raise ConfigError("the QoS sum-rate problem is defined under CGI only")
            if self.qos is None and self.sweep_axis is not SweepAxis.MIN_RATE_RT:
                raise ConfigError("maxsum needs a QoS constraint or the rate-constraint axis")
        if self.sweep_axis is SweepAxis.MIN_RATE_RT and self.objective != "maxsum":
            raise ConfigError("the rate-constraint axis applies to the sum-rate objective")
        for variant in self.schemes:
            if self.csi_mode is CsiMode.CDI_ONLY:
                if variant.kind not in _CDI_KINDS:
                    raise ConfigError(
                        f"scheme {variant.token} is not defined under CDI")
                if variant.bound is None:
                    raise ConfigError(
                        "CDI sweeps report bounds; tag each scheme upper or lower")
            elif variant.bound is not None:
                raise ConfigError("bound tags apply to CDI sweeps only")


@dataclass(frozen=True)
class ResultRow:
    sweep_value: float
    scheme: str
    metric_mean: float
    metric_stderr: float
    outage_rate: float
    trials: int

    def __post_init__(self) -> None:
        if self.metric_stderr < 0.0:
            raise ValueError("metric_stderr must be nonnegative")
        if not 0.0 <= self.outage_rate <= 1.0:
            raise ValueError("outage_rate must lie in [0, 1]")


@dataclass
class _Accum:
    """Streaming sum / sum-of-squares / outage tally for one scheme row."""

    n: int = 0
    total: float = 0.0
    total_sq: float = 0.0
    outages: int = 0

    def add(self, values: np.ndarray, outage: np.ndarray | None) -> None:
        self.n += values.size
        self.total += float(values.sum())
        self.total_sq += float(np.square(values).sum())
        if outage is not None:
            self.outages += int(np.count_nonzero(outage))

    def row(self, sweep_value: float, token: str) -> ResultRow:
        mean = self.total / self.n
        if self.n > 1:
            var = max(self.total_sq - self.n * mean * mean, 0.0) / (self.n - 1)
            stderr = math.sqrt(var / self.n)
        else:
            stderr = 0.0
        return ResultRow(sweep_value=float(sweep_value), scheme=token,
                         metric_mean=mean, metric_stderr=stderr,
                         outage_rate=self.outages / self.n, trials=self.n)


def _chunk_rng(seed: int, chunk_index: int) -> np.random.Generator:
    """Stream for one chunk of trials, independent of the sweep point.

    Sweep points deliberately share channel draws: the sweep value only
    moves power or the rate constraint, so per-draw monotonicity arguments
    carry over to the averaged curves exactly.
    """
    return np.random.default_rng(
        np.random.SeedSequence(entropy=(int(seed), int(chunk_index)))
    )


def _chunk_sizes(total: int, chunk: int) -> list[int]:
    full, rest = divmod(total, chunk)
    return [chunk] * full + ([rest] if rest else [])


def _sample_fading(rng: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
    re = rng.standard_normal(shape)
    im = rng.standard_normal(shape)
    return (re * re + im * im) / 2.0


def _slow_fading_rows(geometry: NetworkGeometry, far: np.ndarray,
                      near: np.ndarray) -> np.ndarray:
    """Pathloss matrices for batched placements: (n, 7, 2)."""
    tx = geometry.tx_positions
    out = np.empty((far.shape[0], tx.shape[0], 2))
    for col, users in enumerate((far, near)):
        d = np.linalg.norm(tx[None, :, :] - users[:, None, :], axis=-1)
        out[:, :, col] = d ** (-geometry.alpha)
    return out


def _order_cols_by(key: np.ndarray, arr: np.ndarray) -> np.ndarray:
    """Reorder the user axis (last, size 2) so column 0 is the weak user.

    ``key`` is (n, 2); the strong user has the larger key, ties making the
    lower user index strong.
    """
    strong = (key[:, 1] > key[:, 0]).astype(np.intp)
    weak = 1 - strong
    idx = np.stack([weak, strong], axis=1)
    expand = (slice(None),) + (None,) * (arr.ndim - 2)
    return np.take_along_axis(arr, idx[expand + (slice(None),)], axis=-1)


# ---------------------------------------------------------------------------
# CGI chunk evaluation
# ---------------------------------------------------------------------------

def _eval_cgi_chunk(gains: np.ndarray, spec: ExperimentSpec, r_t: float | None,
                    budgets: dict[str, PowerBudget], sigma2: float = 1.0):
    """Per-trial objective (and outage mask) for every scheme on one shared
    batch of channel gains, shape (n, 7, 2)."""
    n = gains.shape[0]
    rows = np.arange(n)
    ordered = _order_cols_by(gains[:, 0, :], gains)
    a, b = ordered[:, 0, 0], ordered[:, 0, 1]
    rru_w_all, rru_s_all = ordered[:, 1:, 0], ordered[:, 1:, 1]
    out: dict[str, tuple[np.ndarray, np.ndarray | None]] = {}
    for variant in spec.schemes:
        budget = budgets[variant.token]
        kind = variant.kind
        if kind in (SchemeKind.NOMA_SINGLE_SELECTION, SchemeKind.NOMA_BLANKET):
            if kind is SchemeKind.NOMA_SINGLE_SELECTION:
                q = np.argmax(rru_w_all, axis=1)
                w = budget.p_rru * rru_w_all[rows, q]
                s = budget.p_rru * rru_s_all[rows, q]
            else:
                w = budget.p_rru * rru_w_all.sum(axis=1)
                s = budget.p_rru * rru_s_all.sum(axis=1)
            if spec.objective == "maxmin":
                _, obj = maxmin_power_split(a, b, w, s, budget.p_cen, sigma2)
                out[variant.token] = (obj, None)
            else:
                _, obj, outage = maxsum_power_split(a, b, w, s, budget.p_cen,
                                                    sigma2, r_t)
                out[variant.token] = (obj, outage)
        elif kind is SchemeKind.CONVENTIONAL_NOMA:
            zero = np.zeros_like(a)
            if spec.objective == "maxmin":
                _, obj = maxmin_power_split(a, b, zero, zero, budget.p_cen, sigma2)
                out[variant.token] = (obj, None)
            else:
                _, obj, outage = maxsum_power_split(a, b, zero, zero, budget.p_cen,
                                                    sigma2, r_t)
                out[variant.token] = (obj, outage)
        elif kind is SchemeKind.CONVENTIONAL_SINGLE_SELECTION:
            rru_u1 = gains[:, 1:, 0]
            q = np.argmax(rru_u1, axis=1)
            gq1 = rru_u1[rows, q]
            gq2 = gains[:, 1:, 1][rows, q]
            r1 = log2_1p(gq1 * budget.p_rru / (gains[:, 0, 0] * budget.p_cen + sigma2))
            r2 = log2_1p(gains[:, 0, 1] * budget.p_cen / (gq2 * budget.p_rru + sigma2))
            if spec.objective == "maxmin":
                out[variant.token] = (np.minimum(r1, r2), None)
            else:
                outage = np.minimum(r1, r2) < r_t
                out[variant.token] = (np.where(outage, 0.0, r1 + r2), outage)
        elif kind is SchemeKind.JT_NOMA:
            qvec = np.full(7, budget.p_rru)
            qvec[0] = budget.p_cen
            h1 = gains[:, :, 0] @ qvec
            h2 = gains[:, :, 1] @ qvec
            if spec.objective == "maxmin":
                _, obj = jt_maxmin_ratio(h1, h2, sigma2)
                out[variant.token] = (obj, None)
            else:
                _, obj, outage = jt_maxsum_ratio(h1, h2, sigma2, r_t)
                out[variant.token] = (obj, outage)
        else:  # pragma: no cover - exhaustive over SchemeKind
            raise ConfigError(f"unsupported scheme {variant.token}")
    return out


def _run_cgi_point(spec: ExperimentSpec, geometry: NetworkGeometry,
                   config: SimulatorConfig, point_index: int, jobs: int):
    sweep_value = spec.sweep_values[point_index]
    snr_db = sweep_value if spec.sweep_axis is SweepAxis.TRANSMIT_SNR_DB else spec.snr_db
    p_total = 10.0 ** (snr_db / 10.0)
    if spec.sweep_axis is SweepAxis.MIN_RATE_RT:
        r_t = float(sweep_value)
    else:
        r_t = spec.qos.r_t if spec.qos is not None else None
    budgets = {v.token: v.budget(p_total, config.center_fraction) for v in spec.schemes}

    fixed_L = None
    if spec.placement == "fig2":
        placement = UserPlacement(
            user1=np.array([float(sweep_value), 0.0]),
            user2=np.array([spec.near_distance, 0.0]),
        )
        fixed_L = slow_fading_matrix(geometry, placement)

    sizes = _chunk_sizes(spec.trials, CGI_CHUNK_TRIALS)

    def run_chunk(chunk_index: int):
        n = sizes[chunk_index]
        rng = _chunk_rng(spec.seed, chunk_index)
        if fixed_L is not None:
            L = np.broadcast_to(fixed_L, (n, 7, 2))
        else:
            far, near = sample_placements_rings(rng, n, geometry)
            L = _slow_fading_rows(geometry, far, near)
        gains = L * _sample_fading(rng, (n, 7, 2))
        return _eval_cgi_chunk(gains, spec, r_t, budgets)

    chunk_results = _map_chunks(run_chunk, len(sizes), jobs)
    accums = {v.token: _Accum() for v in spec.schemes}
    for result in chunk_results:
        for token, (values, outage) in result.items():
            accums[token].add(values, outage)
    return [accums[v.token].row(sweep_value, v.token) for v in spec.schemes]


# ---------------------------------------------------------------------------
# CDI chunk evaluation (ergodic upper bounds + Monte-Carlo lower bounds)
# ---------------------------------------------------------------------------

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def _jt_cdi_maxmin_rows(L: np.ndarray, budget: PowerBudget, sigma2: float,
                        tol: float):
    """Vectorized golden-section max-min over beta on the ergodic closed
    forms, one row per placement.  Returns (beta, objective)."""
    powers = np.full(L.shape[1], budget.p_rru)
    powers[0] = budget.p_cen
    prods = L * powers[None, :, None]
    col_sums = prods.sum(axis=1)
    ordered = _order_cols_by(col_sums, prods)
    res_w, wts_w = mixture_weights_rows(ordered[:, :, 0])
    res_s, wts_s = mixture_weights_rows(ordered[:, :, 1])
    full_w = np.sum(wts_w * ergodic_capacity_C(1, res_w / sigma2), axis=1)
    full_s = np.sum(wts_s * ergodic_capacity_C(1, res_s / sigma2), axis=1)

    def scaled(res, wts, y):
        vals = np.zeros(res.shape[0])
        pos = y > 0.0
        if np.any(pos):
            arg = y[pos, None] * res[pos] / sigma2
            vals[pos] = np.sum(wts[pos] * ergodic_capacity_C(1, arg), axis=1)
        return vals

    def objective(beta):
        y = 1.0 - beta
        sw = scaled(res_w, wts_w, y)
        ss = scaled(res_s, wts_s, y)
        ez1 = full_w - sw
        ez2 = full_s - ss
        return np.minimum(np.minimum(ez1, ez2), ss)

    lo = np.zeros(L.shape[0])
    hi = np.ones(L.shape[0])
    c = hi - _INVPHI * (hi - lo)
    d = lo + _INVPHI * (hi - lo)
    fc, fd = objective(c), objective(d)
    iterations = max(1, math.ceil(math.log(tol) / math.log(_INVPHI)))
    for _ in range(iterations):
        left = fc >= fd
        hi = np.where(left, d, hi)
        lo = np.where(left, lo, c)
        c = hi - _INVPHI * (hi - lo)
        d = lo + _INVPHI * (hi - lo)
        fc, fd = objective(c), objective(d)
    beta = 0.5 * (lo + hi)
    return beta, objective(beta)


def _run_cdi_point(spec: ExperimentSpec, geometry: NetworkGeometry,
                   config: SimulatorConfig, point_index: int, jobs: int):
    sweep_value = spec.sweep_values[point_index]
    snr_db = sweep_value if spec.sweep_axis is SweepAxis.TRANSMIT_SNR_DB else spec.snr_db
    p_total = 10.0 ** (snr_db / 10.0)
    sigma2 = 1.0
    budgets = {v.token: v.budget(p_total, config.center_fraction) for v in spec.schemes}
    base_kinds = []
    for variant in spec.schemes:
        key = (variant.kind, variant.power)
        if key not in base_kinds:
            base_kinds.append(key)
    sizes = _chunk_sizes(spec.trials, CDI_CHUNK_PLACEMENTS)
    m = spec.fading_draws

    def run_chunk(chunk_index: int):
        n = sizes[chunk_index]
        rng = _chunk_rng(spec.seed, chunk_index)
        far, near = sample_placements_rings(rng, n, geometry)
        L = _slow_fading_rows(geometry, far, near)
        ordered = _order_cols_by(L[0:n, 0, :], L)
        fading = _sample_fading(rng, (n, m, 7, 2))
        rows = np.arange(n)
        result: dict[tuple[SchemeKind, str, str], np.ndarray] = {}
        for kind, power in base_kinds:
            budget = PowerBudget.das_split(p_total, config.center_fraction)
            for variant in spec.schemes:
                if (variant.kind, variant.power) == (kind, power):
                    budget = budgets[variant.token]
                    break
            if kind is SchemeKind.JT_NOMA:
                beta, upper = _jt_cdi_maxmin_rows(ordered, budget, sigma2,
                                                 config.beta_tolerance)
                powers = np.full(7, budget.p_rru)
                powers[0] = budget.p_cen
                comp = np.einsum("nmij,i->nmj",
                                 ordered[:, None, :, :] * fading, powers)
                z1, z2, r2 = jt_rate_components(comp[:, :, 0], comp[:, :, 1],
                                                beta[:, None], sigma2)
                lower = np.minimum(np.minimum(z1, z2), r2).mean(axis=1)
            else:
                p1, r1_ub, r2_ub = maxmin_cdi_bisection_batch(
                    ordered, budget, kind, sigma2,
                    epsilon=config.bisection_epsilon * budget.p_cen,
                )
                upper = np.minimum(r1_ub, r2_ub)
                gains = ordered[:, None, :, :] * fading
                aa, bb = gains[:, :, 0, 0], gains[:, :, 0, 1]
                if kind is SchemeKind.NOMA_SINGLE_SELECTION:
                    q = np.argmax(ordered[:, 1:, 0], axis=1)
                    w = budget.p_rru * gains[:, :, 1:, 0][rows, :, q]
                    s = budget.p_rru * gains[:, :, 1:, 1][rows, :, q]
                elif kind is SchemeKind.NOMA_BLANKET:
                    w = budget.p_rru * gains[:, :, 1:, 0].sum(axis=2)
                    s = budget.p_rru * gains[:, :, 1:, 1].sum(axis=2)
                else:
                    w = np.zeros_like(aa)
                    s = np.zeros_like(bb)
                z1, z2, r2 = noma_rate_components(aa, bb, w, s, p1[:, None],
                                                 budget.p_cen, sigma2)
                lower = np.minimum(np.minimum(z1, z2), r2).mean(axis=1)
            result[(kind, power, "upper")] = upper
            result[(kind, power, "lower")] = lower
        return result

    chunk_results = _map_chunks(run_chunk, len(sizes), jobs)
    accums = {v.token: _Accum() for v in spec.schemes}
    for result in chunk_results:
        for variant in spec.schemes:
            values = result[(variant.kind, variant.power, variant.bound)]
            accums[variant.token].add(values, None)
    return [accums[v.token].row(sweep_value, v.token) for v in spec.schemes]


def _map_chunks(fn, count: int, jobs: int):
    if jobs <= 1 or count <= 1:
        return [fn(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, range(count)))


# ---------------------------------------------------------------------------
# public runners
# ---------------------------------------------------------------------------

def run_custom(spec: ExperimentSpec, config: SimulatorConfig | None = None,
               jobs: int = 1) -> list[ResultRow]:
    """Run any validated experiment spec and return rows in sweep order."""
    if config is None:
        config = SimulatorConfig()
    geometry = default_geometry(alpha=config.alpha,
                                ring_radius=config.rru_ring_radius)
    runner = (_run_cdi_point if spec.csi_mode is CsiMode.CDI_ONLY
              else _run_cgi_point)
    rows: list[ResultRow] = []
    for point_index in range(len(spec.sweep_values)):
        rows.extend(runner(spec, geometry, config, point_index, jobs))
    return rows


def _cgi_scheme_set() -> tuple[SchemeVariant, ...]:
    return (
        SchemeVariant(SchemeKind.NOMA_SINGLE_SELECTION),
        SchemeVariant(SchemeKind.NOMA_BLANKET),
        SchemeVariant(SchemeKind.CONVENTIONAL_NOMA, power="centralized"),
        SchemeVariant(SchemeKind.CONVENTIONAL_SINGLE_SELECTION),
        SchemeVariant(SchemeKind.CONVENTIONAL_SINGLE_SELECTION, power="equal_split"),
        SchemeVariant(SchemeKind.JT_NOMA),
    )


def _maxsum_scheme_set() -> tuple[SchemeVariant, ...]:
    """Sum-rate figures compare the schemes with a power-allocation knob;
    the fixed-split single-selection baseline has none."""
    return (
        SchemeVariant(SchemeKind.NOMA_SINGLE_SELECTION),
        SchemeVariant(SchemeKind.NOMA_BLANKET),
        SchemeVariant(SchemeKind.CONVENTIONAL_NOMA, power="centralized"),
        SchemeVariant(SchemeKind.JT_NOMA),
    )


def _cdi_scheme_set() -> tuple[SchemeVariant, ...]:
    out = []
    for kind in (SchemeKind.NOMA_SINGLE_SELECTION, SchemeKind.NOMA_BLANKET,
                 SchemeKind.CONVENTIONAL_NOMA, SchemeKind.JT_NOMA):
        power = "centralized" if kind is SchemeKind.CONVENTIONAL_NOMA else "das_split"
        out.append(SchemeVariant(kind, power=power, bound="upper"))
        out.append(SchemeVariant(kind, power=power, bound="lower"))
    return tuple(out)


def fig2_spec(trials: int = DEFAULT_TRIALS, seed: int = 0,
              schemes: tuple[SchemeVariant, ...] | None = None) -> ExperimentSpec:
    return ExperimentSpec(
        name="fig2", sweep_axis=SweepAxis.FAR_DISTANCE,
        sweep_values=FIG2_DISTANCES,
        schemes=schemes or _cgi_scheme_set(),
        csi_mode=CsiMode.INSTANTANEOUS_CGI, objective="maxmin",
        placement="fig2", trials=trials, seed=seed, snr_db=10.0,
    )


def fig3_spec(trials: int = DEFAULT_TRIALS, seed: int = 0,
              snr_db: tuple[float, ...] = SNR_SWEEP_DB,
              schemes: tuple[SchemeVariant, ...] | None = None) -> ExperimentSpec:
    return ExperimentSpec(
        name="fig3", sweep_axis=SweepAxis.TRANSMIT_SNR_DB,
        sweep_values=tuple(snr_db),
        schemes=schemes or _cgi_scheme_set(),
        csi_mode=CsiMode.INSTANTANEOUS_CGI, objective="maxmin",
        placement="rings", trials=trials, seed=seed,
    )


def fig4_spec(trials: int = DEFAULT_CDI_PLACEMENTS, seed: int = 0,
              snr_db: tuple[float, ...] = SNR_SWEEP_DB,
              fading_draws: int = DEFAULT_FADING_DRAWS,
              schemes: tuple[SchemeVariant, ...] | None = None) -> ExperimentSpec:
    return ExperimentSpec(
        name="fig4", sweep_axis=SweepAxis.TRANSMIT_SNR_DB,
        sweep_values=tuple(snr_db),
        schemes=schemes or _cdi_scheme_set(),
        csi_mode=CsiMode.CDI_ONLY, objective="maxmin",
        placement="rings", trials=trials, seed=seed, fading_draws=fading_draws,
    )


def fig5_spec(trials: int = DEFAULT_TRIALS, seed: int = 0,
              rt_values: tuple[float, ...] = FIG5_RT_VALUES,
              schemes: tuple[SchemeVariant, ...] | None = None) -> ExperimentSpec:
    return ExperimentSpec(
        name="fig5", sweep_axis=SweepAxis.MIN_RATE_RT,
        sweep_values=tuple(rt_values),
        schemes=schemes or _maxsum_scheme_set(),
        csi_mode=CsiMode.INSTANTANEOUS_CGI, objective="maxsum",
        placement="rings", trials=trials, seed=seed, snr_db=10.0,
    )


def fig6_spec(trials: int = DEFAULT_TRIALS, seed: int = 0,
              snr_db: tuple[float, ...] = SNR_SWEEP_DB, r_t: float = 2.0,
              schemes: tuple[SchemeVariant, ...] | None = None) -> ExperimentSpec:
    return ExperimentSpec(
        name="fig6", sweep_axis=SweepAxis.TRANSMIT_SNR_DB,
        sweep_values=tuple(snr_db),
        schemes=schemes or _maxsum_scheme_set(),
        csi_mode=CsiMode.INSTANTANEOUS_CGI, objective="maxsum",
        placement="rings", trials=trials, seed=seed, qos=QosConstraint(r_t),
    )


def run_fig2(spec: ExperimentSpec | None = None, **kwargs) -> list[ResultRow]:
    return run_custom(spec or fig2_spec(), **kwargs)


def run_fig3(spec: ExperimentSpec | None = None, **kwargs) -> list[ResultRow]:
    return run_custom(spec or fig3_spec(), **kwargs)


def run_fig4(spec: ExperimentSpec | None = None, **kwargs) -> list[ResultRow]:
    return run_custom(spec or fig4_spec(), **kwargs)


def run_fig5(spec: ExperimentSpec | None = None, **kwargs) -> list[ResultRow]:
    return run_custom(spec or fig5_spec(), **kwargs)


def run_fig6(spec: ExperimentSpec | None = None, **kwargs) -> list[ResultRow]:
    return run_custom(spec or fig6_spec(), **kwargs)


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

CSV_HEADER = "sweep_value,scheme,metric_mean,metric_stderr,outage_rate,trials"


def format_csv(rows: list[ResultRow]) -> str:
    if not rows:
        raise ValueError("no rows to serialize")
    lines = [CSV_HEADER]
    for r in rows:
        lines.append(
            f"{r.sweep_value:.12g},{r.scheme},{r.metric_mean:.12g},"
            f"{r.metric_stderr:.12g},{r.outage_rate:.12g},{r.trials}"
        )
    return "\n".join(lines) + "\n"


def emit_csv(rows: list[ResultRow], path: str | Path) -> None:
    """Write rows to ``path`` in the stable CSV schema (UTF-8, 12 significant
    digits, trailing newline)."""
    text = format_csv(rows)
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write CSV to {path}: {exc}") from exc


def emit_plot(rows: list[ResultRow], path: str | Path, title: str = "") -> None:
    """Optional companion line chart (one line per scheme token)."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    tokens: list[str] = []
    for r in rows:
        if r.scheme not in tokens:
            tokens.append(r.scheme)
    for token in tokens:
        pts = [(r.sweep_value, r.metric_mean) for r in rows if r.scheme == token]
        xs, ys = zip(*pts)
        ax.plot(xs, ys, marker="o", markersize=3, label=token)
    ax.set_xlabel("sweep value")
    ax.set_ylabel("rate (bits/s/Hz)")
    if title:
        ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    try:
        fig.savefig(path)
    except OSError as exc:
        raise OSError(f"cannot write plot to {path}: {exc}") from exc
    finally:
        plt.close(fig)
