"""Monte-Carlo simulator for two-user NOMA power allocation in a single-cell
distributed antenna system (one center BS plus six ring RRUs).

The package splits into five layers: cell geometry and user placement
(:mod:`noma_das.geometry`), channel draws and CSI ordering
(:mod:`noma_das.channel`), exponential-integral special functions and ergodic
capacity mixtures (:mod:`noma_das.specfun`), per-scheme rate expressions
(:mod:`noma_das.rates`), closed-form and iterative power allocators
(:mod:`noma_das.allocators`), and the sweep harness plus CLI on top
(:mod:`noma_das.harness`, :mod:`noma_das.cli`).
"""
from .allocators import (
    AllocationResult,
    QosConstraint,
    brute_force_allocate,
    golden_section_max,
    jt_beta_search,
    jt_maxmin_ratio,
    jt_maxsum_ratio,
    maxmin_cdi_bisection,
    maxmin_cdi_bisection_batch,
    maxmin_cgi,
    maxmin_power_split,
    maxsum_cgi,
    maxsum_power_split,
)
from .channel import ChannelRealization, CsiMode, order_users, sample_channel
from .config import ConfigError, SimulatorConfig, load_config
from .geometry import (
    NetworkGeometry,
    UserPlacement,
    default_geometry,
    pathloss,
    sample_placement_fig2,
    sample_placement_rings,
    sample_placements_rings,
    slow_fading_matrix,
)
from .harness import (
    ExperimentSpec,
    ResultRow,
    SchemeVariant,
    SweepAxis,
    emit_csv,
    emit_plot,
    format_csv,
    run_custom,
    run_fig2,
    run_fig3,
    run_fig4,
    run_fig5,
    run_fig6,
)
from .rates import (
    PowerBudget,
    SchemeKind,
    ergodic_rates_noma,
    jt_ergodic_rates,
    rates_conventional_noma,
    rates_conventional_single_selection,
    rates_jt_noma,
    rates_noma_blanket,
    rates_noma_single,
)
from .specfun import (
    ergodic_capacity_C,
    exp_integral_E,
    exp_integral_quadrature,
    exp_integral_scaled,
    mixture_weights,
)

__all__ = [
    "AllocationResult",
    "ChannelRealization",
    "ConfigError",
    "CsiMode",
    "ExperimentSpec",
    "NetworkGeometry",
    "PowerBudget",
    "QosConstraint",
    "ResultRow",
    "SchemeKind",
    "SchemeVariant",
    "SimulatorConfig",
    "SweepAxis",
    "UserPlacement",
    "brute_force_allocate",
    "default_geometry",
    "emit_csv",
    "emit_plot",
    "ergodic_capacity_C",
    "ergodic_rates_noma",
    "exp_integral_E",
    "exp_integral_quadrature",
    "exp_integral_scaled",
    "format_csv",
    "golden_section_max",
    "jt_beta_search",
    "jt_ergodic_rates",
    "jt_maxmin_ratio",
    "jt_maxsum_ratio",
    "load_config",
    "maxmin_cdi_bisection",
    "maxmin_cdi_bisection_batch",
    "maxmin_cgi",
    "maxmin_power_split",
    "maxsum_cgi",
    "maxsum_power_split",
    "mixture_weights",
    "order_users",
    "pathloss",
    "rates_conventional_noma",
    "rates_conventional_single_selection",
    "rates_jt_noma",
    "rates_noma_blanket",
    "rates_noma_single",
    "run_custom",
    "run_fig2",
    "run_fig3",
    "run_fig4",
    "run_fig5",
    "run_fig6",
    "sample_channel",
    "sample_placement_fig2",
    "sample_placement_rings",
    "sample_placements_rings",
    "slow_fading_matrix",
]

__version__ = "0.1.0"
