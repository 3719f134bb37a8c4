"""Command-line front end: figure presets, custom sweeps, and a selftest.

Exit codes: 0 on success, 2 on configuration errors (bad flags, bad config
file, invalid spec), 1 on I/O failures and selftest failures.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import replace

import numpy as np

from .allocators import QosConstraint
from .channel import CsiMode
from .config import ConfigError, SimulatorConfig, load_config
from .harness import (
    DEFAULT_CDI_PLACEMENTS,
    DEFAULT_FADING_DRAWS,
    DEFAULT_TRIALS,
    ExperimentSpec,
    SchemeVariant,
    SweepAxis,
    emit_csv,
    emit_plot,
    fig2_spec,
    fig3_spec,
    fig4_spec,
    fig5_spec,
    fig6_spec,
    run_custom,
)
from .rates import SchemeKind
from .specfun import (
    ergodic_capacity_C,
    exp_integral_E,
    exp_integral_quadrature,
    exp_integral_scaled,
)

_BASE_VARIANTS = {
    "noma_single_selection": (SchemeKind.NOMA_SINGLE_SELECTION, "das_split"),
    "noma_blanket": (SchemeKind.NOMA_BLANKET, "das_split"),
    "conventional_noma": (SchemeKind.CONVENTIONAL_NOMA, "centralized"),
    "conventional_single_selection": (
        SchemeKind.CONVENTIONAL_SINGLE_SELECTION, "das_split"),
    "conventional_single_selection_equal": (
        SchemeKind.CONVENTIONAL_SINGLE_SELECTION, "equal_split"),
    "jt_noma": (SchemeKind.JT_NOMA, "das_split"),
}


def variant_from_token(token: str, bound: str | None = None) -> SchemeVariant:
    try:
        kind, power = _BASE_VARIANTS[token]
    except KeyError:
        raise ConfigError(f"unknown scheme token {token!r}") from None
    return SchemeVariant(kind, power=power, bound=bound)


def _parse_floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise ConfigError(f"cannot parse float list {text!r}") from None


def _add_common(parser: argparse.ArgumentParser, default_trials: int) -> None:
    parser.add_argument("--trials", type=int, default=default_trials,
                        help="channel draws (CGI) or placements (CDI) per point")
    parser.add_argument("--seed", type=int, default=0, help="base RNG seed")
    parser.add_argument("--out", default=None, help="output CSV path")
    parser.add_argument("--plot", default=None, metavar="SVG",
                        help="also write a line chart to this path")
    parser.add_argument("--config", default=None, metavar="YAML",
                        help="simulator config file")
    parser.add_argument("--jobs", type=int, default=1,
                        help="worker threads for chunk evaluation")
    parser.add_argument("--scheme", action="append", default=None,
                        metavar="TOKEN", help="restrict to this scheme "
                        "(repeatable; default: all for the figure)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="noma-das",
        description="Monte-Carlo sweeps for NOMA power allocation in a "
                    "distributed antenna cell",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p2 = sub.add_parser("fig2", help="max-min rate vs far-user distance")
    _add_common(p2, DEFAULT_TRIALS)
    p2.add_argument("--snr-db", default="10", help="operating transmit SNR in dB")

    p3 = sub.add_parser("fig3", help="max-min rate vs transmit SNR (CGI)")
    _add_common(p3, DEFAULT_TRIALS)
    p3.add_argument("--snr-db", default="0,5,10,15,20,25,30",
                    help="comma-separated SNR sweep in dB")

    p4 = sub.add_parser("fig4", help="ergodic max-min bounds vs SNR (CDI)")
    _add_common(p4, DEFAULT_CDI_PLACEMENTS)
    p4.add_argument("--snr-db", default="0,5,10,15,20,25,30",
                    help="comma-separated SNR sweep in dB")
    p4.add_argument("--fading-draws", type=int, default=DEFAULT_FADING_DRAWS,
                    help="fading draws per placement for the lower bounds")

    p5 = sub.add_parser("fig5", help="sum rate vs minimum-rate constraint")
    _add_common(p5, DEFAULT_TRIALS)
    p5.add_argument("--snr-db", default="10", help="operating transmit SNR in dB")
    p5.add_argument("--rt", default="0,0.5,1,1.5,2,2.5,3,3.5,4,4.5,5",
                    help="comma-separated rate-constraint sweep")

    p6 = sub.add_parser("fig6", help="sum rate vs transmit SNR")
    _add_common(p6, DEFAULT_TRIALS)
    p6.add_argument("--snr-db", default="0,5,10,15,20,25,30",
                    help="comma-separated SNR sweep in dB")
    p6.add_argument("--rt", default="2", help="minimum-rate constraint")

    pc = sub.add_parser("custom", help="run a fully specified sweep")
    _add_common(pc, DEFAULT_TRIALS)
    pc.add_argument("--axis", required=True,
                    choices=[a.value for a in SweepAxis])
    pc.add_argument("--values", required=True,
                    help="comma-separated sweep values")
    pc.add_argument("--objective", default="maxmin",
                    choices=["maxmin", "maxsum"])
    pc.add_argument("--csi", default="cgi", choices=["cgi", "cdi"])
    pc.add_argument("--placement", default=None, choices=["fig2", "rings"])
    pc.add_argument("--snr-db", default="10",
                    help="fixed transmit SNR when the axis is not SNR")
    pc.add_argument("--rt", default=None,
                    help="minimum-rate constraint for maxsum sweeps")
    pc.add_argument("--fading-draws", type=int, default=DEFAULT_FADING_DRAWS)

    ps = sub.add_parser("selftest",
                        help="check the special-function fast paths against "
                             "the quadrature oracle")
    ps.add_argument("--verbose", action="store_true")
    return parser


def _schemes_for(args, cdi: bool) -> tuple[SchemeVariant, ...] | None:
    if args.scheme is None:
        return None
    out = []
    for token in args.scheme:
        if cdi:
            out.append(variant_from_token(token, bound="upper"))
            out.append(variant_from_token(token, bound="lower"))
        else:
            out.append(variant_from_token(token))
    return tuple(out)


def _single_float(text: str, flag: str) -> float:
    values = _parse_floats(text)
    if len(values) != 1:
        raise ConfigError(f"{flag} expects a single value, got {text!r}")
    return values[0]


def _spec_from_args(args) -> ExperimentSpec:
    cmd = args.command
    if cmd == "fig2":
        spec = fig2_spec(trials=args.trials, seed=args.seed,
                         schemes=_schemes_for(args, cdi=False))
        snr = _single_float(args.snr_db, "--snr-db")
        if snr != spec.snr_db:
            spec = replace(spec, snr_db=snr)
        return spec
    if cmd == "fig3":
        return fig3_spec(trials=args.trials, seed=args.seed,
                         snr_db=_parse_floats(args.snr_db),
                         schemes=_schemes_for(args, cdi=False))
    if cmd == "fig4":
        return fig4_spec(trials=args.trials, seed=args.seed,
                         snr_db=_parse_floats(args.snr_db),
                         fading_draws=args.fading_draws,
                         schemes=_schemes_for(args, cdi=True))
    if cmd == "fig5":
        spec = fig5_spec(trials=args.trials, seed=args.seed,
                         rt_values=_parse_floats(args.rt),
                         schemes=_schemes_for(args, cdi=False))
        snr = _single_float(args.snr_db, "--snr-db")
        if snr != spec.snr_db:
            spec = replace(spec, snr_db=snr)
        return spec
    if cmd == "fig6":
        return fig6_spec(trials=args.trials, seed=args.seed,
                         snr_db=_parse_floats(args.snr_db),
                         r_t=_single_float(args.rt, "--rt"),
                         schemes=_schemes_for(args, cdi=False))
    if cmd == "custom":
        axis = SweepAxis(args.axis)
        cdi = args.csi == "cdi"
        placement = args.placement
        if placement is None:
            placement = "fig2" if axis is SweepAxis.FAR_DISTANCE else "rings"
        schemes = _schemes_for(args, cdi=cdi)
        if schemes is None:
            raise ConfigError("custom sweeps need at least one --scheme")
        qos = None
        if args.rt is not None:
            qos = QosConstraint(_single_float(args.rt, "--rt"))
        return ExperimentSpec(
            name="custom", sweep_axis=axis,
            sweep_values=_parse_floats(args.values), schemes=schemes,
            csi_mode=CsiMode.CDI_ONLY if cdi else CsiMode.INSTANTANEOUS_CGI,
            objective=args.objective, placement=placement,
            trials=args.trials, seed=args.seed, qos=qos,
            snr_db=_single_float(args.snr_db, "--snr-db"),
            fading_draws=args.fading_draws,
        )
    raise ConfigError(f"unknown command {cmd!r}")


def run_selftest(verbose: bool = False) -> int:
    """Compare the series / continued-fraction special functions against the
    independent quadrature oracle.  Returns a process exit code."""
    failures = 0
    checks = []
    for n in (1, 2, 3, 7):
        for x in (1e-3, 0.4, 1.0, 2.5, 30.0, 300.0):
            fast = float(exp_integral_scaled(n, x))
            slow = exp_integral_quadrature(n, x, scaled=True)
            checks.append((f"e^x E_{n}({x:g})", fast, slow, 1e-10))
    for n in (1, 4):
        for x in (0.05, 0.7, 5.0):
            fast = float(exp_integral_E(n, x))
            slow = exp_integral_quadrature(n, x, scaled=False)
            checks.append((f"E_{n}({x:g})", fast, slow, 1e-10))
    # capacity identity: C_1(x) integrates log2(1 + x z) e^(-z)
    for x in (0.5, 2.0, 10.0):
        from scipy.integrate import quad
        slow, _ = quad(lambda z: np.log2(1.0 + x * z) * np.exp(-z), 0.0, np.inf)
        fast = float(ergodic_capacity_C(1, x))
        checks.append((f"C_1({x:g})", fast, slow, 1e-9))
    for label, fast, slow, tol in checks:
        rel = abs(fast - slow) / max(abs(slow), 1e-300)
        ok = rel <= tol
        if not ok:
            failures += 1
        if verbose or not ok:
            print(f"{'PASS' if ok else 'FAIL'} {label}: fast={fast:.15g} "
                  f"oracle={slow:.15g} rel={rel:.2e}")
    print(f"selftest: {len(checks) - failures}/{len(checks)} checks passed")
    return 0 if failures == 0 else 1


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "selftest":
            return run_selftest(verbose=args.verbose)
        config = load_config(args.config) if args.config else SimulatorConfig()
        if args.jobs < 1:
            raise ConfigError("--jobs must be at least 1")
        spec = _spec_from_args(args)
        rows = run_custom(spec, config=config, jobs=args.jobs)
        out_path = args.out if args.out else f"{spec.name}.csv"
        emit_csv(rows, out_path)
        print(f"wrote {len(rows)} rows to {out_path}")
        if args.plot:
            emit_plot(rows, args.plot, title=spec.name)
            print(f"wrote plot to {args.plot}")
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
