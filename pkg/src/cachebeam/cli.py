"""Command-line harness.

Subcommands: rate-sweep, ergodic-sweep, ic-sweep, dof, verify, plot.
Parameters come from an optional flat key=value config file with CLI
flags taking precedence. Exit codes: 0 success, 1 usage or I/O error,
2 finished but with numerical warnings, 3 invariant violation.
"""
from __future__ import annotations

import argparse
import sys
import warnings

from .combinatorics import BASELINE, MACC, SystemParams
from .errors import InvariantViolationError, NumericalWarning
from .interference import IcParams
from .plotting import render_plot
from .sweeps import (
    SweepConfig,
    parse_config,
    run_dof,
    run_ergodic_sweep,
    run_ic_sweep,
    run_rate_sweep,
    run_verify,
)

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the contract here is 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_common(sub, schemes_help):
    sub.add_argument("--config", help="flat key=value config file")
    sub.add_argument("--snr-db", nargs="+", type=float, metavar="DB",
                     help="SNR grid in dB (ascending)")
    sub.add_argument("--scheme", nargs="+", metavar="ID", help=schemes_help)
    sub.add_argument("--trials", type=int, help="channel draws per point")
    sub.add_argument("--seed", type=int, help="base RNG seed (default 0)")
    sub.add_argument("--out", help="output CSV path")
    sub.add_argument("--fig", dest="fig_out", metavar="SVG",
                     help="figure path (default: CSV path with .svg)")
    sub.add_argument("--no-fig", action="store_true",
                     help="skip figure rendering")
    sub.add_argument("--workers", type=int, help="parallel worker processes")


def _add_downlink(sub):
    sub.add_argument("--users", type=int, help="number of receiving users K")
    sub.add_argument("--library", type=int, help="number of library files N")
    sub.add_argument("--cache", type=float, help="per-user cache size M in files")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cachebeam",
                     description="Finite-SNR rate sweeps for cache-aided "
                                 "multi-antenna downlink schemes.")
    subs = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    rate = subs.add_parser("rate-sweep", help="symmetric rate vs SNR")
    _add_downlink(rate)
    rate.add_argument("--antennas", type=int, help="transmit antennas L")
    _add_common(rate, "scheme ids: MMFM MACC-CF MACC-CF-opt MACC-FF MACC-FF-opt")

    erg = subs.add_parser("ergodic-sweep", help="ergodic rate vs SNR (or vs antennas)")
    _add_downlink(erg)
    erg.add_argument("--antennas", type=int, nargs="+",
                     help="antenna count(s); several values sweep L")
    _add_common(erg, "scheme ids: MMFM MACC-FF")

    ic = subs.add_parser("ic-sweep", help="interference-channel rate vs SNR")
    ic.add_argument("--transmitters", type=int, help="cached transmitters")
    ic.add_argument("--receivers", type=int, help="cached receivers")
    ic.add_argument("--library", type=int, help="number of library files N")
    ic.add_argument("--tx-cache", type=float, help="transmitter cache size in files")
    ic.add_argument("--rx-cache", type=float, help="receiver cache size in files")
    _add_common(ic, "per-sub-library scheme ids: MMFM MACC-CF MACC-FF (+-opt)")

    dof = subs.add_parser("dof", help="analytic vs empirical high-SNR slope")
    _add_downlink(dof)
    dof.add_argument("--antennas", type=int, help="transmit antennas L")
    dof.add_argument("--scheme", nargs="+", metavar="ID",
                     help="scheme ids (default: MMFM MACC-FF)")
    dof.add_argument("--draws", type=int, help="channel draws (default 20)")
    dof.add_argument("--seed", type=int, help="base RNG seed")
    dof.add_argument("--out", help="output CSV path")
    dof.add_argument("--config", help="flat key=value config file")

    ver = subs.add_parser("verify", help="exhaustive placement/delivery decode check")
    _add_downlink(ver)
    ver.add_argument("--antennas", type=int, help="transmit antennas L")
    ver.add_argument("--scheme", nargs="+", choices=[BASELINE, MACC],
                     help="placement schemes to check (default: both)")
    ver.add_argument("--file-bytes", type=int, help="file size override in bytes")
    ver.add_argument("--seed", type=int, help="library content seed")
    ver.add_argument("--config", help="flat key=value config file")

    plot = subs.add_parser("plot", help="render a sweep CSV to SVG")
    plot.add_argument("--csv", required=True, help="sweep CSV to plot")
    plot.add_argument("--out", required=True, help="output SVG path")
    plot.add_argument("--x-axis", choices=["snr", "antennas"], default="snr")
    plot.add_argument("--title", help="figure title")
    return parser


def _load_config(args) -> dict[str, str]:
    if not getattr(args, "config", None):
        return {}
    try:
        with open(args.config, encoding="utf-8") as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise ValueError(f"cannot read config {args.config}: {exc}") from exc


def _pick(args, cfg, flag, key=None, parse=None, default=None):
    """Flag beats config beats default."""
    value = getattr(args, flag, None)
    if value is not None:
        return value
    raw = cfg.get(key or flag)
    if raw is not None:
        return parse(raw) if parse else raw
    return default


def _parse_float_list(raw: str):
    return tuple(float(tok) for tok in raw.replace(",", " ").split())


def _parse_int_list(raw: str):
    return tuple(int(tok) for tok in raw.replace(",", " ").split())


def _parse_str_list(raw: str):
    return tuple(raw.replace(",", " ").split())


def _parse_bool(raw: str) -> bool:
    low = raw.strip().lower()
    if low in _TRUE:
        return True
    if low in _FALSE:
        return False
    raise ValueError(f"expected a boolean, got {raw!r}")


def _require(cfg_value, name):
    if cfg_value is None:
        raise ValueError(f"missing required parameter: {name}")
    return cfg_value


def _downlink_params(args, cfg, antennas) -> SystemParams:
    return SystemParams(
        num_users=_require(_pick(args, cfg, "users", parse=int), "users"),
        library_size=_require(_pick(args, cfg, "library", parse=int), "library"),
        cache_size=_require(_pick(args, cfg, "cache", parse=float), "cache"),
        num_antennas=antennas,
    )


def _common_config(args, cfg, default_trials, default_schemes=()) -> dict:
    fig_out = _pick(args, cfg, "fig_out")
    no_fig = bool(getattr(args, "no_fig", False))
    fig = (not no_fig) and _pick(args, cfg, "_never_", key="fig",
                                 parse=_parse_bool, default=True)
    schemes = _pick(args, cfg, "scheme", key="schemes", parse=_parse_str_list,
                    default=default_schemes)
    return dict(
        snr_db=tuple(_pick(args, cfg, "snr_db", parse=_parse_float_list,
                           default=SweepConfig.snr_db)),
        schemes=tuple(schemes),
        trials=_pick(args, cfg, "trials", parse=int, default=default_trials),
        seed=_pick(args, cfg, "seed", parse=int, default=0),
        out=_pick(args, cfg, "out"),
        fig=fig,
        fig_out=fig_out,
        workers=_pick(args, cfg, "workers", parse=int, default=1),
    )


DEFAULT_RATE_SCHEMES = ("MMFM", "MACC-CF", "MACC-CF-opt", "MACC-FF", "MACC-FF-opt")


def _cmd_rate_sweep(args) -> int:
    cfg = _load_config(args)
    antennas = _require(_pick(args, cfg, "antennas", parse=int), "antennas")
    config = SweepConfig(
        params=_downlink_params(args, cfg, antennas),
        **_common_config(args, cfg, 500, DEFAULT_RATE_SCHEMES),
    )
    path = run_rate_sweep(config)
    print(path)
    return 0


def _cmd_ergodic_sweep(args) -> int:
    cfg = _load_config(args)
    antennas = _require(_pick(args, cfg, "antennas", parse=_parse_int_list), "antennas")
    if isinstance(antennas, int):
        antennas = (antennas,)
    antennas = tuple(antennas)
    config = SweepConfig(
        params=_downlink_params(args, cfg, antennas[0]),
        antennas_sweep=antennas,
        **_common_config(args, cfg, 2000, ("MMFM", "MACC-FF")),
    )
    path = run_ergodic_sweep(config)
    print(path)
    return 0


def _cmd_ic_sweep(args) -> int:
    cfg = _load_config(args)
    icp = IcParams(
        num_transmitters=_require(_pick(args, cfg, "transmitters", parse=int),
                                  "transmitters"),
        num_receivers=_require(_pick(args, cfg, "receivers", parse=int), "receivers"),
        library_size=_require(_pick(args, cfg, "library", parse=int), "library"),
        transmitter_cache=_require(_pick(args, cfg, "tx_cache", parse=float),
                                   "tx_cache"),
        receiver_cache=_require(_pick(args, cfg, "rx_cache", parse=float), "rx_cache"),
    )
    config = SweepConfig(ic=icp, **_common_config(args, cfg, 500, ("MACC-FF",)))
    path = run_ic_sweep(config)
    print(path)
    return 0


def _cmd_dof(args) -> int:
    cfg = _load_config(args)
    antennas = _require(_pick(args, cfg, "antennas", parse=int), "antennas")
    config = SweepConfig(
        params=_downlink_params(args, cfg, antennas),
        schemes=tuple(_pick(args, cfg, "scheme", key="schemes",
                            parse=_parse_str_list, default=("MMFM", "MACC-FF"))),
        draws=_pick(args, cfg, "draws", parse=int, default=20),
        seed=_pick(args, cfg, "seed", parse=int, default=0),
        out=_pick(args, cfg, "out"),
        fig=False,
    )
    path = run_dof(config)
    print(path)
    return 0


def _cmd_verify(args) -> int:
    cfg = _load_config(args)
    antennas = _require(_pick(args, cfg, "antennas", parse=int), "antennas")
    config = SweepConfig(
        params=_downlink_params(args, cfg, antennas),
        seed=_pick(args, cfg, "seed", parse=int, default=0),
        file_bytes=_pick(args, cfg, "file_bytes", parse=int),
        fig=False,
        schemes=(),
    )
    schemes = _pick(args, cfg, "scheme", key="schemes", parse=_parse_str_list,
                    default=(BASELINE, MACC))
    ok, lines = run_verify(config, schemes=tuple(schemes))
    for line in lines:
        print(line)
    if not ok:
        print("verification FAILED", file=sys.stderr)
        return 3
    return 0


def _cmd_plot(args) -> int:
    path = render_plot(args.csv, args.out, x_axis=args.x_axis, title=args.title)
    print(path)
    return 0


_COMMANDS = {
    "rate-sweep": _cmd_rate_sweep,
    "ergodic-sweep": _cmd_ergodic_sweep,
    "ic-sweep": _cmd_ic_sweep,
    "dof": _cmd_dof,
    "verify": _cmd_verify,
    "plot": _cmd_plot,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handler = _COMMANDS[args.command]
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            code = handler(args)
        numeric = [w for w in caught if issubclass(w.category, NumericalWarning)]
        for w in numeric:
            print(f"warning: {w.message}", file=sys.stderr)
        if code == 0 and numeric:
            return 2
        return code
    except InvariantViolationError as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 3
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
