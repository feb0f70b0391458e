"""Sweep orchestration: config parsing, Monte-Carlo drivers, CSV output.

Config files are flat ``key = value`` text (``#`` comments, blank lines
ignored); list values are whitespace- or comma-separated. The drivers
convert dB to linear SNR at this boundary only, average per-draw rates
over seeded channel trials, and write one CSV row per (snr_db, scheme)
with all floats at 9 significant digits, rows sorted, so a fixed config
and seed reproduce every output byte.
"""
from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .channel import sample_rayleigh
from .combinatorics import BASELINE, MACC, SystemParams, verify_decode
from .dof import dof_analytic, dof_empirical
from .ergodic import ergodic_baseline, ergodic_macc_ff
from .interference import IcParams, ic_rate, sample_ic_rayleigh
from .rates import (
    MACC_FF,
    MMFM,
    macc_gain_table,
    macc_rate_from_table,
    mmfm_gain_table,
    mmfm_rate_from_table,
)

SCHEME_IDS = ("MMFM", "MACC-CF", "MACC-CF-opt", "MACC-FF", "MACC-FF-opt")
CSV_HEADER = "snr_db,scheme,rate_mean,rate_stderr,trials,seed"
DOF_HEADER = "scheme,dof_analytic,dof_empirical,draws,seed"
DEFAULT_SNR_DB = tuple(float(x) for x in range(0, 45, 5))


def parse_scheme(scheme_id: str) -> tuple[str, bool]:
    """Split a CLI scheme id into (core scheme, power-optimized flag)."""
    if scheme_id not in SCHEME_IDS:
        raise ValueError(
            f"unknown scheme {scheme_id!r}; choose from {', '.join(SCHEME_IDS)}"
        )
    if scheme_id.endswith("-opt"):
        return scheme_id[:-4], True
    return scheme_id, False


def parse_config(text: str) -> dict[str, str]:
    """Flat key=value lines; later keys override earlier ones."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected key = value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip().lower().replace("-", "_")
        if not key:
            raise ValueError(f"config line {lineno}: empty key")
        out[key] = value.strip()
    return out


def _parse_floats(value: str) -> tuple[float, ...]:
    return tuple(float(tok) for tok in value.replace(",", " ").split())


def _parse_ints(value: str) -> tuple[int, ...]:
    return tuple(int(tok) for tok in value.replace(",", " ").split())


@dataclass(frozen=True)
class SweepConfig:
    """Everything one sweep run needs; built from config file plus flags."""

    params: SystemParams | None = None
    ic: IcParams | None = None
    snr_db: tuple[float, ...] = DEFAULT_SNR_DB
    schemes: tuple[str, ...] = ()
    trials: int = 500
    seed: int = 0
    out: str | None = None
    fig: bool = True
    fig_out: str | None = None
    workers: int = 1
    antennas_sweep: tuple[int, ...] | None = None
    draws: int = 20
    file_bytes: int | None = None

    def __post_init__(self):
        if not self.snr_db:
            raise ValueError("snr_db must not be empty")
        if list(self.snr_db) != sorted(self.snr_db):
            raise ValueError("snr_db values must be ascending")
        if len(set(self.snr_db)) != len(self.snr_db):
            raise ValueError("snr_db values must be distinct")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    def require_schemes(self):
        if not self.schemes:
            raise ValueError("at least one scheme is required")
        for s in self.schemes:
            parse_scheme(s)


def _fmt(x: float) -> str:
    return "%.9g" % float(x)


def write_csv(path: str, header: str, rows) -> str:
    """Write pre-sorted rows of already-formatted cells; newline-terminated."""
    tmp = f"{path}.tmp{os.getpid()}"
    try:
        with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(header + "\n")
            for row in rows:
                fh.write(",".join(row) + "\n")
        os.replace(tmp, path)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    finally:
        if os.path.exists(tmp):
            os.remove(tmp)
    return path


def _mean_stderr(samples: np.ndarray) -> tuple[float, float]:
    mean = float(np.mean(samples))
    if samples.size < 2:
        return mean, 0.0
    return mean, float(np.std(samples, ddof=1) / math.sqrt(samples.size))


def _rate_trial(args) -> list[float]:
    """One channel draw evaluated at every (scheme, snr) point; module-level
    so a process pool can ship it."""
    params, schemes, snr_lin, seed, trial = args
    channel = sample_rayleigh(params, seed, trial)
    tables: dict[str, object] = {}
    values = []
    for scheme_id in schemes:
        core, power_opt = parse_scheme(scheme_id)
        if core == MMFM:
            if "mmfm" not in tables:
                tables["mmfm"] = mmfm_gain_table(params, channel)
            for snr in snr_lin:
                values.append(
                    mmfm_rate_from_table(tables["mmfm"], params, snr).symmetric_rate
                )
        else:
            if "macc" not in tables:
                tables["macc"] = macc_gain_table(params, channel)
            for snr in snr_lin:
                values.append(
                    macc_rate_from_table(
                        tables["macc"], params, core, snr, power_opt=power_opt
                    ).symmetric_rate
                )
    return values


def _ic_trial(args) -> list[float]:
    icp, schemes, snr_lin, seed, trial = args
    channel = sample_ic_rayleigh(icp, seed, trial)
    values = []
    for scheme_id in schemes:
        core, power_opt = parse_scheme(scheme_id)
        for snr in snr_lin:
            values.append(
                ic_rate(icp, snr, channel, core, power_opt=power_opt).symmetric_rate
            )
    return values


def _map_trials(worker, jobs, workers: int):
    if workers <= 1 or len(jobs) <= 1:
        return [worker(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(worker, jobs, chunksize=max(1, len(jobs) // (workers * 4))))


def _sweep_rows(config: SweepConfig, worker, job_params) -> list[list[str]]:
    """Shared trial-matrix driver for the downlink and IC sweeps."""
    config.require_schemes()
    snr_lin = tuple(10.0 ** (db / 10.0) for db in config.snr_db)
    jobs = [
        (job_params, config.schemes, snr_lin, config.seed, trial)
        for trial in range(config.trials)
    ]
    per_trial = _map_trials(worker, jobs, config.workers)
    matrix = np.asarray(per_trial)  # trials x (schemes * snrs)
    rows = []
    for si, scheme_id in enumerate(config.schemes):
        for gi, db in enumerate(config.snr_db):
            mean, stderr = _mean_stderr(matrix[:, si * len(snr_lin) + gi])
            rows.append([
                _fmt(db), scheme_id, _fmt(mean), _fmt(stderr),
                str(config.trials), str(config.seed),
            ])
    scheme_order = {s: i for i, s in enumerate(config.schemes)}
    rows.sort(key=lambda r: (float(r[0]), scheme_order[r[1]]))
    return rows


def _emit(config: SweepConfig, default_stem: str, header: str, rows) -> str:
    path = config.out if config.out else f"{default_stem}.csv"
    write_csv(path, header, rows)
    if config.fig:
        from .plotting import render_plot

        fig_path = config.fig_out if config.fig_out else _default_fig_path(path)
        x_axis = "antennas" if (config.antennas_sweep and len(config.antennas_sweep) > 1) else "snr"
        render_plot(path, fig_path, x_axis=x_axis)
    return path


def _default_fig_path(csv_path: str) -> str:
    stem, ext = os.path.splitext(csv_path)
    return f"{stem}.svg" if ext else f"{csv_path}.svg"


def run_rate_sweep(config: SweepConfig) -> str:
    """Symmetric-rate sweep over the SNR grid; returns the CSV path."""
    if config.params is None:
        raise ValueError("rate sweep needs system parameters")
    rows = _sweep_rows(config, _rate_trial, config.params)
    return _emit(config, "rate_sweep", CSV_HEADER, rows)


def run_ic_sweep(config: SweepConfig) -> str:
    """Interference-channel sweep; schemes name the per-sub-library scheme."""
    if config.ic is None:
        raise ValueError("ic sweep needs interference-channel parameters")
    rows = _sweep_rows(config, _ic_trial, config.ic)
    return _emit(config, "ic_sweep", CSV_HEADER, rows)


def _ergodic_point(args) -> tuple[float, float]:
    params, scheme_id, snr, trials, seed = args
    if scheme_id == MMFM:
        est = ergodic_baseline(params, snr, trials=trials, seed=seed)
    else:
        est = ergodic_macc_ff(params, snr, trials=trials, seed=seed)
    return est.value, est.stderr


def run_ergodic_sweep(config: SweepConfig) -> str:
    """Ergodic-rate sweep; sweeps antennas too when several are configured."""
    if config.params is None:
        raise ValueError("ergodic sweep needs system parameters")
    config.require_schemes()
    for s in config.schemes:
        if s not in (MMFM, MACC_FF):
            raise ValueError(
                f"ergodic sweep supports schemes MMFM and MACC-FF, got {s!r}"
            )
    antennas = config.antennas_sweep or (config.params.num_antennas,)
    suffix = len(antennas) > 1
    points = []
    labels = []
    for scheme_id in config.schemes:
        for l in antennas:
            params = replace(config.params, num_antennas=l)
            label = f"{scheme_id}/L{l}" if suffix else scheme_id
            for db in config.snr_db:
                points.append((params, scheme_id, 10.0 ** (db / 10.0),
                               config.trials, config.seed))
                labels.append((db, label))
    results = _map_trials(_ergodic_point, points, config.workers)
    order = {lab: i for i, lab in enumerate(dict.fromkeys(l for _, l in labels))}
    rows = [
        [_fmt(db), label, _fmt(value), _fmt(stderr), str(config.trials), str(config.seed)]
        for (db, label), (value, stderr) in zip(labels, results)
    ]
    rows.sort(key=lambda r: (float(r[0]), order[r[1]]))
    return _emit(config, "ergodic_sweep", CSV_HEADER, rows)


def run_dof(config: SweepConfig) -> str:
    """Analytic vs empirical high-SNR slope for each scheme."""
    if config.params is None:
        raise ValueError("dof needs system parameters")
    config.require_schemes()
    grid = tuple(10.0 ** (e / 2.0) for e in range(10, 19))  # 1e5 .. 1e9
    rows = []
    for scheme_id in config.schemes:
        core, power_opt = parse_scheme(scheme_id)
        if power_opt:
            raise ValueError("dof estimation uses the unoptimized schemes")
        report = dof_empirical(config.params, core, grid,
                               draws=config.draws, seed=config.seed)
        rows.append([
            scheme_id, _fmt(report.analytic), _fmt(report.empirical),
            str(config.draws), str(config.seed),
        ])
    path = config.out if config.out else "dof.csv"
    return write_csv(path, DOF_HEADER, rows)


def run_verify(config: SweepConfig, schemes=(BASELINE, MACC)) -> tuple[bool, list[str]]:
    """Exhaustive placement/delivery decode check over every demand vector."""
    if config.params is None:
        raise ValueError("verify needs system parameters")
    params = config.params
    lines = []
    all_ok = True
    for scheme in schemes:
        if scheme == MACC and params.replication + params.num_antennas > params.num_users:
            lines.append(f"SKIP scheme={scheme}: needs t+L <= K")
            continue
        failures = 0
        checked = 0
        for demands in _all_demands(params):
            report = verify_decode(params, demands, scheme, seed=config.seed,
                                   file_bytes=config.file_bytes)
            checked += 1
            if not report.ok:
                failures += 1
                if failures <= 5:
                    lines.append(
                        f"FAIL scheme={scheme} demands={demands}: "
                        + "; ".join(report.problems)
                    )
        ok = failures == 0
        all_ok = all_ok and ok
        lines.append(
            f"{'PASS' if ok else 'FAIL'} scheme={scheme}: "
            f"{checked - failures}/{checked} demand vectors decode bit-exactly"
        )
    return all_ok, lines


def _all_demands(params: SystemParams):
    return itertools.product(
        range(1, params.library_size + 1), repeat=params.num_users
    )
