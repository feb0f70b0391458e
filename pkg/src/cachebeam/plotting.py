"""Render sweep CSVs to static SVG figures.

One polyline per scheme in first-appearance order, x = SNR in dB (or
the antenna count parsed from "/L<n>" scheme suffixes), y = mean rate
with standard-error bars. Rendering is pinned down (fixed hash salt, no
date metadata, stable group ids) so the same CSV always produces the
same bytes.
"""
from __future__ import annotations

import csv
import io
import re

_STYLE_CYCLE = (
    ("#1f77b4", "o"),
    ("#d62728", "s"),
    ("#2ca02c", "^"),
    ("#9467bd", "v"),
    ("#ff7f0e", "D"),
    ("#8c564b", "*"),
    ("#17becf", "P"),
)


def read_sweep_csv(path: str):
    """Rows of a sweep CSV as dicts; raises ValueError on schema problems."""
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        needed = {"snr_db", "scheme", "rate_mean", "rate_stderr"}
        have = set(reader.fieldnames or ())
        if not needed <= have:
            raise ValueError(
                f"{path}: missing CSV columns {sorted(needed - have)}"
            )
        rows = []
        for i, row in enumerate(reader, start=2):
            try:
                rows.append({
                    "snr_db": float(row["snr_db"]),
                    "scheme": row["scheme"],
                    "rate_mean": float(row["rate_mean"]),
                    "rate_stderr": float(row["rate_stderr"]),
                })
            except (TypeError, KeyError, ValueError) as exc:
                raise ValueError(f"{path} line {i}: bad row ({exc})") from exc
    if not rows:
        raise ValueError(f"{path}: no data rows")
    return rows


def _slug(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9_-]+", "-", name)


def render_plot(csv_path: str, out_path: str, x_axis: str = "snr",
                title: str | None = None) -> str:
    """Plot a sweep CSV to an SVG file; returns the output path.

    x_axis "snr" plots against the snr_db column; "antennas" pulls the
    antenna count from "/L<n>" scheme suffixes (one line per base
    scheme, one marker per antenna count).
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    if x_axis not in ("snr", "antennas"):
        raise ValueError(f"x_axis must be 'snr' or 'antennas', got {x_axis!r}")
    rows = read_sweep_csv(csv_path)

    series: dict[str, list[tuple[float, float, float]]] = {}
    if x_axis == "snr":
        for row in rows:
            series.setdefault(row["scheme"], []).append(
                (row["snr_db"], row["rate_mean"], row["rate_stderr"])
            )
        x_label = "SNR (dB)"
    else:
        for row in rows:
            m = re.fullmatch(r"(.+)/L(\d+)", row["scheme"])
            if not m:
                raise ValueError(
                    f"{csv_path}: scheme {row['scheme']!r} carries no /L<n> "
                    "suffix; antenna-axis plots need one"
                )
            label = f"{m.group(1)} @ {'%.9g' % row['snr_db']} dB"
            series.setdefault(label, []).append(
                (float(m.group(2)), row["rate_mean"], row["rate_stderr"])
            )
        x_label = "transmit antennas"

    with matplotlib.rc_context({"svg.hashsalt": "cachebeam"}):
        fig, ax = plt.subplots(figsize=(6.4, 4.4))
        try:
            for i, (name, pts) in enumerate(series.items()):
                pts.sort(key=lambda p: p[0])
                color, marker = _STYLE_CYCLE[i % len(_STYLE_CYCLE)]
                xs = [p[0] for p in pts]
                ys = [p[1] for p in pts]
                errs = [p[2] for p in pts]
                container = ax.errorbar(
                    xs, ys, yerr=errs, label=name, color=color, marker=marker,
                    markersize=4.5, capsize=2.5, linewidth=1.4,
                )
                container[0].set_gid(f"scheme-{_slug(name)}")
            ax.set_xlabel(x_label)
            ax.set_ylabel("rate (bits / channel use)")
            if title:
                ax.set_title(title)
            ax.grid(True, alpha=0.35)
            ax.legend(loc="best")
            fig.tight_layout()
            buf = io.BytesIO()
            fig.savefig(buf, format="svg", metadata={"Date": None})
        finally:
            plt.close(fig)
    try:
        with open(out_path, "wb") as fh:
            fh.write(buf.getvalue())
    except OSError as exc:
        raise OSError(f"cannot write {out_path}: {exc}") from exc
    return out_path
