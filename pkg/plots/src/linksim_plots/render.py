"""Render publication-style figures from linksim CSV output.

Consumes only the public CSV contract (long-format trajectories, optionally
with a sweep `window` column, and A/B estimate tables); no in-process
coupling to the simulator. Output is deterministic: rendering the same
inputs twice produces byte-identical image files.

Figure spec (YAML):

    kind: trajectories          # or ab_overlay
    input: trajectories.csv     # path or list of paths
    metrics: [homophily, clustering_global, gini_global]
    out: figure.svg
    title: optional figure title
    ab_estimates: ab_estimates.csv   # ab_overlay only
    adjustment: adjusted             # ab_overlay only: naive | adjusted

Invoke as `render --spec spec.yaml [--out path.svg]`.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
import warnings
from collections import defaultdict
from pathlib import Path

import matplotlib
import numpy as np
import yaml
from scipy import stats

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "linksim-plots"
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

NATURAL = "natural"

# distinct line styles per intervention window, in first-seen order
_WINDOW_STYLES = ["-", "--", ":", "-.", (0, (3, 1, 1, 1))]
_MODE_COLORS = {"intervened": "tab:blue", "unmediated": "tab:purple",
                "ab": "tab:green"}


class SpecError(ValueError):
    """Malformed figure spec or inputs that do not match it."""


def load_spec(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        spec = yaml.safe_load(fh)
    if not isinstance(spec, dict):
        raise SpecError("figure spec must be a mapping")
    unknown = set(spec) - {"kind", "input", "metrics", "out", "title",
                           "ab_estimates", "adjustment"}
    if unknown:
        raise SpecError(f"unknown spec key {sorted(unknown)[0]!r}")
    spec.setdefault("kind", "trajectories")
    if spec["kind"] not in ("trajectories", "ab_overlay"):
        raise SpecError(f"unknown figure kind {spec['kind']!r}")
    for key in ("input", "metrics", "out"):
        if key not in spec:
            raise SpecError(f"figure spec is missing {key!r}")
    if isinstance(spec["input"], (str, Path)):
        spec["input"] = [spec["input"]]
    return spec


def read_trajectories(paths) -> dict:
    """Long CSV -> {(mode, window): {metric: {seed: {t: value}}}}.

    The `window` column is optional (plain simulate output has none).
    """
    series: dict = defaultdict(lambda: defaultdict(lambda: defaultdict(dict)))
    for path in paths:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or "metric" not in reader.fieldnames:
                raise SpecError(f"{path}: not a trajectory CSV")
            for row in reader:
                if row["value"] == "":
                    continue
                key = (row["mode"], row.get("window", ""))
                seed = int(row["seed"])
                series[key][row["metric"]][seed][int(row["t"])] = \
                    float(row["value"])
    return series


def _mean_band(per_seed: dict[int, dict[int, float]]):
    """Seed mean and 95% Student-t band per timestep; band is None with a
    single seed."""
    ts = sorted({t for vals in per_seed.values() for t in vals})
    n_seeds = len(per_seed)
    mean = np.full(len(ts), np.nan)
    lo = np.full(len(ts), np.nan)
    hi = np.full(len(ts), np.nan)
    for k, t in enumerate(ts):
        vals = [vals_t[t] for vals_t in per_seed.values() if t in vals_t]
        if not vals:
            continue
        mean[k] = float(np.mean(vals))
        if len(vals) >= 2:
            half = float(stats.t.ppf(0.975, len(vals) - 1)
                         * np.std(vals, ddof=1) / math.sqrt(len(vals)))
            lo[k], hi[k] = mean[k] - half, mean[k] + half
    return np.array(ts), mean, (None if n_seeds < 2 else (lo, hi))


def _check_metrics(wanted, series) -> None:
    available = sorted({m for groups in series.values() for m in groups})
    missing = [m for m in wanted if m not in available]
    if missing:
        raise SpecError(
            f"metric {missing[0]!r} not present; available: "
            f"{', '.join(available)}")


def _style_for(key, window_order):
    mode, window = key
    if mode == NATURAL:
        return {"color": "black", "linestyle": "-"}
    style = _WINDOW_STYLES[window_order.index(window) % len(_WINDOW_STYLES)]
    return {"color": _MODE_COLORS.get(mode, "tab:red"), "linestyle": style}


def _label_for(key):
    mode, window = key
    return mode if not window else f"{mode} [{window}]"


def render_trajectory_figure(spec: dict) -> Path:
    """One panel per metric: solid black natural line, one line per
    (mode, window) with a shaded 95% CI band across seeds."""
    series = read_trajectories(spec["input"])
    metrics = list(spec["metrics"])
    _check_metrics(metrics, series)
    keys = sorted(series, key=lambda k: (k[0] != NATURAL, k[0], k[1]))
    window_order = sorted({w for m, w in keys if m != NATURAL})
    single_seed = all(len(per_seed) < 2
                      for groups in series.values()
                      for per_seed in groups.values())
    if single_seed:
        warnings.warn("single-seed input: confidence bands are omitted",
                      stacklevel=2)

    fig, axes = plt.subplots(1, len(metrics),
                             figsize=(4.2 * len(metrics), 3.4), squeeze=False)
    for ax, metric in zip(axes[0], metrics):
        for key in keys:
            if metric not in series[key]:
                continue
            ts, mean, band = _mean_band(series[key][metric])
            style = _style_for(key, window_order)
            ax.plot(ts, mean, label=_label_for(key), linewidth=1.4, **style)
            if band is not None:
                ax.fill_between(ts, band[0], band[1], alpha=0.2,
                                color=style["color"], linewidth=0)
        ax.set_xlabel("t")
        ax.set_title(metric)
        ax.grid(alpha=0.25)
    axes[0][0].legend(fontsize=7)
    if spec.get("title"):
        fig.suptitle(spec["title"])
    return _save(fig, spec["out"])


def read_ab_estimates(path, adjustment: str) -> dict:
    """A/B estimate CSV -> {metric: {arm: {seed: {t: value}}}}."""
    out: dict = defaultdict(lambda: defaultdict(lambda: defaultdict(dict)))
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            if row["adjustment"] != adjustment:
                continue
            seed, t = int(row["seed"]), int(row["t"])
            for arm in ("treatment", "control"):
                if row[arm] != "":
                    out[row["metric"]][arm][seed][t] = float(row[arm])
    return out


def render_ab_overlay_figure(spec: dict) -> Path:
    """Solid counterfactual trajectories with dashed per-arm A/B estimates.

    `metrics` names trajectory metrics; the matching estimate table column
    is the name's first component (clustering_global -> clustering).
    """
    if "ab_estimates" not in spec:
        raise SpecError("ab_overlay spec needs an ab_estimates path")
    series = read_trajectories(spec["input"])
    metrics = list(spec["metrics"])
    _check_metrics(metrics, series)
    estimates = read_ab_estimates(spec["ab_estimates"],
                                  spec.get("adjustment", "adjusted"))
    fig, axes = plt.subplots(1, len(metrics),
                             figsize=(4.2 * len(metrics), 3.4), squeeze=False)
    keys = sorted(series, key=lambda k: (k[0] != NATURAL, k[0], k[1]))
    window_order = sorted({w for m, w in keys if m != NATURAL})
    arm_colors = {"treatment": "tab:red", "control": "tab:gray"}
    for ax, metric in zip(axes[0], metrics):
        for key in keys:
            if metric not in series[key]:
                continue
            ts, mean, band = _mean_band(series[key][metric])
            style = _style_for(key, window_order)
            ax.plot(ts, mean, label=_label_for(key), linewidth=1.4, **style)
            if band is not None:
                ax.fill_between(ts, band[0], band[1], alpha=0.2,
                                color=style["color"], linewidth=0)
        short = metric.split("_")[0]
        for arm, per_seed in sorted(estimates.get(short, {}).items()):
            ts, mean, _ = _mean_band(per_seed)
            ax.plot(ts, mean, linestyle="--", linewidth=1.2,
                    color=arm_colors.get(arm, "tab:red"),
                    label=f"A/B {arm} (estimate)")
        ax.set_xlabel("t")
        ax.set_title(metric)
        ax.grid(alpha=0.25)
    axes[0][0].legend(fontsize=7)
    if spec.get("title"):
        fig.suptitle(spec["title"])
    return _save(fig, spec["out"])


def _save(fig, out) -> Path:
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, metadata={"Date": None})
    plt.close(fig)
    return out


def render(spec: dict) -> Path:
    if spec["kind"] == "ab_overlay":
        return render_ab_overlay_figure(spec)
    return render_trajectory_figure(spec)


def run(argv) -> int:
    parser = argparse.ArgumentParser(
        prog="render",
        description="Render linksim trajectory/A-B figures from CSV files.")
    parser.add_argument("--spec", required=True, help="figure spec YAML")
    parser.add_argument("--out", help="override the spec's output path")
    args = parser.parse_args(argv)
    try:
        spec = load_spec(args.spec)
        if args.out:
            spec["out"] = args.out
        path = render(spec)
    except (SpecError, OSError, yaml.YAMLError) as exc:
        print(f"render: {exc}", file=sys.stderr)
        return 1
    print(path)
    return 0


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
