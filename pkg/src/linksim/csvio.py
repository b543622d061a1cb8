"""Deterministic CSV emission for trajectories, effect reports, and A/B
estimates.

Floats are serialized with 12 significant digits so reruns are
byte-identical and parsed values land within 1e-12 of the originals.
Undefined metric values (NaN) become empty cells.
"""

from __future__ import annotations

import csv
import math
from typing import Iterable

from .engine import EffectEntry, Trajectory

TRAJECTORY_HEADER = "run_id,mode,seed,t,metric,value"
EFFECTS_HEADER = "metric,T,component,value,ci_low,ci_high"
AB_HEADER = "seed,t,metric,adjustment,treatment,control,difference"

AB_METRICS = ("clustering", "gini", "homophily")


def format_value(v: float) -> str:
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return ""
    return f"{float(v):.12g}"


def trajectory_lines(trajs: Iterable[Trajectory], window_label: bool = False
                     ) -> list[str]:
    recs = []  # sort key (run_id, window, t, metric) + rendered line
    for tr in trajs:
        win = tr.window.label() if window_label else ""
        for t, row in enumerate(tr.rows):
            for metric, value in row.items():
                if metric == "t":
                    continue
                cells = [tr.run_id, tr.mode.value, str(tr.seed)]
                if window_label:
                    cells.append(win)
                cells += [str(t), metric, format_value(value)]
                recs.append((tr.run_id, win, t, metric, ",".join(cells)))
    recs.sort(key=lambda r: r[:4])
    return [r[4] for r in recs]


def write_trajectories(trajs: Iterable[Trajectory], path,
                       window_label: bool = False) -> None:
    header = TRAJECTORY_HEADER
    if window_label:
        header = "run_id,mode,seed,window,t,metric,value"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(header + "\n")
        for line in trajectory_lines(trajs, window_label=window_label):
            fh.write(line + "\n")


def write_effect_report(entries: Iterable[EffectEntry], path) -> None:
    rows = sorted(entries, key=lambda e: (e.metric, e.T, e.component))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(EFFECTS_HEADER + "\n")
        for e in rows:
            fh.write(f"{e.metric},{e.T},{e.component},{format_value(e.value)},"
                     f"{format_value(e.ci_low)},{format_value(e.ci_high)}\n")


def write_ab_estimates(trajs: Iterable[Trajectory], path) -> None:
    lines = []
    for tr in sorted(trajs, key=lambda tr: tr.seed):
        for t, row in enumerate(tr.rows):
            for metric in AB_METRICS:
                for adjustment in ("naive", "adjusted"):
                    tv = row.get(f"ab_{metric}_{adjustment}_treatment")
                    cv = row.get(f"ab_{metric}_{adjustment}_control")
                    if tv is None and cv is None:
                        continue
                    diff = (tv - cv if tv is not None and cv is not None
                            and not (math.isnan(tv) or math.isnan(cv))
                            else float("nan"))
                    lines.append(
                        f"{tr.seed},{t},{metric},{adjustment},"
                        f"{format_value(tv)},{format_value(cv)},"
                        f"{format_value(diff)}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(AB_HEADER + "\n")
        for line in lines:
            fh.write(line + "\n")


def read_rows(path) -> list[dict[str, str]]:
    """Read any of the emitted CSVs back as string dicts (test helper)."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))
