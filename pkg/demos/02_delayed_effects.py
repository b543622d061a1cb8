"""Delayed effects: the same recommender can look different at the end of
the intervention and long after it stopped.

Runs natural growth against friend-of-friend and latent-affinity
interventions over the window [30, 80], then prints total effects at the
window end (t=80) and at the horizon (t=120), plus the delayed component.
Writes trajectories to demos/output/ and, when linksim-plots is installed,
renders a three-panel figure with confidence bands.
"""

from dataclasses import replace
from pathlib import Path

import numpy as np

from linksim import (InitParams, InterventionWindow, RecommenderSpec,
                     RunMode, baseline_scenario, delayed_effect, run_many,
                     total_effect)
from linksim.csvio import write_trajectories

OUT = Path(__file__).parent / "output"
WINDOW = InterventionWindow(30, 80)
METRICS = ("homophily", "clustering_global", "gini_global")

base = baseline_scenario(
    horizon=120,
    init=InitParams(n_per_group=25, p_closure=0.05),
    window=WINDOW,
    n_seeds=3,
)

runs = {"natural": run_many(base, modes=[RunMode.NATURAL], jobs=2)[RunMode.NATURAL]}
for kind in ("fof", "latent"):
    s = replace(base, recommender=RecommenderSpec(kind=kind, beta=10.0))
    runs[kind] = run_many(s, modes=[RunMode.INTERVENED], jobs=2)[RunMode.INTERVENED]

print(f"intervention window [{WINDOW.lo}, {WINDOW.hi}], horizon 120, "
      f"{base.n_seeds} seeds\n")
print(f"{'recommender':>11} {'metric':>18} {'effect@80':>10} "
      f"{'effect@120':>11} {'delayed':>8}")
for kind in ("fof", "latent"):
    for metric in METRICS:
        e_hi = np.mean([total_effect(r, n, metric, 80)
                        for r, n in zip(runs[kind], runs["natural"])])
        e_end = np.mean([total_effect(r, n, metric, 120)
                         for r, n in zip(runs[kind], runs["natural"])])
        d = np.mean([delayed_effect(r, n, metric, 120, 80)
                     for r, n in zip(runs[kind], runs["natural"])])
        print(f"{kind:>11} {metric:>18} {e_hi:>+10.3f} {e_end:>+11.3f} "
              f"{d:>+8.3f}")

OUT.mkdir(exist_ok=True)
csv_path = OUT / "delayed_effects_trajectories.csv"
write_trajectories([t for trs in runs.values() for t in trs], csv_path)
print(f"\ntrajectories written to {csv_path}")

try:
    from linksim_plots.render import render_trajectory_figure
    fig = render_trajectory_figure({
        "kind": "trajectories", "input": [csv_path],
        "metrics": list(METRICS),
        "out": OUT / "delayed_effects.svg",
        "title": "Delayed effects of link recommendations"})
    print(f"figure written to {fig}")
except ImportError:
    print("install linksim-plots to render the trajectory figure")
