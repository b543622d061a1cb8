"""Indirect effects: recommendations bias organic growth itself.

A friend-phase edge is "mediated" when its target was reachable at distance
2 only through recommender-created edges. This demo runs the latent
recommender in three coupled worlds sharing the same randomness: natural
(no recommendations), intervened, and the unmediated counterfactual (the
friend phase may not traverse algorithmic edges). The gap between the
intervened and unmediated trajectories is the indirect effect.
"""

from dataclasses import replace
from pathlib import Path

import numpy as np

from linksim import (InitParams, InterventionWindow, RecommenderSpec,
                     RunMode, baseline_scenario, decompose_effects, run_many,
                     total_effect)

WINDOW = InterventionWindow(30, 80)
scenario = baseline_scenario(
    horizon=120,
    init=InitParams(n_per_group=25, p_closure=0.05),
    window=WINDOW,
    recommender=RecommenderSpec(kind="latent", beta=10.0),
    n_seeds=3,
)

modes = [RunMode.NATURAL, RunMode.INTERVENED, RunMode.UNMEDIATED]
runs = run_many(scenario, modes=modes, jobs=2)
nat, intr, unm = (runs[m] for m in modes)

print("mediated share of friend-phase edges (intervened run):")
for t in (40, 80, 120):
    frac = np.mean([r.value(t, "mediated_fraction") for r in intr])
    print(f"  t={t:>3}: {frac:.3f}")

print("\nhomophily effect decomposition (latent recommender):")
print(f"{'T':>4} {'total':>8} {'direct':>8} {'indirect':>9}")
for T in (80, 100, 120):
    tot = np.mean([total_effect(r, n, "homophily", T)
                   for r, n in zip(intr, nat)])
    parts = [decompose_effects(r, u, n, "homophily", T)
             for r, u, n in zip(intr, unm, nat)]
    direct = np.mean([p[0] for p in parts])
    indirect = np.mean([p[1] for p in parts])
    print(f"{T:>4} {tot:>+8.3f} {direct:>+8.3f} {indirect:>+9.3f}")

print("\nThe mediated share keeps growing after the window closes and the "
      "indirect component persists: recommendation influence outlives the "
      "recommender.")
