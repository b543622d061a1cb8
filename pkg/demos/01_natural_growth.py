"""Grow a network without any recommender and watch its structure evolve.

Builds the two-community starting graph, runs natural growth for 120 steps,
prints metric snapshots along the way, and exports the final initial-graph
snapshot as edge/node CSV files under demos/output/.
"""

from pathlib import Path

from linksim import (InitParams, InterventionWindow, RunMode,
                     baseline_scenario, homophily, initialize_graph,
                     run_trajectory)
from linksim.engine import make_streams, resolve_growth

OUT = Path(__file__).parent / "output"

scenario = baseline_scenario(
    horizon=120,
    init=InitParams(n_per_group=25, p_closure=0.05),
    window=InterventionWindow(30, 80),  # unused in natural mode
    n_seeds=1,
)

print("== the starting graph ==")
streams = make_streams(seed=0)
growth = resolve_growth(scenario, streams.calibration)
g = initialize_graph(list(scenario.communities), scenario.init.n_per_group,
                     scenario.init.p_closure, growth, streams.init)
print(f"nodes: {g.n_alive}, edges: {g.edge_count}, "
      f"calibrated sigmoid offset b = {growth.sigmoid_b:.3f}")
print(f"per-group homophily: {homophily(g, 0):.3f}, {homophily(g, 1):.3f}")
OUT.mkdir(exist_ok=True)
g.save_snapshot(OUT / "initial_edges.csv", OUT / "initial_nodes.csv")
print(f"snapshot written to {OUT}/initial_{{edges,nodes}}.csv")

print("\n== natural growth ==")
traj = run_trajectory(scenario, RunMode.NATURAL, seed=0)
print(f"{'t':>4} {'n':>5} {'deg':>6} {'clustering':>10} "
      f"{'gini':>6} {'homophily':>9}")
for t in (0, 30, 60, 90, 120):
    row = traj.rows[t]
    print(f"{t:>4} {row['n_alive']:>5.0f} {row['avg_degree']:>6.2f} "
          f"{row['clustering_global']:>10.3f} {row['gini_global']:>6.3f} "
          f"{row['homophily']:>9.3f}")
print("\nOnce arrivals dominate the population (t >= 30) homophily is "
      "roughly stationary, while clustering drifts down as the early "
      "dense core is outgrown.")
