"""Trajectory simulation and counterfactual effect measurement.

One trajectory advances the network timestep by timestep: node arrivals with
stranger/friend phases, an optional recommendation phase inside the
intervention window, optional attrition, then a metric snapshot. Four run
modes share seed-matched natural-growth randomness:

* NATURAL      — growth only, no recommendations.
* INTERVENED   — growth plus recommendations to every alive node in-window.
* UNMEDIATED   — like INTERVENED, but the friend phase may only traverse
  non-algorithmic edges, removing recommendation-mediated organic edges.
* AB           — recommendations restricted to a treatment arm, with
  per-arm naive and interference-adjusted metric rows.

Effect decompositions (total / delayed / direct / indirect), longitudinal
estimates, and seed aggregation with Student-t confidence intervals live
here as well.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from types import SimpleNamespace

import numpy as np
from scipy import stats

from .behaviors import BehaviorSpec, apply_acceptance, decide
from .dynamics import (CommunitySpec, GrowthParams, HazardParams,
                       MediationMode, apply_attrition, calibrate_sigmoid,
                       initialize_graph, meet_friends, meet_strangers,
                       sample_inner_products, spawn_node,
                       validate_communities)
from .graph import Graph, Provenance
from .metrics import UNDEFINED, gini, snapshot_metrics
from .recommenders import RecommenderSpec, make_recommender


class RunMode(Enum):
    NATURAL = "natural"
    INTERVENED = "intervened"
    UNMEDIATED = "unmediated"
    AB = "ab"


AB_SCHEME_RANDOM = "random_node"
AB_SCHEME_COMMUNITY = "by_community"

ARM_CONTROL = 0
ARM_TREATMENT = 1
_ARM_NAMES = {ARM_TREATMENT: "treatment", ARM_CONTROL: "control"}


@dataclass(frozen=True)
class InterventionWindow:
    lo: int
    hi: int

    def __post_init__(self):
        if not 0 <= self.lo <= self.hi:
            raise ValueError(f"invalid window [{self.lo}, {self.hi}]")

    def __contains__(self, t: int) -> bool:
        return self.lo <= t <= self.hi

    def label(self) -> str:
        return f"{self.lo}-{self.hi}"


@dataclass(frozen=True)
class ABSpec:
    scheme: str = AB_SCHEME_RANDOM
    p: float = 0.5
    treated_group: int = 0

    def __post_init__(self):
        if self.scheme not in (AB_SCHEME_RANDOM, AB_SCHEME_COMMUNITY):
            raise ValueError(f"unknown AB scheme {self.scheme!r}")
        if not 0 <= self.p <= 1:
            raise ValueError("treatment probability must lie in [0, 1]")


@dataclass(frozen=True)
class InitParams:
    n_per_group: int = 50
    p_closure: float = 0.05

    def __post_init__(self):
        if self.n_per_group < 0:
            raise ValueError("n_per_group must be >= 0")
        if not 0 <= self.p_closure <= 1:
            raise ValueError("p_closure must lie in [0, 1]")


# Baseline embedding spread: variance 0.05 per community, between the
# homogeneous (0.01) and heterogeneous (0.1) group-structure variants.
BASELINE_EMBED_STD = math.sqrt(0.05)


@dataclass(frozen=True)
class Scenario:
    """Full experiment configuration for one simulated world."""

    horizon: int = 400
    communities: tuple[CommunitySpec, ...] = (
        CommunitySpec(0.5, (0.0, 1.0), BASELINE_EMBED_STD),
        CommunitySpec(0.5, (1.0, 0.0), BASELINE_EMBED_STD),
    )
    growth: GrowthParams = GrowthParams()
    hazard: HazardParams = HazardParams()
    init: InitParams = InitParams()
    recommender: RecommenderSpec = RecommenderSpec(kind="latent", beta=10.0)
    behavior: BehaviorSpec = BehaviorSpec()
    window: InterventionWindow = InterventionWindow(50, 200)
    n_seeds: int = 5
    seed_base: int = 0
    run_modes: tuple[RunMode, ...] = (RunMode.NATURAL, RunMode.INTERVENED)
    ab: ABSpec | None = None
    # Mean linkage probability the sigmoid offset is calibrated to before
    # each run; None uses growth.sigmoid_b verbatim. 0.02 keeps natural
    # growth friend-dominated, so young nodes arrive clustered.
    calibrate_target: float | None = 0.02
    calibration_pairs: int = 4096
    sweep_windows: tuple[InterventionWindow, ...] | None = None
    effects_times: tuple[int, ...] | None = None
    effects_metrics: tuple[str, ...] = ("homophily", "clustering_global",
                                        "gini_global")

    def validate(self) -> None:
        if self.horizon < 0:
            raise ValueError("horizon must be >= 0")
        validate_communities(list(self.communities))
        if self.window.hi > self.horizon:
            raise ValueError(
                f"window [{self.window.lo}, {self.window.hi}] exceeds "
                f"horizon {self.horizon}")
        if self.n_seeds < 1:
            raise ValueError("n_seeds must be >= 1")
        if RunMode.AB in self.run_modes and self.ab is None:
            raise ValueError("run mode 'ab' requires an ab section")
        if self.ab is not None and self.ab.scheme == AB_SCHEME_COMMUNITY \
                and not 0 <= self.ab.treated_group < len(self.communities):
            raise ValueError(
                f"ab.treated_group {self.ab.treated_group} is not a community")
        if self.calibrate_target is not None \
                and not 0 < self.calibrate_target < 1:
            raise ValueError("calibrate_target must lie in (0, 1)")
        for t in self.effects_times or ():
            if not 0 <= t <= self.horizon:
                raise ValueError(f"effects time {t} outside [0, horizon]")
        if self.sweep_windows is not None:
            for w in self.sweep_windows:
                if w.hi > self.horizon:
                    raise ValueError(f"sweep window [{w.lo}, {w.hi}] exceeds "
                                     f"horizon {self.horizon}")

    def seeds(self) -> list[int]:
        return [self.seed_base + k for k in range(self.n_seeds)]


def baseline_scenario(**overrides) -> Scenario:
    """The two-equal-community desk-scale setup used throughout the tests."""
    return replace(Scenario(), **overrides) if overrides else Scenario()


@dataclass
class Trajectory:
    """Per-timestep metric rows for one (mode, seed) run, plus the audit
    data needed by rewiring and A/B checks."""

    mode: RunMode
    seed: int
    window: InterventionWindow
    rows: list[dict[str, float]]
    rec_events: list[tuple] | None = None   # (t, node, cand, accepted, deg_before, removed_edge)
    arms: dict[int, int] | None = None      # node id -> arm (AB runs)
    algorithmic_edges: list[tuple[int, int]] | None = None

    @property
    def horizon(self) -> int:
        return len(self.rows) - 1

    def value(self, t: int, metric: str) -> float:
        return self.rows[t].get(metric, UNDEFINED)

    def series(self, metric: str) -> np.ndarray:
        return np.array([r.get(metric, UNDEFINED) for r in self.rows])

    def metric_names(self) -> list[str]:
        names: dict[str, None] = {}
        for r in self.rows:
            for k in r:
                if k != "t":
                    names.setdefault(k)
        return list(names)

    @property
    def run_id(self) -> str:
        return f"{self.mode.value}-s{self.seed}"


# RNG substreams, one per phase, all derived from (master seed, stream index)
# so counterfactual modes share natural-growth randomness exactly.
_STREAM_NAMES = ("init", "calibration", "arrival", "strangers", "friends",
                 "recommender", "behavior", "attrition", "assignment")


def make_streams(seed: int) -> SimpleNamespace:
    gens = {name: np.random.Generator(np.random.PCG64(
        np.random.SeedSequence(entropy=seed, spawn_key=(k,))))
        for k, name in enumerate(_STREAM_NAMES)}
    return SimpleNamespace(**gens)


def resolve_growth(scenario: Scenario, rng: np.random.Generator
                   ) -> GrowthParams:
    """Fix the sigmoid offset: calibrate to the target mean linkage
    probability on a fresh embedding-pair sample, unless an explicit b is
    configured."""
    if scenario.calibrate_target is None:
        return scenario.growth
    sample = sample_inner_products(list(scenario.communities),
                                   scenario.calibration_pairs, rng)
    _, b = calibrate_sigmoid(scenario.calibrate_target, sample,
                             a=scenario.growth.sigmoid_a)
    return replace(scenario.growth, sigmoid_b=b)


def _draw_arm(ab: ABSpec, group: int, rng: np.random.Generator) -> int:
    if ab.scheme == AB_SCHEME_COMMUNITY:
        return ARM_TREATMENT if group == ab.treated_group else ARM_CONTROL
    return ARM_TREATMENT if rng.random() < ab.p else ARM_CONTROL


def ab_arm_metrics(g: Graph, ab: ABSpec) -> dict[str, float]:
    """Per-arm naive and interference-adjusted metric values.

    Naive values evaluate each arm's nodes on the full graph. Adjustments:
    clustering on the arm-induced subgraph; control-arm Gini on organic
    degrees; community homophily discounting algorithmic edges for control
    and double-counting cross-arm algorithmic edges for treatment.
    """
    out: dict[str, float] = {}
    ids = g.alive_ids()
    pair_all = g.pair_counts_org + g.pair_counts_algo
    for arm, name in _ARM_NAMES.items():
        arm_ids = ids[g.arm[ids] == arm]
        out[f"ab_n_{name}"] = float(len(arm_ids))
        if len(arm_ids) == 0:
            for m in ("clustering_naive", "clustering_adjusted",
                      "gini_naive", "gini_adjusted", "homophily_naive",
                      "homophily_adjusted"):
                out[f"ab_{m}_{name}"] = UNDEFINED
            continue
        d = g.deg[arm_ids].astype(np.float64)
        tri = g.tri[arm_ids].astype(np.float64)
        with np.errstate(divide="ignore", invalid="ignore"):
            c = np.where(d >= 2, 2.0 * tri / (d * np.maximum(d - 1.0, 1.0)), 0.0)
        out[f"ab_clustering_naive_{name}"] = float(np.mean(c))
        da = g.deg_arm[arm_ids].astype(np.float64)
        ta = g.tri_arm[arm_ids].astype(np.float64)
        with np.errstate(divide="ignore", invalid="ignore"):
            ca = np.where(da >= 2, 2.0 * ta / (da * np.maximum(da - 1.0, 1.0)), 0.0)
        out[f"ab_clustering_adjusted_{name}"] = float(np.mean(ca))
        out[f"ab_gini_naive_{name}"] = gini(g.deg[arm_ids])
        if arm == ARM_CONTROL:
            out[f"ab_gini_adjusted_{name}"] = gini(g.deg_org[arm_ids])
        else:
            out[f"ab_gini_adjusted_{name}"] = out[f"ab_gini_naive_{name}"]

        if ab.scheme == AB_SCHEME_COMMUNITY:
            grp = ab.treated_group if arm == ARM_TREATMENT else \
                _other_group(g, ab.treated_group)
        else:
            grp = None
        if grp is None:
            out[f"ab_homophily_naive_{name}"] = UNDEFINED
            out[f"ab_homophily_adjusted_{name}"] = UNDEFINED
            continue
        share = int(g.alive_per_group[grp]) / g.n_alive if g.n_alive else UNDEFINED
        e_g = int(pair_all[grp].sum())
        out[f"ab_homophily_naive_{name}"] = (
            pair_all[grp, grp] / e_g - share if e_g else UNDEFINED)
        if arm == ARM_CONTROL:
            e_g_org = int(g.pair_counts_org[grp].sum())
            out[f"ab_homophily_adjusted_{name}"] = (
                g.pair_counts_org[grp, grp] / e_g_org - share
                if e_g_org else UNDEFINED)
        else:
            cross = g.pair_counts_algo_cross_arm
            e_gg = int(pair_all[grp, grp] + cross[grp, grp])
            e_g_adj = int(pair_all[grp].sum() + cross[grp].sum())
            out[f"ab_homophily_adjusted_{name}"] = (
                e_gg / e_g_adj - share if e_g_adj else UNDEFINED)
    return out


def _other_group(g: Graph, grp: int) -> int | None:
    return 1 - grp if g.n_groups == 2 else None


def run_trajectory(scenario: Scenario, mode: RunMode, seed: int) -> Trajectory:
    """Simulate one seed under one run mode. Deterministic: identical
    (scenario, mode, seed) reproduce bit-identical trajectories."""
    scenario.validate()
    streams = make_streams(seed)
    growth = resolve_growth(scenario, streams.calibration)
    is_ab = mode is RunMode.AB
    if is_ab and scenario.ab is None:
        raise ValueError("AB run requires scenario.ab")
    n_groups = len(scenario.communities)
    capacity = (scenario.init.n_per_group * n_groups
                + growth.arrivals_per_step * scenario.horizon + 8)
    g = initialize_graph(list(scenario.communities), scenario.init.n_per_group,
                         scenario.init.p_closure, growth, streams.init,
                         capacity=capacity, track_arms=is_ab)
    arms: dict[int, int] | None = None
    if is_ab:
        arms = {}
        for u in g.alive_ids():
            arm = _draw_arm(scenario.ab, int(g.group[u]), streams.assignment)
            g.set_arm(int(u), arm)
            arms[int(u)] = arm
        g.rebuild_arm_stats()

    recommend = make_recommender(scenario.recommender)
    mediation = (MediationMode.ORGANIC_ONLY if mode is RunMode.UNMEDIATED
                 else MediationMode.FULL)
    record_events = scenario.behavior.rewire or is_ab
    events: list[tuple] | None = [] if record_events else None

    def snap(t: int) -> dict[str, float]:
        row = snapshot_metrics(g, t)
        if is_ab:
            row.update(ab_arm_metrics(g, scenario.ab))
        return row

    rows = [snap(0)]
    window = scenario.window
    for t in range(1, scenario.horizon + 1):
        for _ in range(growth.arrivals_per_step):
            grp, emb = spawn_node(list(scenario.communities), streams.arrival)
            i = g.add_node(grp, emb, t)
            if is_ab:
                arm = _draw_arm(scenario.ab, grp, streams.assignment)
                g.set_arm(i, arm)
                arms[i] = arm
            meet_strangers(g, i, growth, streams.strangers, t)
            meet_friends(g, i, growth, mediation, streams.friends, t)
        if mode is not RunMode.NATURAL and t in window:
            ids = g.alive_ids()
            treated = ids[g.arm[ids] == ARM_TREATMENT] if is_ab else ids
            for j in treated:
                j = int(j)
                cand = recommend(g, j, streams.recommender)
                if cand is None:
                    continue
                accepted = decide(scenario.behavior, g.emb[j], g.emb[cand],
                                  growth.sigmoid_a, growth.sigmoid_b,
                                  streams.behavior)
                removed = None
                deg_before = g.degree(j)
                if accepted:
                    _, removed = apply_acceptance(
                        g, j, cand, scenario.behavior.rewire, t,
                        streams.behavior,
                        rewire_scope=scenario.behavior.rewire_scope)
                if events is not None:
                    events.append((t, j, cand, accepted, deg_before, removed))
        if scenario.hazard.enabled:
            apply_attrition(g, scenario.hazard, t, streams.attrition)
        rows.append(snap(t))

    algo_edges = None
    if is_ab:
        algo_edges = [(u, v) for kind, u, v, prov, _t in
                      (e for e in g.ledger if e[0] == "edge_added")
                      if prov == Provenance.ALGORITHMIC.value]
    return Trajectory(mode=mode, seed=seed, window=window, rows=rows,
                      rec_events=events, arms=arms,
                      algorithmic_edges=algo_edges)


def ab_run(scenario: Scenario, assignment: ABSpec, seed: int) -> Trajectory:
    """Run the A/B mode under the given assignment scheme."""
    return run_trajectory(replace(scenario, ab=assignment), RunMode.AB, seed)


def run_many(scenario: Scenario, modes=None, seeds=None, jobs: int = 1
             ) -> dict[RunMode, list[Trajectory]]:
    """Run every (mode, seed) pair, optionally across processes. The result
    maps mode -> trajectories ordered by seed."""
    modes = list(modes if modes is not None else scenario.run_modes)
    seeds = list(seeds if seeds is not None else scenario.seeds())
    tasks = [(scenario, m, s) for m in modes for s in seeds]
    if jobs > 1 and len(tasks) > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_task, tasks))
    else:
        results = [_run_task(t) for t in tasks]
    out: dict[RunMode, list[Trajectory]] = {m: [] for m in modes}
    for traj in results:
        out[traj.mode].append(traj)
    for m in out:
        out[m].sort(key=lambda tr: tr.seed)
    return out


def _run_task(task: tuple[Scenario, RunMode, int]) -> Trajectory:
    scenario, mode, seed = task
    return run_trajectory(scenario, mode, seed)


# -- effect decompositions ---------------------------------------------------

def total_effect(traj_rec: Trajectory, traj_nat: Trajectory, metric: str,
                 T: int) -> float:
    """m(intervened, T) - m(natural, T)."""
    return traj_rec.value(T, metric) - traj_nat.value(T, metric)


def delayed_effect(traj_rec: Trajectory, traj_nat: Trajectory, metric: str,
                   T: int, t_hi: int) -> float:
    """Effect_T - Effect_{t_hi}; negative-toward-zero means a diminishing
    impact, positive an amplifying one."""
    if T < t_hi:
        raise ValueError("delayed effect needs T >= window end")
    return (total_effect(traj_rec, traj_nat, metric, T)
            - total_effect(traj_rec, traj_nat, metric, t_hi))


def decompose_effects(traj_rec: Trajectory, traj_unmediated: Trajectory,
                      traj_nat: Trajectory, metric: str, T: int
                      ) -> tuple[float, float]:
    """(direct, indirect): direct = m(unmediated) - m(natural); indirect is
    the remainder of the total effect, exactly by construction."""
    direct = traj_unmediated.value(T, metric) - traj_nat.value(T, metric)
    indirect = total_effect(traj_rec, traj_nat, metric, T) - direct
    return direct, indirect


def longitudinal_estimate(traj_rec: Trajectory, metric: str, t_lo: int,
                          T: int) -> float:
    """Before/after estimate on a single observed trajectory:
    m(rec, T) - m(rec, t_lo)."""
    if T < t_lo:
        raise ValueError("longitudinal estimate needs T >= t_lo")
    return traj_rec.value(T, metric) - traj_rec.value(t_lo, metric)


def ab_estimate(ab_traj: Trajectory, metric: str, adjustment: str, T: int
                ) -> tuple[float, float, float]:
    """Per-arm estimate from an AB trajectory at time T.

    `metric` is one of clustering/gini/homophily; `adjustment` is naive or
    adjusted. Returns (treatment, control, difference).
    """
    if adjustment not in ("naive", "adjusted"):
        raise ValueError(f"unknown adjustment {adjustment!r}")
    tv = ab_traj.value(T, f"ab_{metric}_{adjustment}_treatment")
    cv = ab_traj.value(T, f"ab_{metric}_{adjustment}_control")
    return tv, cv, tv - cv


def mean_ci(values, confidence: float = 0.95
            ) -> tuple[float, float, float]:
    """Sample mean with a Student-t confidence interval, skipping NaNs.
    Returns (mean, lo, hi); the band is NaN when fewer than two values
    remain."""
    vals = np.asarray([v for v in np.ravel(values) if not math.isnan(v)],
                      dtype=np.float64)
    n = len(vals)
    if n == 0:
        return UNDEFINED, UNDEFINED, UNDEFINED
    m = float(np.mean(vals))
    if n < 2:
        return m, UNDEFINED, UNDEFINED
    half = float(stats.t.ppf(0.5 + confidence / 2, n - 1)
                 * np.std(vals, ddof=1) / math.sqrt(n))
    return m, m - half, m + half


@dataclass
class Band:
    """Seed-aggregated trajectory of one metric: mean and CI per timestep."""

    t: np.ndarray
    mean: np.ndarray
    lo: np.ndarray
    hi: np.ndarray


def aggregate(trajs: list[Trajectory], metrics=None) -> dict[str, Band]:
    """Mean trajectory with a 95% Student-t band per metric across seeds."""
    if len(trajs) < 2:
        raise ValueError("aggregation needs at least two trajectories")
    horizons = {tr.horizon for tr in trajs}
    modes = {tr.mode for tr in trajs}
    if len(horizons) != 1 or len(modes) != 1:
        raise ValueError("trajectories must share one horizon and one mode")
    T = horizons.pop()
    if metrics is None:
        metrics = trajs[0].metric_names()
    out: dict[str, Band] = {}
    ts = np.arange(T + 1)
    for metric in metrics:
        series = np.stack([tr.series(metric) for tr in trajs])
        mean = np.full(T + 1, UNDEFINED)
        lo = np.full(T + 1, UNDEFINED)
        hi = np.full(T + 1, UNDEFINED)
        for t in ts:
            mean[t], lo[t], hi[t] = mean_ci(series[:, t])
        out[metric] = Band(t=ts, mean=mean, lo=lo, hi=hi)
    return out


@dataclass(frozen=True)
class EffectEntry:
    metric: str
    T: int
    component: str
    value: float
    ci_low: float
    ci_high: float


def effect_report(nat: list[Trajectory], rec: list[Trajectory],
                  unmediated: list[Trajectory] | None, metrics, times,
                  window: InterventionWindow) -> list[EffectEntry]:
    """Seed-matched effect decomposition with 95% CIs over seeds.

    Components per (metric, T): total, delayed (T >= window end), direct and
    indirect (when unmediated runs exist), plus the longitudinal estimate
    and its bias against the counterfactual total.
    """
    if len(nat) != len(rec):
        raise ValueError("natural and intervened runs must be seed-matched")
    if unmediated is not None and len(unmediated) != len(rec):
        raise ValueError("unmediated runs must be seed-matched")
    entries: list[EffectEntry] = []
    for metric in metrics:
        for T in times:
            per_component: dict[str, list[float]] = {
                "total": [], "delayed": [], "direct": [], "indirect": [],
                "longitudinal": [], "longitudinal_bias": []}
            for k, (r, n) in enumerate(zip(rec, nat)):
                tot = total_effect(r, n, metric, T)
                per_component["total"].append(tot)
                if T >= window.hi:
                    per_component["delayed"].append(
                        delayed_effect(r, n, metric, T, window.hi))
                if unmediated is not None:
                    d, ind = decompose_effects(r, unmediated[k], n, metric, T)
                    per_component["direct"].append(d)
                    per_component["indirect"].append(ind)
                if T >= window.lo:
                    est = longitudinal_estimate(r, metric, window.lo, T)
                    per_component["longitudinal"].append(est)
                    per_component["longitudinal_bias"].append(est - tot)
            for component, vals in per_component.items():
                if not vals:
                    continue
                m, lo, hi = mean_ci(vals)
                entries.append(EffectEntry(metric, T, component, m, lo, hi))
    return entries
