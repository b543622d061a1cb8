"""YAML scenario configuration: parsing with strict key checking, defaults
matching the desk-scale baseline, and a round-trip serializer."""

from __future__ import annotations

from dataclasses import replace

import yaml

from .behaviors import BehaviorSpec
from .dynamics import CommunitySpec, HazardParams
from .engine import ABSpec, InitParams, InterventionWindow, RunMode, Scenario
from .recommenders import RecommenderSpec


class ConfigError(ValueError):
    """Malformed or invalid scenario configuration."""


def _require_mapping(obj, key: str) -> dict:
    if not isinstance(obj, dict):
        raise ConfigError(f"{key}: expected a mapping, got {type(obj).__name__}")
    return obj

def _check_keys(section: dict, allowed: set[str], prefix: str) -> None:
    unknown = set(section) - allowed
    if unknown:
        name = sorted(unknown)[0]
        where = f"{prefix}.{name}" if prefix else name
        raise ConfigError(f"unknown key {where!r}")


def _window(value, key: str) -> InterventionWindow:
    if (not isinstance(value, (list, tuple)) or len(value) != 2
            or not all(isinstance(x, int) for x in value)):
        raise ConfigError(f"{key}: expected [lo, hi] integers")
    try:
        return InterventionWindow(value[0], value[1])
    except ValueError as exc:
        raise ConfigError(f"{key}: {exc}") from exc


def parse_config(text: str) -> Scenario:
    """Parse a YAML scenario document; omitted sections fall back to the
    baseline defaults. Unknown keys and invariant violations raise
    ConfigError naming the offending key."""
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"not valid YAML: {exc}") from exc
    if doc is None:
        doc = {}
    doc = _require_mapping(doc, "document")
    _check_keys(doc, {"horizon", "seeds", "seed_base", "communities", "init",
                      "growth", "sigmoid", "hazard", "window", "recommender",
                      "behavior", "modes", "ab", "sweep", "effects"}, "")
    base = Scenario()
    kwargs: dict = {}
    try:
        if "horizon" in doc:
            kwargs["horizon"] = int(doc["horizon"])
        if "seeds" in doc:
            kwargs["n_seeds"] = int(doc["seeds"])
        if "seed_base" in doc:
            kwargs["seed_base"] = int(doc["seed_base"])
        if "communities" in doc:
            comms = []
            for k, item in enumerate(doc["communities"]):
                item = _require_mapping(item, f"communities[{k}]")
                _check_keys(item, {"prevalence", "mean", "std"},
                            f"communities[{k}]")
                comms.append(CommunitySpec(
                    prevalence=float(item["prevalence"]),
                    mean=tuple(float(x) for x in item["mean"]),
                    std=float(item["std"])))
            kwargs["communities"] = tuple(comms)
        if "init" in doc:
            sec = _require_mapping(doc["init"], "init")
            _check_keys(sec, {"n_per_group", "p_closure"}, "init")
            kwargs["init"] = InitParams(
                n_per_group=int(sec.get("n_per_group", base.init.n_per_group)),
                p_closure=float(sec.get("p_closure", base.init.p_closure)))
        growth = base.growth
        if "growth" in doc:
            sec = _require_mapping(doc["growth"], "growth")
            _check_keys(sec, {"arrivals_per_step", "n_strangers", "n_friends",
                              "p_friend"}, "growth")
            growth = replace(
                growth,
                arrivals_per_step=int(sec.get("arrivals_per_step",
                                              growth.arrivals_per_step)),
                n_strangers=int(sec.get("n_strangers", growth.n_strangers)),
                n_friends=int(sec.get("n_friends", growth.n_friends)),
                p_friend=float(sec.get("p_friend", growth.p_friend)))
        if "sigmoid" in doc:
            sec = _require_mapping(doc["sigmoid"], "sigmoid")
            _check_keys(sec, {"a", "b", "target_mean"}, "sigmoid")
            if "a" in sec:
                growth = replace(growth, sigmoid_a=float(sec["a"]))
            has_b = sec.get("b") is not None
            has_target = sec.get("target_mean") is not None
            if has_b and has_target:
                raise ConfigError(
                    "sigmoid: give either b or target_mean, not both")
            if has_b:
                growth = replace(growth, sigmoid_b=float(sec["b"]))
                kwargs["calibrate_target"] = None
            elif has_target:
                kwargs["calibrate_target"] = float(sec["target_mean"])
        kwargs["growth"] = growth
        if "hazard" in doc:
            sec = _require_mapping(doc["hazard"], "hazard")
            _check_keys(sec, {"enabled", "c", "d", "k"}, "hazard")
            kwargs["hazard"] = HazardParams(
                c=float(sec.get("c", 0.0)), d=float(sec.get("d", 1.0)),
                k=float(sec.get("k", 0.0)),
                enabled=bool(sec.get("enabled", False)))
        if "window" in doc:
            kwargs["window"] = _window(doc["window"], "window")
        if "recommender" in doc:
            sec = _require_mapping(doc["recommender"], "recommender")
            _check_keys(sec, {"kind", "beta"}, "recommender")
            kwargs["recommender"] = RecommenderSpec(
                kind=str(sec.get("kind", base.recommender.kind)),
                beta=float(sec.get("beta", base.recommender.beta)))
        if "behavior" in doc:
            sec = _require_mapping(doc["behavior"], "behavior")
            _check_keys(sec, {"acceptance", "p", "rewire", "rewire_scope"},
                        "behavior")
            kwargs["behavior"] = BehaviorSpec(
                acceptance=str(sec.get("acceptance", base.behavior.acceptance)),
                p=float(sec.get("p", base.behavior.p)),
                rewire=bool(sec.get("rewire", False)),
                rewire_scope=str(sec.get("rewire_scope", "node")))
        if "modes" in doc:
            try:
                kwargs["run_modes"] = tuple(RunMode(str(m))
                                            for m in doc["modes"])
            except ValueError as exc:
                raise ConfigError(f"modes: {exc}") from exc
        if "ab" in doc:
            sec = _require_mapping(doc["ab"], "ab")
            _check_keys(sec, {"scheme", "p", "treated_group"}, "ab")
            kwargs["ab"] = ABSpec(
                scheme=str(sec.get("scheme", "random_node")),
                p=float(sec.get("p", 0.5)),
                treated_group=int(sec.get("treated_group", 0)))
        if "sweep" in doc:
            sec = _require_mapping(doc["sweep"], "sweep")
            _check_keys(sec, {"windows"}, "sweep")
            wins = sec.get("windows") or []
            kwargs["sweep_windows"] = tuple(
                _window(w, f"sweep.windows[{k}]") for k, w in enumerate(wins))
        if "effects" in doc:
            sec = _require_mapping(doc["effects"], "effects")
            _check_keys(sec, {"times", "metrics"}, "effects")
            if "times" in sec:
                kwargs["effects_times"] = tuple(int(t) for t in sec["times"])
            if "metrics" in sec:
                kwargs["effects_metrics"] = tuple(str(m)
                                                  for m in sec["metrics"])
        scenario = replace(base, **kwargs)
        scenario.validate()
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    return scenario


def scenario_to_dict(s: Scenario) -> dict:
    sigmoid: dict = {"a": s.growth.sigmoid_a}
    if s.calibrate_target is not None:
        sigmoid["target_mean"] = s.calibrate_target
    else:
        sigmoid["b"] = s.growth.sigmoid_b
    doc = {
        "horizon": s.horizon,
        "seeds": s.n_seeds,
        "seed_base": s.seed_base,
        "communities": [{"prevalence": c.prevalence, "mean": list(c.mean),
                         "std": c.std} for c in s.communities],
        "init": {"n_per_group": s.init.n_per_group,
                 "p_closure": s.init.p_closure},
        "growth": {"arrivals_per_step": s.growth.arrivals_per_step,
                   "n_strangers": s.growth.n_strangers,
                   "n_friends": s.growth.n_friends,
                   "p_friend": s.growth.p_friend},
        "sigmoid": sigmoid,
        "hazard": {"enabled": s.hazard.enabled, "c": s.hazard.c,
                   "d": s.hazard.d, "k": s.hazard.k},
        "window": [s.window.lo, s.window.hi],
        "recommender": {"kind": s.recommender.kind,
                        "beta": s.recommender.beta},
        "behavior": {"acceptance": s.behavior.acceptance, "p": s.behavior.p,
                     "rewire": s.behavior.rewire,
                     "rewire_scope": s.behavior.rewire_scope},
        "modes": [m.value for m in s.run_modes],
    }
    if s.ab is not None:
        doc["ab"] = {"scheme": s.ab.scheme, "p": s.ab.p,
                     "treated_group": s.ab.treated_group}
    if s.sweep_windows is not None:
        doc["sweep"] = {"windows": [[w.lo, w.hi] for w in s.sweep_windows]}
    effects: dict = {}
    if s.effects_times is not None:
        effects["times"] = list(s.effects_times)
    if s.effects_metrics != Scenario().effects_metrics:
        effects["metrics"] = list(s.effects_metrics)
    if effects:
        doc["effects"] = effects
    return doc


def serialize_config(s: Scenario) -> str:
    """Scenario -> YAML text; parse(serialize(s)) == s."""
    return yaml.safe_dump(scenario_to_dict(s), sort_keys=False)


def load_config(path) -> Scenario:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())
