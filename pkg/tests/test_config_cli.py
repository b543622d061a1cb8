import math

import pytest

from linksim.cli import run_command
from linksim.config import (ConfigError, parse_config,
                            scenario_to_dict, serialize_config)
from linksim.csvio import format_value, read_rows, write_trajectories
from linksim.engine import (InterventionWindow, RunMode, Scenario, Trajectory,
                            run_trajectory)

MINIMAL = "horizon: 400\n"

SMALL = """
horizon: 24
seeds: 2
communities:
  - {prevalence: 0.5, mean: [0.0, 1.0], std: 0.2}
  - {prevalence: 0.5, mean: [1.0, 0.0], std: 0.2}
init: {n_per_group: 8, p_closure: 0.05}
growth: {arrivals_per_step: 2, n_strangers: 15, n_friends: 15, p_friend: 0.1}
window: [4, 12]
recommender: {kind: fof}
modes: [natural, intervened]
"""


class TestParseConfig:
    def test_minimal_document_uses_baseline_defaults(self):
        s = parse_config(MINIMAL)
        base = Scenario()
        assert s.horizon == 400
        assert s.communities == base.communities
        assert s.growth == base.growth
        assert s.init == base.init
        assert s.behavior == base.behavior
        assert s.n_seeds == base.n_seeds

    def test_window_parsing(self):
        s = parse_config("horizon: 400\nwindow: [50, 150]\n")
        assert s.window == InterventionWindow(50, 150)

    def test_inverted_window_names_the_key(self):
        with pytest.raises(ConfigError, match="window"):
            parse_config("horizon: 400\nwindow: [150, 50]\n")

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError, match="horizn"):
            parse_config("horizn: 10\n")
        with pytest.raises(ConfigError, match="growth.n_stranger"):
            parse_config("growth: {n_stranger: 5}\n")

    def test_window_beyond_horizon_rejected(self):
        with pytest.raises(ConfigError):
            parse_config("horizon: 100\nwindow: [50, 150]\n")

    def test_sigmoid_b_and_target_are_exclusive(self):
        with pytest.raises(ConfigError, match="sigmoid"):
            parse_config("sigmoid: {b: 3.0, target_mean: 0.05}\n")
        s = parse_config("sigmoid: {b: 3.0}\n")
        assert s.calibrate_target is None
        assert s.growth.sigmoid_b == 3.0

    def test_bad_mode_rejected(self):
        with pytest.raises(ConfigError, match="modes"):
            parse_config("modes: [organic]\n")

    def test_roundtrip_identity(self):
        for text in (MINIMAL, SMALL):
            s = parse_config(text)
            assert parse_config(serialize_config(s)) == s

    def test_roundtrip_with_ab_sweep_effects(self):
        text = SMALL + """
ab: {scheme: by_community, treated_group: 1}
sweep: {windows: [[4, 8], [4, 12]]}
effects: {times: [12, 24], metrics: [homophily]}
"""
        s = parse_config(text)
        assert parse_config(serialize_config(s)) == s
        assert scenario_to_dict(s)["ab"]["treated_group"] == 1


class TestCsv:
    def test_format_value(self):
        assert format_value(float("nan")) == ""
        assert format_value(0.5) == "0.5"
        assert float(format_value(1 / 3)) == pytest.approx(1 / 3, abs=1e-12)

    def test_row_count_and_undefined_cells(self, tmp_path):
        W = InterventionWindow(0, 1)
        rows = [{"m1": 0.1, "m2": float("nan")}, {"m1": 0.2, "m2": 0.3}]
        tr = Trajectory(RunMode.NATURAL, 0, W, rows)
        path = tmp_path / "t.csv"
        write_trajectories([tr], path)
        got = read_rows(path)
        assert len(got) == 4  # (T+1) * fields
        undefined = [r for r in got if r["metric"] == "m2" and r["t"] == "0"]
        assert undefined[0]["value"] == ""

    def test_values_roundtrip_within_1e12(self, tmp_path):
        s = parse_config(SMALL)
        tr = run_trajectory(s, RunMode.INTERVENED, seed=0)
        path = tmp_path / "t.csv"
        write_trajectories([tr], path)
        for row in read_rows(path):
            t, metric = int(row["t"]), row["metric"]
            want = tr.rows[t].get(metric)
            if row["value"] == "":
                assert math.isnan(want)
            else:
                assert float(row["value"]) == pytest.approx(want, abs=1e-12)

    def test_rows_sorted(self, tmp_path):
        s = parse_config(SMALL)
        trs = [run_trajectory(s, RunMode.NATURAL, seed=k) for k in (0, 1)]
        path = tmp_path / "t.csv"
        write_trajectories(trs, path)
        keys = [(r["run_id"], int(r["t"]), r["metric"]) for r in read_rows(path)]
        assert keys == sorted(keys)


def write_config(tmp_path, text):
    cfg = tmp_path / "scenario.yaml"
    cfg.write_text(text)
    return cfg


class TestCli:
    def test_simulate_smoke(self, tmp_path):
        cfg = write_config(tmp_path, SMALL)
        out = tmp_path / "out"
        assert run_command(["simulate", "--config", str(cfg),
                            "--out", str(out)]) == 0
        rows = read_rows(out / "trajectories.csv")
        s = parse_config(SMALL)
        ts = {int(r["t"]) for r in rows}
        assert ts == set(range(s.horizon + 1))
        modes = {r["mode"] for r in rows}
        assert modes == {"natural", "intervened"}

    def test_simulate_deterministic_bytes(self, tmp_path):
        cfg = write_config(tmp_path, SMALL)
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert run_command(["simulate", "--config", str(cfg), "--out",
                            str(out1)]) == 0
        assert run_command(["simulate", "--config", str(cfg), "--out",
                            str(out2), "--jobs", "2"]) == 0
        assert (out1 / "trajectories.csv").read_bytes() == \
            (out2 / "trajectories.csv").read_bytes()

    def test_effects_report_covers_core_metrics(self, tmp_path):
        cfg = write_config(tmp_path, SMALL)
        out = tmp_path / "out"
        assert run_command(["effects", "--config", str(cfg),
                            "--out", str(out)]) == 0
        rows = read_rows(out / "effects.csv")
        metrics = {r["metric"] for r in rows}
        assert {"homophily", "clustering_global", "gini_global"} <= metrics
        components = {r["component"] for r in rows}
        assert {"total", "delayed", "direct", "indirect"} <= components
        run_rows = read_rows(out / "trajectories.csv")
        assert {"natural", "intervened", "unmediated"} == \
            {r["mode"] for r in run_rows}

    def test_abtest_writes_estimates(self, tmp_path):
        cfg = write_config(tmp_path, SMALL + "ab: {scheme: random_node, p: 0.5}\n")
        out = tmp_path / "out"
        assert run_command(["abtest", "--config", str(cfg),
                            "--out", str(out)]) == 0
        rows = read_rows(out / "ab_estimates.csv")
        assert {r["metric"] for r in rows} == {"clustering", "gini", "homophily"}
        assert {r["adjustment"] for r in rows} == {"naive", "adjusted"}

    def test_abtest_without_ab_section_is_config_error(self, tmp_path):
        cfg = write_config(tmp_path, SMALL)
        out = tmp_path / "out"
        assert run_command(["abtest", "--config", str(cfg),
                            "--out", str(out)]) == 1

    def test_sweep_emits_window_column(self, tmp_path):
        cfg = write_config(tmp_path, SMALL +
                           "sweep: {windows: [[4, 8], [4, 12], [4, 16]]}\n")
        out = tmp_path / "out"
        assert run_command(["sweep", "--config", str(cfg),
                            "--out", str(out)]) == 0
        rows = read_rows(out / "trajectories.csv")
        assert {r["window"] for r in rows} == {"4-8", "4-12", "4-16"}

    def test_bad_config_exit_code(self, tmp_path):
        cfg = write_config(tmp_path, "horizn: 10\n")
        assert run_command(["simulate", "--config", str(cfg),
                            "--out", str(tmp_path / "o")]) == 1

    def test_missing_config_file_exit_code(self, tmp_path):
        assert run_command(["simulate", "--config",
                            str(tmp_path / "nope.yaml"),
                            "--out", str(tmp_path / "o")]) == 1

    def test_seed_base_offsets_seeds(self, tmp_path):
        cfg = write_config(tmp_path, SMALL)
        out = tmp_path / "out"
        assert run_command(["simulate", "--config", str(cfg), "--out",
                            str(out), "--seed-base", "7"]) == 0
        rows = read_rows(out / "trajectories.csv")
        assert {r["seed"] for r in rows} == {"7", "8"}
