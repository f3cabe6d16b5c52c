import json

from rieszlab.asymptotics import AsymptoticTrace, TraceRecord
from rieszlab.cli import main
from rieszlab.geometry import set_hash
from rieszlab.presets import preset_dict


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def write_config(tmp_path, data, name="set.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


def synthetic_trace(set_id, kind, G_values, s=3.0, d=1.0, frac=0.5,
                    component_ids=None):
    records = []
    for i, g in enumerate(G_values):
        n = 10 + 2 * i
        n1 = round(frac * n)
        e = g * n ** (1.0 + s / d)
        records.append(TraceRecord(N=n, E_best=e, G=g, N1=n1, N2=n - n1,
                                   frac1=n1 / n, min_dist=0.1, status="heuristic"))
    return AsymptoticTrace(records=tuple(records), set_id=set_id, set_kind=kind,
                           s=s, d=d, component_ids=component_ids)


class TestSolveCommand:
    def test_segment_three_points(self, tmp_path, capsys):
        # The CLI enforces the s > d regime, so the segment runs at s=2,
        # where the optimum is {0, 1/2, 1} with ordered-pair energy 18.
        cfg = write_config(tmp_path, {"type": "segment", "a": [0.0], "b": [1.0]})
        out_json = tmp_path / "result.json"
        code, out, err = run(
            capsys, "solve", "--config", cfg, "--s", "2.0", "--n", "3",
            "--restarts", "2", "--seed", "1",
            "--cache", str(tmp_path / "cache.json"), "--out", str(out_json),
        )
        assert code == 0
        energy = float(out.split("energy=")[1].split()[0])
        assert abs(energy - 18.0) < 1e-6
        payload = json.loads(out_json.read_text())
        assert payload["schema_version"] == 1
        assert payload["N1"] == 3 and payload["N2"] == 0
        assert len(payload["configuration"]["points"]) == 3

    def test_preset_union_accepted(self, tmp_path, capsys):
        code, out, err = run(
            capsys, "solve", "--config", "example-union", "--s", "3.0", "--n", "2",
            "--restarts", "2", "--cache", str(tmp_path / "c.json"),
        )
        assert code == 0
        assert "N1=1" in out

    def test_separation_violation_is_validation_error(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {
            "type": "union",
            "A1": {"type": "segment", "a": [0.0, 0.0], "b": [1.0, 0.0]},
            "A2": {"type": "segment", "a": [0.0, 0.5], "b": [1.0, 0.5]},
        })
        code, out, err = run(capsys, "solve", "--config", cfg, "--s", "2.0", "--n", "2",
                             "--cache", str(tmp_path / "c.json"))
        assert code == 2
        payload = json.loads(err)
        msg = payload["error"]["message"]
        assert "separation" in msg and "diam" in msg

    def test_s_below_dimension_rejected(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"type": "segment", "a": [0.0], "b": [1.0]})
        code, out, err = run(capsys, "solve", "--config", cfg, "--s", "0.5", "--n", "2",
                             "--cache", str(tmp_path / "c.json"))
        assert code == 2
        assert "exceed" in json.loads(err)["error"]["message"]

    def test_s_equal_dimension_rejected(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"type": "segment", "a": [0.0], "b": [1.0]})
        code, out, err = run(capsys, "solve", "--config", cfg, "--s", "1.0", "--n", "2",
                             "--cache", str(tmp_path / "c.json"))
        assert code == 2

    def test_missing_config_is_io_error(self, tmp_path, capsys):
        code, out, err = run(capsys, "solve", "--config", str(tmp_path / "nope.json"),
                             "--s", "2.0", "--n", "2")
        assert code == 4

    def test_malformed_json_is_validation_error(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        code, out, err = run(capsys, "solve", "--config", str(path), "--s", "2.0",
                             "--n", "2")
        assert code == 2

    def test_unknown_schema_key_is_validation_error(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"type": "segment", "a": [0.0], "b": [1.0],
                                      "oops": 1})
        code, out, err = run(capsys, "solve", "--config", cfg, "--s", "2.0", "--n", "2",
                             "--cache", str(tmp_path / "c.json"))
        assert code == 2
        assert "unknown keys" in json.loads(err)["error"]["message"]

    def test_infeasible_depth_is_exit_3(self, tmp_path, capsys):
        code, out, err = run(
            capsys, "solve", "--config", "example-fractal", "--s", "3.0", "--n", "5",
            "--depth", "1", "--cache", str(tmp_path / "c.json"),
        )
        assert code == 3
        assert "depth" in json.loads(err)["error"]["message"]


class TestSweepCommand:
    def sweep_args(self, tmp_path, extra=()):
        return ["sweep", "--config", "example-segment", "--s", "2.0",
                "--n-min", "2", "--n-max", "6", "--restarts", "2", "--seed", "3",
                "--deterministic",
                "--cache", str(tmp_path / "cache.json"),
                "--out", str(tmp_path / "trace.csv"), *extra]

    def test_sweep_writes_trace_and_summary(self, tmp_path, capsys):
        code, out, err = run(capsys, *self.sweep_args(tmp_path))
        assert code == 0
        text = (tmp_path / "trace.csv").read_text()
        meta = json.loads(text.splitlines()[0][2:])
        assert meta["schema_version"] == 1
        assert meta["set"] == preset_dict("example-segment")
        assert len(text.splitlines()) == 2 + 5  # meta + header + rows
        summary = json.loads((tmp_path / "trace.summary.json").read_text())
        assert summary["solved"] == 5
        assert summary["from_cache"] == 0
        assert "gamma" in summary

    def test_warm_rerun_zero_new_solves_identical_csv(self, tmp_path, capsys):
        run(capsys, *self.sweep_args(tmp_path))
        first = (tmp_path / "trace.csv").read_text()
        code, out, err = run(capsys, *self.sweep_args(tmp_path))
        assert code == 0
        summary = json.loads((tmp_path / "trace.summary.json").read_text())
        assert summary["solved"] == 0
        assert summary["from_cache"] == 5
        assert (tmp_path / "trace.csv").read_text() == first

    def test_fresh_reruns_bit_identical(self, tmp_path, capsys):
        run(capsys, *self.sweep_args(tmp_path))
        first = (tmp_path / "trace.csv").read_text()
        (tmp_path / "cache.json").unlink()
        run(capsys, *self.sweep_args(tmp_path))
        assert (tmp_path / "trace.csv").read_text() == first

    def test_force_resolves(self, tmp_path, capsys):
        run(capsys, *self.sweep_args(tmp_path))
        code, out, err = run(capsys, *self.sweep_args(tmp_path, extra=["--force"]))
        assert code == 0
        summary = json.loads((tmp_path / "trace.summary.json").read_text())
        assert summary["solved"] == 5

    def test_partial_trace_persisted_on_failure(self, tmp_path, capsys):
        args = ["sweep", "--config", "example-fractal", "--s", "3.0",
                "--n-min", "2", "--n-max", "8", "--depth", "1", "--restarts", "1",
                "--cache", str(tmp_path / "c.json"), "--out", str(tmp_path / "t.csv")]
        code, out, err = run(capsys, *args)
        assert code == 3
        text = (tmp_path / "t.csv").read_text()
        assert len(text.splitlines()) == 2 + 3  # N = 2, 3, 4 completed
        summary = json.loads((tmp_path / "t.summary.json").read_text())
        assert summary["failed_N"] == 5

    def test_invalid_range_rejected(self, tmp_path, capsys):
        code, out, err = run(capsys, "sweep", "--config", "example-segment",
                             "--s", "2.0", "--n-min", "5", "--n-max", "3",
                             "--cache", str(tmp_path / "c.json"))
        assert code == 2

    def test_env_var_cache_location(self, tmp_path, capsys, monkeypatch):
        env_cache = tmp_path / "env_cache.json"
        monkeypatch.setenv("RIESZLAB_CACHE", str(env_cache))
        args = ["sweep", "--config", "example-segment", "--s", "2.0",
                "--n-min", "2", "--n-max", "3", "--restarts", "1",
                "--out", str(tmp_path / "t.csv")]
        code, out, err = run(capsys, *args)
        assert code == 0
        assert env_cache.exists()


class TestReportCommand:
    def write_trace(self, path, trace):
        path.write_text(trace.to_csv())

    def test_single_constant_trace(self, tmp_path, capsys):
        h = set_hash(preset_dict("example-union"))
        trace = synthetic_trace(h, "union", [2.0] * 6)
        p = tmp_path / "t.csv"
        self.write_trace(p, trace)
        code, out, err = run(capsys, "report", str(p))
        assert code == 0
        report = json.loads(out)
        entry = report["traces"][0]
        assert entry["gamma"]["spread"] == 0.0
        assert entry["lemma3_flags"] == []
        assert "weak_star" in entry

    def test_predictions_from_matched_components(self, tmp_path, capsys):
        h1 = set_hash(preset_dict("example-fractal"))
        h2 = set_hash(preset_dict("example-segment"))
        hu = set_hash(preset_dict("example-union"))
        union_trace = synthetic_trace(hu, "union", [2.0] * 6,
                                      component_ids=(h1, h2))
        t1 = synthetic_trace(h1, "ifs", [3.0] * 6)
        t2 = synthetic_trace(h2, "segment", [3.0] * 6)
        paths = []
        for name, tr in [("u.csv", union_trace), ("a.csv", t1), ("b.csv", t2)]:
            p = tmp_path / name
            self.write_trace(p, tr)
            paths.append(str(p))
        code, out, err = run(capsys, "report", *paths, "--out", str(tmp_path / "r.json"))
        assert code == 0
        report = json.loads((tmp_path / "r.json").read_text())
        # Equal constants on both components: the predicted split is even.
        assert report["predictions"]["alpha_star"] == 0.5
        assert report["predictions"]["beta_star"] == 0.5

    def test_mismatched_s_rejected(self, tmp_path, capsys):
        t1 = synthetic_trace("aaaa", "union", [2.0] * 4, s=3.0)
        t2 = synthetic_trace("bbbb", "segment", [2.0] * 4, s=2.0)
        p1, p2 = tmp_path / "1.csv", tmp_path / "2.csv"
        self.write_trace(p1, t1)
        self.write_trace(p2, t2)
        code, out, err = run(capsys, "report", str(p1), str(p2))
        assert code == 2
        assert "disagree on s" in json.loads(err)["error"]["message"]

    def test_missing_trace_is_io_error(self, tmp_path, capsys):
        code, out, err = run(capsys, "report", str(tmp_path / "absent.csv"))
        assert code == 4

    def test_schema_version_mismatch_rejected(self, tmp_path, capsys):
        trace = synthetic_trace("cccc", "union", [2.0] * 4)
        text = trace.to_csv().replace('"schema_version": 1', '"schema_version": 7')
        p = tmp_path / "t.csv"
        p.write_text(text)
        code, out, err = run(capsys, "report", str(p))
        assert code == 2
        assert "schema version" in json.loads(err)["error"]["message"]
