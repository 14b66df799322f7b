import filecmp
import subprocess
import sys

import numpy as np
import pytest

from u2v_chansim.cli import main
from u2v_chansim.manifest import parse_manifest
from u2v_chansim.pipeline import run_pipeline, run_preprocess, split_indices
from u2v_chansim.prediction import RawPredictionGrid, store_predictions
from u2v_chansim.scene import synth_scene
from u2v_chansim.vxg import read_vxg
from conftest import write_demo_manifest


def make_scenario(directory, snapshots=5, seed=7, out_dir="out", extra=""):
    path = write_demo_manifest(directory, snapshots=snapshots, seed=seed,
                               out_dir=out_dir, extra=extra)
    synth_scene(parse_manifest(path))
    return path


class TestSplitIndices:
    def test_exact_ratio_on_multiples_of_five(self):
        split = split_indices(100, seed=3)
        assert len(split["train"]) == 60
        assert len(split["val"]) == 20
        assert len(split["test"]) == 20

    def test_partition(self):
        split = split_indices(37, seed=1)
        combined = sorted(split["train"] + split["val"] + split["test"])
        assert combined == list(range(37))

    def test_deterministic_in_seed(self):
        assert split_indices(50, seed=9) == split_indices(50, seed=9)
        assert split_indices(50, seed=9) != split_indices(50, seed=10)


class TestRunPipeline:
    def test_full_run_outputs(self, tmp_path):
        path = make_scenario(tmp_path)
        manifest = parse_manifest(path)
        result = run_pipeline(manifest, path)
        names = {p.name for p in result.outputs}
        assert {"metrics.csv", "clusters.csv", "cir.csv", "tacf.csv",
                "dpsd.csv", "fcf.csv", "transfer_grid.vxg"} <= names
        for p in result.outputs:
            assert p.is_file()
        assert len(result.features) == manifest.snapshots
        assert result.realization is not None
        # taps exist inside the window: direct + ground + one per cluster
        for cluster_set, taps in zip(result.cluster_sets, result.realization.taps):
            assert len(taps) == len(cluster_set) + 2

    def test_metrics_header_and_rows(self, tmp_path):
        path = make_scenario(tmp_path)
        manifest = parse_manifest(path)
        run_pipeline(manifest, path)
        lines = (manifest.out_dir / "metrics.csv").read_text().splitlines()
        assert lines[0] == "snapshot_id,tp,fp,fn,tn,precision,recall,f1"
        assert len(lines) == 1 + manifest.snapshots + 1  # rows + micro summary
        assert lines[-1].startswith("micro,")

    def test_stats_headers_echo_seed(self, tmp_path):
        path = make_scenario(tmp_path, seed=13)
        manifest = parse_manifest(path)
        run_pipeline(manifest, path)
        text = (manifest.out_dir / "tacf.csv").read_text()
        assert "# seed = 13" in text
        assert "delta_t_s,abs_tacf" in text

    def test_parallel_preprocess_matches_serial(self, tmp_path):
        path = make_scenario(tmp_path)
        manifest = parse_manifest(path)
        serial = run_preprocess(manifest, path, jobs=1)
        parallel = run_preprocess(manifest, path, jobs=2)
        for a, b in zip(serial, parallel):
            assert np.array_equal(a.values, b.values)


class TestCli:
    def run_cli(self, *argv):
        return main(list(argv))

    def test_simulate_exit_zero(self, tmp_path, capsys):
        path = make_scenario(tmp_path)
        assert self.run_cli("simulate", "--manifest", str(path)) == 0
        out = capsys.readouterr().out
        assert "cir.csv" in out

    def test_synth_scene_then_simulate_subprocess(self, tmp_path):
        path = write_demo_manifest(tmp_path, snapshots=4)
        env_run = subprocess.run(
            [sys.executable, "-m", "u2v_chansim", "synth-scene",
             "--manifest", str(path)], capture_output=True, text=True)
        assert env_run.returncode == 0, env_run.stderr
        sim = subprocess.run(
            [sys.executable, "-m", "u2v_chansim", "simulate",
             "--manifest", str(path)], capture_output=True, text=True)
        assert sim.returncode == 0, sim.stderr
        assert (tmp_path / "out" / "metrics.csv").is_file()

    def test_missing_manifest_is_config_error(self, tmp_path, capsys):
        code = self.run_cli("simulate", "--manifest", str(tmp_path / "nope.ini"))
        assert code == 1

    def test_bad_manifest_value_is_config_error(self, tmp_path):
        path = write_demo_manifest(tmp_path, extra="\n[rf]\n")  # duplicate section keys
        # rewrite with an invalid value instead
        text = path.read_text().replace("eta_gr = 0.2", "eta_gr = 1.4")
        path.write_text(text)
        assert self.run_cli("simulate", "--manifest", str(path)) == 1

    def test_missing_prediction_file_is_predictor_stage_failure(self, tmp_path, capsys):
        extra = "\nprediction_grids = preds/p_{snapshot:04d}.vxg\n"
        path = write_demo_manifest(tmp_path)
        text = path.read_text().replace("kind = baseline", "kind = file")
        text = text.replace("trajectory_rx = traj_rx.csv",
                            "trajectory_rx = traj_rx.csv\n"
                            "prediction_grids = preds/p_{snapshot:04d}.vxg")
        path.write_text(text)
        synth_scene(parse_manifest(path))
        code = self.run_cli("simulate", "--manifest", str(path))
        assert code == 2
        err = capsys.readouterr().err
        assert "predictor" in err

    def test_unwritable_out_dir_is_io_error(self, tmp_path):
        path = make_scenario(tmp_path)
        blocker = tmp_path / "blocked"
        blocker.write_text("file, not a directory")
        code = self.run_cli("simulate", "--manifest", str(path),
                            "--out-dir", str(blocker / "sub"))
        assert code == 3

    def test_evaluate_single_pair_one_row(self, tmp_path, capsys):
        path = make_scenario(tmp_path)
        manifest = parse_manifest(path)
        truth_path = manifest.path_for("truth_grids", 0)
        truth = read_vxg(truth_path)
        pred_path = tmp_path / "pred.vxg"
        store_predictions(RawPredictionGrid(manifest.roi, truth.values[0]), pred_path)
        code = self.run_cli("evaluate", "--pred", str(pred_path),
                            "--truth", str(truth_path))
        assert code == 0
        out = capsys.readouterr().out.strip().splitlines()
        assert len(out) == 1
        fields = out[0].split(",")
        assert fields[0] == "pred"
        # perfect self-match
        assert float(fields[5]) == float(fields[6]) == float(fields[7]) == 1.0

    def test_evaluate_header_flag(self, tmp_path, capsys):
        path = make_scenario(tmp_path)
        manifest = parse_manifest(path)
        truth_path = manifest.path_for("truth_grids", 0)
        truth = read_vxg(truth_path)
        pred_path = tmp_path / "pred.vxg"
        store_predictions(RawPredictionGrid(manifest.roi, truth.values[0]), pred_path)
        assert self.run_cli("evaluate", "--pred", str(pred_path),
                            "--truth", str(truth_path), "--header") == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "snapshot_id,tp,fp,fn,tn,precision,recall,f1"
        assert len(lines) == 2

    def test_evaluate_manifest_mode(self, tmp_path, capsys):
        path = make_scenario(tmp_path, snapshots=3)
        code = self.run_cli("evaluate", "--manifest", str(path))
        assert code == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0].startswith("snapshot_id,")
        assert len(lines) == 4

    def test_preprocess_and_predict_write_grids(self, tmp_path):
        path = make_scenario(tmp_path, snapshots=3)
        manifest = parse_manifest(path)
        assert self.run_cli("preprocess", "--manifest", str(path)) == 0
        assert self.run_cli("predict", "--manifest", str(path)) == 0
        features = read_vxg(manifest.out_dir / "features" / "features_0000.vxg")
        assert features.channels == 3
        pred = read_vxg(manifest.out_dir / "predictions" / "pred_0000.vxg")
        assert pred.channels == 1

    def test_stats_only_outputs(self, tmp_path):
        path = make_scenario(tmp_path, snapshots=4, out_dir="stats_out")
        manifest = parse_manifest(path)
        assert self.run_cli("stats", "--manifest", str(path)) == 0
        assert (manifest.out_dir / "tacf.csv").is_file()
        assert (manifest.out_dir / "fcf.csv").is_file()
        assert not (manifest.out_dir / "metrics.csv").exists()

    def test_seed_flag_changes_outputs(self, tmp_path):
        path = make_scenario(tmp_path)
        assert self.run_cli("simulate", "--manifest", str(path),
                            "--out-dir", str(tmp_path / "o1"), "--seed", "1") == 0
        assert self.run_cli("simulate", "--manifest", str(path),
                            "--out-dir", str(tmp_path / "o2"), "--seed", "2") == 0
        a = (tmp_path / "o1" / "cir.csv").read_bytes()
        b = (tmp_path / "o2" / "cir.csv").read_bytes()
        assert a != b


class TestDeterminism:
    def test_simulate_byte_identical_given_seed(self, tmp_path):
        path = make_scenario(tmp_path)
        for sub in ("run1", "run2"):
            assert main(["simulate", "--manifest", str(path),
                         "--out-dir", str(tmp_path / sub)]) == 0
        run1 = sorted((tmp_path / "run1").rglob("*"))
        run2 = sorted((tmp_path / "run2").rglob("*"))
        names1 = [p.relative_to(tmp_path / "run1") for p in run1 if p.is_file()]
        names2 = [p.relative_to(tmp_path / "run2") for p in run2 if p.is_file()]
        assert names1 == names2 and names1
        for rel in names1:
            assert filecmp.cmp(tmp_path / "run1" / rel, tmp_path / "run2" / rel,
                               shallow=False), rel
