import pytest

from u2v_chansim.errors import ConfigError
from u2v_chansim.manifest import parse_manifest
from conftest import write_demo_manifest

MINIMAL = """\
[scenario]
snapshots = 5
dt = 0.01

[roi]
x_min = 0
x_max = 100
y_min = 0
y_max = 100
z_min = 0
z_max = 20
g_x = 10
g_y = 10
g_z = 4

[rf]
carrier_freq_hz = 28e9
bandwidth_hz = 2e9

[files]
clouds_tx = clouds/tx_{snapshot:04d}.csv
clouds_rx = clouds/rx_{snapshot:04d}.csv
trajectory_tx = tx.csv
trajectory_rx = rx.csv
"""


def write(tmp_path, text, name="m.ini"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


class TestDefaults:
    def test_minimal_manifest_fills_defaults(self, tmp_path):
        m = parse_manifest(write(tmp_path, MINIMAL))
        assert m.baseline.round_threshold == 0.5
        assert m.h_c == 3.0
        assert m.realizations == 50
        assert m.seed == 0
        assert m.transform_convention == "paper"
        assert m.predictor.kind == "baseline"
        assert m.rf.window == (0.0, pytest.approx(0.04))
        assert m.height_threshold == 0.0
        assert m.cloud_frame == "sensor-local"
        assert m.scene is None

    def test_demo_manifest_parses(self, tmp_path):
        m = parse_manifest(write_demo_manifest(tmp_path))
        assert m.snapshots == 6
        assert m.scene is not None
        assert m.scene.vehicles == 2
        assert m.roi.dims == (12, 8, 4)

    def test_overrides(self, tmp_path):
        path = write(tmp_path, MINIMAL)
        m = parse_manifest(path, seed_override=99, out_dir_override=tmp_path / "other")
        assert m.seed == 99
        assert m.out_dir == tmp_path / "other"

    def test_paths_relative_to_manifest(self, tmp_path):
        m = parse_manifest(write(tmp_path, MINIMAL))
        assert m.path_for("trajectory_tx") == tmp_path / "tx.csv"
        assert m.path_for("clouds_tx", 3) == tmp_path / "clouds" / "tx_0003.csv"


class TestValidation:
    def test_eta_gr_out_of_range(self, tmp_path):
        text = MINIMAL.replace("bandwidth_hz = 2e9", "bandwidth_hz = 2e9\neta_gr = 1.4")
        with pytest.raises(ConfigError):
            parse_manifest(write(tmp_path, text))

    def test_zero_dt(self, tmp_path):
        with pytest.raises(ConfigError, match="dt"):
            parse_manifest(write(tmp_path, MINIMAL.replace("dt = 0.01", "dt = 0")))

    def test_zero_snapshots(self, tmp_path):
        with pytest.raises(ConfigError, match="snapshots"):
            parse_manifest(write(tmp_path, MINIMAL.replace("snapshots = 5",
                                                           "snapshots = 0")))

    def test_unknown_key_reports_line_number(self, tmp_path):
        text = MINIMAL + "frobnicate = 1\n"
        lineno = len(MINIMAL.splitlines()) + 1
        with pytest.raises(ConfigError, match=f"line {lineno}.*frobnicate"):
            parse_manifest(write(tmp_path, text))

    def test_unknown_section_reports_line_number(self, tmp_path):
        text = MINIMAL + "[warp]\nfactor = 9\n"
        lineno = len(MINIMAL.splitlines()) + 1
        with pytest.raises(ConfigError, match=f"line {lineno}"):
            parse_manifest(write(tmp_path, text))

    def test_missing_required_key_named(self, tmp_path):
        text = MINIMAL.replace("trajectory_rx = rx.csv\n", "")
        with pytest.raises(ConfigError, match="trajectory_rx"):
            parse_manifest(write(tmp_path, text))

    def test_missing_section_named(self, tmp_path):
        text = MINIMAL.replace("[rf]\ncarrier_freq_hz = 28e9\nbandwidth_hz = 2e9\n", "")
        with pytest.raises(ConfigError, match=r"\[rf\]"):
            parse_manifest(write(tmp_path, text))

    def test_duplicate_key_rejected(self, tmp_path):
        text = MINIMAL + "out_dir = a\nout_dir = b\n"
        with pytest.raises(ConfigError, match="duplicate"):
            parse_manifest(write(tmp_path, text))

    def test_file_predictor_needs_pattern(self, tmp_path):
        text = MINIMAL + "[predictor]\nkind = file\n"
        with pytest.raises(ConfigError, match="prediction_grids"):
            parse_manifest(write(tmp_path, text))

    def test_round_threshold_zero_rejected(self, tmp_path):
        text = MINIMAL + "[predictor]\nkind = baseline\nround_threshold = 0\n"
        with pytest.raises(ConfigError):
            parse_manifest(write(tmp_path, text))

    def test_bad_number_reports_line(self, tmp_path):
        text = MINIMAL.replace("dt = 0.01", "dt = quick")
        with pytest.raises(ConfigError, match="dt"):
            parse_manifest(write(tmp_path, text))

    def test_missing_manifest_file(self, tmp_path):
        with pytest.raises(ConfigError):
            parse_manifest(tmp_path / "nope.ini")

    def test_comments_and_blank_lines_ignored(self, tmp_path):
        text = "# top comment\n\n" + MINIMAL.replace(
            "dt = 0.01", "dt = 0.01   # snapshot interval")
        m = parse_manifest(write(tmp_path, text))
        assert m.dt == 0.01
