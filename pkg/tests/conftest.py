"""Shared fixtures plus a terminal summary for the acceptance suite.

Tests marked @pytest.mark.acceptance(n, "description") get one PASS/FAIL
line each in the terminal summary so the acceptance criteria can be read
off a plain pytest run.
"""

import pytest

_RESULTS = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "acceptance(num, description): acceptance criterion check")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when != "call":
        return
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    num, description = marker.args
    passed = report.outcome == "passed"
    prev = _RESULTS.get(num)
    _RESULTS[num] = (description, (prev[1] if prev else True) and passed)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_RESULTS):
        description, passed = _RESULTS[num]
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"criterion {num:2d}: {status}  {description}")


MANIFEST_TEMPLATE = """\
# test scenario
[scenario]
snapshots = {snapshots}
dt = 0.01
seed = {seed}

[roi]
x_min = -60
x_max = 60
y_min = -40
y_max = 40
z_min = 0
z_max = 20
g_x = 12
g_y = 8
g_z = 4
height_threshold = 0.4

[clusters]
h_c = 3.0

[rf]
carrier_freq_hz = 28e9
bandwidth_hz = 2e9
eta_gr = 0.2

[stochastic]
gamma_gr = 0.5
realizations = 8

[files]
clouds_tx = clouds/tx_{{snapshot:04d}}.csv
clouds_rx = clouds/rx_{{snapshot:04d}}.csv
trajectory_tx = traj_tx.csv
trajectory_rx = traj_rx.csv
truth_grids = truth/truth_{{snapshot:04d}}.vxg
out_dir = {out_dir}

[predictor]
kind = baseline
alpha = 1.0
beta = 0.5

[scene]
vehicles = 2
buildings = 2
uav_height = 60
uav_speed = 4.0
lidar_rings = 8
lidar_azimuth_steps = 24
lidar_max_range = 200
scatterer_spacing = 3.0
"""


def write_demo_manifest(directory, snapshots=6, seed=7, out_dir="out",
                        extra=""):
    path = directory / "scenario.ini"
    text = MANIFEST_TEMPLATE.format(snapshots=snapshots, seed=seed,
                                    out_dir=out_dir)
    path.write_text(text + extra, encoding="utf-8")
    return path


@pytest.fixture
def demo_manifest(tmp_path):
    return write_demo_manifest(tmp_path)
