import math

import numpy as np
import pytest

from u2v_chansim.core import (
    SPEED_OF_LIGHT,
    Pose,
    RfConfig,
    Roi,
    Trajectory,
    Vec3,
    VoxelGrid,
    normalize_heading,
    voxel_center,
    wavelength,
)
from u2v_chansim.errors import ConfigError


class TestVoxelCenter:
    def test_first_voxel_midpoint(self):
        roi = Roi(0, 200, 0, 200, 0, 100, 40, 40, 20)
        assert voxel_center(roi, (0, 0, 0)).x == pytest.approx(2.5)

    def test_last_voxel_midpoint(self):
        roi = Roi(0, 200, 0, 200, 0, 100, 40, 40, 20)
        assert voxel_center(roi, (39, 0, 0)).x == pytest.approx(197.5)

    def test_out_of_range_index(self):
        roi = Roi(0, 200, 0, 200, 0, 100, 40, 40, 20)
        with pytest.raises(IndexError):
            voxel_center(roi, (40, 0, 0))

    def test_adjacent_centers_differ_by_edge_length(self):
        roi = Roi(-100, 100, -50, 150, 0, 40, 40, 25, 16)
        edge = roi.edge_lengths
        a = voxel_center(roi, (3, 4, 5)).as_array()
        bx = voxel_center(roi, (4, 4, 5)).as_array()
        by = voxel_center(roi, (3, 5, 5)).as_array()
        bz = voxel_center(roi, (3, 4, 6)).as_array()
        assert bx[0] - a[0] == pytest.approx(edge[0])
        assert by[1] - a[1] == pytest.approx(edge[1])
        assert bz[2] - a[2] == pytest.approx(edge[2])

    def test_voxels_tile_roi(self):
        roi = Roi(0, 10, 0, 6, 0, 4, 5, 3, 2)
        edge = roi.edge_lengths
        centers = [voxel_center(roi, (ix, iy, iz)).as_array()
                   for ix in range(5) for iy in range(3) for iz in range(2)]
        centers = np.array(centers)
        los = centers - edge / 2.0
        his = centers + edge / 2.0
        assert los.min(axis=0) == pytest.approx([0, 0, 0])
        assert his.max(axis=0) == pytest.approx([10, 6, 4])
        # cell volume times count equals ROI volume
        assert np.prod(edge) * len(centers) == pytest.approx(10 * 6 * 4)


class TestWavelength:
    def test_28ghz(self):
        # hand oracle: c / f with c = 299792458 m/s
        assert wavelength(28e9) == pytest.approx(299792458.0 / 28e9, rel=1e-12)
        assert wavelength(28e9) == pytest.approx(0.010707, abs=1e-6)

    def test_definition(self):
        assert wavelength(SPEED_OF_LIGHT) == 1.0

    def test_nonpositive_rejected(self):
        with pytest.raises(ValueError):
            wavelength(0.0)
        with pytest.raises(ValueError):
            wavelength(-1.0)


class TestVec3Pose:
    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            Vec3(0.0, float("nan"), 0.0)

    def test_heading_normalized(self):
        assert Pose(Vec3(0, 0, 0), 3 * math.pi / 2).heading == pytest.approx(-math.pi / 2)
        assert Pose(Vec3(0, 0, 0), math.pi).heading == pytest.approx(-math.pi)
        assert normalize_heading(-math.pi) == pytest.approx(-math.pi)

    def test_vector_algebra(self):
        a = Vec3(1, 2, 3)
        b = Vec3(-1, 0, 5)
        assert (a + b).as_array() == pytest.approx([0, 2, 8])
        assert (a - b).as_array() == pytest.approx([2, 2, -2])
        assert a.dot(b) == pytest.approx(14.0)
        assert Vec3(3, 4, 0).norm() == pytest.approx(5.0)


class TestTrajectory:
    def test_strictly_increasing_required(self):
        with pytest.raises(ValueError):
            Trajectory(np.array([0.0, 0.0]), np.zeros((2, 3)),
                       np.zeros(2), np.zeros((2, 3)))

    def test_uniform_spacing_required(self):
        with pytest.raises(ValueError):
            Trajectory(np.array([0.0, 0.01, 0.05]), np.zeros((3, 3)),
                       np.zeros(3), np.zeros((3, 3)))

    def test_interpolation_exact_at_samples(self):
        times = np.arange(5) * 0.01
        traj = Trajectory.constant_velocity(Vec3(1, 2, 3), Vec3(10, 0, -1), times)
        for k, t in enumerate(times):
            expect = np.array([1, 2, 3]) + np.array([10, 0, -1]) * (t - times[0])
            assert traj.position_at(t).as_array() == pytest.approx(expect)
        assert traj.velocity_at(0.015).as_array() == pytest.approx([10, 0, -1])

    def test_linear_between_samples(self):
        times = np.array([0.0, 1.0])
        traj = Trajectory(times, np.array([[0.0, 0, 0], [2.0, 0, 0]]),
                          np.zeros(2), np.zeros((2, 3)))
        assert traj.position_at(0.25).x == pytest.approx(0.5)

    def test_out_of_span_query(self):
        traj = Trajectory.constant_velocity(Vec3(0, 0, 0), Vec3(0, 0, 0), [0.0, 0.01])
        with pytest.raises(ValueError):
            traj.position_at(1.0)


class TestVoxelGrid:
    def test_shape_must_match_roi(self):
        roi = Roi(0, 1, 0, 1, 0, 1, 2, 2, 2)
        with pytest.raises(ValueError):
            VoxelGrid(roi, np.zeros((1, 3, 2, 2)))

    def test_values_read_only(self):
        roi = Roi(0, 1, 0, 1, 0, 1, 2, 2, 2)
        grid = VoxelGrid(roi, np.zeros((1, 2, 2, 2)))
        with pytest.raises(ValueError):
            grid.values[0, 0, 0, 0] = 1.0

    def test_non_finite_rejected(self):
        roi = Roi(0, 1, 0, 1, 0, 1, 2, 2, 2)
        vals = np.zeros((1, 2, 2, 2))
        vals[0, 0, 0, 0] = np.inf
        with pytest.raises(ValueError):
            VoxelGrid(roi, vals)


class TestRfConfig:
    def test_wavelength_derived(self):
        rf = RfConfig(carrier_freq_hz=28e9, bandwidth_hz=2e9)
        assert rf.wavelength_m * rf.carrier_freq_hz == pytest.approx(SPEED_OF_LIGHT, rel=1e-9)

    def test_inconsistent_wavelength_rejected(self):
        with pytest.raises(ConfigError):
            RfConfig(carrier_freq_hz=28e9, bandwidth_hz=2e9, wavelength_m=0.02)

    def test_eta_nlos_derived(self):
        rf = RfConfig(carrier_freq_hz=28e9, bandwidth_hz=2e9, eta_gr=0.3)
        assert rf.eta_nlos == pytest.approx(0.7)

    def test_eta_gr_range(self):
        with pytest.raises(ConfigError):
            RfConfig(carrier_freq_hz=28e9, bandwidth_hz=2e9, eta_gr=1.4)

    def test_omega_auto_allowed(self):
        rf = RfConfig(carrier_freq_hz=28e9, bandwidth_hz=2e9, ricean_omega="auto")
        assert rf.ricean_omega == "auto"
        with pytest.raises(ConfigError):
            RfConfig(carrier_freq_hz=28e9, bandwidth_hz=2e9, ricean_omega="sometimes")

    def test_negative_omega_rejected(self):
        with pytest.raises(ConfigError):
            RfConfig(carrier_freq_hz=28e9, bandwidth_hz=2e9, ricean_omega=-1.0)
