import math

import numpy as np
import pytest

from u2v_chansim.core import Pose, Roi, Vec3
from u2v_chansim.lidar import (
    SENSOR_LOCAL,
    WORLD,
    FilterConfig,
    PointCloud,
    Snapshot,
    build_feature_grid,
    distance_features,
    filter_valid,
    from_world,
    register,
    to_world,
    voxelize_counts,
)


def local(points):
    return PointCloud(SENSOR_LOCAL, np.asarray(points, dtype=float))


def world(points):
    return PointCloud(WORLD, np.asarray(points, dtype=float))


class TestToWorld:
    def test_zero_heading_is_componentwise_subtraction(self):
        out = to_world(local([[1, 2, 3]]), Pose(Vec3(10, 20, 5), 0.0))
        assert out.points[0] == pytest.approx([9, 18, 2])
        assert out.frame == WORLD

    def test_quarter_turn(self):
        # hand evaluation: cos = 0, sin = 1 so x = x_s + y_l, y = y_s + x_l
        out = to_world(local([[1, 0, 0]]), Pose(Vec3(10, 20, 5), math.pi / 2))
        assert out.points[0] == pytest.approx([10, 21, 5])

    def test_origin_maps_to_sensor_position(self):
        for heading in (0.0, 0.3, -1.2, math.pi / 2):
            out = to_world(local([[0, 0, 0]]), Pose(Vec3(4, -7, 2), heading))
            assert out.points[0] == pytest.approx([4, -7, 2])

    def test_conventional_is_rigid(self):
        rng = np.random.default_rng(7)
        pts = rng.normal(size=(50, 3))
        pose = Pose(Vec3(3, -2, 1), 0.77)
        out = to_world(local(pts), pose, convention="conventional")
        # pairwise distances preserved by a rigid transform
        d_in = np.linalg.norm(pts[:1] - pts, axis=1)
        d_out = np.linalg.norm(out.points[:1] - out.points, axis=1)
        assert d_out == pytest.approx(d_in)

    def test_wrong_frame_rejected(self):
        with pytest.raises(ValueError):
            to_world(world([[0, 0, 0]]), Pose(Vec3(0, 0, 0), 0.0))

    @pytest.mark.parametrize("convention", ["paper", "conventional"])
    def test_from_world_inverts(self, convention):
        rng = np.random.default_rng(11)
        pts = rng.normal(scale=5.0, size=(40, 3))
        # paper transform invertible only at multiples of pi/2
        heading = 0.0 if convention == "paper" else 0.9
        pose = Pose(Vec3(1, 2, 3), heading)
        roundtrip = from_world(to_world(local(pts), pose, convention), pose, convention)
        assert roundtrip.points == pytest.approx(pts)
        assert roundtrip.frame == SENSOR_LOCAL

    def test_paper_inverse_singular_at_quarter_pi(self):
        with pytest.raises(ValueError):
            from_world(world([[1, 1, 1]]), Pose(Vec3(0, 0, 0), math.pi / 4), "paper")


class TestRegister:
    def test_cardinality_additive(self):
        out = register(world(np.zeros((3, 3))), world(np.ones((4, 3))))
        assert len(out) == 7

    def test_empty_identity(self):
        pts = np.arange(9.0).reshape(3, 3)
        out = register(world(np.empty((0, 3))), world(pts))
        assert out.points == pytest.approx(pts)

    def test_duplicates_kept(self):
        p = [[1.0, 2.0, 3.0]]
        out = register(world(p), world(p))
        assert len(out) == 2

    def test_frame_mismatch(self):
        with pytest.raises(ValueError):
            register(local([[0, 0, 0]]), world([[0, 0, 0]]))


class TestFilterValid:
    ROI = Roi(-10, 10, -10, 10, 0, 20, 4, 4, 4)

    def test_below_height_threshold_removed(self):
        cfg = FilterConfig(self.ROI, height_threshold=1.0)
        out = filter_valid(world([[0, 0, 0.99], [0, 0, 1.0]]), cfg)
        assert out.points == pytest.approx(np.array([[0, 0, 1.0]]))

    def test_half_open_faces(self):
        cfg = FilterConfig(self.ROI, height_threshold=0.0)
        lower = [[-10.0, -10.0, 0.0]]
        upper = [[10.0, 0.0, 5.0]]
        assert len(filter_valid(world(lower), cfg)) == 1
        assert len(filter_valid(world(upper), cfg)) == 0

    def test_empty_cloud(self):
        cfg = FilterConfig(self.ROI, height_threshold=0.0)
        assert len(filter_valid(world(np.empty((0, 3))), cfg)) == 0


class TestVoxelizeCounts:
    def test_floor_indexing(self):
        roi = Roi(-100, 100, -100, 100, 0, 100, 40, 40, 20)
        # edge length 5; x = -97.5 is 2.5 into the grid so index 0
        grid = voxelize_counts(world([[-97.5, -99.0, 1.0]]), roi)
        assert grid.values[0, 0, 0, 0] == 1

    def test_conservation(self):
        roi = Roi(0, 10, 0, 10, 0, 10, 3, 4, 5)
        rng = np.random.default_rng(3)
        pts = rng.uniform(0, 10, size=(1000, 3)) * 0.999
        grid = voxelize_counts(world(pts), roi)
        assert grid.values.sum() == 1000

    def test_near_upper_face_maps_to_last_voxel(self):
        roi = Roi(0, 10, 0, 10, 0, 10, 5, 5, 5)
        grid = voxelize_counts(world([[10 - 1e-9, 0, 0]]), roi)
        assert grid.values[0, 4, 0, 0] == 1

    def test_out_of_roi_point_rejected(self):
        roi = Roi(0, 10, 0, 10, 0, 10, 5, 5, 5)
        with pytest.raises(ValueError):
            voxelize_counts(world([[11.0, 0, 0]]), roi)


class TestDistanceFeatures:
    ROI = Roi(-100, 100, -100, 100, 0, 20, 40, 40, 4)

    def test_collinear_distance(self):
        # voxel centers along z: 2.5, 7.5, ...; pick the voxel centered at (0, 0, 10)
        roi = Roi(-5, 5, -5, 5, 0, 20, 1, 1, 1)
        grid = distance_features(roi, Vec3(0, 0, 60), Vec3(0, 0, 0))
        assert grid.values[0, 0, 0, 0] == pytest.approx(50.0)

    def test_tx_at_voxel_center(self):
        grid = distance_features(self.ROI, Vec3(-97.5, -97.5, 2.5), Vec3(0, 0, 0))
        assert grid.values[0, 0, 0, 0] == 0.0

    def test_swap_swaps_channels(self):
        a = distance_features(self.ROI, Vec3(1, 2, 3), Vec3(-4, 5, 6))
        b = distance_features(self.ROI, Vec3(-4, 5, 6), Vec3(1, 2, 3))
        assert a.values[0] == pytest.approx(b.values[1])
        assert a.values[1] == pytest.approx(b.values[0])

    def test_triangle_inequality_against_baseline(self):
        tx, rx = Vec3(-40, 10, 60), Vec3(55, -3, 1.5)
        d_link = (tx - rx).norm()
        grid = distance_features(self.ROI, tx, rx)
        assert np.all(grid.values[0] + grid.values[1] >= d_link - 1e-9)


class TestBuildFeatureGrid:
    def test_paper_shape(self):
        roi = Roi(-100, 100, -100, 100, 0, 20, 40, 40, 20)
        cfg = FilterConfig(roi, height_threshold=0.5)
        snap = Snapshot(local(np.empty((0, 3))), local(np.empty((0, 3))),
                        Pose(Vec3(0, 0, 60), 0.0), Pose(Vec3(10, 0, 1.5), 0.0))
        grid = build_feature_grid(snap, cfg)
        assert grid.values.shape == (3, 40, 40, 20)

    def test_empty_clouds_zero_density(self):
        roi = Roi(-100, 100, -100, 100, 0, 20, 10, 10, 5)
        cfg = FilterConfig(roi, height_threshold=0.5)
        tx_pose, rx_pose = Pose(Vec3(0, 0, 60), 0.0), Pose(Vec3(10, 0, 1.5), 0.0)
        snap = Snapshot(local(np.empty((0, 3))), local(np.empty((0, 3))), tx_pose, rx_pose)
        grid = build_feature_grid(snap, cfg)
        assert np.all(grid.values[0] == 0)
        dists = distance_features(roi, tx_pose.position, rx_pose.position)
        assert grid.values[1:] == pytest.approx(dists.values)

    def test_deterministic(self):
        roi = Roi(-50, 50, -50, 50, 0, 20, 8, 8, 4)
        cfg = FilterConfig(roi, height_threshold=0.5)
        rng = np.random.default_rng(5)
        pts = rng.uniform(-20, 20, size=(200, 3))
        snap = Snapshot(local(pts), local(pts + 0.1),
                        Pose(Vec3(0, 0, 60), 0.0), Pose(Vec3(10, 0, 1.5), 0.0))
        a = build_feature_grid(snap, cfg)
        b = build_feature_grid(snap, cfg)
        assert np.array_equal(a.values, b.values)


class TestConservationProperties:
    """Randomized conservation suite over many clouds."""

    def test_voxel_sum_matches_valid_count_and_indices_in_bounds(self):
        rng = np.random.default_rng(42)
        for case in range(120):
            roi = Roi(-50, 50, -50, 50, 0, 30,
                      int(rng.integers(1, 12)), int(rng.integers(1, 12)),
                      int(rng.integers(1, 8)))
            h_t = float(rng.uniform(0, 5))
            cfg = FilterConfig(roi, h_t)
            n = int(rng.integers(0, 400))
            pts = np.column_stack([rng.uniform(-60, 60, n),
                                   rng.uniform(-60, 60, n),
                                   rng.uniform(-5, 35, n)])
            cloud = world(pts)
            valid = filter_valid(cloud, cfg)
            expected = np.sum(roi.contains_points(pts) & (pts[:, 2] >= h_t))
            assert len(valid) == expected
            grid = voxelize_counts(valid, roi)
            assert grid.values.sum() == expected
            if len(valid):
                idx = roi.voxel_indices(valid.points)
                assert (idx >= 0).all()
                assert (idx < np.array(roi.dims)).all()

    def test_register_order_invariance_after_voxelization(self):
        rng = np.random.default_rng(9)
        roi = Roi(0, 20, 0, 20, 0, 20, 4, 4, 4)
        a = world(rng.uniform(0, 19.9, size=(40, 3)))
        b = world(rng.uniform(0, 19.9, size=(25, 3)))
        g_ab = voxelize_counts(register(a, b), roi)
        g_ba = voxelize_counts(register(b, a), roi)
        assert np.array_equal(g_ab.values, g_ba.values)
