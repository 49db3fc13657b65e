import numpy as np
import pytest

from funnelsim.errors import (BehindCameraError, DegenerateConfigurationError,
                              PnPNonConvergenceError)
from funnelsim.geometry import Pose, RotationMatrix, rotation_angle
from funnelsim.perception import (HEAD_ON_CAMERA_FROM_TARGET, CameraIntrinsics,
                                  Correspondence, DetectionLevel,
                                  DetectorModel, TargetGeometry,
                                  detection_to_correspondences, project,
                                  solve_pnp, synthetic_detect)

INTR = CameraIntrinsics(500.0, 500.0, 320.0, 240.0)
GEOM = TargetGeometry()
HEAD_ON = RotationMatrix(HEAD_ON_CAMERA_FROM_TARGET)


def head_on_pose(depth, lateral=0.0, vertical=0.0):
    """Camera looking straight at the marker from `depth` meters."""
    return Pose(np.array([lateral, vertical, depth]), HEAD_ON)


def correspondences_at(pose, geometry=GEOM):
    return [Correspondence(p, project(INTR, pose, p))
            for p in geometry.keypoints]


class TestProject:
    def test_optical_axis_hits_principal_point(self):
        pose = Pose(np.array([0.0, 0.0, 2.0]), RotationMatrix.identity())
        uv = project(INTR, pose, np.zeros(3))
        assert uv == pytest.approx((320.0, 240.0))

    def test_hand_case(self):
        intr = CameraIntrinsics(100.0, 100.0, 0.0, 0.0)
        pose = Pose.identity()
        uv = project(intr, pose, np.array([1.0, 0.0, 2.0]))
        assert uv == pytest.approx((50.0, 0.0))

    def test_behind_camera_raises(self):
        pose = Pose.identity()
        with pytest.raises(BehindCameraError):
            project(INTR, pose, np.array([0.0, 0.0, 0.0]))
        with pytest.raises(BehindCameraError):
            project(INTR, pose, np.array([0.0, 0.0, -1.0]))


class TestSolvePnp:
    def test_zero_residual_fixed_point(self):
        pose = head_on_pose(2.0)
        res = solve_pnp(correspondences_at(pose), INTR, pose)
        assert np.allclose(res.camera_from_target.position, pose.position,
                           atol=1e-9)
        assert rotation_angle(res.camera_from_target.orientation,
                              pose.orientation) < 1e-9
        assert res.residual_rms < 1e-9

    def test_noiseless_round_trip(self):
        # noiseless scenes recover the pose to 1e-6 (the angle metric
        # itself bottoms out near 2e-8 from arccos conditioning)
        rng = np.random.default_rng(30)
        for _ in range(25):
            w = rng.normal(0.0, 0.15, 3)
            true = Pose(
                np.array([rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2),
                          rng.uniform(0.5, 3.0)]),
                RotationMatrix.from_axis_angle(w) @ HEAD_ON)
            res = solve_pnp(correspondences_at(true), INTR, head_on_pose(1.75))
            assert rotation_angle(res.camera_from_target.orientation,
                                  true.orientation) <= 1e-6
            assert np.linalg.norm(res.camera_from_target.position
                                  - true.position) <= 1e-6

    def test_residual_history_non_increasing(self):
        rng = np.random.default_rng(31)
        true = Pose(np.array([0.1, -0.05, 2.0]),
                    RotationMatrix.from_axis_angle([0.1, 0.2, 0.05]) @ HEAD_ON)
        corr = [Correspondence(c.point_target,
                               c.pixel + rng.normal(0.0, 0.5, 2))
                for c in correspondences_at(true)]
        res = solve_pnp(corr, INTR, head_on_pose(2.0))
        hist = np.array(res.residual_history)
        assert np.all(np.diff(hist) <= 1e-12)

    def test_permutation_invariance(self):
        rng = np.random.default_rng(3)
        true = Pose(np.array([0.05, 0.02, 2.0]),
                    RotationMatrix.from_axis_angle([0.05, -0.1, 0.0]) @ HEAD_ON)
        det = synthetic_detect(true, INTR, GEOM,
                               DetectorModel(pixel_jitter=0.5), rng)
        corr = detection_to_correspondences(det, GEOM)
        res_a = solve_pnp(corr, INTR, head_on_pose(2.0))
        # meaningful only in the converged regime (not a budget stop)
        assert res_a.iterations < 100
        perm = [corr[i] for i in rng.permutation(len(corr))]
        res_b = solve_pnp(perm, INTR, head_on_pose(2.0))
        assert np.allclose(res_a.camera_from_target.position,
                           res_b.camera_from_target.position, atol=1e-9)
        assert np.allclose(res_a.camera_from_target.orientation.matrix,
                           res_b.camera_from_target.orientation.matrix,
                           atol=1e-9)

    def test_too_few_points(self):
        corr = correspondences_at(head_on_pose(2.0))[:3]
        with pytest.raises(DegenerateConfigurationError):
            solve_pnp(corr, INTR, head_on_pose(2.0))

    def test_collinear_points(self):
        pose = head_on_pose(2.0)
        pts = [np.array([0.0, y, 0.0]) for y in (-0.2, -0.1, 0.1, 0.2)]
        corr = [Correspondence(p, project(INTR, pose, p)) for p in pts]
        with pytest.raises(DegenerateConfigurationError):
            solve_pnp(corr, INTR, pose)

    def test_behind_camera_guess(self):
        corr = correspondences_at(head_on_pose(2.0))
        bad_guess = Pose(np.array([0.0, 0.0, -2.0]), HEAD_ON)
        with pytest.raises(PnPNonConvergenceError):
            solve_pnp(corr, INTR, bad_guess)

    def test_noisy_median_error(self):
        rng = np.random.default_rng(33)
        errs = []
        for _ in range(40):
            true = Pose(
                np.array([rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1), 2.0]),
                RotationMatrix.from_axis_angle(rng.normal(0.0, 0.1, 3))
                @ HEAD_ON)
            corr = [Correspondence(c.point_target,
                                   c.pixel + rng.normal(0.0, 0.5, 2))
                    for c in correspondences_at(true)]
            res = solve_pnp(corr, INTR, head_on_pose(2.0))
            errs.append(np.linalg.norm(res.camera_from_target.position
                                       - true.position))
        assert np.median(errs) <= 0.02


class TestSyntheticDetect:
    def test_close_target_is_best_level(self):
        det = synthetic_detect(head_on_pose(1.0), INTR, GEOM, DetectorModel(),
                               np.random.default_rng(0))
        # inner circle: 2 * 0.08 m * 500 px / 1 m = 80 px across, 6400 px^2
        assert det is not None
        assert det.level is DetectionLevel.BEST

    def test_behind_camera_returns_none(self):
        pose = Pose(np.array([0.0, 0.0, -1.0]), HEAD_ON)
        assert synthetic_detect(pose, INTR, GEOM, DetectorModel(),
                                np.random.default_rng(0)) is None

    def test_full_dropout_returns_none(self):
        model = DetectorModel(dropout_prob=1.0)
        assert synthetic_detect(head_on_pose(1.0), INTR, GEOM, model,
                                np.random.default_rng(0)) is None

    def test_partially_out_of_frame_returns_none(self):
        # shifted far enough sideways that the box clips the image edge
        det = synthetic_detect(head_on_pose(1.0, lateral=0.55), INTR, GEOM,
                               DetectorModel(), np.random.default_rng(0))
        assert det is None

    def test_level_monotone_in_distance(self):
        model = DetectorModel()
        rng = np.random.default_rng(0)
        levels = []
        for depth in np.linspace(0.7, 4.0, 30):
            det = synthetic_detect(head_on_pose(float(depth)), INTR, GEOM,
                                   model, rng)
            assert det is not None
            levels.append(det.level)
        order = {DetectionLevel.BEST: 0, DetectionLevel.BETTER: 1,
                 DetectionLevel.GOOD: 2}
        ranks = [order[lv] for lv in levels]
        assert ranks == sorted(ranks)
        assert set(levels) == {DetectionLevel.BEST, DetectionLevel.BETTER,
                               DetectionLevel.GOOD}


class TestDetectionToCorrespondences:
    def test_head_on_box_maps_to_projections(self):
        pose = head_on_pose(2.0, lateral=0.1, vertical=-0.05)
        det = synthetic_detect(pose, INTR, GEOM, DetectorModel(),
                               np.random.default_rng(0), timestamp=1.0)
        corr = detection_to_correspondences(det, GEOM)
        assert len(corr) == len(GEOM.keypoints)
        for c in corr:
            exact = project(INTR, pose, c.point_target)
            assert np.allclose(c.pixel, exact, atol=1e-9)

    def test_jitter_stays_within_five_sigma(self):
        sigma = 1.0
        model = DetectorModel(pixel_jitter=sigma)
        rng = np.random.default_rng(42)
        pose = head_on_pose(2.0)
        for _ in range(50):
            det = synthetic_detect(pose, INTR, GEOM, model, rng)
            assert det is not None
            for c in detection_to_correspondences(det, GEOM):
                exact = np.asarray(project(INTR, pose, c.point_target))
                assert np.all(np.abs(c.pixel - exact) <= 5.0 * sigma)


class TestValidation:
    def test_intrinsics_positive_focal(self):
        with pytest.raises(ValueError):
            CameraIntrinsics(0.0, 500.0, 320.0, 240.0)

    def test_geometry_circle_inside(self):
        with pytest.raises(ValueError):
            TargetGeometry(circle_radius=0.5)

    def test_detector_thresholds_ordered(self):
        with pytest.raises(ValueError):
            DetectorModel(best_area=100.0, better_area=200.0)

    def test_detection_bbox_sane(self):
        from funnelsim.perception import Detection
        with pytest.raises(ValueError):
            Detection((10.0, 10.0, 5.0, 20.0), DetectionLevel.GOOD, 0.0)
