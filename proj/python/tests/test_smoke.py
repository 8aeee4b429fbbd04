import math

import numpy as np
import pytest

import touchreg


def test_synthesize_and_calibrate(tmp_path):
    truth = touchreg.synthesize_capture(str(tmp_path / "cap"), seed=11)
    result = touchreg.calibrate_capture(str(tmp_path / "cap"), touchreg.SolverConfig())
    est = result["cam_to_touch"]
    assert touchreg.rotation_angle_between(est, truth) < 1e-6
    assert np.linalg.norm(est.t - truth.t) < 1e-6
    assert result["mean_l1_error"] < 1e-6


def test_solve_pose_recovers_pose():
    intr = touchreg.Intrinsics(600, 600, 320, 240, 640, 480)
    pose = touchreg.Pose([math.cos(0.1), math.sin(0.1), 0, 0], [0.1, -0.2, 0.3])
    rng = np.random.default_rng(3)
    pixels = rng.uniform([0, 0], [639, 479], size=(10, 2))
    cam_to_world = pose.inverse()
    points = np.array([touchreg.lift_pixel(intr, cam_to_world, p, d)
                       for p, d in zip(pixels, rng.uniform(0.5, 2.0, 10))])
    out = touchreg.solve_pose(intr, points, pixels, touchreg.SolverConfig())
    assert out["mean_l1_error"] < 1e-6
    assert touchreg.rotation_angle_between(out["pose"], pose) < 1e-8


def test_split_counts():
    assert touchreg.split_counts(500) == (8, 1, 1)


def test_metrics():
    a = np.zeros((16, 16, 3))
    assert touchreg.psnr(a, a + 0.1) == pytest.approx(20.0, abs=1e-9)
    assert touchreg.ssim(a + 0.3, a + 0.3) == pytest.approx(1.0, abs=1e-9)


def test_errors_map_to_exception():
    intr = touchreg.Intrinsics(600, 600, 320, 240, 640, 480)
    with pytest.raises(touchreg.TouchregError):
        touchreg.solve_pose(intr, np.zeros((2, 3)), np.zeros((2, 2)), touchreg.SolverConfig())
