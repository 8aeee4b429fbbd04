"""Python bindings for the touchreg C++ core."""

from ._core import (
    Intrinsics,
    Pose,
    SolverConfig,
    TouchregError,
    average_precision,
    calibrate_capture,
    compose,
    lift_pixel,
    map_at_radii,
    project,
    psnr,
    rotate_about_x,
    rotation_angle_between,
    solve_pose,
    split_counts,
    ssim,
    synthesize_capture,
)

__all__ = [
    "Intrinsics",
    "Pose",
    "SolverConfig",
    "TouchregError",
    "average_precision",
    "calibrate_capture",
    "compose",
    "lift_pixel",
    "map_at_radii",
    "project",
    "psnr",
    "rotate_about_x",
    "rotation_angle_between",
    "solve_pose",
    "split_counts",
    "ssim",
    "synthesize_capture",
]
