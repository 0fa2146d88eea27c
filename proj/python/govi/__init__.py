"""GoPro telemetry extraction, IMU noise calibration, landmark map fusion,
trajectory / marker evaluation and point cloud registration."""

from ._govi import (
    GlobalMap,
    GoviError,
    allan,
    dump_gpmf,
    evaluate_ate,
    extract,
    extract_bytes,
    fixture_mp4,
    register,
    score_registration,
    simulate_imu_noise,
    tag_statistics,
    terrain_scans,
    umeyama,
    voxel_downsample,
)

__all__ = [
    "GlobalMap",
    "GoviError",
    "allan",
    "dump_gpmf",
    "evaluate_ate",
    "extract",
    "extract_bytes",
    "fixture_mp4",
    "register",
    "score_registration",
    "simulate_imu_noise",
    "tag_statistics",
    "terrain_scans",
    "umeyama",
    "voxel_downsample",
]
