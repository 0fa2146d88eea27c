#pragma once

// Seeded scene and data generators used by the `fixtures` command, the test
// suite and the benchmarks. Every generator is deterministic in its seed.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "govi/cloud_register.hpp"
#include "govi/geometry.hpp"
#include "govi/global_map.hpp"
#include "govi/mp4_demux.hpp"
#include "govi/sync.hpp"
#include "govi/traj_eval.hpp"

namespace govi::synth {

// --- camera telemetry ------------------------------------------------------

struct TelemetrySpec {
    std::size_t payloads = 10;
    std::uint32_t timescale = 1000;
    std::uint32_t payload_ticks = 1010;   // 1.01 s
    std::size_t imu_per_payload = 202;    // ACCL and GYRO samples
    std::size_t frames_per_payload = 30;  // SHUT samples
    double accel_scale = 418.0;           // int16 counts per m/s^2
    double gyro_scale = 939.0;            // int16 counts per rad/s
    std::string orientation = "ZXY";      // ORIN string written into each stream
    std::uint64_t seed = 1;
};

/// One GPMF payload per element: DEVC { STRM{ACCL}, STRM{GYRO}, STRM{SHUT} }.
std::vector<mp4::FixtureSample> telemetry_payloads(const TelemetrySpec& spec);

/// Complete MP4 with a dummy video track and the telemetry track.
std::vector<std::uint8_t> telemetry_mp4(const TelemetrySpec& spec, const mp4::FixtureOptions& options = {});

/// Pure-noise IMU log at `rate`: both sensors follow the white + random-walk
/// model on every axis (independent streams per axis).
std::vector<sync::ImuSample> noise_imu_log(double sigma_w, double sigma_b, double rate, double duration,
                                           std::uint64_t seed);

// --- loop-closure map --------------------------------------------------------

struct DriftLoopSpec {
    std::size_t keyframes = 120;
    std::size_t landmarks = 3000;
    std::size_t observations_per_landmark = 4;
    double loop_radius = 10.0;
    double wall_radius = 14.0;
    double z_drift = 0.5;          // accumulated by the last keyframe, linear in index
    double observation_noise = 0.0;
    std::uint64_t seed = 7;
};

struct DriftLoopScene {
    std::vector<std::string> events; // KF / OBS for the drifted run, then UPD with corrected poses
    std::map<map::LandmarkId, Vec3> truth;
};

DriftLoopScene drift_loop(const DriftLoopSpec& spec);

/// Uniformly random keyframes and landmark observations, no updates.
std::vector<std::string> random_map_log(std::size_t keyframes, std::size_t landmarks,
                                        std::size_t observations_per_landmark, std::uint64_t seed);

/// RMS of z(fused) - z(truth) over landmarks present in both.
double z_spread(const std::vector<map::FusedPoint>& fused, const std::map<map::LandmarkId, Vec3>& truth);

// --- trajectories and markers ----------------------------------------------

struct CavernSpec {
    std::size_t poses = 1500;
    double rate = 10.0;              // poses per second
    double radius_x = 20.0, radius_y = 8.0;
    std::size_t tags = 5;
    double detection_range = 6.0;
    std::size_t detection_stride = 3; // detect every n-th pose while in range
    double noise = 0.05;              // per-axis, meters, camera frame
    std::uint64_t seed = 11;
};

struct CavernScene {
    traj::Trajectory trajectory;
    std::vector<traj::TagDetection> detections;
    std::map<int, Vec3> tags;
};

CavernScene cavern_loop(const CavernSpec& spec);

/// est = transform^-1 applied to ref positions, plus isotropic noise; the
/// orientations are rotated consistently. Timestamps are copied.
traj::Trajectory distorted_copy(const traj::Trajectory& ref, const Sim3& transform, double noise,
                                std::uint64_t seed);

// --- registration scenes ---------------------------------------------------

struct TerrainSpec {
    double spacing = 0.05;         // xy sampling step
    double noise = 0.01;           // isotropic, meters
    double width = 8.2;            // each scan spans `width` in x; about 1e4 points per scan at 0.1 m voxels
    double depth = 8.2;            // and `depth` in y
    double overlap = 0.4;          // fraction of the x span shared by the two scans
    double rock_density = 1.5;     // small bumps per square meter
    double rotation_deg = 30.0;
    Vec3 rotation_axis = Vec3(0.1, -0.05, 1.0);
    double translation = 2.0;
    Vec3 translation_dir = Vec3(0.6, 0.75, 0.25);
    std::uint64_t seed = 3;
};

struct ScanPair {
    cloud::PointCloud source; // world frame
    cloud::PointCloud target; // in the frame `truth` maps the world into
    Rigid3 truth;             // source -> target
    double overlap = 0.0;     // fraction of source points inside the shared strip
};

ScanPair terrain_scans(const TerrainSpec& spec);

} // namespace govi::synth
