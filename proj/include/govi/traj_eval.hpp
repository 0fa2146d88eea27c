#pragma once

// Trajectory accuracy: timestamp association, similarity alignment, absolute
// trajectory error, and marker-displacement statistics.

#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "govi/geometry.hpp"

namespace govi::traj {

struct TrajectoryPose {
    double t = 0.0;
    Vec3 p = Vec3::Zero();
    Quat q = Quat::Identity();
};

using Trajectory = std::vector<TrajectoryPose>;

/// TUM format: `t tx ty tz qx qy qz qw`, '#' comments. Timestamps must be
/// strictly increasing; quaternions are normalized on load.
Trajectory read_tum(std::istream& in);
Trajectory read_tum(const std::filesystem::path& path);
void write_tum(const std::filesystem::path& path, const Trajectory& traj);

/// Greedy nearest-timestamp matching: candidate pairs within max_dt are taken
/// in order of increasing |dt| (ties by index), each pose used at most once.
/// Result is sorted by index into `a`.
std::vector<std::pair<std::size_t, std::size_t>> associate(const Trajectory& a, const Trajectory& b, double max_dt);

/// One matched position: reference p and estimate p_hat.
struct PositionPair {
    Vec3 ref;
    Vec3 est;
};

enum class AlignMode { Sim3, SE3 };

/// Transform minimizing sum |ref - (s R est + t)|^2; SE3 mode holds s = 1.
Sim3 umeyama_sim3(std::span<const PositionPair> pairs, AlignMode mode = AlignMode::Sim3);

double ate_rmse(std::span<const PositionPair> pairs, const Sim3& transform);

std::vector<PositionPair> matched_positions(const Trajectory& ref, const Trajectory& est,
                                            const std::vector<std::pair<std::size_t, std::size_t>>& matches);

struct AteResult {
    Sim3 transform;
    double rmse = 0.0;
    std::size_t n_pairs = 0;
};

/// associate + align + ATE. `est_scale` is applied to the estimate first,
/// which lets a shared scale factor be combined with SE3 alignment.
AteResult evaluate_ate(const Trajectory& ref, const Trajectory& est, AlignMode mode, double max_dt = 0.02,
                       double est_scale = 1.0);

// ---------------------------------------------------------------------------

struct TagDetection {
    int tag_id = 0;
    double t = 0.0;
    Vec3 p_cm = Vec3::Zero(); // marker position in the camera frame
};

/// CSV `t,tag_id,px,py,pz`, optional header line.
std::vector<TagDetection> read_detections_csv(const std::filesystem::path& path);
void write_detections_csv(const std::filesystem::path& path, std::span<const TagDetection> detections);

/// Camera pose at time t: nearest pose must lie within max_dt; between two
/// poses the position is interpolated linearly and the orientation by slerp.
std::optional<Rigid3> pose_at(const Trajectory& traj, double t, double max_dt);

struct TagProjection {
    std::map<int, std::vector<Vec3>> positions; // world positions per tag
    std::vector<std::size_t> unmatched;         // indices into the detections
};

/// world = R(q) p_cm + p for each detection.
TagProjection tag_world_positions(const Trajectory& traj, std::span<const TagDetection> detections,
                                  double max_dt = 0.02);

struct Quantiles {
    double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
};

struct TagSummary {
    Vec3 mean = Vec3::Zero();
    Vec3 std = Vec3::Zero();     // sample (n-1) standard deviation per axis
    double avg_dist_error = 0.0; // mean |pos - mean|
    std::size_t n_detections = 0;
    Quantiles dist_quantiles;    // of the per-detection distance errors
    std::vector<double> dist_errors;
};

struct TagStats {
    std::map<int, TagSummary> per_tag;
    Vec3 std = Vec3::Zero();     // pooled over tags, each about its own mean
    double avg_dist_error = 0.0; // over all detections
    std::size_t n_detections = 0;
};

/// Throws InsufficientDetections when a tag has fewer than 2 detections.
TagStats tag_statistics(const std::map<int, std::vector<Vec3>>& positions);

/// Linear-interpolation quantiles of unsorted data.
Quantiles quantiles(std::vector<double> values);

} // namespace govi::traj
