#pragma once

// Loop-closure-consistent sparse map.
//
// Observations are cached in the observing keyframe's frame (P_f = T_wf^-1 P_w),
// so replacing keyframe poses after a loop closure deforms the map while the
// point-to-keyframe relative poses stay fixed. World points are produced on
// demand as quality-weighted means over their observations.

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <istream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "govi/geometry.hpp"

namespace govi::map {

using KeyframeId = std::uint64_t;
using LandmarkId = std::uint64_t;

struct LandmarkObservation {
    Vec3 p_local = Vec3::Zero();    // in keyframe coordinates, meters
    KeyframeId keyframe = 0;
    double quality = 0.0;           // [0, 1]
    Vec3 color = Vec3::Zero();      // RGB, [0, 255]
    std::array<std::uint32_t, 2> pixel{};
};

struct FusedPoint {
    LandmarkId id = 0;
    Vec3 position = Vec3::Zero();
    Vec3 color = Vec3::Zero(); // weighted mean, clamped to [0, 255], unrounded
    double quality = 0.0;      // mean of contributing qualities
    std::size_t n_obs = 0;
    bool zero_weight = false;  // all qualities were 0: unweighted fallback

    std::array<std::uint8_t, 3> rgb8() const;
};

class GlobalMap {
public:
    void add_keyframe(KeyframeId id, const Rigid3& pose);

    /// Caches the world observation in keyframe-local coordinates. A second
    /// observation of the same landmark from the same keyframe replaces the first.
    void add_observation(LandmarkId landmark, KeyframeId keyframe, const Vec3& p_world, double quality,
                         const Vec3& color = Vec3::Zero(), std::array<std::uint32_t, 2> pixel = {});

    /// Absolute replacement poses. All ids are checked before any pose changes.
    void update_keyframe_poses(const std::vector<std::pair<KeyframeId, Rigid3>>& updates);

    FusedPoint fuse_landmark(LandmarkId landmark) const;
    /// Every landmark in first-observation order.
    std::vector<FusedPoint> fuse_all() const;
    /// Binary PLY with x,y,z, red,green,blue, quality. Returns the point count.
    std::size_t export_fused_cloud(const std::filesystem::path& path) const;

    bool has_keyframe(KeyframeId id) const { return keyframes_.count(id) != 0; }
    const Rigid3& keyframe_pose(KeyframeId id) const;
    const LandmarkObservation* observation(LandmarkId landmark, KeyframeId keyframe) const;

    std::size_t keyframe_count() const { return keyframes_.size(); }
    std::size_t landmark_count() const { return landmarks_.size(); }
    std::size_t observation_count() const { return observation_count_; }

    /// Entries sharing the hash bucket of `id`: the probe cost of a lookup.
    std::size_t keyframe_lookup_probes(KeyframeId id) const;

private:
    struct LandmarkRecord {
        LandmarkId id;
        std::vector<LandmarkObservation> observations;
    };
    FusedPoint fuse_record(const LandmarkRecord& record) const;

    std::unordered_map<KeyframeId, Rigid3> keyframes_;
    std::vector<LandmarkRecord> landmarks_;
    std::unordered_map<LandmarkId, std::uint32_t> landmark_index_;
    std::size_t observation_count_ = 0;
};

// ---------------------------------------------------------------------------
// Event log: one event per line, '#' comments and blank lines ignored.
//   KF  id tx ty tz qx qy qz qw
//   OBS lm_id kf_id px py pz q r g b u v
//   UPD id tx ty tz qx qy qz qw

std::string keyframe_event(KeyframeId id, const Rigid3& pose);
std::string observation_event(LandmarkId landmark, KeyframeId keyframe, const Vec3& p_world, double quality,
                              const Vec3& color, std::array<std::uint32_t, 2> pixel);
std::string update_event(KeyframeId id, const Rigid3& pose);

struct ReplayStats {
    std::size_t lines = 0;
    std::size_t keyframes = 0;
    std::size_t observations = 0;
    std::size_t updates = 0;
};

struct ReplayHooks {
    /// Called once, just before the first UPD event is applied.
    std::function<void(const GlobalMap&)> before_first_update;
};

/// Applies events in order. Errors are rethrown with the 1-based line number
/// prefixed ("line 17: ...") and the original error code.
ReplayStats replay_log(std::istream& log, GlobalMap& map, const ReplayHooks& hooks = {});
GlobalMap replay_log(std::istream& log);

} // namespace govi::map
