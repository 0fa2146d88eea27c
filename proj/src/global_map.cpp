#include "govi/global_map.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "govi/error.hpp"
#include "govi/ply.hpp"
#include "govi/text.hpp"

namespace govi::map {

namespace {

std::string pose_fields(const Rigid3& pose)
{
    std::string s;
    for (int i = 0; i < 3; ++i)
        s += ' ' + text::shortest(pose.t[i]);
    s += ' ' + text::shortest(pose.q.x());
    s += ' ' + text::shortest(pose.q.y());
    s += ' ' + text::shortest(pose.q.z());
    s += ' ' + text::shortest(pose.q.w());
    return s;
}

Rigid3 parse_pose(const std::vector<std::string_view>& tok, std::size_t first)
{
    Vec3 t(text::parse_double(tok[first], "tx"), text::parse_double(tok[first + 1], "ty"),
           text::parse_double(tok[first + 2], "tz"));
    Quat q(text::parse_double(tok[first + 6], "qw"), text::parse_double(tok[first + 3], "qx"),
           text::parse_double(tok[first + 4], "qy"), text::parse_double(tok[first + 5], "qz"));
    return Rigid3::from(q, t);
}

} // namespace

std::array<std::uint8_t, 3> FusedPoint::rgb8() const
{
    std::array<std::uint8_t, 3> out{};
    for (int i = 0; i < 3; ++i)
        out[std::size_t(i)] = std::uint8_t(std::clamp(std::lround(color[i]), 0L, 255L));
    return out;
}

void GlobalMap::add_keyframe(KeyframeId id, const Rigid3& pose)
{
    Rigid3 normalized = Rigid3::from(pose.q, pose.t);
    if (!keyframes_.emplace(id, normalized).second)
        fail(Errc::DuplicateKeyframe, "keyframe " + std::to_string(id) + " already exists");
}

void GlobalMap::add_observation(LandmarkId landmark, KeyframeId keyframe, const Vec3& p_world, double quality,
                                const Vec3& color, std::array<std::uint32_t, 2> pixel)
{
    auto kf = keyframes_.find(keyframe);
    if (kf == keyframes_.end())
        fail(Errc::UnknownKeyframe, "observation of landmark " + std::to_string(landmark) +
                                        " references unknown keyframe " + std::to_string(keyframe));
    if (!(quality >= 0.0 && quality <= 1.0))
        fail(Errc::InvalidQuality, "quality " + std::to_string(quality) + " outside [0, 1]");
    if (!p_world.allFinite())
        fail(Errc::InvalidArgument, "non-finite landmark position");
    for (int i = 0; i < 3; ++i)
        if (!(color[i] >= 0.0 && color[i] <= 255.0))
            fail(Errc::InvalidArgument, "color component outside [0, 255]");

    LandmarkObservation obs{kf->second.inverse() * p_world, keyframe, quality, color, pixel};

    auto [lm_it, new_landmark] = landmark_index_.try_emplace(landmark, std::uint32_t(landmarks_.size()));
    if (new_landmark)
        landmarks_.push_back({landmark, {}});
    auto& record = landmarks_[lm_it->second];

    // A landmark has a handful of observations, so a scan of its own list is
    // cheaper than a global (landmark, keyframe) index and keeps ingest linear.
    for (auto& existing : record.observations)
        if (existing.keyframe == keyframe) {
            existing = obs;
            return;
        }
    record.observations.push_back(obs);
    ++observation_count_;
}

void GlobalMap::update_keyframe_poses(const std::vector<std::pair<KeyframeId, Rigid3>>& updates)
{
    std::vector<Rigid3> normalized;
    normalized.reserve(updates.size());
    for (const auto& [id, pose] : updates) {
        if (!keyframes_.count(id))
            fail(Errc::UnknownKeyframe, "pose update for unknown keyframe " + std::to_string(id));
        normalized.push_back(Rigid3::from(pose.q, pose.t));
    }
    for (std::size_t i = 0; i < updates.size(); ++i)
        keyframes_[updates[i].first] = normalized[i];
}

FusedPoint GlobalMap::fuse_record(const LandmarkRecord& record) const
{
    FusedPoint out;
    out.id = record.id;
    out.n_obs = record.observations.size();

    Vec3 pos_sum = Vec3::Zero();
    Vec3 color_sum = Vec3::Zero();
    double weight_sum = 0.0;
    Vec3 pos_plain = Vec3::Zero();
    Vec3 color_plain = Vec3::Zero();
    for (const auto& obs : record.observations) {
        Vec3 world = keyframes_.at(obs.keyframe) * obs.p_local;
        pos_sum += obs.quality * world;
        color_sum += obs.quality * obs.color;
        weight_sum += obs.quality;
        pos_plain += world;
        color_plain += obs.color;
    }
    const double n = double(out.n_obs);
    if (weight_sum > 0.0) {
        out.position = pos_sum / weight_sum;
        out.color = color_sum / weight_sum;
        out.quality = weight_sum / n;
    } else {
        out.zero_weight = true;
        out.position = pos_plain / n;
        out.color = color_plain / n;
        out.quality = 0.0;
    }
    out.color = out.color.cwiseMax(0.0).cwiseMin(255.0);
    return out;
}

FusedPoint GlobalMap::fuse_landmark(LandmarkId landmark) const
{
    auto it = landmark_index_.find(landmark);
    if (it == landmark_index_.end())
        fail(Errc::UnknownLandmark, "landmark " + std::to_string(landmark) + " has no observations");
    return fuse_record(landmarks_[it->second]);
}

std::vector<FusedPoint> GlobalMap::fuse_all() const
{
    std::vector<FusedPoint> out;
    out.reserve(landmarks_.size());
    for (const auto& record : landmarks_)
        out.push_back(fuse_record(record));
    return out;
}

std::size_t GlobalMap::export_fused_cloud(const std::filesystem::path& path) const
{
    ply::VertexData data;
    data.points.reserve(landmarks_.size());
    data.colors.reserve(landmarks_.size());
    data.quality.reserve(landmarks_.size());
    for (const auto& record : landmarks_) {
        auto p = fuse_record(record);
        data.points.push_back(p.position);
        data.colors.push_back(p.rgb8());
        data.quality.push_back(float(p.quality));
    }
    data.declare_colors = true;
    data.declare_quality = true;
    ply::write(path, data);
    return data.points.size();
}

const Rigid3& GlobalMap::keyframe_pose(KeyframeId id) const
{
    auto it = keyframes_.find(id);
    if (it == keyframes_.end())
        fail(Errc::UnknownKeyframe, "keyframe " + std::to_string(id) + " does not exist");
    return it->second;
}

const LandmarkObservation* GlobalMap::observation(LandmarkId landmark, KeyframeId keyframe) const
{
    auto it = landmark_index_.find(landmark);
    if (it == landmark_index_.end())
        return nullptr;
    for (const auto& obs : landmarks_[it->second].observations)
        if (obs.keyframe == keyframe)
            return &obs;
    return nullptr;
}

std::size_t GlobalMap::keyframe_lookup_probes(KeyframeId id) const
{
    if (keyframes_.bucket_count() == 0)
        return 0;
    return keyframes_.bucket_size(keyframes_.bucket(id));
}

// ---------------------------------------------------------------------------

std::string keyframe_event(KeyframeId id, const Rigid3& pose)
{
    return "KF " + std::to_string(id) + pose_fields(pose);
}

std::string observation_event(LandmarkId landmark, KeyframeId keyframe, const Vec3& p_world, double quality,
                              const Vec3& color, std::array<std::uint32_t, 2> pixel)
{
    std::string s = "OBS " + std::to_string(landmark) + ' ' + std::to_string(keyframe);
    for (int i = 0; i < 3; ++i)
        s += ' ' + text::shortest(p_world[i]);
    s += ' ' + text::shortest(quality);
    for (int i = 0; i < 3; ++i)
        s += ' ' + text::shortest(color[i]);
    s += ' ' + std::to_string(pixel[0]) + ' ' + std::to_string(pixel[1]);
    return s;
}

std::string update_event(KeyframeId id, const Rigid3& pose)
{
    return "UPD " + std::to_string(id) + pose_fields(pose);
}

ReplayStats replay_log(std::istream& log, GlobalMap& map, const ReplayHooks& hooks)
{
    ReplayStats stats;
    std::string line;
    bool updated = false;
    while (std::getline(log, line)) {
        ++stats.lines;
        try {
            auto tok = text::tokens(line);
            if (tok.empty() || tok[0].front() == '#')
                continue;
            auto expect = [&](std::size_t n) {
                if (tok.size() != n)
                    fail(Errc::MalformedEvent, "'" + std::string(tok[0]) + "' needs " + std::to_string(n - 1) +
                                                   " fields, got " + std::to_string(tok.size() - 1));
            };
            if (tok[0] == "KF") {
                expect(9);
                map.add_keyframe(text::parse_uint(tok[1], "keyframe id"), parse_pose(tok, 2));
                ++stats.keyframes;
            } else if (tok[0] == "OBS") {
                expect(12);
                Vec3 p(text::parse_double(tok[3], "px"), text::parse_double(tok[4], "py"),
                       text::parse_double(tok[5], "pz"));
                Vec3 c(text::parse_double(tok[7], "r"), text::parse_double(tok[8], "g"),
                       text::parse_double(tok[9], "b"));
                auto u = text::parse_uint(tok[10], "u");
                auto v = text::parse_uint(tok[11], "v");
                if (u > std::numeric_limits<std::uint32_t>::max() || v > std::numeric_limits<std::uint32_t>::max())
                    fail(Errc::MalformedEvent, "pixel coordinate out of range");
                map.add_observation(text::parse_uint(tok[1], "landmark id"), text::parse_uint(tok[2], "keyframe id"),
                                    p, text::parse_double(tok[6], "quality"), c,
                                    {std::uint32_t(u), std::uint32_t(v)});
                ++stats.observations;
            } else if (tok[0] == "UPD") {
                expect(9);
                if (!updated && hooks.before_first_update)
                    hooks.before_first_update(map);
                updated = true;
                map.update_keyframe_poses({{text::parse_uint(tok[1], "keyframe id"), parse_pose(tok, 2)}});
                ++stats.updates;
            } else {
                fail(Errc::MalformedEvent, "unknown event '" + std::string(tok[0]) + "'");
            }
        } catch (const Error& e) {
            Errc code = e.code() == Errc::InvalidArgument ? Errc::MalformedEvent : e.code();
            std::string what = e.what();
            auto colon = what.find(": ");
            throw Error(code, "line " + std::to_string(stats.lines) + ": " +
                                  (colon == std::string::npos ? what : what.substr(colon + 2)));
        }
    }
    return stats;
}

GlobalMap replay_log(std::istream& log)
{
    GlobalMap map;
    replay_log(log, map);
    return map;
}

} // namespace govi::map
