#include "govi/traj_eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <tuple>

#include "govi/error.hpp"
#include "govi/text.hpp"

namespace govi::traj {

Trajectory read_tum(std::istream& in)
{
    Trajectory out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto tok = text::tokens(line);
        if (tok.empty() || tok[0].front() == '#')
            continue;
        try {
            if (tok.size() != 8)
                fail(Errc::MalformedTrajectory, "expected 8 fields, got " + std::to_string(tok.size()));
            TrajectoryPose pose;
            pose.t = text::parse_double(tok[0], "t");
            pose.p = Vec3(text::parse_double(tok[1], "tx"), text::parse_double(tok[2], "ty"),
                          text::parse_double(tok[3], "tz"));
            Quat q(text::parse_double(tok[7], "qw"), text::parse_double(tok[4], "qx"),
                   text::parse_double(tok[5], "qy"), text::parse_double(tok[6], "qz"));
            pose.q = Rigid3::from(q, pose.p).q;
            if (!out.empty() && !(pose.t > out.back().t))
                fail(Errc::MalformedTrajectory, "timestamps not strictly increasing");
            out.push_back(pose);
        } catch (const Error& e) {
            throw Error(Errc::MalformedTrajectory, "line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

Trajectory read_tum(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        fail(Errc::IoError, "cannot read '" + path.string() + "'");
    return read_tum(in);
}

void write_tum(const std::filesystem::path& path, const Trajectory& traj)
{
    std::ofstream os(path);
    if (!os)
        fail(Errc::IoError, "cannot write '" + path.string() + "'");
    os << "# t tx ty tz qx qy qz qw\n";
    for (const auto& p : traj) {
        os << text::shortest(p.t);
        for (int i = 0; i < 3; ++i)
            os << ' ' << text::shortest(p.p[i]);
        os << ' ' << text::shortest(p.q.x()) << ' ' << text::shortest(p.q.y()) << ' ' << text::shortest(p.q.z())
           << ' ' << text::shortest(p.q.w()) << '\n';
    }
}

std::vector<std::pair<std::size_t, std::size_t>> associate(const Trajectory& a, const Trajectory& b, double max_dt)
{
    if (a.empty() || b.empty())
        fail(Errc::NoMatches, "cannot associate an empty trajectory");
    if (!(max_dt > 0.0))
        fail(Errc::InvalidArgument, "max_dt must be positive");

    std::vector<std::tuple<double, std::size_t, std::size_t>> candidates;
    std::size_t lo = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        while (lo < b.size() && b[lo].t < a[i].t - max_dt)
            ++lo;
        for (std::size_t j = lo; j < b.size() && b[j].t <= a[i].t + max_dt; ++j)
            candidates.emplace_back(std::abs(a[i].t - b[j].t), i, j);
    }
    std::sort(candidates.begin(), candidates.end());

    std::vector<bool> used_a(a.size()), used_b(b.size());
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (const auto& [dt, i, j] : candidates) {
        if (used_a[i] || used_b[j])
            continue;
        used_a[i] = used_b[j] = true;
        out.emplace_back(i, j);
    }
    if (out.empty())
        fail(Errc::NoMatches, "no timestamps within " + std::to_string(max_dt) + " s");
    std::sort(out.begin(), out.end());
    return out;
}

Sim3 umeyama_sim3(std::span<const PositionPair> pairs, AlignMode mode)
{
    std::vector<Vec3> src, dst;
    src.reserve(pairs.size());
    dst.reserve(pairs.size());
    for (const auto& p : pairs) {
        src.push_back(p.est);
        dst.push_back(p.ref);
    }
    return fit_similarity(src, dst, mode == AlignMode::Sim3);
}

double ate_rmse(std::span<const PositionPair> pairs, const Sim3& transform)
{
    if (pairs.empty())
        fail(Errc::EmptyPairs, "ATE needs at least one pair");
    double sum = 0.0;
    for (const auto& p : pairs)
        sum += (p.ref - transform * p.est).squaredNorm();
    return std::sqrt(sum / double(pairs.size()));
}

std::vector<PositionPair> matched_positions(const Trajectory& ref, const Trajectory& est,
                                            const std::vector<std::pair<std::size_t, std::size_t>>& matches)
{
    std::vector<PositionPair> out;
    out.reserve(matches.size());
    for (auto [i, j] : matches)
        out.push_back({ref.at(i).p, est.at(j).p});
    return out;
}

AteResult evaluate_ate(const Trajectory& ref, const Trajectory& est, AlignMode mode, double max_dt, double est_scale)
{
    if (!(est_scale > 0.0))
        fail(Errc::InvalidArgument, "estimate scale must be positive");
    auto pairs = matched_positions(ref, est, associate(ref, est, max_dt));
    for (auto& p : pairs)
        p.est *= est_scale;
    AteResult r;
    r.transform = umeyama_sim3(pairs, mode);
    r.rmse = ate_rmse(pairs, r.transform);
    r.n_pairs = pairs.size();
    return r;
}

// ---------------------------------------------------------------------------

std::vector<TagDetection> read_detections_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        fail(Errc::IoError, "cannot read '" + path.string() + "'");
    std::vector<TagDetection> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto trimmed = text::trim(line);
        if (trimmed.empty() || trimmed.front() == '#' || (lineno == 1 && trimmed.front() == 't'))
            continue;
        auto cols = text::split(trimmed, ',');
        try {
            if (cols.size() != 5)
                fail(Errc::InvalidArgument, "expected 5 columns");
            TagDetection d;
            d.t = text::parse_double(cols[0], "t");
            d.tag_id = int(text::parse_int(cols[1], "tag_id"));
            d.p_cm = Vec3(text::parse_double(cols[2], "px"), text::parse_double(cols[3], "py"),
                          text::parse_double(cols[4], "pz"));
            out.push_back(d);
        } catch (const Error& e) {
            throw Error(Errc::InvalidArgument, path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

void write_detections_csv(const std::filesystem::path& path, std::span<const TagDetection> detections)
{
    std::ofstream os(path);
    if (!os)
        fail(Errc::IoError, "cannot write '" + path.string() + "'");
    os << "t,tag_id,px,py,pz\n";
    for (const auto& d : detections)
        os << text::shortest(d.t) << ',' << d.tag_id << ',' << text::shortest(d.p_cm.x()) << ','
           << text::shortest(d.p_cm.y()) << ',' << text::shortest(d.p_cm.z()) << '\n';
}

std::optional<Rigid3> pose_at(const Trajectory& traj, double t, double max_dt)
{
    if (traj.empty())
        return std::nullopt;
    auto it = std::lower_bound(traj.begin(), traj.end(), t,
                               [](const TrajectoryPose& p, double value) { return p.t < value; });
    std::size_t hi = std::size_t(it - traj.begin());
    double nearest = std::numeric_limits<double>::infinity();
    if (hi < traj.size())
        nearest = std::min(nearest, std::abs(traj[hi].t - t));
    if (hi > 0)
        nearest = std::min(nearest, std::abs(traj[hi - 1].t - t));
    if (!(nearest <= max_dt))
        return std::nullopt;

    if (hi < traj.size() && traj[hi].t == t)
        return Rigid3{traj[hi].q, traj[hi].p};
    if (hi == 0)
        return Rigid3{traj.front().q, traj.front().p};
    if (hi == traj.size())
        return Rigid3{traj.back().q, traj.back().p};
    const auto& a = traj[hi - 1];
    const auto& b = traj[hi];
    double w = (t - a.t) / (b.t - a.t);
    return Rigid3{a.q.slerp(w, b.q).normalized(), a.p + w * (b.p - a.p)};
}

TagProjection tag_world_positions(const Trajectory& traj, std::span<const TagDetection> detections, double max_dt)
{
    TagProjection out;
    for (std::size_t i = 0; i < detections.size(); ++i) {
        const auto& d = detections[i];
        auto pose = pose_at(traj, d.t, max_dt);
        if (!pose) {
            out.unmatched.push_back(i);
            continue;
        }
        out.positions[d.tag_id].push_back(*pose * d.p_cm);
    }
    return out;
}

Quantiles quantiles(std::vector<double> values)
{
    if (values.empty())
        return {};
    std::sort(values.begin(), values.end());
    auto at = [&](double q) {
        double pos = q * double(values.size() - 1);
        auto lo = std::size_t(std::floor(pos));
        auto hi = std::min(lo + 1, values.size() - 1);
        double w = pos - double(lo);
        return values[lo] + w * (values[hi] - values[lo]);
    };
    return {values.front(), at(0.25), at(0.5), at(0.75), values.back()};
}

TagStats tag_statistics(const std::map<int, std::vector<Vec3>>& positions)
{
    TagStats stats;
    Vec3 pooled_sq = Vec3::Zero();
    std::size_t pooled_dof = 0;
    double dist_sum = 0.0;
    for (const auto& [id, pts] : positions) {
        if (pts.size() < 2)
            fail(Errc::InsufficientDetections,
                 "tag " + std::to_string(id) + " has " + std::to_string(pts.size()) + " detection(s), need 2");
        TagSummary s;
        s.n_detections = pts.size();
        // mean as an offset from the first point: identical detections then
        // reproduce that point exactly and every statistic is exactly zero
        Vec3 offset = Vec3::Zero();
        for (const auto& p : pts)
            offset += p - pts.front();
        s.mean = pts.front() + offset / double(pts.size());
        Vec3 sq = Vec3::Zero();
        for (const auto& p : pts) {
            Vec3 d = p - s.mean;
            sq += d.cwiseProduct(d);
            s.dist_errors.push_back(d.norm());
        }
        s.std = (sq / double(pts.size() - 1)).cwiseSqrt();
        for (double e : s.dist_errors)
            s.avg_dist_error += e;
        dist_sum += s.avg_dist_error;
        s.avg_dist_error /= double(pts.size());
        s.dist_quantiles = quantiles(s.dist_errors);

        pooled_sq += sq;
        pooled_dof += pts.size() - 1;
        stats.n_detections += pts.size();
        stats.per_tag.emplace(id, std::move(s));
    }
    if (pooled_dof > 0)
        stats.std = (pooled_sq / double(pooled_dof)).cwiseSqrt();
    if (stats.n_detections > 0)
        stats.avg_dist_error = dist_sum / double(stats.n_detections);
    return stats;
}

} // namespace govi::traj
