#include "govi/cloud_register.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <tuple>

#include <Eigen/Eigenvalues>

#include "govi/error.hpp"
#include "govi/ply.hpp"
#include "govi/spatial_hash.hpp"

namespace govi::cloud {

namespace {

void require_points(const PointCloud& cloud, const char* what)
{
    if (cloud.empty())
        fail(Errc::EmptyCloud, std::string(what) + " cloud is empty");
}

// Cell size that puts a few dozen surface points in each cell.
double neighbor_cell(std::span<const Vec3> points)
{
    Vec3 lo = points.front(), hi = points.front();
    for (const auto& p : points) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    double extent = (hi - lo).maxCoeff();
    double cell = extent / std::cbrt(double(points.size()));
    return cell > 1e-9 ? cell : 1.0;
}

Rigid3 kabsch(std::span<const Vec3> src, std::span<const Vec3> dst)
{
    return fit_similarity(src, dst, false).rigid();
}

// (alpha, phi, theta) pair feature with the source point chosen as the one
// whose normal makes the smaller angle with the connecting line. Near-ties
// keep p1 as the source: points sharing a neighborhood have identical
// normals, and letting round-off pick the side would flip theta's sign.
std::array<double, 3> pair_feature(const Vec3& p1, const Vec3& n1, const Vec3& p2, const Vec3& n2)
{
    Vec3 d = p2 - p1;
    double len = d.norm();
    if (len == 0.0)
        return {0.0, 0.0, 0.0};
    Vec3 ns = n1, nt = n2;
    double a1 = n1.dot(d) / len;
    double a2 = n2.dot(d) / len;
    double f3 = a1;
    if (std::abs(a2) - std::abs(a1) > 1e-12) {
        ns = n2;
        nt = n1;
        d = -d;
        f3 = -a2;
    }
    Vec3 v = d.cross(ns);
    double vn = v.norm();
    if (vn == 0.0)
        return {0.0, 0.0, 0.0};
    v /= vn;
    Vec3 w = ns.cross(v);
    return {std::atan2(w.dot(nt), ns.dot(nt)), v.dot(nt), f3};
}

int bin_of(double value, double lo, double hi)
{
    int b = int(std::floor(11.0 * (value - lo) / (hi - lo)));
    return std::clamp(b, 0, 10);
}

struct Association {
    std::vector<Vec3> src;
    std::vector<Vec3> dst;
    double objective = 0.0;
};

Association associate(const PointCloud& source, const PointCloud& target, const SpatialHash& hash,
                      const Rigid3& t, double threshold)
{
    Association a;
    const double cap = threshold * threshold;
    double sum = 0.0;
    for (const auto& p : source.points) {
        Vec3 q = t * p;
        auto hit = hash.nearest(q, threshold);
        if (!hit) {
            sum += cap;
            continue;
        }
        sum += hit->distance * hit->distance;
        a.src.push_back(q);
        a.dst.push_back(target.points[hit->index]);
    }
    a.objective = sum / double(source.size());
    return a;
}

} // namespace

PointCloud load_ply(const std::filesystem::path& path)
{
    auto data = ply::read(path);
    PointCloud c;
    c.points = std::move(data.points);
    for (const auto& rgb : data.colors)
        c.colors.emplace_back(rgb[0], rgb[1], rgb[2]);
    c.normals = std::move(data.normals);
    for (const auto& p : c.points)
        if (!p.allFinite())
            fail(Errc::MalformedPly, "non-finite vertex in '" + path.string() + "'");
    return c;
}

void save_ply(const std::filesystem::path& path, const PointCloud& cloud)
{
    ply::VertexData data;
    data.points = cloud.points;
    for (const auto& c : cloud.colors) {
        std::array<std::uint8_t, 3> rgb{};
        for (int i = 0; i < 3; ++i)
            rgb[std::size_t(i)] = std::uint8_t(std::clamp(std::lround(c[i]), 0L, 255L));
        data.colors.push_back(rgb);
    }
    data.normals = cloud.normals;
    data.declare_colors = cloud.has_colors();
    data.declare_normals = cloud.has_normals();
    ply::write(path, data);
}

PointCloud transformed(const PointCloud& cloud, const Rigid3& t)
{
    PointCloud out = cloud;
    for (auto& p : out.points)
        p = t * p;
    for (auto& n : out.normals)
        n = t.q * n;
    return out;
}

PointCloud voxel_downsample(const PointCloud& cloud, double voxel)
{
    require_points(cloud, "input");
    if (!(voxel > 0.0))
        fail(Errc::InvalidArgument, "voxel size must be positive");
    using Key = std::tuple<std::int64_t, std::int64_t, std::int64_t>;
    std::vector<std::pair<Key, std::uint32_t>> keyed;
    keyed.reserve(cloud.size());
    for (std::uint32_t i = 0; i < cloud.size(); ++i) {
        const auto& p = cloud.points[i];
        keyed.push_back({{std::int64_t(std::floor(p.x() / voxel)), std::int64_t(std::floor(p.y() / voxel)),
                          std::int64_t(std::floor(p.z() / voxel))},
                         i});
    }
    std::sort(keyed.begin(), keyed.end());

    PointCloud out;
    const bool colors = cloud.has_colors();
    for (std::size_t begin = 0; begin < keyed.size();) {
        std::size_t end = begin;
        Vec3 sum = Vec3::Zero(), csum = Vec3::Zero();
        while (end < keyed.size() && keyed[end].first == keyed[begin].first) {
            sum += cloud.points[keyed[end].second];
            if (colors)
                csum += cloud.colors[keyed[end].second];
            ++end;
        }
        double n = double(end - begin);
        out.points.push_back(sum / n);
        if (colors)
            out.colors.push_back(csum / n);
        begin = end;
    }
    return out;
}

PointCloud estimate_normals(const PointCloud& cloud, std::size_t k_neighbors, const NormalOrientation& orientation)
{
    if (k_neighbors == 0)
        fail(Errc::InvalidArgument, "k_neighbors must be positive");
    if (cloud.size() < k_neighbors + 1)
        fail(Errc::TooFewPoints, "normal estimation with k=" + std::to_string(k_neighbors) + " needs " +
                                     std::to_string(k_neighbors + 1) + " points, have " +
                                     std::to_string(cloud.size()));
    PointCloud out = cloud;
    out.normals.assign(cloud.size(), Vec3::UnitZ());
    out.degenerate_normal.assign(cloud.size(), 0);
    SpatialHash hash(cloud.points, neighbor_cell(cloud.points));

    for (std::size_t i = 0; i < cloud.size(); ++i) {
        auto hits = hash.knn(cloud.points[i], k_neighbors + 1);
        Vec3 mean = Vec3::Zero();
        for (const auto& h : hits)
            mean += cloud.points[h.index];
        mean /= double(hits.size());
        Mat3 cov = Mat3::Zero();
        for (const auto& h : hits) {
            Vec3 d = cloud.points[h.index] - mean;
            cov += d * d.transpose();
        }
        cov /= double(hits.size());
        Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
        const Vec3& ev = eig.eigenvalues(); // ascending
        if (!(ev[1] > 1e-12 * std::max(ev[2], std::numeric_limits<double>::min()))) {
            out.degenerate_normal[i] = 1;
            continue;
        }
        Vec3 n = eig.eigenvectors().col(0).normalized();
        double facing = orientation.mode == NormalOrientation::Mode::TowardViewpoint
                            ? n.dot(orientation.viewpoint - cloud.points[i])
                            : n.dot(orientation.direction);
        if (facing < 0.0)
            n = -n;
        out.normals[i] = n;
    }
    return out;
}

FpfhSet compute_fpfh(const PointCloud& cloud, double radius)
{
    require_points(cloud, "input");
    if (!cloud.has_normals() || cloud.normals.size() != cloud.size())
        fail(Errc::InvalidArgument, "FPFH needs one normal per point");
    if (!(radius > 0.0))
        fail(Errc::InvalidArgument, "FPFH radius must be positive");

    const std::size_t n = cloud.size();
    SpatialHash hash(cloud.points, radius);
    std::vector<std::vector<std::uint32_t>> neighbors(n);
    std::vector<Fpfh> spfh(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (auto j : hash.radius_search(cloud.points[i], radius))
            if (j != i && cloud.points[j] != cloud.points[i])
                neighbors[i].push_back(j);
        auto& h = spfh[i];
        h.fill(0.0);
        if (neighbors[i].empty())
            continue;
        const double inc = 100.0 / double(neighbors[i].size());
        for (auto j : neighbors[i]) {
            auto f = pair_feature(cloud.points[i], cloud.normals[i], cloud.points[j], cloud.normals[j]);
            h[std::size_t(bin_of(f[0], -std::numbers::pi, std::numbers::pi))] += inc;
            h[std::size_t(11 + bin_of(f[1], -1.0, 1.0))] += inc;
            h[std::size_t(22 + bin_of(f[2], -1.0, 1.0))] += inc;
        }
    }

    FpfhSet out;
    out.descriptors.resize(n);
    out.isolated.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        auto& f = out.descriptors[i];
        f.fill(0.0);
        if (neighbors[i].empty()) {
            out.isolated[i] = 1;
            ++out.isolated_count;
            continue;
        }
        const double k = double(neighbors[i].size());
        for (auto j : neighbors[i]) {
            double w = 1.0 / ((cloud.points[j] - cloud.points[i]).norm() * k);
            for (std::size_t b = 0; b < 33; ++b)
                f[b] += w * spfh[j][b];
        }
        for (std::size_t b = 0; b < 33; ++b)
            f[b] += spfh[i][b];
        for (std::size_t s = 0; s < 3; ++s) {
            double sum = 0.0;
            for (std::size_t b = 0; b < 11; ++b)
                sum += f[s * 11 + b];
            if (sum > 0.0)
                for (std::size_t b = 0; b < 11; ++b)
                    f[s * 11 + b] *= 100.0 / sum;
        }
    }
    return out;
}

namespace {

std::vector<std::uint32_t> nearest_descriptors(std::span<const Fpfh> from, std::span<const Fpfh> to,
                                               const std::vector<std::uint8_t>* only)
{
    std::vector<std::uint32_t> nn(from.size(), 0);
    for (std::size_t i = 0; i < from.size(); ++i) {
        if (only && !(*only)[i])
            continue;
        const auto& a = from[i];
        double best = std::numeric_limits<double>::infinity();
        std::uint32_t best_j = 0;
        for (std::size_t j = 0; j < to.size(); ++j) {
            const auto& b = to[j];
            double d = 0.0;
            std::size_t k = 0;
            // partial sums abandon a candidate as soon as it cannot win
            for (; k < 33 && d < best; k += 11)
                for (std::size_t m = k; m < k + 11; ++m) {
                    double diff = a[m] - b[m];
                    d += diff * diff;
                }
            if (k == 33 && d < best) {
                best = d;
                best_j = std::uint32_t(j);
            }
        }
        nn[i] = best_j;
    }
    return nn;
}

} // namespace

std::vector<Correspondence> match_descriptors(std::span<const Fpfh> source, std::span<const Fpfh> target, bool mutual)
{
    std::vector<Correspondence> out;
    if (source.empty() || target.empty())
        return out;
    auto forward = nearest_descriptors(source, target, nullptr);
    if (!mutual) {
        for (std::uint32_t i = 0; i < forward.size(); ++i)
            out.push_back({i, forward[i]});
        return out;
    }
    std::vector<std::uint8_t> wanted(target.size(), 0);
    for (auto j : forward)
        wanted[j] = 1;
    auto backward = nearest_descriptors(target, source, &wanted);
    for (std::uint32_t i = 0; i < forward.size(); ++i)
        if (backward[forward[i]] == i)
            out.push_back({i, forward[i]});
    return out;
}

GlobalRegistration robust_global_registration(std::span<const Correspondence> correspondences,
                                              std::span<const Vec3> source, std::span<const Vec3> target,
                                              const RansacOptions& options)
{
    const std::size_t n = correspondences.size();
    if (n < 3)
        fail(Errc::ConsensusFailure, "need at least 3 correspondences, have " + std::to_string(n));
    if (!(options.inlier_threshold > 0.0))
        fail(Errc::InvalidArgument, "inlier threshold must be positive");
    for (const auto& c : correspondences)
        if (c.source >= source.size() || c.target >= target.size())
            fail(Errc::InvalidArgument, "correspondence index out of range");

    const double thr2 = options.inlier_threshold * options.inlier_threshold;
    auto count_inliers = [&](const Rigid3& t, std::vector<std::uint32_t>* ids) {
        std::size_t count = 0;
        for (std::uint32_t i = 0; i < n; ++i) {
            const auto& c = correspondences[i];
            if ((t * source[c.source] - target[c.target]).squaredNorm() < thr2) {
                ++count;
                if (ids)
                    ids->push_back(i);
            }
        }
        return count;
    };

    std::mt19937_64 rng(options.seed);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    const double ratio = options.edge_length_ratio;
    GlobalRegistration best;
    std::size_t needed = options.max_iterations;
    std::size_t it = 0;
    for (; it < options.max_iterations && it < needed; ++it) {
        std::size_t s[3];
        s[0] = pick(rng);
        do s[1] = pick(rng); while (s[1] == s[0]);
        do s[2] = pick(rng); while (s[2] == s[0] || s[2] == s[1]);
        std::array<Vec3, 3> a, b;
        for (int k = 0; k < 3; ++k) {
            a[std::size_t(k)] = source[correspondences[s[k]].source];
            b[std::size_t(k)] = target[correspondences[s[k]].target];
        }
        bool consistent = true;
        if (ratio > 0.0) {
            for (int k = 0; k < 3 && consistent; ++k) {
                double la = (a[std::size_t(k)] - a[std::size_t((k + 1) % 3)]).norm();
                double lb = (b[std::size_t(k)] - b[std::size_t((k + 1) % 3)]).norm();
                consistent = la >= ratio * lb && lb >= ratio * la;
            }
        }
        if (!consistent || (a[1] - a[0]).cross(a[2] - a[0]).norm() < 1e-12)
            continue;
        Rigid3 t;
        try {
            t = kabsch(a, b);
        } catch (const Error&) {
            continue;
        }
        std::size_t count = count_inliers(t, nullptr);
        if (count > best.n_inliers) {
            best.n_inliers = count;
            best.transform = t;
            double w = double(count) / double(n);
            double miss = 1.0 - w * w * w;
            if (miss <= 0.0) {
                needed = it + 1;
            } else {
                double k = std::log(1.0 - options.confidence) / std::log(miss);
                if (k < double(options.max_iterations))
                    needed = std::size_t(std::ceil(k));
            }
        }
    }
    best.iterations = it;

    // least-squares refit on the consensus set until it stops growing
    for (int round = 0; round < 20 && best.n_inliers >= 3; ++round) {
        std::vector<std::uint32_t> ids;
        count_inliers(best.transform, &ids);
        std::vector<Vec3> a, b;
        for (auto i : ids) {
            a.push_back(source[correspondences[i].source]);
            b.push_back(target[correspondences[i].target]);
        }
        Rigid3 t;
        try {
            t = kabsch(a, b);
        } catch (const Error&) {
            break;
        }
        std::size_t count = count_inliers(t, nullptr);
        if (count < ids.size())
            break;
        best.transform = t;
        bool grew = count > best.n_inliers;
        best.n_inliers = count;
        if (!grew && round > 0)
            break;
    }
    best.inlier_ratio = double(best.n_inliers) / double(n);
    if (best.n_inliers < 3 || best.inlier_ratio < options.min_inlier_ratio)
        fail(Errc::ConsensusFailure, "best consensus " + std::to_string(best.n_inliers) + " of " + std::to_string(n) +
                                         " correspondences is below the minimum ratio");
    return best;
}

IcpResult icp_refine(const PointCloud& source, const PointCloud& target, const Rigid3& init, const IcpOptions& options)
{
    require_points(source, "source");
    require_points(target, "target");
    if (!(options.threshold > 0.0))
        fail(Errc::InvalidArgument, "ICP threshold must be positive");
    if (!init.q.coeffs().allFinite() || !init.t.allFinite())
        fail(Errc::InvalidPose, "non-finite initial transform");

    SpatialHash hash(target.points, options.threshold);
    IcpResult r;
    r.transform = Rigid3::from(init.q, init.t);
    auto assoc = associate(source, target, hash, r.transform, options.threshold);
    if (assoc.src.empty())
        fail(Errc::NoOverlap, "no source point lies within the threshold of the target");
    r.objective = assoc.objective;
    r.objective_history.push_back(r.objective);

    while (r.iterations < options.max_iterations) {
        if (assoc.src.size() < 3)
            break;
        Rigid3 delta;
        try {
            delta = kabsch(assoc.src, assoc.dst);
        } catch (const Error&) {
            break;
        }
        Rigid3 next = delta * r.transform;
        auto next_assoc = associate(source, target, hash, next, options.threshold);
        double change = rotation_angle(delta.rotation()) + delta.t.norm();
        if (next_assoc.src.empty() || next_assoc.objective > r.objective) {
            // a negligible step that round-off made worse still counts as converged
            r.converged = change < options.tolerance;
            break;
        }
        r.transform = next;
        r.objective = next_assoc.objective;
        r.objective_history.push_back(r.objective);
        assoc = std::move(next_assoc);
        ++r.iterations;
        if (change < options.tolerance) {
            r.converged = true;
            break;
        }
    }
    return r;
}

RegistrationResult score_registration(const PointCloud& source, const PointCloud& target, const Rigid3& transform,
                                      double threshold)
{
    require_points(source, "source");
    require_points(target, "target");
    if (!(threshold > 0.0))
        fail(Errc::InvalidArgument, "score threshold must be positive");
    SpatialHash hash(target.points, threshold);
    RegistrationResult r;
    r.transform = transform;
    double sum = 0.0;
    for (const auto& p : source.points) {
        auto hit = hash.nearest(transform * p, threshold);
        if (!hit)
            continue;
        ++r.n_inliers;
        sum += hit->distance * hit->distance;
    }
    r.n_correspondences = r.n_inliers;
    r.fitness = double(r.n_inliers) / double(source.size());
    r.inlier_rmse = r.n_inliers ? std::sqrt(sum / double(r.n_inliers)) : 0.0;
    return r;
}

PipelineResult register_clouds(const PointCloud& source, const PointCloud& target, const PipelineOptions& options)
{
    PipelineResult out;
    auto src = voxel_downsample(source, options.voxel);
    auto tgt = voxel_downsample(target, options.voxel);
    out.source_points = src.size();
    out.target_points = tgt.size();
    src = estimate_normals(src, options.normal_k, options.orientation);
    tgt = estimate_normals(tgt, options.normal_k, options.orientation);

    const double radius = options.fpfh_radius_factor * options.voxel;
    auto fs = compute_fpfh(src, radius);
    auto ft = compute_fpfh(tgt, radius);

    // isolated points carry no geometry; leave them out of matching
    std::vector<std::uint32_t> src_ids, tgt_ids;
    std::vector<Fpfh> ds, dt;
    for (std::uint32_t i = 0; i < src.size(); ++i)
        if (!fs.isolated[i]) {
            src_ids.push_back(i);
            ds.push_back(fs.descriptors[i]);
        }
    for (std::uint32_t i = 0; i < tgt.size(); ++i)
        if (!ft.isolated[i]) {
            tgt_ids.push_back(i);
            dt.push_back(ft.descriptors[i]);
        }
    auto matches = match_descriptors(ds, dt, options.mutual);
    for (auto& m : matches)
        m = {src_ids[m.source], tgt_ids[m.target]};
    out.putative_correspondences = matches.size();

    RansacOptions ro;
    ro.inlier_threshold = options.voxel;
    ro.max_iterations = options.ransac_max_iterations;
    ro.confidence = options.ransac_confidence;
    ro.min_inlier_ratio = options.min_inlier_ratio;
    ro.seed = options.seed;
    out.global = robust_global_registration(matches, src.points, tgt.points, ro);

    IcpOptions io;
    io.max_iterations = options.icp_max_iterations;
    io.threshold = options.voxel;
    out.icp = icp_refine(source, target, out.global.transform, io);

    out.result = score_registration(src, tgt, out.icp.transform, options.voxel);
    return out;
}

} // namespace govi::cloud
