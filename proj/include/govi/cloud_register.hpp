#pragma once

// Sparse-map comparison: voxel downsampling, normals, FPFH descriptors,
// descriptor matching, correspondence RANSAC, point-to-point ICP, and the
// fitness / inlier_rmse scores.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "govi/geometry.hpp"

namespace govi::cloud {

struct PointCloud {
    std::vector<Vec3> points;
    std::vector<Vec3> colors;   // RGB in [0, 255], empty when absent
    std::vector<Vec3> normals;  // unit vectors, empty when absent
    std::vector<std::uint8_t> degenerate_normal; // 1 where the fallback normal was used

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
    bool has_colors() const { return !colors.empty(); }
    bool has_normals() const { return !normals.empty(); }
};

PointCloud load_ply(const std::filesystem::path& path);
void save_ply(const std::filesystem::path& path, const PointCloud& cloud);

PointCloud transformed(const PointCloud& cloud, const Rigid3& t);

/// One centroid per occupied cell of the grid floor(p / voxel); colors are
/// averaged, normals dropped. Output is ordered by cell (x, then y, then z).
PointCloud voxel_downsample(const PointCloud& cloud, double voxel);

struct NormalOrientation {
    enum class Mode { TowardViewpoint, AlongDirection } mode = Mode::TowardViewpoint;
    Vec3 viewpoint = Vec3::Zero();
    Vec3 direction = Vec3::UnitZ();

    static NormalOrientation toward(const Vec3& p) { return {Mode::TowardViewpoint, p, Vec3::UnitZ()}; }
    static NormalOrientation along(const Vec3& d) { return {Mode::AlongDirection, Vec3::Zero(), d}; }
};

/// Smallest-eigenvalue eigenvector of each k-neighborhood covariance (the
/// point itself included). Rank-deficient neighborhoods get (0,0,1) and a flag.
PointCloud estimate_normals(const PointCloud& cloud, std::size_t k_neighbors,
                            const NormalOrientation& orientation = {});

using Fpfh = std::array<double, 33>;

struct FpfhSet {
    std::vector<Fpfh> descriptors;
    std::vector<std::uint8_t> isolated; // 1: no neighbor within radius, zero descriptor
    std::size_t isolated_count = 0;
};

FpfhSet compute_fpfh(const PointCloud& cloud, double radius);

struct Correspondence {
    std::uint32_t source;
    std::uint32_t target;
    bool operator==(const Correspondence&) const = default;
};

/// L2 nearest target descriptor for every source descriptor (ties: lowest
/// index). With `mutual` only reciprocal pairs are kept.
std::vector<Correspondence> match_descriptors(std::span<const Fpfh> source, std::span<const Fpfh> target,
                                              bool mutual = true);

struct RansacOptions {
    double inlier_threshold = 0.1;
    std::size_t max_iterations = 100000;
    double confidence = 0.999;
    double min_inlier_ratio = 0.05;
    // Reject samples whose pairwise edge lengths disagree by more than this
    // ratio; 0 disables the check.
    double edge_length_ratio = 0.9;
    std::uint64_t seed = 0;
};

struct GlobalRegistration {
    Rigid3 transform;
    std::size_t n_inliers = 0;
    double inlier_ratio = 0.0;
    std::size_t iterations = 0;
};

/// Transform mapping source points onto target points.
GlobalRegistration robust_global_registration(std::span<const Correspondence> correspondences,
                                              std::span<const Vec3> source, std::span<const Vec3> target,
                                              const RansacOptions& options);

struct IcpOptions {
    std::size_t max_iterations = 50;
    double threshold = 0.1;
    double tolerance = 1e-8;
};

struct IcpResult {
    Rigid3 transform;
    std::size_t iterations = 0;
    bool converged = false;
    // Truncated objective mean(min(d^2, threshold^2)) over all source points.
    double objective = 0.0;
    std::vector<double> objective_history;
};

IcpResult icp_refine(const PointCloud& source, const PointCloud& target, const Rigid3& init,
                     const IcpOptions& options);

struct RegistrationResult {
    Rigid3 transform;
    double fitness = 0.0;
    double inlier_rmse = 0.0;
    std::size_t n_correspondences = 0; // source-target pairs closer than the threshold
    std::size_t n_inliers = 0;
};

RegistrationResult score_registration(const PointCloud& source, const PointCloud& target, const Rigid3& transform,
                                      double threshold);

struct PipelineOptions {
    double voxel = 0.1;
    std::size_t normal_k = 30;
    double fpfh_radius_factor = 5.0;
    bool mutual = true;
    NormalOrientation orientation = NormalOrientation::along(Vec3::UnitZ());
    std::size_t ransac_max_iterations = 100000;
    double ransac_confidence = 0.999;
    double min_inlier_ratio = 0.05;
    std::size_t icp_max_iterations = 50;
    std::uint64_t seed = 0;
};

struct PipelineResult {
    RegistrationResult result;   // scored on the downsampled clouds
    GlobalRegistration global;
    IcpResult icp;
    std::size_t source_points = 0; // after downsampling
    std::size_t target_points = 0;
    std::size_t putative_correspondences = 0;
};

/// Downsample, describe, match, RANSAC, then ICP on the original clouds.
PipelineResult register_clouds(const PointCloud& source, const PointCloud& target, const PipelineOptions& options);

} // namespace govi::cloud
