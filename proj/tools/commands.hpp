#pragma once

// Subcommand implementations shared by the `govi` executable and the tests.
// Each command writes its outputs under `out_dir`, returns the human-readable
// report (also written to <name>_report.txt) and a JSON twin
// (<name>_report.json). Failures are thrown as govi::Error.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "govi/allan.hpp"
#include "govi/sync.hpp"

namespace govi::cli {

namespace fs = std::filesystem;

struct Context {
    fs::path out_dir = ".";
    std::uint64_t seed = 0;
    int verbosity = 1; // 0 quiet, 1 info, 2 debug; logs go to stderr
};

struct Report {
    std::string text;
    std::string json;
};

void log_info(const Context& ctx, const std::string& msg);
void log_warn(const Context& ctx, const std::string& msg);

struct ExtractOptions {
    fs::path input;
    std::string recording_id; // defaults to the input file stem
};
Report cmd_extract(const Context& ctx, const ExtractOptions& opt);

struct AllanOptions {
    fs::path input;
    std::string sensor = "gyro"; // accel | gyro
    allan::FitWindows windows;
    int taus_per_decade = 30;
    double min_duration = 600.0;   // seconds; shorter logs are rejected
    double warn_duration = 3600.0; // seconds; shorter logs get a warning
};

struct AllanRun {
    allan::AllanCurve curve;
    allan::NoiseParams params;
    bool fitted = false;
    double white_slope = 0.0; // free log-log slope of the averaged curve in the white window
    std::vector<std::string> warnings;
};

/// The in-memory core of `allan`.
AllanRun run_allan(const std::vector<sync::ImuSample>& imu, const AllanOptions& opt);
Report cmd_allan(const Context& ctx, const AllanOptions& opt);

struct MapOptions {
    fs::path input;
    std::string output = "map.ply";
    std::string before_update; // optional PLY snapshot taken before the first pose update
};
Report cmd_map(const Context& ctx, const MapOptions& opt);

struct AteOptions {
    fs::path estimate;
    fs::path reference;
    std::string mode = "sim3"; // sim3 | se3
    double max_dt = 0.02;
    double scale = 1.0;
};
Report cmd_eval_ate(const Context& ctx, const AteOptions& opt);

struct TagOptions {
    fs::path trajectory;
    fs::path detections;
    double max_dt = 0.02;
};
Report cmd_eval_tags(const Context& ctx, const TagOptions& opt);

struct RegisterOptions {
    fs::path source;
    fs::path target;
    double voxel = 0.1;
    std::size_t normal_k = 30;
    double fpfh_radius_factor = 5.0;
    bool mutual = true;
    std::size_t ransac_max_iterations = 100000;
    double ransac_confidence = 0.999;
    double min_inlier_ratio = 0.05;
    std::size_t icp_max_iterations = 50;
    std::string aligned = "aligned.ply";
};
Report cmd_register(const Context& ctx, const RegisterOptions& opt);

struct FixturesOptions {
    double imu_duration = 1200.0; // seconds of simulated IMU noise
    double imu_rate = 200.0;
    double sigma_w = 2e-3;
    double sigma_b = 1e-4;
};
Report cmd_fixtures(const Context& ctx, const FixturesOptions& opt);

} // namespace govi::cli
