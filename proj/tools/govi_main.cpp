#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "govi/error.hpp"

using namespace govi;

int main(int argc, char** argv)
{
    CLI::App app{"govi: GoPro telemetry extraction, IMU noise calibration, loop-closure mapping and evaluation"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "key=value configuration file (command-line flags take precedence)");

    cli::Context ctx;
    std::string out_dir = ".";
    int verbose = 0;
    bool quiet = false;
    app.add_option("--seed", ctx.seed, "random seed")->capture_default_str();
    app.add_option("--out-dir", out_dir, "directory for outputs")->capture_default_str();
    app.add_flag("-v,--verbose", verbose, "more logging on stderr");
    app.add_flag("-q,--quiet", quiet, "only warnings and errors on stderr");

    cli::ExtractOptions ex;
    auto* extract = app.add_subcommand("extract", "MP4 telemetry to IMU CSV, frame timestamp CSV and manifest");
    extract->add_option("mp4", ex.input, "GoPro MP4 file")->required();
    extract->add_option("--recording-id", ex.recording_id, "identifier written to the manifest");

    cli::AllanOptions al;
    auto* allan = app.add_subcommand("allan", "Allan deviation curve and white-noise / random-walk fit");
    allan->add_option("imu_csv", al.input, "IMU CSV (t,ax,ay,az,gx,gy,gz)")->required();
    allan->add_option("--sensor", al.sensor, "accel or gyro")->capture_default_str();
    allan->add_option("--white-lo", al.windows.white_lo, "white-noise window start, s (0: 2/rate)")->capture_default_str();
    allan->add_option("--white-hi", al.windows.white_hi, "white-noise window end, s")->capture_default_str();
    allan->add_option("--walk-lo", al.windows.walk_lo, "random-walk window start, s")->capture_default_str();
    allan->add_option("--walk-hi", al.windows.walk_hi, "random-walk window end, s")->capture_default_str();
    allan->add_option("--taus-per-decade", al.taus_per_decade)->capture_default_str();
    allan->add_option("--min-duration", al.min_duration, "reject shorter logs, s")->capture_default_str();

    cli::MapOptions mp;
    auto* map = app.add_subcommand("map", "replay a keyframe/observation event log and export the fused cloud");
    map->add_option("event_log", mp.input, "event log")->required();
    map->add_option("-o,--output", mp.output, "fused cloud PLY (in --out-dir)")->capture_default_str();
    map->add_option("--before-update", mp.before_update, "also export the cloud as it was before the first pose update");

    cli::AteOptions at;
    auto* ate = app.add_subcommand("eval-ate", "absolute trajectory error after similarity alignment");
    ate->add_option("estimate", at.estimate, "estimated trajectory (TUM)")->required();
    ate->add_option("reference", at.reference, "reference trajectory (TUM)")->required();
    ate->add_option("--mode", at.mode, "sim3 or se3")->capture_default_str();
    ate->add_option("--max-dt", at.max_dt, "timestamp association window, s")->capture_default_str();
    ate->add_option("--scale", at.scale, "scale applied to the estimate before alignment")->capture_default_str();

    cli::TagOptions tg;
    auto* tags = app.add_subcommand("eval-tags", "marker position consistency along a trajectory");
    tags->add_option("trajectory", tg.trajectory, "camera trajectory (TUM)")->required();
    tags->add_option("detections", tg.detections, "detections CSV (t,tag_id,px,py,pz)")->required();
    tags->add_option("--max-dt", tg.max_dt, "pose lookup window, s")->capture_default_str();

    cli::RegisterOptions rg;
    auto* reg = app.add_subcommand("register", "align two point clouds and score the overlap");
    reg->add_option("source", rg.source, "source cloud (PLY)")->required();
    reg->add_option("target", rg.target, "target cloud (PLY)")->required();
    reg->add_option("--voxel", rg.voxel, "voxel size and inlier threshold, m")->capture_default_str();
    reg->add_option("--normal-k", rg.normal_k)->capture_default_str();
    reg->add_option("--fpfh-radius-factor", rg.fpfh_radius_factor)->capture_default_str();
    reg->add_option("--mutual", rg.mutual, "reciprocal descriptor matches only")->capture_default_str();
    reg->add_option("--ransac-iterations", rg.ransac_max_iterations)->capture_default_str();
    reg->add_option("--ransac-confidence", rg.ransac_confidence)->capture_default_str();
    reg->add_option("--min-inlier-ratio", rg.min_inlier_ratio)->capture_default_str();
    reg->add_option("--icp-iterations", rg.icp_max_iterations)->capture_default_str();
    reg->add_option("--aligned", rg.aligned, "aligned source PLY (in --out-dir)")->capture_default_str();

    cli::FixturesOptions fx;
    auto* fixtures = app.add_subcommand("fixtures", "write synthetic inputs for every subcommand");
    fixtures->add_option("--imu-duration", fx.imu_duration, "seconds of simulated IMU noise")->capture_default_str();
    fixtures->add_option("--imu-rate", fx.imu_rate)->capture_default_str();
    fixtures->add_option("--sigma-w", fx.sigma_w)->capture_default_str();
    fixtures->add_option("--sigma-b", fx.sigma_b)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    ctx.out_dir = out_dir;
    ctx.verbosity = quiet ? 0 : 1 + verbose;

    try {
        cli::Report report;
        if (*extract)
            report = cli::cmd_extract(ctx, ex);
        else if (*allan)
            report = cli::cmd_allan(ctx, al);
        else if (*map)
            report = cli::cmd_map(ctx, mp);
        else if (*ate)
            report = cli::cmd_eval_ate(ctx, at);
        else if (*tags)
            report = cli::cmd_eval_tags(ctx, tg);
        else if (*reg)
            report = cli::cmd_register(ctx, rg);
        else if (*fixtures)
            report = cli::cmd_fixtures(ctx, fx);
        std::cout << report.text << std::flush;
        return 0;
    } catch (const Error& e) {
        std::cerr << "govi: error: " << e.what() << '\n';
        return is_input_error(e.code()) ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "govi: error: " << e.what() << '\n';
        return 1;
    }
}
