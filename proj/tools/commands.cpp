#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "govi/cloud_register.hpp"
#include "govi/error.hpp"
#include "govi/global_map.hpp"
#include "govi/mp4_demux.hpp"
#include "govi/synthetic.hpp"
#include "govi/text.hpp"
#include "govi/traj_eval.hpp"

namespace govi::cli {

using json = nlohmann::ordered_json;

namespace {

std::string g6(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string e6(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6e", v);
    return buf;
}

void write_file(const fs::path& path, const std::string& content)
{
    std::ofstream os(path, std::ios::binary);
    if (!os || !(os << content))
        fail(Errc::IoError, "cannot write '" + path.string() + "'");
}

void ensure_dir(const fs::path& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        fail(Errc::IoError, "cannot create '" + dir.string() + "': " + ec.message());
}

Report finish(const Context& ctx, const std::string& name, std::string text, const json& j)
{
    ensure_dir(ctx.out_dir);
    Report r{std::move(text), j.dump(2) + "\n"};
    write_file(ctx.out_dir / (name + "_report.txt"), r.text);
    write_file(ctx.out_dir / (name + "_report.json"), r.json);
    return r;
}

void require_file(const fs::path& path, const char* what)
{
    if (path.empty())
        fail(Errc::InvalidArgument, std::string(what) + " path is required");
    std::error_code ec;
    if (!fs::is_regular_file(path, ec))
        fail(Errc::IoError, std::string(what) + " '" + path.string() + "' is not a readable file");
}

json matrix_json(const Mat4& m)
{
    json rows = json::array();
    for (int r = 0; r < 4; ++r) {
        json row = json::array();
        for (int c = 0; c < 4; ++c)
            row.push_back(m(r, c));
        rows.push_back(row);
    }
    return rows;
}

std::string matrix_text(const Mat4& m)
{
    std::string s;
    for (int r = 0; r < 4; ++r) {
        s += " ";
        for (int c = 0; c < 4; ++c) {
            char buf[32];
            std::snprintf(buf, sizeof buf, " %12.6f", m(r, c));
            s += buf;
        }
        s += "\n";
    }
    return s;
}

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

} // namespace

void log_info(const Context& ctx, const std::string& msg)
{
    if (ctx.verbosity >= 1)
        std::cerr << "govi: " << msg << '\n';
}

void log_warn(const Context& ctx, const std::string& msg)
{
    if (ctx.verbosity >= 0)
        std::cerr << "govi: warning: " << msg << '\n';
}

// ---------------------------------------------------------------------------

Report cmd_extract(const Context& ctx, const ExtractOptions& opt)
{
    require_file(opt.input, "input");
    mp4::FileSource src(opt.input);
    auto raw = mp4::read_gpmf_payloads(src);
    log_info(ctx, "read " + std::to_string(raw.size()) + " telemetry payloads");
    std::vector<sync::PayloadStreams> streams;
    streams.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        try {
            streams.push_back(sync::decode_payload(raw[i]));
        } catch (const Error& e) {
            throw Error(e.code(), "payload " + std::to_string(i) + " (t=" + g6(raw[i].start_time) + " s): " +
                                      std::string(e.what()).substr(std::string(e.what()).find(": ") + 2));
        }
    }
    auto id = opt.recording_id.empty() ? opt.input.stem().string() : opt.recording_id;
    auto ds = sync::build_dataset(streams, id);
    for (const auto& w : ds.warnings)
        log_warn(ctx, w);

    ensure_dir(ctx.out_dir);
    sync::export_imu_csv(ds, ctx.out_dir / "imu.csv");
    sync::export_frames_csv(ds, ctx.out_dir / "frames.csv");
    auto manifest = sync::format_manifest(ds, "imu.csv", "frames.csv");
    write_file(ctx.out_dir / "manifest.txt", manifest);

    const auto& m = ds.meta;
    std::string text = "extract\n";
    text += "input: " + opt.input.string() + "\n";
    text += "payloads: " + std::to_string(m.payload_count) + "\n";
    text += "duration_s: " + text::fixed(m.duration, 6) + "\n";
    text += "imu_samples: " + std::to_string(ds.imu.size()) + "\n";
    text += "imu_rate_hz: " + text::fixed(m.accel_rate, 3) + "\n";
    text += "frames: " + std::to_string(ds.frames.size()) + "\n";
    text += "frame_rate_hz: " + text::fixed(m.frame_rate, 3) + "\n";
    text += "axis_convention: " + m.axis_convention + "\n";
    text += "files: manifest.txt imu.csv frames.csv\n";
    json j = {{"command", "extract"},
              {"input", opt.input.string()},
              {"recording_id", m.recording_id},
              {"payloads", m.payload_count},
              {"duration_s", m.duration},
              {"imu_samples", ds.imu.size()},
              {"imu_rate_hz", m.accel_rate},
              {"gyro_rate_hz", m.gyro_rate},
              {"frames", ds.frames.size()},
              {"frame_rate_hz", m.frame_rate},
              {"axis_convention", m.axis_convention},
              {"files", {"manifest.txt", "imu.csv", "frames.csv"}},
              {"warnings", ds.warnings}};
    return finish(ctx, "extract", text, j);
}

// ---------------------------------------------------------------------------

AllanRun run_allan(const std::vector<sync::ImuSample>& imu, const AllanOptions& opt)
{
    if (opt.sensor != "accel" && opt.sensor != "gyro")
        fail(Errc::InvalidArgument, "sensor must be 'accel' or 'gyro', got '" + opt.sensor + "'");
    if (imu.size() < 2)
        fail(Errc::SeriesTooShort, "need at least 2 IMU samples");
    const double span = imu.back().t - imu.front().t;
    if (!(span > 0.0))
        fail(Errc::InvalidArgument, "IMU timestamps do not advance");
    const double rate = double(imu.size() - 1) / span;
    const double duration = double(imu.size()) / rate;
    if (duration < opt.min_duration)
        fail(Errc::SeriesTooShort, "log covers " + g6(duration) + " s, need at least " + g6(opt.min_duration) + " s");

    AllanRun run;
    if (duration < opt.warn_duration)
        run.warnings.push_back("log covers " + g6(duration) + " s; bias estimates need about " +
                               g6(opt.warn_duration) + " s or more");
    std::vector<std::vector<double>> axes(3, std::vector<double>(imu.size()));
    const bool gyro = opt.sensor == "gyro";
    for (std::size_t i = 0; i < imu.size(); ++i)
        for (std::size_t a = 0; a < 3; ++a)
            axes[a][i] = gyro ? imu[i].gyro[a] : imu[i].accel[a];

    auto taus = allan::default_taus(imu.size(), rate, opt.taus_per_decade);
    run.curve = allan::allan_deviation(axes, rate, taus);
    try {
        run.params = allan::fit_noise_params(run.curve, opt.windows);
        run.fitted = true;
        double lo = opt.windows.white_lo > 0.0 ? opt.windows.white_lo : 2.0 / rate;
        double sum = 0.0;
        for (std::size_t a = 0; a < 3; ++a)
            sum += allan::fit_loglog_slope(run.curve, a, lo, opt.windows.white_hi);
        run.white_slope = sum / 3.0;
    } catch (const Error& e) {
        if (e.code() != Errc::FitRegionEmpty)
            throw;
        run.warnings.push_back(e.what());
    }
    return run;
}

Report cmd_allan(const Context& ctx, const AllanOptions& opt)
{
    require_file(opt.input, "input");
    auto imu = sync::read_imu_csv(opt.input);
    log_info(ctx, "loaded " + std::to_string(imu.size()) + " IMU samples");
    auto run = run_allan(imu, opt);
    for (const auto& w : run.warnings)
        log_warn(ctx, w);

    ensure_dir(ctx.out_dir);
    const auto avg = run.curve.average();
    std::string csv = "tau,adev_x,adev_y,adev_z,adev_avg\n";
    for (std::size_t k = 0; k < run.curve.taus.size(); ++k) {
        csv += text::shortest(run.curve.taus[k]);
        for (std::size_t a = 0; a < 3; ++a)
            csv += "," + text::shortest(run.curve.adev[a][k]);
        csv += "," + text::shortest(avg[k]) + "\n";
    }
    write_file(ctx.out_dir / "allan_curve.csv", csv);

    std::string text = "allan\n";
    text += "input: " + opt.input.string() + "\n";
    text += "sensor: " + opt.sensor + "\n";
    text += "samples: " + std::to_string(run.curve.n_samples) + "\n";
    text += "rate_hz: " + text::fixed(run.curve.rate, 3) + "\n";
    text += "taus: " + std::to_string(run.curve.taus.size()) + "\n";
    json j = {{"command", "allan"},
              {"input", opt.input.string()},
              {"sensor", opt.sensor},
              {"samples", run.curve.n_samples},
              {"rate_hz", run.curve.rate},
              {"taus", run.curve.taus.size()},
              {"curve_csv", "allan_curve.csv"},
              {"fitted", run.fitted}};
    if (run.fitted) {
        const auto& p = run.params;
        text += "              x             y             z             avg\n";
        text += "sigma_w: " + e6(p.sigma_w[0]) + " " + e6(p.sigma_w[1]) + " " + e6(p.sigma_w[2]) + " " +
                e6(p.sigma_w_avg) + "\n";
        text += "sigma_b: " + e6(p.sigma_b[0]) + " " + e6(p.sigma_b[1]) + " " + e6(p.sigma_b[2]) + " " +
                e6(p.sigma_b_avg) + "\n";
        text += "white_slope: " + text::fixed(run.white_slope, 4) + "\n";
        j["sigma_w"] = p.sigma_w;
        j["sigma_w_avg"] = p.sigma_w_avg;
        j["sigma_b"] = p.sigma_b;
        j["sigma_b_avg"] = p.sigma_b_avg;
        j["white_slope"] = run.white_slope;
    }
    j["warnings"] = run.warnings;
    for (const auto& w : run.warnings)
        text += "warning: " + w + "\n";
    return finish(ctx, "allan", text, j);
}

// ---------------------------------------------------------------------------

Report cmd_map(const Context& ctx, const MapOptions& opt)
{
    require_file(opt.input, "event log");
    std::ifstream in(opt.input);
    if (!in)
        fail(Errc::IoError, "cannot read '" + opt.input.string() + "'");
    ensure_dir(ctx.out_dir);

    map::GlobalMap gmap;
    map::ReplayHooks hooks;
    std::size_t before_points = 0;
    if (!opt.before_update.empty())
        hooks.before_first_update = [&](const map::GlobalMap& m) {
            before_points = m.export_fused_cloud(ctx.out_dir / opt.before_update);
        };
    auto stats = map::replay_log(in, gmap, hooks);
    if (!opt.before_update.empty() && stats.updates == 0)
        before_points = gmap.export_fused_cloud(ctx.out_dir / opt.before_update);
    auto points = gmap.export_fused_cloud(ctx.out_dir / opt.output);
    std::size_t zero_weight = 0;
    for (const auto& p : gmap.fuse_all())
        zero_weight += p.zero_weight ? 1 : 0;
    if (zero_weight)
        log_warn(ctx, std::to_string(zero_weight) + " landmark(s) have only zero-quality observations");

    std::string text = "map\n";
    text += "input: " + opt.input.string() + "\n";
    text += "events: " + std::to_string(stats.keyframes + stats.observations + stats.updates) + "\n";
    text += "keyframes: " + std::to_string(gmap.keyframe_count()) + "\n";
    text += "observations: " + std::to_string(gmap.observation_count()) + "\n";
    text += "pose_updates: " + std::to_string(stats.updates) + "\n";
    text += "landmarks: " + std::to_string(points) + "\n";
    text += "zero_weight_landmarks: " + std::to_string(zero_weight) + "\n";
    text += "output: " + opt.output + "\n";
    json j = {{"command", "map"},
              {"input", opt.input.string()},
              {"keyframes", gmap.keyframe_count()},
              {"observations", gmap.observation_count()},
              {"pose_updates", stats.updates},
              {"landmarks", points},
              {"zero_weight_landmarks", zero_weight},
              {"output", opt.output}};
    if (!opt.before_update.empty()) {
        text += "before_update: " + opt.before_update + " (" + std::to_string(before_points) + " points)\n";
        j["before_update"] = opt.before_update;
        j["before_update_points"] = before_points;
    }
    return finish(ctx, "map", text, j);
}

// ---------------------------------------------------------------------------

Report cmd_eval_ate(const Context& ctx, const AteOptions& opt)
{
    require_file(opt.estimate, "estimate");
    require_file(opt.reference, "reference");
    traj::AlignMode mode;
    if (opt.mode == "sim3")
        mode = traj::AlignMode::Sim3;
    else if (opt.mode == "se3")
        mode = traj::AlignMode::SE3;
    else
        fail(Errc::InvalidArgument, "mode must be 'sim3' or 'se3', got '" + opt.mode + "'");
    auto est = traj::read_tum(opt.estimate);
    auto ref = traj::read_tum(opt.reference);
    auto r = traj::evaluate_ate(ref, est, mode, opt.max_dt, opt.scale);
    log_info(ctx, "aligned " + std::to_string(r.n_pairs) + " pose pairs");

    std::string text = "eval-ate\n";
    text += "estimate: " + opt.estimate.string() + "\n";
    text += "reference: " + opt.reference.string() + "\n";
    text += "mode: " + opt.mode + "\n";
    text += "pairs: " + std::to_string(r.n_pairs) + "\n";
    text += "ate_rmse_m: " + text::fixed(r.rmse, 6) + "\n";
    text += "scale: " + text::fixed(r.transform.s, 6) + "\n";
    text += "transform (est -> ref, row-major):\n" + matrix_text(r.transform.matrix());
    json j = {{"command", "eval-ate"},
              {"estimate", opt.estimate.string()},
              {"reference", opt.reference.string()},
              {"mode", opt.mode},
              {"max_dt", opt.max_dt},
              {"pairs", r.n_pairs},
              {"ate_rmse_m", r.rmse},
              {"scale", r.transform.s},
              {"transform", matrix_json(r.transform.matrix())}};
    return finish(ctx, "eval_ate", text, j);
}

// ---------------------------------------------------------------------------

Report cmd_eval_tags(const Context& ctx, const TagOptions& opt)
{
    require_file(opt.trajectory, "trajectory");
    require_file(opt.detections, "detections");
    auto tr = traj::read_tum(opt.trajectory);
    auto dets = traj::read_detections_csv(opt.detections);
    auto proj = traj::tag_world_positions(tr, dets, opt.max_dt);
    if (!proj.unmatched.empty())
        log_warn(ctx, std::to_string(proj.unmatched.size()) + " detection(s) have no pose within " +
                          g6(opt.max_dt) + " s and were skipped");
    auto stats = traj::tag_statistics(proj.positions);

    ensure_dir(ctx.out_dir);
    std::string csv = "tag_id,n,min,q1,median,q3,max\n";
    std::string text = "eval-tags\n";
    text += "trajectory: " + opt.trajectory.string() + "\n";
    text += "detections: " + opt.detections.string() + " (" + std::to_string(dets.size()) + ", " +
            std::to_string(proj.unmatched.size()) + " unmatched)\n";
    text += "tag      n    mean_x    mean_y    mean_z     std_x     std_y     std_z  avg_dist_err\n";
    json tags = json::array();
    for (const auto& [id, s] : stats.per_tag) {
        char buf[256];
        std::snprintf(buf, sizeof buf, "%-5d %4zu %9.4f %9.4f %9.4f %9.4f %9.4f %9.4f %13.4f\n", id, s.n_detections,
                      s.mean.x(), s.mean.y(), s.mean.z(), s.std.x(), s.std.y(), s.std.z(), s.avg_dist_error);
        text += buf;
        const auto& q = s.dist_quantiles;
        csv += std::to_string(id) + "," + std::to_string(s.n_detections) + "," + text::shortest(q.min) + "," +
               text::shortest(q.q1) + "," + text::shortest(q.median) + "," + text::shortest(q.q3) + "," +
               text::shortest(q.max) + "\n";
        tags.push_back({{"tag_id", id},
                        {"n", s.n_detections},
                        {"mean", vec_json(s.mean)},
                        {"std", vec_json(s.std)},
                        {"avg_dist_error", s.avg_dist_error},
                        {"quantiles", {q.min, q.q1, q.median, q.q3, q.max}}});
    }
    {
        char buf[256];
        std::snprintf(buf, sizeof buf, "%-5s %4zu %9s %9s %9s %9.4f %9.4f %9.4f %13.4f\n", "all", stats.n_detections,
                      "", "", "", stats.std.x(), stats.std.y(), stats.std.z(), stats.avg_dist_error);
        text += buf;
    }
    text += "quantiles: tag_quantiles.csv\n";
    write_file(ctx.out_dir / "tag_quantiles.csv", csv);
    json j = {{"command", "eval-tags"},
              {"trajectory", opt.trajectory.string()},
              {"detections", opt.detections.string()},
              {"n_detections", stats.n_detections},
              {"unmatched", proj.unmatched.size()},
              {"tags", tags},
              {"overall", {{"std", vec_json(stats.std)}, {"avg_dist_error", stats.avg_dist_error}}},
              {"quantiles_csv", "tag_quantiles.csv"}};
    return finish(ctx, "eval_tags", text, j);
}

// ---------------------------------------------------------------------------

Report cmd_register(const Context& ctx, const RegisterOptions& opt)
{
    require_file(opt.source, "source cloud");
    require_file(opt.target, "target cloud");
    auto source = cloud::load_ply(opt.source);
    auto target = cloud::load_ply(opt.target);
    log_info(ctx, "source " + std::to_string(source.size()) + " points, target " + std::to_string(target.size()));

    cloud::PipelineOptions po;
    po.voxel = opt.voxel;
    po.normal_k = opt.normal_k;
    po.fpfh_radius_factor = opt.fpfh_radius_factor;
    po.mutual = opt.mutual;
    po.ransac_max_iterations = opt.ransac_max_iterations;
    po.ransac_confidence = opt.ransac_confidence;
    po.min_inlier_ratio = opt.min_inlier_ratio;
    po.icp_max_iterations = opt.icp_max_iterations;
    po.seed = ctx.seed;
    auto r = cloud::register_clouds(source, target, po);
    log_info(ctx, std::to_string(r.putative_correspondences) + " putative correspondences, " +
                      std::to_string(r.global.n_inliers) + " consensus inliers");

    ensure_dir(ctx.out_dir);
    cloud::save_ply(ctx.out_dir / opt.aligned, cloud::transformed(source, r.result.transform));

    const Mat4 m = r.result.transform.matrix();
    std::string text = "register\n";
    text += "source: " + opt.source.string() + " (" + std::to_string(r.source_points) + " after downsampling)\n";
    text += "target: " + opt.target.string() + " (" + std::to_string(r.target_points) + " after downsampling)\n";
    text += "voxel_m: " + g6(opt.voxel) + "\n";
    text += "transform (source -> target, row-major):\n" + matrix_text(m);
    text += "fitness: " + text::fixed(r.result.fitness, 6) + "\n";
    text += "inlier_rmse: " + text::fixed(r.result.inlier_rmse, 6) + "\n";
    text += "n_correspondences: " + std::to_string(r.result.n_correspondences) + "\n";
    text += "putative_matches: " + std::to_string(r.putative_correspondences) + "\n";
    text += "consensus_inliers: " + std::to_string(r.global.n_inliers) + "\n";
    text += "icp_iterations: " + std::to_string(r.icp.iterations) + "\n";
    text += "aligned: " + opt.aligned + "\n";
    json j = {{"command", "register"},
              {"source", opt.source.string()},
              {"target", opt.target.string()},
              {"voxel", opt.voxel},
              {"seed", ctx.seed},
              {"transform", matrix_json(m)},
              {"fitness", r.result.fitness},
              {"inlier_rmse", r.result.inlier_rmse},
              {"n_correspondences", r.result.n_correspondences},
              {"putative_matches", r.putative_correspondences},
              {"consensus_inliers", r.global.n_inliers},
              {"ransac_iterations", r.global.iterations},
              {"icp_iterations", r.icp.iterations},
              {"source_points", r.source_points},
              {"target_points", r.target_points},
              {"aligned", opt.aligned}};
    return finish(ctx, "register", text, j);
}

// ---------------------------------------------------------------------------

Report cmd_fixtures(const Context& ctx, const FixturesOptions& opt)
{
    ensure_dir(ctx.out_dir);
    const fs::path& dir = ctx.out_dir;
    const std::uint64_t seed = ctx.seed;
    json files = json::array();
    auto add = [&](const std::string& name, const std::string& what) {
        files.push_back({{"file", name}, {"content", what}});
        log_info(ctx, "wrote " + (dir / name).string());
    };

    synth::TelemetrySpec tspec;
    tspec.seed = seed + 1;
    auto mp4_bytes = synth::telemetry_mp4(tspec);
    write_file(dir / "gopro_fixture.mp4",
               std::string(reinterpret_cast<const char*>(mp4_bytes.data()), mp4_bytes.size()));
    add("gopro_fixture.mp4", "10 telemetry payloads of 1.01 s: ACCL/GYRO 202 samples, SHUT 30 samples");

    sync::SyncedDataset noise;
    noise.imu = synth::noise_imu_log(opt.sigma_w, opt.sigma_b, opt.imu_rate, opt.imu_duration, seed + 2);
    sync::export_imu_csv(noise, dir / "imu_noise.csv");
    add("imu_noise.csv", "white + random-walk IMU noise, sigma_w " + g6(opt.sigma_w) + ", sigma_b " +
                             g6(opt.sigma_b) + ", " + g6(opt.imu_duration) + " s at " + g6(opt.imu_rate) + " Hz");

    synth::DriftLoopSpec dspec;
    dspec.seed = seed + 3;
    dspec.observation_noise = 0.01;
    auto drift = synth::drift_loop(dspec);
    {
        std::string log;
        for (const auto& e : drift.events)
            log += e + "\n";
        write_file(dir / "drift_loop.log", log);
    }
    add("drift_loop.log", "loop with 0.5 m linear z-drift followed by corrected keyframe poses");

    synth::CavernSpec cspec;
    cspec.seed = seed + 4;
    auto cavern = synth::cavern_loop(cspec);
    traj::write_tum(dir / "cavern_ref.tum", cavern.trajectory);
    Sim3 distortion{0.8, Eigen::AngleAxisd(0.3, Vec3(0.2, 0.1, 1.0).normalized()).toRotationMatrix(),
                    Vec3(1.0, -2.0, 0.5)};
    traj::write_tum(dir / "cavern_est.tum", synth::distorted_copy(cavern.trajectory, distortion, 0.05, seed + 5));
    traj::write_detections_csv(dir / "tag_detections.csv", cavern.detections);
    add("cavern_ref.tum", "reference loop trajectory");
    add("cavern_est.tum", "scaled, rotated and noisy copy of the reference (sigma 0.05 m)");
    add("tag_detections.csv", std::to_string(cavern.detections.size()) + " marker detections of " +
                                  std::to_string(cavern.tags.size()) + " tags, noise 0.05 m");

    synth::TerrainSpec rspec;
    rspec.seed = seed + 6;
    auto scans = synth::terrain_scans(rspec);
    cloud::save_ply(dir / "scan_a.ply", scans.source);
    cloud::save_ply(dir / "scan_b.ply", scans.target);
    add("scan_a.ply", "terrain scan, world frame");
    add("scan_b.ply", "overlapping terrain scan under a 30 deg / 2 m transform");

    std::string text = "fixtures\n";
    text += "out_dir: " + dir.string() + "\n";
    text += "seed: " + std::to_string(seed) + "\n";
    for (const auto& f : files)
        text += "  " + f["file"].get<std::string>() + ": " + f["content"].get<std::string>() + "\n";
    text += "scan_b = T * scan_a with T (row-major):\n" + matrix_text(scans.truth.matrix());
    text += "scan overlap: " + text::fixed(scans.overlap, 4) + "\n";
    json j = {{"command", "fixtures"},
              {"seed", seed},
              {"files", files},
              {"imu_noise", {{"sigma_w", opt.sigma_w}, {"sigma_b", opt.sigma_b}, {"rate_hz", opt.imu_rate},
                             {"duration_s", opt.imu_duration}}},
              {"scan_truth", matrix_json(scans.truth.matrix())},
              {"scan_overlap", scans.overlap},
              {"ate_distortion_scale", distortion.s}};
    return finish(ctx, "fixtures", text, j);
}

} // namespace govi::cli
