#include "govi/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "govi/allan.hpp"
#include "govi/error.hpp"
#include "govi/gpmf.hpp"

namespace govi::synth {

namespace {

using std::numbers::pi;

Quat yaw(double angle) { return Quat(Eigen::AngleAxisd(angle, Vec3::UnitZ())); }

Vec3 gaussian3(std::mt19937_64& rng, double sigma)
{
    std::normal_distribution<double> n(0.0, sigma);
    double x = n(rng), y = n(rng), z = n(rng);
    return {x, y, z};
}

Quat random_rotation(std::mt19937_64& rng)
{
    std::normal_distribution<double> n(0.0, 1.0);
    double w = n(rng), x = n(rng), y = n(rng), z = n(rng);
    return Quat(w, x, y, z).normalized();
}

} // namespace

std::vector<mp4::FixtureSample> telemetry_payloads(const TelemetrySpec& spec)
{
    if (spec.payloads == 0 || spec.payload_ticks == 0 || spec.timescale == 0)
        fail(Errc::InvalidArgument, "telemetry fixture needs payloads and a positive duration");
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    const double dt_payload = double(spec.payload_ticks) / double(spec.timescale);

    std::vector<mp4::FixtureSample> out;
    for (std::size_t p = 0; p < spec.payloads; ++p) {
        std::vector<double> accel, gyro;
        for (std::size_t k = 0; k < spec.imu_per_payload; ++k) {
            double t = (double(p) + double(k) / double(spec.imu_per_payload)) * dt_payload;
            // channels are in sensor order (camera z, x, y for "ZXY")
            double a[3] = {9.81 + 0.2 * std::sin(2.0 * t), 0.5 * std::sin(1.3 * t), 0.3 * std::cos(0.7 * t)};
            double g[3] = {0.05 * std::sin(0.9 * t), 0.2 * std::cos(1.1 * t), 0.1 * std::sin(0.4 * t)};
            for (int c = 0; c < 3; ++c) {
                accel.push_back(std::round((a[c] + 0.02 * noise(rng)) * spec.accel_scale));
                gyro.push_back(std::round((g[c] + 0.002 * noise(rng)) * spec.gyro_scale));
            }
        }
        std::vector<double> shutter;
        for (std::size_t k = 0; k < spec.frames_per_payload; ++k)
            shutter.push_back(double(float(0.004 + 0.001 * std::sin(double(p * spec.frames_per_payload + k) * 0.1))));

        const double ascale[] = {spec.accel_scale};
        const double gscale[] = {spec.gyro_scale};
        std::vector<gpmf::KlvNode> accl_strm{gpmf::make_text(FourCC("STNM"), "Accelerometer"),
                                             gpmf::make_text(gpmf::kSiun, "m/s2"),
                                             gpmf::make_numeric(gpmf::kScal, 's', ascale)};
        std::vector<gpmf::KlvNode> gyro_strm{gpmf::make_text(FourCC("STNM"), "Gyroscope"),
                                             gpmf::make_text(gpmf::kSiun, "rad/s"),
                                             gpmf::make_numeric(gpmf::kScal, 's', gscale)};
        if (!spec.orientation.empty()) {
            accl_strm.push_back(gpmf::make_text(gpmf::kOrin, spec.orientation));
            gyro_strm.push_back(gpmf::make_text(gpmf::kOrin, spec.orientation));
        }
        accl_strm.push_back(gpmf::make_numeric(gpmf::kAccl, 's', accel, 3));
        gyro_strm.push_back(gpmf::make_numeric(gpmf::kGyro, 's', gyro, 3));

        auto devc = gpmf::make_container(
            gpmf::kDevc, {gpmf::make_text(FourCC("DVNM"), "Camera"),
                          gpmf::make_container(gpmf::kStrm, std::move(accl_strm)),
                          gpmf::make_container(gpmf::kStrm, std::move(gyro_strm)),
                          gpmf::make_container(gpmf::kStrm, {gpmf::make_text(FourCC("STNM"), "Exposure time"),
                                                             gpmf::make_text(gpmf::kSiun, "s"),
                                                             gpmf::make_numeric(gpmf::kShut, 'f', shutter)})});
        out.push_back({gpmf::encode_payload(gpmf::make_root({std::move(devc)})), spec.payload_ticks});
    }
    return out;
}

std::vector<std::uint8_t> telemetry_mp4(const TelemetrySpec& spec, const mp4::FixtureOptions& options)
{
    mp4::FixtureOptions opts = options;
    opts.timescale = spec.timescale;
    return mp4::write_fixture_mp4(telemetry_payloads(spec), opts);
}

std::vector<sync::ImuSample> noise_imu_log(double sigma_w, double sigma_b, double rate, double duration,
                                           std::uint64_t seed)
{
    std::vector<std::vector<double>> axes;
    for (std::uint64_t k = 0; k < 6; ++k)
        axes.push_back(allan::simulate_imu_noise(sigma_w, sigma_b, rate, duration, seed * 6 + k));
    std::vector<sync::ImuSample> out(axes[0].size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i].t = double(i) / rate;
        for (std::size_t a = 0; a < 3; ++a) {
            out[i].accel[a] = axes[a][i];
            out[i].gyro[a] = axes[3 + a][i];
        }
    }
    return out;
}

DriftLoopScene drift_loop(const DriftLoopSpec& spec)
{
    if (spec.keyframes < 2 || spec.observations_per_landmark == 0 ||
        spec.observations_per_landmark > spec.keyframes)
        fail(Errc::InvalidArgument, "drift loop needs >= 2 keyframes and 1..keyframes observations per landmark");
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::size_t n = spec.keyframes;

    std::vector<Rigid3> truth_pose(n), drifted(n);
    for (std::size_t k = 0; k < n; ++k) {
        double th = 2.0 * pi * double(k) / double(n);
        truth_pose[k] = {yaw(th + pi / 2), Vec3(spec.loop_radius * std::cos(th), spec.loop_radius * std::sin(th), 0.0)};
        drifted[k] = truth_pose[k];
        drifted[k].t.z() += spec.z_drift * double(k) / double(n - 1);
    }

    DriftLoopScene scene;
    std::vector<std::vector<std::string>> obs_by_kf(n);
    for (map::LandmarkId lm = 0; lm < spec.landmarks; ++lm) {
        double phi = 2.0 * pi * unit(rng);
        Vec3 p(spec.wall_radius * std::cos(phi), spec.wall_radius * std::sin(phi), -2.0 + 4.0 * unit(rng));
        scene.truth[lm] = p;
        auto first = std::size_t(std::llround(phi / (2.0 * pi) * double(n))) + n -
                     spec.observations_per_landmark / 2;
        for (std::size_t j = 0; j < spec.observations_per_landmark; ++j) {
            std::size_t k = (first + j) % n;
            Vec3 local = truth_pose[k].inverse() * p + gaussian3(rng, spec.observation_noise);
            Vec3 color(std::floor(256.0 * unit(rng)), std::floor(256.0 * unit(rng)), std::floor(256.0 * unit(rng)));
            double q = 0.2 + 0.8 * unit(rng);
            std::array<std::uint32_t, 2> px{std::uint32_t(1920 * unit(rng)), std::uint32_t(1080 * unit(rng))};
            obs_by_kf[k].push_back(map::observation_event(lm, k, drifted[k] * local, q, color, px));
        }
    }
    for (std::size_t k = 0; k < n; ++k) {
        scene.events.push_back(map::keyframe_event(k, drifted[k]));
        for (auto& e : obs_by_kf[k])
            scene.events.push_back(std::move(e));
    }
    for (std::size_t k = 0; k < n; ++k)
        scene.events.push_back(map::update_event(k, truth_pose[k]));
    return scene;
}

std::vector<std::string> random_map_log(std::size_t keyframes, std::size_t landmarks,
                                        std::size_t observations_per_landmark, std::uint64_t seed)
{
    if (keyframes == 0)
        fail(Errc::InvalidArgument, "random map log needs keyframes");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> pick_kf(0, keyframes - 1);
    std::vector<std::string> out;
    out.reserve(keyframes + landmarks * observations_per_landmark);
    for (std::size_t k = 0; k < keyframes; ++k) {
        Vec3 t(100 * unit(rng) - 50, 100 * unit(rng) - 50, 10 * unit(rng) - 5);
        out.push_back(map::keyframe_event(k, {random_rotation(rng), t}));
    }
    for (std::size_t lm = 0; lm < landmarks; ++lm)
        for (std::size_t j = 0; j < observations_per_landmark; ++j) {
            Vec3 p(100 * unit(rng) - 50, 100 * unit(rng) - 50, 10 * unit(rng) - 5);
            Vec3 c(std::floor(256 * unit(rng)), std::floor(256 * unit(rng)), std::floor(256 * unit(rng)));
            out.push_back(map::observation_event(lm, pick_kf(rng), p, unit(rng), c,
                                                 {std::uint32_t(1920 * unit(rng)), std::uint32_t(1080 * unit(rng))}));
        }
    return out;
}

double z_spread(const std::vector<map::FusedPoint>& fused, const std::map<map::LandmarkId, Vec3>& truth)
{
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& f : fused) {
        auto it = truth.find(f.id);
        if (it == truth.end())
            continue;
        double dz = f.position.z() - it->second.z();
        sum += dz * dz;
        ++n;
    }
    return n ? std::sqrt(sum / double(n)) : 0.0;
}

CavernScene cavern_loop(const CavernSpec& spec)
{
    if (spec.poses < 3 || !(spec.rate > 0.0) || spec.detection_stride == 0)
        fail(Errc::InvalidArgument, "cavern loop needs >= 3 poses, a positive rate and stride");
    std::mt19937_64 rng(spec.seed);
    const double n = double(spec.poses);
    auto path = [&](double th) {
        return Vec3(spec.radius_x * std::cos(th), spec.radius_y * std::sin(th), 1.5 * std::sin(2.0 * th));
    };
    // camera z looks along the body x axis, camera y points down
    Mat3 body_from_cam;
    body_from_cam << 0, 0, 1, -1, 0, 0, 0, -1, 0;
    const Quat q_bc(body_from_cam);

    CavernScene scene;
    for (std::size_t k = 0; k < spec.poses; ++k) {
        double th = 2.0 * pi * double(k) / n;
        Vec3 p = path(th);
        Vec3 ahead = path(th + 1e-3) - p;
        traj::TrajectoryPose pose;
        pose.t = double(k) / spec.rate;
        pose.p = p;
        pose.q = (yaw(std::atan2(ahead.y(), ahead.x())) * q_bc).normalized();
        scene.trajectory.push_back(pose);
    }
    for (std::size_t i = 0; i < spec.tags; ++i) {
        double th = 2.0 * pi * (double(i) + 0.5) / double(spec.tags);
        Vec3 on_path = path(th);
        Vec3 outward(on_path.x() / spec.radius_x, on_path.y() / spec.radius_y, 0.0);
        scene.tags[int(i)] = on_path + 2.0 * outward.normalized();
    }
    for (std::size_t k = 0; k < spec.poses; k += spec.detection_stride) {
        const auto& pose = scene.trajectory[k];
        for (const auto& [id, tag] : scene.tags) {
            Vec3 rel = pose.q.conjugate() * (tag - pose.p);
            if (rel.norm() > spec.detection_range || rel.z() < 0.5)
                continue;
            scene.detections.push_back({id, pose.t, rel + gaussian3(rng, spec.noise)});
        }
    }
    return scene;
}

traj::Trajectory distorted_copy(const traj::Trajectory& ref, const Sim3& transform, double noise, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    Sim3 inv = transform.inverse();
    Quat r(inv.R);
    traj::Trajectory out = ref;
    for (auto& p : out) {
        p.p = inv * p.p + gaussian3(rng, noise);
        p.q = (r * p.q).normalized();
    }
    return out;
}

ScanPair terrain_scans(const TerrainSpec& spec)
{
    if (!(spec.spacing > 0.0) || !(spec.width > 0.0) || !(spec.depth > 0.0) || !(spec.overlap > 0.0) ||
        !(spec.overlap <= 1.0))
        fail(Errc::InvalidArgument, "terrain scene needs positive extents and overlap in (0, 1]");
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    const double x_shift = spec.width * (1.0 - spec.overlap);
    const double span_x = spec.width + x_shift;
    struct Bump {
        double x, y, a, s;
    };
    std::vector<Bump> bumps;
    auto count = std::size_t(std::ceil(span_x * spec.depth * 0.8));
    for (std::size_t i = 0; i < count; ++i) {
        double sign = unit(rng) < 0.3 ? -1.0 : 1.0;
        bumps.push_back({-1.0 + (span_x + 2.0) * unit(rng), -1.0 + (spec.depth + 2.0) * unit(rng),
                         sign * (0.15 + 0.6 * unit(rng)), 0.25 + 0.9 * unit(rng)});
    }
    // small rocks give the surface relief at the scale of the descriptors
    auto rocks = std::size_t(std::ceil(span_x * spec.depth * spec.rock_density));
    for (std::size_t i = 0; i < rocks; ++i)
        bumps.push_back({-1.0 + (span_x + 2.0) * unit(rng), -1.0 + (spec.depth + 2.0) * unit(rng),
                         0.1 + 0.25 * unit(rng), 0.1 + 0.2 * unit(rng)});
    auto height = [&](double x, double y) {
        double h = 0.05 * x - 0.03 * y;
        for (const auto& b : bumps) {
            double dx = x - b.x, dy = y - b.y;
            h += b.a * std::exp(-(dx * dx + dy * dy) / (2.0 * b.s * b.s));
        }
        return h;
    };
    auto scan = [&](double x0) {
        cloud::PointCloud c;
        auto nx = std::size_t(std::floor(spec.width / spec.spacing));
        auto ny = std::size_t(std::floor(spec.depth / spec.spacing));
        for (std::size_t i = 0; i < nx; ++i)
            for (std::size_t j = 0; j < ny; ++j) {
                double x = x0 + (double(i) + unit(rng)) * spec.spacing;
                double y = (double(j) + unit(rng)) * spec.spacing;
                c.points.push_back(Vec3(x, y, height(x, y)) + gaussian3(rng, spec.noise));
            }
        return c;
    };

    ScanPair pair;
    pair.source = scan(0.0);
    cloud::PointCloud world_target = scan(x_shift);
    pair.truth = Rigid3::from(Quat(Eigen::AngleAxisd(spec.rotation_deg * pi / 180.0, spec.rotation_axis.normalized())),
                              spec.translation * spec.translation_dir.normalized());
    pair.target = cloud::transformed(world_target, pair.truth);
    std::size_t shared = 0;
    for (const auto& p : pair.source.points)
        if (p.x() >= x_shift)
            ++shared;
    pair.overlap = double(shared) / double(pair.source.size());
    return pair;
}

} // namespace govi::synth
