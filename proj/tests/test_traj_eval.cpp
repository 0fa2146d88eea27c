#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "govi/synthetic.hpp"
#include "govi/traj_eval.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace govi;
using namespace govi::traj;
using testutil::code_of;

namespace {

Trajectory at_times(const std::vector<double>& ts)
{
    Trajectory out;
    for (double t : ts) {
        TrajectoryPose p;
        p.t = t;
        p.p = Vec3(t, 0, 0);
        out.push_back(p);
    }
    return out;
}

template <typename Rng> Sim3 random_sim3(Rng& rng)
{
    std::uniform_real_distribution<double> s(0.2, 5.0);
    return {s(rng), oracle::random_rotation(rng).toRotationMatrix(), oracle::random_vec(rng, -20, 20)};
}

template <typename Rng> std::vector<Vec3> random_points(Rng& rng, std::size_t n, double extent = 10.0)
{
    std::vector<Vec3> out;
    for (std::size_t i = 0; i < n; ++i)
        out.push_back(oracle::random_vec(rng, -extent, extent));
    return out;
}

/// Expected |x - mean| for n isotropic gaussian samples with per-axis sigma.
double expected_distance_error(double sigma, std::size_t n)
{
    return sigma * std::sqrt(1.0 - 1.0 / double(n)) * 2.0 * std::sqrt(2.0 / M_PI);
}

} // namespace

TEST_CASE("association")
{
    auto a = at_times({0.0, 0.1, 0.2, 0.3});
    auto pairs = associate(a, a, 0.02);
    REQUIRE(pairs.size() == 4);
    for (std::size_t i = 0; i < 4; ++i)
        CHECK(pairs[i] == std::pair<std::size_t, std::size_t>{i, i});

    auto shifted = at_times({0.01, 0.11, 0.21, 0.31});
    CHECK(associate(a, shifted, 0.02).size() == 4);

    auto late = at_times({5.0, 5.1});
    CHECK(code_of([&] { associate(a, late, 0.02); }) == Errc::NoMatches);
    Trajectory empty;
    CHECK(code_of([&] { associate(a, empty, 0.02); }) == Errc::NoMatches);
    CHECK(code_of([&] { associate(a, a, 0.0); }) == Errc::InvalidArgument);
}

TEST_CASE("association is greedy by time difference and one-to-one")
{
    auto a = at_times({0.0, 0.010});
    auto b = at_times({0.009});
    auto pairs = associate(a, b, 0.02);
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0] == std::pair<std::size_t, std::size_t>{1, 0});

    std::mt19937 rng(6);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    std::vector<double> ta, tb;
    for (int i = 0; i < 300; ++i) {
        ta.push_back(u(rng));
        tb.push_back(u(rng));
    }
    std::sort(ta.begin(), ta.end());
    std::sort(tb.begin(), tb.end());
    ta.erase(std::unique(ta.begin(), ta.end()), ta.end());
    tb.erase(std::unique(tb.begin(), tb.end()), tb.end());
    auto ra = at_times(ta), rb = at_times(tb);
    auto got = associate(ra, rb, 0.02);
    std::vector<int> used_b(tb.size(), 0);
    for (std::size_t k = 0; k < got.size(); ++k) {
        CHECK(std::abs(ta[got[k].first] - tb[got[k].second]) <= 0.02);
        CHECK(++used_b[got[k].second] == 1);
        if (k)
            CHECK(got[k].first > got[k - 1].first);
    }
}

TEST_CASE("alignment of identical point sets is the identity")
{
    std::mt19937_64 rng(1);
    std::vector<PositionPair> pairs;
    for (const auto& p : random_points(rng, 20))
        pairs.push_back({p, p});
    auto s = umeyama_sim3(pairs);
    CHECK(s.s == doctest::Approx(1.0).epsilon(1e-12));
    CHECK((s.R - Mat3::Identity()).norm() < 1e-12);
    CHECK(s.t.norm() < 1e-12);
    CHECK(ate_rmse(pairs, s) < 1e-12);
}

TEST_CASE("recovers scale 2, 30 degree yaw and translation")
{
    std::mt19937_64 rng(2);
    Mat3 rz = Eigen::AngleAxisd(M_PI / 6, Vec3::UnitZ()).toRotationMatrix();
    Vec3 t(1, 2, 3);
    std::vector<PositionPair> pairs;
    for (const auto& p : random_points(rng, 50))
        pairs.push_back({2.0 * rz * p + t, p});
    auto s = umeyama_sim3(pairs);
    CHECK(std::abs(s.s - 2.0) < 1e-9);
    CHECK((s.R - rz).norm() < 1e-9);
    CHECK((s.t - t).norm() < 1e-9);
    CHECK(ate_rmse(pairs, s) < 1e-9);
    CHECK(s.R.determinant() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("degenerate point sets are rejected")
{
    std::vector<PositionPair> collinear{{Vec3(0, 0, 0), Vec3(0, 0, 0)},
                                        {Vec3(1, 0, 0), Vec3(1, 1, 1)},
                                        {Vec3(2, 0, 0), Vec3(2, 2, 2)}};
    CHECK(code_of([&] { umeyama_sim3(collinear); }) == Errc::DegenerateConfiguration);
    std::vector<PositionPair> same(5, PositionPair{Vec3(1, 1, 1), Vec3(2, 2, 2)});
    CHECK(code_of([&] { umeyama_sim3(same); }) == Errc::DegenerateConfiguration);
}

TEST_CASE("reflections are corrected to proper rotations")
{
    std::mt19937_64 rng(13);
    std::vector<PositionPair> pairs;
    for (const auto& p : random_points(rng, 30))
        pairs.push_back({Vec3(p.x(), p.y(), -p.z()), p});
    auto s = umeyama_sim3(pairs);
    CHECK(s.R.determinant() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK((s.R * s.R.transpose() - Mat3::Identity()).norm() < 1e-9);
}

TEST_CASE("ATE arithmetic")
{
    std::vector<PositionPair> one{{Vec3(3, 4, 0), Vec3(0, 0, 0)}};
    CHECK(ate_rmse(one, Sim3{}) == doctest::Approx(5.0));
    std::vector<PositionPair> none;
    CHECK(code_of([&] { ate_rmse(none, Sim3{}); }) == Errc::EmptyPairs);
}

TEST_CASE("generate-and-recover over random similarity transforms")
{
    std::mt19937_64 rng(500);
    for (int trial = 0; trial < 100; ++trial) {
        Sim3 g = random_sim3(rng);
        std::vector<PositionPair> pairs;
        for (const auto& p : random_points(rng, 3 + rng() % 60))
            pairs.push_back({g * p, p});
        auto s = umeyama_sim3(pairs);
        CHECK(std::abs(s.s - g.s) < 1e-9);
        CHECK((s.R - g.R).norm() < 1e-9);
        CHECK((s.t - g.t).norm() < 1e-9);
        CHECK(ate_rmse(pairs, s) < 1e-9);
    }
}

TEST_CASE("isotropic noise gives ATE near sigma sqrt(3)")
{
    std::mt19937_64 rng(7);
    std::normal_distribution<double> noise(0.0, 0.1);
    double sum = 0.0;
    const int trials = 50;
    for (int trial = 0; trial < trials; ++trial) {
        Sim3 g = random_sim3(rng);
        std::vector<PositionPair> pairs;
        for (const auto& p : random_points(rng, 100)) {
            Vec3 noisy = p + Vec3(noise(rng), noise(rng), noise(rng));
            pairs.push_back({p, g.inverse() * noisy});
        }
        double e = ate_rmse(pairs, umeyama_sim3(pairs));
        CHECK(std::abs(e / (0.1 * std::sqrt(3.0)) - 1.0) < 0.10);
        sum += e;
    }
    CHECK(sum / trials == doctest::Approx(0.1 * std::sqrt(3.0)).epsilon(0.05));
}

TEST_CASE("the closed form beats perturbations of itself")
{
    std::mt19937_64 rng(23);
    std::normal_distribution<double> noise(0.0, 0.3), small(0.0, 1e-3);
    for (int trial = 0; trial < 20; ++trial) {
        Sim3 g = random_sim3(rng);
        std::vector<PositionPair> pairs;
        for (const auto& p : random_points(rng, 40))
            pairs.push_back({g * p + Vec3(noise(rng), noise(rng), noise(rng)), p});
        for (AlignMode mode : {AlignMode::Sim3, AlignMode::SE3}) {
            auto best = umeyama_sim3(pairs, mode);
            double e0 = ate_rmse(pairs, best);
            for (int k = 0; k < 30; ++k) {
                Sim3 other = best;
                if (mode == AlignMode::Sim3)
                    other.s *= 1.0 + small(rng);
                other.R = Eigen::AngleAxisd(std::abs(small(rng)), oracle::random_vec(rng, -1, 1).normalized())
                              .toRotationMatrix() *
                          other.R;
                other.t += Vec3(small(rng), small(rng), small(rng));
                CHECK(ate_rmse(pairs, other) >= e0);
            }
        }
    }
}

TEST_CASE("alignment is equivariant under similarity pre-transforms")
{
    std::mt19937_64 rng(41);
    std::normal_distribution<double> noise(0.0, 0.2);
    for (int trial = 0; trial < 20; ++trial) {
        Sim3 truth = random_sim3(rng);
        Sim3 g = random_sim3(rng);
        std::vector<PositionPair> pairs, moved;
        for (const auto& p : random_points(rng, 50)) {
            Vec3 ref = truth * p + Vec3(noise(rng), noise(rng), noise(rng));
            pairs.push_back({ref, p});
            moved.push_back({ref, g * p});
        }
        auto a = umeyama_sim3(pairs);
        auto b = umeyama_sim3(moved);
        Sim3 expected = a * g.inverse();
        CHECK(std::abs(b.s - expected.s) < 1e-9 * expected.s);
        CHECK((b.R - expected.R).norm() < 1e-9);
        CHECK((b.t - expected.t).norm() < 1e-8);
        CHECK(std::abs(ate_rmse(pairs, a) - ate_rmse(moved, b)) < 1e-9);
    }
}

TEST_CASE("evaluate_ate end to end with both modes")
{
    synth::CavernSpec spec;
    spec.poses = 300;
    auto scene = synth::cavern_loop(spec);
    Sim3 g{0.8, Eigen::AngleAxisd(0.4, Vec3::UnitZ()).toRotationMatrix(), Vec3(3, -1, 2)};
    auto est = synth::distorted_copy(scene.trajectory, g, 0.0, 1);
    auto sim = evaluate_ate(scene.trajectory, est, AlignMode::Sim3);
    CHECK(sim.rmse < 1e-9);
    CHECK(sim.n_pairs == 300);
    CHECK(sim.transform.s == doctest::Approx(0.8).epsilon(1e-9));

    auto se3 = evaluate_ate(scene.trajectory, est, AlignMode::SE3);
    CHECK(se3.rmse > 1.0);
    auto scaled = evaluate_ate(scene.trajectory, est, AlignMode::SE3, 0.02, 0.8);
    CHECK(scaled.rmse < 1e-9);
    CHECK(code_of([&] { evaluate_ate(scene.trajectory, est, AlignMode::Sim3, 0.02, 0.0); }) ==
          Errc::InvalidArgument);
}

TEST_CASE("TUM round trip and parse errors")
{
    synth::CavernSpec spec;
    spec.poses = 50;
    auto traj = synth::cavern_loop(spec).trajectory;
    auto path = std::filesystem::temp_directory_path() / "govi_test_traj.tum";
    write_tum(path, traj);
    auto back = read_tum(path);
    REQUIRE(back.size() == traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i) {
        CHECK(back[i].t == traj[i].t);
        CHECK(back[i].p == traj[i].p);
        CHECK((back[i].q.coeffs() - traj[i].q.coeffs()).norm() < 1e-15); // renormalized on load
    }

    std::istringstream ok("# c\n1 0 0 0 0 0 0 2\n\n2 1 1 1 0 0 1 0\n");
    auto t = read_tum(ok);
    REQUIRE(t.size() == 2);
    CHECK(t[0].q.w() == doctest::Approx(1.0));
    std::istringstream short_line("1 0 0 0 0 0 1\n");
    CHECK(code_of([&] { read_tum(short_line); }) == Errc::MalformedTrajectory);
    std::istringstream backwards("2 0 0 0 0 0 0 1\n1 0 0 0 0 0 0 1\n");
    CHECK(code_of([&] { read_tum(backwards); }) == Errc::MalformedTrajectory);
    std::istringstream zero_q("1 0 0 0 0 0 0 0\n");
    CHECK(code_of([&] { read_tum(zero_q); }) == Errc::MalformedTrajectory);
    CHECK(code_of([] { read_tum(std::filesystem::path("/nonexistent_govi.tum")); }) == Errc::IoError);
}

TEST_CASE("tag world positions")
{
    Trajectory traj;
    traj.push_back({0.0, Vec3::Zero(), Quat::Identity()});
    // camera turned half a revolution about its own y axis, placed at (1,0,0)
    traj.push_back({1.0, Vec3(1, 0, 0), Quat(Eigen::AngleAxisd(M_PI, Vec3::UnitY()))});
    std::vector<TagDetection> det{{0, 0.0, Vec3(0, 0, 2)}, {1, 1.0, Vec3(0, 0, 2)}, {2, 9.0, Vec3(0, 0, 2)}};
    auto proj = tag_world_positions(traj, det, 0.02);
    CHECK((proj.positions.at(0)[0] - Vec3(0, 0, 2)).norm() < 1e-15);
    CHECK((proj.positions.at(1)[0] - Vec3(1, 0, -2)).norm() < 1e-12);
    CHECK(proj.unmatched == std::vector<std::size_t>{2});
}

TEST_CASE("pose interpolation between samples")
{
    Trajectory traj;
    traj.push_back({0.0, Vec3::Zero(), Quat::Identity()});
    traj.push_back({0.02, Vec3(2, 0, 0), Quat(Eigen::AngleAxisd(0.2, Vec3::UnitZ()))});
    auto mid = pose_at(traj, 0.01, 0.02);
    REQUIRE(mid);
    CHECK((mid->t - Vec3(1, 0, 0)).norm() < 1e-12);
    CHECK(Eigen::AngleAxisd(mid->q).angle() == doctest::Approx(0.1));
    CHECK_FALSE(pose_at(traj, 0.05, 0.02));
    CHECK_FALSE(pose_at(Trajectory{}, 0.0, 0.02));
}

TEST_CASE("a drift-free loop sees each tag at one place")
{
    synth::CavernSpec spec;
    spec.noise = 0.0;
    auto scene = synth::cavern_loop(spec);
    auto proj = tag_world_positions(scene.trajectory, scene.detections);
    CHECK(proj.unmatched.empty());
    REQUIRE(proj.positions.size() == 5);
    for (const auto& [id, pts] : proj.positions) {
        CHECK(pts.size() >= 5);
        for (const auto& p : pts)
            CHECK((p - scene.tags.at(id)).norm() < 1e-9);
    }
    auto stats = tag_statistics(proj.positions);
    CHECK(stats.avg_dist_error < 1e-9);
}

TEST_CASE("tag statistics arithmetic")
{
    std::map<int, std::vector<Vec3>> same{{1, {Vec3(1, 2, 3), Vec3(1, 2, 3), Vec3(1, 2, 3)}}};
    auto s0 = tag_statistics(same);
    CHECK(s0.avg_dist_error == 0.0);
    CHECK(s0.std == Vec3::Zero());
    CHECK(s0.n_detections == 3);

    // values whose plain sum / n does not round back to the value itself
    std::map<int, std::vector<Vec3>> inexact{{2, std::vector<Vec3>(3, Vec3(0.1, 0.7, -1.3))}};
    auto s1 = tag_statistics(inexact);
    CHECK(s1.per_tag.at(2).mean == Vec3(0.1, 0.7, -1.3));
    CHECK(s1.avg_dist_error == 0.0);
    CHECK(s1.std == Vec3::Zero());

    std::map<int, std::vector<Vec3>> two{{4, {Vec3(0, 0, 0), Vec3(0.2, 0, 0)}}};
    auto s = tag_statistics(two);
    const auto& t = s.per_tag.at(4);
    CHECK(t.dist_errors[0] == doctest::Approx(0.1));
    CHECK(t.dist_errors[1] == doctest::Approx(0.1));
    CHECK(t.avg_dist_error == doctest::Approx(0.1));
    CHECK(t.std.x() == doctest::Approx(0.2 / std::sqrt(2.0)));
    CHECK(t.std.y() == 0.0);
    CHECK(s.avg_dist_error == doctest::Approx(0.1));

    std::map<int, std::vector<Vec3>> lonely{{1, {Vec3::Zero(), Vec3::Zero()}}, {2, {Vec3::Zero()}}};
    CHECK(code_of([&] { tag_statistics(lonely); }) == Errc::InsufficientDetections);
}

TEST_CASE("quantiles interpolate linearly")
{
    auto q = quantiles({4, 1, 3, 2, 5});
    CHECK(q.min == 1);
    CHECK(q.q1 == 2);
    CHECK(q.median == 3);
    CHECK(q.q3 == 4);
    CHECK(q.max == 5);
    auto r = quantiles({1, 2});
    CHECK(r.q1 == doctest::Approx(1.25));
    CHECK(r.median == doctest::Approx(1.5));
}

TEST_CASE("tag statistics ignore a global rigid motion")
{
    synth::CavernSpec spec;
    auto scene = synth::cavern_loop(spec);
    auto base = tag_statistics(tag_world_positions(scene.trajectory, scene.detections).positions);

    std::mt19937_64 rng(3);
    Rigid3 g = Rigid3::from(oracle::random_rotation(rng), oracle::random_vec(rng, -50, 50));
    Trajectory moved = scene.trajectory;
    for (auto& p : moved) {
        p.p = g * p.p;
        p.q = (g.q * p.q).normalized();
    }
    auto stats = tag_statistics(tag_world_positions(moved, scene.detections).positions);
    CHECK(stats.avg_dist_error == doctest::Approx(base.avg_dist_error).epsilon(1e-9));
    for (const auto& [id, t] : base.per_tag) {
        CHECK(stats.per_tag.at(id).avg_dist_error == doctest::Approx(t.avg_dist_error).epsilon(1e-9));
        CHECK(stats.per_tag.at(id).dist_quantiles.median ==
              doctest::Approx(t.dist_quantiles.median).epsilon(1e-9));
    }
}

TEST_CASE("noisy detections match the expected distance error")
{
    synth::CavernSpec spec;
    auto scene = synth::cavern_loop(spec);
    auto stats = tag_statistics(tag_world_positions(scene.trajectory, scene.detections).positions);
    double expected = 0.0;
    for (const auto& [id, t] : stats.per_tag)
        expected += double(t.n_detections) * expected_distance_error(spec.noise, t.n_detections);
    expected /= double(stats.n_detections);
    CHECK(std::abs(stats.avg_dist_error / expected - 1.0) < 0.15);
    for (int i = 0; i < 3; ++i)
        CHECK(stats.std[i] == doctest::Approx(spec.noise).epsilon(0.15));
}

TEST_CASE("detections CSV round trip")
{
    synth::CavernSpec spec;
    spec.poses = 300;
    auto det = synth::cavern_loop(spec).detections;
    auto path = std::filesystem::temp_directory_path() / "govi_test_tags.csv";
    write_detections_csv(path, det);
    auto back = read_detections_csv(path);
    REQUIRE(back.size() == det.size());
    for (std::size_t i = 0; i < det.size(); ++i) {
        CHECK(back[i].tag_id == det[i].tag_id);
        CHECK(back[i].t == det[i].t);
        CHECK(back[i].p_cm == det[i].p_cm);
    }
    {
        std::ofstream os(path);
        os << "t,tag_id,px,py,pz\n0.5,1,0,0\n";
    }
    CHECK(code_of([&] { read_detections_csv(path); }) == Errc::InvalidArgument);
}
