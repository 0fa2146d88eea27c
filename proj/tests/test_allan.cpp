#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "govi/allan.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace govi;
using namespace govi::allan;
using testutil::code_of;

namespace {

/// Curve with one axis holding `dev(tau)` on the given grid.
AllanCurve closed_form(const std::vector<double>& taus, double rate, std::size_t n, double (*dev)(double, double),
                       double coeff)
{
    AllanCurve c;
    c.rate = rate;
    c.n_samples = n;
    c.taus = taus;
    c.adev.emplace_back();
    for (double t : taus) {
        c.cluster_sizes.push_back(std::size_t(std::llround(t * rate)));
        c.adev[0].push_back(dev(t, coeff));
    }
    return c;
}

double white_curve(double tau, double a) { return a / std::sqrt(tau); }
double walk_curve(double tau, double b) { return b * std::sqrt(tau); }

} // namespace

TEST_CASE("constant series has zero deviation")
{
    std::vector<double> x(5000, 3.25);
    auto taus = default_taus(x.size(), 100.0);
    auto c = allan_deviation(x, 100.0, taus);
    for (double d : c.adev[0])
        CHECK(d == 0.0);
}

TEST_CASE("alternating series at tau 1")
{
    std::vector<double> x{1, -1, 1, -1, 1, -1};
    std::vector<double> tau{1.0};
    auto c = allan_deviation(x, 1.0, tau);
    CHECK(c.adev[0][0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(oracle::avar(x, 1) == doctest::Approx(2.0));
}

TEST_CASE("matches the direct definition on random series")
{
    std::mt19937_64 rng(31);
    std::normal_distribution<double> n01;
    for (int trial = 0; trial < 10; ++trial) {
        std::size_t n = 30 + rng() % 400;
        std::vector<double> x(n);
        double drift = 0.0;
        for (auto& v : x) {
            drift += 0.1 * n01(rng);
            v = 5.0 + n01(rng) + drift;
        }
        const double rate = 50.0;
        std::vector<double> taus;
        for (std::size_t m = 1; 3 * m <= n; m += 1 + m / 3)
            taus.push_back(double(m) / rate);
        auto c = allan_deviation(x, rate, taus);
        REQUIRE(c.taus.size() == taus.size());
        for (std::size_t i = 0; i < taus.size(); ++i)
            CHECK(c.adev[0][i] == doctest::Approx(std::sqrt(oracle::avar(x, c.cluster_sizes[i]))).epsilon(1e-9));
    }
}

TEST_CASE("white noise deviation follows sigma / sqrt(rate tau)")
{
    // One hour per realization. Beyond a few seconds a single realization has
    // only a few hundred independent clusters, so its deviation scatters by
    // several percent; the long-tau check uses the mean over realizations.
    const double sigma = 0.01, rate = 200.0;
    const int realizations = 8;
    auto taus = default_taus(std::size_t(rate * 3600), rate);
    std::vector<double> mean_dev(taus.size(), 0.0);
    AllanCurve first;
    for (int r = 0; r < realizations; ++r) {
        std::mt19937_64 rng(2024 + std::uint64_t(r));
        std::normal_distribution<double> n01(0.0, sigma);
        std::vector<double> x(std::size_t(rate * 3600));
        for (auto& v : x)
            v = n01(rng);
        auto c = allan_deviation(x, rate, taus);
        REQUIRE(c.taus.size() == taus.size());
        for (std::size_t i = 0; i < taus.size(); ++i)
            mean_dev[i] += c.adev[0][i] / realizations;
        if (r == 0)
            first = c;
    }
    std::size_t checked = 0;
    for (std::size_t i = 0; i < taus.size(); ++i) {
        double tau = first.taus[i];
        if (tau < 0.01 || tau > 10.0)
            continue;
        double expected = sigma / std::sqrt(rate * tau);
        CHECK(std::abs(mean_dev[i] / expected - 1.0) < 0.05);
        if (tau <= 1.0)
            CHECK(std::abs(first.adev[0][i] / expected - 1.0) < 0.05);
        ++checked;
    }
    CHECK(checked > 60);
    CHECK(fit_loglog_slope(first, 0, 0.05, 5.0) == doctest::Approx(-0.5).epsilon(0.1));
}

TEST_CASE("slope of simulated white noise")
{
    auto x = simulate_imu_noise(1e-3, 0.0, 100.0, 1800.0, 9);
    auto c = allan_deviation(x, 100.0, default_taus(x.size(), 100.0));
    double slope = fit_loglog_slope(c, 0, 0.05, 5.0);
    CHECK(std::abs(slope + 0.5) <= 0.05);
}

TEST_CASE("closed-form curves are fitted exactly")
{
    const double rate = 200.0;
    const std::size_t n = 200 * 4 * 3600;
    auto taus = default_taus(n, rate);

    auto white = closed_form(taus, rate, n, white_curve, 0.002);
    FitWindows all_white{0.0, 1.0, 0.0, std::numeric_limits<double>::infinity()};
    auto p = fit_noise_params(white, all_white);
    CHECK(p.sigma_w[0] == doctest::Approx(0.002).epsilon(1e-12));

    const double b = 3.0e-4 / std::sqrt(3.0);
    auto walk = closed_form(taus, rate, n, walk_curve, b);
    auto q = fit_noise_params(walk, all_white);
    CHECK(q.sigma_b[0] == doctest::Approx(3.0e-4).epsilon(1e-12));
    CHECK(q.sigma_b_avg == doctest::Approx(3.0e-4).epsilon(1e-12));
}

TEST_CASE("two-segment closed form recovers both parameters")
{
    // white segment below 1 s, walk segment above 100 s, with the model's
    // relations adev = sigma_w / sqrt(tau) and sigma_b sqrt(tau / 3)
    const double sw = 1.7e-3, sb = 4.2e-5, rate = 200.0;
    const std::size_t n = 200 * 4 * 3600;
    AllanCurve c;
    c.rate = rate;
    c.n_samples = n;
    c.adev.resize(3);
    for (double tau : default_taus(n, rate)) {
        c.taus.push_back(tau);
        c.cluster_sizes.push_back(std::size_t(std::llround(tau * rate)));
        for (std::size_t a = 0; a < 3; ++a) {
            double scale = 1.0 + 0.1 * double(a);
            c.adev[a].push_back(tau <= 1.0 ? scale * sw / std::sqrt(tau)
                                           : tau >= 100.0 ? scale * sb * std::sqrt(tau / 3.0)
                                                          : std::sqrt(sw * sb));
        }
    }
    auto p = fit_noise_params(c);
    for (std::size_t a = 0; a < 3; ++a) {
        double scale = 1.0 + 0.1 * double(a);
        CHECK(p.sigma_w[a] == doctest::Approx(scale * sw).epsilon(1e-12));
        CHECK(p.sigma_b[a] == doctest::Approx(scale * sb).epsilon(1e-12));
    }
    CHECK(p.sigma_w_avg == doctest::Approx(1.1 * sw).epsilon(1e-12));
    CHECK(p.sigma_b_avg == doctest::Approx(1.1 * sb).epsilon(1e-12));
}

TEST_CASE("simulated mix over four hours recovers both parameters")
{
    const double sw = 2e-3, sb = 1e-4, rate = 200.0;
    auto x = simulate_imu_noise(sw, sb, rate, 4 * 3600.0, 2026);
    auto c = allan_deviation(x, rate, default_taus(x.size(), rate));
    auto p = fit_noise_params(c);
    CHECK(std::abs(p.sigma_w[0] / sw - 1.0) < 0.10);
    CHECK(std::abs(p.sigma_b[0] / sb - 1.0) < 0.10);
}

TEST_CASE("white-only simulation has variance sigma_w^2 rate")
{
    const double sw = 3e-3, rate = 200.0;
    auto x = simulate_imu_noise(sw, 0.0, rate, 5000.0, 1);
    REQUIRE(x.size() == 1000000);
    double mean = std::accumulate(x.begin(), x.end(), 0.0) / double(x.size());
    double var = 0.0;
    for (double v : x)
        var += (v - mean) * (v - mean);
    var /= double(x.size() - 1);
    CHECK(std::abs(var / (sw * sw * rate) - 1.0) < 0.02);
}

TEST_CASE("walk-only simulation variance grows linearly")
{
    const double sb = 0.5, rate = 10.0;
    const std::size_t runs = 2000, len = 400;
    std::vector<double> sq(len, 0.0);
    for (std::size_t r = 0; r < runs; ++r) {
        auto x = simulate_imu_noise(0.0, sb, rate, double(len) / rate, 1000 + r);
        REQUIRE(x.size() == len);
        for (std::size_t k = 0; k < len; ++k)
            sq[k] += x[k] * x[k];
    }
    for (std::size_t k : {99u, 199u, 399u}) {
        double expected = double(k + 1) * sb * sb / rate;
        CHECK(std::abs(sq[k] / double(runs) / expected - 1.0) < 0.1);
    }
}

TEST_CASE("simulation is deterministic in its seed")
{
    auto a = simulate_imu_noise(1e-3, 1e-5, 200.0, 10.0, 42);
    auto b = simulate_imu_noise(1e-3, 1e-5, 200.0, 10.0, 42);
    auto c = simulate_imu_noise(1e-3, 1e-5, 200.0, 10.0, 43);
    CHECK(a == b);
    CHECK(a != c);
}

TEST_CASE("deviation scales with the series")
{
    auto x = simulate_imu_noise(1e-3, 1e-4, 100.0, 60.0, 3);
    auto taus = default_taus(x.size(), 100.0);
    auto base = allan_deviation(x, 100.0, taus);
    for (double k : {0.5, 7.0, 1e3}) {
        std::vector<double> y(x);
        for (auto& v : y)
            v *= k;
        auto scaled = allan_deviation(y, 100.0, taus);
        for (std::size_t i = 0; i < taus.size(); ++i)
            CHECK(scaled.adev[0][i] == doctest::Approx(k * base.adev[0][i]).epsilon(1e-9));
    }
}

TEST_CASE("tau grid invariants")
{
    const std::size_t n = 200 * 3600;
    auto taus = default_taus(n, 200.0);
    REQUIRE(taus.size() > 100);
    CHECK(taus.front() == doctest::Approx(2.0 / 200.0));
    CHECK(taus.back() <= double(n) / (2.0 * 200.0));
    for (std::size_t i = 1; i < taus.size(); ++i)
        CHECK(taus[i] > taus[i - 1]);
    auto c = allan_deviation(simulate_imu_noise(1e-3, 0.0, 200.0, 3600.0, 8), 200.0, taus);
    for (double d : c.adev[0])
        CHECK(d >= 0.0);
}

TEST_CASE("error cases")
{
    std::vector<double> x(10, 1.0);
    std::vector<double> zero{0.0};
    CHECK(code_of([&] { allan_deviation(x, 1.0, zero); }) == Errc::NonPositiveTau);
    std::vector<double> neg{-1.0};
    CHECK(code_of([&] { allan_deviation(x, 1.0, neg); }) == Errc::NonPositiveTau);
    std::vector<double> big{4.0};
    CHECK(code_of([&] { allan_deviation(x, 1.0, big); }) == Errc::SeriesTooShort);
    std::vector<double> empty;
    std::vector<double> one{1.0};
    CHECK(code_of([&] { allan_deviation(empty, 1.0, one); }) == Errc::SeriesTooShort);
    CHECK(code_of([] { default_taus(5, 1.0); }) == Errc::SeriesTooShort);

    auto c = allan_deviation(simulate_imu_noise(1e-3, 0.0, 10.0, 60.0, 1), 10.0, default_taus(600, 10.0));
    CHECK(code_of([&] { fit_noise_params(c); }) == Errc::FitRegionEmpty); // no tau reaches 100 s
}
