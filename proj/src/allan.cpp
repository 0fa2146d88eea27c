#include "govi/allan.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "govi/error.hpp"

namespace govi::allan {

namespace {

std::vector<std::size_t> cluster_sizes_for(std::span<const double> taus, double rate, std::size_t n)
{
    std::vector<std::size_t> sizes;
    for (double tau : taus) {
        if (!(tau > 0.0))
            fail(Errc::NonPositiveTau, "tau " + std::to_string(tau) + " is not positive");
        auto m = std::size_t(std::max<long long>(1, std::llround(tau * rate)));
        if (n < 3 * m)
            fail(Errc::SeriesTooShort, "tau " + std::to_string(tau) + " s needs " + std::to_string(3 * m) +
                                           " samples, series has " + std::to_string(n));
        sizes.push_back(m);
    }
    std::sort(sizes.begin(), sizes.end());
    sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());
    return sizes;
}

std::vector<double> adev_for(std::span<const double> x, std::span<const std::size_t> sizes)
{
    const std::size_t n = x.size();
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / double(n);
    std::vector<double> prefix(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        prefix[i + 1] = prefix[i] + (x[i] - mean);

    std::vector<double> out;
    out.reserve(sizes.size());
    for (std::size_t m : sizes) {
        const std::size_t terms = n - 2 * m;
        double acc = 0.0;
        for (std::size_t k = 0; k < terms; ++k) {
            double d = prefix[k + 2 * m] - 2.0 * prefix[k + m] + prefix[k];
            acc += d * d;
        }
        double avar = acc / (double(m) * double(m) * 2.0 * double(terms));
        out.push_back(std::sqrt(avar));
    }
    return out;
}

// Intercept of a fixed-slope line in log-log space, evaluated at `at`. Each
// tau is weighted by its cluster count N/m, proportional to the inverse
// variance of the deviation estimate.
double fixed_slope_value(const AllanCurve& curve, std::size_t axis, double slope, double lo, double hi, double at,
                         const char* region)
{
    double sum = 0.0;
    double weights = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < curve.taus.size(); ++i) {
        double tau = curve.taus[i];
        double dev = curve.adev[axis][i];
        if (tau < lo || tau > hi || !(dev > 0.0) || !std::isfinite(dev))
            continue;
        double w = double(curve.n_samples) / double(curve.cluster_sizes[i]);
        sum += w * (std::log(dev) - slope * std::log(tau));
        weights += w;
        ++count;
    }
    if (count == 0)
        fail(Errc::FitRegionEmpty, std::string("no usable taus in the ") + region + " window [" +
                                       std::to_string(lo) + ", " + std::to_string(hi) + "] s for axis " +
                                       std::to_string(axis));
    return std::exp(sum / weights + slope * std::log(at));
}

} // namespace

std::vector<double> AllanCurve::average() const
{
    std::vector<double> avg(taus.size(), 0.0);
    for (const auto& axis : adev)
        for (std::size_t i = 0; i < taus.size(); ++i)
            avg[i] += axis[i] / double(adev.size());
    return avg;
}

std::vector<double> default_taus(std::size_t n_samples, double rate, int per_decade)
{
    if (!(rate > 0.0) || per_decade <= 0)
        fail(Errc::InvalidArgument, "rate and points per decade must be positive");
    const std::size_t m_max = n_samples / 3;
    if (m_max < 2)
        fail(Errc::SeriesTooShort, "series of " + std::to_string(n_samples) + " samples too short for a tau grid");
    const double lo = std::log10(2.0);
    const double hi = std::log10(double(m_max));
    std::vector<double> taus;
    std::size_t last = 0;
    for (int i = 0;; ++i) {
        double e = lo + double(i) / per_decade;
        if (e > hi + 1e-12)
            break;
        auto m = std::min<std::size_t>(m_max, std::size_t(std::llround(std::pow(10.0, e))));
        if (m != last) {
            taus.push_back(double(m) / rate);
            last = m;
        }
    }
    return taus;
}

AllanCurve allan_deviation(std::span<const double> samples, double rate, std::span<const double> taus)
{
    return allan_deviation(std::vector<std::vector<double>>{{samples.begin(), samples.end()}}, rate, taus);
}

AllanCurve allan_deviation(const std::vector<std::vector<double>>& axes, double rate, std::span<const double> taus)
{
    if (!(rate > 0.0))
        fail(Errc::InvalidArgument, "sample rate must be positive");
    if (axes.empty() || axes.front().empty())
        fail(Errc::SeriesTooShort, "empty series");
    for (const auto& a : axes)
        if (a.size() != axes.front().size())
            fail(Errc::InvalidArgument, "axes have different lengths");
    if (taus.empty())
        fail(Errc::InvalidArgument, "no taus requested");

    AllanCurve curve;
    curve.rate = rate;
    curve.n_samples = axes.front().size();
    curve.cluster_sizes = cluster_sizes_for(taus, rate, curve.n_samples);
    for (auto m : curve.cluster_sizes)
        curve.taus.push_back(double(m) / rate);
    for (const auto& a : axes)
        curve.adev.push_back(adev_for(a, curve.cluster_sizes));
    return curve;
}

NoiseParams fit_noise_params(const AllanCurve& curve, const FitWindows& windows)
{
    const double white_lo = windows.white_lo > 0.0 ? windows.white_lo : 2.0 / curve.rate;
    NoiseParams p;
    for (std::size_t axis = 0; axis < curve.axes(); ++axis) {
        p.sigma_w.push_back(fixed_slope_value(curve, axis, -0.5, white_lo, windows.white_hi, 1.0, "white-noise"));
        p.sigma_b.push_back(
            fixed_slope_value(curve, axis, 0.5, windows.walk_lo, windows.walk_hi, 3.0, "random-walk"));
    }
    if (curve.axes() == 0)
        fail(Errc::FitRegionEmpty, "curve has no axes");
    p.sigma_w_avg = std::accumulate(p.sigma_w.begin(), p.sigma_w.end(), 0.0) / double(curve.axes());
    p.sigma_b_avg = std::accumulate(p.sigma_b.begin(), p.sigma_b.end(), 0.0) / double(curve.axes());
    return p;
}

double fit_loglog_slope(const AllanCurve& curve, std::size_t axis, double lo, double hi)
{
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < curve.taus.size(); ++i) {
        double tau = curve.taus[i];
        double dev = curve.adev.at(axis)[i];
        if (tau < lo || tau > hi || !(dev > 0.0))
            continue;
        double x = std::log(tau);
        double y = std::log(dev);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n < 2)
        fail(Errc::FitRegionEmpty, "fewer than two taus in slope window");
    double denom = double(n) * sxx - sx * sx;
    return (double(n) * sxy - sx * sy) / denom;
}

std::vector<double> simulate_imu_noise(double sigma_w, double sigma_b, double rate, double duration,
                                       std::uint64_t seed)
{
    if (sigma_w < 0.0 || sigma_b < 0.0 || !(rate > 0.0) || !(duration > 0.0))
        fail(Errc::InvalidArgument, "noise simulation needs non-negative sigmas and positive rate/duration");
    const auto n = std::size_t(std::llround(rate * duration));
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double white_std = sigma_w * std::sqrt(rate);
    const double walk_std = sigma_b / std::sqrt(rate);
    std::vector<double> out(n);
    double bias = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        double w = normal(rng);
        double b = normal(rng);
        bias += walk_std * b;
        out[k] = white_std * w + bias;
    }
    return out;
}

} // namespace govi::allan
