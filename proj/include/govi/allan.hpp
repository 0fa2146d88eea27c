#pragma once

// Overlapping Allan deviation and the two-line IMU noise fit: a slope -1/2
// line read at tau = 1 s gives the white-noise density, a slope +1/2 line
// read at tau = 3 s gives the bias random-walk intensity.

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace govi::allan {

struct AllanCurve {
    std::vector<double> taus;                 // seconds, strictly increasing
    std::vector<std::size_t> cluster_sizes;   // samples per cluster for each tau
    std::vector<std::vector<double>> adev;    // [axis][tau]
    double rate = 0.0;
    std::size_t n_samples = 0;

    std::size_t axes() const { return adev.size(); }
    /// Cross-axis mean deviation per tau.
    std::vector<double> average() const;
};

/// Log-spaced grid from 2/rate up to the largest cluster that still leaves
/// three clusters, `per_decade` points per decade (duplicates after rounding
/// to whole samples are dropped).
std::vector<double> default_taus(std::size_t n_samples, double rate, int per_decade = 30);

AllanCurve allan_deviation(std::span<const double> samples, double rate, std::span<const double> taus);
/// Same grid for every axis; all axes must have equal length.
AllanCurve allan_deviation(const std::vector<std::vector<double>>& axes, double rate, std::span<const double> taus);

struct FitWindows {
    double white_lo = 0.0; // 0 selects 2 / rate
    double white_hi = 1.0;
    double walk_lo = 100.0;
    double walk_hi = std::numeric_limits<double>::infinity();
};

struct NoiseParams {
    std::vector<double> sigma_w; // per axis, units/s^0.5 (density)
    std::vector<double> sigma_b; // per axis
    double sigma_w_avg = 0.0;
    double sigma_b_avg = 0.0;
};

NoiseParams fit_noise_params(const AllanCurve& curve, const FitWindows& windows = {});

/// Free least-squares slope of log(adev) against log(tau) in [lo, hi].
double fit_loglog_slope(const AllanCurve& curve, std::size_t axis, double lo, double hi);

/// x_k = w_k + b_k, w_k ~ N(0, sigma_w^2 rate), b_k = b_{k-1} + N(0, sigma_b^2 / rate).
std::vector<double> simulate_imu_noise(double sigma_w, double sigma_b, double rate, double duration,
                                       std::uint64_t seed);

} // namespace govi::allan
