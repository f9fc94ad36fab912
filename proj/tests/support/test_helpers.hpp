#pragma once

// Shared helpers for the unit and acceptance suites: independent brute-force
// oracles and small signal builders. Everything here is deliberately written
// in the most direct way possible, independent of the library internals.

#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

#include "kdessi/timeseries.hpp"

namespace testutil {

/// Direct sliding-window RMS: for each fully covered window of nw samples
/// starting at i, sqrt(mean of squares). O(L * nw) on purpose.
inline std::vector<double> naive_rms_envelope(const std::vector<double>& x, std::size_t nw) {
    std::vector<double> out;
    if (x.size() < nw) return out;
    for (std::size_t i = 0; i + nw <= x.size(); ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < nw; ++k) s += x[i + k] * x[i + k];
        out.push_back(std::sqrt(s / static_cast<double>(nw)));
    }
    return out;
}

inline kdessi::TimeSeries series_from(std::vector<std::vector<double>> channels,
                                      double rate_hz = 1000.0) {
    kdessi::TimeSeries ts;
    ts.sample_rate_hz = rate_hz;
    ts.channels = std::move(channels);
    return ts;
}

inline std::vector<double> random_signal(std::size_t n, std::uint32_t seed,
                                         double amplitude = 1.0) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> nd(0.0, amplitude);
    std::vector<double> x(n);
    for (auto& v : x) v = nd(rng);
    return x;
}

inline std::vector<double> sine_wave(std::size_t n, double freq_hz, double rate_hz,
                                     double amplitude = 1.0) {
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i)
        x[i] = amplitude * std::sin(2.0 * M_PI * freq_hz * static_cast<double>(i) / rate_hz);
    return x;
}

inline double rms_of(const std::vector<double>& x, std::size_t from, std::size_t to) {
    double s = 0.0;
    for (std::size_t i = from; i < to; ++i) s += x[i] * x[i];
    return std::sqrt(s / static_cast<double>(to - from));
}

inline double sample_variance(const std::vector<double>& x) {
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    return var / static_cast<double>(x.size() - 1);
}

} // namespace testutil
