#pragma once

/// Discrete wavelet transform with Daubechies-2 filters, half-sample
/// symmetric boundary extension, and soft minimax thresholding of detail
/// coefficients. Transform pair is exact: idwt(dwt(x)) reconstructs x.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "kdessi/timeseries.hpp"

namespace kdessi::wavelet {

namespace detail {

// db2 filter bank (orthonormal, length 4).
inline const double kSqrt3 = std::sqrt(3.0);
inline const double kNorm = 4.0 * std::sqrt(2.0);
inline const double kC0 = (1.0 + kSqrt3) / kNorm;
inline const double kC1 = (3.0 + kSqrt3) / kNorm;
inline const double kC2 = (3.0 - kSqrt3) / kNorm;
inline const double kC3 = (1.0 - kSqrt3) / kNorm;

inline const double kDecLo[4] = {kC3, kC2, kC1, kC0};
inline const double kDecHi[4] = {-kC0, kC1, -kC2, kC3};
inline const double kRecLo[4] = {kC0, kC1, kC2, kC3};
inline const double kRecHi[4] = {kC3, -kC2, kC1, -kC0};

constexpr int kFilterLen = 4;

// Half-sample symmetric reflection: ... x1 x0 | x0 x1 ... xn-1 | xn-1 xn-2 ...
inline std::size_t reflect(long long idx, std::size_t n) {
    const long long nn = static_cast<long long>(n);
    while (idx < 0 || idx >= nn) {
        if (idx < 0) idx = -idx - 1;
        if (idx >= nn) idx = 2 * nn - 1 - idx;
    }
    return static_cast<std::size_t>(idx);
}

} // namespace detail

struct DwtBands {
    std::vector<double> approx;
    std::vector<double> detail;
};

/// Single-level analysis. Output bands have length floor((n + 3) / 2).
inline DwtBands dwt(const std::vector<double>& x) {
    using namespace detail;
    const std::size_t n = x.size();
    if (n < 2) throw std::invalid_argument("dwt: signal shorter than 2 samples");
    const std::size_t out_len = (n + kFilterLen - 1) / 2;
    DwtBands out;
    out.approx.resize(out_len);
    out.detail.resize(out_len);
    for (std::size_t i = 0; i < out_len; ++i) {
        double a = 0.0, d = 0.0;
        for (int k = 0; k < kFilterLen; ++k) {
            const double v = x[reflect(2 * static_cast<long long>(i) + 1 - k, n)];
            a += kDecLo[k] * v;
            d += kDecHi[k] * v;
        }
        out.approx[i] = a;
        out.detail[i] = d;
    }
    return out;
}

/// Single-level synthesis, cropped to target_len samples.
inline std::vector<double> idwt(const std::vector<double>& approx,
                                const std::vector<double>& detail,
                                std::size_t target_len) {
    using namespace detail;
    if (approx.size() != detail.size())
        throw std::invalid_argument("idwt: band length mismatch");
    const std::size_t la = approx.size();
    if (la == 0) throw std::invalid_argument("idwt: empty bands");
    // Upsampled band (coefficients at even indices) fully convolved with the
    // reconstruction filters, then the transient tails are cropped.
    const std::size_t up_len = 2 * la - 1;
    const std::size_t full_len = up_len + kFilterLen - 1;
    std::vector<double> full(full_len, 0.0);
    for (std::size_t i = 0; i < la; ++i) {
        const std::size_t base = 2 * i;
        for (int k = 0; k < kFilterLen; ++k)
            full[base + k] += kRecLo[k] * approx[i] + kRecHi[k] * detail[i];
    }
    const std::size_t offset = kFilterLen - 2;
    const std::size_t avail = 2 * la - kFilterLen + 2;
    if (target_len > avail)
        throw std::invalid_argument("idwt: target length exceeds reconstructable range");
    std::vector<double> out(target_len);
    for (std::size_t j = 0; j < target_len; ++j) out[j] = full[offset + j];
    return out;
}

struct Decomposition {
    std::vector<double> approx;                 // coarsest approximation
    std::vector<std::vector<double>> details;   // details[0] = level 1 (finest)
    std::vector<std::size_t> lengths;           // input length at each level
};

inline Decomposition decompose(const std::vector<double>& x, int level) {
    if (level < 1) throw std::invalid_argument("decompose: level must be >= 1");
    if (x.size() < (std::size_t{1} << level))
        throw std::invalid_argument("decompose: signal shorter than 2^level samples");
    Decomposition dec;
    std::vector<double> cur = x;
    for (int lev = 0; lev < level; ++lev) {
        dec.lengths.push_back(cur.size());
        DwtBands bands = dwt(cur);
        dec.details.push_back(std::move(bands.detail));
        cur = std::move(bands.approx);
    }
    dec.approx = std::move(cur);
    return dec;
}

inline std::vector<double> reconstruct(const Decomposition& dec) {
    std::vector<double> cur = dec.approx;
    for (std::size_t lev = dec.details.size(); lev-- > 0;)
        cur = idwt(cur, dec.details[lev], dec.lengths[lev]);
    return cur;
}

inline double median_abs(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    std::vector<double> tmp(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) tmp[i] = std::fabs(v[i]);
    std::sort(tmp.begin(), tmp.end());
    const std::size_t m = tmp.size() / 2;
    return (tmp.size() % 2 == 1) ? tmp[m] : 0.5 * (tmp[m - 1] + tmp[m]);
}

/// Minimax threshold: sigma * (0.3936 + 0.1829 * log2(n)), sigma estimated
/// from the level-1 detail coefficients as median(|d1|) / 0.6745.
inline double minimax_threshold(const std::vector<double>& level1_detail, std::size_t n) {
    const double sigma = median_abs(level1_detail) / 0.6745;
    return sigma * (0.3936 + 0.1829 * std::log2(static_cast<double>(n)));
}

inline double soft_threshold(double v, double lambda) {
    const double mag = std::fabs(v) - lambda;
    return mag <= 0.0 ? 0.0 : (v < 0.0 ? -mag : mag);
}

/// Denoise one channel: decompose, soft-threshold all detail bands with a
/// single minimax threshold, reconstruct. threshold_override < 0 means use
/// the estimated minimax value; 0 disables thresholding (transform identity).
inline std::vector<double> denoise_channel(const std::vector<double>& x, int level,
                                           double threshold_override = -1.0) {
    Decomposition dec = decompose(x, level);
    const double lambda = threshold_override >= 0.0
                              ? threshold_override
                              : minimax_threshold(dec.details.front(), x.size());
    for (auto& band : dec.details)
        for (double& v : band) v = soft_threshold(v, lambda);
    return reconstruct(dec);
}

} // namespace kdessi::wavelet
