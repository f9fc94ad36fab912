#pragma once

/// Butterworth IIR design via the bilinear transform with frequency
/// pre-warping, realized as cascaded second-order sections. Supports
/// low-pass, high-pass, and band-pass (order counts poles in all cases).

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace kdessi::butter {

struct Biquad {
    double b0, b1, b2; // numerator
    double a1, a2;     // denominator (a0 normalized to 1)
};

using Sos = std::vector<Biquad>;

enum class Kind { LowPass, HighPass, BandPass };

namespace detail {

inline std::vector<std::complex<double>> prototype_poles(int order) {
    std::vector<std::complex<double>> poles;
    poles.reserve(order);
    for (int k = 0; k < order; ++k) {
        const double theta = std::numbers::pi * (2.0 * k + order + 1.0) / (2.0 * order);
        poles.emplace_back(std::cos(theta), std::sin(theta));
    }
    return poles;
}

inline double prewarp(double f_hz, double fs_hz) {
    return 2.0 * fs_hz * std::tan(std::numbers::pi * f_hz / fs_hz);
}

inline std::complex<double> bilinear(std::complex<double> s, double fs_hz) {
    const double c = 2.0 * fs_hz;
    return (c + s) / (c - s);
}

// Section magnitude at normalized angular frequency w (rad/sample).
inline double section_gain(const Biquad& s, double w) {
    const std::complex<double> e1 = std::polar(1.0, -w);
    const std::complex<double> e2 = std::polar(1.0, -2.0 * w);
    const double num = std::abs(s.b0 + s.b1 * e1 + s.b2 * e2);
    const double den = std::abs(1.0 + s.a1 * e1 + s.a2 * e2);
    return num / den;
}

} // namespace detail

/// Cascade magnitude response at frequency f_hz.
inline double magnitude_response(const Sos& sos, double f_hz, double fs_hz) {
    const double w = 2.0 * std::numbers::pi * f_hz / fs_hz;
    double g = 1.0;
    for (const auto& s : sos) g *= detail::section_gain(s, w);
    return g;
}

/// Design a Butterworth filter of the given pole count. For BandPass, order
/// must be even (prototype order = order / 2) and both corners are used;
/// otherwise only the first corner applies.
inline Sos design(Kind kind, int order, double f1_hz, double f2_hz, double fs_hz) {
    using namespace detail;
    if (order < 1) throw std::invalid_argument("butterworth: order must be >= 1");
    if (fs_hz <= 0.0) throw std::invalid_argument("butterworth: sample rate must be > 0");
    const double nyquist = fs_hz / 2.0;
    if (f1_hz <= 0.0 || f1_hz >= nyquist)
        throw std::invalid_argument("butterworth: corner frequency violates Nyquist range");
    if (kind == Kind::BandPass) {
        if (f2_hz <= f1_hz || f2_hz >= nyquist)
            throw std::invalid_argument("butterworth: band corners must satisfy 0 < f1 < f2 < fs/2");
        if (order % 2 != 0)
            throw std::invalid_argument("butterworth: band-pass order must be even");
    }

    // Analog poles at pre-warped corner(s).
    std::vector<std::complex<double>> analog;
    double b0_section[3]; // shared numerator pattern per section
    double ref_w;         // normalization frequency (rad/sample)
    if (kind == Kind::LowPass) {
        const double wc = prewarp(f1_hz, fs_hz);
        for (auto p : prototype_poles(order)) analog.push_back(p * wc);
        b0_section[0] = 1.0; b0_section[1] = 2.0; b0_section[2] = 1.0; // zeros at z=-1
        ref_w = 0.0;
    } else if (kind == Kind::HighPass) {
        const double wc = prewarp(f1_hz, fs_hz);
        for (auto p : prototype_poles(order)) analog.push_back(wc / p);
        b0_section[0] = 1.0; b0_section[1] = -2.0; b0_section[2] = 1.0; // zeros at z=1
        ref_w = std::numbers::pi;
    } else {
        const double w1 = prewarp(f1_hz, fs_hz);
        const double w2 = prewarp(f2_hz, fs_hz);
        const double bw = w2 - w1;
        const double w0sq = w1 * w2;
        for (auto p : prototype_poles(order / 2)) {
            // s_bp solves s^2 - p*bw*s + w0^2 = 0
            const std::complex<double> half = 0.5 * p * bw;
            const std::complex<double> disc = std::sqrt(half * half - w0sq);
            analog.push_back(half + disc);
            analog.push_back(half - disc);
        }
        b0_section[0] = 1.0; b0_section[1] = 0.0; b0_section[2] = -1.0; // zeros at z=+-1
        // Warped center maps back to the digital frequency of unity prototype gain.
        ref_w = 2.0 * std::atan(std::sqrt(w0sq) / (2.0 * fs_hz));
    }

    // Bilinear transform; split into conjugate pairs and reals.
    std::vector<std::complex<double>> cplx;
    std::vector<double> reals;
    for (auto s : analog) {
        const auto z = bilinear(s, fs_hz);
        if (std::fabs(z.imag()) < 1e-12)
            reals.push_back(z.real());
        else if (z.imag() > 0.0)
            cplx.push_back(z); // keep one of each conjugate pair
    }
    if (reals.size() % 2 != 0)
        throw std::invalid_argument("butterworth: unpaired real pole (odd order unsupported here)");

    Sos sos;
    for (auto z : cplx) {
        Biquad s{b0_section[0], b0_section[1], b0_section[2], -2.0 * z.real(), std::norm(z)};
        sos.push_back(s);
    }
    for (std::size_t i = 0; i + 1 < reals.size(); i += 2) {
        Biquad s{b0_section[0], b0_section[1], b0_section[2],
                 -(reals[i] + reals[i + 1]), reals[i] * reals[i + 1]};
        sos.push_back(s);
    }

    // Per-section gain normalization at the reference frequency.
    for (auto& s : sos) {
        const double g = detail::section_gain(s, ref_w);
        if (g <= 0.0) throw std::invalid_argument("butterworth: degenerate section gain");
        s.b0 /= g; s.b1 /= g; s.b2 /= g;
    }
    return sos;
}

/// Causal single-pass filtering (direct form II transposed), zero initial state.
inline std::vector<double> filter(const Sos& sos, const std::vector<double>& x) {
    std::vector<double> y = x;
    for (const auto& s : sos) {
        double z1 = 0.0, z2 = 0.0;
        for (double& v : y) {
            const double in = v;
            const double out = s.b0 * in + z1;
            z1 = s.b1 * in - s.a1 * out + z2;
            z2 = s.b2 * in - s.a2 * out;
            v = out;
        }
    }
    return y;
}

/// Zero-phase forward-backward filtering with odd reflection padding.
inline std::vector<double> filter_zero_phase(const Sos& sos, const std::vector<double>& x) {
    const std::size_t n = x.size();
    const std::size_t pad = std::min(n > 1 ? n - 1 : 0, 3 * (2 * sos.size() + 1));
    std::vector<double> ext;
    ext.reserve(n + 2 * pad);
    for (std::size_t i = pad; i > 0; --i) ext.push_back(2.0 * x.front() - x[i]);
    ext.insert(ext.end(), x.begin(), x.end());
    for (std::size_t i = 0; i < pad; ++i) ext.push_back(2.0 * x.back() - x[n - 2 - i]);

    std::vector<double> fwd = filter(sos, ext);
    std::reverse(fwd.begin(), fwd.end());
    std::vector<double> bwd = filter(sos, fwd);
    std::reverse(bwd.begin(), bwd.end());
    return std::vector<double>(bwd.begin() + pad, bwd.begin() + pad + n);
}

} // namespace kdessi::butter
