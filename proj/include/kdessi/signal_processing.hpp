#pragma once

/// Raw sEMG conditioning: zero-mean, wavelet denoising, band-limiting,
/// full-wave rectification, and sliding RMS envelope extraction.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "kdessi/butterworth.hpp"
#include "kdessi/timeseries.hpp"
#include "kdessi/wavelet.hpp"

namespace kdessi::dsp {

struct FilterSpec {
    int order = 10;
    double high_pass_hz = 20.0;
    double low_pass_hz = 400.0;

    void validate(double sample_rate_hz) const {
        if (order < 2 || order % 2 != 0)
            throw std::invalid_argument("FilterSpec: order must be even and >= 2");
        if (!(0.0 < high_pass_hz && high_pass_hz < low_pass_hz &&
              low_pass_hz < sample_rate_hz / 2.0))
            throw std::invalid_argument("FilterSpec: need 0 < high_pass < low_pass < fs/2");
    }
};

struct EnvelopeSpec {
    int window_samples = 100; // 100 ms at 1000 Hz

    void validate(std::size_t signal_len) const {
        if (window_samples <= 0 || window_samples % 2 != 0)
            throw std::invalid_argument("EnvelopeSpec: window must be positive and even");
        if (static_cast<std::size_t>(window_samples) > signal_len)
            throw std::invalid_argument("EnvelopeSpec: window longer than signal");
    }
};

struct ProcessOptions {
    FilterSpec filter;
    EnvelopeSpec envelope;
    int wavelet_level = 4;
    bool zero_phase = false;      // forward-backward filtering instead of causal
    bool single_bandpass = false; // one band-pass design instead of HP+LP cascade
};

inline TimeSeries zero_mean(const TimeSeries& ts) {
    ts.validate();
    TimeSeries out = ts;
    for (auto& ch : out.channels) {
        double mean = 0.0;
        for (double v : ch) mean += v;
        mean /= static_cast<double>(ch.size());
        for (double& v : ch) v -= mean;
    }
    return out;
}

/// Per-channel db2 denoising at the given decomposition level with soft
/// minimax thresholding. threshold_override >= 0 bypasses the estimate
/// (0 turns the operation into a transform round trip).
inline TimeSeries wavelet_denoise(const TimeSeries& ts, int level = 4,
                                  double threshold_override = -1.0) {
    ts.validate();
    if (ts.length() < (std::size_t{1} << level))
        throw std::invalid_argument("wavelet_denoise: channel shorter than 2^level");
    TimeSeries out = ts;
    for (auto& ch : out.channels)
        ch = wavelet::denoise_channel(ch, level, threshold_override);
    return out;
}

/// Band-limit each channel. Default is a high-pass/low-pass cascade with the
/// two corner settings; single_bandpass uses one band-pass of the same order.
inline TimeSeries butterworth_bandpass(const TimeSeries& ts, const FilterSpec& spec,
                                       bool zero_phase = false,
                                       bool single_bandpass = false) {
    ts.validate();
    spec.validate(ts.sample_rate_hz);

    std::vector<butter::Sos> cascade;
    if (single_bandpass) {
        cascade.push_back(butter::design(butter::Kind::BandPass, spec.order,
                                         spec.high_pass_hz, spec.low_pass_hz,
                                         ts.sample_rate_hz));
    } else {
        cascade.push_back(butter::design(butter::Kind::HighPass, spec.order,
                                         spec.high_pass_hz, 0.0, ts.sample_rate_hz));
        cascade.push_back(butter::design(butter::Kind::LowPass, spec.order,
                                         spec.low_pass_hz, 0.0, ts.sample_rate_hz));
    }

    TimeSeries out = ts;
    for (auto& ch : out.channels)
        for (const auto& sos : cascade)
            ch = zero_phase ? butter::filter_zero_phase(sos, ch) : butter::filter(sos, ch);
    return out;
}

inline TimeSeries rectify(const TimeSeries& ts) {
    TimeSeries out = ts;
    for (auto& ch : out.channels)
        for (double& v : ch) v = std::fabs(v);
    return out;
}

/// Sliding RMS over a window of window_samples samples. Output index i is the
/// envelope at input index i + window/2; only fully covered positions are
/// emitted, so each output channel has length L - window + 1.
inline TimeSeries rms_envelope(const TimeSeries& ts, const EnvelopeSpec& spec) {
    ts.validate();
    const std::size_t len = ts.length();
    spec.validate(len);
    const std::size_t nw = static_cast<std::size_t>(spec.window_samples);
    const std::size_t out_len = len - nw + 1;

    TimeSeries out;
    out.sample_rate_hz = ts.sample_rate_hz;
    out.channels.resize(ts.channel_count());
    for (std::size_t c = 0; c < ts.channel_count(); ++c) {
        const auto& x = ts.channels[c];
        // prefix sums of squares; window [i, i + nw)
        std::vector<double> prefix(len + 1, 0.0);
        for (std::size_t i = 0; i < len; ++i) prefix[i + 1] = prefix[i] + x[i] * x[i];
        auto& e = out.channels[c];
        e.resize(out_len);
        for (std::size_t i = 0; i < out_len; ++i) {
            const double s = prefix[i + nw] - prefix[i];
            e[i] = std::sqrt(std::max(0.0, s) / static_cast<double>(nw));
        }
    }
    return out;
}

/// Full conditioning chain. The returned envelope is shorter than the input
/// by window - 1 samples; its index 0 aligns with input index window / 2.
inline TimeSeries process_recording(const TimeSeries& raw,
                                    const ProcessOptions& opts = {}) {
    TimeSeries s = zero_mean(raw);
    s = wavelet_denoise(s, opts.wavelet_level);
    s = butterworth_bandpass(s, opts.filter, opts.zero_phase, opts.single_bandpass);
    s = rectify(s);
    return rms_envelope(s, opts.envelope);
}

} // namespace kdessi::dsp
