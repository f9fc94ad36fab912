#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace kdessi {

/// Multi-channel uniformly sampled signal. Channel-major storage; all
/// channels share one sample rate and length.
struct TimeSeries {
    double sample_rate_hz = 1000.0;
    std::vector<std::vector<double>> channels;

    TimeSeries() = default;
    TimeSeries(std::size_t n_channels, std::size_t length, double rate_hz)
        : sample_rate_hz(rate_hz),
          channels(n_channels, std::vector<double>(length, 0.0)) {}

    std::size_t channel_count() const { return channels.size(); }
    std::size_t length() const { return channels.empty() ? 0 : channels.front().size(); }

    void validate() const {
        if (channels.empty()) throw std::invalid_argument("TimeSeries: no channels");
        if (sample_rate_hz <= 0.0) throw std::invalid_argument("TimeSeries: sample rate must be > 0");
        const std::size_t len = channels.front().size();
        if (len == 0) throw std::invalid_argument("TimeSeries: empty channel");
        for (const auto& ch : channels)
            if (ch.size() != len)
                throw std::invalid_argument("TimeSeries: channels differ in length");
    }
};

} // namespace kdessi
