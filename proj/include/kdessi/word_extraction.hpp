#pragma once

/// Word segmentation: per-channel peak detection, cross-channel consensus by
/// rank-paired medians, and power-maximizing window placement around each
/// consensus peak.

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "kdessi/peaks.hpp"
#include "kdessi/segment.hpp"
#include "kdessi/timeseries.hpp"

namespace kdessi::words {

struct PeakList {
    std::vector<std::vector<std::size_t>> per_channel;
};

struct ConsensusResult {
    std::vector<std::size_t> peaks;
    std::vector<std::string> warnings;
};

inline PeakList detect_all_channels(const TimeSeries& envelope,
                                    std::size_t min_distance = 3000,
                                    std::size_t max_peaks = 10) {
    PeakList out;
    out.per_channel.reserve(envelope.channel_count());
    for (const auto& ch : envelope.channels)
        out.per_channel.push_back(detect_peaks(ch, min_distance, max_peaks));
    return out;
}

/// Rank-paired consensus: the i-th peak of every channel belongs to word i;
/// the consensus index is the median of the paired indices. Channels with
/// differing counts are paired up to the minimum count, with a warning.
inline ConsensusResult localize_peaks(const PeakList& peaks) {
    ConsensusResult out;
    if (peaks.per_channel.empty()) return out;

    std::size_t min_count = peaks.per_channel.front().size();
    std::size_t max_count = min_count;
    for (const auto& ch : peaks.per_channel) {
        min_count = std::min(min_count, ch.size());
        max_count = std::max(max_count, ch.size());
    }
    if (min_count != max_count)
        out.warnings.push_back("peak counts differ across channels (" +
                               std::to_string(min_count) + ".." + std::to_string(max_count) +
                               "); pairing by rank up to " + std::to_string(min_count));

    for (std::size_t i = 0; i < min_count; ++i) {
        std::vector<std::size_t> ranked;
        ranked.reserve(peaks.per_channel.size());
        for (const auto& ch : peaks.per_channel) ranked.push_back(ch[i]);
        std::sort(ranked.begin(), ranked.end());
        out.peaks.push_back(ranked[(ranked.size() - 1) / 2]); // middle value for 3 channels
    }
    return out;
}

/// Slide the window center from peak-150 to peak+150 in steps of 10 and keep
/// the placement with the largest within-window power summed over channels.
/// Windows that would leave the signal are shifted fully inside first.
inline WordSegment localize_word(const TimeSeries& envelope, std::size_t peak) {
    envelope.validate();
    const std::size_t len = envelope.length();
    if (len < kSegmentLength)
        throw std::invalid_argument("localize_word: envelope shorter than a word window");

    const std::size_t half = kSegmentLength / 2;
    const std::size_t max_start = len - kSegmentLength;

    std::vector<std::vector<double>> prefix(envelope.channel_count());
    for (std::size_t c = 0; c < envelope.channel_count(); ++c) {
        const auto& x = envelope.channels[c];
        prefix[c].assign(len + 1, 0.0);
        for (std::size_t i = 0; i < len; ++i) prefix[c][i + 1] = prefix[c][i] + x[i] * x[i];
    }

    std::size_t best_start = 0;
    double best_score = -1.0;
    for (int shift = -150; shift <= 150; shift += 10) {
        const long long center = static_cast<long long>(peak) + shift;
        long long start = center - static_cast<long long>(half);
        start = std::clamp(start, 0LL, static_cast<long long>(max_start));
        const std::size_t s = static_cast<std::size_t>(start);
        double score = 0.0;
        for (std::size_t c = 0; c < envelope.channel_count(); ++c)
            score += prefix[c][s + kSegmentLength] - prefix[c][s];
        if (score > best_score) {
            best_score = score;
            best_start = s;
        }
    }

    WordSegment seg;
    seg.center = best_start + half;
    const std::size_t n_ch = std::min(envelope.channel_count(), kSegmentChannels);
    for (std::size_t c = 0; c < n_ch; ++c)
        for (std::size_t t = 0; t < kSegmentLength; ++t)
            seg.at(c, t) = static_cast<float>(envelope.channels[c][best_start + t]);
    return seg;
}

struct ExtractionResult {
    std::vector<WordSegment> segments; // in time order
    std::vector<std::size_t> consensus_peaks;
    std::vector<std::string> warnings;
};

/// Full segmentation of a processed trial envelope. Emits a warning (not an
/// error) when fewer than expected_words consensus peaks are found.
inline ExtractionResult extract_words(const TimeSeries& envelope,
                                      std::size_t expected_words = 10,
                                      std::size_t min_distance = 3000) {
    ExtractionResult out;
    const PeakList peaks = detect_all_channels(envelope, min_distance, expected_words);
    ConsensusResult consensus = localize_peaks(peaks);
    out.warnings = std::move(consensus.warnings);
    out.consensus_peaks = std::move(consensus.peaks);

    if (out.consensus_peaks.size() < expected_words)
        out.warnings.push_back("found " + std::to_string(out.consensus_peaks.size()) +
                               " words, expected " + std::to_string(expected_words));

    out.segments.reserve(out.consensus_peaks.size());
    for (std::size_t p : out.consensus_peaks)
        out.segments.push_back(localize_word(envelope, p));
    return out;
}

} // namespace kdessi::words
