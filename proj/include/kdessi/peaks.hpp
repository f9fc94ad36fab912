#pragma once

/// Local-maximum detection ranked by topographic prominence, with a minimum
/// inter-peak distance enforced greedily from the most prominent peak down.

#include <algorithm>
#include <cstddef>
#include <vector>

namespace kdessi::words {

struct Peak {
    std::size_t index;
    double height;
    double prominence;
};

namespace detail {

// Prominence: height above the higher of the two minima separating the peak
// from higher terrain (or from the signal edge).
inline double prominence_at(const std::vector<double>& x, std::size_t p) {
    const double h = x[p];
    double left_min = h;
    for (std::size_t i = p; i-- > 0;) {
        if (x[i] > h) break;
        left_min = std::min(left_min, x[i]);
    }
    double right_min = h;
    for (std::size_t i = p + 1; i < x.size(); ++i) {
        if (x[i] > h) break;
        right_min = std::min(right_min, x[i]);
    }
    return h - std::max(left_min, right_min);
}

// Local maxima; plateaus contribute their leftmost sample.
inline std::vector<std::size_t> local_maxima(const std::vector<double>& x) {
    std::vector<std::size_t> out;
    const std::size_t n = x.size();
    std::size_t i = 1;
    while (i + 1 < n) {
        if (x[i] > x[i - 1]) {
            std::size_t j = i;
            while (j + 1 < n && x[j + 1] == x[i]) ++j;
            if (j + 1 < n && x[j + 1] < x[i]) out.push_back(i);
            i = j + 1;
        } else {
            ++i;
        }
    }
    return out;
}

} // namespace detail

/// Up to max_peaks most prominent local maxima with pairwise index gaps
/// strictly greater than min_distance, in ascending index order.
inline std::vector<std::size_t> detect_peaks(const std::vector<double>& x,
                                             std::size_t min_distance = 3000,
                                             std::size_t max_peaks = 10) {
    if (x.empty()) return {};
    std::vector<Peak> candidates;
    for (std::size_t idx : detail::local_maxima(x))
        candidates.push_back({idx, x[idx], detail::prominence_at(x, idx)});

    // Most prominent first; ties to the earlier index.
    std::sort(candidates.begin(), candidates.end(), [](const Peak& a, const Peak& b) {
        if (a.prominence != b.prominence) return a.prominence > b.prominence;
        return a.index < b.index;
    });

    std::vector<std::size_t> kept;
    for (const auto& c : candidates) {
        bool conflict = false;
        for (std::size_t k : kept) {
            const std::size_t gap = k > c.index ? k - c.index : c.index - k;
            if (gap <= min_distance) { conflict = true; break; }
        }
        if (!conflict) kept.push_back(c.index);
        if (kept.size() == max_peaks) break;
    }
    std::sort(kept.begin(), kept.end());
    return kept;
}

} // namespace kdessi::words
