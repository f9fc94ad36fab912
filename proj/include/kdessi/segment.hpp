#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace kdessi {

inline constexpr std::size_t kSegmentLength = 1500;
inline constexpr std::size_t kSegmentChannels = 3;
inline constexpr std::array<const char*, 3> kChannelNames = {"lao", "dao", "zm"};

/// Fixed-size [1500 x 3] window, the model input unit. Channel-major storage.
struct WordSegment {
    std::vector<float> data = std::vector<float>(kSegmentChannels * kSegmentLength, 0.0f);
    std::size_t center = 0; // envelope sample index of the window center
    int label = -1;         // class id 0..25, or -1 when unlabeled

    float& at(std::size_t channel, std::size_t t) { return data[channel * kSegmentLength + t]; }
    float at(std::size_t channel, std::size_t t) const { return data[channel * kSegmentLength + t]; }
};

} // namespace kdessi
