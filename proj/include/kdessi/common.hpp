#pragma once

#include <stdexcept>
#include <string>

namespace kdessi {

// Thrown on malformed files (bad magic, truncated data, unparsable rows).
// Distinct from std::invalid_argument so the CLI can map it to exit code 2.
class format_error : public std::runtime_error {
public:
    explicit format_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace kdessi
