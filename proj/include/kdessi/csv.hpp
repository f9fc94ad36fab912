#pragma once

/// CSV I/O for recordings and word segments. Recording format: header
/// `sample,lao,dao,zm`, one row per sample. A sidecar JSON manifest next to
/// the recording carries sample_rate_hz and trial metadata.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "kdessi/common.hpp"
#include "kdessi/segment.hpp"
#include "kdessi/timeseries.hpp"

namespace kdessi::io {

struct RecordingManifest {
    double sample_rate_hz = 1000.0;
    std::string subject_id;
    std::string word_label;
    std::string trial_id;
};

inline std::filesystem::path sidecar_path(const std::filesystem::path& csv_path) {
    std::filesystem::path p = csv_path;
    p.replace_extension(".json");
    return p;
}

namespace detail {

inline std::vector<std::string> split_line(const std::string& line, char sep = ',') {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, sep)) out.push_back(field);
    return out;
}

inline double parse_double(const std::string& s, const std::string& context) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw format_error(context + ": trailing characters in '" + s + "'");
        return v;
    } catch (const format_error&) {
        throw;
    } catch (const std::exception&) {
        throw format_error(context + ": cannot parse number '" + s + "'");
    }
}

} // namespace detail

inline void write_recording_csv(const std::filesystem::path& path, const TimeSeries& ts) {
    std::ofstream f(path);
    if (!f) throw format_error("cannot open for writing: " + path.string());
    f << "sample";
    for (std::size_t c = 0; c < ts.channel_count(); ++c)
        f << ',' << (c < kChannelNames.size() ? kChannelNames[c] : ("ch" + std::to_string(c)).c_str());
    f << '\n';
    char buf[32];
    for (std::size_t i = 0; i < ts.length(); ++i) {
        f << i;
        for (const auto& ch : ts.channels) {
            std::snprintf(buf, sizeof(buf), "%.17g", ch[i]);
            f << ',' << buf;
        }
        f << '\n';
    }
    if (!f) throw format_error("write failed: " + path.string());
}

inline TimeSeries read_recording_csv(const std::filesystem::path& path,
                                     double default_rate_hz = 1000.0) {
    std::ifstream f(path);
    if (!f) throw format_error("cannot open: " + path.string());
    std::string line;
    if (!std::getline(f, line)) throw format_error("empty file: " + path.string());
    const auto header = detail::split_line(line);
    if (header.size() < 2 || header.front() != "sample")
        throw format_error("bad recording header in " + path.string() +
                           " (expected 'sample,<channel names...>')");
    const std::size_t n_channels = header.size() - 1;

    TimeSeries ts;
    ts.sample_rate_hz = default_rate_hz;
    ts.channels.resize(n_channels);
    std::size_t row = 0;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        const auto fields = detail::split_line(line);
        if (fields.size() != header.size())
            throw format_error(path.string() + ": row " + std::to_string(row) +
                               " has " + std::to_string(fields.size()) + " fields, expected " +
                               std::to_string(header.size()));
        for (std::size_t c = 0; c < n_channels; ++c)
            ts.channels[c].push_back(detail::parse_double(fields[c + 1], path.string()));
        ++row;
    }
    if (row == 0) throw format_error("no data rows in " + path.string());
    return ts;
}

inline void write_recording_manifest(const std::filesystem::path& csv_path,
                                     const RecordingManifest& m) {
    nlohmann::json j{{"sample_rate_hz", m.sample_rate_hz},
                     {"subject_id", m.subject_id},
                     {"word_label", m.word_label},
                     {"trial_id", m.trial_id}};
    std::ofstream f(sidecar_path(csv_path));
    if (!f) throw format_error("cannot write manifest for " + csv_path.string());
    f << j.dump(2) << '\n';
}

inline std::optional<RecordingManifest> read_recording_manifest(
    const std::filesystem::path& csv_path) {
    const auto p = sidecar_path(csv_path);
    std::ifstream f(p);
    if (!f) return std::nullopt;
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw format_error("bad manifest " + p.string() + ": " + e.what());
    }
    RecordingManifest m;
    m.sample_rate_hz = j.value("sample_rate_hz", 1000.0);
    m.subject_id = j.value("subject_id", "");
    m.word_label = j.value("word_label", "");
    m.trial_id = j.value("trial_id", "");
    return m;
}

inline void write_segment_csv(const std::filesystem::path& path, const WordSegment& seg) {
    std::ofstream f(path);
    if (!f) throw format_error("cannot open for writing: " + path.string());
    f << "sample,lao,dao,zm\n";
    char buf[24];
    for (std::size_t t = 0; t < kSegmentLength; ++t) {
        f << t;
        for (std::size_t c = 0; c < kSegmentChannels; ++c) {
            std::snprintf(buf, sizeof(buf), "%.9g", seg.at(c, t));
            f << ',' << buf;
        }
        f << '\n';
    }
    if (!f) throw format_error("write failed: " + path.string());
}

inline WordSegment read_segment_csv(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw format_error("cannot open: " + path.string());
    std::string line;
    if (!std::getline(f, line) || detail::split_line(line).size() != kSegmentChannels + 1)
        throw format_error("bad segment header in " + path.string());
    WordSegment seg;
    std::size_t t = 0;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        if (t >= kSegmentLength)
            throw format_error(path.string() + ": more than " +
                               std::to_string(kSegmentLength) + " rows");
        const auto fields = detail::split_line(line);
        if (fields.size() != kSegmentChannels + 1)
            throw format_error(path.string() + ": bad field count at row " + std::to_string(t));
        for (std::size_t c = 0; c < kSegmentChannels; ++c)
            seg.at(c, t) = static_cast<float>(detail::parse_double(fields[c + 1], path.string()));
        ++t;
    }
    if (t != kSegmentLength)
        throw format_error(path.string() + ": expected " + std::to_string(kSegmentLength) +
                           " rows, got " + std::to_string(t));
    return seg;
}

} // namespace kdessi::io
