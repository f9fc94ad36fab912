#pragma once

/// Dataset persistence. Two layouts:
///  - directory: segments/seg_NNNNN.csv + manifest.json (labels, centers,
///    generator config, format version)
///  - packed binary: magic "KDSS", u32 version, u32 sample count, then one
///    record per sample: u8 label + 3*1500 little-endian float32 values.

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "kdessi/common.hpp"
#include "kdessi/csv.hpp"
#include "kdessi/dataset.hpp"

namespace kdessi::io {

inline constexpr char kDatasetMagic[4] = {'K', 'D', 'S', 'S'};
inline constexpr std::uint32_t kDatasetVersion = 1;

namespace detail {

static_assert(sizeof(float) == 4, "float32 storage assumed");

inline void write_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

inline std::uint32_t read_u32(std::istream& is, const std::string& context) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4))
        throw format_error(context + ": truncated (u32 expected)");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

inline void write_f32_le(std::ostream& os, const float* data, std::size_t count) {
    // Little-endian host assumed for bulk writes; x86/ARM targets here.
    os.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * 4));
}

inline void read_f32_le(std::istream& is, float* data, std::size_t count,
                        const std::string& context) {
    if (!is.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(count * 4)))
        throw format_error(context + ": truncated segment data");
}

} // namespace detail

inline void save_dataset_packed(const std::filesystem::path& path,
                                const data::LabeledDataset& ds) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw format_error("cannot open for writing: " + path.string());
    f.write(kDatasetMagic, 4);
    detail::write_u32(f, kDatasetVersion);
    detail::write_u32(f, static_cast<std::uint32_t>(ds.samples.size()));
    for (const auto& s : ds.samples) {
        const unsigned char label = static_cast<unsigned char>(s.label);
        f.write(reinterpret_cast<const char*>(&label), 1);
        detail::write_f32_le(f, s.data.data(), s.data.size());
    }
    if (!f) throw format_error("write failed: " + path.string());
}

inline data::LabeledDataset load_dataset_packed(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw format_error("cannot open: " + path.string());
    char magic[4];
    if (!f.read(magic, 4) || std::memcmp(magic, kDatasetMagic, 4) != 0)
        throw format_error(path.string() + ": bad magic (not a KDSS dataset)");
    const std::uint32_t version = detail::read_u32(f, path.string());
    if (version != kDatasetVersion)
        throw format_error(path.string() + ": unsupported version " + std::to_string(version));
    const std::uint32_t count = detail::read_u32(f, path.string());

    data::LabeledDataset ds;
    ds.samples.resize(count);
    for (auto& s : ds.samples) {
        unsigned char label;
        if (!f.read(reinterpret_cast<char*>(&label), 1))
            throw format_error(path.string() + ": truncated label");
        s.label = label;
        detail::read_f32_le(f, s.data.data(), s.data.size(), path.string());
    }
    return ds;
}

inline void save_dataset_dir(const std::filesystem::path& dir,
                             const data::LabeledDataset& ds) {
    std::filesystem::create_directories(dir / "segments");
    nlohmann::json manifest;
    manifest["format_version"] = kDatasetVersion;
    manifest["class_count"] = ds.class_count;
    manifest["metadata"] = ds.metadata;
    auto& entries = manifest["segments"] = nlohmann::json::array();

    char name[32];
    for (std::size_t i = 0; i < ds.samples.size(); ++i) {
        std::snprintf(name, sizeof(name), "seg_%05zu.csv", i);
        write_segment_csv(dir / "segments" / name, ds.samples[i]);
        entries.push_back({{"file", std::string("segments/") + name},
                           {"label", ds.samples[i].label},
                           {"center", ds.samples[i].center}});
    }
    std::ofstream f(dir / "manifest.json");
    if (!f) throw format_error("cannot write manifest in " + dir.string());
    f << manifest.dump(2) << '\n';
}

inline data::LabeledDataset load_dataset_dir(const std::filesystem::path& dir) {
    std::ifstream f(dir / "manifest.json");
    if (!f) throw format_error("missing manifest.json in " + dir.string());
    nlohmann::json manifest;
    try {
        f >> manifest;
    } catch (const nlohmann::json::exception& e) {
        throw format_error(dir.string() + "/manifest.json: " + e.what());
    }
    data::LabeledDataset ds;
    ds.class_count = manifest.value("class_count", 26);
    ds.metadata = manifest.value("metadata", nlohmann::json::object());
    for (const auto& entry : manifest.at("segments")) {
        WordSegment seg = read_segment_csv(dir / entry.at("file").get<std::string>());
        seg.label = entry.value("label", -1);
        seg.center = entry.value("center", std::size_t{0});
        ds.samples.push_back(std::move(seg));
    }
    return ds;
}

/// Dispatch on path: ".kdss" files use the packed layout, anything else is
/// treated as an archive directory.
inline void save_dataset(const std::filesystem::path& path, const data::LabeledDataset& ds) {
    if (path.extension() == ".kdss")
        save_dataset_packed(path, ds);
    else
        save_dataset_dir(path, ds);
}

inline data::LabeledDataset load_dataset(const std::filesystem::path& path) {
    if (std::filesystem::is_directory(path)) return load_dataset_dir(path);
    if (path.extension() == ".kdss") return load_dataset_packed(path);
    throw format_error("not a dataset archive (expected directory or .kdss file): " +
                       path.string());
}

} // namespace kdessi::io
