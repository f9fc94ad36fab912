#pragma once

/// Model files: magic "KDSM", u32 version, u32 descriptor length, JSON
/// architecture descriptor, then raw little-endian float32 blobs for every
/// parameter and buffer in declaration order. The loader rebuilds the
/// network from the descriptor and validates every blob shape against it.

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

#include <json.hpp>

#include "kdessi/common.hpp"
#include "kdessi/dataset.hpp"
#include "kdessi/resnet1d.hpp"

namespace kdessi::io {

inline constexpr char kModelMagic[4] = {'K', 'D', 'S', 'M'};
inline constexpr std::uint32_t kModelVersion = 1;

struct SavedModel {
    nn::Resnet1d<float> model;
    std::optional<data::ScalerParams> scaler;
};

namespace detail {

inline void write_u32m(std::ostream& os, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

inline std::uint32_t read_u32m(std::istream& is, const std::string& ctx) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4)) throw format_error(ctx + ": truncated header");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

} // namespace detail

inline void save_model(const std::filesystem::path& path, nn::Resnet1d<float>& model,
                       const std::optional<data::ScalerParams>& scaler = std::nullopt) {
    nlohmann::json descriptor;
    descriptor["arch"] = model.cfg.to_json();
    auto& state = descriptor["state"] = nlohmann::json::array();
    std::vector<const nn::Tensor<float>*> blobs;
    auto record = [&](const std::string& name, const nn::Tensor<float>& t) {
        state.push_back({{"name", name}, {"shape", t.shape}});
        blobs.push_back(&t);
    };
    model.visit_params([&](const std::string& n, nn::Param<float>& p) { record(n, p.value); });
    model.visit_buffers([&](const std::string& n, nn::Tensor<float>& t) { record(n, t); });
    if (scaler) descriptor["scaler"] = scaler->to_json();

    const std::string json_bytes = descriptor.dump();
    std::ofstream f(path, std::ios::binary);
    if (!f) throw format_error("cannot open for writing: " + path.string());
    f.write(kModelMagic, 4);
    detail::write_u32m(f, kModelVersion);
    detail::write_u32m(f, static_cast<std::uint32_t>(json_bytes.size()));
    f.write(json_bytes.data(), static_cast<std::streamsize>(json_bytes.size()));
    for (const auto* t : blobs)
        f.write(reinterpret_cast<const char*>(t->ptr()),
                static_cast<std::streamsize>(t->numel() * sizeof(float)));
    if (!f) throw format_error("write failed: " + path.string());
}

inline SavedModel load_model(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw format_error("cannot open: " + path.string());
    char magic[4];
    if (!f.read(magic, 4) || std::memcmp(magic, kModelMagic, 4) != 0)
        throw format_error(path.string() + ": bad magic (not a KDSM model)");
    const std::uint32_t version = detail::read_u32m(f, path.string());
    if (version != kModelVersion)
        throw format_error(path.string() + ": unsupported version " + std::to_string(version));
    const std::uint32_t json_len = detail::read_u32m(f, path.string());
    std::string json_bytes(json_len, '\0');
    if (!f.read(json_bytes.data(), json_len))
        throw format_error(path.string() + ": truncated descriptor");

    nlohmann::json descriptor;
    try {
        descriptor = nlohmann::json::parse(json_bytes);
    } catch (const nlohmann::json::exception& e) {
        throw format_error(path.string() + ": bad descriptor: " + e.what());
    }

    SavedModel out{nn::Resnet1d<float>(nn::Resnet1dConfig::from_json(descriptor.at("arch"))), {}};
    if (descriptor.contains("scaler"))
        out.scaler = data::ScalerParams::from_json(descriptor.at("scaler"));

    std::vector<nn::Tensor<float>*> blobs;
    std::vector<std::string> names;
    out.model.visit_params([&](const std::string& n, nn::Param<float>& p) {
        blobs.push_back(&p.value);
        names.push_back(n);
    });
    out.model.visit_buffers([&](const std::string& n, nn::Tensor<float>& t) {
        blobs.push_back(&t);
        names.push_back(n);
    });

    const auto& state = descriptor.at("state");
    if (state.size() != blobs.size())
        throw format_error(path.string() + ": descriptor lists " + std::to_string(state.size()) +
                           " tensors, architecture expects " + std::to_string(blobs.size()));
    for (std::size_t i = 0; i < blobs.size(); ++i) {
        const auto shape = state[i].at("shape").get<std::vector<std::size_t>>();
        if (shape != blobs[i]->shape)
            throw format_error(path.string() + ": shape mismatch for " + names[i]);
        if (!f.read(reinterpret_cast<char*>(blobs[i]->ptr()),
                    static_cast<std::streamsize>(blobs[i]->numel() * sizeof(float))))
            throw format_error(path.string() + ": truncated blob for " + names[i]);
    }
    return out;
}

} // namespace kdessi::io
