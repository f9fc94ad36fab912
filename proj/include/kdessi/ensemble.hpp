#pragma once

/// Soft-voting ensemble of independently trained backbones: members differ
/// only by seed (initialization and batch order); prediction averages the
/// members' probability outputs under normalized weights and takes argmax.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "kdessi/common.hpp"
#include "kdessi/losses.hpp"
#include "kdessi/model_io.hpp"
#include "kdessi/parallel.hpp"
#include "kdessi/train.hpp"

namespace kdessi::ensemble {

struct EnsembleModel {
    std::vector<nn::Resnet1d<float>> members;
    std::vector<double> weights;
    std::optional<data::ScalerParams> scaler;

    /// Normalizes weights at construction time; empty weights mean uniform.
    static EnsembleModel make(std::vector<nn::Resnet1d<float>> members_,
                              std::vector<double> weights_ = {}) {
        if (members_.empty()) throw std::invalid_argument("ensemble: need at least one member");
        if (weights_.empty()) weights_.assign(members_.size(), 1.0);
        if (weights_.size() != members_.size())
            throw std::invalid_argument("ensemble: weight count mismatch");
        double sum = 0.0;
        for (double w : weights_) {
            if (w < 0.0) throw std::invalid_argument("ensemble: weights must be non-negative");
            sum += w;
        }
        if (sum <= 0.0) throw std::invalid_argument("ensemble: weight sum must be positive");
        for (double& w : weights_) w /= sum;
        EnsembleModel e;
        e.members = std::move(members_);
        e.weights = std::move(weights_);
        return e;
    }

    std::size_t size() const { return members.size(); }

    std::size_t param_count_total() {
        std::size_t n = 0;
        for (auto& m : members) n += m.param_count();
        return n;
    }
};

/// p_ve = sum_i w_i * probs_i over equal-length probability vectors.
template <typename S>
std::vector<S> soft_vote(const std::vector<std::vector<S>>& probs,
                         const std::vector<double>& weights) {
    if (probs.empty()) throw std::invalid_argument("soft_vote: no inputs");
    if (probs.size() != weights.size())
        throw std::invalid_argument("soft_vote: weight count mismatch");
    const std::size_t classes = probs.front().size();
    std::vector<S> out(classes, S(0));
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (probs[i].size() != classes)
            throw std::invalid_argument("soft_vote: probability length mismatch");
        const S w = static_cast<S>(weights[i]);
        for (std::size_t c = 0; c < classes; ++c) out[c] += w * probs[i][c];
    }
    return out;
}

/// Weighted-average member probabilities for a batch: [B, classes].
inline nn::Tensor<float> ensemble_probs(EnsembleModel& e, const nn::Tensor<float>& x) {
    const std::size_t batch = x.shape[0];
    const std::size_t classes = static_cast<std::size_t>(e.members.front().cfg.class_count);
    nn::Tensor<float> p_ve({batch, classes});
    for (std::size_t i = 0; i < e.members.size(); ++i) {
        nn::Tensor<float> logits = e.members[i].forward(x, /*training=*/false);
        const float w = static_cast<float>(e.weights[i]);
        for (std::size_t b = 0; b < batch; ++b) {
            std::vector<float> row(logits.ptr() + b * classes, logits.ptr() + (b + 1) * classes);
            const std::vector<float> probs = nn::t_softmax(row, 1.0);
            float* out = p_ve.ptr() + b * classes;
            for (std::size_t c = 0; c < classes; ++c) out[c] += w * probs[c];
        }
    }
    return p_ve;
}

struct Prediction {
    std::vector<float> p_ve;
    int label;
};

inline Prediction predict(EnsembleModel& e, const WordSegment& segment) {
    nn::Tensor<float> x({1, kSegmentChannels, kSegmentLength});
    std::copy(segment.data.begin(), segment.data.end(), x.data.begin());
    nn::Tensor<float> p = ensemble_probs(e, x);
    Prediction out;
    out.p_ve.assign(p.data.begin(), p.data.end());
    out.label = nn::argmax_class(out.p_ve.data(), out.p_ve.size());
    return out;
}

inline std::vector<int> predict_labels(EnsembleModel& e, const data::LabeledDataset& ds,
                                       int batch_size = 64) {
    std::vector<int> preds;
    preds.reserve(ds.samples.size());
    std::vector<std::size_t> idx(ds.samples.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t from = 0; from < idx.size(); from += batch_size) {
        const std::size_t to = std::min(idx.size(), from + batch_size);
        nn::Tensor<float> x = nn::make_batch(ds, idx, from, to);
        nn::Tensor<float> p = ensemble_probs(e, x);
        const std::size_t classes = p.shape[1];
        for (std::size_t b = 0; b < to - from; ++b)
            preds.push_back(nn::argmax_class(p.ptr() + b * classes, classes));
    }
    return preds;
}

inline double evaluate_accuracy(EnsembleModel& e, const data::LabeledDataset& ds,
                                int batch_size = 64) {
    const std::vector<int> preds = predict_labels(e, ds, batch_size);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < preds.size(); ++i)
        if (preds[i] == ds.samples[i].label) ++correct;
    return preds.empty() ? 0.0 : static_cast<double>(correct) / preds.size();
}

struct TrainedEnsemble {
    EnsembleModel model;
    std::vector<nn::TrainHistory> histories;
};

/// N members trained on the same train/val split with seeds base_seed + i and
/// uniform voting weights. Members train concurrently (each is sequential
/// internally, so results do not depend on scheduling).
inline TrainedEnsemble train_ensemble(int n, const nn::Resnet1dConfig& arch,
                                      const data::LabeledDataset& train_set,
                                      const data::LabeledDataset& val_set,
                                      const nn::TrainConfig& base_cfg,
                                      std::uint32_t base_seed) {
    if (n < 1) throw std::invalid_argument("train_ensemble: need N >= 1");
    std::vector<nn::Resnet1d<float>> members(n, nn::Resnet1d<float>(arch));
    std::vector<nn::TrainHistory> histories(n);
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) {
        nn::TrainConfig cfg = base_cfg;
        cfg.seed = base_seed + static_cast<std::uint32_t>(i);
        nn::TrainedModel tm = nn::train_resnet(arch, train_set, val_set, cfg);
        members[i] = std::move(tm.model);
        histories[i] = std::move(tm.history);
    });
    TrainedEnsemble out{EnsembleModel::make(std::move(members)), std::move(histories)};
    return out;
}

inline void save_ensemble(const std::filesystem::path& dir, EnsembleModel& e) {
    std::filesystem::create_directories(dir);
    nlohmann::json manifest;
    manifest["n"] = e.members.size();
    manifest["weights"] = e.weights;
    auto& files = manifest["members"] = nlohmann::json::array();
    char name[32];
    for (std::size_t i = 0; i < e.members.size(); ++i) {
        std::snprintf(name, sizeof(name), "member_%03zu.kdsm", i);
        io::save_model(dir / name, e.members[i], e.scaler);
        files.push_back(name);
    }
    if (e.scaler) manifest["scaler"] = e.scaler->to_json();
    std::ofstream f(dir / "ensemble.json");
    if (!f) throw format_error("cannot write ensemble manifest in " + dir.string());
    f << manifest.dump(2) << '\n';
}

inline EnsembleModel load_ensemble(const std::filesystem::path& dir) {
    std::ifstream f(dir / "ensemble.json");
    if (!f) throw format_error("missing ensemble.json in " + dir.string());
    nlohmann::json manifest;
    try {
        f >> manifest;
    } catch (const nlohmann::json::exception& e) {
        throw format_error(dir.string() + "/ensemble.json: " + e.what());
    }
    std::vector<nn::Resnet1d<float>> members;
    std::optional<data::ScalerParams> scaler;
    for (const auto& name : manifest.at("members")) {
        io::SavedModel sm = io::load_model(dir / name.get<std::string>());
        if (!scaler && sm.scaler) scaler = sm.scaler;
        members.push_back(std::move(sm.model));
    }
    EnsembleModel e = EnsembleModel::make(std::move(members),
                                          manifest.value("weights", std::vector<double>{}));
    e.scaler = scaler;
    if (manifest.contains("scaler"))
        e.scaler = data::ScalerParams::from_json(manifest.at("scaler"));
    return e;
}

} // namespace kdessi::ensemble
