#pragma once

/// Mini-batch training with Adam and validation-accuracy early stopping;
/// the weights from the best validation epoch are restored at the end.
/// The loss callback makes the same loop serve plain cross-entropy and
/// distillation objectives.

#include <algorithm>
#include <cstring>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include "kdessi/adam.hpp"
#include "kdessi/dataset.hpp"
#include "kdessi/losses.hpp"
#include "kdessi/resnet1d.hpp"

namespace kdessi::nn {

struct TrainConfig {
    int max_epochs = 100;
    int batch_size = 32;
    int patience = 10;
    std::uint32_t seed = 0;
    AdamConfig adam;

    void validate() const {
        if (max_epochs < 1) throw std::invalid_argument("TrainConfig: max_epochs must be >= 1");
        if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
        if (patience < 0) throw std::invalid_argument("TrainConfig: patience must be >= 0");
        adam.validate();
    }
};

struct EpochStats {
    double train_loss;
    double val_accuracy;
};

struct TrainHistory {
    std::vector<EpochStats> epochs;
    int best_epoch = -1; // 0-based
    double best_val_accuracy = -1.0;
};

/// Pack dataset samples [B, 3, 1500]; segments are channel-major already.
inline Tensor<float> make_batch(const data::LabeledDataset& ds,
                                const std::vector<std::size_t>& indices,
                                std::size_t from, std::size_t to) {
    const std::size_t b_size = to - from;
    Tensor<float> x({b_size, kSegmentChannels, kSegmentLength});
    for (std::size_t i = 0; i < b_size; ++i)
        std::memcpy(x.ptr() + i * kSegmentChannels * kSegmentLength,
                    ds.samples[indices[from + i]].data.data(),
                    kSegmentChannels * kSegmentLength * sizeof(float));
    return x;
}

template <typename S>
std::vector<int> predict_labels(Resnet1d<S>& model, const data::LabeledDataset& ds,
                                int batch_size = 64) {
    std::vector<int> preds;
    preds.reserve(ds.samples.size());
    std::vector<std::size_t> idx(ds.samples.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t from = 0; from < idx.size(); from += batch_size) {
        const std::size_t to = std::min(idx.size(), from + batch_size);
        Tensor<S> x = make_batch(ds, idx, from, to).template cast<S>();
        Tensor<S> logits = model.forward(x, /*training=*/false);
        const std::size_t classes = logits.shape[1];
        for (std::size_t b = 0; b < to - from; ++b)
            preds.push_back(argmax_class(logits.ptr() + b * classes, classes));
    }
    return preds;
}

template <typename S>
double evaluate_accuracy(Resnet1d<S>& model, const data::LabeledDataset& ds,
                         int batch_size = 64) {
    if (ds.samples.empty()) throw std::invalid_argument("evaluate_accuracy: empty dataset");
    const std::vector<int> preds = predict_labels(model, ds, batch_size);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < preds.size(); ++i)
        if (preds[i] == ds.samples[i].label) ++correct;
    return static_cast<double>(correct) / static_cast<double>(preds.size());
}

/// loss_fn(logits, sample_indices, dlogits) -> batch-mean loss. Gradients
/// must already be scaled by 1/batch.
template <typename LossFn>
TrainHistory train_loop(Resnet1d<float>& model, const data::LabeledDataset& train_set,
                        const data::LabeledDataset& val_set, const TrainConfig& cfg,
                        LossFn&& loss_fn) {
    cfg.validate();
    if (train_set.samples.empty() || val_set.samples.empty())
        throw std::invalid_argument("train: empty train or validation set");

    model.init(cfg.seed);
    std::mt19937 shuffle_rng(cfg.seed + 0x9e3779b9u);

    std::vector<Param<float>*> params;
    model.visit_params([&](const std::string&, Param<float>& p) { params.push_back(&p); });
    Adam<float> optimizer(cfg.adam);

    TrainHistory history;
    std::vector<Tensor<float>> best_state = model.snapshot_state();
    int since_best = 0;

    std::vector<std::size_t> order(train_set.samples.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        double loss_sum = 0.0;
        std::size_t batches = 0;
        for (std::size_t from = 0; from < order.size();
             from += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t to =
                std::min(order.size(), from + static_cast<std::size_t>(cfg.batch_size));
            Tensor<float> x = make_batch(train_set, order, from, to);
            model.zero_grad();
            Tensor<float> logits = model.forward(x, /*training=*/true);
            Tensor<float> dlogits;
            const std::vector<std::size_t> batch_idx(order.begin() + from, order.begin() + to);
            loss_sum += loss_fn(logits, batch_idx, dlogits);
            model.backward(dlogits);
            optimizer.step(params);
            ++batches;
        }

        const double val_acc = evaluate_accuracy(model, val_set, cfg.batch_size);
        history.epochs.push_back({loss_sum / static_cast<double>(batches), val_acc});

        if (val_acc > history.best_val_accuracy) {
            history.best_val_accuracy = val_acc;
            history.best_epoch = epoch;
            best_state = model.snapshot_state();
            since_best = 0;
        } else {
            ++since_best;
            if (since_best > cfg.patience) break;
        }
    }

    model.restore_state(best_state);
    return history;
}

struct TrainedModel {
    Resnet1d<float> model;
    TrainHistory history;
};

/// Cross-entropy training of a fresh network (initialization, batch order,
/// and therefore the result are functions of cfg.seed alone).
inline TrainedModel train_resnet(const Resnet1dConfig& arch,
                                 const data::LabeledDataset& train_set,
                                 const data::LabeledDataset& val_set, const TrainConfig& cfg) {
    TrainedModel out{Resnet1d<float>(arch), {}};
    out.history = train_loop(out.model, train_set, val_set, cfg,
                             [&](const Tensor<float>& logits,
                                 const std::vector<std::size_t>& batch_idx,
                                 Tensor<float>& dlogits) {
                                 std::vector<int> labels(batch_idx.size());
                                 for (std::size_t i = 0; i < batch_idx.size(); ++i)
                                     labels[i] = train_set.samples[batch_idx[i]].label;
                                 return softmax_cross_entropy_batch(logits, labels, dlogits).loss;
                             });
    return out;
}

} // namespace kdessi::nn
