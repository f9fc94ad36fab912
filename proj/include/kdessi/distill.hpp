#pragma once

/// Offline knowledge distillation. The student minimizes
///   alpha * T^2 * KL(softmax(z_s / T) || softmax(p_ve / T))
///     + (1 - alpha) * H(y, softmax(z_s)),
/// where the teacher's probability vector p_ve is itself pushed through the
/// temperature softmax. Setting teacher_log_probs feeds log(p_ve) to the
/// temperature softmax instead, which recovers the formulation that tempers
/// the teacher's logits.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "kdessi/ensemble.hpp"
#include "kdessi/losses.hpp"
#include "kdessi/train.hpp"

namespace kdessi::distill {

struct DistillConfig {
    double alpha = 0.5;
    double temperature = 10.0;
    bool teacher_log_probs = false;
    nn::Resnet1dConfig student_arch = nn::Resnet1dConfig::student();
    nn::TrainConfig train;

    void validate() const {
        if (alpha < 0.0 || alpha > 1.0)
            throw std::invalid_argument("DistillConfig: alpha must be in [0, 1]");
        if (temperature <= 0.0)
            throw std::invalid_argument("DistillConfig: temperature must be > 0");
        train.validate();
    }
};

/// Teacher target distribution: t_softmax of p_ve (or of log p_ve).
template <typename S>
std::vector<S> teacher_soft_target(const std::vector<S>& p_ve, double temperature,
                                   bool teacher_log_probs) {
    nn::check_distribution(p_ve, "kd_loss teacher probabilities");
    if (!teacher_log_probs) return nn::t_softmax(p_ve, temperature);
    std::vector<S> logp(p_ve.size());
    for (std::size_t i = 0; i < p_ve.size(); ++i)
        logp[i] = static_cast<S>(std::log(std::max(static_cast<double>(p_ve[i]), nn::kLogClamp)));
    return nn::t_softmax(logp, temperature);
}

template <typename S>
double kd_loss(const std::vector<S>& student_logits, const std::vector<S>& p_ve, int label,
               double temperature, double alpha, bool teacher_log_probs = false) {
    if (alpha < 0.0 || alpha > 1.0) throw std::invalid_argument("kd_loss: alpha must be in [0, 1]");
    if (student_logits.size() != p_ve.size())
        throw std::invalid_argument("kd_loss: logits/teacher length mismatch");
    const std::vector<S> q = teacher_soft_target(p_ve, temperature, teacher_log_probs);
    const std::vector<S> p = nn::t_softmax(student_logits, temperature);
    const double kl = nn::kl_divergence(p, q);
    const double ce = nn::cross_entropy(nn::t_softmax(student_logits, 1.0), label);
    return alpha * temperature * temperature * kl + (1.0 - alpha) * ce;
}

/// d(kd_loss)/d(student_logits).
template <typename S>
std::vector<S> kd_loss_grad(const std::vector<S>& student_logits, const std::vector<S>& p_ve,
                            int label, double temperature, double alpha,
                            bool teacher_log_probs = false) {
    const std::size_t n = student_logits.size();
    if (label < 0 || static_cast<std::size_t>(label) >= n)
        throw std::invalid_argument("kd_loss_grad: label out of range");
    const std::vector<S> q = teacher_soft_target(p_ve, temperature, teacher_log_probs);
    const std::vector<S> p = nn::t_softmax(student_logits, temperature);
    const std::vector<S> p1 = nn::t_softmax(student_logits, 1.0);

    // KL term: through the tempered softmax, d/dz_j = (1/T) p_j (s_j - sum_i p_i s_i)
    // with s_i = log(p_i / q_i).
    std::vector<double> s(n);
    double s_bar = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        s[i] = std::log(std::max(static_cast<double>(p[i]), nn::kLogClamp)) -
               std::log(std::max(static_cast<double>(q[i]), nn::kLogClamp));
        s_bar += static_cast<double>(p[i]) * s[i];
    }
    std::vector<S> grad(n);
    const double kl_scale = alpha * temperature; // alpha * T^2 * (1/T)
    for (std::size_t i = 0; i < n; ++i) {
        const double dkl = static_cast<double>(p[i]) * (s[i] - s_bar);
        const double dce = static_cast<double>(p1[i]) -
                           (static_cast<std::size_t>(label) == i ? 1.0 : 0.0);
        grad[i] = static_cast<S>(kl_scale * dkl + (1.0 - alpha) * dce);
    }
    return grad;
}

struct DistilledStudent {
    nn::Resnet1d<float> model;
    nn::TrainHistory history;
};

/// Train a fresh student against a frozen teacher. Teacher outputs are
/// precomputed per training sample; gradients never reach the teacher.
inline DistilledStudent distill_train(ensemble::EnsembleModel& teacher, const DistillConfig& cfg,
                                      const data::LabeledDataset& train_set,
                                      const data::LabeledDataset& val_set) {
    cfg.validate();

    // Teacher soft labels for the whole training set, in sample order.
    const std::size_t n = train_set.samples.size();
    const std::size_t classes = static_cast<std::size_t>(cfg.student_arch.class_count);
    std::vector<std::vector<float>> teacher_probs(n);
    {
        std::vector<std::size_t> idx(n);
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        const std::size_t chunk = 64;
        for (std::size_t from = 0; from < n; from += chunk) {
            const std::size_t to = std::min(n, from + chunk);
            nn::Tensor<float> x = nn::make_batch(train_set, idx, from, to);
            nn::Tensor<float> p = ensemble::ensemble_probs(teacher, x);
            for (std::size_t b = 0; b < to - from; ++b)
                teacher_probs[from + b].assign(p.ptr() + b * classes, p.ptr() + (b + 1) * classes);
        }
    }

    DistilledStudent out{nn::Resnet1d<float>(cfg.student_arch), {}};
    out.history = nn::train_loop(
        out.model, train_set, val_set, cfg.train,
        [&](const nn::Tensor<float>& logits, const std::vector<std::size_t>& batch_idx,
            nn::Tensor<float>& dlogits) {
            const std::size_t batch = logits.shape[0];
            dlogits = nn::Tensor<float>(logits.shape);
            double total = 0.0;
            const float inv_b = 1.0f / static_cast<float>(batch);
            for (std::size_t b = 0; b < batch; ++b) {
                const std::size_t sample = batch_idx[b];
                std::vector<float> z(logits.ptr() + b * classes, logits.ptr() + (b + 1) * classes);
                const int y = train_set.samples[sample].label;
                total += kd_loss(z, teacher_probs[sample], y, cfg.temperature, cfg.alpha,
                                 cfg.teacher_log_probs);
                const std::vector<float> g = kd_loss_grad(z, teacher_probs[sample], y,
                                                          cfg.temperature, cfg.alpha,
                                                          cfg.teacher_log_probs);
                float* dz = dlogits.ptr() + b * classes;
                for (std::size_t c = 0; c < classes; ++c) dz[c] = g[c] * inv_b;
            }
            return total / static_cast<double>(batch);
        });
    return out;
}

} // namespace kdessi::distill
