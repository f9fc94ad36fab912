#pragma once

/// Probability-space primitives: temperature softmax, cross-entropy on hard
/// labels, KL divergence, and the fused softmax/cross-entropy used by the
/// training loop.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "kdessi/tensor.hpp"

namespace kdessi::nn {

inline constexpr double kLogClamp = 1e-12;

/// p_i = exp(z_i / T) / sum_j exp(z_j / T), computed with max subtraction.
template <typename S>
std::vector<S> t_softmax(const std::vector<S>& logits, double temperature) {
    if (temperature <= 0.0) throw std::invalid_argument("t_softmax: temperature must be > 0");
    if (logits.empty()) throw std::invalid_argument("t_softmax: empty logits");
    const S zmax = *std::max_element(logits.begin(), logits.end());
    std::vector<S> p(logits.size());
    double denom = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        const double e = std::exp((static_cast<double>(logits[i]) - zmax) / temperature);
        p[i] = static_cast<S>(e);
        denom += e;
    }
    const double inv = 1.0 / denom;
    for (auto& v : p) v = static_cast<S>(v * inv);
    return p;
}

template <typename S>
double cross_entropy(const std::vector<S>& probs, int label) {
    if (label < 0 || static_cast<std::size_t>(label) >= probs.size())
        throw std::invalid_argument("cross_entropy: label out of range");
    return -std::log(std::max(static_cast<double>(probs[label]), kLogClamp));
}

/// sum_i p_i log(p_i / q_i) with 0 log 0 = 0 and q clamped away from zero.
template <typename S>
double kl_divergence(const std::vector<S>& p, const std::vector<S>& q) {
    if (p.size() != q.size()) throw std::invalid_argument("kl_divergence: length mismatch");
    double kl = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double pi = p[i];
        if (pi <= 0.0) continue;
        const double qi = std::max(static_cast<double>(q[i]), kLogClamp);
        kl += pi * (std::log(pi) - std::log(qi));
    }
    return kl;
}

template <typename S>
void check_distribution(const std::vector<S>& p, const char* what) {
    double sum = 0.0;
    for (S v : p) {
        if (v < S(0)) throw std::invalid_argument(std::string(what) + ": negative probability");
        sum += v;
    }
    if (std::fabs(sum - 1.0) > 1e-6)
        throw std::invalid_argument(std::string(what) + ": probabilities must sum to 1");
}

struct BatchLoss {
    double loss; // mean over the batch
};

/// Mean cross-entropy straight from logits [B, C]; writes d(loss)/d(logits)
/// into dlogits using the softmax - onehot form.
template <typename S>
BatchLoss softmax_cross_entropy_batch(const Tensor<S>& logits, const std::vector<int>& labels,
                                      Tensor<S>& dlogits) {
    const std::size_t batch = logits.shape[0], classes = logits.shape[1];
    if (labels.size() != batch)
        throw std::invalid_argument("softmax_cross_entropy_batch: label count mismatch");
    dlogits = Tensor<S>(logits.shape);
    double total = 0.0;
    const double inv_b = 1.0 / static_cast<double>(batch);
    for (std::size_t b = 0; b < batch; ++b) {
        const S* z = logits.ptr() + b * classes;
        S* dz = dlogits.ptr() + b * classes;
        const int y = labels[b];
        if (y < 0 || static_cast<std::size_t>(y) >= classes)
            throw std::invalid_argument("softmax_cross_entropy_batch: label out of range");
        const double zmax = *std::max_element(z, z + classes);
        double denom = 0.0;
        for (std::size_t c = 0; c < classes; ++c) denom += std::exp(z[c] - zmax);
        const double log_denom = std::log(denom);
        total += -(static_cast<double>(z[y]) - zmax - log_denom);
        for (std::size_t c = 0; c < classes; ++c) {
            const double p = std::exp(z[c] - zmax) / denom;
            dz[c] = static_cast<S>((p - (static_cast<std::size_t>(y) == c ? 1.0 : 0.0)) * inv_b);
        }
    }
    return {total * inv_b};
}

/// argmax with ties broken toward the lowest class index.
template <typename S>
int argmax_class(const S* values, std::size_t count) {
    int best = 0;
    for (std::size_t c = 1; c < count; ++c)
        if (values[c] > values[best]) best = static_cast<int>(c);
    return best;
}

} // namespace kdessi::nn
