#pragma once

/// Adam with bias correction.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "kdessi/tensor.hpp"

namespace kdessi::nn {

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    void validate() const {
        if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0)
            throw std::invalid_argument("Adam: betas must be in [0, 1)");
        if (epsilon <= 0.0) throw std::invalid_argument("Adam: epsilon must be > 0");
    }
};

template <typename S>
class Adam {
public:
    explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) { cfg_.validate(); }

    /// Params must be passed in a stable order; moment buffers are allocated
    /// lazily on the first step.
    void step(const std::vector<Param<S>*>& params) {
        if (m_.empty()) {
            for (auto* p : params) {
                m_.emplace_back(p->value.shape);
                v_.emplace_back(p->value.shape);
            }
        }
        if (m_.size() != params.size())
            throw std::invalid_argument("Adam: parameter set changed between steps");
        ++step_count_;
        const S lr = static_cast<S>(cfg_.learning_rate);
        const S b1 = static_cast<S>(cfg_.beta1), b2 = static_cast<S>(cfg_.beta2);
        const S eps = static_cast<S>(cfg_.epsilon);
        const S corr1 = static_cast<S>(1.0 - std::pow(cfg_.beta1, step_count_));
        const S corr2 = static_cast<S>(1.0 - std::pow(cfg_.beta2, step_count_));
        for (std::size_t i = 0; i < params.size(); ++i) {
            auto& value = params[i]->value.data;
            const auto& grad = params[i]->grad.data;
            auto& m = m_[i].data;
            auto& v = v_[i].data;
            for (std::size_t j = 0; j < value.size(); ++j) {
                const S g = grad[j];
                m[j] = b1 * m[j] + (S(1) - b1) * g;
                v[j] = b2 * v[j] + (S(1) - b2) * g * g;
                const S mhat = m[j] / corr1;
                const S vhat = v[j] / corr2;
                value[j] -= lr * mhat / (std::sqrt(vhat) + eps);
            }
        }
    }

    long step_count() const { return step_count_; }
    const AdamConfig& config() const { return cfg_; }

private:
    AdamConfig cfg_;
    long step_count_ = 0;
    std::vector<Tensor<S>> m_, v_;
};

} // namespace kdessi::nn
