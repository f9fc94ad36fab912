#pragma once

/// 1D residual network: 7-wide stride-2 stem, four stages of residual blocks
/// (two 3-wide convolutions each, projection shortcut on shape change),
/// global average pooling, linear head. The default geometry has 14 blocks
/// for 29 convolutional layers total.

#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "kdessi/nn_layers.hpp"
#include "kdessi/tensor.hpp"

namespace kdessi::nn {

struct Resnet1dConfig {
    int input_channels = 3;
    int input_length = 1500;
    int stem_channels = 16;
    int stem_kernel = 7;
    int stem_stride = 2;
    std::vector<int> stage_widths = {16, 32, 64, 128};
    std::vector<int> stage_blocks = {3, 4, 4, 3};
    int class_count = 26;

    int total_blocks() const {
        int n = 0;
        for (int b : stage_blocks) n += b;
        return n;
    }
    /// Stem plus two convolutions per block (projection shortcuts excluded,
    /// as in the usual depth count).
    int conv_layer_count() const { return 1 + 2 * total_blocks(); }

    void validate() const {
        if (stage_widths.size() != stage_blocks.size() || stage_widths.empty())
            throw std::invalid_argument("Resnet1dConfig: stage widths/blocks mismatch");
        for (int w : stage_widths)
            if (w < 1) throw std::invalid_argument("Resnet1dConfig: bad stage width");
        for (int b : stage_blocks)
            if (b < 1) throw std::invalid_argument("Resnet1dConfig: bad block count");
        if (input_channels < 1 || input_length < 1 || class_count < 2)
            throw std::invalid_argument("Resnet1dConfig: bad dimensions");
    }

    /// Full-size backbone (29 conv layers).
    static Resnet1dConfig paper() { return Resnet1dConfig{}; }

    /// Compact student: one block per stage (9 conv layers), half-width.
    static Resnet1dConfig student() {
        Resnet1dConfig c;
        c.stem_channels = 8;
        c.stage_widths = {8, 16, 32, 64};
        c.stage_blocks = {1, 1, 1, 1};
        return c;
    }

    /// Width-scaled copy (>= 1 channel per stage); depth unchanged.
    Resnet1dConfig scaled_width(double factor) const {
        Resnet1dConfig c = *this;
        c.stem_channels = std::max(1, static_cast<int>(stem_channels * factor));
        for (auto& w : c.stage_widths) w = std::max(1, static_cast<int>(w * factor));
        return c;
    }

    nlohmann::json to_json() const {
        return {{"input_channels", input_channels}, {"input_length", input_length},
                {"stem_channels", stem_channels},   {"stem_kernel", stem_kernel},
                {"stem_stride", stem_stride},       {"stage_widths", stage_widths},
                {"stage_blocks", stage_blocks},     {"class_count", class_count}};
    }
    static Resnet1dConfig from_json(const nlohmann::json& j) {
        Resnet1dConfig c;
        c.input_channels = j.at("input_channels");
        c.input_length = j.at("input_length");
        c.stem_channels = j.at("stem_channels");
        c.stem_kernel = j.at("stem_kernel");
        c.stem_stride = j.at("stem_stride");
        c.stage_widths = j.at("stage_widths").get<std::vector<int>>();
        c.stage_blocks = j.at("stage_blocks").get<std::vector<int>>();
        c.class_count = j.at("class_count");
        return c;
    }
};

/// conv-bn-relu-conv-bn plus shortcut, ReLU after the sum.
template <typename S>
struct ResidualBlock {
    Conv1d<S> conv1, conv2;
    BatchNorm1d<S> bn1, bn2;
    Relu<S> relu1, relu2;
    bool projected = false;
    Conv1d<S> proj;
    BatchNorm1d<S> proj_bn;

    ResidualBlock() = default;
    ResidualBlock(int in_ch, int out_ch, int stride)
        : conv1(in_ch, out_ch, 3, stride, 1),
          conv2(out_ch, out_ch, 3, 1, 1),
          bn1(out_ch), bn2(out_ch),
          projected(in_ch != out_ch || stride != 1) {
        if (projected) {
            proj = Conv1d<S>(in_ch, out_ch, 1, stride, 0);
            proj_bn = BatchNorm1d<S>(out_ch);
        }
    }

    void init(std::mt19937& rng) {
        conv1.init(rng);
        conv2.init(rng);
        if (projected) proj.init(rng);
    }

    Tensor<S> forward(const Tensor<S>& x, bool training) {
        Tensor<S> f = bn1.forward(conv1.forward(x, training), training);
        f = relu1.forward(f, training);
        f = bn2.forward(conv2.forward(f, training), training);

        if (projected) {
            Tensor<S> shortcut = proj_bn.forward(proj.forward(x, training), training);
            if (f.shape != shortcut.shape)
                throw std::invalid_argument("residual block: branch shape mismatch");
            for (std::size_t i = 0; i < f.numel(); ++i) f.data[i] += shortcut.data[i];
        } else {
            if (f.shape != x.shape)
                throw std::invalid_argument("residual block: branch shape mismatch");
            for (std::size_t i = 0; i < f.numel(); ++i) f.data[i] += x.data[i];
        }
        return relu2.forward(f, training);
    }

    Tensor<S> backward(const Tensor<S>& dy) {
        Tensor<S> d = relu2.backward(dy);
        // d splits into the residual branch and the shortcut.
        Tensor<S> dres = bn2.backward(d);
        dres = conv2.backward(dres);
        dres = relu1.backward(dres);
        dres = bn1.backward(dres);
        Tensor<S> dx = conv1.backward(dres);

        if (projected) {
            Tensor<S> dshort = proj_bn.backward(d);
            dshort = proj.backward(dshort);
            for (std::size_t i = 0; i < dx.numel(); ++i) dx.data[i] += dshort.data[i];
        } else {
            for (std::size_t i = 0; i < dx.numel(); ++i) dx.data[i] += d.data[i];
        }
        return dx;
    }

    template <typename F>
    void visit_params(F&& f) {
        f("conv1.weight", conv1.weight);
        f("conv1.bias", conv1.bias);
        f("bn1.gamma", bn1.gamma);
        f("bn1.beta", bn1.beta);
        f("conv2.weight", conv2.weight);
        f("conv2.bias", conv2.bias);
        f("bn2.gamma", bn2.gamma);
        f("bn2.beta", bn2.beta);
        if (projected) {
            f("proj.weight", proj.weight);
            f("proj.bias", proj.bias);
            f("proj_bn.gamma", proj_bn.gamma);
            f("proj_bn.beta", proj_bn.beta);
        }
    }

    template <typename F>
    void visit_buffers(F&& f) {
        f("bn1.running_mean", bn1.running_mean);
        f("bn1.running_var", bn1.running_var);
        f("bn2.running_mean", bn2.running_mean);
        f("bn2.running_var", bn2.running_var);
        if (projected) {
            f("proj_bn.running_mean", proj_bn.running_mean);
            f("proj_bn.running_var", proj_bn.running_var);
        }
    }
};

template <typename S>
struct Resnet1d {
    Resnet1dConfig cfg;
    Conv1d<S> stem;
    BatchNorm1d<S> stem_bn;
    Relu<S> stem_relu;
    std::vector<ResidualBlock<S>> blocks;
    GlobalAvgPool<S> pool;
    Linear<S> head;

    Resnet1d() = default;
    explicit Resnet1d(const Resnet1dConfig& config) : cfg(config) {
        cfg.validate();
        stem = Conv1d<S>(cfg.input_channels, cfg.stem_channels, cfg.stem_kernel,
                         cfg.stem_stride, cfg.stem_kernel / 2);
        stem_bn = BatchNorm1d<S>(cfg.stem_channels);
        int in_ch = cfg.stem_channels;
        for (std::size_t s = 0; s < cfg.stage_widths.size(); ++s) {
            const int width = cfg.stage_widths[s];
            for (int b = 0; b < cfg.stage_blocks[s]; ++b) {
                const int stride = (b == 0 && s > 0) ? 2 : 1;
                blocks.emplace_back(in_ch, width, stride);
                in_ch = width;
            }
        }
        head = Linear<S>(in_ch, cfg.class_count);
    }

    void init(std::uint32_t seed) {
        std::mt19937 rng(seed);
        stem.init(rng);
        for (auto& b : blocks) b.init(rng);
        head.init(rng);
    }

    /// x: [B, input_channels, input_length] -> logits [B, class_count].
    Tensor<S> forward(const Tensor<S>& x, bool training = false) {
        if (x.shape.size() != 3 ||
            x.shape[1] != static_cast<std::size_t>(cfg.input_channels) ||
            x.shape[2] != static_cast<std::size_t>(cfg.input_length))
            throw std::invalid_argument("resnet1d: input must be [B, " +
                                        std::to_string(cfg.input_channels) + ", " +
                                        std::to_string(cfg.input_length) + "]");
        Tensor<S> h = stem_relu.forward(stem_bn.forward(stem.forward(x, training), training), training);
        for (auto& b : blocks) h = b.forward(h, training);
        h = pool.forward(h, training);
        return head.forward(h, training);
    }

    /// Backward from dlogits; parameter gradients accumulate into the params.
    Tensor<S> backward(const Tensor<S>& dlogits) {
        Tensor<S> d = head.backward(dlogits);
        d = pool.backward(d);
        for (std::size_t i = blocks.size(); i-- > 0;) d = blocks[i].backward(d);
        d = stem_relu.backward(d);
        d = stem_bn.backward(d);
        return stem.backward(d);
    }

    template <typename F>
    void visit_params(F&& f) {
        f("stem.weight", stem.weight);
        f("stem.bias", stem.bias);
        f("stem_bn.gamma", stem_bn.gamma);
        f("stem_bn.beta", stem_bn.beta);
        for (std::size_t i = 0; i < blocks.size(); ++i) {
            const std::string prefix = "block" + std::to_string(i) + ".";
            blocks[i].visit_params([&](const std::string& name, Param<S>& p) {
                f(prefix + name, p);
            });
        }
        f("head.weight", head.weight);
        f("head.bias", head.bias);
    }

    template <typename F>
    void visit_buffers(F&& f) {
        f("stem_bn.running_mean", stem_bn.running_mean);
        f("stem_bn.running_var", stem_bn.running_var);
        for (std::size_t i = 0; i < blocks.size(); ++i) {
            const std::string prefix = "block" + std::to_string(i) + ".";
            blocks[i].visit_buffers([&](const std::string& name, Tensor<S>& t) {
                f(prefix + name, t);
            });
        }
    }

    void zero_grad() {
        visit_params([](const std::string&, Param<S>& p) { p.zero_grad(); });
    }

    std::size_t param_count() {
        std::size_t n = 0;
        visit_params([&](const std::string&, Param<S>& p) { n += p.value.numel(); });
        return n;
    }

    /// Deep copy of all learnable values and running statistics.
    std::vector<Tensor<S>> snapshot_state() {
        std::vector<Tensor<S>> state;
        visit_params([&](const std::string&, Param<S>& p) { state.push_back(p.value); });
        visit_buffers([&](const std::string&, Tensor<S>& t) { state.push_back(t); });
        return state;
    }

    void restore_state(const std::vector<Tensor<S>>& state) {
        std::size_t i = 0;
        visit_params([&](const std::string&, Param<S>& p) { p.value = state.at(i++); });
        visit_buffers([&](const std::string&, Tensor<S>& t) { t = state.at(i++); });
        if (i != state.size()) throw std::invalid_argument("restore_state: state size mismatch");
    }
};

} // namespace kdessi::nn
